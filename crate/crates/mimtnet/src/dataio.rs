//! Dataset I/O and synthetic corpus generation.
//!
//! The on-disk format is plain CSV: UTF-8, comma separated, one header line,
//! feature columns named `x_<name>` followed by label columns named
//! `y_<name>`, every cell exactly `0` or `1`, rows terminated by a single
//! line feed, no quoting.
//!
//! The synthetic generator plants a known symptom-to-task mapping: each task
//! owns a disjoint set of key features and (absent label noise) a task label
//! is 1 exactly when at least one of its key features is active. The returned
//! ground truth makes that rule available as a test oracle.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::seeds;

/// A binary multi-label dataset: p samples, d features, n tasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub features: Vec<Vec<u8>>,
    pub labels: Vec<Vec<u8>>,
    pub feature_names: Vec<String>,
    pub label_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Vec<Vec<u8>>,
        labels: Vec<Vec<u8>>,
        feature_names: Vec<String>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        let ds = Dataset {
            features,
            labels,
            feature_names,
            label_names,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn sample_count(&self) -> usize {
        self.features.len()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    pub fn task_count(&self) -> usize {
        self.label_names.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.len() != self.labels.len() {
            return Err(Error::Shape(format!(
                "feature rows ({}) != label rows ({})",
                self.features.len(),
                self.labels.len()
            )));
        }
        let d = self.feature_names.len();
        let n = self.label_names.len();
        for (i, row) in self.features.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Shape(format!(
                    "feature row {i} has width {} (expected {d})",
                    row.len()
                )));
            }
            if row.iter().any(|&v| v > 1) {
                return Err(Error::Shape(format!("feature row {i} has a non-binary cell")));
            }
        }
        for (i, row) in self.labels.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Shape(format!(
                    "label row {i} has width {} (expected {n})",
                    row.len()
                )));
            }
            if row.iter().any(|&v| v > 1) {
                return Err(Error::Shape(format!("label row {i} has a non-binary cell")));
            }
        }
        for names in [&self.feature_names, &self.label_names] {
            let mut seen = std::collections::HashSet::new();
            for name in names {
                if !seen.insert(name) {
                    return Err(Error::Schema(format!("duplicate column name {name:?}")));
                }
            }
        }
        Ok(())
    }

    /// Restrict to the given row indices (in the given order).
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
            label_names: self.label_names.clone(),
        }
    }

    /// Positive count per task.
    pub fn task_positives(&self) -> Vec<usize> {
        let n = self.task_count();
        let mut counts = vec![0usize; n];
        for row in &self.labels {
            for (t, &v) in row.iter().enumerate() {
                counts[t] += usize::from(v);
            }
        }
        counts
    }
}

/// Parameters of the synthetic corpus generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub patients: usize,
    pub features: usize,
    pub tasks: usize,
    pub keys_per_task: usize,
    pub max_active_tasks: usize,
    pub max_symptoms: usize,
    pub background_rate: f64,
    pub label_flip_rate: f64,
    pub min_task_frequency: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            patients: 1180,
            features: 186,
            tasks: 12,
            keys_per_task: 5,
            max_active_tasks: 4,
            max_symptoms: 18,
            background_rate: 0.03,
            label_flip_rate: 0.0,
            min_task_frequency: 50,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.patients == 0 || self.features == 0 || self.tasks == 0 {
            return Err(Error::Parameter(
                "patients, features, and tasks must all be positive".into(),
            ));
        }
        if self.keys_per_task == 0 || self.max_active_tasks == 0 || self.max_symptoms == 0 {
            return Err(Error::Parameter(
                "keys_per_task, max_active_tasks, and max_symptoms must all be positive".into(),
            ));
        }
        if self.keys_per_task * self.tasks > self.features {
            return Err(Error::Parameter(format!(
                "keys_per_task * tasks = {} exceeds features = {} (key sets are disjoint)",
                self.keys_per_task * self.tasks,
                self.features
            )));
        }
        if self.max_active_tasks > self.tasks {
            return Err(Error::Parameter(format!(
                "max_active_tasks = {} exceeds tasks = {}",
                self.max_active_tasks, self.tasks
            )));
        }
        for (name, p) in [
            ("background_rate", self.background_rate),
            ("label_flip_rate", self.label_flip_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Parameter(format!("{name} = {p} is not in [0, 1]")));
            }
        }
        Ok(())
    }
}

const GENERATION_ATTEMPTS: usize = 1000;

/// Generate a corpus with a planted symptom-to-task mapping.
///
/// Returns the dataset and the per-task key feature indices (the ground
/// truth). Deterministic in the spec, including the seed.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Dataset, Vec<Vec<usize>>)> {
    spec.validate()?;
    let mut rng = seeds::rng_from(spec.seed);
    let d = spec.features;
    let n = spec.tasks;

    // Disjoint key sets: chunks of a seeded permutation of the feature indices.
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(&mut rng);
    let keys: Vec<Vec<usize>> = (0..n)
        .map(|t| {
            let mut ks = perm[t * spec.keys_per_task..(t + 1) * spec.keys_per_task].to_vec();
            ks.sort_unstable();
            ks
        })
        .collect();
    let mut is_key = vec![false; d];
    for ks in &keys {
        for &f in ks {
            is_key[f] = true;
        }
    }
    let background: Vec<usize> = (0..d).filter(|&f| !is_key[f]).collect();

    for _ in 0..GENERATION_ATTEMPTS {
        let mut feature_rows = Vec::with_capacity(spec.patients);
        let mut label_rows = Vec::with_capacity(spec.patients);
        for _ in 0..spec.patients {
            let (features, labels) = generate_patient(spec, &keys, &background, &mut rng)?;
            feature_rows.push(features);
            label_rows.push(labels);
        }
        let candidate = Dataset {
            features: feature_rows,
            labels: label_rows,
            feature_names: (0..d).map(|f| format!("f{f:03}")).collect(),
            label_names: (0..n).map(|t| format!("t{t:02}")).collect(),
        };
        if candidate
            .task_positives()
            .iter()
            .all(|&c| c >= spec.min_task_frequency)
        {
            return Ok((candidate, keys));
        }
    }
    Err(Error::Generation(format!(
        "could not reach {} positives for every task in {GENERATION_ATTEMPTS} attempts; \
         increase patients or lower min_task_frequency",
        spec.min_task_frequency
    )))
}

fn generate_patient(
    spec: &SyntheticSpec,
    keys: &[Vec<usize>],
    background: &[usize],
    rng: &mut impl Rng,
) -> Result<(Vec<u8>, Vec<u8>)> {
    let d = spec.features;
    let n = spec.tasks;

    // Key activations alone must fit under max_symptoms; redraw the patient
    // if an extreme draw exceeds it (background removal cannot help there).
    let mut attempts = 0;
    let (active_tasks, mut row) = loop {
        let count = rng.gen_range(1..=spec.max_active_tasks);
        let mut tasks: Vec<usize> = (0..n).collect();
        tasks.shuffle(rng);
        tasks.truncate(count);
        tasks.sort_unstable();

        let mut row = vec![0u8; d];
        for &t in &tasks {
            // Uniformly chosen nonempty subset of the task's keys.
            loop {
                let mut any = false;
                for &f in &keys[t] {
                    if rng.gen_bool(0.5) {
                        row[f] = 1;
                        any = true;
                    }
                }
                if any {
                    break;
                }
            }
        }
        let active = row.iter().filter(|&&v| v == 1).count();
        if active <= spec.max_symptoms {
            break (tasks, row);
        }
        for v in &mut row {
            *v = 0;
        }
        attempts += 1;
        if attempts >= GENERATION_ATTEMPTS {
            return Err(Error::Generation(
                "key activations alone cannot fit under max_symptoms; \
                 raise max_symptoms or lower keys_per_task/max_active_tasks"
                    .into(),
            ));
        }
    };

    // Background activations on non-key features only, keeping labels an
    // exact function of key activations.
    for &f in background {
        if rng.gen_bool(spec.background_rate) {
            row[f] = 1;
        }
    }

    // Trim background overflow above max_symptoms.
    let mut active_background: Vec<usize> =
        background.iter().copied().filter(|&f| row[f] == 1).collect();
    let mut total = row.iter().filter(|&&v| v == 1).count();
    while total > spec.max_symptoms && !active_background.is_empty() {
        let ix = rng.gen_range(0..active_background.len());
        let f = active_background.swap_remove(ix);
        row[f] = 0;
        total -= 1;
    }

    // Pad sparse rows up to the two-symptom minimum. With the background
    // process disabled (rate 0) only key features may ever be active, so the
    // padding draws from unused keys of the active tasks; either way the
    // planted label rule still holds.
    while total < 2 {
        let inactive: Vec<usize> = if spec.background_rate > 0.0 {
            background.iter().copied().filter(|&f| row[f] == 0).collect()
        } else {
            Vec::new()
        };
        let candidates = if inactive.is_empty() {
            active_tasks
                .iter()
                .flat_map(|&t| keys[t].iter().copied())
                .filter(|&f| row[f] == 0)
                .collect()
        } else {
            inactive
        };
        if candidates.is_empty() {
            break;
        }
        let f = candidates[rng.gen_range(0..candidates.len())];
        row[f] = 1;
        total += 1;
    }

    let mut labels = vec![0u8; n];
    for &t in &active_tasks {
        labels[t] = 1;
    }
    if spec.label_flip_rate > 0.0 {
        for v in &mut labels {
            if rng.gen_bool(spec.label_flip_rate) {
                *v ^= 1;
            }
        }
    }
    Ok((row, labels))
}

/// Load a dataset from the fixed CSV format.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

pub(crate) fn parse_csv(text: &str) -> Result<Dataset> {
    let mut lines = text.split('\n');
    let header = lines
        .next()
        .filter(|h| !h.is_empty())
        .ok_or_else(|| Error::Schema("empty file: missing header".into()))?;

    let mut feature_names = Vec::new();
    let mut label_names = Vec::new();
    let mut columns = Vec::new();
    for col in header.split(',') {
        if let Some(name) = col.strip_prefix("x_") {
            if !label_names.is_empty() {
                return Err(Error::Schema(format!(
                    "feature column {col:?} appears after label columns"
                )));
            }
            feature_names.push(name.to_string());
        } else if let Some(name) = col.strip_prefix("y_") {
            label_names.push(name.to_string());
        } else {
            return Err(Error::Schema(format!(
                "column {col:?} has neither x_ nor y_ prefix"
            )));
        }
        columns.push(col.to_string());
    }
    if feature_names.is_empty() {
        return Err(Error::Schema("no x_ feature columns".into()));
    }
    if label_names.is_empty() {
        return Err(Error::Schema("no y_ label columns".into()));
    }
    let d = feature_names.len();
    let width = columns.len();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (row_ix, line) in lines.enumerate() {
        if line.is_empty() {
            continue; // trailing newline
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != width {
            return Err(Error::Parse {
                row: row_ix + 1,
                column: String::new(),
                message: format!("row has {} cells, expected {width}", cells.len()),
            });
        }
        let mut frow = Vec::with_capacity(d);
        let mut lrow = Vec::with_capacity(width - d);
        for (col_ix, cell) in cells.iter().enumerate() {
            let value = match *cell {
                "0" => 0u8,
                "1" => 1u8,
                other => {
                    return Err(Error::Parse {
                        row: row_ix + 1,
                        column: columns[col_ix].clone(),
                        message: format!("cell {other:?} is not 0 or 1"),
                    })
                }
            };
            if col_ix < d {
                frow.push(value);
            } else {
                lrow.push(value);
            }
        }
        features.push(frow);
        labels.push(lrow);
    }

    Dataset::new(features, labels, feature_names, label_names)
}

/// Serialize a dataset into the fixed CSV format.
pub fn to_csv_string(ds: &Dataset) -> Result<String> {
    ds.validate()?;
    let mut out = String::new();
    let header: Vec<String> = ds
        .feature_names
        .iter()
        .map(|n| format!("x_{n}"))
        .chain(ds.label_names.iter().map(|n| format!("y_{n}")))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (frow, lrow) in ds.features.iter().zip(&ds.labels) {
        let mut first = true;
        for &v in frow.iter().chain(lrow.iter()) {
            if !first {
                out.push(',');
            }
            let _ = write!(out, "{v}");
            first = false;
        }
        out.push('\n');
    }
    Ok(out)
}

/// Write a dataset to disk in the fixed CSV format.
pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = to_csv_string(ds)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
