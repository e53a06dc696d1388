//! Model persistence: a single self-describing text document, format
//! version `mimtnet-model-v1`.
//!
//! Floating-point values are written as decimal text with 17 significant
//! digits, which round-trips f64 bit-exactly, so a reloaded model reproduces
//! predictions bit for bit. The same container holds all three model kinds.

use std::fmt::Write as _;
use std::path::Path;

use crate::baselines::{self, MlknnModel, MlpModel};
use crate::error::{Error, Result};
use crate::network::ModelParams;
use crate::sampler::ProposalSet;
use crate::training::{self, Model, TrainConfig};

pub const MODEL_FORMAT_VERSION: &str = "mimtnet-model-v1";

/// Any trainable model the CLI can store and reload.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Mimtcnn(Model),
    Mlknn(MlknnModel),
    Mlp(MlpModel),
}

impl AnyModel {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyModel::Mimtcnn(_) => "mimtcnn",
            AnyModel::Mlknn(_) => "mlknn",
            AnyModel::Mlp(_) => "mlp",
        }
    }

    pub fn feature_names(&self) -> &[String] {
        match self {
            AnyModel::Mimtcnn(m) => &m.feature_names,
            AnyModel::Mlknn(m) => &m.feature_names,
            AnyModel::Mlp(m) => &m.feature_names,
        }
    }

    pub fn label_names(&self) -> &[String] {
        match self {
            AnyModel::Mimtcnn(m) => &m.label_names,
            AnyModel::Mlknn(m) => &m.label_names,
            AnyModel::Mlp(m) => &m.label_names,
        }
    }

    /// Probabilities and 0.5-thresholded hard labels.
    pub fn predict(&self, features: &[Vec<u8>]) -> Result<(Vec<Vec<f64>>, Vec<Vec<u8>>)> {
        match self {
            AnyModel::Mimtcnn(m) => training::predict(m, features),
            AnyModel::Mlp(m) => baselines::mlp_predict(m, features),
            AnyModel::Mlknn(m) => {
                let probs = baselines::mlknn_predict(m, features)?;
                let hard = probs
                    .iter()
                    .map(|row| row.iter().map(|&p| u8::from(p > 0.5)).collect())
                    .collect();
                Ok((probs, hard))
            }
        }
    }
}

/// 17 significant digits; parses back to the identical f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_names(out: &mut String, tag: &str, names: &[String]) {
    let _ = writeln!(out, "{tag} {}", names.len());
    for name in names {
        out.push_str(name);
        out.push('\n');
    }
}

fn write_matrix(out: &mut String, name: &str, rows: usize, cols: usize, data: &[f64]) {
    debug_assert_eq!(rows * cols, data.len());
    let _ = writeln!(out, "matrix {name} {rows} {cols}");
    for row in data.chunks(cols) {
        let mut first = true;
        for &v in row {
            if !first {
                out.push(' ');
            }
            out.push_str(&fmt_f64(v));
            first = false;
        }
        out.push('\n');
    }
}

fn write_binmatrix(out: &mut String, name: &str, rows: &[Vec<u8>], cols: usize) {
    let _ = writeln!(out, "binmatrix {name} {} {cols}", rows.len());
    for row in rows {
        for &v in row {
            out.push(if v == 1 { '1' } else { '0' });
        }
        out.push('\n');
    }
}

fn write_config(out: &mut String, c: &TrainConfig) {
    let _ = writeln!(out, "config epochs {}", c.epochs);
    let _ = writeln!(out, "config learning_rate {}", fmt_f64(c.learning_rate));
    let _ = writeln!(out, "config proposals {}", c.proposals);
    let _ = writeln!(out, "config max_size {}", c.max_size);
    let _ = writeln!(out, "config filters {}", c.filters);
    let _ = writeln!(out, "config hidden {}", c.hidden);
    let _ = writeln!(out, "config adam_beta1 {}", fmt_f64(c.adam_beta1));
    let _ = writeln!(out, "config adam_beta2 {}", fmt_f64(c.adam_beta2));
    let _ = writeln!(out, "config adam_epsilon {}", fmt_f64(c.adam_epsilon));
    let _ = writeln!(out, "config seed {}", c.seed);
}

/// Serialize any model to the v1 document.
pub fn to_document(model: &AnyModel) -> String {
    let mut out = String::new();
    out.push_str(MODEL_FORMAT_VERSION);
    out.push('\n');
    let _ = writeln!(out, "kind {}", model.kind());
    write_names(&mut out, "feature_names", model.feature_names());
    write_names(&mut out, "label_names", model.label_names());
    match model {
        AnyModel::Mimtcnn(m) => {
            write_config(&mut out, &m.config);
            let ps = &m.proposal_set;
            let _ = writeln!(
                out,
                "proposals {} {} {} {}",
                ps.count(),
                ps.max_size,
                ps.feature_count,
                ps.seed
            );
            for prop in &ps.proposals {
                out.push_str("proposal");
                for &ix in prop {
                    let _ = write!(out, " {ix}");
                }
                out.push('\n');
            }
            let p = &m.params;
            write_matrix(&mut out, "conv_w", p.filters, p.max_size, &p.conv_w);
            write_matrix(&mut out, "conv_b", 1, p.filters, &p.conv_b);
            write_matrix(&mut out, "fc1_w", p.hidden, p.filters, &p.fc1_w);
            write_matrix(&mut out, "fc1_b", 1, p.hidden, &p.fc1_b);
            write_matrix(&mut out, "fc2_w", p.tasks, p.hidden, &p.fc2_w);
            write_matrix(&mut out, "fc2_b", 1, p.tasks, &p.fc2_b);
        }
        AnyModel::Mlknn(m) => {
            let _ = writeln!(
                out,
                "knn {} {} {}",
                m.k,
                fmt_f64(m.smoothing),
                m.seed
            );
            let n = m.label_names.len();
            write_matrix(&mut out, "prior_positive", 1, n, &m.prior_positive);
            let flat_pos: Vec<f64> = m.posterior_positive.iter().flatten().copied().collect();
            let flat_neg: Vec<f64> = m.posterior_negative.iter().flatten().copied().collect();
            write_matrix(&mut out, "posterior_positive", n, m.k + 1, &flat_pos);
            write_matrix(&mut out, "posterior_negative", n, m.k + 1, &flat_neg);
            write_binmatrix(&mut out, "train_features", &m.train_features, m.feature_names.len());
            write_binmatrix(&mut out, "train_labels", &m.train_labels, n);
        }
        AnyModel::Mlp(m) => {
            write_config(&mut out, &m.config);
            let _ = writeln!(out, "mlp {} {} {}", m.input, m.hidden, m.tasks);
            write_matrix(&mut out, "w1", m.hidden, m.input, &m.w1);
            write_matrix(&mut out, "b1", 1, m.hidden, &m.b1);
            write_matrix(&mut out, "w2", m.tasks, m.hidden, &m.w2);
            write_matrix(&mut out, "b2", 1, m.tasks, &m.b2);
        }
    }
    out.push_str("end\n");
    out
}

pub fn save(model: &AnyModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_document(model)).map_err(|e| Error::io(path, e))
}

struct Lines<'a> {
    iter: std::str::Lines<'a>,
    current: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        self.current += 1;
        self.iter
            .next()
            .ok_or_else(|| Error::Schema("model file truncated".into()))
    }

    fn fail(&self, message: impl Into<String>) -> Error {
        Error::Schema(format!("model file line {}: {}", self.current, message.into()))
    }
}

fn parse_f64(lines: &Lines<'_>, token: &str) -> Result<f64> {
    token
        .parse::<f64>()
        .map_err(|_| lines.fail(format!("bad float {token:?}")))
}

fn parse_usize(lines: &Lines<'_>, token: &str) -> Result<usize> {
    token
        .parse::<usize>()
        .map_err(|_| lines.fail(format!("bad integer {token:?}")))
}

fn read_names(lines: &mut Lines<'_>, tag: &str) -> Result<Vec<String>> {
    let header = lines.next()?;
    let rest = header
        .strip_prefix(tag)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| lines.fail(format!("expected {tag:?} header, got {header:?}")))?;
    let count = parse_usize(lines, rest)?;
    let mut names = Vec::with_capacity(count);
    for _ in 0..count {
        names.push(lines.next()?.to_string());
    }
    Ok(names)
}

fn read_matrix(lines: &mut Lines<'_>, name: &str) -> Result<(usize, usize, Vec<f64>)> {
    let header = lines.next()?;
    let mut parts = header.split(' ');
    if parts.next() != Some("matrix") || parts.next() != Some(name) {
        return Err(lines.fail(format!("expected matrix {name}, got {header:?}")));
    }
    let rows = parse_usize(lines, parts.next().unwrap_or(""))?;
    let cols = parse_usize(lines, parts.next().unwrap_or(""))?;
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let line = lines.next()?;
        let mut count = 0;
        for token in line.split(' ') {
            data.push(parse_f64(lines, token)?);
            count += 1;
        }
        if count != cols {
            return Err(lines.fail(format!("matrix {name} row has {count} values, expected {cols}")));
        }
    }
    Ok((rows, cols, data))
}

fn read_binmatrix(lines: &mut Lines<'_>, name: &str) -> Result<Vec<Vec<u8>>> {
    let header = lines.next()?;
    let mut parts = header.split(' ');
    if parts.next() != Some("binmatrix") || parts.next() != Some(name) {
        return Err(lines.fail(format!("expected binmatrix {name}, got {header:?}")));
    }
    let rows = parse_usize(lines, parts.next().unwrap_or(""))?;
    let cols = parse_usize(lines, parts.next().unwrap_or(""))?;
    let mut out = Vec::with_capacity(rows);
    for _ in 0..rows {
        let line = lines.next()?;
        if line.len() != cols {
            return Err(lines.fail(format!(
                "binmatrix {name} row has {} cells, expected {cols}",
                line.len()
            )));
        }
        let row: Vec<u8> = line
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(Error::Schema(format!("bad binary cell {other:?}"))),
            })
            .collect::<Result<_>>()?;
        out.push(row);
    }
    Ok(out)
}

fn read_config(lines: &mut Lines<'_>) -> Result<TrainConfig> {
    let mut c = TrainConfig::default();
    for key in [
        "epochs",
        "learning_rate",
        "proposals",
        "max_size",
        "filters",
        "hidden",
        "adam_beta1",
        "adam_beta2",
        "adam_epsilon",
        "seed",
    ] {
        let line = lines.next()?;
        let rest = line
            .strip_prefix("config ")
            .and_then(|r| r.strip_prefix(key))
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| lines.fail(format!("expected config {key}, got {line:?}")))?;
        match key {
            "epochs" => c.epochs = parse_usize(lines, rest)?,
            "proposals" => c.proposals = parse_usize(lines, rest)?,
            "max_size" => c.max_size = parse_usize(lines, rest)?,
            "filters" => c.filters = parse_usize(lines, rest)?,
            "hidden" => c.hidden = parse_usize(lines, rest)?,
            "seed" => {
                c.seed = rest
                    .parse::<u64>()
                    .map_err(|_| lines.fail(format!("bad seed {rest:?}")))?
            }
            "learning_rate" => c.learning_rate = parse_f64(lines, rest)?,
            "adam_beta1" => c.adam_beta1 = parse_f64(lines, rest)?,
            "adam_beta2" => c.adam_beta2 = parse_f64(lines, rest)?,
            "adam_epsilon" => c.adam_epsilon = parse_f64(lines, rest)?,
            _ => unreachable!(),
        }
    }
    Ok(c)
}

/// Parse a v1 model document.
pub fn from_document(text: &str) -> Result<AnyModel> {
    let mut lines = Lines {
        iter: text.lines(),
        current: 0,
    };
    let version = lines.next()?;
    if version != MODEL_FORMAT_VERSION {
        return Err(lines.fail(format!(
            "unsupported format {version:?}, expected {MODEL_FORMAT_VERSION:?}"
        )));
    }
    let kind_line = lines.next()?;
    let kind = kind_line
        .strip_prefix("kind ")
        .ok_or_else(|| lines.fail("expected kind line"))?;
    let feature_names = read_names(&mut lines, "feature_names")?;
    let label_names = read_names(&mut lines, "label_names")?;
    let n = label_names.len();

    let model = match kind {
        "mimtcnn" => {
            let config = read_config(&mut lines)?;
            let header = lines.next()?;
            let mut parts = header.split(' ');
            if parts.next() != Some("proposals") {
                return Err(lines.fail("expected proposals header"));
            }
            let count = parse_usize(&lines, parts.next().unwrap_or(""))?;
            let max_size = parse_usize(&lines, parts.next().unwrap_or(""))?;
            let feature_count = parse_usize(&lines, parts.next().unwrap_or(""))?;
            let seed = parts
                .next()
                .unwrap_or("")
                .parse::<u64>()
                .map_err(|_| lines.fail("bad proposal seed"))?;
            let mut proposals = Vec::with_capacity(count);
            for _ in 0..count {
                let line = lines.next()?;
                let rest = line
                    .strip_prefix("proposal ")
                    .ok_or_else(|| lines.fail("expected proposal line"))?;
                let prop: Vec<usize> = rest
                    .split(' ')
                    .map(|tok| parse_usize(&lines, tok))
                    .collect::<Result<_>>()?;
                proposals.push(prop);
            }
            let proposal_set = ProposalSet {
                proposals,
                max_size,
                feature_count,
                seed,
            };
            proposal_set.validate()?;

            let (filters, s, conv_w) = read_matrix(&mut lines, "conv_w")?;
            let (_, _, conv_b) = read_matrix(&mut lines, "conv_b")?;
            let (hidden, _, fc1_w) = read_matrix(&mut lines, "fc1_w")?;
            let (_, _, fc1_b) = read_matrix(&mut lines, "fc1_b")?;
            let (tasks, _, fc2_w) = read_matrix(&mut lines, "fc2_w")?;
            let (_, _, fc2_b) = read_matrix(&mut lines, "fc2_b")?;
            let params = ModelParams {
                filters,
                max_size: s,
                hidden,
                tasks,
                conv_w,
                conv_b,
                fc1_w,
                fc1_b,
                fc2_w,
                fc2_b,
            };
            params.validate()?;
            if tasks != n {
                return Err(lines.fail("fc2 task count disagrees with label names"));
            }
            AnyModel::Mimtcnn(Model {
                params,
                proposal_set,
                config,
                feature_names,
                label_names,
                loss_history: Vec::new(),
            })
        }
        "mlknn" => {
            let header = lines.next()?;
            let mut parts = header.split(' ');
            if parts.next() != Some("knn") {
                return Err(lines.fail("expected knn header"));
            }
            let k = parse_usize(&lines, parts.next().unwrap_or(""))?;
            let smoothing = parse_f64(&lines, parts.next().unwrap_or(""))?;
            let seed = parts
                .next()
                .unwrap_or("")
                .parse::<u64>()
                .map_err(|_| lines.fail("bad knn seed"))?;
            let (_, _, prior_positive) = read_matrix(&mut lines, "prior_positive")?;
            let (_, cols, flat_pos) = read_matrix(&mut lines, "posterior_positive")?;
            let (_, _, flat_neg) = read_matrix(&mut lines, "posterior_negative")?;
            if cols != k + 1 {
                return Err(lines.fail("posterior table width disagrees with k"));
            }
            let unflatten = |flat: Vec<f64>| -> Vec<Vec<f64>> {
                flat.chunks(k + 1).map(<[f64]>::to_vec).collect()
            };
            let train_features = read_binmatrix(&mut lines, "train_features")?;
            let train_labels = read_binmatrix(&mut lines, "train_labels")?;
            AnyModel::Mlknn(MlknnModel {
                train_features,
                train_labels,
                feature_names,
                label_names,
                k,
                smoothing,
                seed,
                prior_positive,
                posterior_positive: unflatten(flat_pos),
                posterior_negative: unflatten(flat_neg),
            })
        }
        "mlp" => {
            let config = read_config(&mut lines)?;
            let header = lines.next()?;
            let mut parts = header.split(' ');
            if parts.next() != Some("mlp") {
                return Err(lines.fail("expected mlp header"));
            }
            let input = parse_usize(&lines, parts.next().unwrap_or(""))?;
            let hidden = parse_usize(&lines, parts.next().unwrap_or(""))?;
            let tasks = parse_usize(&lines, parts.next().unwrap_or(""))?;
            let (_, _, w1) = read_matrix(&mut lines, "w1")?;
            let (_, _, b1) = read_matrix(&mut lines, "b1")?;
            let (_, _, w2) = read_matrix(&mut lines, "w2")?;
            let (_, _, b2) = read_matrix(&mut lines, "b2")?;
            if w1.len() != hidden * input || w2.len() != tasks * hidden {
                return Err(lines.fail("mlp matrix sizes inconsistent"));
            }
            AnyModel::Mlp(MlpModel {
                input,
                hidden,
                tasks,
                w1,
                b1,
                w2,
                b2,
                config,
                feature_names,
                label_names,
                loss_history: Vec::new(),
            })
        }
        other => return Err(lines.fail(format!("unknown model kind {other:?}"))),
    };
    let end = lines.next()?;
    if end != "end" {
        return Err(lines.fail("missing end marker"));
    }
    Ok(model)
}

pub fn load(path: impl AsRef<Path>) -> Result<AnyModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_document(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{generate_synthetic, SyntheticSpec};

    fn small_dataset() -> crate::dataio::Dataset {
        let spec = SyntheticSpec {
            patients: 60,
            features: 16,
            tasks: 2,
            keys_per_task: 2,
            max_active_tasks: 2,
            max_symptoms: 8,
            background_rate: 0.05,
            label_flip_rate: 0.0,
            min_task_frequency: 10,
            seed: 3,
        };
        generate_synthetic(&spec).unwrap().0
    }

    #[test]
    fn fmt_round_trips_f64_exactly() {
        for &x in &[
            0.0,
            -0.0,
            1.0 / 3.0,
            std::f64::consts::PI,
            1e-300,
            -2.2250738585072014e-308,
            6.02e23,
        ] {
            let parsed: f64 = fmt_f64(x).parse().unwrap();
            assert_eq!(parsed.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn mimtcnn_round_trip_reproduces_predictions_bit_exactly() {
        let ds = small_dataset();
        let config = TrainConfig {
            epochs: 5,
            proposals: 30,
            max_size: 4,
            hidden: 8,
            seed: 2,
            ..TrainConfig::default()
        };
        let model = crate::training::train(&ds, &config).unwrap();
        let doc = to_document(&AnyModel::Mimtcnn(model.clone()));
        let reloaded = match from_document(&doc).unwrap() {
            AnyModel::Mimtcnn(m) => m,
            _ => panic!("wrong kind"),
        };
        let (p0, h0) = crate::training::predict(&model, &ds.features).unwrap();
        let (p1, h1) = crate::training::predict(&reloaded, &ds.features).unwrap();
        assert_eq!(h0, h1);
        for (a, b) in p0.iter().flatten().zip(p1.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        // second serialization is byte-identical
        assert_eq!(doc, to_document(&AnyModel::Mimtcnn(reloaded)));
    }

    #[test]
    fn mlknn_round_trip() {
        let ds = small_dataset();
        let model = crate::baselines::mlknn_fit(&ds, 5, 1.0, 0).unwrap();
        let doc = to_document(&AnyModel::Mlknn(model.clone()));
        let reloaded = match from_document(&doc).unwrap() {
            AnyModel::Mlknn(m) => m,
            _ => panic!("wrong kind"),
        };
        assert_eq!(model, reloaded);
    }

    #[test]
    fn mlp_round_trip() {
        let ds = small_dataset();
        let config = TrainConfig {
            epochs: 3,
            hidden: 8,
            seed: 1,
            ..TrainConfig::default()
        };
        let model = crate::baselines::mlp_train(&ds, &config).unwrap();
        let doc = to_document(&AnyModel::Mlp(model.clone()));
        let reloaded = match from_document(&doc).unwrap() {
            AnyModel::Mlp(m) => m,
            _ => panic!("wrong kind"),
        };
        let (p0, _) = crate::baselines::mlp_predict(&model, &ds.features).unwrap();
        let (p1, _) = crate::baselines::mlp_predict(&reloaded, &ds.features).unwrap();
        for (a, b) in p0.iter().flatten().zip(p1.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn bad_version_is_schema_error() {
        assert!(matches!(
            from_document("mimtnet-model-v0\n"),
            Err(Error::Schema(_))
        ));
    }
}
