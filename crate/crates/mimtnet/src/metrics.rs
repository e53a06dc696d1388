//! The six evaluation quantities: mean average precision, coverage, subset
//! accuracy, hamming loss, and per-task precision/recall.
//!
//! Ranking ties always break by ascending index, so every metric is a pure
//! deterministic function. Undefined values (a task with no positives, a
//! sample with no true labels, precision with no predicted positives) are
//! reported as such rather than silently scored 0.

use crate::error::{Error, Result};

/// Predictions and ground truth for one evaluation pass.
#[derive(Debug, Clone)]
pub struct EvalInput {
    /// p x n probabilities in [0, 1].
    pub probs: Vec<Vec<f64>>,
    /// p x n hard predictions, thresholded at 0.5.
    pub hard: Vec<Vec<u8>>,
    /// p x n true labels.
    pub truth: Vec<Vec<u8>>,
}

impl EvalInput {
    pub fn new(probs: Vec<Vec<f64>>, hard: Vec<Vec<u8>>, truth: Vec<Vec<u8>>) -> Result<Self> {
        if probs.len() != hard.len() || probs.len() != truth.len() {
            return Err(Error::Shape("probs/hard/truth row counts differ".into()));
        }
        for ((prow, hrow), trow) in probs.iter().zip(&hard).zip(&truth) {
            if prow.len() != hrow.len() || prow.len() != trow.len() {
                return Err(Error::Shape("probs/hard/truth widths differ".into()));
            }
            for (&p, &h) in prow.iter().zip(hrow) {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Shape(format!("probability {p} outside [0, 1]")));
                }
                if h != u8::from(p > 0.5) {
                    return Err(Error::Shape(
                        "hard prediction inconsistent with 0.5 threshold".into(),
                    ));
                }
            }
        }
        Ok(EvalInput { probs, hard, truth })
    }

    /// Build from probabilities alone, thresholding at 0.5.
    pub fn from_probs(probs: Vec<Vec<f64>>, truth: Vec<Vec<u8>>) -> Result<Self> {
        let hard = probs
            .iter()
            .map(|row| row.iter().map(|&p| u8::from(p > 0.5)).collect())
            .collect();
        EvalInput::new(probs, hard, truth)
    }

    pub fn sample_count(&self) -> usize {
        self.probs.len()
    }

    pub fn task_count(&self) -> usize {
        self.probs.first().map_or(0, Vec::len)
    }
}

/// A metric value together with how many tasks/samples had to be skipped as
/// undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricValue {
    pub value: f64,
    pub skipped: usize,
}

/// Average precision of one task's ranking. `None` when the task has no
/// positives.
pub fn average_precision(scores: &[f64], truth: &[u8]) -> Option<f64> {
    assert_eq!(scores.len(), truth.len());
    let positives = truth.iter().filter(|&&y| y == 1).count();
    if positives == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank0, &ix) in order.iter().enumerate() {
        if truth[ix] == 1 {
            hits += 1;
            sum += hits as f64 / (rank0 + 1) as f64;
        }
    }
    Some(sum / positives as f64)
}

/// Mean of per-task average precision over tasks that have at least one
/// positive; `skipped` counts the excluded tasks.
pub fn mean_average_precision(inp: &EvalInput) -> Option<MetricValue> {
    let n = inp.task_count();
    let p = inp.sample_count();
    let mut sum = 0.0;
    let mut used = 0usize;
    for t in 0..n {
        let scores: Vec<f64> = (0..p).map(|i| inp.probs[i][t]).collect();
        let truth: Vec<u8> = (0..p).map(|i| inp.truth[i][t]).collect();
        if let Some(ap) = average_precision(&scores, &truth) {
            sum += ap;
            used += 1;
        }
    }
    if used == 0 {
        return None;
    }
    Some(MetricValue {
        value: sum / used as f64,
        skipped: n - used,
    })
}

/// Normalized coverage: how deep the per-sample label ranking must go to
/// include every true label, averaged and divided by the label count.
/// Samples without true labels are skipped and counted.
pub fn coverage(inp: &EvalInput) -> Option<MetricValue> {
    let n = inp.task_count();
    let mut sum = 0.0;
    let mut used = 0usize;
    for (prow, trow) in inp.probs.iter().zip(&inp.truth) {
        if trow.iter().all(|&y| y == 0) {
            continue;
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| prow[b].partial_cmp(&prow[a]).unwrap().then(a.cmp(&b)));
        let deepest = order
            .iter()
            .enumerate()
            .filter(|&(_, &t)| trow[t] == 1)
            .map(|(rank0, _)| rank0 + 1)
            .max()
            .unwrap();
        sum += (deepest - 1) as f64 / n as f64;
        used += 1;
    }
    if used == 0 {
        return None;
    }
    Some(MetricValue {
        value: sum / used as f64,
        skipped: inp.sample_count() - used,
    })
}

/// Fraction of samples predicted exactly right on every label slot.
pub fn subset_accuracy(inp: &EvalInput) -> f64 {
    let p = inp.sample_count();
    if p == 0 {
        return 0.0;
    }
    let exact = inp
        .hard
        .iter()
        .zip(&inp.truth)
        .filter(|(h, t)| h == t)
        .count();
    exact as f64 / p as f64
}

/// Fraction of label slots where prediction and truth disagree.
pub fn hamming_loss(inp: &EvalInput) -> f64 {
    let p = inp.sample_count();
    let n = inp.task_count();
    if p == 0 || n == 0 {
        return 0.0;
    }
    let wrong: usize = inp
        .hard
        .iter()
        .zip(&inp.truth)
        .map(|(h, t)| h.iter().zip(t).filter(|(a, b)| a != b).count())
        .sum();
    wrong as f64 / (p * n) as f64
}

/// Per-task precision and recall; `None` encodes an undefined ratio
/// (zero predicted positives, or zero true positives, respectively).
pub fn precision_recall_per_task(inp: &EvalInput) -> Vec<(Option<f64>, Option<f64>)> {
    let n = inp.task_count();
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fne = 0usize;
        for (hrow, trow) in inp.hard.iter().zip(&inp.truth) {
            match (hrow[t], trow[t]) {
                (1, 1) => tp += 1,
                (1, 0) => fp += 1,
                (0, 1) => fne += 1,
                _ => {}
            }
        }
        let precision = (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64);
        let recall = (tp + fne > 0).then(|| tp as f64 / (tp + fne) as f64);
        out.push((precision, recall));
    }
    out
}
