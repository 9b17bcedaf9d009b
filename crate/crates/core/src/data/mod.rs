//! LIBSVM-format datasets and deterministic minibatch iteration.

mod libsvm;
mod minibatch;

pub use libsvm::{load_dataset, parse_libsvm_line, parse_libsvm_str, write_libsvm};
pub use minibatch::{epoch_batches, minibatch_iter};

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// One labelled sparse row. Indices are 1-based and strictly increasing;
/// absent indices are zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseExample {
    pub label: f64,
    pub features: Vec<(u32, f64)>,
}

impl SparseExample {
    /// `⟨w, x⟩` with feature `j` reading `w[j - 1]`.
    pub fn dot(&self, w: &[f64]) -> f64 {
        self.features
            .iter()
            .map(|&(j, v)| w[j as usize - 1] * v)
            .sum()
    }

    /// `out += scale · x`.
    pub fn axpy(&self, scale: f64, out: &mut [f64]) {
        for &(j, v) in &self.features {
            out[j as usize - 1] += scale * v;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub examples: Vec<SparseExample>,
    /// Largest feature index seen.
    pub dim: usize,
    /// `(original, normalized)` pairs applied by [`normalize_labels`]; empty
    /// for raw data.
    pub label_map: Vec<(f64, f64)>,
}

impl Dataset {
    pub fn new(examples: Vec<SparseExample>) -> Self {
        let dim = examples
            .iter()
            .filter_map(|e| e.features.last())
            .map(|&(j, _)| j as usize)
            .max()
            .unwrap_or(0);
        Self {
            examples,
            dim,
            label_map: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Distinct labels in ascending order.
    pub fn distinct_labels(&self) -> Vec<f64> {
        let mut labels: Vec<f64> = self.examples.iter().map(|e| e.label).collect();
        labels.sort_by(f64::total_cmp);
        labels.dedup();
        labels
    }

    /// Label → count, ordered by label.
    pub fn label_counts(&self) -> Vec<(f64, usize)> {
        let mut counts: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
        for e in &self.examples {
            counts.entry(ordered_key(e.label)).or_insert((e.label, 0)).1 += 1;
        }
        counts.into_values().collect()
    }
}

fn ordered_key(x: f64) -> u64 {
    // Monotone map from f64 to u64 so BTreeMap orders by value.
    let bits = x.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

/// How raw labels become `{−1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LabelRule {
    /// Pick from the rules below by the label set: `{−1,1}` unchanged,
    /// `{0,1}`, `{1,2}`, and one-vs-rest on the most frequent class for three
    /// or more classes.
    Auto,
    /// `0 → −1`, `1 → +1`.
    ZeroOne,
    /// `1 → +1`, `2 → −1`.
    OneTwo,
    /// The given class is `+1`, everything else `−1`.
    OneVsRest(f64),
    /// The most frequent class (smallest label on ties) is `+1`.
    MostFrequentVsRest,
}

/// Maps labels to `{−1, +1}` according to `rule`.
pub fn normalize_labels(mut dataset: Dataset, rule: LabelRule) -> Result<Dataset> {
    let labels = dataset.distinct_labels();
    let subset = |allowed: &[f64]| labels.iter().all(|l| allowed.contains(l));
    let rule = match rule {
        LabelRule::Auto if subset(&[-1.0, 1.0]) => return Ok(dataset),
        LabelRule::Auto if subset(&[0.0, 1.0]) => LabelRule::ZeroOne,
        LabelRule::Auto if subset(&[1.0, 2.0]) => LabelRule::OneTwo,
        LabelRule::Auto if labels.len() >= 3 => LabelRule::MostFrequentVsRest,
        LabelRule::Auto => return Err(Error::UnmappedLabels { labels }),
        other => other,
    };
    let rule = if rule == LabelRule::MostFrequentVsRest {
        let positive = dataset
            .label_counts()
            .into_iter()
            // max_by_key keeps the last maximum; iterate descending so ties
            // resolve to the smallest label.
            .rev()
            .max_by_key(|&(_, n)| n)
            .map(|(l, _)| l)
            .ok_or_else(|| Error::Dataset("empty dataset".into()))?;
        LabelRule::OneVsRest(positive)
    } else {
        rule
    };
    let mut label_map = Vec::with_capacity(labels.len());
    for &l in &labels {
        match apply_rule(rule, l) {
            Some(n) => label_map.push((l, n)),
            None => return Err(Error::UnmappedLabels { labels }),
        }
    }
    for e in &mut dataset.examples {
        e.label = label_map
            .iter()
            .find(|(orig, _)| *orig == e.label)
            .map(|&(_, n)| n)
            .expect("every label was mapped above");
    }
    dataset.label_map = label_map;
    Ok(dataset)
}

fn apply_rule(rule: LabelRule, l: f64) -> Option<f64> {
    match rule {
        LabelRule::ZeroOne if l == 0.0 => Some(-1.0),
        LabelRule::ZeroOne if l == 1.0 => Some(1.0),
        LabelRule::OneTwo if l == 1.0 => Some(1.0),
        LabelRule::OneTwo if l == 2.0 => Some(-1.0),
        LabelRule::OneVsRest(c) => Some(if l == c { 1.0 } else { -1.0 }),
        _ => None,
    }
}

/// Loads a LIBSVM file and normalizes its labels.
pub fn load_binary_dataset(path: impl AsRef<std::path::Path>, rule: LabelRule) -> Result<Dataset> {
    normalize_labels(load_dataset(path)?, rule)
}
