//! Constant and per-key constant predictors.

use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundMode {
    Global,
    /// One constant per key, the global constant for keys unseen in training.
    PerKey,
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

/// Most frequent class, the smallest index among ties.
pub fn mode(classes: &[usize]) -> usize {
    assert!(!classes.is_empty(), "mode of empty slice");
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &c in classes {
        *counts.entry(c).or_default() += 1;
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(c, _)| c)
        .expect("non-empty")
}

fn group<'k, T: Copy>(keys: &[&'k str], labels: &[T]) -> HashMap<&'k str, Vec<T>> {
    let mut by_key: HashMap<&str, Vec<T>> = HashMap::new();
    for (k, &l) in keys.iter().zip(labels) {
        by_key.entry(k).or_default().push(l);
    }
    by_key
}

/// Test MAE of the median predictor fit on the training labels.
pub fn regression_bound(
    train_y: &[f64],
    train_keys: &[&str],
    test_y: &[f64],
    test_keys: &[&str],
    mode: BoundMode,
) -> f64 {
    let global = median(train_y);
    let per_key: HashMap<&str, f64> = match mode {
        BoundMode::Global => HashMap::new(),
        BoundMode::PerKey => group(train_keys, train_y)
            .into_iter()
            .map(|(k, v)| (k, median(&v)))
            .collect(),
    };
    let total: f64 = test_y
        .iter()
        .zip(test_keys)
        .map(|(y, k)| (y - per_key.get(k).copied().unwrap_or(global)).abs())
        .sum();
    total / test_y.len() as f64
}

/// Test error rate of the most-common-class predictor.
pub fn classification_bound(
    train_y: &[usize],
    train_keys: &[&str],
    test_y: &[usize],
    test_keys: &[&str],
    bound: BoundMode,
) -> f64 {
    let global = mode(train_y);
    let per_key: HashMap<&str, usize> = match bound {
        BoundMode::Global => HashMap::new(),
        BoundMode::PerKey => group(train_keys, train_y)
            .into_iter()
            .map(|(k, v)| (k, mode(&v)))
            .collect(),
    };
    let wrong = test_y
        .iter()
        .zip(test_keys)
        .filter(|(y, k)| **y != per_key.get(*k).copied().unwrap_or(global))
        .count();
    wrong as f64 / test_y.len() as f64
}
