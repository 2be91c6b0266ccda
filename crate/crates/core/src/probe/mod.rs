//! Linear probes and Simple Bound baselines over snippet-level splits.

pub mod baseline;
pub mod logistic;
pub mod ridge;

use std::collections::{BTreeSet, HashMap};

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use baseline::{classification_bound, median, mode, regression_bound, BoundMode};
pub use logistic::{logreg_sgd_fit, LogisticModel, SgdConfig};
pub use ridge::{ridge_fit, RidgeModel};

use crate::corpus::snippet_seed;
use crate::embed::{FeaturePlan, Layer};
use crate::error::{Error, Result};
use crate::taskgen::{FeatureMode, Task};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub alphas_classification: Vec<f64>,
    pub tolerance: f64,
    pub alphas_regression: Vec<f64>,
    pub splits: usize,
    pub train_fraction: f64,
    /// Global seed; split and SGD seeds derive from it.
    pub seed: u64,
    pub max_epochs: usize,
    pub n_iter_no_change: usize,
    pub validation_fraction: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            alphas_classification: vec![1e-4, 1e-3, 1e-2, 1e-1],
            tolerance: 1e-4,
            alphas_regression: vec![0.1, 1.0, 10.0],
            splits: 3,
            train_fraction: 0.7,
            seed: 0,
            max_epochs: 100,
            n_iter_no_change: 5,
            validation_fraction: 0.2,
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Invalid(format!(
                "train_fraction {} not in (0, 1)",
                self.train_fraction
            )));
        }
        if self.splits == 0 {
            return Err(Error::Invalid("splits must be at least 1".into()));
        }
        if self.alphas_classification.is_empty() || self.alphas_regression.is_empty() {
            return Err(Error::Invalid("empty alpha grid".into()));
        }
        Ok(())
    }

    fn sgd(&self, seed: u64) -> SgdConfig {
        SgdConfig {
            alphas: self.alphas_classification.clone(),
            tolerance: self.tolerance,
            max_epochs: self.max_epochs,
            n_iter_no_change: self.n_iter_no_change,
            validation_fraction: self.validation_fraction,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "MAE")]
    Mae,
    #[serde(rename = "error_rate")]
    ErrorRate,
}

impl Metric {
    pub fn of(task: Task) -> Metric {
        if task.is_regression() {
            Metric::Mae
        } else {
            Metric::ErrorRate
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResultMode {
    Probe,
    SimpleBoundGlobal,
    SimpleBoundPerKey,
}

/// One results line. Probe rows carry a layer; Simple Bound rows do not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub task: Task,
    pub bundle: String,
    pub bundle_digest: String,
    pub layer: Option<usize>,
    pub mode: ResultMode,
    pub metric_name: Metric,
    pub metric_value: f64,
    pub per_split_values: Vec<f64>,
    /// Regularization strength chosen in each split.
    pub chosen_alpha: Vec<f64>,
    /// The task's reference bound: per-key when the task has keys.
    pub simple_bound_value: f64,
    pub simple_bound_global: f64,
    pub examples: usize,
    pub rows: usize,
    pub dropped: usize,
    pub warning: Option<String>,
    pub manifest_digest: String,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Whether the Simple Bound has a per-key variant for this task.
pub fn has_keys(task: Task) -> bool {
    matches!(
        task.feature_mode(),
        FeatureMode::PerSubtoken | FeatureMode::PairConcat
    )
}

/// Row indices of one train/test split; every snippet sits on one side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Snippet-level splits over the plan's rows. Snippet ids are sorted, then
/// shuffled with a per-split seed; the first `train_fraction` go to train.
pub fn row_splits(plan: &FeaturePlan, cfg: &ProbeConfig) -> Result<Vec<Split>> {
    let n = plan.groups.len();
    if n < 2 {
        return Err(Error::Probe(format!(
            "{}: {n} snippet(s) left after alignment, cannot split",
            plan.task
        )));
    }
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| plan.groups[a as usize].cmp(&plan.groups[b as usize]));
    let n_train = ((n as f64 * cfg.train_fraction).round() as usize).clamp(1, n - 1);
    (0..cfg.splits)
        .map(|i| {
            let mut shuffled = order.clone();
            let seed = snippet_seed(cfg.seed, &format!("split-{i}"), "split");
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let train_groups: BTreeSet<u32> = shuffled[..n_train].iter().copied().collect();
            let (train, test) =
                (0..plan.rows.len()).partition(|&r| train_groups.contains(&plan.rows[r].group));
            let split = Split { train, test };
            if split.train.is_empty() || split.test.is_empty() {
                return Err(Error::Probe(format!(
                    "{}: empty train or test set",
                    plan.task
                )));
            }
            Ok(split)
        })
        .collect()
}

/// Labels of a plan as regression targets or class indices.
#[derive(Debug, Clone)]
pub enum Targets {
    Regression(Vec<f64>),
    /// Class indices into `classes`, which is sorted.
    Classes {
        y: Vec<usize>,
        classes: Vec<String>,
    },
}

pub fn targets(plan: &FeaturePlan) -> Result<Targets> {
    if plan.task.is_regression() {
        plan.rows
            .iter()
            .map(|r| {
                r.label.as_f64().ok_or_else(|| {
                    Error::Invalid(format!("{}: non-numeric label {:?}", plan.task, r.label))
                })
            })
            .collect::<Result<_>>()
            .map(Targets::Regression)
    } else {
        let keys: Vec<String> = plan.rows.iter().map(|r| r.label.class_key()).collect();
        let classes: Vec<String> = keys
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: HashMap<&str, usize> = classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i))
            .collect();
        let y = keys.iter().map(|k| index[k.as_str()]).collect();
        Ok(Targets::Classes { y, classes })
    }
}

/// Simple Bound per split, globally and per key.
pub fn simple_bounds(
    plan: &FeaturePlan,
    targets: &Targets,
    splits: &[Split],
) -> (Vec<f64>, Vec<f64>) {
    let keys: Vec<&str> = plan.rows.iter().map(|r| r.key.as_str()).collect();
    let pick = |idx: &[usize]| idx.iter().map(|&i| keys[i]).collect::<Vec<_>>();
    splits
        .iter()
        .map(|s| {
            let (trk, tek) = (pick(&s.train), pick(&s.test));
            let bound = |mode| match targets {
                Targets::Regression(y) => {
                    let tr: Vec<f64> = s.train.iter().map(|&i| y[i]).collect();
                    let te: Vec<f64> = s.test.iter().map(|&i| y[i]).collect();
                    regression_bound(&tr, &trk, &te, &tek, mode)
                }
                Targets::Classes { y, .. } => {
                    let tr: Vec<usize> = s.train.iter().map(|&i| y[i]).collect();
                    let te: Vec<usize> = s.test.iter().map(|&i| y[i]).collect();
                    classification_bound(&tr, &trk, &te, &tek, mode)
                }
            };
            (bound(BoundMode::Global), bound(BoundMode::PerKey))
        })
        .unzip()
}

fn select(features: &[f32], dim: usize, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), dim, |i, j| features[rows[i] * dim + j] as f64)
}

/// Metric value and chosen alpha for each split at one layer.
pub struct LayerRun {
    pub per_split: Vec<f64>,
    pub alphas: Vec<f64>,
}

/// Fits and evaluates the task's probe on every split at one layer.
pub fn run_probe(
    plan: &FeaturePlan,
    targets: &Targets,
    splits: &[Split],
    layer: &Layer,
    cfg: &ProbeConfig,
) -> Result<LayerRun> {
    let features = plan.features(layer);
    let dim = plan.dim;
    let runs: Vec<(f64, f64)> = splits
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let xtr = select(&features, dim, &s.train);
            let xte = select(&features, dim, &s.test);
            match targets {
                Targets::Regression(y) => {
                    let ytr = DVector::from_iterator(s.train.len(), s.train.iter().map(|&r| y[r]));
                    let model = ridge_fit(&xtr, &ytr, &cfg.alphas_regression)?;
                    let pred = model.predict(&xte);
                    let mae = s
                        .test
                        .iter()
                        .zip(pred.iter())
                        .map(|(&r, p)| (y[r] - p).abs())
                        .sum::<f64>()
                        / s.test.len() as f64;
                    Ok((mae, model.alpha))
                }
                Targets::Classes { y, classes } => {
                    let ytr: Vec<usize> = s.train.iter().map(|&r| y[r]).collect();
                    let seed = snippet_seed(cfg.seed, &format!("{}-split-{i}", plan.task), "sgd");
                    let model = logreg_sgd_fit(&xtr, &ytr, classes.len(), &cfg.sgd(seed))?;
                    let pred = model.predict(&xte);
                    let wrong = s
                        .test
                        .iter()
                        .zip(&pred)
                        .filter(|(&r, &p)| y[r] != p)
                        .count();
                    Ok((wrong as f64 / s.test.len() as f64, model.alpha))
                }
            }
        })
        .collect::<Result<_>>()?;
    let (per_split, alphas) = runs.into_iter().unzip();
    Ok(LayerRun { per_split, alphas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;
    use crate::embed::{make_mock_bundle, variant_texts};
    use crate::taskgen::generate_all;

    #[test]
    fn splits_respect_snippets() {
        let corpus = Corpus::from_sources(crate::synth::java_methods(30, 1), None);
        let generated = generate_all(&corpus, 7).unwrap();
        let bundle = make_mock_bundle(&generated.variants, 4, 1, 0).unwrap();
        let texts = variant_texts(&generated.variants);
        let plan = FeaturePlan::build(
            Task::TokenIsIdentifier,
            &generated.datasets[&Task::TokenIsIdentifier],
            &bundle,
            &texts,
        );
        let cfg = ProbeConfig::default();
        let splits = row_splits(&plan, &cfg).unwrap();
        assert_eq!(splits.len(), 3);
        for s in &splits {
            let train: BTreeSet<u32> = s.train.iter().map(|&r| plan.rows[r].group).collect();
            let test: BTreeSet<u32> = s.test.iter().map(|&r| plan.rows[r].group).collect();
            assert!(train.is_disjoint(&test));
            assert_eq!(train.len() + test.len(), plan.groups.len());
            assert_eq!(train.len(), 21);
        }
        assert_ne!(splits[0], splits[1]);
    }

    #[test]
    fn config_validation() {
        let mut cfg = ProbeConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.train_fraction = 1.0;
        assert!(cfg.validate().is_err());
    }
}
