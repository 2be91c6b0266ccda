//! Logistic regression trained by SGD, one-vs-rest for more than two
//! classes.
//!
//! The step size follows the "optimal" schedule `1 / (α (t₀ + t))` with the
//! usual `t₀` heuristic, and the L2 shrinkage is applied lazily through a
//! weight scale.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SgdConfig {
    pub alphas: Vec<f64>,
    pub tolerance: f64,
    pub max_epochs: usize,
    pub n_iter_no_change: usize,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig {
            alphas: vec![1e-4, 1e-3, 1e-2, 1e-1],
            tolerance: 1e-4,
            max_epochs: 100,
            n_iter_no_change: 5,
            validation_fraction: 0.2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
struct Binary {
    w: Vec<f64>,
    b: f64,
}

impl Binary {
    fn score(&self, x: &[f64]) -> f64 {
        dot(&self.w, x) + self.b
    }
}

#[derive(Debug, Clone)]
pub struct LogisticModel {
    pub n_classes: usize,
    /// One classifier for two classes, otherwise one per class.
    classifiers: Vec<Binary>,
    pub alpha: f64,
    /// Epochs per classifier used for the final fit.
    pub epochs: Vec<usize>,
}

impl LogisticModel {
    pub fn predict_row(&self, x: &[f64]) -> usize {
        if self.n_classes == 2 {
            return (self.classifiers[0].score(x) > 0.0) as usize;
        }
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (k, c) in self.classifiers.iter().enumerate() {
            let s = c.score(x);
            if s > best_score {
                best = k;
                best_score = s;
            }
        }
        best
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Vec<usize> {
        let xt = x.transpose();
        (0..x.nrows())
            .map(|i| self.predict_row(column(&xt, i)))
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Row `i` of the original matrix, stored as column `i` of its transpose.
fn column(xt: &DMatrix<f64>, i: usize) -> &[f64] {
    let p = xt.nrows();
    &xt.as_slice()[i * p..(i + 1) * p]
}

fn log_loss(margin: f64) -> f64 {
    // log(1 + exp(-margin)), stable on both tails
    if margin > 18.0 {
        (-margin).exp()
    } else if margin < -18.0 {
        -margin
    } else {
        (-margin).exp().ln_1p()
    }
}

fn dloss(margin: f64, y: f64) -> f64 {
    // d/dp log(1 + exp(-y p)) where margin = y p
    let g = if margin > 18.0 {
        -y * (-margin).exp()
    } else if margin < -18.0 {
        -y
    } else {
        -y / ((margin).exp() + 1.0)
    };
    g.clamp(-1e12, 1e12)
}

struct Trace {
    model: Binary,
    /// Epochs run before stopping.
    epochs: usize,
    /// Validation loss of the returned model.
    loss: f64,
}

/// Trains one binary classifier. With a validation set, training stops once
/// the best validation loss has not improved by `tol` for
/// `n_iter_no_change` epochs; the weights of the last epoch are returned.
/// Without one, exactly `epochs` passes are made.
#[allow(clippy::too_many_arguments)]
fn fit_binary(
    xt: &DMatrix<f64>,
    y: &[f64],
    train: &[usize],
    val: &[usize],
    alpha: f64,
    cfg: &SgdConfig,
    epochs: usize,
    seed: u64,
) -> Trace {
    let p = xt.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let typw = (1.0 / alpha.sqrt()).sqrt();
    let eta0 = typw / dloss(-typw, 1.0).abs().max(1.0);
    let t0 = 1.0 / (eta0 * alpha);

    let mut w = vec![0.0; p];
    let mut wscale = 1.0;
    let mut b = 0.0;
    let mut t = 1.0;
    let mut order = train.to_vec();

    let snapshot = |w: &[f64], wscale: f64, b: f64| Binary {
        w: w.iter().map(|v| v * wscale).collect(),
        b,
    };
    let val_loss = |m: &Binary| {
        val.iter()
            .map(|&i| log_loss(y[i] * m.score(column(xt, i))))
            .sum::<f64>()
            / val.len() as f64
    };

    let mut best_loss = f64::INFINITY;
    let mut stale = 0;
    let mut ran = 0;
    let mut loss = f64::NAN;
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let x = column(xt, i);
            let score = wscale * dot(&w, x) + b;
            let eta = 1.0 / (alpha * (t0 + t - 1.0));
            let update = -eta * dloss(y[i] * score, y[i]);
            wscale *= (1.0 - eta * alpha).max(0.0);
            if update != 0.0 {
                let step = update / wscale;
                for (wj, xj) in w.iter_mut().zip(x) {
                    *wj += step * xj;
                }
                b += update;
            }
            if wscale < 1e-9 {
                for wj in &mut w {
                    *wj *= wscale;
                }
                wscale = 1.0;
            }
            t += 1.0;
        }
        ran += 1;
        if val.is_empty() {
            continue;
        }
        loss = val_loss(&snapshot(&w, wscale, b));
        if loss > best_loss - cfg.tolerance {
            stale += 1;
        } else {
            stale = 0;
        }
        best_loss = best_loss.min(loss);
        if stale >= cfg.n_iter_no_change {
            break;
        }
    }
    Trace {
        model: snapshot(&w, wscale, b),
        epochs: ran,
        loss,
    }
}

fn targets(y: &[usize], n_classes: usize) -> Vec<Vec<f64>> {
    let positive: Vec<usize> = if n_classes == 2 {
        vec![1]
    } else {
        (0..n_classes).collect()
    };
    positive
        .into_iter()
        .map(|k| y.iter().map(|&c| if c == k { 1.0 } else { -1.0 }).collect())
        .collect()
}

/// Fits a classifier on rows of `x` with class indices `y < n_classes`.
/// Alpha is chosen on an inner train/validation split by validation loss,
/// then validation error, preferring the larger alpha on ties. The final
/// model is refit on all rows for the epoch counts at which selection
/// stopped.
pub fn logreg_sgd_fit(
    x: &DMatrix<f64>,
    y: &[usize],
    n_classes: usize,
    cfg: &SgdConfig,
) -> Result<LogisticModel> {
    let n = x.nrows();
    if y.len() != n || y.iter().any(|&c| c >= n_classes) {
        return Err(Error::Probe("logistic: labels do not match rows".into()));
    }
    let present = {
        let mut seen = vec![false; n_classes];
        y.iter().for_each(|&c| seen[c] = true);
        seen.iter().filter(|&&s| s).count()
    };
    if present < 2 {
        return Err(Error::Probe(format!(
            "logistic: {present} class(es) in the training set"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Probe("logistic: non-finite input".into()));
    }
    let xt = x.transpose();
    let ys = targets(y, n_classes);

    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let n_val = ((n as f64 * cfg.validation_fraction).round() as usize).clamp(1, n - 1);
    let (val, inner) = idx.split_at(n_val);

    struct Candidate {
        alpha: f64,
        error: f64,
        loss: f64,
        epochs: Vec<usize>,
    }
    let candidates: Vec<Candidate> = cfg
        .alphas
        .par_iter()
        .map(|&alpha| {
            let traces: Vec<Trace> = ys
                .par_iter()
                .enumerate()
                .map(|(k, yk)| {
                    fit_binary(
                        &xt,
                        yk,
                        inner,
                        val,
                        alpha,
                        cfg,
                        cfg.max_epochs,
                        cfg.seed ^ (k as u64 + 1),
                    )
                })
                .collect();
            let model = LogisticModel {
                n_classes,
                classifiers: traces.iter().map(|t| t.model.clone()).collect(),
                alpha,
                epochs: vec![],
            };
            let wrong = val
                .iter()
                .filter(|&&i| model.predict_row(column(&xt, i)) != y[i])
                .count();
            Candidate {
                alpha,
                error: wrong as f64 / val.len() as f64,
                loss: traces.iter().map(|t| t.loss).sum::<f64>() / traces.len() as f64,
                epochs: traces.iter().map(|t| t.epochs).collect(),
            }
        })
        .collect();
    let chosen = candidates
        .iter()
        .min_by(|a, b| {
            a.loss
                .total_cmp(&b.loss)
                .then(a.error.total_cmp(&b.error))
                .then(b.alpha.total_cmp(&a.alpha))
        })
        .expect("non-empty alpha grid");
    log::debug!(
        "logistic: alpha {} (val error {:.4}, loss {:.4}), epochs {:?}",
        chosen.alpha,
        chosen.error,
        chosen.loss,
        chosen.epochs
    );

    let all: Vec<usize> = (0..n).collect();
    let classifiers = ys
        .par_iter()
        .enumerate()
        .map(|(k, yk)| {
            fit_binary(
                &xt,
                yk,
                &all,
                &[],
                chosen.alpha,
                cfg,
                chosen.epochs[k],
                cfg.seed ^ (k as u64 + 101),
            )
            .model
        })
        .collect();
    Ok(LogisticModel {
        n_classes,
        classifiers,
        alpha: chosen.alpha,
        epochs: chosen.epochs.clone(),
    })
}
