//! Ridge regression with the penalty chosen by exact leave-one-out error.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RidgeModel {
    pub weights: DVector<f64>,
    pub bias: f64,
    pub alpha: f64,
    /// Leave-one-out mean squared error for each candidate alpha.
    pub loo_mse: Vec<f64>,
}

impl RidgeModel {
    pub fn predict(&self, x: &DMatrix<f64>) -> DVector<f64> {
        x * &self.weights + DVector::from_element(x.nrows(), self.bias)
    }

    /// Normwise backward error of the solution to
    /// `(XᵀX + αI) w = Xᵀ(y − b·1)`.
    pub fn normal_equation_residual(&self, x: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
        let p = x.ncols();
        let a = x.tr_mul(x) + DMatrix::identity(p, p) * self.alpha;
        let rhs = x.tr_mul(&y.add_scalar(-self.bias));
        let r = &a * &self.weights - &rhs;
        let scale = a.norm() * self.weights.norm() + rhs.norm();
        if scale == 0.0 {
            0.0
        } else {
            r.norm() / scale
        }
    }
}

/// Fits an intercept plus ridge weights on raw (uncentered, unscaled)
/// features. The intercept is not penalized.
pub fn ridge_fit(x: &DMatrix<f64>, y: &DVector<f64>, alphas: &[f64]) -> Result<RidgeModel> {
    let (n, p) = x.shape();
    if n == 0 || y.len() != n {
        return Err(Error::Probe(format!(
            "ridge: {n} rows, {} targets",
            y.len()
        )));
    }
    if alphas.is_empty() || alphas.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::Probe(format!(
            "ridge: invalid alpha grid {alphas:?}"
        )));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Probe("ridge: non-finite input".into()));
    }

    let x_mean = x.row_mean().transpose();
    let y_mean = y.mean();
    let mut xc = x.clone();
    for mut row in xc.row_iter_mut() {
        row -= x_mean.transpose();
    }
    let yc = y.add_scalar(-y_mean);

    // Hat matrix of the centered problem: 11ᵀ/n + Xc V (Λ + α)⁻¹ Vᵀ Xcᵀ.
    let gram = xc.tr_mul(&xc);
    let eig = SymmetricEigen::new(gram.clone());
    let lambda = eig.eigenvalues.map(|l| l.max(0.0));
    let z = &xc * &eig.eigenvectors;
    let q = z.tr_mul(&yc);
    let z2 = z.map(|v| v * v);

    let loo_mse: Vec<f64> = alphas
        .iter()
        .map(|&alpha| {
            let inv = lambda.map(|l| 1.0 / (l + alpha));
            let fitted = &z * q.component_mul(&inv);
            let leverage = &z2 * &inv;
            let mut sse = 0.0;
            for i in 0..n {
                let h = 1.0 / n as f64 + leverage[i];
                let e = (yc[i] - fitted[i]) / (1.0 - h).max(1e-12);
                sse += e * e;
            }
            sse / n as f64
        })
        .collect();
    let best = (0..alphas.len())
        .min_by(|&a, &b| loo_mse[a].total_cmp(&loo_mse[b]))
        .expect("non-empty grid");
    let alpha = alphas[best];

    let a = gram + DMatrix::identity(p, p) * alpha;
    let rhs = xc.tr_mul(&yc);
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Probe("ridge: system not positive definite".into()))?;
    let mut w = chol.solve(&rhs);
    // One step of iterative refinement.
    let r = &rhs - &a * &w;
    w += chol.solve(&r);

    let bias = y_mean - x_mean.dot(&w);
    Ok(RidgeModel {
        weights: w,
        bias,
        alpha,
        loo_mse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn constant_target() {
        let x = random(50, 4, 1);
        let y = DVector::from_element(50, 3.5);
        let m = ridge_fit(&x, &y, &[0.1, 1.0, 10.0]).unwrap();
        let pred = m.predict(&x);
        assert!(pred.iter().all(|v| (v - 3.5).abs() < 1e-9));
    }

    #[test]
    fn duplicate_columns_finite() {
        let mut x = random(30, 3, 2);
        x = x.insert_column(3, 0.0);
        let c = x.column(0).clone_owned();
        x.set_column(3, &c);
        let y = x.column(0) * 2.0 + x.column(1);
        let m = ridge_fit(&x, &y, &[0.1]).unwrap();
        assert!(m.weights.iter().all(|w| w.is_finite()));
        assert!(m.normal_equation_residual(&x, &y) < 1e-8);
    }

    #[test]
    fn loo_matches_refitting() {
        let x = random(12, 3, 3);
        let y = DVector::from_fn(12, |i, _| {
            x[(i, 0)] - 2.0 * x[(i, 2)] + (i % 3) as f64 * 0.1
        });
        let alpha = 1.0;
        let m = ridge_fit(&x, &y, &[alpha]).unwrap();
        let mut sse = 0.0;
        for i in 0..12 {
            let keep: Vec<usize> = (0..12).filter(|&j| j != i).collect();
            let xi = x.select_rows(&keep);
            let yi = DVector::from_iterator(11, keep.iter().map(|&j| y[j]));
            let mi = ridge_fit(&xi, &yi, &[alpha]).unwrap();
            let e = y[i] - (x.row(i) * &mi.weights)[0] - mi.bias;
            sse += e * e;
        }
        assert!((m.loo_mse[0] - sse / 12.0).abs() < 1e-9);
    }
}
