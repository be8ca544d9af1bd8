//! The Bakry-Emery N-Ricci form of the Dyson potential `V = -log w_beta`:
//!
//! ```text
//! Ric_N(v, v)_x = beta * sum_{i<j} (v_i - v_j)^2 / (x_i - x_j)^2
//!               - beta^2 / (N - n) * (sum_{i<j} (v_i - v_j) / (x_i - x_j))^2
//! ```
//!
//! with the second term dropped for `N = inf`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geometry::{Configuration, ModelParams, SINGULAR_GUARD};

/// Sharp dimension bound `n + (beta/2) n (n-1)`.
pub fn n_beta(n: usize, beta: f64) -> f64 {
    let n = n as f64;
    n + 0.5 * beta * n * (n - 1.0)
}

/// Matrix of the quadratic form `v -> Ric_N(v, v)_x`.
#[derive(Debug, Clone)]
pub struct RicciForm {
    pub x: Configuration,
    pub params: ModelParams,
    pub matrix: DMatrix<f64>,
    /// Max absolute row sum of the Hessian part plus that of the rank-one
    /// part. At the sharp dimension the two can cancel to roundoff.
    pub term_norm: f64,
}

impl RicciForm {
    pub fn value(&self, v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        v.dot(&(&self.matrix * &v))
    }

    /// Upper bound on the spectral norm of `M` that does not see
    /// cancellation between its two parts.
    pub fn norm_estimate(&self) -> f64 {
        self.term_norm
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }
}

fn check(x: &Configuration, params: &ModelParams) -> Result<()> {
    if x.len() != params.n {
        return Err(Error::InvalidParameter(format!(
            "configuration has {} coordinates but n = {}",
            x.len(),
            params.n
        )));
    }
    if let Some((i, j, gap)) = x.closest_pair() {
        if gap < SINGULAR_GUARD {
            return Err(Error::OnSingularSet { i, j, gap });
        }
    }
    Ok(())
}

/// `M = beta sum_{i<j} d_ij^{-2} (e_i - e_j)(e_i - e_j)^T - beta^2/(N-n) a a^T`
/// with `a = sum_{i<j} (e_i - e_j)/d_ij`.
pub fn ricci_form(x: &Configuration, params: &ModelParams) -> Result<RicciForm> {
    check(x, params)?;
    let n = params.n;
    let beta = params.beta;
    let c = x.coords();
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut a = DVector::<f64>::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let d = c[i] - c[j];
            let k = beta / (d * d);
            m[(i, i)] += k;
            m[(j, j)] += k;
            m[(i, j)] -= k;
            m[(j, i)] -= k;
            a[i] += 1.0 / d;
            a[j] -= 1.0 / d;
        }
    }
    let row_norm = |mat: &DMatrix<f64>| mat.row_iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut term_norm = row_norm(&m);
    let rank_one = beta * beta * params.dim.inverse_excess(n);
    if rank_one != 0.0 {
        let r = (&a * a.transpose()) * rank_one;
        term_norm += row_norm(&r);
        m -= r;
    }
    Ok(RicciForm { x: x.clone(), params: *params, matrix: m, term_norm })
}

/// Direct pairwise evaluation of `Ric_N(v, v)_x`, independent of the matrix
/// assembly.
pub fn ricci_value(x: &Configuration, params: &ModelParams, v: &[f64]) -> Result<f64> {
    check(x, params)?;
    if v.len() != params.n {
        return Err(Error::InvalidParameter("tangent vector has the wrong length".into()));
    }
    let c = x.coords();
    let mut squares = 0.0;
    let mut linear = 0.0;
    for i in 0..params.n {
        for j in i + 1..params.n {
            let q = (v[i] - v[j]) / (c[i] - c[j]);
            squares += q * q;
            linear += q;
        }
    }
    let beta = params.beta;
    Ok(beta * squares - beta * beta * params.dim.inverse_excess(params.n) * linear * linear)
}

/// Smallest eigenvalue of the Ricci matrix at `x`.
pub fn min_ricci_eig(x: &Configuration, params: &ModelParams) -> Result<f64> {
    Ok(ricci_form(x, params)?.min_eigenvalue())
}
