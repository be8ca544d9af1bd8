//! Quadrature for integrands carrying an algebraic endpoint singularity
//! `|t - a|^alpha`, `alpha > -1`.
//!
//! [`gauss_jacobi_rule`] builds the Gauss rule for the weight `|t - a|^alpha`
//! by the Golub-Welsch eigenvalue method. [`integrate_graded`] combines it
//! with geometric grading toward the singular endpoint and adaptive
//! bisection, which converges geometrically for `f(t)|t - a|^alpha` with `f`
//! smooth away from `a`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes and weights integrating `f(t) |t - a|^alpha` over the segment
/// between `a` and `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub alpha: f64,
    /// Singular endpoint.
    pub a: f64,
    pub b: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `sum_k w_k f(t_k)`, which approximates `int f(t) |t - a|^alpha dt`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    /// The same reference rule moved to a new segment `[a, b]`.
    pub fn rescaled(&self, a: f64, b: f64) -> Self {
        let old_len = (self.b - self.a).abs();
        let new_len = (b - a).abs();
        let scale = (new_len / old_len).powf(self.alpha + 1.0);
        let nodes = self.nodes.iter().map(|&t| a + (t - self.a) / (self.b - self.a) * (b - a)).collect();
        let weights = self.weights.iter().map(|&w| w * scale).collect();
        Self { alpha: self.alpha, a, b, nodes, weights }
    }
}

/// Gauss-Jacobi rule of order `m` for the weight `|t - a|^alpha` on the
/// segment between `a` and `b`. Exact for polynomials of degree `2m - 1`.
pub fn gauss_jacobi_rule(m: usize, alpha: f64, a: f64, b: f64) -> Result<QuadratureRule> {
    if !(alpha > -1.0) {
        return Err(Error::NonIntegrable { alpha });
    }
    if m == 0 {
        return Err(Error::InvalidParameter("quadrature order must be at least 1".into()));
    }
    if !(a.is_finite() && b.is_finite()) || a == b {
        return Err(Error::InvalidParameter(format!("degenerate interval [{a}, {b}]")));
    }

    // Monic Jacobi recurrence on [-1, 1] for the weight (1 + x)^alpha.
    let mut jacobi = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        let kf = k as f64;
        let s = 2.0 * kf + alpha;
        jacobi[(k, k)] = if k == 0 { alpha / (alpha + 2.0) } else { alpha * alpha / (s * (s + 2.0)) };
        if k > 0 {
            let b_k = 4.0 * kf * kf * (kf + alpha) * (kf + alpha) / (s * s * (s + 1.0) * (s - 1.0));
            let off = b_k.sqrt();
            jacobi[(k, k - 1)] = off;
            jacobi[(k - 1, k)] = off;
        }
    }
    let mu0 = 2f64.powf(alpha + 1.0) / (alpha + 1.0);
    let eig = SymmetricEigen::new(jacobi);

    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));

    let half = 0.5 * (b - a).abs();
    let scale = half.powf(alpha + 1.0);
    let nodes = pairs.iter().map(|&(x, _)| a + (b - a) * 0.5 * (1.0 + x)).collect();
    let weights = pairs.iter().map(|&(_, w)| w * scale).collect();
    Ok(QuadratureRule { alpha, a, b, nodes, weights })
}

/// Gauss-Legendre rule of order `m` on `[lo, hi]`.
pub fn gauss_legendre(m: usize, lo: f64, hi: f64) -> Result<QuadratureRule> {
    gauss_jacobi_rule(m, 0.0, lo, hi)
}

/// A value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Knobs for [`integrate_graded_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradedOptions {
    /// Gauss order on every cell.
    pub order: usize,
    /// Initial number of dyadic levels toward the singular endpoint.
    pub initial_levels: usize,
    /// Maximum bisection depth below an initial cell.
    pub max_depth: usize,
}

impl Default for GradedOptions {
    fn default() -> Self {
        Self { order: 8, initial_levels: 6, max_depth: 60 }
    }
}

/// `int_lo^hi f(t) |t|^alpha dt` to absolute tolerance `tol`. The singular
/// point `t = 0` may be an endpoint but not interior. Cells are graded
/// geometrically (ratio 2) toward the endpoint nearer to 0.
pub fn integrate_graded<F: Fn(f64) -> f64>(f: F, alpha: f64, lo: f64, hi: f64, tol: f64) -> Result<Estimate> {
    integrate_graded_with(f, alpha, lo, hi, tol, GradedOptions::default())
}

pub fn integrate_graded_with<F: Fn(f64) -> f64>(
    f: F,
    alpha: f64,
    lo: f64,
    hi: f64,
    tol: f64,
    opts: GradedOptions,
) -> Result<Estimate> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if !(lo <= hi) {
        return Err(Error::InvalidParameter(format!("interval [{lo}, {hi}] is reversed")));
    }
    if lo < 0.0 && hi > 0.0 {
        return Err(Error::InvalidParameter(format!(
            "singular point 0 is interior to [{lo}, {hi}]; split the interval"
        )));
    }
    let (near, far) = if lo.abs() <= hi.abs() { (lo, hi) } else { (hi, lo) };
    // The Jacobi rule is only needed when the weight actually vanishes or
    // blows up at an endpoint; away from 0 any real exponent is fine.
    let singular = if near == 0.0 {
        gauss_jacobi_rule(opts.order, alpha, 0.0, 1.0)?
    } else {
        gauss_legendre(opts.order, 0.0, 1.0)?
    };
    let regular = gauss_legendre(opts.order, 0.0, 1.0)?;
    if lo == hi {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let length = (far - near).abs();
    let dir = (far - near).signum();

    // Cells are offsets [s0, s1] from `near`, measured toward `far`.
    let cell = |s0: f64, s1: f64| -> f64 {
        if s0 == 0.0 && near == 0.0 {
            singular.rescaled(0.0, s1).integrate(|s| f(dir * s))
        } else {
            regular.rescaled(s0, s1).integrate(|s| {
                let t = near + dir * s;
                f(t) * t.abs().powf(alpha)
            })
        }
    };

    let mut edges = vec![0.0];
    for level in (0..opts.initial_levels).rev() {
        edges.push(length / 2f64.powi(level as i32 + 1));
    }
    edges.push(length);

    let mut value = 0.0;
    let mut error = 0.0;
    let mut converged = true;
    for w in edges.windows(2) {
        let mut stack = vec![(w[0], w[1], cell(w[0], w[1]), 0usize)];
        while let Some((s0, s1, whole, depth)) = stack.pop() {
            let mid = 0.5 * (s0 + s1);
            let left = cell(s0, mid);
            let right = cell(mid, s1);
            let diff = (whole - (left + right)).abs();
            if !diff.is_finite() {
                return Err(Error::NoConvergence { value, error: f64::INFINITY });
            }
            let local_tol = tol * (s1 - s0) / length;
            if diff <= local_tol || depth >= opts.max_depth {
                converged &= diff <= local_tol;
                value += left + right;
                error += diff;
            } else {
                stack.push((mid, s1, right, depth + 1));
                stack.push((s0, mid, left, depth + 1));
            }
        }
    }
    if !converged && error > tol {
        return Err(Error::NoConvergence { value, error });
    }
    Ok(Estimate { value, error })
}

/// [`integrate_graded`] to a relative tolerance, tightening the absolute
/// tolerance from a coarse first pass.
pub fn integrate_graded_relative<F: Fn(f64) -> f64>(f: F, alpha: f64, lo: f64, hi: f64, rel: f64) -> Result<Estimate> {
    let mut tol = 1.0;
    let mut last = None;
    for _ in 0..6 {
        let est = integrate_graded(&f, alpha, lo, hi, tol)?;
        let target = rel * est.value.abs();
        if est.error <= target || target == 0.0 {
            return Ok(est);
        }
        tol = target;
        last = Some(est);
    }
    let est = last.expect("at least one pass");
    Err(Error::NoConvergence { value: est.value, error: est.error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_reduction_integrates_constant() {
        let rule = gauss_jacobi_rule(5, 0.0, 0.0, 1.0).unwrap();
        assert!((rule.integrate(|_| 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_sqrt_weight_has_mass_two() {
        for m in [1, 3, 9, 20] {
            let rule = gauss_jacobi_rule(m, -0.5, 0.0, 1.0).unwrap();
            assert!((rule.integrate(|_| 1.0) - 2.0).abs() < 1e-13, "m = {m}");
        }
    }

    #[test]
    fn weights_are_positive_and_nodes_inside() {
        let rule = gauss_jacobi_rule(16, 1.7, 2.0, -1.0).unwrap();
        assert!(rule.weights.iter().all(|&w| w > 0.0));
        assert!(rule.nodes.iter().all(|&t| t > -1.0 && t < 2.0));
    }

    #[test]
    fn singular_endpoint_on_the_right() {
        // int_0^1 (1 - t)^{-1/2} dt = 2
        let rule = gauss_jacobi_rule(6, -0.5, 1.0, 0.0).unwrap();
        assert!((rule.integrate(|_| 1.0) - 2.0).abs() < 1e-13);
        // int_0^1 t (1 - t)^{-1/2} dt = 4/3
        assert!((rule.integrate(|t| t) - 4.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_integrable_exponent() {
        assert!(matches!(gauss_jacobi_rule(4, -1.0, 0.0, 1.0), Err(Error::NonIntegrable { .. })));
        assert!(matches!(
            integrate_graded(|_| 1.0, -1.2, 0.0, 1.0, 1e-8),
            Err(Error::NonIntegrable { .. })
        ));
    }

    #[test]
    fn graded_closed_form_power() {
        let beta: f64 = 0.5;
        let eps: f64 = 1e-3;
        let exact = (1.0 - eps.powf(beta - 1.0)) / (beta - 1.0);
        let est = integrate_graded(|_| 1.0, beta - 2.0, eps, 1.0, 1e-9).unwrap();
        assert!(((est.value - exact) / exact).abs() < 1e-10, "{} vs {exact}", est.value);
        assert!(est.error >= (est.value - exact).abs());
    }

    #[test]
    fn graded_rejects_interior_singularity() {
        assert!(integrate_graded(|_| 1.0, 0.5, -1.0, 1.0, 1e-8).is_err());
    }

    #[test]
    fn graded_negative_side() {
        // int_{-1}^0 |t|^{-1/2} dt = 2
        let est = integrate_graded(|_| 1.0, -0.5, -1.0, 0.0, 1e-12).unwrap();
        assert!((est.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn graded_relative_tolerance() {
        // int_0^1 t^{-0.9} dt = 10
        let est = integrate_graded_relative(|_| 1.0, -0.9, 0.0, 1.0, 1e-12).unwrap();
        assert!((est.value - 10.0).abs() < 1e-10);
        let tiny = integrate_graded_relative(|t| 1e-20 * t, 0.0, 0.0, 1.0, 1e-10).unwrap();
        assert!((tiny.value - 0.5e-20).abs() < 1e-31);
    }

    #[test]
    fn graded_zero_integrand() {
        let est = integrate_graded(|_| 0.0, -0.3, 0.0, 1.0, 1e-12).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn graded_matches_high_order_jacobi() {
        let est = integrate_graded(f64::cos, -0.5, 0.0, std::f64::consts::PI, 1e-13).unwrap();
        let rule = gauss_jacobi_rule(40, -0.5, 0.0, std::f64::consts::PI).unwrap();
        let reference = rule.integrate(f64::cos);
        assert!(((est.value - reference) / reference).abs() < 1e-9);
    }
}
