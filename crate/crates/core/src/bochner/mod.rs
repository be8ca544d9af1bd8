//! Counterexample to the weak Bochner inequality for `beta in (0, 1)`.
//!
//! `u_r = f_r eta_r` where `f_r = prod sgn(x_i - x_j)|x_i - x_j|^{1-beta}` is
//! weighted-harmonic and `eta_r` cuts off to a box around a piece of
//! `{x_1 = x_2}`; `phi_r = Phi_r(t) Psi(h)` is a cosine cap in the normal
//! direction. The left side `1/2 int |grad u_r|^2 lap phi_r w` diverges like
//! `-r^{-1-beta}` while the right side is `O(r^{1-beta})`.

mod checks;
mod fields;
mod integrals;
pub mod profiles;
mod scaling;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use checks::{fd_lap_phi, fd_laplacian_check, fd_step, FdCheck, MIN_STEP};
pub use fields::{eval_counterexample, foot_center, harmonic_factor, lap_phi_bound, phi_value, u_value, BoxCoords, CounterexampleBundle};
pub use integrals::{leading_constant, wb_sides, weak_laplacian_check, QuadratureSpec, TestBump, WbSides, WeakLaplacianEntry};
pub use scaling::{fit_scaling, ScalingFit, MAX_RESIDUAL};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleParams {
    pub r: f64,
    pub n: usize,
    pub beta: f64,
    pub k: f64,
}

impl CounterexampleParams {
    pub fn new(r: f64, n: usize, beta: f64, k: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidParameter(format!("r must lie in (0, 1), got {r}")));
        }
        if n < 2 {
            return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidParameter(format!("beta must lie in (0, 1), got {beta}")));
        }
        if !k.is_finite() {
            return Err(Error::InvalidParameter(format!("K must be finite, got {k}")));
        }
        Ok(Self { r, n, beta, k })
    }

    pub fn with_r(self, r: f64) -> Result<Self> {
        Self::new(r, self.n, self.beta, self.k)
    }

    /// Coordinate intervals of `D_rho^m` in `x`.
    pub fn box_intervals(&self, rho: f64, m: f64) -> Vec<(f64, f64)> {
        let mut iv = vec![(-m - rho, m + rho), (-m - rho, m + rho)];
        iv.extend((3..=self.n).map(|i| (foot_center(i) - m, foot_center(i) + m)));
        iv
    }

    /// Pairs `(i, j)` (0-based) whose difference interval over `D_rho^m`
    /// contains 0. Only `(0, 1)` is expected.
    pub fn pairs_meeting_box(&self, rho: f64, m: f64) -> Vec<(usize, usize)> {
        let iv = self.box_intervals(rho, m);
        let mut out = Vec::new();
        for i in 0..iv.len() {
            for j in i + 1..iv.len() {
                let lo = iv[i].0 - iv[j].1;
                let hi = iv[i].1 - iv[j].0;
                if lo <= 0.0 && hi >= 0.0 {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Geometric grid `start, start/2, ...` with `count` points.
pub fn geometric_r_grid(start: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| start * 0.5f64.powi(k as i32)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BochnerReport {
    pub n: usize,
    pub beta: f64,
    pub k: f64,
    pub rows: Vec<WbSides>,
    pub lhs_fit: Option<ScalingFit>,
    pub rhs_fit: Option<ScalingFit>,
    pub leading_constant: f64,
    /// Largest `r` in the grid with `lhs < rhs`.
    pub violated_at: Option<f64>,
    pub verdict: String,
}

/// Both sides over an `r`-grid, with power-law fits.
pub fn bochner_sweep(n: usize, beta: f64, k: f64, r_grid: &[f64], q: QuadratureSpec) -> Result<BochnerReport> {
    let base = CounterexampleParams::new(r_grid.first().copied().unwrap_or(0.1), n, beta, k)?;
    let rows: Vec<Result<WbSides>> = r_grid.par_iter().map(|&r| wb_sides(&base.with_r(r)?, q)).collect();
    let rows: Vec<WbSides> = rows.into_iter().collect::<Result<_>>()?;
    let lhs: Vec<(f64, f64)> = rows.iter().map(|w| (w.r, w.lhs)).collect();
    let rhs: Vec<(f64, f64)> = rows.iter().map(|w| (w.r, w.rhs)).collect();
    let lhs_fit = fit_scaling(&lhs).ok();
    let rhs_fit = if k == 0.0 { None } else { fit_scaling(&rhs).ok() };
    let violated_at = rows.iter().filter(|w| w.violated()).map(|w| w.r).fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
    let verdict = match violated_at {
        Some(r) => format!("wB violated for K={k} at r={r}"),
        None => format!("no violation found for K={k}"),
    };
    Ok(BochnerReport { n, beta, k, rows, lhs_fit, rhs_fit, leading_constant: leading_constant(beta)?, violated_at, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Configuration;

    fn params(n: usize) -> CounterexampleParams {
        CounterexampleParams::new(0.1, n, 0.5, -1.0).unwrap()
    }

    #[test]
    fn only_first_pair_meets_boxes() {
        for n in 2..=6 {
            let p = params(n);
            assert_eq!(p.pairs_meeting_box(2.0 * p.r, 2.0), vec![(0, 1)]);
            assert_eq!(p.pairs_meeting_box(p.r, 1.0), vec![(0, 1)]);
        }
    }

    #[test]
    fn outside_support_is_zero() {
        let p = params(3);
        let x = Configuration::new(vec![0.5, 0.0, 15.0]).unwrap();
        let e = eval_counterexample(&x, &p).unwrap();
        assert_eq!((e.u, e.grad_u_sq, e.lap_u, e.phi, e.lap_phi), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn gradient_on_inner_box_two_particles() {
        let p = CounterexampleParams::new(0.1, 2, 0.5, 0.0).unwrap();
        let x = Configuration::new(vec![0.3 + 0.04, 0.3 - 0.04]).unwrap();
        let e = eval_counterexample(&x, &p).unwrap();
        let d = 0.08f64;
        assert!((e.grad_u_sq - 2.0 * 0.25 / d).abs() < 1e-12 * e.grad_u_sq);
        assert_eq!(e.lap_u, 0.0);
    }

    #[test]
    fn singular_point_is_flagged() {
        let p = params(2);
        let x = Configuration::new(vec![0.2, 0.2]).unwrap();
        let e = eval_counterexample(&x, &p).unwrap();
        assert!(e.singular);
        assert_eq!(e.u, 0.0);
        assert!(e.grad_u_sq.is_nan());
        assert!(e.lap_phi.is_finite());
    }

    #[test]
    fn fd_agrees_in_transition_layers() {
        let p = params(3);
        for &(t, c, y) in &[(0.15, 0.3, 0.2), (-0.05, 1.4, -1.6), (0.03, -0.5, 0.9), (0.17, 1.8, 1.1)] {
            let x = Configuration::new(BoxCoords { t, c, y: vec![y] }.to_x()).unwrap();
            let chk = fd_laplacian_check(&x, &p).unwrap();
            assert!(chk.rel_err_u < 1e-5, "{t} {c} {y}: {chk:?}");
            assert!(chk.rel_err_phi < 1e-5, "{t} {c} {y}: {chk:?}");
        }
    }

    #[test]
    fn leading_constant_is_negative() {
        for b in 1..10 {
            assert!(leading_constant(f64::from(b) / 10.0).unwrap() < 0.0);
        }
    }
}
