//! Capacity of the singular set.
//!
//! Two independent views of the `beta = 1` threshold:
//!
//! * the log-log cutoff family `g_s` localised by a radial bump `xi`, whose
//!   weighted `H^{1,2}` norm reduces to a one-dimensional integral in the
//!   distance `t` to the singular set (this is an upper bound for the
//!   capacity; it tends to 0 when `beta >= 1`);
//! * the weighted capacity of a point on the half line,
//!   `inf { int_eps^1 (u'^2 + u^2) t^beta dt : u(eps) = 1, u(1) = 0 }`,
//!   computed by a Ritz method. As `eps -> 0` it vanishes iff `beta >= 1`.

use std::f64::consts::E;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::geometry::{distance_to_singular_set, Configuration};
use crate::linalg::solve_tridiagonal;
use crate::quadrature::{gauss_legendre, integrate_graded_relative, Estimate};

/// Upper end of the admissible cutoff parameter, `e^{-e}`.
pub fn max_cutoff_parameter() -> f64 {
    (-E).exp()
}

/// The cutoff `g_s` as a function of the distance `d` to the singular set:
/// 1 for `d < s`, `1 + log|log d| - log|log s|` on `[s, s^{1/e}]`, 0 beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffFamily {
    s: f64,
}

impl CutoffFamily {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 0.0 && s < max_cutoff_parameter()) {
            return Err(Error::InvalidParameter(format!(
                "cutoff parameter s = {s} must lie in (0, e^-e)"
            )));
        }
        Ok(Self { s })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `s^{1/e}`, where the cutoff reaches 0.
    pub fn outer(&self) -> f64 {
        self.s.powf(1.0 / E)
    }

    pub fn profile(&self, d: f64) -> f64 {
        if d < self.s {
            1.0
        } else if d <= self.outer() {
            1.0 + d.ln().abs().ln() - self.s.ln().abs().ln()
        } else {
            0.0
        }
    }

    /// `|dg/dd|`, which is `1 / (d |log d|)` on the transition band.
    pub fn profile_slope(&self, d: f64) -> f64 {
        if d < self.s || d > self.outer() {
            0.0
        } else {
            1.0 / (d * d.ln().abs())
        }
    }

    pub fn eval(&self, x: &Configuration) -> f64 {
        self.profile(distance_to_singular_set(x))
    }
}

/// `g_s(x)`; errors when `s` is outside `(0, e^{-e})`.
pub fn cutoff_g(s: f64, x: &Configuration) -> Result<f64> {
    Ok(CutoffFamily::new(s)?.eval(x))
}

/// Radial C^1 bump: 1 on the ball of radius 1/3, 0 outside radius 1/2,
/// cubic smoothstep in between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Localizer {
    pub center: Vec<f64>,
}

impl Localizer {
    pub const INNER: f64 = 1.0 / 3.0;
    pub const OUTER: f64 = 0.5;

    pub fn radial(rho: f64) -> f64 {
        if rho <= Self::INNER {
            1.0
        } else if rho >= Self::OUTER {
            0.0
        } else {
            let z = (rho - Self::INNER) / (Self::OUTER - Self::INNER);
            1.0 - z * z * (3.0 - 2.0 * z)
        }
    }

    pub fn radial_slope(rho: f64) -> f64 {
        if rho <= Self::INNER || rho >= Self::OUTER {
            0.0
        } else {
            let w = Self::OUTER - Self::INNER;
            let z = (rho - Self::INNER) / w;
            -6.0 * z * (1.0 - z) / w
        }
    }

    pub fn eval(&self, x: &Configuration) -> f64 {
        let rho = x
            .coords()
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        Self::radial(rho)
    }
}

/// `vol_{n-1}(ball of radius 1/2) * n(n-1) * 2^{beta/2}`, the constant in
/// front of the one-dimensional integral.
pub fn reduction_constant(n: usize, beta: f64) -> f64 {
    let k = n.saturating_sub(1) as f64;
    let ball = std::f64::consts::PI.powf(0.5 * k) / gamma(0.5 * k + 1.0) * 0.5f64.powf(k);
    ball * (n * (n - 1)) as f64 * 2f64.powf(0.5 * beta)
}

/// One evaluation of the cutoff norm integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityValue {
    pub s: f64,
    pub beta: f64,
    /// `int_0^{s^{1/e}} [2g^2 + g'^2 + 2g|g'|] t^beta dt`.
    pub exact: Estimate,
    /// Same integral with `t^beta` replaced by `t` (the `beta >= 1` majorant).
    pub majorant: Estimate,
}

/// `int_0^{s^{1/e}} [2 g^2 + g'^2 + 2 g |g'|] t^p dt` split at `s`.
fn cutoff_integral(family: &CutoffFamily, power: f64) -> Result<Estimate> {
    let s = family.s();
    let inner = 2.0 * s.powf(power + 1.0) / (power + 1.0);
    let band = |t: f64| {
        let g = family.profile(t);
        let dg = family.profile_slope(t);
        2.0 * g * g + dg * dg + 2.0 * g * dg
    };
    let banded = integrate_graded_relative(band, power, s, family.outer(), 1e-11)?;
    Ok(Estimate { value: inner + banded.value, error: banded.error + f64::EPSILON * inner })
}

/// The one-dimensional reduction of `||g_s xi||^2_{H^{1,2}}`, with the full
/// weight `t^beta` and with the `t` majorant.
pub fn capacity_upper(s: f64, beta: f64) -> Result<CapacityValue> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let family = CutoffFamily::new(s)?;
    Ok(CapacityValue {
        s,
        beta,
        exact: cutoff_integral(&family, beta)?,
        majorant: cutoff_integral(&family, 1.0)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapacityVerdict {
    Decaying,
    Diverging,
    /// Settles at a positive value.
    Stabilizing,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityEntry {
    pub s: f64,
    pub value: f64,
    pub err_est: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub beta: f64,
    /// Sorted by decreasing `s`.
    pub entries: Vec<CapacityEntry>,
    pub verdict: CapacityVerdict,
}

fn classify(values: &[f64]) -> CapacityVerdict {
    if values.len() < 2 {
        return CapacityVerdict::Inconclusive;
    }
    if values.windows(2).all(|w| w[1] < w[0]) {
        CapacityVerdict::Decaying
    } else if values.windows(2).all(|w| w[1] > w[0]) {
        CapacityVerdict::Diverging
    } else {
        CapacityVerdict::Inconclusive
    }
}

/// Evaluates [`capacity_upper`] on a grid of `s` values.
pub fn capacity_sweep(beta: f64, s_grid: &[f64]) -> Result<CapacityReport> {
    let mut grid = s_grid.to_vec();
    grid.sort_by(|a, b| b.total_cmp(a));
    let entries = grid
        .par_iter()
        .map(|&s| {
            let v = capacity_upper(s, beta)?;
            Ok(CapacityEntry { s, value: v.exact.value, err_est: v.exact.error.max(f64::MIN_POSITIVE) })
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = entries.iter().map(|e| e.value).collect();
    Ok(CapacityReport { beta, entries, verdict: classify(&values) })
}

/// Ritz approximation of the weighted point capacity on `[eps, 1]` with `m`
/// geometrically graded P1 elements.
pub fn point_capacity_1d(beta: f64, eps: f64, m: usize) -> Result<f64> {
    if !(beta > -1.0) {
        return Err(Error::InvalidParameter(format!("beta must exceed -1, got {beta}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    if m < 16 {
        return Err(Error::InvalidParameter(format!("mesh needs at least 16 cells, got {m}")));
    }
    let nodes: Vec<f64> = (0..=m).map(|k| eps * (1.0 / eps).powf(k as f64 / m as f64)).collect();
    let gl = gauss_legendre(6, 0.0, 1.0)?;

    // Element matrices of (u'^2 + u^2) t^beta.
    let mut diag = vec![0.0; m + 1];
    let mut off = vec![0.0; m];
    for e in 0..m {
        let (a, b) = (nodes[e], nodes[e + 1]);
        let h = b - a;
        let w = (b.powf(beta + 1.0) - a.powf(beta + 1.0)) / (beta + 1.0);
        let rule = gl.rescaled(a, b);
        let (mut maa, mut mab, mut mbb) = (0.0, 0.0, 0.0);
        for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
            let pb = (t - a) / h;
            let pa = 1.0 - pb;
            let tw = wt * t.powf(beta);
            maa += tw * pa * pa;
            mab += tw * pa * pb;
            mbb += tw * pb * pb;
        }
        let k = w / (h * h);
        diag[e] += k + maa;
        diag[e + 1] += k + mbb;
        off[e] += -k + mab;
    }

    // Interior unknowns 1..m-1 with u_0 = 1, u_m = 0.
    let interior = m - 1;
    let lower: Vec<f64> = off[1..interior].to_vec();
    let upper = lower.clone();
    let d: Vec<f64> = diag[1..m].to_vec();
    let mut rhs = vec![0.0; interior];
    rhs[0] = -off[0];
    let inner = solve_tridiagonal(&lower, &d, &upper, &rhs)?;

    let mut u = Vec::with_capacity(m + 1);
    u.push(1.0);
    u.extend(inner);
    u.push(0.0);
    let mut energy = 0.0;
    for i in 0..=m {
        energy += diag[i] * u[i] * u[i];
        if i < m {
            energy += 2.0 * off[i] * u[i] * u[i + 1];
        }
    }
    Ok(energy)
}

/// Point capacity over a grid of inner radii, each with the change under
/// mesh doubling as its error estimate.
pub fn point_capacity_sweep(beta: f64, eps_grid: &[f64], m: usize) -> Result<CapacityReport> {
    let mut grid = eps_grid.to_vec();
    grid.sort_by(|a, b| b.total_cmp(a));
    let entries = grid
        .par_iter()
        .map(|&eps| {
            let value = point_capacity_1d(beta, eps, m)?;
            let fine = point_capacity_1d(beta, eps, 2 * m)?;
            Ok(CapacityEntry { s: eps, value, err_est: (value - fine).abs() })
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = entries.iter().map(|e| e.value).collect();
    Ok(CapacityReport { beta, entries, verdict: classify_point(&values) })
}

/// Decaying when strictly decreasing to at most half the first value;
/// stabilizing when the last two values agree to 5%.
fn classify_point(values: &[f64]) -> CapacityVerdict {
    let k = values.len();
    if k < 3 {
        return CapacityVerdict::Inconclusive;
    }
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    if decreasing && values[k - 1] <= 0.5 * values[0] {
        CapacityVerdict::Decaying
    } else if values[k - 1] > 0.0 && (values[k - 1] - values[k - 2]).abs() <= 0.05 * values[k - 1] {
        CapacityVerdict::Stabilizing
    } else {
        CapacityVerdict::Inconclusive
    }
}
