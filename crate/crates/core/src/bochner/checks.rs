//! Difference-quotient checks of the closed-form Laplacians.

use serde::{Deserialize, Serialize};

use super::fields::{eval_counterexample, phi_value, u_value, BoxCoords};
use super::CounterexampleParams;
use crate::error::{Error, Result};
use crate::geometry::{distance_to_singular_set, grad_log_weight, Configuration};

/// Smallest step accepted before a point is rejected.
pub const MIN_STEP: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdCheck {
    pub step_u: f64,
    /// Also small against the kink of `Phi_r`.
    pub step_phi: f64,
    pub rel_err_u: f64,
    pub rel_err_phi: f64,
    pub fd_lap_u: f64,
    pub fd_lap_phi: f64,
}

/// `Delta g + grad log w . grad g` from central differences with step `h`.
fn fd_weighted_laplacian(g: &dyn Fn(&[f64]) -> f64, x: &[f64], drift: &[f64], h: f64) -> f64 {
    let g0 = g(x);
    let mut y = x.to_vec();
    let mut acc = 0.0;
    for k in 0..x.len() {
        y[k] = x[k] + h;
        let gp = g(&y);
        y[k] = x[k] - h;
        let gm = g(&y);
        y[k] = x[k];
        acc += (gp - 2.0 * g0 + gm) / (h * h) + drift[k] * (gp - gm) / (2.0 * h);
    }
    acc
}

fn richardson(g: &dyn Fn(&[f64]) -> f64, x: &[f64], drift: &[f64], h: f64) -> f64 {
    let coarse = fd_weighted_laplacian(g, x, drift, h);
    let fine = fd_weighted_laplacian(g, x, drift, 0.5 * h);
    (4.0 * fine - coarse) / 3.0
}

fn relative(fd: f64, exact: f64, scale: f64) -> f64 {
    (fd - exact).abs() / exact.abs().max(scale).max(f64::MIN_POSITIVE)
}

/// Length over which the smooth step of a plateau layer changes by a
/// relative O(1) amount: `width z^2` at depth `z` from its vanishing edge.
/// Near the plateau the deviation from 1 is below roundoff and sets no scale.
fn layer_scale(y: f64, inner: f64, outer: f64) -> f64 {
    let width = outer - inner;
    let z = (outer - y.abs()) / width;
    if z <= 0.0 || z >= 1.0 {
        return f64::INFINITY;
    }
    width * z.min(0.5).powi(2)
}

/// Same for the unit mollifier `exp(-1/(1 - y^2))`.
fn mollifier_scale(y: f64) -> f64 {
    let q = 1.0 - y * y;
    if q <= 0.0 {
        f64::INFINITY
    } else {
        0.5 * q * q
    }
}

/// Steps used at `x` for `u` and for `phi`: small against the distance to
/// every hyperplane, to the cut-off length `r`, and to the local scale of
/// every transition layer of the cut-offs. The `phi` step also stays clear
/// of the kink of `Phi_r` at `|t| = 2r/3`.
pub fn fd_step(x: &Configuration, p: &CounterexampleParams) -> (f64, f64) {
    let b = BoxCoords::from_x(x.coords());
    let dist = distance_to_singular_set(x);
    let kink = (b.t.abs() - 2.0 * p.r / 3.0).abs();
    let mut layers = layer_scale(b.t, p.r, 2.0 * p.r);
    for &h in std::iter::once(&b.c).chain(&b.y) {
        layers = layers.min(layer_scale(h, 1.0, 2.0)).min(mollifier_scale(h));
    }
    let step_u = 2e-4_f64.min(dist / 40.0).min(p.r / 50.0).min(layers / 40.0);
    (step_u, step_u.min(kink / 40.0))
}

/// Relative errors of the closed-form `lap_u` and `lap_phi` against
/// Richardson-extrapolated central differences. Errors are relative to the
/// larger of the value and the sum of absolute terms in the closed form.
pub fn fd_laplacian_check(x: &Configuration, p: &CounterexampleParams) -> Result<FdCheck> {
    let (step_u, step_phi) = fd_step(x, p);
    if step_phi < MIN_STEP {
        let (i, j, gap) = x.closest_pair().unwrap_or((0, 1, 0.0));
        return Err(Error::OnSingularSet { i, j, gap });
    }
    let e = eval_counterexample(x, p)?;
    let drift = grad_log_weight(x, p.beta)?;
    let uf = |y: &[f64]| u_value(y, p);
    let pf = |y: &[f64]| phi_value(y, p);
    let fd_u = richardson(&uf, x.coords(), &drift, step_u);
    let fd_phi = richardson(&pf, x.coords(), &drift, step_phi);
    Ok(FdCheck {
        step_u,
        step_phi,
        rel_err_u: relative(fd_u, e.lap_u, e.lap_u_scale),
        rel_err_phi: relative(fd_phi, e.lap_phi, e.lap_phi_scale),
        fd_lap_u: fd_u,
        fd_lap_phi: fd_phi,
    })
}

/// Difference-quotient `lap_phi` at `x` with an explicit step.
pub fn fd_lap_phi(x: &Configuration, p: &CounterexampleParams, step: f64) -> Result<f64> {
    let drift = grad_log_weight(x, p.beta)?;
    let pf = |y: &[f64]| phi_value(y, p);
    Ok(richardson(&pf, x.coords(), &drift, step))
}
