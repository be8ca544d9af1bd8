//! Pointwise values of `u_r = f_r eta_r`, `phi_r = Phi_r Psi` and their
//! gradients and weighted Laplacians.
//!
//! Box coordinates: `x = h + t (1, -1, 0, ..., 0)` with the foot
//! `h = (c, c, x_3, ..., x_n)`, so `x_1 - x_2 = 2t` and `c = (x_1 + x_2) / 2`.
//! The remaining feet are measured as `y_i = x_i - 5i` (1-based `i >= 3`).

use serde::{Deserialize, Serialize};

use super::profiles::{bump, cosine_cap, cosine_cap_slope_over_t, plateau, Jet};
use super::CounterexampleParams;
use crate::error::{Error, Result};
use crate::geometry::Configuration;

/// Box coordinates of a point.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxCoords {
    pub t: f64,
    pub c: f64,
    pub y: Vec<f64>,
}

impl BoxCoords {
    pub fn from_x(x: &[f64]) -> Self {
        let t = 0.5 * (x[0] - x[1]);
        let c = 0.5 * (x[0] + x[1]);
        let y = x[2..].iter().enumerate().map(|(k, &v)| v - foot_center(k + 3)).collect();
        Self { t, c, y }
    }

    pub fn to_x(&self) -> Vec<f64> {
        let mut x = vec![self.c + self.t, self.c - self.t];
        x.extend(self.y.iter().enumerate().map(|(k, &v)| v + foot_center(k + 3)));
        x
    }

    /// Whether the point lies in `D_rho^m`.
    pub fn in_box(&self, rho: f64, m: f64) -> bool {
        self.t.abs() <= rho && self.c.abs() <= m && self.y.iter().all(|v| v.abs() <= m)
    }
}

/// Centre of the foot interval for coordinate `i` (1-based, `i >= 3`).
pub fn foot_center(i: usize) -> f64 {
    5.0 * i as f64
}

/// Value, gradient and Hessian diagonal (in `x`) of `T(t) H(c, y)` where
/// `H` is the product of the one-dimensional jets `hj` (`hj[0]` in `c`).
#[derive(Debug, Clone)]
pub(crate) struct Separable {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

pub(crate) fn separable(tj: Jet, hj: &[Jet]) -> Separable {
    let dim = hj.len();
    let others = |skip: usize| hj.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, j)| j.v).product::<f64>();
    let h: f64 = hj.iter().map(|j| j.v).product();
    let rest_c = others(0);
    let (hc, hcc) = (hj[0].d1 * rest_c, hj[0].d2 * rest_c);
    let mut grad = Vec::with_capacity(dim + 1);
    let mut hess = Vec::with_capacity(dim + 1);
    grad.push(0.5 * tj.d1 * h + 0.5 * tj.v * hc);
    grad.push(-0.5 * tj.d1 * h + 0.5 * tj.v * hc);
    hess.push(0.25 * tj.d2 * h + 0.5 * tj.d1 * hc + 0.25 * tj.v * hcc);
    hess.push(0.25 * tj.d2 * h - 0.5 * tj.d1 * hc + 0.25 * tj.v * hcc);
    for (i, j) in hj.iter().enumerate().skip(1) {
        let rest = others(i);
        grad.push(tj.v * j.d1 * rest);
        hess.push(tj.v * j.d2 * rest);
    }
    Separable { value: tj.v * h, grad, hess }
}

/// Cut-off `eta_r = P_r(t) Q(h)` in separable form.
pub(crate) fn eta_jets(b: &BoxCoords, r: f64) -> (Jet, Vec<Jet>) {
    let p = plateau(b.t, r, 2.0 * r);
    let mut q = vec![plateau(b.c, 1.0, 2.0)];
    q.extend(b.y.iter().map(|&v| plateau(v, 1.0, 2.0)));
    (p, q)
}

/// `Psi(h)`, a tensor product of mollifiers supported in the unit foot box.
pub(crate) fn psi_jets(b: &BoxCoords) -> Vec<Jet> {
    let mut q = vec![bump(b.c, 0.0, 1.0)];
    q.extend(b.y.iter().map(|&v| bump(v, 0.0, 1.0)));
    q
}

/// `f_r = prod_{i<j} sgn(x_i - x_j) |x_i - x_j|^{1 - beta}`.
pub fn harmonic_factor(x: &[f64], beta: f64) -> f64 {
    let mut f = 1.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let d = x[i] - x[j];
            f *= d.signum() * d.abs().powf(1.0 - beta);
        }
    }
    f
}

/// Pair sums `S_k = sum_{p != k} 1/(x_k - x_p)` with the `(1,2)` term
/// removed from `S_1` and `S_2`, and `sum_{p != k} (x_k - x_p)^{-2}` in full.
struct PairSums {
    regular: Vec<f64>,
    inv_sq: Vec<f64>,
}

fn pair_sums(x: &[f64]) -> PairSums {
    let n = x.len();
    let mut regular = vec![0.0; n];
    let mut inv_sq = vec![0.0; n];
    for k in 0..n {
        for p in 0..n {
            if p == k {
                continue;
            }
            let d = x[k] - x[p];
            inv_sq[k] += 1.0 / (d * d);
            if !(k < 2 && p < 2) {
                regular[k] += 1.0 / d;
            }
        }
    }
    PairSums { regular, inv_sq }
}

/// Pointwise fields of the counterexample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleBundle {
    pub x: Vec<f64>,
    pub u: f64,
    pub grad_u: Vec<f64>,
    pub grad_u_sq: f64,
    /// Weighted Laplacian from the cancelled closed form.
    pub lap_u: f64,
    /// Weighted Laplacian assembled term by term without using the
    /// three-term cancellation.
    pub lap_u_uncancelled: f64,
    /// Sum of absolute values of the terms in `lap_u_uncancelled`.
    pub lap_u_scale: f64,
    pub phi: f64,
    pub lap_phi: f64,
    /// Sum of absolute values of the terms in `lap_phi`.
    pub lap_phi_scale: f64,
    /// Set on `x_1 = x_2`, where the gradient fields are undefined
    /// (stored as NaN) and only `u`, `lap_u`, `phi`, `lap_phi` are meaningful.
    pub singular: bool,
}

impl CounterexampleBundle {
    fn zero(x: &[f64]) -> Self {
        Self {
            x: x.to_vec(),
            u: 0.0,
            grad_u: vec![0.0; x.len()],
            grad_u_sq: 0.0,
            lap_u: 0.0,
            lap_u_uncancelled: 0.0,
            lap_u_scale: 0.0,
            phi: 0.0,
            lap_phi: 0.0,
            lap_phi_scale: 0.0,
            singular: false,
        }
    }
}

fn check_len(x: &Configuration, p: &CounterexampleParams) -> Result<()> {
    if x.len() != p.n {
        return Err(Error::InvalidParameter(format!("configuration has {} coordinates, expected {}", x.len(), p.n)));
    }
    Ok(())
}

/// Evaluates all fields at `x`.
pub fn eval_counterexample(x: &Configuration, p: &CounterexampleParams) -> Result<CounterexampleBundle> {
    check_len(x, p)?;
    let xs = x.coords();
    let b = BoxCoords::from_x(xs);
    if !b.in_box(2.0 * p.r, 2.0) {
        return Ok(CounterexampleBundle::zero(xs));
    }
    let beta = p.beta;
    let n = p.n;
    let sums = pair_sums(xs);
    let f = harmonic_factor(xs, beta);

    let (pj, qj) = eta_jets(&b, p.r);
    let eta = separable(pj, &qj);
    let (phi, lap_phi, lap_phi_scale) = phi_fields(&b, &sums, p);

    // (d_1 eta - d_2 eta) / (x_1 - x_2) = P'(t) Q / (2t); P' vanishes near 0.
    let p_slope_over_gap = if b.t == 0.0 { 0.0 } else { pj.d1 * qj.iter().map(|j| j.v).product::<f64>() / (2.0 * b.t) };
    let mut bracket = (2.0 - beta) * p_slope_over_gap;
    for k in 0..n {
        bracket += (2.0 - beta) * sums.regular[k] * eta.grad[k] + eta.hess[k];
    }
    let lap_u = f * bracket;
    let u = f * eta.value;

    if b.t == 0.0 {
        let nan = f64::NAN;
        return Ok(CounterexampleBundle {
            x: xs.to_vec(),
            u,
            grad_u: vec![nan; n],
            grad_u_sq: nan,
            lap_u,
            lap_u_uncancelled: nan,
            lap_u_scale: nan,
            phi,
            lap_phi,
            lap_phi_scale,
            singular: true,
        });
    }

    let inv_gap = 1.0 / (xs[0] - xs[1]);
    let mut grad_u = Vec::with_capacity(n);
    let mut lap_unc = 0.0;
    let mut scale = 0.0;
    for k in 0..n {
        let s_k = sums.regular[k]
            + match k {
                0 => inv_gap,
                1 => -inv_gap,
                _ => 0.0,
            };
        let a = (1.0 - beta) * s_k;
        let da = -(1.0 - beta) * sums.inv_sq[k];
        let drift = beta * s_k;
        let (e, de, dde) = (eta.value, eta.grad[k], eta.hess[k]);
        let du = f * (a * e + de);
        let ddu = f * ((a * a + da) * e + 2.0 * a * de + dde);
        grad_u.push(du);
        lap_unc += ddu + drift * du;
        scale += f.abs()
            * ((a * a).abs() * e.abs()
                + da.abs() * e.abs()
                + 2.0 * (a * de).abs()
                + dde.abs()
                + (drift * a * e).abs()
                + (drift * de).abs());
    }
    let grad_u_sq = grad_u.iter().map(|g| g * g).sum();
    Ok(CounterexampleBundle {
        x: xs.to_vec(),
        u,
        grad_u,
        grad_u_sq,
        lap_u,
        lap_u_uncancelled: lap_unc,
        lap_u_scale: scale,
        phi,
        lap_phi,
        lap_phi_scale,
        singular: false,
    })
}

/// `phi_r`, its weighted Laplacian, and the absolute term sum.
fn phi_fields(b: &BoxCoords, sums: &PairSums, p: &CounterexampleParams) -> (f64, f64, f64) {
    let tj = cosine_cap(b.t, p.r);
    if tj == Jet::ZERO {
        return (0.0, 0.0, 0.0);
    }
    let hj = psi_jets(b);
    let phi = separable(tj, &hj);
    if phi.value == 0.0 && phi.grad.iter().all(|&g| g == 0.0) {
        return (0.0, 0.0, 0.0);
    }
    let psi: f64 = hj.iter().map(|j| j.v).product();
    // beta (d_1 phi - d_2 phi) / (x_1 - x_2) = beta Phi'(t) Psi / (2t).
    let singular_drift = p.beta * 0.5 * cosine_cap_slope_over_t(b.t, p.r) * psi;
    let mut lap = singular_drift;
    let mut scale = singular_drift.abs();
    for k in 0..p.n {
        let drift = p.beta * sums.regular[k] * phi.grad[k];
        lap += phi.hess[k] + drift;
        scale += phi.hess[k].abs() + drift.abs();
    }
    (phi.value, lap, scale)
}

/// `u_r` alone, for difference quotients.
pub fn u_value(x: &[f64], p: &CounterexampleParams) -> f64 {
    let b = BoxCoords::from_x(x);
    if !b.in_box(2.0 * p.r, 2.0) {
        return 0.0;
    }
    let (pj, qj) = eta_jets(&b, p.r);
    harmonic_factor(x, p.beta) * pj.v * qj.iter().map(|j| j.v).product::<f64>()
}

/// `phi_r` alone, for difference quotients.
pub fn phi_value(x: &[f64], p: &CounterexampleParams) -> f64 {
    let b = BoxCoords::from_x(x);
    cosine_cap(b.t, p.r).v * psi_jets(&b).iter().map(|j| j.v).product::<f64>()
}

/// Pointwise upper bound for `|lap_phi|` from the size of each term:
/// `|Phi''|, |Phi'/t| <= k^2`, `|Phi'| <= k`, `Phi <= 2`.
pub fn lap_phi_bound(x: &Configuration, p: &CounterexampleParams) -> Result<f64> {
    check_len(x, p)?;
    let xs = x.coords();
    let b = BoxCoords::from_x(xs);
    let sums = pair_sums(xs);
    let k = super::profiles::cap_frequency(p.r);
    let hj = psi_jets(&b);
    let psi = separable(Jet::ONE, &hj);
    let reg12 = sums.regular[0].abs() + sums.regular[1].abs();
    let mut bound = 0.5 * k * k * (1.0 + p.beta) * psi.value + p.beta * reg12 * 0.5 * k * psi.value;
    // Foot terms, with Phi replaced by its maximum 2.
    let mut foot = psi.hess.iter().skip(2).map(|v| v.abs()).sum::<f64>() + (psi.hess[0] + psi.hess[1]).abs();
    foot += p.beta * reg12 * psi.grad[0].abs();
    foot += (2..p.n).map(|i| p.beta * (sums.regular[i] * psi.grad[i]).abs()).sum::<f64>();
    bound += 2.0 * foot;
    Ok(bound)
}
