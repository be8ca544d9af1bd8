//! Integrals over the counterexample boxes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fields::{eval_counterexample, separable, BoxCoords};
use super::profiles::{bump, Jet};
use super::CounterexampleParams;
use crate::error::{Error, Result};
use crate::geometry::{weight, Configuration};
use crate::quadrature::{gauss_jacobi_rule, gauss_legendre, integrate_graded, QuadratureRule};

/// Resolution of the product rules used by [`wb_sides`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss-Jacobi order on each half of the `t` support.
    pub t_order: usize,
    /// Gauss-Legendre order per panel in each foot coordinate.
    pub h_order: usize,
    /// Panels per foot coordinate.
    pub h_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { t_order: 24, h_order: 12, h_panels: 2 }
    }
}

impl QuadratureSpec {
    fn refined(self) -> Self {
        Self { t_order: self.t_order + 8, h_order: self.h_order, h_panels: self.h_panels + 1 }
    }
}

/// Both sides of the weak Bochner inequality for one `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WbSides {
    pub r: f64,
    pub k: f64,
    pub lhs: f64,
    pub lhs_err: f64,
    pub rhs: f64,
    pub rhs_err: f64,
    /// An error estimate exceeds 1% of its value.
    pub inconclusive: bool,
}

impl WbSides {
    /// `lhs < rhs`, which violates the inequality.
    pub fn violated(&self) -> bool {
        self.lhs < self.rhs
    }
}

fn composite_legendre(order: usize, panels: usize, lo: f64, hi: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut nodes = Vec::with_capacity(order * panels);
    let mut weights = Vec::with_capacity(order * panels);
    let width = (hi - lo) / panels as f64;
    for p in 0..panels {
        let a = lo + p as f64 * width;
        let rule = gauss_legendre(order, a, a + width)?;
        nodes.extend_from_slice(&rule.nodes);
        weights.extend_from_slice(&rule.weights);
    }
    Ok((nodes, weights))
}

/// Tensor grid over `dim` coordinates from a shared 1-D rule.
fn tensor_points(nodes: &[f64], weights: &[f64], dim: usize) -> Vec<(Vec<f64>, f64)> {
    let m = nodes.len();
    let total = m.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            let mut pt = Vec::with_capacity(dim);
            let mut w = 1.0;
            for _ in 0..dim {
                let i = idx % m;
                idx /= m;
                pt.push(nodes[i]);
                w *= weights[i];
            }
            (pt, w)
        })
        .collect()
}

/// `(int 1/2 |grad u|^2 lap_phi w dx, int |grad u|^2 phi w dx)` over the
/// support of `phi`, integrated in box coordinates (`dx = 2 dt dh`).
fn raw_sides(p: &CounterexampleParams, q: QuadratureSpec) -> Result<(f64, f64)> {
    let edge = 2.0 * p.r / 3.0;
    let right = gauss_jacobi_rule(q.t_order, -p.beta, 0.0, edge)?;
    let left: QuadratureRule = right.rescaled(0.0, -edge);
    let (hn, hw) = composite_legendre(q.h_order, q.h_panels, -1.0, 1.0)?;
    let feet = tensor_points(&hn, &hw, p.n - 1);
    let t_nodes: Vec<(f64, f64)> =
        right.nodes.iter().zip(&right.weights).chain(left.nodes.iter().zip(&left.weights)).map(|(&t, &w)| (t, w)).collect();
    let beta = p.beta;
    let parts: Vec<Result<(f64, f64)>> = feet
        .par_iter()
        .map(|(h, wh)| {
            let mut lhs = 0.0;
            let mut mass = 0.0;
            for &(t, wt) in &t_nodes {
                let b = BoxCoords { t, c: h[0], y: h[1..].to_vec() };
                let x = Configuration::new(b.to_x())?;
                let e = eval_counterexample(&x, p)?;
                // Jacobi weight |t|^{-beta} is in wt; restore the smooth part.
                let gw = e.grad_u_sq * weight(&x, beta) * t.abs().powf(beta);
                lhs += wt * 0.5 * gw * e.lap_phi;
                mass += wt * gw * e.phi;
            }
            Ok((2.0 * wh * lhs, 2.0 * wh * mass))
        })
        .collect();
    let mut lhs = 0.0;
    let mut mass = 0.0;
    for part in parts {
        let (a, b) = part?;
        lhs += a;
        mass += b;
    }
    Ok((lhs, mass))
}

/// Left side `1/2 int |grad u_r|^2 lap_phi_r w` and right side
/// `int [<grad lap u_r, grad u_r> + K |grad u_r|^2] phi_r w`. On the support
/// of `phi_r` the first right-hand term vanishes because `lap u_r = 0` there.
pub fn wb_sides(p: &CounterexampleParams, q: QuadratureSpec) -> Result<WbSides> {
    let (l0, m0) = raw_sides(p, q)?;
    let (l1, m1) = raw_sides(p, q.refined())?;
    let lhs_err = (l1 - l0).abs();
    let rhs = p.k * m1;
    let rhs_err = (p.k * (m1 - m0)).abs();
    let inconclusive = lhs_err > 0.01 * l1.abs() || rhs_err > 0.01 * rhs.abs();
    Ok(WbSides { r: p.r, k: p.k, lhs: l1, lhs_err, rhs, rhs_err, inconclusive })
}

/// The coefficient of `r^{-1-beta}` in the left side up to a positive factor:
/// `-int_{-pi}^{pi} [cos s + beta sin(s)/s] |s|^{-beta} ds`.
pub fn leading_constant(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!("beta must lie in (0, 1), got {beta}")));
    }
    let g = |s: f64| {
        let sinc = if s.abs() < 1e-4 { 1.0 - s * s / 6.0 } else { s.sin() / s };
        s.cos() + beta * sinc
    };
    let half = integrate_graded(g, -beta, 0.0, std::f64::consts::PI, 1e-13)?;
    Ok(-2.0 * half.value)
}

/// Smooth bump in box coordinates: mollifiers in `t`, `c` and each `y_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestBump {
    pub t0: f64,
    pub t_radius: f64,
    pub c0: f64,
    pub c_radius: f64,
    pub y0: f64,
    pub y_radius: f64,
}

impl TestBump {
    fn jets(&self, b: &BoxCoords) -> (Jet, Vec<Jet>) {
        let mut h = vec![bump(b.c, self.c0, self.c_radius)];
        h.extend(b.y.iter().map(|&v| bump(v, self.y0, self.y_radius)));
        (bump(b.t, self.t0, self.t_radius), h)
    }

    /// Whether the support meets `{x_1 = x_2}`.
    pub fn crosses_singular_set(&self) -> bool {
        self.t0.abs() < self.t_radius
    }

    /// A standard family of five bumps for a given `r`: three off the
    /// hyperplane and two across it, placed on the transition layers of the
    /// cut-off.
    pub fn family(r: f64) -> Vec<TestBump> {
        vec![
            TestBump { t0: 1.5 * r, t_radius: r, c0: 0.2, c_radius: 0.8, y0: 0.1, y_radius: 0.8 },
            TestBump { t0: -1.4 * r, t_radius: r, c0: 1.35, c_radius: 0.6, y0: 1.2, y_radius: 0.6 },
            TestBump { t0: 0.5 * r, t_radius: 0.4 * r, c0: -1.3, c_radius: 0.5, y0: -1.6, y_radius: 0.5 },
            TestBump { t0: 0.3 * r, t_radius: 3.0 * r, c0: 1.6, c_radius: 0.5, y0: 0.3, y_radius: 0.8 },
            TestBump { t0: -0.2 * r, t_radius: 2.5 * r, c0: 0.1, c_radius: 0.7, y0: -1.4, y_radius: 0.5 },
        ]
    }
}

/// Both sides of `int <grad u, grad psi> w = -int (lap u) psi w` for one bump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakLaplacianEntry {
    pub bump: TestBump,
    pub energy_side: f64,
    pub laplacian_side: f64,
    /// Sum of the two sides' quadrature error estimates.
    pub error: f64,
}

impl WeakLaplacianEntry {
    pub fn agrees(&self) -> bool {
        (self.energy_side - self.laplacian_side).abs() <= self.error.max(1e-13 * self.energy_side.abs())
    }
}

fn weak_sides(p: &CounterexampleParams, bump: &TestBump, order: usize, panels: usize) -> Result<(f64, f64)> {
    // t-panels split at 0 so no node lands on the hyperplane.
    let (tlo, thi) = (bump.t0 - bump.t_radius, bump.t0 + bump.t_radius);
    let (mut tn, mut tw) = if tlo < 0.0 && thi > 0.0 {
        let left_share = ((-tlo) / (thi - tlo) * panels as f64).round().max(1.0) as usize;
        let (mut a, mut wa) = composite_legendre(order, left_share, tlo, 0.0)?;
        let (b, wb) = composite_legendre(order, panels.saturating_sub(left_share).max(1), 0.0, thi)?;
        a.extend(b);
        wa.extend(wb);
        (a, wa)
    } else {
        composite_legendre(order, panels, tlo, thi)?
    };
    let (cn, cw) = composite_legendre(order, panels, bump.c0 - bump.c_radius, bump.c0 + bump.c_radius)?;
    let (yn, yw) = composite_legendre(order, (panels / 2).max(1), bump.y0 - bump.y_radius, bump.y0 + bump.y_radius)?;
    let ydim = p.n - 2;
    let ys = tensor_points(&yn, &yw, ydim);
    let beta = p.beta;

    let mut cells = Vec::with_capacity(tn.len() * cn.len());
    for (i, &t) in tn.iter().enumerate() {
        for (j, &c) in cn.iter().enumerate() {
            cells.push((t, c, tw[i] * cw[j]));
        }
    }
    tn.clear();
    tw.clear();
    let parts: Vec<Result<(f64, f64)>> = cells
        .par_iter()
        .map(|&(t, c, wtc)| {
            let mut energy = 0.0;
            let mut lap = 0.0;
            for (y, wy) in &ys {
                let b = BoxCoords { t, c, y: y.clone() };
                let (tj, hj) = bump.jets(&b);
                let psi = separable(tj, &hj);
                if psi.value == 0.0 && psi.grad.iter().all(|&g| g == 0.0) {
                    continue;
                }
                let x = Configuration::new(b.to_x())?;
                let e = eval_counterexample(&x, p)?;
                let w = weight(&x, beta);
                let dot: f64 = e.grad_u.iter().zip(&psi.grad).map(|(a, b)| a * b).sum();
                energy += wy * dot * w;
                lap += wy * (-e.lap_u * psi.value * w);
            }
            Ok((2.0 * wtc * energy, 2.0 * wtc * lap))
        })
        .collect();
    let mut energy = 0.0;
    let mut lap = 0.0;
    for part in parts {
        let (a, b) = part?;
        energy += a;
        lap += b;
    }
    Ok((energy, lap))
}

/// Weak-Laplacian consistency of `lap_u` against each test bump.
pub fn weak_laplacian_check(p: &CounterexampleParams, bumps: &[TestBump], order: usize, panels: usize) -> Result<Vec<WeakLaplacianEntry>> {
    bumps
        .iter()
        .map(|bump| {
            let (e0, l0) = weak_sides(p, bump, order, panels)?;
            let (e1, l1) = weak_sides(p, bump, order, 2 * panels)?;
            Ok(WeakLaplacianEntry {
                bump: bump.clone(),
                energy_side: e1,
                laplacian_side: l1,
                error: (e1 - e0).abs() + (l1 - l0).abs(),
            })
        })
        .collect()
}
