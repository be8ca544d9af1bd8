//! The `n = 2` Dyson space reduced to the line: weight `|t|^beta` on
//! `[-L, L]`, Dirichlet form `E(f) = 1/2 int f'^2 |t|^beta dt`, generator
//! `L f = |t|^{-beta} (|t|^beta f')'` with Neumann ends.
//!
//! Finite volumes on a grid symmetric about 0: the nodes are `+-p_k` for
//! grid points `0 < p_1 < ... < p_M = L` of the half-line, so no node sits
//! on the singular point and the ends carry nodes. Node `p_k` owns the dual
//! cell between the midpoints to its neighbours (from 0 for `p_1`, up to `L`
//! for `p_M`). Cell masses integrate `|t|^beta` exactly and the flux between
//! neighbouring nodes is `1 / int |s|^{-beta} ds` over the segment joining
//! them. That integral diverges across 0 exactly when `beta >= 1`, which
//! disconnects the two half-lines.

mod margin;

use serde::{Deserialize, Serialize};

pub use margin::{
    be_check, be_fields, be_margin, counterexample_search, default_candidates, BEMargin, BeCheck, BeFields, Datum, SearchResult, Trend, HOLD_FACTOR,
    RESOLVED_FRACTION,
};

use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;

/// How grid points accumulate toward 0 on each half-line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Grading {
    /// `p_k = L (2k - 1)/(2M - 1)`: equal spacing including the segment
    /// across 0.
    Uniform,
    /// `p_k = L (k/M)^q`.
    Algebraic(f64),
    /// `p_k = L (e^{a k/M} - 1)/(e^a - 1)`.
    Exponential(f64),
}

impl Grading {
    fn point(self, k: usize, half: usize) -> f64 {
        let s = k as f64 / half as f64;
        match self {
            Grading::Uniform => (2 * k - 1) as f64 / (2 * half - 1) as f64,
            Grading::Algebraic(q) => s.powf(q),
            Grading::Exponential(a) => (a * s).exp_m1() / a.exp_m1(),
        }
    }

    /// Whether the points for `2M` contain those for `M`.
    pub fn nests(self) -> bool {
        !matches!(self, Grading::Uniform)
    }
}

/// Default grading. Refining `m -> 2m` nests the grids and divides the
/// innermost point by 4.
pub const DEFAULT_GRADING: Grading = Grading::Algebraic(2.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteForm {
    pub beta: f64,
    pub half_length: f64,
    pub grading: Grading,
    /// Points `p_1 < ... < p_M = L` of the right half-line.
    pub points: Vec<f64>,
    /// `-p_M, ..., -p_1, p_1, ..., p_M`.
    pub nodes: Vec<f64>,
    /// Dual cell boundaries `0 = b_0 < b_1 < ... < b_M = L` of the right half.
    pub cell_faces: Vec<f64>,
    /// `int_cell |t|^beta dt`.
    pub mass: Vec<f64>,
    /// Flux coefficient between node `i` and `i + 1`.
    pub flux: Vec<f64>,
}

/// `b^p - a^p` for `0 < a <= b` without cancellation.
fn power_difference(a: f64, b: f64, p: f64) -> f64 {
    if a == 0.0 {
        return b.powf(p);
    }
    a.powf(p) * (p * ((b - a) / a).ln_1p()).exp_m1()
}

/// `int_a^b |s|^{-beta} ds` for `0 <= a < b` (same side of 0).
fn inverse_weight_integral(a: f64, b: f64, beta: f64) -> f64 {
    if beta == 1.0 {
        if a == 0.0 {
            return f64::INFINITY;
        }
        return ((b - a) / a).ln_1p();
    }
    if a == 0.0 && beta > 1.0 {
        return f64::INFINITY;
    }
    power_difference(a, b, 1.0 - beta) / (1.0 - beta)
}

impl DiscreteForm {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Width of the dual cell of node `i`.
    pub fn cell_width(&self, i: usize) -> f64 {
        let m = self.points.len();
        let k = if i < m { m - 1 - i } else { i - m };
        self.cell_faces[k + 1] - self.cell_faces[k]
    }

    /// Distance from 0 to the innermost node.
    pub fn h_min(&self) -> f64 {
        self.points[0]
    }

    pub fn h_max(&self) -> f64 {
        self.points.windows(2).map(|w| w[1] - w[0]).fold(2.0 * self.points[0], f64::max)
    }

    /// Whether the two half-lines are coupled.
    pub fn connected(&self) -> bool {
        self.flux[self.len() / 2 - 1] > 0.0
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Samples `f` at the nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&t| f(t)).collect()
    }

    /// `sum_faces kappa (u_{i+1} - u_i)^2`, the discrete `int u'^2 |t|^beta`.
    pub fn dirichlet_integral(&self, u: &[f64]) -> f64 {
        self.flux.iter().enumerate().map(|(i, k)| k * (u[i + 1] - u[i]).powi(2)).sum()
    }

    /// `E(u) = 1/2 int u'^2 |t|^beta`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        0.5 * self.dirichlet_integral(u)
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.mass.iter().zip(u).zip(v).map(|((m, a), b)| m * a * b).sum()
    }

    pub fn weighted_mean(&self, u: &[f64]) -> f64 {
        self.inner(u, &vec![1.0; u.len()]) / self.total_mass()
    }

    /// `A u` for the stiffness matrix `A` (`u^T A u = dirichlet_integral`).
    pub fn stiffness_apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for (i, k) in self.flux.iter().enumerate() {
            let q = k * (u[i + 1] - u[i]);
            out[i] -= q;
            out[i + 1] += q;
        }
        out
    }

    /// Discrete generator `-M^{-1} A u`.
    pub fn generator(&self, u: &[f64]) -> Vec<f64> {
        self.stiffness_apply(u).iter().zip(&self.mass).map(|(a, m)| -a / m).collect()
    }

    /// Node gradient: the distance-weighted mean of the two neighbouring
    /// difference quotients (second order on smooth grids). A disconnected
    /// neighbour is replaced by the mirror image of the node in 0, which
    /// contributes a zero quotient; at the Neumann ends the gradient is 0.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mid = n / 2;
        (0..n)
            .map(|i| {
                let t = self.nodes[i];
                let left = if i > 0 && self.flux[i - 1] > 0.0 {
                    (t - self.nodes[i - 1], (u[i] - u[i - 1]) / (t - self.nodes[i - 1]))
                } else {
                    let face = if i == 0 { -self.half_length } else { 0.0 };
                    debug_assert!(i == 0 || i == mid);
                    (2.0 * (t - face), 0.0)
                };
                let right = if i + 1 < n && self.flux[i] > 0.0 {
                    (self.nodes[i + 1] - t, (u[i + 1] - u[i]) / (self.nodes[i + 1] - t))
                } else {
                    let face = if i + 1 == n { self.half_length } else { 0.0 };
                    (2.0 * (face - t), 0.0)
                };
                (right.0 * left.1 + left.0 * right.1) / (left.0 + right.0)
            })
            .collect()
    }

    /// Values of a twice-finer nested grid at the nodes of this one.
    pub fn restrict(&self, fine: &[f64]) -> Vec<f64> {
        assert!(self.grading.nests() && fine.len() == 2 * self.len(), "restriction needs a nested grid of twice the size");
        let m = self.points.len();
        let mut out = vec![0.0; 2 * m];
        for k in 1..=m {
            out[m - k] = fine[2 * m - 2 * k];
            out[m + k - 1] = fine[2 * m + 2 * k - 1];
        }
        out
    }
}

/// Form on `m` nodes (`m` even, `>= 64`) with the default grading.
pub fn assemble_form(beta: f64, half_length: f64, m: usize) -> Result<DiscreteForm> {
    assemble_form_with(beta, half_length, m, DEFAULT_GRADING)
}

pub fn assemble_form_with(beta: f64, half_length: f64, m: usize, grading: Grading) -> Result<DiscreteForm> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta must be nonnegative, got {beta}")));
    }
    if !(half_length > 0.0 && half_length.is_finite()) {
        return Err(Error::InvalidParameter(format!("half-length must be positive, got {half_length}")));
    }
    if m < 64 || !m.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("grid needs an even number of nodes >= 64, got {m}")));
    }
    match grading {
        Grading::Algebraic(q) if !(q >= 1.0) => return Err(Error::InvalidParameter(format!("algebraic grading exponent must be >= 1, got {q}"))),
        Grading::Exponential(a) if !(a > 0.0) => return Err(Error::InvalidParameter(format!("exponential grading rate must be positive, got {a}"))),
        _ => {}
    }
    let half = m / 2;
    let points: Vec<f64> = (1..=half).map(|k| if k == half { half_length } else { half_length * grading.point(k, half) }).collect();
    let mut cell_faces = vec![0.0];
    cell_faces.extend(points.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    cell_faces.push(half_length);
    let right_mass: Vec<f64> = cell_faces.windows(2).map(|w| power_difference(w[0], w[1], 1.0 + beta) / (1.0 + beta)).collect();
    let mut nodes: Vec<f64> = points.iter().rev().map(|t| -t).collect();
    nodes.extend_from_slice(&points);
    let mut mass: Vec<f64> = right_mass.iter().rev().copied().collect();
    mass.extend_from_slice(&right_mass);
    let right_flux: Vec<f64> = points.windows(2).map(|w| 1.0 / inverse_weight_integral(w[0], w[1], beta)).collect();
    let centre = {
        let r = inverse_weight_integral(0.0, points[0], beta);
        if r.is_finite() {
            1.0 / (2.0 * r)
        } else {
            0.0
        }
    };
    let mut flux: Vec<f64> = right_flux.iter().rev().copied().collect();
    flux.push(centre);
    flux.extend_from_slice(&right_flux);
    Ok(DiscreteForm { beta, half_length, grading, points, nodes, cell_faces, mass, flux })
}

/// Number of backward-Euler half steps at the start of [`evolve`].
pub const DAMPING_HALF_STEPS: usize = 4;

/// One implicit step `(M + theta dt A) u' = (M - (1 - theta) dt A) u`.
fn theta_step(form: &DiscreteForm, u: &[f64], dt: f64, theta: f64) -> Result<Vec<f64>> {
    let n = form.len();
    let au = form.stiffness_apply(u);
    let rhs: Vec<f64> = (0..n).map(|i| form.mass[i] * u[i] - (1.0 - theta) * dt * au[i]).collect();
    let mut diag = form.mass.clone();
    for (i, k) in form.flux.iter().enumerate() {
        diag[i] += theta * dt * k;
        diag[i + 1] += theta * dt * k;
    }
    let off: Vec<f64> = form.flux.iter().map(|k| -theta * dt * k).collect();
    solve_tridiagonal(&off, &diag, &off, &rhs)
}

/// `T_t f0` by Crank-Nicolson with `steps` steps of size `t/steps`, the
/// first two replaced by four backward-Euler half steps to damp the stiff
/// modes of the graded grid.
pub fn evolve(form: &DiscreteForm, f0: &[f64], t: f64, steps: usize) -> Result<Vec<f64>> {
    if f0.len() != form.len() {
        return Err(Error::InvalidParameter(format!("datum has {} values for {} cells", f0.len(), form.len())));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time must be nonnegative, got {t}")));
    }
    if steps < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 time steps, got {steps}")));
    }
    let mut u = f0.to_vec();
    if t == 0.0 {
        return Ok(u);
    }
    let dt = t / steps as f64;
    for _ in 0..DAMPING_HALF_STEPS {
        u = theta_step(form, &u, 0.5 * dt, 1.0)?;
    }
    for _ in 0..steps.saturating_sub(DAMPING_HALF_STEPS / 2) {
        u = theta_step(form, &u, dt, 0.5)?;
    }
    Ok(u)
}

/// Default step count for a grid of `m` cells.
pub fn default_steps(m: usize) -> usize {
    (m / 4).max(64)
}
