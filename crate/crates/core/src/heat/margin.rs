//! Pointwise check of the gradient estimate
//! `|grad T_t f|^2 + (2t/N) (L T_t f)^2 <= T_t |grad f|^2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{assemble_form, default_steps, evolve, DiscreteForm};
use crate::error::{Error, Result};
use crate::geometry::Dimension;

/// Initial data on the line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Datum {
    /// `tanh(t/w)`.
    OddStep { width: f64 },
    /// `(t/w) exp(-(t/w)^2)`.
    OddBump { width: f64 },
    /// `exp(-(t/w)^2)`.
    EvenBump { width: f64 },
    /// `s^2/(1 + s^2)` with `s = t/w`.
    EvenWell { width: f64 },
}

impl Datum {
    pub fn value(self, t: f64) -> f64 {
        match self {
            Datum::OddStep { width } => (t / width).tanh(),
            Datum::OddBump { width } => {
                let s = t / width;
                s * (-s * s).exp()
            }
            Datum::EvenBump { width } => (-(t / width).powi(2)).exp(),
            Datum::EvenWell { width } => {
                let s2 = (t / width).powi(2);
                s2 / (1.0 + s2)
            }
        }
    }

    pub fn is_odd(self) -> bool {
        matches!(self, Datum::OddStep { .. } | Datum::OddBump { .. })
    }

    pub fn tag(self) -> String {
        match self {
            Datum::OddStep { width } => format!("odd-step:{width}"),
            Datum::OddBump { width } => format!("odd-bump:{width}"),
            Datum::EvenBump { width } => format!("even-bump:{width}"),
            Datum::EvenWell { width } => format!("even-well:{width}"),
        }
    }
}

/// The three grid fields of the estimate and their combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeFields {
    /// `|grad T_t f|^2`.
    pub grad_sq: Vec<f64>,
    /// `(2t/N) (L T_t f)^2`.
    pub generator_term: Vec<f64>,
    /// `T_t |grad f|^2`.
    pub rhs: Vec<f64>,
    /// `grad_sq + generator_term - rhs`.
    pub margin: Vec<f64>,
}

pub fn be_fields(form: &DiscreteForm, f0: &[f64], t: f64, dim: Dimension, steps: usize) -> Result<BeFields> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
    }
    let u = evolve(form, f0, t, steps)?;
    let grad_sq: Vec<f64> = form.gradient(&u).iter().map(|g| g * g).collect();
    let factor = 2.0 * t * dim.reciprocal();
    let generator_term: Vec<f64> = form.generator(&u).iter().map(|l| factor * l * l).collect();
    let g0: Vec<f64> = form.gradient(f0).iter().map(|g| g * g).collect();
    let rhs = evolve(form, &g0, t, steps)?;
    let margin = (0..form.len()).map(|i| grad_sq[i] + generator_term[i] - rhs[i]).collect();
    Ok(BeFields { grad_sq, generator_term, rhs, margin })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BEMargin {
    pub beta: f64,
    pub dim: Dimension,
    pub time: f64,
    pub datum: String,
    /// Maximum over nodes of the margin field.
    pub margin: f64,
    pub argmax: usize,
    pub argmax_t: f64,
    pub cells: usize,
    pub h_min: f64,
    pub h_max: f64,
}

fn summarize(form: &DiscreteForm, fields: &BeFields, t: f64, dim: Dimension, datum: String) -> BEMargin {
    let (argmax, margin) =
        fields.margin.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    BEMargin {
        beta: form.beta,
        dim,
        time: t,
        datum,
        margin,
        argmax,
        argmax_t: form.nodes[argmax],
        cells: form.len(),
        h_min: form.h_min(),
        h_max: form.h_max(),
    }
}

/// Maximum violation of the estimate for nodal data `f0` on one grid.
pub fn be_margin(form: &DiscreteForm, f0: &[f64], t: f64, dim: Dimension) -> Result<BEMargin> {
    let fields = be_fields(form, f0, t, dim, default_steps(form.len()))?;
    Ok(summarize(form, &fields, t, dim, "nodal".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    /// The positive part of the margin does not grow under refinement.
    Vanishing,
    /// The margin is positive and at least doubles under refinement.
    Growing,
    Inconclusive,
}

/// Margins on a grid and its nested refinement, with the discretization
/// error estimate taken from the pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeCheck {
    pub datum: String,
    pub coarse: BEMargin,
    pub fine: BEMargin,
    /// Largest change of the three fields under refinement over resolved
    /// cells, plus `floor`.
    pub error_estimate: f64,
    /// Roundoff floor `1e-12 max |grad f|^2`.
    pub floor: f64,
    /// `coarse.margin <= 5 error_estimate`.
    pub holds: bool,
    /// `fine.margin / coarse.margin`.
    pub growth: f64,
    pub trend: Trend,
}

/// Multiple of the error estimate tolerated before a margin counts as a violation.
pub const HOLD_FACTOR: f64 = 5.0;

/// A cell is resolved when its width is at most this fraction of its
/// distance to 0.
pub const RESOLVED_FRACTION: f64 = 0.25;

pub fn be_check(beta: f64, half_length: f64, m: usize, datum: Datum, t: f64, dim: Dimension) -> Result<BeCheck> {
    let coarse_form = assemble_form(beta, half_length, m)?;
    let fine_form = assemble_form(beta, half_length, 2 * m)?;
    let f_c = coarse_form.sample(|s| datum.value(s));
    let f_f = fine_form.sample(|s| datum.value(s));
    let (fc, ff) = rayon::join(
        || be_fields(&coarse_form, &f_c, t, dim, default_steps(m)),
        || be_fields(&fine_form, &f_f, t, dim, default_steps(2 * m)),
    );
    let (fc, ff) = (fc?, ff?);
    let floor = 1e-12 * coarse_form.gradient(&f_c).iter().map(|g| g * g).fold(0.0, f64::max);
    let restricted = [coarse_form.restrict(&ff.grad_sq), coarse_form.restrict(&ff.generator_term), coarse_form.restrict(&ff.rhs)];
    let coarse_fields = [&fc.grad_sq, &fc.generator_term, &fc.rhs];
    let mut change: f64 = 0.0;
    for i in 0..m {
        let t_i = coarse_form.nodes[i].abs();
        if coarse_form.cell_width(i) > RESOLVED_FRACTION * t_i {
            continue;
        }
        let d: f64 = (0..3).map(|k| (coarse_fields[k][i] - restricted[k][i]).abs()).sum();
        change = change.max(d);
    }
    let error_estimate = change + floor;
    let coarse = summarize(&coarse_form, &fc, t, dim, datum.tag());
    let fine = summarize(&fine_form, &ff, t, dim, datum.tag());
    let growth = fine.margin / coarse.margin;
    let trend = if fine.margin.max(0.0) <= coarse.margin.max(0.0) + floor {
        Trend::Vanishing
    } else if coarse.margin > 0.0 && fine.margin >= 2.0 * coarse.margin {
        Trend::Growing
    } else {
        Trend::Inconclusive
    };
    Ok(BeCheck {
        datum: datum.tag(),
        holds: coarse.margin <= HOLD_FACTOR * error_estimate,
        coarse,
        fine,
        error_estimate,
        floor,
        growth,
        trend,
    })
}

/// Smoothed odd steps of three widths.
pub fn default_candidates() -> Vec<Datum> {
    [0.05, 0.1, 0.2].iter().map(|&width| Datum::OddStep { width }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: BeCheck,
    pub all: Vec<BeCheck>,
}

/// The candidate with the largest coarse-grid margin.
pub fn counterexample_search(beta: f64, half_length: f64, m: usize, t: f64, dim: Dimension, candidates: &[Datum]) -> Result<SearchResult> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("candidate family is empty".into()));
    }
    let all: Vec<Result<BeCheck>> = candidates.par_iter().map(|&d| be_check(beta, half_length, m, d, t, dim)).collect();
    let all: Vec<BeCheck> = all.into_iter().collect::<Result<_>>()?;
    let best = all
        .iter()
        .fold(None::<&BeCheck>, |acc, c| match acc {
            Some(b) if b.coarse.margin >= c.coarse.margin => Some(b),
            _ => Some(c),
        })
        .cloned()
        .expect("nonempty");
    Ok(SearchResult { best, all })
}
