//! Geometry of the Dyson space `(R^n, |.|, w_beta)` with
//! `w_beta(x) = prod_{i<j} |x_i - x_j|^beta`.
//!
//! The singular set is the union of the hyperplanes `{x_i = x_j}`. Its
//! complement splits into `n!` sectors, one per strict ordering of the
//! coordinates.

use std::f64::consts::SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaps below this are treated as lying on the singular set.
pub const SINGULAR_GUARD: f64 = 1e-300;

/// Dimension bound `N` of the curvature-dimension condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Dimension {
    Finite(f64),
    Infinite,
}

impl Dimension {
    /// `1/(N - n)`, with `N = inf` mapped to 0.
    pub fn inverse_excess(self, n: usize) -> f64 {
        match self {
            Dimension::Finite(dim) => 1.0 / (dim - n as f64),
            Dimension::Infinite => 0.0,
        }
    }

    /// `1/N`, with `N = inf` mapped to 0.
    pub fn reciprocal(self) -> f64 {
        match self {
            Dimension::Finite(dim) => 1.0 / dim,
            Dimension::Infinite => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Dimension::Infinite)
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dimension::Finite(dim) => write!(f, "{dim}"),
            Dimension::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(Dimension::Infinite);
        }
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Dimension::Finite)
            .ok_or_else(|| Error::InvalidParameter(format!("dimension bound `{s}` is not a number or `inf`")))
    }
}

/// Particle count, inverse temperature and dimension bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub beta: f64,
    pub dim: Dimension,
}

impl ModelParams {
    pub fn new(n: usize, beta: f64, dim: Dimension) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("particle count must be at least 1".into()));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        if let Dimension::Finite(d) = dim {
            if !(d > n as f64) {
                return Err(Error::InvalidParameter(format!(
                    "finite dimension bound must exceed n = {n}, got {d}"
                )));
            }
        }
        Ok(Self { n, beta, dim })
    }

    /// Number of unordered pairs `n(n-1)/2`.
    pub fn pair_count(&self) -> usize {
        self.n * (self.n - 1) / 2
    }
}

/// A point of `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration(Vec<f64>);

impl Configuration {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("configuration must have at least one coordinate".into()));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite coordinate {bad}")));
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `(i, j, |x_i - x_j|)` for the closest pair, first in lexicographic
    /// pair order on ties. `None` when `n < 2`.
    pub fn closest_pair(&self) -> Option<(usize, usize, f64)> {
        let x = &self.0;
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                let gap = (x[i] - x[j]).abs();
                if best.is_none_or(|(_, _, g)| gap < g) {
                    best = Some((i, j, gap));
                }
            }
        }
        best
    }

    /// Whether some gap is below `guard`.
    pub fn is_singular(&self, guard: f64) -> bool {
        self.closest_pair().is_some_and(|(_, _, g)| g < guard)
    }

    /// Applies `sigma` to the coordinates: `y_i = x_{sigma(i)}`.
    pub fn permuted(&self, sigma: &[usize]) -> Self {
        Self(sigma.iter().map(|&k| self.0[k]).collect())
    }
}

impl From<Configuration> for Vec<f64> {
    fn from(c: Configuration) -> Self {
        c.0
    }
}

/// `prod_{i<j} |x_i - x_j|^beta`. Zero exactly on the singular set.
pub fn weight(x: &Configuration, beta: f64) -> f64 {
    let x = x.coords();
    let mut w = 1.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            w *= (x[i] - x[j]).abs().powf(beta);
        }
    }
    w
}

/// Gradient of `log w_beta`: component `i` is `beta * sum_{j != i} 1/(x_i - x_j)`.
pub fn grad_log_weight(x: &Configuration, beta: f64) -> Result<Vec<f64>> {
    grad_log_weight_guarded(x, beta, SINGULAR_GUARD)
}

pub fn grad_log_weight_guarded(x: &Configuration, beta: f64, guard: f64) -> Result<Vec<f64>> {
    let c = x.coords();
    let n = c.len();
    let mut grad = vec![0.0; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = c[i] - c[j];
            if d.abs() < guard {
                return Err(Error::OnSingularSet { i, j, gap: d.abs() });
            }
            let term = beta / d;
            grad[i] += term;
            grad[j] -= term;
        }
    }
    Ok(grad)
}

/// Distance from `x` to the singular set, `min_{i<j} |x_i - x_j| / sqrt(2)`.
pub fn distance_to_singular_set(x: &Configuration) -> f64 {
    x.closest_pair().map_or(f64::INFINITY, |(_, _, g)| g / SQRT_2)
}

/// Local coordinates near the hyperplane `{x_i = x_j}` of the closest pair:
/// `x = foot + (t / sqrt 2)(e_i - e_j)`, so `|t|` is the distance to the
/// hyperplane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularChart {
    pub pair: (usize, usize),
    pub t: f64,
    pub foot: Vec<f64>,
    /// Another pair attains the same minimal gap.
    pub tie: bool,
}

impl SingularChart {
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut x = self.foot.clone();
        let (i, j) = self.pair;
        x[i] += self.t / SQRT_2;
        x[j] -= self.t / SQRT_2;
        x
    }

    pub fn distance(&self) -> f64 {
        self.t.abs()
    }
}

/// Chart around the nearest diagonal hyperplane. On the singular set this
/// returns `t = 0` with the achieving pair.
pub fn singular_chart(x: &Configuration) -> Result<SingularChart> {
    let (i, j, gap) = x
        .closest_pair()
        .ok_or_else(|| Error::InvalidParameter("singular chart needs at least two coordinates".into()))?;
    let c = x.coords();
    let mut ties = 0;
    for a in 0..c.len() {
        for b in a + 1..c.len() {
            if (c[a] - c[b]).abs() == gap {
                ties += 1;
            }
        }
    }
    let t = (c[i] - c[j]) / SQRT_2;
    let mid = 0.5 * (c[i] + c[j]);
    let mut foot = c.to_vec();
    foot[i] = mid;
    foot[j] = mid;
    Ok(SingularChart { pair: (i, j), t, foot, tie: ties > 1 })
}

/// The ordering permutation of `x`: entry `k` is the index of the `k`-th
/// smallest coordinate (0-based). Constant on each sector.
pub fn sector_of(x: &Configuration) -> Result<Vec<usize>> {
    if let Some((i, j, gap)) = x.closest_pair() {
        if gap < SINGULAR_GUARD {
            return Err(Error::OnSingularSet { i, j, gap });
        }
    }
    let c = x.coords();
    let mut order: Vec<usize> = (0..c.len()).collect();
    order.sort_by(|&a, &b| c[a].total_cmp(&c[b]));
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(v: &[f64]) -> Configuration {
        Configuration::new(v.to_vec()).unwrap()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight(&cfg(&[1.0, 0.0]), 2.0), 1.0);
        assert_eq!(weight(&cfg(&[0.0, 1.0, 3.0]), 1.0), 6.0);
        assert_eq!(weight(&cfg(&[0.7, 0.7, 3.0]), 0.4), 0.0);
    }

    #[test]
    fn grad_log_weight_pair() {
        let g = grad_log_weight(&cfg(&[1.0, 0.0]), 2.0).unwrap();
        assert_eq!(g, vec![2.0, -2.0]);
    }

    #[test]
    fn grad_log_weight_rejects_diagonal() {
        let err = grad_log_weight(&cfg(&[1.0, 2.0, 1.0]), 1.0).unwrap_err();
        assert!(matches!(err, Error::OnSingularSet { i: 0, j: 2, .. }));
    }

    #[test]
    fn grad_log_weight_matches_central_differences() {
        let x = cfg(&[-0.3, 1.1, 0.45, 2.7]);
        let beta = 0.7;
        let g = grad_log_weight(&x, beta).unwrap();
        for k in 0..x.len() {
            // step sweep, keep the best agreement
            let best = [1e-3, 1e-4, 1e-5, 1e-6]
                .iter()
                .map(|&h| {
                    let mut p = x.coords().to_vec();
                    let mut m = p.clone();
                    p[k] += h;
                    m[k] -= h;
                    let fd = (weight(&cfg(&p), beta).ln() - weight(&cfg(&m), beta).ln()) / (2.0 * h);
                    ((fd - g[k]) / g[k]).abs()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best <= 1e-6, "component {k}: rel err {best}");
        }
    }

    #[test]
    fn chart_examples() {
        let ch = singular_chart(&cfg(&[1.0, 0.0, 5.0])).unwrap();
        assert_eq!(ch.pair, (0, 1));
        assert!((ch.t.abs() - 1.0 / SQRT_2).abs() < 1e-15);
        assert!(!ch.tie);

        let ch = singular_chart(&cfg(&[2.5, 2.5, 5.0])).unwrap();
        assert_eq!(ch.t, 0.0);
        assert_eq!(ch.pair, (0, 1));
    }

    #[test]
    fn chart_flags_ties() {
        let ch = singular_chart(&cfg(&[0.0, 1.0, 2.0])).unwrap();
        assert_eq!(ch.pair, (0, 1));
        assert!(ch.tie);
    }

    #[test]
    fn sector_examples() {
        assert_eq!(sector_of(&cfg(&[3.0, 1.0, 2.0])).unwrap(), vec![1, 2, 0]);
        assert_eq!(sector_of(&cfg(&[-1.0, 0.0, 4.0])).unwrap(), vec![0, 1, 2]);
        assert!(sector_of(&cfg(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn sectors_compose_over_all_of_s3() {
        let x = cfg(&[0.3, -1.2, 2.0]);
        let base = sector_of(&x).unwrap();
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for sigma in perms {
            let y = x.permuted(&sigma);
            let mut inv = [0usize; 3];
            for (i, &s) in sigma.iter().enumerate() {
                inv[s] = i;
            }
            let expected: Vec<usize> = base.iter().map(|&k| inv[k]).collect();
            assert_eq!(sector_of(&y).unwrap(), expected, "sigma = {sigma:?}");
        }
    }

    #[test]
    fn dimension_parsing() {
        assert_eq!("inf".parse::<Dimension>().unwrap(), Dimension::Infinite);
        assert_eq!("4.5".parse::<Dimension>().unwrap(), Dimension::Finite(4.5));
        assert!("abc".parse::<Dimension>().is_err());
        assert_eq!(Dimension::Infinite.inverse_excess(3), 0.0);
    }

    #[test]
    fn model_params_validation() {
        assert!(ModelParams::new(3, 1.0, Dimension::Finite(3.0)).is_err());
        assert!(ModelParams::new(3, -1.0, Dimension::Infinite).is_err());
        assert!(ModelParams::new(0, 1.0, Dimension::Infinite).is_err());
        assert!(ModelParams::new(3, 1.0, Dimension::Finite(6.0)).is_ok());
    }
}
