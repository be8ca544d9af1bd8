//! Dyson SDE `dX^i = (beta/2) sum_{j != i} dt/(X^i - X^j) + dB^i` by
//! Euler-Maruyama with gap-adapted steps, and the `n = 2` gap process
//! `dg = (beta/g) dt + sqrt(2) dW` as an independent check.
//!
//! Steps are `dt = min(dt0, c g^2 / beta)` with `g` the current minimum gap.
//! A step that would reorder the particles is not accepted: its Brownian
//! increment is split by the bridge law and the two halves are retried, so
//! the ordering of an accepted path never changes. A path stops at the first
//! accepted state with gap below the threshold, or when the step falls below
//! `min_dt`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::geometry::{sector_of, Configuration};
use crate::stats::{wilson_interval, Z95};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdeOptions {
    pub dt0: f64,
    /// `c` in `dt = min(dt0, c g^2 / beta)`.
    pub gap_factor: f64,
    pub threshold: f64,
    pub min_dt: f64,
    /// Drop the Brownian term (deterministic skeleton).
    pub noise: bool,
}

impl Default for SdeOptions {
    fn default() -> Self {
        Self { dt0: 1e-3, gap_factor: 0.1, threshold: 1e-6, min_dt: 1e-14, noise: true }
    }
}

impl SdeOptions {
    pub fn with_dt0(self, dt0: f64) -> Self {
        Self { dt0, ..self }
    }

    pub fn with_threshold(self, threshold: f64) -> Self {
        Self { threshold, ..self }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.dt0 > 0.0 && self.gap_factor > 0.0 && self.threshold > 0.0 && self.min_dt > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("step options must be positive: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollisionKind {
    Threshold,
    ResolutionLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub x0: Vec<f64>,
    pub beta: f64,
    pub horizon: f64,
    pub min_gap: f64,
    pub collision_time: Option<f64>,
    pub collision_kind: Option<CollisionKind>,
    pub final_config: Vec<f64>,
    pub steps: u64,
    /// Bridge splits of rejected steps.
    pub refinements: u64,
    pub smallest_dt: f64,
}

impl PathSummary {
    pub fn collided(&self) -> bool {
        self.collision_time.is_some()
    }
}

#[derive(Debug, Clone, Copy)]
enum Model {
    /// Particles, ordered by the index permutation fixed at the start.
    Dyson { beta: f64 },
    /// Single gap coordinate.
    Gap { beta: f64 },
}

impl Model {
    fn beta(self) -> f64 {
        match self {
            Model::Dyson { beta } | Model::Gap { beta } => beta,
        }
    }

    fn noise_scale(self) -> f64 {
        match self {
            Model::Dyson { .. } => 1.0,
            Model::Gap { .. } => std::f64::consts::SQRT_2,
        }
    }

    fn drift(self, x: &[f64], out: &mut [f64]) {
        match self {
            Model::Dyson { beta } => {
                out.iter_mut().for_each(|v| *v = 0.0);
                for i in 0..x.len() {
                    for j in i + 1..x.len() {
                        let f = 0.5 * beta / (x[i] - x[j]);
                        out[i] += f;
                        out[j] -= f;
                    }
                }
            }
            Model::Gap { beta } => out[0] = beta / x[0],
        }
    }

    /// Smallest consecutive difference along `order`; negative once the
    /// ordering is violated.
    fn gap(self, x: &[f64], order: &[usize]) -> f64 {
        match self {
            Model::Dyson { .. } => order.windows(2).map(|w| x[w[1]] - x[w[0]]).fold(f64::INFINITY, f64::min),
            Model::Gap { .. } => x[0],
        }
    }
}

/// Stream `index` of the generator seeded by `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Unit-spaced start centred at 0, `(-0.5, 0.5)` for `n = 2`.
pub fn default_start(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 - 0.5 * (n as f64 - 1.0)).collect()
}

fn normals(rng: &mut ChaCha8Rng, out: &mut [f64], scale: f64) {
    for v in out.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v = scale * z;
    }
}

fn run(model: Model, x0: &[f64], order: &[usize], horizon: f64, opts: &SdeOptions, rng: &mut ChaCha8Rng) -> PathSummary {
    let dim = x0.len();
    let beta = model.beta();
    let sigma = model.noise_scale();
    let mut x = x0.to_vec();
    let mut t = 0.0;
    let mut gap = model.gap(&x, order);
    let mut summary = PathSummary {
        x0: x0.to_vec(),
        beta,
        horizon,
        min_gap: gap,
        collision_time: None,
        collision_kind: None,
        final_config: Vec::new(),
        steps: 0,
        refinements: 0,
        smallest_dt: f64::INFINITY,
    };
    let mut drift = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    // Pending (dt, increment) segments, last = next.
    let mut stack: Vec<(f64, Vec<f64>)> = Vec::new();

    'outer: while t < horizon && summary.collision_time.is_none() {
        let dt = opts.dt0.min(opts.gap_factor * gap * gap / beta).min(horizon - t);
        if dt < opts.min_dt {
            summary.collision_time = Some(t.max(f64::MIN_POSITIVE));
            summary.collision_kind = Some(CollisionKind::ResolutionLimit);
            break;
        }
        let mut dw = vec![0.0; dim];
        if opts.noise {
            normals(rng, &mut dw, dt.sqrt());
        }
        stack.push((dt, dw));
        while let Some((h, dw)) = stack.pop() {
            model.drift(&x, &mut drift);
            for k in 0..dim {
                trial[k] = x[k] + drift[k] * h + sigma * dw[k];
            }
            let g = model.gap(&trial, order);
            if g > 0.0 {
                x.copy_from_slice(&trial);
                t += h;
                gap = g;
                summary.steps += 1;
                summary.smallest_dt = summary.smallest_dt.min(h);
                summary.min_gap = summary.min_gap.min(g);
                if g < opts.threshold {
                    summary.collision_time = Some(t);
                    summary.collision_kind = Some(CollisionKind::Threshold);
                    stack.clear();
                    break 'outer;
                }
                continue;
            }
            let half = 0.5 * h;
            if half < opts.min_dt {
                summary.collision_time = Some(t.max(f64::MIN_POSITIVE));
                summary.collision_kind = Some(CollisionKind::ResolutionLimit);
                stack.clear();
                break 'outer;
            }
            summary.refinements += 1;
            let mut first = vec![0.0; dim];
            normals(rng, &mut first, (0.5 * half).sqrt());
            for k in 0..dim {
                first[k] += 0.5 * dw[k];
            }
            let second: Vec<f64> = dw.iter().zip(&first).map(|(a, b)| a - b).collect();
            stack.push((half, second));
            stack.push((half, first));
        }
    }
    summary.final_config = x;
    summary
}

fn check_common(beta: f64, horizon: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be nonnegative, got {horizon}")));
    }
    Ok(())
}

/// One path with the given options and generator.
pub fn simulate_with(x0: &Configuration, beta: f64, horizon: f64, opts: &SdeOptions, rng: &mut ChaCha8Rng) -> Result<PathSummary> {
    check_common(beta, horizon)?;
    opts.validate()?;
    let order = sector_of(x0)?;
    Ok(run(Model::Dyson { beta }, x0.coords(), &order, horizon, opts, rng))
}

/// One path from stream 0 of `seed` with default options and step `dt0`.
pub fn simulate(x0: &Configuration, beta: f64, horizon: f64, dt0: f64, seed: u64) -> Result<PathSummary> {
    simulate_with(x0, beta, horizon, &SdeOptions::default().with_dt0(dt0), &mut path_rng(seed, 0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionStats {
    pub beta: f64,
    pub n: usize,
    pub horizon: f64,
    pub paths: usize,
    pub collisions: usize,
    pub frequency: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub threshold: f64,
    pub seed: u64,
}

impl CollisionStats {
    fn from_count(beta: f64, n: usize, horizon: f64, paths: usize, collisions: usize, threshold: f64, seed: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(collisions, paths, Z95);
        Self {
            beta,
            n,
            horizon,
            paths,
            collisions,
            frequency: collisions as f64 / paths as f64,
            ci_low,
            ci_high,
            threshold,
            seed,
        }
    }

    pub fn ci_width(&self) -> f64 {
        self.ci_high - self.ci_low
    }
}

fn check_paths(paths: usize) -> Result<()> {
    if paths < 100 {
        return Err(Error::InvalidParameter(format!("need at least 100 paths, got {paths}")));
    }
    Ok(())
}

/// Monte Carlo over `paths` paths from `x0`; path `i` uses stream `i`.
pub fn collision_run(
    x0: &Configuration,
    beta: f64,
    horizon: f64,
    paths: usize,
    seed: u64,
    opts: &SdeOptions,
) -> Result<(CollisionStats, Vec<PathSummary>)> {
    check_paths(paths)?;
    check_common(beta, horizon)?;
    opts.validate()?;
    let order = sector_of(x0)?;
    let summaries: Vec<PathSummary> = (0..paths as u64)
        .into_par_iter()
        .map(|i| run(Model::Dyson { beta }, x0.coords(), &order, horizon, opts, &mut path_rng(seed, i)))
        .collect();
    let hits = summaries.iter().filter(|s| s.collided()).count();
    let stats = CollisionStats::from_count(beta, x0.len(), horizon, paths, hits, opts.threshold, seed);
    Ok((stats, summaries))
}

/// Collision frequency from the unit-spaced start with default options.
pub fn collision_stats(n: usize, beta: f64, horizon: f64, paths: usize, seed: u64) -> Result<CollisionStats> {
    let x0 = Configuration::new(default_start(n))?;
    Ok(collision_run(&x0, beta, horizon, paths, seed, &SdeOptions::default())?.0)
}

/// Hit frequency of the gap process `dg = (beta/g) dt + sqrt(2) dW` started
/// at `g0`, with the same step policy.
pub fn bessel_hit_run(beta: f64, horizon: f64, g0: f64, paths: usize, seed: u64, opts: &SdeOptions) -> Result<CollisionStats> {
    check_paths(paths)?;
    check_common(beta, horizon)?;
    opts.validate()?;
    if !(g0 > 0.0) {
        return Err(Error::InvalidParameter(format!("initial gap must be positive, got {g0}")));
    }
    let hits: Vec<bool> = (0..paths as u64)
        .into_par_iter()
        .map(|i| run(Model::Gap { beta }, &[g0], &[0], horizon, opts, &mut path_rng(seed, i)).collided())
        .collect();
    let count = hits.iter().filter(|&&h| h).count();
    Ok(CollisionStats::from_count(beta, 2, horizon, paths, count, opts.threshold, seed))
}

pub fn bessel_hit_oracle(beta: f64, horizon: f64, g0: f64, paths: usize, seed: u64) -> Result<f64> {
    Ok(bessel_hit_run(beta, horizon, g0, paths, seed, &SdeOptions::default())?.frequency)
}

/// Exact probability that the gap process hits 0 before `horizon`.
/// With `g = sqrt(2) R`, `R` is a Bessel process of dimension
/// `delta = beta + 1`; for `delta < 2` its hitting time of 0 is distributed
/// as `R_0^2 / (2 G)` with `G ~ Gamma(1 - delta/2)`.
pub fn bessel_hit_probability(beta: f64, horizon: f64, g0: f64) -> f64 {
    if beta >= 1.0 || horizon <= 0.0 {
        return 0.0;
    }
    let nu = 0.5 * (1.0 - beta);
    gamma_ur(nu, g0 * g0 / (4.0 * horizon))
}
