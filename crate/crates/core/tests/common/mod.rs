//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Adaptive Simpson on `[a, b]` with absolute tolerance `tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `int_0^b g(t) t^alpha dt` for `-1 < alpha`, via `t = u^{1/(1+alpha)}`,
/// which turns the weight into a constant.
pub fn power_weighted<F: Fn(f64) -> f64>(g: F, alpha: f64, b: f64, tol: f64) -> f64 {
    let p = 1.0 / (1.0 + alpha);
    let h = |u: f64| g(u.powf(p));
    p * simpson(&h, 0.0, b.powf(1.0 + alpha), tol)
}

/// `-2 int_0^pi (cos s + beta sin s / s) s^{-beta} ds`.
pub fn leading_constant_oracle(beta: f64) -> f64 {
    let g = |s: f64| if s == 0.0 { 1.0 + beta } else { s.cos() + beta * s.sin() / s };
    -2.0 * power_weighted(g, -beta, std::f64::consts::PI, 1e-14)
}

/// `Gamma(a, x) / Gamma(a)` for `0 < a < 1` by quadrature.
pub fn upper_gamma_regularized(a: f64, x: f64) -> f64 {
    let tail = |s: f64| s.powf(a - 1.0) * (-s).exp();
    let upper = simpson(&tail, x, x + 60.0, 1e-14);
    // Gamma(a) = int_0^inf s^{a-1} e^{-s} ds, with s = u^{1/a} near 0.
    let head = power_weighted(|s| (-s).exp(), a - 1.0, 1.0, 1e-14);
    let rest = simpson(&tail, 1.0, 61.0, 1e-14);
    upper / (head + rest)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Distinct coordinates in `[-2, 2]` with gaps at least `min_gap`.
pub fn random_config(rng: &mut ChaCha8Rng, n: usize, min_gap: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut s = x.clone();
        s.sort_by(f64::total_cmp);
        if s.windows(2).all(|w| w[1] - w[0] >= min_gap) {
            return x;
        }
    }
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}
