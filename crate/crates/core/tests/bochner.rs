mod common;

use common::{leading_constant_oracle, rel_err};
use dyson_lab::bochner::profiles::cosine_cap;
use dyson_lab::bochner::{
    bochner_sweep, eval_counterexample, fd_laplacian_check, fd_lap_phi, fit_scaling, geometric_r_grid, lap_phi_bound, leading_constant, wb_sides,
    BoxCoords, CounterexampleParams, QuadratureSpec,
};
use dyson_lab::geometry::Configuration;
use proptest::prelude::*;
use rand::Rng;

fn point(t: f64, c: f64, y: &[f64]) -> Configuration {
    Configuration::new(BoxCoords { t, c, y: y.to_vec() }.to_x()).unwrap()
}

#[test]
fn leading_constant_matches_substitution_oracle() {
    for b in 1..10 {
        let beta = f64::from(b) / 10.0;
        let got = leading_constant(beta).unwrap();
        let want = leading_constant_oracle(beta);
        assert!(got < 0.0);
        assert!(rel_err(got, want) < 1e-8, "beta={beta}: {got} vs {want}");
    }
}

#[test]
fn leading_constant_vanishes_at_zero() {
    assert!(leading_constant(1e-4).unwrap().abs() < 1e-2);
    assert!(leading_constant(1e-4).unwrap().abs() < leading_constant(1e-2).unwrap().abs());
}

#[test]
fn inner_box_fields_two_particles() {
    let p = CounterexampleParams::new(0.1, 2, 0.5, -1.0).unwrap();
    let mut r = common::rng(3);
    for _ in 0..200 {
        let t = r.random_range(-0.1..0.1);
        let c = r.random_range(-1.0..1.0);
        let e = eval_counterexample(&point(t, c, &[]), &p).unwrap();
        assert_eq!(e.lap_u, 0.0);
        let d = (2.0 * t).abs();
        assert!(rel_err(e.grad_u_sq, 2.0 * 0.25 / d) < 1e-12);
    }
}

#[test]
fn uncancelled_laplacian_vanishes_on_inner_box() {
    for n in [2, 3] {
        let p = CounterexampleParams::new(0.1, n, 0.5, -1.0).unwrap();
        let mut r = common::rng(4);
        for _ in 0..200 {
            let y: Vec<f64> = (2..n).map(|_| r.random_range(-1.0..1.0)).collect();
            let e = eval_counterexample(&point(r.random_range(-0.1..0.1), r.random_range(-1.0..1.0), &y), &p).unwrap();
            assert!(e.lap_u_uncancelled.abs() <= 1e-10 * e.lap_u_scale);
        }
    }
}

#[test]
fn closed_forms_against_differences_three_particles() {
    let p = CounterexampleParams::new(0.1, 3, 0.5, 0.0).unwrap();
    let mut r = common::rng(5);
    let mut checked = 0;
    while checked < 25 {
        let x = point(r.random_range(-0.2..0.2), r.random_range(-2.0..2.0), &[r.random_range(-2.0..2.0)]);
        let Ok(chk) = fd_laplacian_check(&x, &p) else { continue };
        assert!(chk.rel_err_u < 1e-5 && chk.rel_err_phi < 1e-5, "{x:?}: {chk:?}");
        checked += 1;
    }
}

#[test]
fn lap_phi_stays_bounded_toward_the_hyperplane() {
    let p = CounterexampleParams::new(0.1, 2, 0.5, 0.0).unwrap();
    for k in 1..=8 {
        let t = 0.05 * 0.5f64.powi(k);
        let x = point(t, 0.2, &[]);
        let step = (t / 10.0).min(1e-4);
        let fd = fd_lap_phi(&x, &p, step).unwrap();
        let bound = lap_phi_bound(&x, &p).unwrap();
        assert!(fd.abs() <= 2.0 * bound, "t={t}: {fd} vs {bound}");
        let e = eval_counterexample(&x, &p).unwrap();
        assert!(e.lap_phi.abs() <= bound);
    }
}

#[test]
fn cap_is_c1_at_its_edge() {
    let r = 0.1;
    let edge = 2.0 * r / 3.0;
    let f = |t: f64| cosine_cap(t, r).v;
    // Second-order one-sided differences from each side.
    let h = 1e-7;
    let left = (3.0 * f(edge) - 4.0 * f(edge - h) + f(edge - 2.0 * h)) / (2.0 * h);
    let right = (-3.0 * f(edge) + 4.0 * f(edge + h) - f(edge + 2.0 * h)) / (2.0 * h);
    assert!(f(edge).abs() < 1e-15);
    assert!((left - right).abs() < 1e-8, "{left} vs {right}");
}

/// Ratio max/min of `grad_u_sq |x_1 - x_2|^{2 beta}` over samples of `D_r^1`.
fn sandwich_spread(r: f64) -> f64 {
    let p = CounterexampleParams::new(r, 3, 0.5, 0.0).unwrap();
    let mut rng = common::rng(9);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..2000 {
        let t = rng.random_range(-r..r);
        if t == 0.0 {
            continue;
        }
        // Fixed feet so that the spread measures the t-dependence only.
        let e = eval_counterexample(&point(t, 0.3, &[-0.4]), &p).unwrap();
        let v = e.grad_u_sq * (2.0 * t).abs().powf(2.0 * p.beta);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi / lo
}

#[test]
fn sandwich_tightens_as_r_shrinks() {
    let coarse = sandwich_spread(0.1);
    let fine = sandwich_spread(0.01);
    assert!(fine <= coarse, "{fine} > {coarse}");
    assert!(fine < 1.01);
}

#[test]
fn zero_curvature_gives_zero_rhs() {
    let p = CounterexampleParams::new(0.05, 2, 0.5, 0.0).unwrap();
    assert_eq!(wb_sides(&p, QuadratureSpec::default()).unwrap().rhs, 0.0);
}

#[test]
fn two_particle_scaling() {
    let report = bochner_sweep(2, 0.5, -1.0, &geometric_r_grid(0.1, 4), QuadratureSpec::default()).unwrap();
    assert!(report.rows.iter().all(|w| w.lhs < 0.0));
    assert!(report.rows.windows(2).all(|w| w[1].lhs.abs() > w[0].lhs.abs()));
    assert!(report.rows.windows(2).all(|w| w[1].rhs.abs() < w[0].rhs.abs()));
    let lhs = report.lhs_fit.unwrap();
    let rhs = report.rhs_fit.unwrap();
    assert!((lhs.slope + 1.5).abs() < 0.1 && lhs.accepted());
    assert!((rhs.slope - 0.5).abs() < 0.1 && rhs.accepted());
    assert!(report.violated_at.is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn support_discipline(t in -1.0f64..1.0, c in -4.0f64..4.0, y in -4.0f64..4.0, r in 0.01f64..0.2) {
        let p = CounterexampleParams::new(r, 3, 0.5, -1.0).unwrap();
        let b = BoxCoords { t, c, y: vec![y] };
        let e = eval_counterexample(&Configuration::new(b.to_x()).unwrap(), &p).unwrap();
        if !b.in_box(2.0 * r, 2.0) {
            prop_assert_eq!(e.u, 0.0);
        }
        if !b.in_box(r, 1.0) {
            prop_assert_eq!(e.phi, 0.0);
        }
        prop_assert!(e.phi >= 0.0);
    }

    #[test]
    fn fit_recovers_power_laws(slope in -3.0f64..3.0, c in 0.1f64..10.0, neg in any::<bool>()) {
        let sign = if neg { -1.0 } else { 1.0 };
        let pts: Vec<(f64, f64)> = geometric_r_grid(0.1, 5).iter().map(|&r| (r, sign * c * r.powf(slope))).collect();
        let fit = fit_scaling(&pts).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-10);
        prop_assert_eq!(f64::from(fit.sign), sign);
    }
}
