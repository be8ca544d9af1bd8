mod common;

use common::rel_err;
use dyson_lab::geometry::Dimension;
use dyson_lab::heat::{assemble_form, be_check, counterexample_search, default_candidates, evolve, Datum, Trend};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn quadratic_energy_converges() {
    // int_{-1}^{1} (2t)^2 |t| dt = 2.
    let form = assemble_form(1.0, 1.0, 1024).unwrap();
    let u = form.sample(|t| t * t);
    assert!(rel_err(form.dirichlet_integral(&u), 2.0) < 1e-3);
    assert_eq!(form.energy(&form.sample(|_| 3.0)), 0.0);
}

#[test]
fn total_mass_matches_closed_form() {
    for beta in [0.3, 1.0, 2.5] {
        let form = assemble_form(beta, 1.7, 256).unwrap();
        let want = 2.0 * 1.7f64.powf(beta + 1.0) / (beta + 1.0);
        assert!(rel_err(form.total_mass(), want) < 1e-12);
    }
}

#[test]
fn stiffness_is_symmetric_with_zero_row_sums() {
    let form = assemble_form(0.6, 2.0, 128).unwrap();
    let n = form.len();
    let mut k = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        for (i, v) in form.stiffness_apply(&e).into_iter().enumerate() {
            k[i][j] = v;
        }
    }
    for i in 0..n {
        assert!(k[i].iter().sum::<f64>().abs() < 1e-9 * k[i][i].abs());
        for j in 0..n {
            assert!((k[i][j] - k[j][i]).abs() <= 1e-12 * k[i][i].abs().max(k[j][j].abs()));
        }
    }
}

#[test]
fn semigroup_is_self_adjoint() {
    let form = assemble_form(0.5, 2.0, 256).unwrap();
    let mut r = common::rng(7);
    let f: Vec<f64> = (0..form.len()).map(|_| r.random_range(-1.0..1.0)).collect();
    let g: Vec<f64> = (0..form.len()).map(|_| r.random_range(-1.0..1.0)).collect();
    let tf = evolve(&form, &f, 0.05, 128).unwrap();
    let tg = evolve(&form, &g, 0.05, 128).unwrap();
    let (a, b) = (form.inner(&tf, &g), form.inner(&f, &tg));
    assert!(rel_err(a, b) < 1e-8, "{a} vs {b}");
}

#[test]
fn high_beta_suite_holds_with_and_without_dimension_term() {
    for dim in [Dimension::Infinite, Dimension::Finite(3.5)] {
        for datum in [Datum::EvenBump { width: 0.2 }, Datum::OddStep { width: 0.1 }] {
            let c = be_check(1.5, 2.0, 512, datum, 0.02, dim).unwrap();
            assert!(c.holds, "{c:?}");
            assert_eq!(c.trend, Trend::Vanishing);
        }
    }
}

#[test]
fn low_beta_odd_data_violate_and_even_data_do_not() {
    let odd = be_check(0.5, 2.0, 512, Datum::OddStep { width: 0.1 }, 0.02, Dimension::Infinite).unwrap();
    assert!(!odd.holds && odd.trend == Trend::Growing && odd.growth >= 2.0);
    let even = be_check(0.5, 2.0, 512, Datum::EvenBump { width: 0.5 }, 0.02, Dimension::Infinite).unwrap();
    assert!(even.holds);
}

#[test]
fn search_separates_the_two_regimes() {
    let hi = counterexample_search(1.5, 2.0, 256, 0.02, Dimension::Infinite, &default_candidates()).unwrap();
    assert!(hi.best.holds);
    let lo = counterexample_search(0.5, 2.0, 256, 0.02, Dimension::Infinite, &default_candidates()).unwrap();
    assert!(!lo.best.holds && lo.best.trend == Trend::Growing);
}

#[test]
fn violation_strengthens_toward_beta_one() {
    // The innermost gradient scales like h_min^{-beta}, so on a fixed grid
    // the violation is larger for beta closer to 1.
    let at = |beta| be_check(beta, 2.0, 256, Datum::OddStep { width: 0.1 }, 0.02, Dimension::Infinite).unwrap().coarse.margin;
    assert!(at(0.99) >= at(0.5));
}

fn datum_strategy() -> impl Strategy<Value = Datum> {
    (0usize..4, 0.05f64..0.8).prop_map(|(k, width)| match k {
        0 => Datum::OddStep { width },
        1 => Datum::OddBump { width },
        2 => Datum::EvenBump { width },
        _ => Datum::EvenWell { width },
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn evolution_invariants(beta in 0.0f64..2.5, datum in datum_strategy(), t in 0.001f64..0.2) {
        let form = assemble_form(beta, 2.0, 128).unwrap();
        let f = form.sample(|s| datum.value(s));
        let u = evolve(&form, &f, t, 64).unwrap();
        let (lo, hi) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        prop_assert!(u.iter().all(|&v| v >= lo - 1e-10 && v <= hi + 1e-10));
        let (m0, m1) = (form.weighted_mean(&f), form.weighted_mean(&u));
        prop_assert!((m0 - m1).abs() <= 1e-10 * m0.abs().max(1e-3));
        prop_assert!(form.energy(&u) <= form.energy(&f) * (1.0 + 1e-12));
        let n = u.len();
        let sign = if datum.is_odd() { -1.0 } else { 1.0 };
        let scale = u.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        for i in 0..n {
            prop_assert!((u[n - 1 - i] - sign * u[i]).abs() <= 1e-10 * scale);
        }
    }
}
