mod common;

use common::{power_weighted, rel_err, simpson};
use dyson_lab::geometry::{distance_to_singular_set, grad_log_weight, sector_of, singular_chart, weight, Configuration};
use dyson_lab::quadrature::{gauss_jacobi_rule, integrate_graded};
use proptest::prelude::*;

fn config(v: Vec<f64>) -> Configuration {
    Configuration::new(v).unwrap()
}

#[test]
fn jacobi_matches_substitution_oracle() {
    let rule = gauss_jacobi_rule(20, -0.5, 0.0, 1.0).unwrap();
    let got = rule.integrate(f64::cos);
    let want = power_weighted(f64::cos, -0.5, 1.0, 1e-15);
    assert!(rel_err(got, want) < 1e-10, "{got} vs {want}");
}

#[test]
fn graded_matches_jacobi_on_cosine() {
    let graded = integrate_graded(f64::cos, -0.5, 0.0, std::f64::consts::PI, 1e-13).unwrap();
    let jacobi = gauss_jacobi_rule(40, -0.5, 0.0, std::f64::consts::PI).unwrap().integrate(f64::cos);
    assert!(rel_err(graded.value, jacobi) < 1e-9);
    assert!(graded.error >= (graded.value - jacobi).abs() || (graded.value - jacobi).abs() < 1e-14);
}

#[test]
fn graded_power_on_shifted_interval() {
    let (beta, eps) = (0.5, 1e-4);
    let got = integrate_graded(|_| 1.0, beta - 2.0, eps, 1.0, 1e-12).unwrap();
    let want = (1.0 - eps.powf(beta - 1.0)) / (beta - 1.0);
    assert!(rel_err(got.value, want) < 1e-10);
}

#[test]
fn sectors_compose_with_permutations() {
    let x = [0.3, -1.2, 2.5];
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let base = sector_of(&config(x.to_vec())).unwrap();
    for p in perms {
        // y_k = x_{p(k)}: the k-th smallest of y sits where p^{-1} sends the
        // position of the k-th smallest of x.
        let y: Vec<f64> = p.iter().map(|&k| x[k]).collect();
        let got = sector_of(&config(y)).unwrap();
        let mut inv = [0; 3];
        for (k, &pk) in p.iter().enumerate() {
            inv[pk] = k;
        }
        let want: Vec<usize> = base.iter().map(|&i| inv[i]).collect();
        assert_eq!(got, want, "permutation {p:?}");
    }
}

#[test]
fn grad_log_weight_against_step_sweep() {
    let mut r = common::rng(1);
    for _ in 0..50 {
        let x = common::random_config(&mut r, 4, 0.05);
        let g = grad_log_weight(&config(x.clone()), 0.7).unwrap();
        for i in 0..4 {
            // Richardson over the steps h and h/2.
            let d = |h: f64| {
                let (mut p, mut m) = (x.clone(), x.clone());
                p[i] += h;
                m[i] -= h;
                (weight(&config(p), 0.7).ln() - weight(&config(m), 0.7).ln()) / (2.0 * h)
            };
            let h = 1e-3;
            let fd = (4.0 * d(h / 2.0) - d(h)) / 3.0;
            assert!(rel_err(g[i], fd) < 1e-6 || (g[i] - fd).abs() < 1e-8);
        }
    }
}

#[test]
fn simpson_oracle_self_check() {
    let got = simpson(&|t: f64| t.exp(), 0.0, 1.0, 1e-14);
    assert!(rel_err(got, std::f64::consts::E - 1.0) < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn weight_is_permutation_invariant(x in prop::collection::vec(-3.0f64..3.0, 2..6), beta in 0.1f64..4.0, seed in any::<u64>()) {
        let mut y = x.clone();
        let mut r = common::rng(seed);
        for i in (1..y.len()).rev() {
            y.swap(i, rand::Rng::random_range(&mut r, 0..=i));
        }
        let (a, b) = (weight(&config(x), beta), weight(&config(y), beta));
        prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(b.abs()));
    }

    #[test]
    fn weight_positive_off_diagonal(x in prop::collection::vec(-3.0f64..3.0, 2..6), beta in 0.1f64..4.0) {
        let c = config(x);
        prop_assert_eq!(weight(&c, beta) > 0.0, distance_to_singular_set(&c) > 0.0);
    }

    #[test]
    fn drift_components_cancel(x in prop::collection::vec(-3.0f64..3.0, 2..7), beta in 0.1f64..4.0) {
        let c = config(x);
        prop_assume!(distance_to_singular_set(&c) > 1e-6);
        let g = grad_log_weight(&c, beta).unwrap();
        let scale: f64 = g.iter().map(|v| v.abs()).sum();
        prop_assert!(g.iter().sum::<f64>().abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn chart_round_trip(x in prop::collection::vec(-3.0f64..3.0, 2..7)) {
        let c = config(x.clone());
        let chart = singular_chart(&c).unwrap();
        let back = chart.reconstruct();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        let err = back.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-12 * norm);
        prop_assert!((chart.distance() - distance_to_singular_set(&c)).abs() <= 1e-14 * norm);
    }

    #[test]
    fn distance_is_one_lipschitz(x in prop::collection::vec(-3.0f64..3.0, 3), y in prop::collection::vec(-3.0f64..3.0, 3)) {
        let d = (distance_to_singular_set(&config(x.clone())) - distance_to_singular_set(&config(y.clone()))).abs();
        let dist = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(d <= dist + 1e-12);
    }

    #[test]
    fn jacobi_exact_on_monomials(alpha in -0.9f64..2.0, m in 1usize..12) {
        let rule = gauss_jacobi_rule(m, alpha, 0.0, 1.0).unwrap();
        prop_assert!(rule.weights.iter().all(|&w| w > 0.0));
        for k in 0..2 * m {
            let got = rule.integrate(|t| t.powi(k as i32));
            let want = 1.0 / (k as f64 + alpha + 1.0);
            prop_assert!(rel_err(got, want) < 1e-12, "k={} got {} want {}", k, got, want);
        }
    }
}
