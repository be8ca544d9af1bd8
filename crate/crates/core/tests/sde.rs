mod common;

use common::upper_gamma_regularized;
use dyson_lab::geometry::{sector_of, Configuration};
use dyson_lab::sde::{
    bessel_hit_probability, bessel_hit_run, collision_run, collision_stats, default_start, path_rng, simulate, simulate_with, SdeOptions,
};
use dyson_lab::stats::ks_normal;
use proptest::prelude::*;

fn config(v: Vec<f64>) -> Configuration {
    Configuration::new(v).unwrap()
}

#[test]
fn exact_hit_probability_matches_quadrature_oracle() {
    for (beta, t, g0) in [(0.5, 1.0, 1.0), (0.2, 0.5, 0.7), (0.8, 2.0, 1.5)] {
        let got = bessel_hit_probability(beta, t, g0);
        let want = upper_gamma_regularized(0.5 * (1.0 - beta), g0 * g0 / (4.0 * t));
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
}

#[test]
fn gap_process_converges_under_step_refinement() {
    let coarse = bessel_hit_run(0.5, 1.0, 1.0, 2000, 21, &SdeOptions::default()).unwrap();
    let fine = bessel_hit_run(0.5, 1.0, 1.0, 2000, 21, &SdeOptions::default().with_dt0(1e-4)).unwrap();
    assert!(coarse.frequency > 0.0 && coarse.frequency < 1.0);
    assert!((coarse.frequency - fine.frequency).abs() <= 0.03, "{} vs {}", coarse.frequency, fine.frequency);
    assert!(bessel_hit_run(1.5, 1.0, 1.0, 2000, 22, &SdeOptions::default()).unwrap().frequency <= 0.01);
    assert_eq!(bessel_hit_run(0.5, 0.0, 1.0, 100, 23, &SdeOptions::default()).unwrap().frequency, 0.0);
}

#[test]
fn centre_of_mass_is_brownian() {
    let (n, t) = (3, 1.0);
    let x0 = config(default_start(n));
    let (_, paths) = collision_run(&x0, 2.0, t, 600, 31, &SdeOptions::default()).unwrap();
    let com: Vec<f64> = paths.iter().map(|p| p.final_config.iter().sum::<f64>() / n as f64).collect();
    let (_, p) = ks_normal(&com, 0.0, (t / n as f64).sqrt()).unwrap();
    assert!(p >= 0.01, "KS p = {p}");
}

#[test]
fn more_pairs_collide_at_least_as_often() {
    let two = collision_stats(2, 0.5, 1.0, 1000, 41).unwrap();
    let four = collision_stats(4, 0.5, 1.0, 1000, 41).unwrap();
    assert!(four.frequency >= two.frequency - two.ci_width());
}

#[test]
fn paths_keep_their_order_and_bounds() {
    let x0 = config(vec![0.4, -0.6, 1.3]);
    let (stats, paths) = collision_run(&x0, 0.5, 1.0, 300, 51, &SdeOptions::default()).unwrap();
    let order = sector_of(&x0).unwrap();
    for p in &paths {
        assert!(p.min_gap >= 0.0);
        if let Some(tc) = p.collision_time {
            assert!(tc > 0.0 && tc <= 1.0);
        } else {
            assert_eq!(sector_of(&config(p.final_config.clone())).unwrap(), order);
        }
    }
    assert!(stats.ci_low <= stats.frequency && stats.frequency <= stats.ci_high);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let x0 = config(default_start(3));
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| collision_run(&x0, 0.7, 0.5, 200, 61, &SdeOptions::default()).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn too_few_paths_rejected() {
    assert!(collision_stats(2, 0.5, 1.0, 99, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn translation_moves_the_whole_path(shift in -4.0f64..4.0, seed in any::<u64>()) {
        let x0 = vec![-0.7, 0.1, 0.9];
        let a = simulate(&config(x0.clone()), 0.8, 0.2, 1e-3, seed).unwrap();
        let b = simulate(&config(x0.iter().map(|v| v + shift).collect()), 0.8, 0.2, 1e-3, seed).unwrap();
        prop_assert_eq!(a.collided(), b.collided());
        for (p, q) in a.final_config.iter().zip(&b.final_config) {
            prop_assert!((q - p - shift).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_inputs_identical_paths(seed in any::<u64>(), beta in 0.2f64..3.0) {
        let x0 = config(vec![-0.5, 0.5]);
        let opts = SdeOptions::default();
        let a = simulate_with(&x0, beta, 0.3, &opts, &mut path_rng(seed, 4)).unwrap();
        let b = simulate_with(&x0, beta, 0.3, &opts, &mut path_rng(seed, 4)).unwrap();
        prop_assert_eq!(a, b);
    }
}
