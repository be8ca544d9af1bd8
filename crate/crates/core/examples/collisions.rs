//! Collisions of two Dyson particles within unit time: frequent for
//! beta < 1, absent for beta >= 1. The gap is a Bessel process of dimension
//! beta + 1, which gives an exact hitting probability to compare against.
//!
//! ```bash
//! cargo run --release -p dyson-lab --example collisions
//! ```

use dyson_lab::geometry::Configuration;
use dyson_lab::sde::{bessel_hit_probability, bessel_hit_run, collision_run, default_start, SdeOptions};

fn main() -> dyson_lab::Result<()> {
    let paths = 2000;
    let seed = 7;
    println!("{:>5} {:>3} {:>10} {:>18} {:>10} {:>10} {:>10}", "beta", "n", "threshold", "frequency (95% CI)", "gap-sde", "exact", "refines");
    for beta in [0.3, 0.5, 0.8, 1.0, 1.5] {
        for n in [2, 4] {
            for threshold in [1e-6, 5e-7] {
                let opts = SdeOptions::default().with_threshold(threshold);
                let x0 = Configuration::new(default_start(n))?;
                let (s, paths_out) = collision_run(&x0, beta, 1.0, paths, seed, &opts)?;
                let refines: u64 = paths_out.iter().map(|p| p.refinements).sum();
                let gap = if n == 2 { bessel_hit_run(beta, 1.0, 1.0, paths, seed + 1, &opts)?.frequency } else { f64::NAN };
                let exact = if n == 2 { bessel_hit_probability(beta, 1.0, 1.0) } else { f64::NAN };
                println!(
                    "{beta:>5} {n:>3} {threshold:>10.0e} {:>6.4} ({:.3},{:.3}) {gap:>10.4} {exact:>10.4} {refines:>10}",
                    s.frequency, s.ci_low, s.ci_high
                );
            }
        }
    }
    Ok(())
}
