//! Integrals with an algebraic singularity at 0: a single Gauss-Jacobi rule
//! against the graded adaptive rule, for `int_0^1 cos(t) t^alpha dt` and the
//! non-integrable limit `int_eps^1 t^(beta - 2) dt`.
//!
//! ```bash
//! cargo run -p dyson-lab --example singular_quadrature
//! ```

use dyson_lab::quadrature::{gauss_jacobi_rule, integrate_graded};

fn main() -> dyson_lab::Result<()> {
    println!("int_0^1 cos(t) t^alpha dt");
    println!("{:>6} {:>22} {:>22} {:>10}", "alpha", "jacobi(12)", "graded", "err est");
    for alpha in [-0.9, -0.5, 0.0, 0.5, 2.5] {
        let rule = gauss_jacobi_rule(12, alpha, 0.0, 1.0)?;
        let jacobi = rule.integrate(f64::cos);
        let graded = integrate_graded(f64::cos, alpha, 0.0, 1.0, 1e-13)?;
        println!("{alpha:>6} {jacobi:>22.16} {:>22.16} {:>10.1e}", graded.value, graded.error);
    }

    println!();
    println!("int_eps^1 t^(beta - 2) dt: bounded iff beta > 1");
    println!("{:>6} {:>8} {:>16} {:>16}", "beta", "eps", "graded", "closed form");
    for beta in [0.5, 1.0, 1.5] {
        for eps in [1e-2, 1e-4, 1e-8] {
            let got = integrate_graded(|_| 1.0, beta - 2.0, eps, 1.0, 1e-10)?.value;
            let exact = if beta == 1.0 { -eps.ln() } else { (1.0 - eps.powf(beta - 1.0)) / (beta - 1.0) };
            println!("{beta:>6} {eps:>8.0e} {got:>16.8e} {exact:>16.8e}");
        }
    }
    Ok(())
}
