//! The weak Bochner inequality fails for beta < 1: the left side blows up
//! like -r^{-1-beta} while the right side vanishes like r^{1-beta}.
//!
//! ```bash
//! cargo run --release -p dyson-lab --example weak_bochner
//! ```

use dyson_lab::bochner::{
    bochner_sweep, geometric_r_grid, leading_constant, weak_laplacian_check, CounterexampleParams, QuadratureSpec, TestBump,
};

fn main() -> dyson_lab::Result<()> {
    let grid = geometric_r_grid(0.1, 4);
    for (n, beta) in [(2, 0.3), (2, 0.5), (2, 0.7), (3, 0.5)] {
        let report = bochner_sweep(n, beta, -1.0, &grid, QuadratureSpec::default())?;
        println!("n={n} beta={beta}  leading constant {:.6}", report.leading_constant);
        println!("{:>8} {:>14} {:>10} {:>14} {:>10}", "r", "lhs", "lhs_err", "rhs(K=-1)", "rhs_err");
        for w in &report.rows {
            println!("{:>8} {:>14.6e} {:>10.2e} {:>14.6e} {:>10.2e}", w.r, w.lhs, w.lhs_err, w.rhs, w.rhs_err);
        }
        if let (Some(l), Some(r)) = (&report.lhs_fit, &report.rhs_fit) {
            println!(
                "lhs slope {:.4} (expect {:.2}), rhs slope {:.4} (expect {:.2}), residuals {:.1e} {:.1e}",
                l.slope,
                -1.0 - beta,
                r.slope,
                1.0 - beta,
                l.residual,
                r.residual
            );
        }
        println!("{}\n", report.verdict);
    }

    let p = CounterexampleParams::new(0.1, 2, 0.5, 0.0)?;
    let p3 = CounterexampleParams::new(0.1, 3, 0.5, 0.0)?;
    println!("weak Laplacian: int <grad u, grad psi> w  vs  -int (lap u) psi w");
    for e in weak_laplacian_check(&p3, &TestBump::family(p3.r), 12, 4)? {
        println!("n=3 crosses={:<5} {:>16.10e} {:>16.10e} err {:.1e}", e.bump.crosses_singular_set(), e.energy_side, e.laplacian_side, e.error);
    }
    for e in weak_laplacian_check(&p, &TestBump::family(p.r), 12, 16)? {
        println!(
            "crosses={:<5} {:>16.10e} {:>16.10e} err {:.1e}",
            e.bump.crosses_singular_set(),
            e.energy_side,
            e.laplacian_side,
            e.error
        );
    }
    println!("leading constant at beta=0.1..0.9:");
    for b in 1..10 {
        let beta = f64::from(b) / 10.0;
        print!(" {:.4}", leading_constant(beta)?);
    }
    println!();
    Ok(())
}
