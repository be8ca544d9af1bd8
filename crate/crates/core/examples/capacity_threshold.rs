//! The beta = 1 capacity threshold seen two ways: the log-log cutoff norm
//! and the weighted point capacity on the half line.
//!
//! ```bash
//! cargo run -p dyson-lab --example capacity_threshold
//! ```

use dyson_lab::capacity::{capacity_upper, point_capacity_1d};

fn main() -> dyson_lab::Result<()> {
    println!("cutoff norm integral  int [2g^2 + g'^2 + 2g|g'|] t^beta dt");
    println!("{:>6} {:>8} {:>14} {:>14}", "beta", "s", "exact", "t-majorant");
    for beta in [0.6, 1.0, 1.5] {
        for s in [1e-3, 1e-6, 1e-12] {
            let v = capacity_upper(s, beta)?;
            println!("{beta:>6} {s:>8.0e} {:>14.6e} {:>14.6e}", v.exact.value, v.majorant.value);
        }
    }

    println!();
    println!("point capacity on [eps, 1], 512 graded elements");
    println!("{:>6} {:>8} {:>14}", "beta", "eps", "capacity");
    for beta in [0.5, 1.0, 1.5] {
        for k in 2..=6 {
            let eps = 10f64.powi(-k);
            println!("{beta:>6} {eps:>8.0e} {:>14.6e}", point_capacity_1d(beta, eps, 512)?);
        }
    }
    Ok(())
}
