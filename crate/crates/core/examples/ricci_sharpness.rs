//! The N-Ricci form of the Dyson potential is nonnegative exactly for
//! N >= N_beta = n + beta n (n - 1) / 2. Along the dilation v = x - mean the
//! form equals P - P^2 / (N - n) with P = beta n (n - 1) / 2, which vanishes
//! at N_beta and turns negative below it.
//!
//! ```bash
//! cargo run -p dyson-lab --example ricci_sharpness
//! ```

use dyson_lab::geometry::{Configuration, Dimension, ModelParams};
use dyson_lab::ricci::{n_beta, ricci_form};

fn main() -> dyson_lab::Result<()> {
    let x = vec![-1.3, -0.2, 0.4, 1.9];
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let v: Vec<f64> = x.iter().map(|a| a - mean).collect();
    let c = Configuration::new(x)?;
    println!("{:>5} {:>10} {:>10} {:>14} {:>14}", "beta", "N_beta", "N", "min eig", "Ric(v, v)");
    for beta in [0.5, 1.0, 2.0, 4.0] {
        let sharp = n_beta(n, beta);
        for dim in [Dimension::Finite(sharp - 0.1), Dimension::Finite(sharp), Dimension::Finite(sharp + 1.0), Dimension::Infinite] {
            let form = ricci_form(&c, &ModelParams::new(n, beta, dim)?)?;
            println!("{beta:>5} {sharp:>10.3} {:>10} {:>14.6e} {:>14.6e}", dim.to_string(), form.min_eigenvalue(), form.value(&v));
        }
    }
    Ok(())
}
