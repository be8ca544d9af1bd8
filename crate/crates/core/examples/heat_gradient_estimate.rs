//! The gradient estimate for the heat flow on the line with weight |t|^beta:
//! it holds for beta >= 1, where the two half-lines do not communicate, and
//! fails near 0 for beta < 1 and odd data.
//!
//! ```bash
//! cargo run --release -p dyson-lab --example heat_gradient_estimate
//! ```

use dyson_lab::geometry::Dimension;
use dyson_lab::heat::{be_check, Datum};

fn main() -> dyson_lab::Result<()> {
    let suite = [
        Datum::OddStep { width: 0.1 },
        Datum::OddStep { width: 0.2 },
        Datum::OddBump { width: 0.3 },
        Datum::EvenBump { width: 0.2 },
        Datum::EvenBump { width: 0.5 },
        Datum::OddStep { width: 0.05 },
    ];
    let (half_length, m) = (2.0, 2048);
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let time = args.first().copied().unwrap_or(0.02);
    println!("{:>5} {:>6} {:>16} {:>12} {:>12} {:>10} {:>9} {:>6} {:>12}", "beta", "N", "datum", "margin", "fine", "err", "growth", "holds", "trend");
    for (beta, dim) in [(1.5, Dimension::Infinite), (1.5, Dimension::Finite(3.5)), (0.99, Dimension::Infinite), (0.5, Dimension::Infinite)] {
        for datum in suite {
            let c = be_check(beta, half_length, m, datum, time, dim)?;
            println!(
                "{beta:>5} {:>6} {:>16} {:>12.4e} {:>12.4e} {:>10.2e} {:>9.3} {:>6} {:>12?}  at t={:.2e}",
                dim.to_string(),
                c.datum,
                c.coarse.margin,
                c.fine.margin,
                c.error_estimate,
                c.growth,
                c.holds,
                c.trend,
                c.coarse.argmax_t
            );
        }
    }
    Ok(())
}
