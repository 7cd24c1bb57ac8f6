//! Convergence of the median-tree estimate: median sup-norm error against
//! sample size, with the fitted log-log slope. The Lipschitz triangular
//! truth contracts near n^(-1/3); the rougher exp-Brownian truth near
//! n^(-1/4).
//!
//! Run with `cargo run --example rate_study`.

use optree::harness::rate_study;
use optree::truths::{TruthKind, TruthSpec};

fn main() -> optree::Result<()> {
    let ns: Vec<u64> = (10..=17).map(|p| 1u64 << p).collect();
    for (kind, theory) in [
        (TruthKind::Triangular, -1.0 / 3.0),
        (TruthKind::ExpBrownian, -0.25),
    ] {
        let report = rate_study(&TruthSpec::new(kind, 5), &ns, 10, 101)?;
        println!("{kind} truth:");
        println!("  {:<9} {:>12} {:>13}", "n", "median err", "median depth");
        for row in &report.rows {
            println!(
                "  {:<9} {:>12.5} {:>13.1}",
                row.n, row.median_sup_error, row.median_depth
            );
        }
        println!("  slope {:.3} (theory {theory:.3})\n", report.slope);
    }
    Ok(())
}
