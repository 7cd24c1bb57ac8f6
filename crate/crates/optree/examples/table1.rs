//! Credibility table: calibrate the sup-norm quantile band and the
//! multiscale ball on one posterior draw set, then estimate their
//! credibilities (and that of their intersection) on a fresh set. The
//! intersection tracks the product of the single-set credibilities, i.e.
//! the two sets behave almost independently under the posterior.
//!
//! Run with `cargo run --example table1` (about a minute; pass a smaller
//! draw count as the first argument to go faster).

use optree::harness::{reproduce_table1, ExperimentConfig};
use optree::truths::{TruthKind, TruthSpec};

fn main() -> optree::Result<()> {
    let draws: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(10_000);
    let gammas = [0.01, 0.05, 0.1, 0.15];
    for n in [10_000u64, 100_000] {
        let mut config = ExperimentConfig::new(TruthSpec::new(TruthKind::Triangular, 5), n, 17);
        config.draws = draws;
        let report = reproduce_table1(&config, &gammas)?;
        println!("n = {n}, {draws} draws per set");
        println!(
            "  {:<7} {:>9} {:>9} {:>13} {:>9}",
            "gamma", "sup-band", "ms-ball", "intersection", "product"
        );
        for row in &report.rows {
            println!(
                "  {:<7} {:>9.4} {:>9.4} {:>13.4} {:>9.4}",
                row.gamma,
                row.sup_band,
                row.multiscale_ball,
                row.intersection,
                row.independence_product
            );
        }
        println!();
    }
    Ok(())
}
