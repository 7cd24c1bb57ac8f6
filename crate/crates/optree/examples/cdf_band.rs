//! The credible band for the distribution function: quantile-calibrated on
//! posterior draws, with a radius that shrinks at the parametric rate.
//!
//! Run with `cargo run --example cdf_band`.

use optree::estimators::median_tree;
use optree::harness::{fit_from_config, ExperimentConfig};
use optree::rng::derive;
use optree::truths::{TruthKind, TruthSpec};
use optree::uq::cdf_band;

fn main() -> optree::Result<()> {
    let truth = TruthSpec::new(TruthKind::ExpBrownian, 6);
    println!("{:<8} {:>10} {:>16} {:>8}", "n", "radius", "radius*sqrt(n)", "covers");
    for n in [1_000u64, 4_000, 16_000] {
        let mut config = ExperimentConfig::new(truth, n, 15);
        config.draws = 4_000;
        let experiment = fit_from_config(&config)?;
        let mt = median_tree(&experiment.posterior);
        let band = cdf_band(
            &experiment.posterior,
            &mt,
            config.level,
            config.draws,
            derive(config.seed, 4),
        )?;
        println!(
            "{n:<8} {:>10.5} {:>16.4} {:>8}",
            band.radius,
            band.radius * (n as f64).sqrt(),
            band.contains(&experiment.truth.cdf)
        );
    }
    println!("\nthe rescaled radius is roughly constant: the band shrinks like 1/sqrt(n)");
    Ok(())
}
