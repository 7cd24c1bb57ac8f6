//! Build the sup-norm band and the multiscale band around the median-tree
//! estimate and check whether they cover the sampling density.
//!
//! Run with `cargo run --example credible_bands`.

use optree::estimators::median_tree;
use optree::harness::{fit_from_config, ExperimentConfig};
use optree::rng::derive;
use optree::truths::{TruthKind, TruthSpec};
use optree::uq::{band_multiscale, band_simple, MultiscaleWeights};

fn main() -> optree::Result<()> {
    let mut config = ExperimentConfig::new(TruthSpec::new(TruthKind::Triangular, 2), 10_000, 9);
    config.draws = 2_000;
    let experiment = fit_from_config(&config)?;
    let posterior = &experiment.posterior;
    let mt = median_tree(posterior);

    let simple = band_simple(posterior, &mt, config.v_exponent);
    println!(
        "sup-norm band: radius {:.4} at median depth {}",
        simple.radius,
        mt.depth()
    );
    let eval = simple.evaluate(&experiment.truth.density);
    println!("  covers the truth: {} (diameter {:.4})", eval.covered, eval.diameter);

    let band = band_multiscale(
        posterior,
        &mt,
        config.level,
        MultiscaleWeights::default(),
        config.v_exponent,
        config.draws,
        derive(config.seed, 2),
    )?;
    println!(
        "multiscale band: scaled radius {:.4}, ball radius {:.6}",
        band.scaled_radius, band.ball.radius
    );
    println!("  covers the truth: {}", band.contains(&experiment.truth.density));
    println!("  per-level max coefficient deviations in calibration:");
    for (l, c) in band.level_profile.iter().enumerate() {
        println!("    level {l}: {c:.5}");
    }
    Ok(())
}
