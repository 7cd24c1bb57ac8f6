//! Sample trees and densities from the fitted posterior and check the
//! telescoping normalization of every draw.
//!
//! Run with `cargo run --example posterior_draws`.

use optree::dyadic::CountTable;
use optree::posterior::fit;
use optree::rng::rng_for;
use optree::trees::GWParams;
use optree::truths::{make_truth, sample_truth, TruthKind, TruthSpec};

fn main() -> optree::Result<()> {
    let truth = make_truth(&TruthSpec::new(TruthKind::Mixed, 4))?;
    let n = 5_000;
    let data = sample_truth(&truth, n, &mut rng_for(21, 0));
    let (prior, _) = GWParams::for_sample_size(n as u64, 1.1)?;
    let counts = CountTable::build(&data, prior.max_depth)?;
    let posterior = fit(counts, prior, 1.0)?;

    let draws = 2_000u64;
    let mut depth_histogram = [0usize; 16];
    let mut worst_mass_error = 0.0f64;
    for i in 0..draws {
        let mut rng = rng_for(1234, i);
        let density = posterior.sample_density(&mut rng);
        depth_histogram[density.depth()] += 1;
        worst_mass_error = worst_mass_error.max((density.integral() - 1.0).abs());
    }
    println!("{draws} posterior draws from a mixed-truth fit (n = {n})");
    println!("worst |mass - 1| across draws: {worst_mass_error:.2e}");
    println!("draw depth distribution:");
    for (depth, count) in depth_histogram.iter().enumerate() {
        if *count > 0 {
            println!("  depth {depth}: {count}");
        }
    }

    // One draw in detail.
    let density = posterior.sample_density(&mut rng_for(1234, 0));
    println!("\nfirst draw has {} leaves; first few cells:", density.cells().len());
    for &(node, h) in density.cells().iter().take(6) {
        let (a, b) = node.interval();
        println!("  [{a:.4}, {b:.4})  height {h:.4}");
    }
    Ok(())
}
