//! Spatial adaptivity of the median tree: rough signals receive more
//! interior nodes than smooth ones, and the mixed truth splits deeply only
//! on its rough half.
//!
//! Run with `cargo run --example adaptivity`.

use optree::estimators::median_tree;
use optree::harness::{fit_from_config, ExperimentConfig};
use optree::truths::{TruthKind, TruthSpec};

fn main() -> optree::Result<()> {
    let n = 100_000;
    println!("median trees at n = {n}:");
    println!("  {:<14} {:>6} {:>15}", "truth", "depth", "interior nodes");
    let mut mixed_tree = None;
    for kind in [
        TruthKind::Sine,
        TruthKind::Triangular,
        TruthKind::Mixed,
        TruthKind::ExpBrownian,
    ] {
        let config = ExperimentConfig::new(TruthSpec::new(kind, 5), n, 29);
        let experiment = fit_from_config(&config)?;
        let mt = median_tree(&experiment.posterior);
        println!("  {kind:<14} {:>6} {:>15}", mt.depth(), mt.interior_count());
        if kind == TruthKind::Mixed {
            mixed_tree = Some(mt);
        }
    }

    // The mixed truth is exp-Brownian on [0,1/2) and constant on [1/2,1):
    // count deep interior nodes per half.
    let mt = mixed_tree.expect("mixed run");
    let flat = 4;
    let (mut left, mut right) = (0, 0);
    for node in mt.interior_nodes() {
        if node.level() >= flat {
            if node.interval().1 <= 0.5 {
                left += 1;
            } else if node.interval().0 >= 0.5 {
                right += 1;
            }
        }
    }
    println!("\nmixed truth, interior nodes below the flat-initialisation levels:");
    println!("  rough half [0,1/2): {left}");
    println!("  smooth half [1/2,1): {right}");
    Ok(())
}
