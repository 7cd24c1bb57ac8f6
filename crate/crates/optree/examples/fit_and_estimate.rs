//! Simulate data from a known density, fit the posterior, and extract the
//! median-tree estimate.
//!
//! Run with `cargo run --example fit_and_estimate`.

use optree::dyadic::CountTable;
use optree::estimators::{median_density, median_tree};
use optree::posterior::fit;
use optree::rng::rng_for;
use optree::trees::GWParams;
use optree::truths::{make_truth, sample_truth, TruthKind, TruthSpec};

fn main() -> optree::Result<()> {
    let truth = make_truth(&TruthSpec::new(TruthKind::Triangular, 1))?;
    let n = 20_000;
    let data = sample_truth(&truth, n, &mut rng_for(7, 0));

    // Prior defaults: depth budget and flat initialisation from n.
    let (prior, _) = GWParams::for_sample_size(n as u64, 1.1)?;
    println!(
        "prior: depth budget {}, flat initialisation to level {}",
        prior.max_depth, prior.flat_init_level
    );

    let counts = CountTable::build(&data, prior.max_depth)?;
    let posterior = fit(counts, prior, 1.0)?;
    println!("log marginal-likelihood ratio: {:.3}", posterior.log_marginal());

    let mt = median_tree(&posterior);
    println!(
        "median tree: depth {}, {} interior nodes, {} leaves",
        mt.depth(),
        mt.interior_count(),
        mt.tree().leaves().len()
    );

    let estimate = median_density(&mt, posterior.counts());
    println!("estimate integrates to {:.15}", estimate.integral());
    println!("sup error vs truth: {:.4}", estimate.sup_distance(&truth.density));
    println!("\n  cell                height   truth");
    for &(node, h) in estimate.cells().iter().take(10) {
        let (a, b) = node.interval();
        println!("  [{a:.4}, {b:.4})   {h:7.4}  {:7.4}", truth.density.value_at(a));
    }
    Ok(())
}
