//! On a tiny dataset the posterior over trees can be written out in full:
//! enumerate every tree of depth <= 2, weight it by prior times marginal
//! likelihood, and compare with the fitted branching law.
//!
//! Run with `cargo run --example exact_small_posterior`.

use optree::dyadic::CountTable;
use optree::posterior::{fit, log_tree_marginal};
use optree::trees::{enumerate_trees, log_prior, GWParams, SplitProbabilities};

fn main() -> optree::Result<()> {
    let data = [0.06, 0.11, 0.47, 0.52, 0.81];
    let prior = GWParams::new(1.5, 2, 0)?;
    let counts = CountTable::build(&data, prior.max_depth)?;
    let posterior = fit(counts.clone(), prior, 1.0)?;

    let trees = enumerate_trees(prior.max_depth)?;
    let weights: Vec<f64> = trees
        .iter()
        .map(|t| (log_prior(t, &prior) + log_tree_marginal(t, &counts, 1.0)).exp())
        .collect();
    let total: f64 = weights.iter().sum();

    println!("data: {data:?}");
    println!("{} trees of depth <= {}\n", trees.len(), prior.max_depth);
    println!("{:<38} {:>12} {:>12}", "tree (interior nodes)", "enumerated", "branching");
    for (tree, w) in trees.iter().zip(&weights) {
        let interior: Vec<String> = tree
            .interior_nodes()
            .iter()
            .map(|n| format!("({},{})", n.level(), n.pos()))
            .collect();
        let label = if interior.is_empty() {
            "root only".to_string()
        } else {
            interior.join(" ")
        };
        println!(
            "{label:<38} {:>12.6} {:>12.6}",
            w / total,
            posterior.log_tree_prob(tree).exp()
        );
    }
    println!("\nposterior split probabilities:");
    for l in 0..=prior.max_depth {
        let probs: Vec<String> = (0..1usize << l)
            .map(|k| format!("{:.4}", posterior.split_prob(optree::dyadic::NodeIndex::new(l, k))))
            .collect();
        println!("  level {l}: {}", probs.join("  "));
    }
    Ok(())
}
