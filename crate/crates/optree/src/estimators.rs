//! Median-tree point estimators.
//!
//! The median tree collects the nodes whose posterior probability of being
//! interior exceeds one half; the associated density estimate adds the
//! empirical Haar coefficient of every such node to the uniform density.

use crate::dyadic::{CountTable, DyadicHistogram, NodeIndex};
use crate::posterior::FittedPosterior;
use crate::trees::{FullBinaryTree, SplitProbabilities};

/// The median tree: interior nodes are those with posterior interior
/// probability strictly above 1/2, closed under adding their children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MedianTree {
    tree: FullBinaryTree,
}

impl MedianTree {
    pub fn tree(&self) -> &FullBinaryTree {
        &self.tree
    }

    pub fn depth(&self) -> usize {
        self.tree.depth()
    }

    pub fn interior_nodes(&self) -> Vec<NodeIndex> {
        self.tree.interior_nodes()
    }

    pub fn interior_count(&self) -> usize {
        self.tree.interior_count()
    }
}

/// Extract the median tree from a fitted posterior.
///
/// Interior marginals are products of split probabilities along root paths,
/// hence non-increasing with depth; the thresholded set is automatically
/// parent-closed and the search can prune as soon as the running product
/// drops to 1/2 or below. Ties at exactly 1/2 are excluded.
pub fn median_tree(fp: &FittedPosterior) -> MedianTree {
    let mut interior = Vec::new();
    collect_interior(fp, NodeIndex::ROOT, 1.0, &mut interior);
    let tree = FullBinaryTree::from_interior(&interior)
        .expect("thresholded interior set is parent-closed");
    MedianTree { tree }
}

fn collect_interior(fp: &FittedPosterior, node: NodeIndex, path_prob: f64, out: &mut Vec<NodeIndex>) {
    let marginal = path_prob * fp.split_prob(node);
    if marginal > 0.5 {
        out.push(node);
        collect_interior(fp, node.left_child(), marginal, out);
        collect_interior(fp, node.right_child(), marginal, out);
    }
}

/// The median-tree density estimate: one plus the empirical Haar
/// coefficients over the median tree's interior nodes,
///
/// ```text
/// f_hat = 1 + sum over interior (l,k) of
///         2^(l/2) (N(right child) - N(left child)) / n * psi_lk
/// ```
///
/// returned as an exact histogram on the median tree's leaves. Integrates
/// to one; may be negative on sparse cells (no clipping: the credible
/// bands are defined around the raw estimate).
pub fn median_density(mt: &MedianTree, counts: &CountTable) -> DyadicHistogram {
    let n = counts.n();
    let mut cells = Vec::new();
    descend(mt.tree(), counts, n, NodeIndex::ROOT, 1.0, &mut cells);
    DyadicHistogram::from_ordered_cells(cells)
}

fn descend(
    tree: &FullBinaryTree,
    counts: &CountTable,
    n: u64,
    node: NodeIndex,
    value: f64,
    cells: &mut Vec<(NodeIndex, f64)>,
) {
    if tree.is_interior(node) {
        // coefficient * psi amplitude on the two children: -+ 2^l (N1-N0)/n
        let step = if n == 0 {
            0.0
        } else {
            let n0 = counts.count(node.left_child()) as f64;
            let n1 = counts.count(node.right_child()) as f64;
            (node.level() as f64).exp2() * (n1 - n0) / n as f64
        };
        descend(tree, counts, n, node.left_child(), value - step, cells);
        descend(tree, counts, n, node.right_child(), value + step, cells);
    } else {
        cells.push((node, value));
    }
}

/// Display-only variant of a histogram: negative heights clipped to zero,
/// then renormalized to unit mass.
pub fn clipped_renormalized(h: &DyadicHistogram) -> DyadicHistogram {
    let clipped: Vec<(NodeIndex, f64)> = h
        .cells()
        .iter()
        .map(|&(node, height)| (node, height.max(0.0)))
        .collect();
    let mass: f64 = clipped.iter().map(|&(node, h)| h * node.width()).sum();
    let cells = clipped
        .into_iter()
        .map(|(node, h)| (node, if mass > 0.0 { h / mass } else { 1.0 }))
        .collect();
    DyadicHistogram::from_cells(cells).expect("same partition as input")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::CountTable;
    use crate::posterior::fit;
    use crate::trees::GWParams;

    fn fit_data(data: &[f64], gamma: f64, depth: usize, flat: usize) -> FittedPosterior {
        let counts = CountTable::build(data, depth).unwrap();
        fit(counts, GWParams::new(gamma, depth, flat).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn root_only_when_nothing_passes() {
        // Balanced data and a split-averse prior: no interior nodes at all
        // requires the root itself to fail, so use max depth 0.
        let fp = fit_data(&[0.25, 0.75], 1.1, 0, 0);
        let mt = median_tree(&fp);
        assert_eq!(mt.depth(), 0);
        assert_eq!(mt.interior_count(), 0);
        let f = median_density(&mt, fp.counts());
        assert_eq!(f, DyadicHistogram::uniform());
    }

    #[test]
    fn flat_init_levels_are_interior() {
        let data: Vec<f64> = (0..40).map(|i| (i as f64 + 0.5) / 40.0).collect();
        let fp = fit_data(&data, 8.0, 4, 2);
        let mt = median_tree(&fp);
        for l in 0..2 {
            for k in 0..1usize << l {
                assert!(mt.tree().is_interior(NodeIndex::new(l, k)), "({l},{k})");
            }
        }
        assert!(mt.depth() >= 2);
    }

    #[test]
    fn thresholding_matches_direct_marginals() {
        let data: Vec<f64> = (0..60).map(|i| ((i * 37) % 60) as f64 / 60.0 * 0.4).collect();
        let fp = fit_data(&data, 1.2, 4, 0);
        let mt = median_tree(&fp);
        for l in 0..4 {
            for k in 0..1usize << l {
                let node = NodeIndex::new(l, k);
                assert_eq!(
                    mt.tree().is_interior(node),
                    fp.interior_marginal(node) > 0.5,
                    "node ({l},{k})"
                );
            }
        }
    }

    #[test]
    fn parent_closure_holds() {
        for seed in 0..20u64 {
            let data: Vec<f64> = (0..80)
                .map(|i| (((i as u64 * 2654435761 + seed * 97) % 1000) as f64) / 1000.0)
                .collect();
            let fp = fit_data(&data, 1.1, 5, 1);
            let mt = median_tree(&fp);
            for node in mt.interior_nodes() {
                if let Some(parent) = node.parent() {
                    assert!(mt.tree().is_interior(parent));
                }
            }
        }
    }

    #[test]
    fn no_data_estimate_is_uniform() {
        // Flat initialisation keeps the first levels interior even with no
        // data; every empirical coefficient is zero, so the estimate is the
        // uniform density on a refined partition.
        let fp = fit_data(&[], 1.1, 4, 2);
        let mt = median_tree(&fp);
        assert!(mt.depth() >= 2);
        let f = median_density(&mt, fp.counts());
        assert_eq!(f.sup_distance(&DyadicHistogram::uniform()), 0.0);
        assert!((f.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hand_evaluated_estimates() {
        // Balanced pair: the single coefficient vanishes.
        let fp = fit_data(&[0.25, 0.75], 1.1, 1, 1);
        let mt = median_tree(&fp);
        assert_eq!(mt.interior_nodes(), vec![NodeIndex::ROOT]);
        let f = median_density(&mt, fp.counts());
        assert_eq!(f.sup_distance(&DyadicHistogram::uniform()), 0.0);

        // Both points in the left half: f = 1 - psi_00 = 2 on [0,1/2).
        let fp = fit_data(&[0.2, 0.3], 1.1, 1, 1);
        let f = median_density(&median_tree(&fp), fp.counts());
        let expected = DyadicHistogram::from_depth_heights(1, &[2.0, 0.0]);
        assert_eq!(f.sup_distance(&expected), 0.0);
    }

    #[test]
    fn haar_coefficients_are_empirical_on_interior_nodes() {
        let data: Vec<f64> = (0..50)
            .map(|i| (((i * 811) % 100) as f64 / 100.0) * 0.7 + 0.01)
            .collect();
        let fp = fit_data(&data, 1.1, 4, 2);
        let mt = median_tree(&fp);
        let f = median_density(&mt, fp.counts());
        let n = fp.n() as f64;
        for l in 0..4 {
            for k in 0..1usize << l {
                let node = NodeIndex::new(l, k);
                let coef = f.haar_coefficient(node);
                if mt.tree().is_interior(node) {
                    let n0 = fp.counts().count(node.left_child()) as f64;
                    let n1 = fp.counts().count(node.right_child()) as f64;
                    let expected = (l as f64 * 0.5).exp2() * (n1 - n0) / n;
                    assert!((coef - expected).abs() < 1e-12, "node ({l},{k})");
                } else {
                    assert!(coef.abs() < 1e-12, "node ({l},{k}) should vanish");
                }
            }
        }
        assert!((f.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cdf_of_estimate() {
        let f = DyadicHistogram::from_depth_heights(1, &[2.0, 0.0]);
        let cdf = f.cdf();
        assert!((cdf.value_at(0.25) - 0.5).abs() < 1e-15);
        assert_eq!(cdf.value_at(0.0), 0.0);
        assert!((cdf.value_at(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn clipping_for_display() {
        let f = DyadicHistogram::from_depth_heights(2, &[2.0, -0.5, 1.5, 1.0]);
        let clipped = clipped_renormalized(&f);
        assert!(clipped.cells().iter().all(|&(_, h)| h >= 0.0));
        assert!((clipped.integral() - 1.0).abs() < 1e-12);
    }
}
