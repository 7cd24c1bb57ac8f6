//! Exact conjugate posterior for Galton-Watson tree priors with Beta mass
//! splitting.
//!
//! Conjugacy is two-fold: given the tree, cell masses stay Beta-distributed
//! with parameters shifted by the cell counts; and the posterior over trees
//! is again a branching process, with split probabilities obtained from a
//! bottom-up recursion. Writing `nu` for the per-node split Bayes factor and
//! `phi` for the subtree marginal-likelihood ratio,
//!
//! ```text
//! phi(node) = (1 - p) + p * nu(node) * phi(left) * phi(right)
//! p_post(node) = p * nu(node) * phi(left) * phi(right) / phi(node)
//! ```
//!
//! with `phi = 1` and `p_post = 0` at the maximum depth. Everything runs in
//! log space: at large sample sizes the raw factors overflow `f64` by
//! thousands of orders of magnitude.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::dyadic::{CountTable, DyadicHistogram, NodeIndex};
use crate::error::{Error, Result};
use crate::trees::{self, FullBinaryTree, GWParams, SplitProbabilities};

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Log Bayes factor comparing a split at `node` against stopping there:
/// `N*ln(2) + ln B(a+N_left, a+N_right) - ln B(a,a)`.
///
/// Finite for every count configuration; `0` when the cell is empty.
pub fn log_split_factor(node: NodeIndex, counts: &CountTable, a: f64) -> f64 {
    let n = counts.count(node) as f64;
    let n0 = counts.count(node.left_child()) as f64;
    let n1 = counts.count(node.right_child()) as f64;
    n * std::f64::consts::LN_2 + ln_beta(a + n0, a + n1) - ln_beta(a, a)
}

/// Log marginal likelihood of the data given a tree, up to the tree-free
/// factor shared by all trees: the sum of split Bayes factors over interior
/// nodes.
pub fn log_tree_marginal(tree: &FullBinaryTree, counts: &CountTable, a: f64) -> f64 {
    tree.interior_nodes()
        .iter()
        .map(|&node| log_split_factor(node, counts, a))
        .sum()
}

/// The fitted posterior: per-node posterior split probabilities, subtree
/// log marginal factors, and everything needed to sample from it.
/// Immutable once fitted.
#[derive(Debug, Clone)]
pub struct FittedPosterior {
    counts: CountTable,
    prior: GWParams,
    a: f64,
    post_split: Vec<Vec<f64>>,
    log_phi: Vec<Vec<f64>>,
}

/// Fit the posterior by the bottom-up recursion.
///
/// `counts` must extend exactly to the prior's maximum depth, and `a` must
/// be positive.
pub fn fit(counts: CountTable, prior: GWParams, a: f64) -> Result<FittedPosterior> {
    if a.is_nan() || a <= 0.0 {
        return Err(Error::NonPositiveBetaParam(a));
    }
    if counts.max_depth() != prior.max_depth {
        return Err(Error::DepthMismatch {
            counts: counts.max_depth(),
            prior: prior.max_depth,
        });
    }
    let (post_split, log_phi) = split_posterior(&counts, &prior, a);
    Ok(FittedPosterior {
        counts,
        prior,
        a,
        post_split,
        log_phi,
    })
}

/// Core recursion, generic over the prior split-probability rule.
pub(crate) fn split_posterior<P: SplitProbabilities>(
    counts: &CountTable,
    prior: &P,
    a: f64,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let depth = prior.max_depth();
    let mut post_split: Vec<Vec<f64>> = (0..=depth).map(|l| vec![0.0; 1 << l]).collect();
    let mut log_phi: Vec<Vec<f64>> = (0..=depth).map(|l| vec![0.0; 1 << l]).collect();
    for l in (0..depth).rev() {
        for k in 0..1usize << l {
            let node = NodeIndex::new(l, k);
            let p = prior.split_prob(node);
            let log_split = p.ln()
                + log_split_factor(node, counts, a)
                + log_phi[l + 1][2 * k]
                + log_phi[l + 1][2 * k + 1];
            let log_stop = (-p).ln_1p();
            let phi = log_add_exp(log_stop, log_split);
            log_phi[l][k] = phi;
            post_split[l][k] = (log_split - phi).exp();
        }
    }
    (post_split, log_phi)
}

impl SplitProbabilities for FittedPosterior {
    /// Posterior split probability of `node`; exactly `1` on forced levels
    /// and exactly `0` at the maximum depth.
    fn split_prob(&self, node: NodeIndex) -> f64 {
        self.post_split
            .get(node.level())
            .map_or(0.0, |row| row[node.pos()])
    }

    fn max_depth(&self) -> usize {
        self.prior.max_depth
    }
}

impl FittedPosterior {
    pub fn counts(&self) -> &CountTable {
        &self.counts
    }

    pub fn prior(&self) -> &GWParams {
        &self.prior
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn n(&self) -> u64 {
        self.counts.n()
    }

    pub fn max_depth(&self) -> usize {
        self.prior.max_depth
    }

    /// Log of the overall marginal-likelihood ratio (root `phi`); also the
    /// normalizing constant of the posterior over trees.
    pub fn log_marginal(&self) -> f64 {
        self.log_phi[0][0]
    }

    pub fn log_phi(&self, node: NodeIndex) -> f64 {
        self.log_phi[node.level()][node.pos()]
    }

    /// Posterior probability that `node` is interior: the product of
    /// posterior split probabilities along the root path, the node itself
    /// included. Non-increasing along any root-to-leaf path.
    pub fn interior_marginal(&self, node: NodeIndex) -> f64 {
        let mut prod = 1.0;
        for i in 0..=node.level() {
            prod *= self.post_split[i][node.pos() >> (node.level() - i)];
        }
        prod
    }

    /// Posterior log-probability of a full tree under the fitted branching
    /// law.
    pub fn log_tree_prob(&self, tree: &FullBinaryTree) -> f64 {
        trees::log_prior(tree, self)
    }

    /// Draw a tree from the posterior branching process.
    pub fn sample_tree<R: Rng + ?Sized>(&self, rng: &mut R) -> FullBinaryTree {
        trees::sample_tree(self, rng)
    }

    /// Draw a density: a tree from the posterior branching process, then
    /// Beta mass splits with count-shifted parameters along its interior.
    /// The result integrates to one up to floating-point telescoping.
    pub fn sample_density<R: Rng + ?Sized>(&self, rng: &mut R) -> DyadicHistogram {
        let tree = self.sample_tree(rng);
        let mut cells = Vec::with_capacity(tree.node_count() / 2 + 1);
        self.descend(&tree, NodeIndex::ROOT, 1.0, rng, &mut cells);
        DyadicHistogram::from_ordered_cells(cells)
    }

    fn descend<R: Rng + ?Sized>(
        &self,
        tree: &FullBinaryTree,
        node: NodeIndex,
        mass: f64,
        rng: &mut R,
        cells: &mut Vec<(NodeIndex, f64)>,
    ) {
        if tree.is_interior(node) {
            let n0 = self.counts.count(node.left_child()) as f64;
            let n1 = self.counts.count(node.right_child()) as f64;
            let y = sample_beta(rng, self.a + n0, self.a + n1);
            let left = mass * y;
            self.descend(tree, node.left_child(), left, rng, cells);
            self.descend(tree, node.right_child(), mass - left, rng, cells);
        } else {
            cells.push((node, mass * (node.level() as f64).exp2()));
        }
    }

    /// Largest relative violation of the defining odds identity
    ///
    /// ```text
    /// odds(p_post) (1-p_post_left)(1-p_post_right)
    ///   = odds(p) (1-p_left)(1-p_right) * nu
    /// ```
    ///
    /// over all nodes with a genuinely random split decision (prior
    /// probability strictly inside (0,1)). A self-check; values around
    /// 1e-12 are floating-point noise.
    pub fn odds_identity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for l in 0..self.prior.max_depth {
            for k in 0..1usize << l {
                let node = NodeIndex::new(l, k);
                let p = self.prior.split_prob(node);
                if !(p > 0.0 && p < 1.0) {
                    continue;
                }
                let px = self.split_prob(node);
                let lhs = px.ln() - (-px).ln_1p()
                    + (-self.split_prob(node.left_child())).ln_1p()
                    + (-self.split_prob(node.right_child())).ln_1p();
                let rhs = p.ln() - (-p).ln_1p()
                    + (-self.prior.split_prob(node.left_child())).ln_1p()
                    + (-self.prior.split_prob(node.right_child())).ln_1p()
                    + log_split_factor(node, &self.counts, self.a);
                worst = worst.max(((lhs - rhs).exp() - 1.0).abs());
            }
        }
        worst
    }
}

fn sample_beta<R: Rng + ?Sized>(rng: &mut R, alpha: f64, beta: f64) -> f64 {
    // Two-Gamma construction; stable for the large count-shifted shapes.
    let g1: f64 = Gamma::new(alpha, 1.0).expect("positive shape").sample(rng);
    let g2: f64 = Gamma::new(beta, 1.0).expect("positive shape").sample(rng);
    if g1 + g2 == 0.0 {
        return 0.5;
    }
    g1 / (g1 + g2)
}

/// On-disk form of a fitted model.
///
/// Split probabilities are stored for inspection; loading re-derives the
/// fit from the counts, which reproduces them bit for bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub n: u64,
    pub l_max: usize,
    pub l0: usize,
    pub gamma: f64,
    pub a: f64,
    pub post_split: Vec<Vec<f64>>,
    pub counts: Vec<Vec<u64>>,
}

impl ModelFile {
    pub fn from_posterior(fp: &FittedPosterior) -> Self {
        ModelFile {
            n: fp.n(),
            l_max: fp.prior.max_depth,
            l0: fp.prior.flat_init_level,
            gamma: fp.prior.gamma,
            a: fp.a,
            post_split: fp.post_split.clone(),
            counts: fp.counts.levels().to_vec(),
        }
    }

    pub fn into_posterior(self) -> Result<FittedPosterior> {
        let counts = CountTable::from_level_counts(self.counts)?;
        let prior = GWParams::new(self.gamma, self.l_max, self.l0)?;
        fit(counts, prior, self.a)
    }
}
