//! Full binary trees on the dyadic grid and Galton-Watson branching priors.
//!
//! A tree is a parent- and sibling-closed node set (every non-root node has
//! its parent and sibling in the set). Under a GW prior each present node
//! splits independently with a per-node probability, truncated to zero at a
//! maximum depth.

use rand::Rng;

use crate::dyadic::NodeIndex;
use crate::error::{Error, Result};

/// Per-node split probabilities driving tree growth.
///
/// Implementations must return `0` for every node at `max_depth()` or
/// deeper, so sampled trees never exceed that depth.
pub trait SplitProbabilities {
    fn split_prob(&self, node: NodeIndex) -> f64;
    fn max_depth(&self) -> usize;
}

/// The branching-prior parameter family used throughout: forced splits up to
/// a flat-initialisation level, then geometric decay `gamma^-level`, then a
/// hard stop.
///
/// ```text
/// p(l) = 1            for l < flat_init_level
/// p(l) = gamma^-l     for flat_init_level <= l < max_depth
/// p(l) = 0            for l >= max_depth
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GWParams {
    pub gamma: f64,
    pub max_depth: usize,
    pub flat_init_level: usize,
}

impl GWParams {
    pub fn new(gamma: f64, max_depth: usize, flat_init_level: usize) -> Result<Self> {
        if gamma.is_nan() || gamma <= 0.0 {
            return Err(Error::NonPositiveGamma(gamma));
        }
        if flat_init_level > max_depth {
            return Err(Error::FlatInitTooDeep {
                flat: flat_init_level,
                max_depth,
            });
        }
        Ok(GWParams {
            gamma,
            max_depth,
            flat_init_level,
        })
    }

    /// Defaults for a sample of size `n`: depth budget [`max_tree_depth`],
    /// flat initialisation [`flat_init_level`]. Returns `true` in the second
    /// slot when the depth budget had to be clamped up to `flat + 1` (only
    /// happens for small `n`).
    pub fn for_sample_size(n: u64, gamma: f64) -> Result<(Self, bool)> {
        let flat = flat_init_level(n);
        let budget = max_tree_depth(n);
        let clamped = budget < flat + 1;
        let max_depth = budget.max(flat + 1);
        Ok((GWParams::new(gamma, max_depth, flat)?, clamped))
    }
}

impl SplitProbabilities for GWParams {
    fn split_prob(&self, node: NodeIndex) -> f64 {
        let l = node.level();
        if l < self.flat_init_level {
            1.0
        } else if l < self.max_depth {
            self.gamma.powi(-(l as i32))
        } else {
            0.0
        }
    }

    fn max_depth(&self) -> usize {
        self.max_depth
    }
}

/// Depth budget `floor(log2(n / ln(n)^2))` for a sample of size `n`
/// (natural logarithm). Zero for `n < 2`.
pub fn max_tree_depth(n: u64) -> usize {
    if n < 2 {
        return 0;
    }
    let n = n as f64;
    let v = n / n.ln().powi(2);
    if v < 2.0 {
        0
    } else {
        v.log2().floor() as usize
    }
}

/// Flat-initialisation level `ceil(sqrt(ln n))`; zero for `n < 2`.
pub fn flat_init_level(n: u64) -> usize {
    if n < 2 {
        return 0;
    }
    (n as f64).ln().sqrt().ceil() as usize
}

/// A full binary tree: parent- and sibling-closed set of dyadic nodes.
///
/// Stored as one membership row per level for O(1) queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FullBinaryTree {
    levels: Vec<Vec<bool>>,
}

impl FullBinaryTree {
    pub fn root_only() -> Self {
        FullBinaryTree {
            levels: vec![vec![true]],
        }
    }

    /// Build from an arbitrary node collection, validating closure.
    pub fn from_nodes<I: IntoIterator<Item = NodeIndex>>(nodes: I) -> Result<Self> {
        let nodes: Vec<NodeIndex> = nodes.into_iter().collect();
        if nodes.is_empty() {
            return Err(Error::InvalidTree("empty node set".into()));
        }
        let depth = nodes.iter().map(|n| n.level()).max().expect("nonempty");
        let mut levels: Vec<Vec<bool>> = (0..=depth).map(|l| vec![false; 1 << l]).collect();
        for node in &nodes {
            levels[node.level()][node.pos()] = true;
        }
        let tree = FullBinaryTree { levels };
        tree.validate()?;
        Ok(tree)
    }

    /// Smallest tree whose interior-node set is exactly `interior`:
    /// the interior nodes plus all their children. `interior` must be
    /// parent-closed.
    pub fn from_interior(interior: &[NodeIndex]) -> Result<Self> {
        if interior.is_empty() {
            return Ok(FullBinaryTree::root_only());
        }
        let mut nodes = vec![NodeIndex::ROOT];
        for node in interior {
            nodes.push(node.left_child());
            nodes.push(node.right_child());
        }
        let tree = FullBinaryTree::from_nodes(nodes)?;
        for node in interior {
            if !tree.is_interior(*node) {
                return Err(Error::InvalidTree(format!(
                    "interior set not parent-closed near ({},{})",
                    node.level(),
                    node.pos()
                )));
            }
        }
        Ok(tree)
    }

    fn validate(&self) -> Result<()> {
        if !self.levels[0][0] {
            return Err(Error::InvalidTree("missing root".into()));
        }
        if self.levels.len() > 1 && self.levels.last().expect("nonempty").iter().all(|&b| !b) {
            return Err(Error::InvalidTree("empty deepest level".into()));
        }
        for l in 1..self.levels.len() {
            for k in 0..self.levels[l].len() {
                if self.levels[l][k] {
                    if !self.levels[l - 1][k / 2] {
                        return Err(Error::InvalidTree(format!("({l},{k}) lacks its parent")));
                    }
                    if !self.levels[l][k ^ 1] {
                        return Err(Error::InvalidTree(format!("({l},{k}) lacks its sibling")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, node: NodeIndex) -> bool {
        self.levels
            .get(node.level())
            .is_some_and(|row| row[node.pos()])
    }

    /// A node is interior when both its children are present.
    pub fn is_interior(&self, node: NodeIndex) -> bool {
        self.contains(node) && self.contains(node.left_child())
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.levels
            .iter()
            .map(|row| row.iter().filter(|&&b| b).count())
            .sum()
    }

    pub fn interior_count(&self) -> usize {
        self.interior_nodes().len()
    }

    /// All nodes, sorted by (level, position).
    pub fn nodes(&self) -> Vec<NodeIndex> {
        let mut out = Vec::new();
        for (l, row) in self.levels.iter().enumerate() {
            for (k, &present) in row.iter().enumerate() {
                if present {
                    out.push(NodeIndex::new(l, k));
                }
            }
        }
        out
    }

    pub fn interior_nodes(&self) -> Vec<NodeIndex> {
        self.nodes()
            .into_iter()
            .filter(|&n| self.is_interior(n))
            .collect()
    }

    /// Leaves, sorted left to right; they partition `[0,1)`.
    pub fn leaves(&self) -> Vec<NodeIndex> {
        let mut out: Vec<NodeIndex> = self
            .nodes()
            .into_iter()
            .filter(|&n| !self.is_interior(n))
            .collect();
        out.sort_by_key(|n| ((n.pos() as u64) << (self.depth() - n.level()), n.level()));
        out
    }

    /// Serialization form: `[l, k]` pairs sorted by (l, k).
    pub fn node_pairs(&self) -> Vec<[usize; 2]> {
        self.nodes().iter().map(|n| [n.level(), n.pos()]).collect()
    }

    pub fn from_node_pairs(pairs: &[[usize; 2]]) -> Result<Self> {
        FullBinaryTree::from_nodes(pairs.iter().map(|&[l, k]| NodeIndex::new(l, k)))
    }
}

/// Sample a tree from the branching process: every present node splits
/// independently with its own probability, scanned top-down and left to
/// right.
pub fn sample_tree<P: SplitProbabilities, R: Rng + ?Sized>(
    probs: &P,
    rng: &mut R,
) -> FullBinaryTree {
    let mut levels = vec![vec![true]];
    let mut frontier = vec![NodeIndex::ROOT];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        let mut row = vec![false; 2 * (1 << frontier[0].level())];
        for node in &frontier {
            let p = probs.split_prob(*node);
            if p > 0.0 && rng.random::<f64>() < p {
                let (a, b) = (node.left_child(), node.right_child());
                row[a.pos()] = true;
                row[b.pos()] = true;
                next.push(a);
                next.push(b);
            }
        }
        if next.is_empty() {
            break;
        }
        levels.push(row);
        frontier = next;
    }
    FullBinaryTree { levels }
}

/// Log-probability of `tree` under the branching prior: the product of
/// split probabilities over interior nodes and stop probabilities over
/// leaves above the maximum depth. Impossible trees yield `-inf`.
pub fn log_prior<P: SplitProbabilities>(tree: &FullBinaryTree, probs: &P) -> f64 {
    let mut acc = 0.0;
    for node in tree.nodes() {
        let p = probs.split_prob(node);
        if tree.is_interior(node) {
            acc += p.ln();
        } else if node.level() < probs.max_depth() {
            acc += (-p).ln_1p();
        }
    }
    acc
}

/// All full binary trees of depth at most `max_depth`.
///
/// The count grows doubly exponentially (1, 2, 5, 26, 677, ...), so this is
/// restricted to `max_depth <= 4`.
pub fn enumerate_trees(max_depth: usize) -> Result<Vec<FullBinaryTree>> {
    if max_depth > 4 {
        return Err(Error::EnumerationTooDeep {
            got: max_depth,
            max: 4,
        });
    }

    #[derive(Clone)]
    enum Shape {
        Leaf,
        Split(Box<Shape>, Box<Shape>),
    }

    fn shapes(budget: usize) -> Vec<Shape> {
        if budget == 0 {
            return vec![Shape::Leaf];
        }
        let sub = shapes(budget - 1);
        let mut out = vec![Shape::Leaf];
        for left in &sub {
            for right in &sub {
                out.push(Shape::Split(Box::new(left.clone()), Box::new(right.clone())));
            }
        }
        out
    }

    fn collect(shape: &Shape, node: NodeIndex, nodes: &mut Vec<NodeIndex>) {
        nodes.push(node);
        if let Shape::Split(left, right) = shape {
            collect(left, node.left_child(), nodes);
            collect(right, node.right_child(), nodes);
        }
    }

    shapes(max_depth)
        .iter()
        .map(|shape| {
            let mut nodes = Vec::new();
            collect(shape, NodeIndex::ROOT, &mut nodes);
            FullBinaryTree::from_nodes(nodes)
        })
        .collect()
}
