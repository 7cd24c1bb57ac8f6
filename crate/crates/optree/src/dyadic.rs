//! Dyadic geometry on `[0,1)` and exact algebra on piecewise-constant
//! densities.
//!
//! A node `(l,k)` addresses the half-open interval `[k/2^l, (k+1)/2^l)`. All
//! interval endpoints are dyadic rationals, hence exactly representable as
//! `f64` up to level 52; partition checks and refinements are integer-exact.

use crate::error::{Error, Result};

/// Deepest node level supported; keeps `k/2^l` exact in `f64` and cell
/// cursors inside `u64`.
pub const MAX_LEVEL: usize = 52;

/// A node `(l,k)` of the infinite dyadic tree, `0 <= k < 2^l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeIndex {
    level: usize,
    pos: usize,
}

impl NodeIndex {
    pub const ROOT: NodeIndex = NodeIndex { level: 0, pos: 0 };

    /// # Panics
    /// If `pos >= 2^level` or `level > MAX_LEVEL`.
    pub fn new(level: usize, pos: usize) -> Self {
        assert!(level <= MAX_LEVEL, "level {level} too deep");
        assert!(pos < (1usize << level), "position {pos} at level {level}");
        NodeIndex { level, pos }
    }

    pub fn level(self) -> usize {
        self.level
    }

    pub fn pos(self) -> usize {
        self.pos
    }

    pub fn parent(self) -> Option<NodeIndex> {
        (self.level > 0).then(|| NodeIndex::new(self.level - 1, self.pos / 2))
    }

    /// The other child of this node's parent; `None` for the root.
    pub fn sibling(self) -> Option<NodeIndex> {
        (self.level > 0).then(|| NodeIndex::new(self.level, self.pos ^ 1))
    }

    pub fn left_child(self) -> NodeIndex {
        NodeIndex::new(self.level + 1, 2 * self.pos)
    }

    pub fn right_child(self) -> NodeIndex {
        NodeIndex::new(self.level + 1, 2 * self.pos + 1)
    }

    /// `[k/2^l, (k+1)/2^l)`.
    pub fn interval(self) -> (f64, f64) {
        let w = self.width();
        (self.pos as f64 * w, (self.pos + 1) as f64 * w)
    }

    pub fn width(self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    pub fn midpoint(self) -> f64 {
        (self.pos as f64 + 0.5) * self.width()
    }

    /// Binary-string form: the `l` bits of `k`, most significant first.
    /// The root maps to the empty string.
    pub fn bits(self) -> String {
        (0..self.level)
            .map(|i| {
                if self.pos >> (self.level - 1 - i) & 1 == 1 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }

    /// Inverse of [`bits`](Self::bits).
    pub fn from_bits(bits: &str) -> Option<NodeIndex> {
        if bits.len() > MAX_LEVEL {
            return None;
        }
        let mut pos = 0usize;
        for c in bits.chars() {
            pos = 2 * pos
                + match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return None,
                };
        }
        Some(NodeIndex::new(bits.len(), pos))
    }
}

/// Cell counts `N(I_{lk})` for all nodes down to a fixed depth.
///
/// Stored densely per level; counts are additive down the tree by
/// construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    levels: Vec<Vec<u64>>,
    n: u64,
}

impl CountTable {
    /// Tally `data` into all cells of level `0..=max_depth`.
    ///
    /// Rejects values outside `[0,1)` (including NaN).
    pub fn build(data: &[f64], max_depth: usize) -> Result<CountTable> {
        if max_depth > 26 {
            return Err(Error::DepthTooLarge(max_depth, 26));
        }
        let mut bottom = vec![0u64; 1 << max_depth];
        let scale = (max_depth as f64).exp2();
        for &x in data {
            if !(0.0..1.0).contains(&x) {
                return Err(Error::SampleOutOfRange(x));
            }
            // Multiplying by a power of two is exact, so the floor lands in
            // the correct half-open cell.
            bottom[(x * scale) as usize] += 1;
        }
        let mut levels = vec![bottom];
        for _ in 0..max_depth {
            let prev = levels.last().expect("nonempty");
            let up: Vec<u64> = prev.chunks_exact(2).map(|c| c[0] + c[1]).collect();
            levels.push(up);
        }
        levels.reverse();
        Ok(CountTable {
            levels,
            n: data.len() as u64,
        })
    }

    /// Rebuild from per-level arrays, checking sizes and additivity.
    pub fn from_level_counts(levels: Vec<Vec<u64>>) -> Result<CountTable> {
        if levels.is_empty() {
            return Err(Error::InvalidCounts("no levels".into()));
        }
        for (l, row) in levels.iter().enumerate() {
            if row.len() != 1 << l {
                return Err(Error::InvalidCounts(format!(
                    "level {l} holds {} cells, expected {}",
                    row.len(),
                    1usize << l
                )));
            }
        }
        for l in 0..levels.len() - 1 {
            for k in 0..levels[l].len() {
                if levels[l][k] != levels[l + 1][2 * k] + levels[l + 1][2 * k + 1] {
                    return Err(Error::InvalidCounts(format!(
                        "additivity fails at ({l},{k})"
                    )));
                }
            }
        }
        let n = levels[0][0];
        Ok(CountTable { levels, n })
    }

    pub fn max_depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// Total sample size.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// # Panics
    /// If `node` is deeper than `max_depth`.
    pub fn count(&self, node: NodeIndex) -> u64 {
        self.levels[node.level()][node.pos()]
    }

    pub fn level_counts(&self, level: usize) -> &[u64] {
        &self.levels[level]
    }

    pub fn levels(&self) -> &[Vec<u64>] {
        &self.levels
    }
}

/// A piecewise-constant function on a dyadic partition of `[0,1)`.
///
/// Heights are per unit length. Heights may be negative (point estimators
/// can undershoot); use [`is_density`](Self::is_density) where a probability
/// density is required.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicHistogram {
    cells: Vec<(NodeIndex, f64)>,
    depth: usize,
}

impl DyadicHistogram {
    /// The uniform density: a single root cell of height one.
    pub fn uniform() -> Self {
        DyadicHistogram {
            cells: vec![(NodeIndex::ROOT, 1.0)],
            depth: 0,
        }
    }

    /// Build from cells, checking that they partition `[0,1)` exactly.
    pub fn from_cells(mut cells: Vec<(NodeIndex, f64)>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidPartition("no cells".into()));
        }
        let depth = cells.iter().map(|(n, _)| n.level()).max().expect("nonempty");
        cells.sort_by_key(|(n, _)| (n.pos() as u64) << (depth - n.level()));
        let mut cursor = 0u64;
        for &(node, _) in &cells {
            let left = (node.pos() as u64) << (depth - node.level());
            if left != cursor {
                return Err(Error::InvalidPartition(format!(
                    "gap or overlap before node ({},{})",
                    node.level(),
                    node.pos()
                )));
            }
            cursor += 1u64 << (depth - node.level());
        }
        if cursor != 1u64 << depth {
            return Err(Error::InvalidPartition("cells do not reach 1".into()));
        }
        Ok(DyadicHistogram { cells, depth })
    }

    /// Cells in left-to-right order, assumed to already partition `[0,1)`.
    pub(crate) fn from_ordered_cells(cells: Vec<(NodeIndex, f64)>) -> Self {
        debug_assert!(!cells.is_empty());
        let depth = cells.iter().map(|(n, _)| n.level()).max().expect("nonempty");
        DyadicHistogram { cells, depth }
    }

    /// Constant heights on the `2^depth` cells of a fixed level.
    pub fn from_depth_heights(depth: usize, heights: &[f64]) -> Self {
        assert_eq!(heights.len(), 1 << depth);
        DyadicHistogram {
            cells: heights
                .iter()
                .enumerate()
                .map(|(k, &h)| (NodeIndex::new(depth, k), h))
                .collect(),
            depth,
        }
    }

    pub fn cells(&self) -> &[(NodeIndex, f64)] {
        &self.cells
    }

    /// Deepest cell level.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn value_at(&self, x: f64) -> f64 {
        assert!((0.0..1.0).contains(&x), "query {x} outside [0,1)");
        let i = self
            .cells
            .partition_point(|(node, _)| node.interval().1 <= x);
        self.cells[i].1
    }

    /// Heights on the uniform level-`depth` grid; exact refinement.
    pub fn flatten_to(&self, depth: usize) -> Vec<f64> {
        assert!(depth >= self.depth, "cannot coarsen from {} to {depth}", self.depth);
        let mut out = Vec::with_capacity(1 << depth);
        for &(node, h) in &self.cells {
            out.extend(std::iter::repeat_n(h, 1 << (depth - node.level())));
        }
        out
    }

    pub fn integral(&self) -> f64 {
        self.cells.iter().map(|&(n, h)| h * n.width()).sum()
    }

    /// True when the histogram is a probability density: nonnegative heights
    /// and unit mass within `tol`.
    pub fn is_density(&self, tol: f64) -> bool {
        self.cells.iter().all(|&(_, h)| h >= 0.0) && (self.integral() - 1.0).abs() <= tol
    }

    /// Exact integral over `[lo, hi)` for dyadic bounds.
    pub fn integral_over(&self, lo: f64, hi: f64) -> f64 {
        let mut acc = 0.0;
        for &(node, h) in &self.cells {
            let (a, b) = node.interval();
            let left = a.max(lo);
            let right = b.min(hi);
            if right > left {
                acc += h * (right - left);
            }
        }
        acc
    }

    /// Haar coefficient `<h, psi_{lk}>` with `psi = 1_[1/2,1) - 1_[0,1/2)`,
    /// exact for piecewise-constant `h`.
    pub fn haar_coefficient(&self, node: NodeIndex) -> f64 {
        let (a, b) = node.interval();
        let mid = node.left_child().interval().1;
        let scale = (node.level() as f64 * 0.5).exp2();
        scale * (self.integral_over(mid, b) - self.integral_over(a, mid))
    }

    /// Exact supremum distance to another dyadic histogram, taken over the
    /// common refinement.
    pub fn sup_distance(&self, other: &DyadicHistogram) -> f64 {
        let depth = self.depth.max(other.depth);
        let a = self.flatten_to(depth);
        let b = other.flatten_to(depth);
        a.iter()
            .zip(&b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// Cumulative distribution function of the histogram: continuous and
    /// piecewise linear with breakpoints at the cell boundaries.
    /// Nondecreasing whenever the histogram is a density.
    pub fn cdf(&self) -> PiecewiseLinearCdf {
        let mut xs = Vec::with_capacity(self.cells.len() + 1);
        let mut ys = Vec::with_capacity(self.cells.len() + 1);
        xs.push(0.0);
        ys.push(0.0);
        let mut acc = 0.0;
        for &(node, h) in &self.cells {
            acc += h * node.width();
            xs.push(node.interval().1);
            ys.push(acc);
        }
        PiecewiseLinearCdf { xs, ys }
    }
}

/// Per-level maxima of `|<f-g, psi_{lk}>|` for levels `0..max_level`.
///
/// Both inputs are finite histograms, so coefficients of the difference
/// vanish at and below the common resolution; the returned vector is exact.
pub fn haar_level_maxima(f: &DyadicHistogram, g: &DyadicHistogram, max_level: usize) -> Vec<f64> {
    let depth = f.depth().max(g.depth());
    let fa = f.flatten_to(depth);
    let ga = g.flatten_to(depth);
    let width = (-(depth as f64)).exp2();
    // Masses of the difference on the finest grid.
    let mut masses: Vec<f64> = fa.iter().zip(&ga).map(|(a, b)| (a - b) * width).collect();
    let mut out = vec![0.0; max_level];
    for level in (0..depth).rev() {
        let scale = (level as f64 * 0.5).exp2();
        let mut up = Vec::with_capacity(1 << level);
        let mut level_max = 0.0f64;
        for pair in masses.chunks_exact(2) {
            level_max = level_max.max((scale * (pair[1] - pair[0])).abs());
            up.push(pair[0] + pair[1]);
        }
        if level < max_level {
            out[level] = level_max;
        }
        masses = up;
    }
    out
}

/// A continuous piecewise-linear function on `[0,1]`, used for CDFs.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearCdf {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinearCdf {
    pub fn breakpoints(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.ys)
    }

    pub fn value_at(&self, t: f64) -> f64 {
        assert!((0.0..=1.0).contains(&t), "query {t} outside [0,1]");
        if t >= *self.xs.last().expect("nonempty") {
            return *self.ys.last().expect("nonempty");
        }
        let i = self.xs.partition_point(|&x| x <= t);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        y0 + (t - x0) / (x1 - x0) * (y1 - y0)
    }

    /// Exact supremum distance between two piecewise-linear functions:
    /// both are linear between consecutive points of the union of their
    /// breakpoints, so the maximum is attained at a breakpoint.
    pub fn sup_distance(&self, other: &PiecewiseLinearCdf) -> f64 {
        let mut best = 0.0f64;
        let (mut i, mut j) = (0, 0);
        while i < self.xs.len() || j < other.xs.len() {
            let t = match (self.xs.get(i), other.xs.get(j)) {
                (Some(&a), Some(&b)) => a.min(b),
                (Some(&a), None) => a,
                (None, Some(&b)) => b,
                (None, None) => break,
            };
            best = best.max((self.value_at(t) - other.value_at(t)).abs());
            while i < self.xs.len() && self.xs[i] <= t {
                i += 1;
            }
            while j < other.xs.len() && other.xs[j] <= t {
                j += 1;
            }
        }
        best
    }

    /// Inverse-CDF transform of `u in [0,1)`; requires a nondecreasing CDF
    /// (i.e. one coming from a density). Returns a point of `[0,1)`.
    pub fn inverse(&self, u: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&u));
        let i = self.ys.partition_point(|&y| y <= u).min(self.xs.len() - 1);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let x = if y1 > y0 {
            x0 + (u - y0) / (y1 - y0) * (x1 - x0)
        } else {
            x0
        };
        x.clamp(0.0, 1.0 - f64::EPSILON / 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bits_round_trip() {
        assert_eq!(NodeIndex::ROOT.bits(), "");
        assert_eq!(NodeIndex::new(2, 3).bits(), "11");
        assert_eq!(NodeIndex::new(3, 5).bits(), "101");
        for (l, k) in [(0, 0), (2, 3), (3, 5), (7, 19)] {
            let node = NodeIndex::new(l, k);
            assert_eq!(NodeIndex::from_bits(&node.bits()), Some(node));
        }
        assert_eq!(NodeIndex::from_bits("102"), None);
    }

    #[test]
    fn intervals() {
        assert_eq!(NodeIndex::ROOT.interval(), (0.0, 1.0));
        assert_eq!(NodeIndex::new(1, 1).interval(), (0.5, 1.0));
        assert_eq!(NodeIndex::new(2, 2).interval(), (0.5, 0.75));
    }

    #[test]
    fn counts_small() {
        let t = CountTable::build(&[0.1, 0.6, 0.7], 1).unwrap();
        assert_eq!(t.count(NodeIndex::ROOT), 3);
        assert_eq!(t.count(NodeIndex::new(1, 0)), 1);
        assert_eq!(t.count(NodeIndex::new(1, 1)), 2);
    }

    #[test]
    fn counts_empty_and_boundary() {
        let t = CountTable::build(&[], 3).unwrap();
        assert_eq!(t.n(), 0);
        assert!(t.level_counts(3).iter().all(|&c| c == 0));

        let t = CountTable::build(&[0.5], 2).unwrap();
        assert_eq!(t.count(NodeIndex::new(2, 2)), 1);
        for k in [0, 1, 3] {
            assert_eq!(t.count(NodeIndex::new(2, k)), 0);
        }
    }

    #[test]
    fn counts_reject_bad_input() {
        assert!(CountTable::build(&[1.0], 2).is_err());
        assert!(CountTable::build(&[-0.1], 2).is_err());
        assert!(CountTable::build(&[f64::NAN], 2).is_err());
    }

    #[test]
    fn haar_basic() {
        let uniform = DyadicHistogram::uniform();
        assert_eq!(uniform.haar_coefficient(NodeIndex::new(3, 4)), 0.0);

        let h = DyadicHistogram::from_depth_heights(1, &[0.0, 2.0]);
        assert!((h.haar_coefficient(NodeIndex::ROOT) - 1.0).abs() < 1e-15);

        // Equal mass in both halves of the root.
        let h = DyadicHistogram::from_depth_heights(2, &[2.0, 0.0, 0.0, 2.0]);
        assert_eq!(h.haar_coefficient(NodeIndex::ROOT), 0.0);
    }

    #[test]
    fn haar_vanishes_at_resolution() {
        let h = DyadicHistogram::from_depth_heights(2, &[0.4, 1.6, 1.2, 0.8]);
        for l in 2..5 {
            for k in 0..1usize << l {
                assert_eq!(h.haar_coefficient(NodeIndex::new(l, k)), 0.0);
            }
        }
    }

    #[test]
    fn sup_distance_examples() {
        let u = DyadicHistogram::uniform();
        let h = DyadicHistogram::from_depth_heights(1, &[2.0, 0.0]);
        assert_eq!(u.sup_distance(&u), 0.0);
        assert_eq!(u.sup_distance(&h), 1.0);
        assert_eq!(h.sup_distance(&u), 1.0);
    }

    #[test]
    fn cdf_examples() {
        let u = DyadicHistogram::uniform();
        for t in [0.0, 0.25, 0.5, 0.99, 1.0] {
            assert!((u.cdf().value_at(t) - t).abs() < 1e-15);
        }
        let h = DyadicHistogram::from_depth_heights(1, &[2.0, 0.0]);
        let f = h.cdf();
        assert!((f.value_at(0.5) - 1.0).abs() < 1e-15);
        assert!((f.value_at(0.25) - 0.5).abs() < 1e-15);
        assert_eq!(f.value_at(0.0), 0.0);
        assert_eq!(f.value_at(1.0), 1.0);
    }

    #[test]
    fn cdf_matches_running_sums() {
        let h = DyadicHistogram::from_depth_heights(3, &[0.5, 1.5, 2.0, 0.0, 1.0, 1.0, 1.5, 0.5]);
        let f = h.cdf();
        let mut acc = 0.0;
        for (i, &(node, height)) in h.cells().iter().enumerate() {
            acc += height * node.width();
            let (_, ys) = f.breakpoints();
            assert!((ys[i + 1] - acc).abs() < 1e-15);
        }
    }

    #[test]
    fn partition_validation() {
        let missing = vec![(NodeIndex::new(1, 0), 1.0)];
        assert!(DyadicHistogram::from_cells(missing).is_err());
        let overlap = vec![
            (NodeIndex::ROOT, 1.0),
            (NodeIndex::new(1, 1), 1.0),
        ];
        assert!(DyadicHistogram::from_cells(overlap).is_err());
        let ok = vec![
            (NodeIndex::new(2, 1), 1.0),
            (NodeIndex::new(1, 1), 1.0),
            (NodeIndex::new(2, 0), 1.0),
        ];
        assert!(DyadicHistogram::from_cells(ok).is_ok());
    }

    fn arb_histogram(max_depth: usize) -> impl Strategy<Value = DyadicHistogram> {
        (1..=max_depth)
            .prop_flat_map(|d| proptest::collection::vec(0.0..4.0f64, 1 << d).prop_map(move |h| {
                DyadicHistogram::from_depth_heights(d, &h)
            }))
    }

    proptest! {
        #[test]
        fn count_additivity(data in proptest::collection::vec(0.0..1.0f64, 0..200), depth in 0usize..8) {
            let t = CountTable::build(&data, depth).unwrap();
            for l in 0..depth {
                for k in 0..1usize << l {
                    let node = NodeIndex::new(l, k);
                    prop_assert_eq!(
                        t.count(node),
                        t.count(node.left_child()) + t.count(node.right_child())
                    );
                }
            }
        }

        #[test]
        fn haar_reconstruction(h in arb_histogram(6)) {
            // h = <h,1> + sum of coefficient * wavelet, exactly per cell.
            let d = h.depth();
            let mut rec = vec![h.integral(); 1 << d];
            for l in 0..d {
                let scale = (l as f64 * 0.5).exp2();
                for k in 0..1usize << l {
                    let c = h.haar_coefficient(NodeIndex::new(l, k));
                    let span = 1usize << (d - l);
                    for j in 0..span {
                        let sign = if j < span / 2 { -1.0 } else { 1.0 };
                        rec[k * span + j] += c * sign * scale;
                    }
                }
            }
            let flat = h.flatten_to(d);
            for (r, v) in rec.iter().zip(&flat) {
                prop_assert!((r - v).abs() < 1e-12);
            }
        }

        #[test]
        fn sup_distance_triangle(a in arb_histogram(5), b in arb_histogram(5), c in arb_histogram(5)) {
            let ab = a.sup_distance(&b);
            let bc = b.sup_distance(&c);
            let ac = a.sup_distance(&c);
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert!((ab - b.sup_distance(&a)).abs() == 0.0);
        }

        #[test]
        fn sup_distance_matches_grid(a in arb_histogram(4), b in arb_histogram(4)) {
            let d = a.depth().max(b.depth());
            let grid = 1usize << (d + 3);
            let brute = (0..grid)
                .map(|i| {
                    let x = i as f64 / grid as f64;
                    (a.value_at(x) - b.value_at(x)).abs()
                })
                .fold(0.0, f64::max);
            prop_assert_eq!(a.sup_distance(&b), brute);
        }

        #[test]
        fn cdf_sup_distance_matches_grid(a in arb_histogram(4), b in arb_histogram(4)) {
            let (fa, fb) = (a.cdf(), b.cdf());
            let exact = fa.sup_distance(&fb);
            let brute = (0..=4096)
                .map(|i| {
                    let t = i as f64 / 4096.0;
                    (fa.value_at(t) - fb.value_at(t)).abs()
                })
                .fold(0.0, f64::max);
            prop_assert!(exact >= brute - 1e-12);
            prop_assert!(exact <= brute + 1e-12);
        }
    }
}
