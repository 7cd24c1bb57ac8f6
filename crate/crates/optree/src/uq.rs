//! Credible/confidence bands around the median-tree estimate.
//!
//! Three constructions:
//! - a sup-norm band with the deterministic radius `v_n sqrt(ln n / n)
//!   2^(depth/2)`;
//! - a multiscale band intersecting that sup-norm band with a quantile ball
//!   in the weighted-coefficient norm `sup_l max_k |<f, psi_lk>| / w_l`;
//! - a sup-norm band for the distribution function with a posterior-quantile
//!   radius, which shrinks at the parametric rate.

use rayon::prelude::*;

use crate::dyadic::{haar_level_maxima, DyadicHistogram, PiecewiseLinearCdf};
use crate::error::{Error, Result};
use crate::estimators::{median_density, MedianTree};
use crate::posterior::FittedPosterior;
use crate::rng::rng_for;

/// Minimum number of posterior draws accepted by quantile calibration.
pub const MIN_DRAWS: usize = 100;

/// Level weights `w_l = (l+1)^(2+delta)`.
///
/// The shift keeps the weight at level zero positive; the sequence is
/// positive, nondecreasing and grows faster than `sqrt(l)`, as the
/// multiscale construction requires.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiscaleWeights {
    delta: f64,
}

impl MultiscaleWeights {
    pub fn new(delta: f64) -> Result<Self> {
        if delta.is_nan() || delta <= 0.0 {
            return Err(Error::NonPositiveDelta(delta));
        }
        Ok(MultiscaleWeights { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn weight(&self, level: usize) -> f64 {
        ((level + 1) as f64).powf(2.0 + self.delta)
    }
}

impl Default for MultiscaleWeights {
    fn default() -> Self {
        MultiscaleWeights { delta: 0.5 }
    }
}

/// Sup-norm band radius `v_n sqrt(ln n / n) 2^(depth/2)` with
/// `v_n = (ln n)^v_exponent`.
pub fn sigma_n(median_depth: usize, n: u64, v_exponent: f64) -> f64 {
    assert!(n >= 3, "radius defined for n >= 3, got {n}");
    let n = n as f64;
    let v = n.ln().powf(v_exponent);
    v * (n.ln() / n).sqrt() * (median_depth as f64 * 0.5).exp2()
}

/// Weighted multiscale distance `max_{l < max_level} max_k
/// |<g - center, psi_lk>| / w_l`.
///
/// Both arguments are finite histograms, so coefficients beyond their common
/// resolution vanish and truncating at `max_level` is exact whenever the
/// inputs live at depth `<= max_level`.
pub fn multiscale_distance(
    g: &DyadicHistogram,
    center: &DyadicHistogram,
    weights: &MultiscaleWeights,
    max_level: usize,
) -> f64 {
    weighted_max(&haar_level_maxima(g, center, max_level), weights)
}

fn weighted_max(level_maxima: &[f64], weights: &MultiscaleWeights) -> f64 {
    level_maxima
        .iter()
        .enumerate()
        .map(|(l, m)| m / weights.weight(l))
        .fold(0.0, f64::max)
}

/// Generalized upper quantile: the smallest draw value `r` such that the
/// fraction of draws `<= r` reaches `1 - gamma`.
pub fn quantile_radius(distances: &[f64], gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidLevel(gamma));
    }
    if distances.len() < MIN_DRAWS {
        return Err(Error::TooFewDraws {
            got: distances.len(),
            min: MIN_DRAWS,
        });
    }
    let mut sorted = distances.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let n = sorted.len();
    let target = 1.0 - gamma;
    let mut m = ((target * n as f64).ceil() as usize).clamp(1, n);
    while m > 1 && (m - 1) as f64 / n as f64 >= target {
        m -= 1;
    }
    Ok(sorted[m - 1])
}

/// Norm in which a [`DensityBand`] measures distances.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityNorm {
    Sup,
    Multiscale {
        weights: MultiscaleWeights,
        max_level: usize,
    },
}

/// A closed ball around a center histogram; membership at exactly the
/// radius counts as inside.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityBand {
    pub center: DyadicHistogram,
    pub radius: f64,
    pub norm: DensityNorm,
}

/// Outcome of testing a candidate truth against a band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetEvaluation {
    pub covered: bool,
    pub diameter: f64,
}

impl DensityBand {
    pub fn distance(&self, g: &DyadicHistogram) -> f64 {
        match &self.norm {
            DensityNorm::Sup => self.center.sup_distance(g),
            DensityNorm::Multiscale { weights, max_level } => {
                multiscale_distance(g, &self.center, weights, *max_level)
            }
        }
    }

    pub fn contains(&self, g: &DyadicHistogram) -> bool {
        self.distance(g) <= self.radius
    }

    pub fn evaluate(&self, truth: &DyadicHistogram) -> SetEvaluation {
        SetEvaluation {
            covered: self.contains(truth),
            diameter: 2.0 * self.radius,
        }
    }
}

/// Sup-norm band centered at the median-tree estimate with radius
/// [`sigma_n`].
pub fn band_simple(fp: &FittedPosterior, mt: &MedianTree, v_exponent: f64) -> DensityBand {
    DensityBand {
        center: median_density(mt, fp.counts()),
        radius: sigma_n(mt.depth(), fp.n(), v_exponent),
        norm: DensityNorm::Sup,
    }
}

/// The multiscale band: intersection of the [`band_simple`] sup-norm band
/// with a posterior-quantile ball in the weighted multiscale norm.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiscaleBand {
    pub sup: DensityBand,
    pub ball: DensityBand,
    /// Rescaled ball radius: `ball.radius * sqrt(n)`.
    pub scaled_radius: f64,
    /// Per-level maxima of unweighted coefficient deviations observed in
    /// the calibration draws.
    pub level_profile: Vec<f64>,
}

impl MultiscaleBand {
    pub fn contains(&self, g: &DyadicHistogram) -> bool {
        self.sup.contains(g) && self.ball.contains(g)
    }

    pub fn evaluate(&self, truth: &DyadicHistogram) -> SetEvaluation {
        SetEvaluation {
            covered: self.contains(truth),
            // The intersection is no wider than its sup-norm component.
            diameter: 2.0 * self.sup.radius,
        }
    }
}

/// Build the multiscale band from `draws` posterior draws (streams of
/// `seed`): the ball radius is the generalized `(1-gamma)` quantile of the
/// draws' multiscale distances to the center.
pub fn band_multiscale(
    fp: &FittedPosterior,
    mt: &MedianTree,
    gamma: f64,
    weights: MultiscaleWeights,
    v_exponent: f64,
    draws: usize,
    seed: u64,
) -> Result<MultiscaleBand> {
    let sup = band_simple(fp, mt, v_exponent);
    let center = sup.center.clone();
    let max_level = fp.max_depth();
    let sqrt_n = (fp.n() as f64).sqrt();

    let profiles: Vec<Vec<f64>> = (0..draws as u64)
        .into_par_iter()
        .map(|i| {
            let g = fp.sample_density(&mut rng_for(seed, i));
            haar_level_maxima(&g, &center, max_level)
        })
        .collect();
    let mut level_profile = vec![0.0f64; max_level];
    for profile in &profiles {
        for (slot, &v) in level_profile.iter_mut().zip(profile) {
            *slot = slot.max(v);
        }
    }
    let distances: Vec<f64> = profiles
        .iter()
        .map(|p| sqrt_n * weighted_max(p, &weights))
        .collect();
    let scaled_radius = quantile_radius(&distances, gamma)?;

    Ok(MultiscaleBand {
        sup,
        ball: DensityBand {
            center,
            radius: scaled_radius / sqrt_n,
            norm: DensityNorm::Multiscale {
                weights,
                max_level,
            },
        },
        scaled_radius,
        level_profile,
    })
}

/// Closed sup-norm ball around a center CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfBand {
    pub center: PiecewiseLinearCdf,
    pub radius: f64,
}

impl CdfBand {
    pub fn distance(&self, f: &PiecewiseLinearCdf) -> f64 {
        self.center.sup_distance(f)
    }

    pub fn contains(&self, f: &PiecewiseLinearCdf) -> bool {
        self.distance(f) <= self.radius
    }

    pub fn evaluate(&self, truth: &PiecewiseLinearCdf) -> SetEvaluation {
        SetEvaluation {
            covered: self.contains(truth),
            diameter: 2.0 * self.radius,
        }
    }
}

/// Band for the distribution function, centered at the CDF of the
/// median-tree estimate; the radius is the generalized `(1-gamma)` quantile
/// of the draws' exact sup distances.
pub fn cdf_band(
    fp: &FittedPosterior,
    mt: &MedianTree,
    gamma: f64,
    draws: usize,
    seed: u64,
) -> Result<CdfBand> {
    let center = median_density(mt, fp.counts()).cdf();
    let distances: Vec<f64> = (0..draws as u64)
        .into_par_iter()
        .map(|i| {
            let g = fp.sample_density(&mut rng_for(seed, i));
            center.sup_distance(&g.cdf())
        })
        .collect();
    let radius = quantile_radius(&distances, gamma)?;
    Ok(CdfBand { center, radius })
}

/// Sup-norm distances of `draws` posterior draws to `center`, one per
/// stream of `seed`. Shared by quantile band constructions and credibility
/// estimates.
pub fn sup_distance_draws(
    fp: &FittedPosterior,
    center: &DyadicHistogram,
    draws: usize,
    seed: u64,
) -> Vec<f64> {
    (0..draws as u64)
        .into_par_iter()
        .map(|i| {
            let g = fp.sample_density(&mut rng_for(seed, i));
            center.sup_distance(&g)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{CountTable, NodeIndex};
    use crate::estimators::median_tree;
    use crate::posterior::fit;
    use crate::trees::GWParams;
    use proptest::prelude::*;

    fn fitted(n_points: usize, depth: usize, flat: usize) -> FittedPosterior {
        let data: Vec<f64> = (0..n_points)
            .map(|i| (((i * 2654435761) % 1_000_000) as f64) / 1_000_000.0)
            .collect();
        let counts = CountTable::build(&data, depth).unwrap();
        fit(counts, GWParams::new(1.1, depth, flat).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn sigma_formula() {
        let n = 10_000u64;
        let expected = (10_000f64.ln()).powf(0.501) * (10_000f64.ln() / 10_000.0).sqrt() * 2f64.powf(4.5);
        assert!((sigma_n(9, n, 0.501) - expected).abs() < 1e-12);
        // Two extra levels double the radius.
        for d in 0..6 {
            assert!((sigma_n(d + 2, n, 0.501) - 2.0 * sigma_n(d, n, 0.501)).abs() < 1e-12);
        }
    }

    #[test]
    fn multiscale_distance_basics() {
        let w = MultiscaleWeights::default();
        let u = DyadicHistogram::uniform();
        assert_eq!(multiscale_distance(&u, &u, &w, 8), 0.0);

        // A single active coefficient at level 1 (value c), none elsewhere.
        let c = 0.4f64;
        let amp = c * (0.5f64).exp2();
        let g = DyadicHistogram::from_depth_heights(
            2,
            &[1.0 - amp, 1.0 + amp, 1.0, 1.0],
        );
        let d = multiscale_distance(&g, &u, &w, 8);
        assert!((d - c / w.weight(1)).abs() < 1e-12);
    }

    #[test]
    fn multiscale_matches_double_loop() {
        let w = MultiscaleWeights::new(0.7).unwrap();
        let g = DyadicHistogram::from_depth_heights(3, &[0.2, 1.4, 0.9, 1.1, 2.0, 0.4, 1.0, 1.0]);
        let center = DyadicHistogram::from_depth_heights(2, &[1.2, 0.8, 1.1, 0.9]);
        let fast = multiscale_distance(&g, &center, &w, 6);
        let mut brute = 0.0f64;
        for l in 0..6 {
            for k in 0..1usize << l {
                let node = NodeIndex::new(l, k);
                let coef = g.haar_coefficient(node) - center.haar_coefficient(node);
                brute = brute.max(coef.abs() / w.weight(l));
            }
        }
        assert!((fast - brute).abs() < 1e-12);
    }

    #[test]
    fn weights_are_admissible() {
        let w = MultiscaleWeights::default();
        let mut prev = 0.0;
        for l in 0..40 {
            let wl = w.weight(l);
            assert!(wl > 0.0 && wl >= prev);
            prev = wl;
        }
        assert!(w.weight(400) / (400f64).sqrt() > w.weight(100) / (100f64).sqrt());
        assert!(MultiscaleWeights::new(0.0).is_err());
    }

    #[test]
    fn quantile_examples() {
        let d: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(quantile_radius(&d, 0.05).unwrap(), 95.0);
        let flat = vec![2.5; 200];
        for gamma in [0.01, 0.3, 0.9] {
            assert_eq!(quantile_radius(&flat, gamma).unwrap(), 2.5);
        }
        assert!(quantile_radius(&d, 0.0).is_err());
        assert!(quantile_radius(&d, 1.0).is_err());
        assert!(quantile_radius(&d[..50], 0.1).is_err());
    }

    #[test]
    fn band_membership_is_closed() {
        let fp = fitted(200, 4, 2);
        let mt = median_tree(&fp);
        let band = band_simple(&fp, &mt, 0.501);
        assert!(band.contains(&band.center));

        // Shift the center by exactly the radius: still inside.
        let shifted: Vec<(NodeIndex, f64)> = band
            .center
            .cells()
            .iter()
            .map(|&(node, h)| (node, h + band.radius))
            .collect();
        let at_radius = DyadicHistogram::from_cells(shifted).unwrap();
        assert!(band.contains(&at_radius));
        let eval = band.evaluate(&at_radius);
        assert!(eval.covered);
        assert!((eval.diameter - 2.0 * band.radius).abs() < 1e-15);

        // Epsilon beyond: outside.
        let outside: Vec<(NodeIndex, f64)> = band
            .center
            .cells()
            .iter()
            .map(|&(node, h)| (node, h + band.radius * (1.0 + 1e-9)))
            .collect();
        let outside = DyadicHistogram::from_cells(outside).unwrap();
        assert!(!band.contains(&outside));
    }

    #[test]
    fn multiscale_band_calibration() {
        let fp = fitted(400, 4, 2);
        let mt = median_tree(&fp);
        let gamma = 0.1;
        let draws = 500;
        let seed = 99;
        let band =
            band_multiscale(&fp, &mt, gamma, MultiscaleWeights::default(), 0.501, draws, seed)
                .unwrap();
        assert!(band.contains(&band.sup.center));

        // Fraction of calibration draws inside the ball.
        let inside = (0..draws as u64)
            .filter(|&i| {
                let g = fp.sample_density(&mut rng_for(seed, i));
                band.ball.contains(&g)
            })
            .count();
        let frac = inside as f64 / draws as f64;
        assert!(frac >= 1.0 - gamma, "fraction {frac}");
        assert!(frac <= 1.0 - gamma + 1.0 / draws as f64, "fraction {frac}");

        // Membership in the pair implies membership in the sup band.
        assert!(band.evaluate(&band.sup.center).covered);
        assert!(band.sup.radius >= 0.0 && band.ball.radius >= 0.0);
    }

    #[test]
    fn cdf_band_calibration() {
        let fp = fitted(300, 4, 2);
        let mt = median_tree(&fp);
        let gamma = 0.2;
        let draws = 400;
        let seed = 123;
        let band = cdf_band(&fp, &mt, gamma, draws, seed).unwrap();
        assert!(band.contains(&band.center));
        let inside = (0..draws as u64)
            .filter(|&i| {
                let g = fp.sample_density(&mut rng_for(seed, i));
                band.contains(&g.cdf())
            })
            .count();
        let frac = inside as f64 / draws as f64;
        assert!(frac >= 1.0 - gamma && frac <= 1.0 - gamma + 1.0 / draws as f64);
    }

    proptest! {
        #[test]
        fn quantile_calibration_random(
            values in proptest::collection::vec(0.0..100.0f64, 100..400),
            gamma in 0.01..0.5f64,
        ) {
            let r = quantile_radius(&values, gamma).unwrap();
            let n = values.len() as f64;
            let frac = values.iter().filter(|&&v| v <= r).count() as f64 / n;
            prop_assert!(frac >= 1.0 - gamma);
            // With distinct draws the overshoot is below one draw weight;
            // duplicates can push it higher, so allow ties their mass.
            let ties = values.iter().filter(|&&v| v == r).count() as f64;
            prop_assert!(frac <= 1.0 - gamma + ties / n);
        }

        #[test]
        fn multiscale_norm_properties(
            a in proptest::collection::vec(0.0..3.0f64, 8),
            b in proptest::collection::vec(0.0..3.0f64, 8),
            s in 0.1..4.0f64,
        ) {
            let w = MultiscaleWeights::default();
            let u = DyadicHistogram::uniform();
            let ha = DyadicHistogram::from_depth_heights(3, &a);
            let hb = DyadicHistogram::from_depth_heights(3, &b);
            // Triangle inequality through a third point.
            let dab = multiscale_distance(&ha, &hb, &w, 6);
            let dau = multiscale_distance(&ha, &u, &w, 6);
            let dub = multiscale_distance(&u, &hb, &w, 6);
            prop_assert!(dab <= dau + dub + 1e-12);
            // Homogeneity: scaling both arguments scales the distance.
            let sa: Vec<f64> = a.iter().map(|x| x * s).collect();
            let sb: Vec<f64> = b.iter().map(|x| x * s).collect();
            let dscaled = multiscale_distance(
                &DyadicHistogram::from_depth_heights(3, &sa),
                &DyadicHistogram::from_depth_heights(3, &sb),
                &w,
                6,
            );
            prop_assert!((dscaled - s * dab).abs() < 1e-9 * (1.0 + dab));
        }
    }
}
