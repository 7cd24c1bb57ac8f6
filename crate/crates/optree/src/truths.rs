//! Ground-truth densities for simulation studies, with exact samplers.
//!
//! Four families spanning different regularities:
//! - `triangular`: the Lipschitz tent `x -> .5 + 2x` on `[0,1/2)`,
//!   `1.5 - 2(x-1/2)` on `[1/2,1)`;
//! - `exp-brownian`: `exp(W_t)` normalized, for a Brownian path `W`; rough,
//!   Hoelder of order just below 1/2;
//! - `mixed`: exp-Brownian on the left half, constant on the right half,
//!   matched continuously at `t = 1/2`;
//! - `sine`: `1 + sin(2 pi x)/2`, smooth.
//!
//! Truths are stored as fine dyadic histograms (depth `resolution`), so
//! band-membership checks against them are exact rather than
//! grid-approximate. Brownian kinds are regenerated deterministically from
//! `(seed, resolution)`, which keeps the truth fixed across replications.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicHistogram, PiecewiseLinearCdf};
use crate::error::{Error, Result};
use crate::rng::rng_for;

pub const MAX_RESOLUTION: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruthKind {
    Triangular,
    ExpBrownian,
    Mixed,
    Sine,
}

impl fmt::Display for TruthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            TruthKind::Triangular => "triangular",
            TruthKind::ExpBrownian => "exp-brownian",
            TruthKind::Mixed => "mixed",
            TruthKind::Sine => "sine",
        };
        f.pad(name)
    }
}

impl FromStr for TruthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triangular" => Ok(TruthKind::Triangular),
            "exp-brownian" => Ok(TruthKind::ExpBrownian),
            "mixed" => Ok(TruthKind::Mixed),
            "sine" => Ok(TruthKind::Sine),
            other => Err(Error::UnknownTruthKind(other.to_string())),
        }
    }
}

/// Recipe for a ground-truth density. `seed` only matters for the Brownian
/// kinds; `resolution` is the depth of the stored histogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthSpec {
    pub kind: TruthKind,
    pub seed: u64,
    pub resolution: usize,
}

impl TruthSpec {
    pub fn new(kind: TruthKind, seed: u64) -> Self {
        TruthSpec {
            kind,
            seed,
            resolution: 12,
        }
    }
}

/// A materialized truth: density histogram and its exact CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub spec: TruthSpec,
    pub density: DyadicHistogram,
    pub cdf: PiecewiseLinearCdf,
}

/// Build the truth density at depth `spec.resolution`.
pub fn make_truth(spec: &TruthSpec) -> Result<Truth> {
    let j = spec.resolution;
    if !(1..=MAX_RESOLUTION).contains(&j) {
        return Err(Error::ResolutionOutOfRange(j));
    }
    let cells = 1usize << j;
    let width = (-(j as f64)).exp2();
    let heights: Vec<f64> = match spec.kind {
        TruthKind::Triangular => (0..cells)
            .map(|k| {
                // Linear on each cell, so the cell average is the midpoint
                // value.
                let x = (k as f64 + 0.5) * width;
                if x < 0.5 {
                    0.5 + 2.0 * x
                } else {
                    2.5 - 2.0 * x
                }
            })
            .collect(),
        TruthKind::Sine => (0..cells)
            .map(|k| {
                // Exact cell average of 1 + sin(2 pi x)/2.
                let a = k as f64 * width;
                let b = (k + 1) as f64 * width;
                let tau = std::f64::consts::TAU;
                1.0 + 0.5 * ((tau * a).cos() - (tau * b).cos()) / (tau * width)
            })
            .collect(),
        TruthKind::ExpBrownian => {
            let w = brownian_path(spec.seed, j);
            normalize(&w[..cells].iter().map(|&v| v.exp()).collect::<Vec<_>>(), width)
        }
        TruthKind::Mixed => {
            let w = brownian_path(spec.seed, j);
            let half = cells / 2;
            // Constant right half at the path's value at 1/2, which is the
            // unique choice keeping the density continuous there.
            let values: Vec<f64> = (0..cells)
                .map(|i| if i < half { w[i].exp() } else { w[half].exp() })
                .collect();
            normalize(&values, width)
        }
    };
    let density = DyadicHistogram::from_depth_heights(j, &heights);
    let cdf = density.cdf();
    Ok(Truth {
        spec: *spec,
        density,
        cdf,
    })
}

fn normalize(values: &[f64], width: f64) -> Vec<f64> {
    let mass: f64 = values.iter().map(|v| v * width).sum();
    values.iter().map(|v| v / mass).collect()
}

/// Standard Brownian path on the grid `i * 2^-resolution`,
/// `i = 0..=2^resolution`: `W_0 = 0`, independent Gaussian increments of
/// variance `2^-resolution`.
pub fn brownian_path(seed: u64, resolution: usize) -> Vec<f64> {
    let steps = 1usize << resolution;
    let sd = (-(resolution as f64) * 0.5).exp2();
    let mut rng = rng_for(seed, 0);
    let mut path = Vec::with_capacity(steps + 1);
    let mut w = 0.0;
    path.push(w);
    for _ in 0..steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        w += sd * z;
        path.push(w);
    }
    path
}

/// Draw `n` i.i.d. points from the truth by inverting its exact CDF.
pub fn sample_truth<R: Rng + ?Sized>(truth: &Truth, n: usize, rng: &mut R) -> Vec<f64> {
    sample_from_cdf(&truth.cdf, n, rng)
}

/// Inverse-CDF sampling from any nondecreasing piecewise-linear CDF.
/// All outputs lie in `[0,1)`.
pub fn sample_from_cdf<R: Rng + ?Sized>(
    cdf: &PiecewiseLinearCdf,
    n: usize,
    rng: &mut R,
) -> Vec<f64> {
    (0..n).map(|_| cdf.inverse(rng.random::<f64>())).collect()
}
