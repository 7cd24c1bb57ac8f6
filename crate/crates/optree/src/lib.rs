//! Optional Polya tree density estimation on `[0,1)`.
//!
//! The prior grows a random dyadic partition tree by Galton-Watson
//! branching and fills it with Beta mass splits. The posterior is conjugate
//! and computed exactly by a bottom-up log-space recursion; from it the
//! crate provides posterior sampling, the median-tree point estimator, and
//! three uncertainty constructions: a sup-norm band with deterministic
//! radius, a multiscale band calibrated on posterior draws, and a band for
//! the distribution function.
//!
//! Quick tour:
//!
//! ```
//! use optree::dyadic::CountTable;
//! use optree::estimators::{median_density, median_tree};
//! use optree::posterior::fit;
//! use optree::trees::GWParams;
//!
//! let data: Vec<f64> = (0..500).map(|i| (i as f64 + 0.5) / 500.0 * 0.5).collect();
//! let (prior, _) = GWParams::for_sample_size(data.len() as u64, 1.1).unwrap();
//! let counts = CountTable::build(&data, prior.max_depth).unwrap();
//! let posterior = fit(counts, prior, 1.0).unwrap();
//! let tree = median_tree(&posterior);
//! let estimate = median_density(&tree, posterior.counts());
//! assert!((estimate.integral() - 1.0).abs() < 1e-12);
//! ```
//!
//! The runnable examples under `examples/` walk through each capability;
//! the `optree` binary exposes the same pipeline as subcommands.

pub mod dyadic;
mod error;
pub mod estimators;
pub mod harness;
pub mod posterior;
pub mod rng;
pub mod trees;
pub mod truths;
pub mod uq;

pub use error::{Error, Result};
