//! Experiment orchestration and file I/O.
//!
//! Everything here is a pure function of the configuration: data simulation,
//! posterior draws and replication loops all derive their generators from
//! the master seed, so reruns (serial or parallel) produce byte-identical
//! artifacts.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{CountTable, DyadicHistogram, PiecewiseLinearCdf};
use crate::error::{Error, Result};
use crate::estimators::{median_density, median_tree, MedianTree};
use crate::posterior::{fit, FittedPosterior, ModelFile};
use crate::rng::{derive, rng_for};
use crate::trees::{FullBinaryTree, GWParams};
use crate::truths::{make_truth, sample_truth, Truth, TruthSpec};
use crate::uq::{
    band_multiscale, band_simple, cdf_band, multiscale_distance, quantile_radius, CdfBand,
    DensityBand, MultiscaleBand, MultiscaleWeights,
};

const SALT_DATA: u64 = 1;
const SALT_CALIBRATION: u64 = 2;
const SALT_FRESH: u64 = 3;
const SALT_CDF: u64 = 4;
const SALT_REPLICATION: u64 = 5;

/// Full description of a single experiment. Defaults correspond to the
/// reference simulation setup: decay 1.1, mass-split parameter 1, automatic
/// flat initialisation `ceil(sqrt(ln n))`, 10^4 posterior draws,
/// significance 0.05, radius exponent 0.501, weight shift 0.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub truth: TruthSpec,
    pub n: u64,
    pub seed: u64,
    /// Prior split-probability decay per level.
    pub gamma_split: f64,
    /// Beta mass-split parameter.
    pub beta_a: f64,
    /// Flat-initialisation level; `None` selects `ceil(sqrt(ln n))`.
    pub flat_init: Option<usize>,
    /// Posterior draws per quantile calibration.
    pub draws: usize,
    /// Significance level; bands target credibility `1 - level`.
    pub level: f64,
    /// Exponent of the slowly diverging factor in the sup-norm radius.
    pub v_exponent: f64,
    /// Shift exponent of the multiscale level weights.
    pub weights_delta: f64,
    /// Replication count for coverage-style studies.
    pub replications: usize,
}

impl ExperimentConfig {
    pub fn new(truth: TruthSpec, n: u64, seed: u64) -> Self {
        ExperimentConfig {
            truth,
            n,
            seed,
            gamma_split: 1.1,
            beta_a: 1.0,
            flat_init: None,
            draws: 10_000,
            level: 0.05,
            v_exponent: 0.501,
            weights_delta: 0.5,
            replications: 50,
        }
    }

    /// Resolve the prior for this sample size. The second component flags
    /// that the depth budget had to be clamped up to `flat + 1`.
    pub fn prior(&self) -> Result<(GWParams, bool)> {
        match self.flat_init {
            None => GWParams::for_sample_size(self.n, self.gamma_split),
            Some(flat) => {
                let budget = crate::trees::max_tree_depth(self.n);
                let clamped = budget < flat + 1;
                Ok((
                    GWParams::new(self.gamma_split, budget.max(flat + 1), flat)?,
                    clamped,
                ))
            }
        }
    }
}

/// Truth, data and fitted posterior shared by the experiment drivers.
pub struct FittedExperiment {
    pub truth: Truth,
    pub data: Vec<f64>,
    pub posterior: FittedPosterior,
    pub depth_clamped: bool,
}

/// Simulate a dataset from the configured truth and fit the posterior.
pub fn fit_from_config(config: &ExperimentConfig) -> Result<FittedExperiment> {
    let truth = make_truth(&config.truth)?;
    let data = sample_truth(
        &truth,
        config.n as usize,
        &mut rng_for(derive(config.seed, SALT_DATA), 0),
    );
    let (prior, depth_clamped) = config.prior()?;
    let counts = CountTable::build(&data, prior.max_depth)?;
    let posterior = fit(counts, prior, config.beta_a)?;
    Ok(FittedExperiment {
        truth,
        data,
        posterior,
        depth_clamped,
    })
}

/// Headline numbers of a pipeline run; serialized as `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub config: ExperimentConfig,
    pub l_max: usize,
    pub l0: usize,
    pub depth_clamped: bool,
    pub median_depth: usize,
    pub median_interior_count: usize,
    pub log_marginal: f64,
    pub sigma: f64,
    pub scaled_multiscale_radius: f64,
    pub cdf_radius: f64,
    pub truth_covered_simple: bool,
    pub truth_covered_multiscale: bool,
    pub truth_covered_cdf: bool,
}

/// Everything a pipeline run produces, kept in memory.
pub struct PipelineArtifacts {
    pub report: PipelineReport,
    pub experiment: FittedExperiment,
    pub median: MedianTree,
    pub center: DyadicHistogram,
    pub simple: DensityBand,
    pub multiscale: MultiscaleBand,
    pub cdf: CdfBand,
}

/// Run the full pipeline: simulate, fit, extract the median tree, build all
/// three bands, evaluate them against the truth, and (optionally) export
/// every artifact under `out_dir`.
pub fn run_pipeline(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<PipelineArtifacts> {
    let experiment = fit_from_config(config)?;
    let fp = &experiment.posterior;
    let median = median_tree(fp);
    let center = median_density(&median, fp.counts());

    let weights = MultiscaleWeights::new(config.weights_delta)?;
    let simple = band_simple(fp, &median, config.v_exponent);
    let multiscale = band_multiscale(
        fp,
        &median,
        config.level,
        weights,
        config.v_exponent,
        config.draws,
        derive(config.seed, SALT_CALIBRATION),
    )?;
    let cdf = cdf_band(
        fp,
        &median,
        config.level,
        config.draws,
        derive(config.seed, SALT_CDF),
    )?;

    let report = PipelineReport {
        config: config.clone(),
        l_max: fp.prior().max_depth,
        l0: fp.prior().flat_init_level,
        depth_clamped: experiment.depth_clamped,
        median_depth: median.depth(),
        median_interior_count: median.interior_count(),
        log_marginal: fp.log_marginal(),
        sigma: simple.radius,
        scaled_multiscale_radius: multiscale.scaled_radius,
        cdf_radius: cdf.radius,
        truth_covered_simple: simple.contains(&experiment.truth.density),
        truth_covered_multiscale: multiscale.contains(&experiment.truth.density),
        truth_covered_cdf: cdf.contains(&experiment.truth.cdf),
    };

    let artifacts = PipelineArtifacts {
        report,
        experiment,
        median,
        center,
        simple,
        multiscale,
        cdf,
    };
    if let Some(dir) = out_dir {
        export_pipeline(&artifacts, dir)?;
    }
    Ok(artifacts)
}

fn export_pipeline(artifacts: &PipelineArtifacts, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let report = &artifacts.report;
    write_json(&dir.join("manifest.json"), &report.config)?;
    write_json(&dir.join("report.json"), report)?;
    write_samples(&dir.join("samples.txt"), &artifacts.experiment.data)?;
    write_model_json(&dir.join("model.json"), &artifacts.experiment.posterior)?;
    write_tree_json(&dir.join("median_tree.json"), artifacts.median.tree())?;
    write_histogram_csv(&dir.join("median.csv"), &artifacts.center)?;
    write_histogram_csv(&dir.join("truth.csv"), &artifacts.experiment.truth.density)?;
    write_cdf_csv(&dir.join("median_cdf.csv"), &artifacts.center.cdf())?;
    write_density_band_csv(&dir.join("band_simple.csv"), &artifacts.simple)?;
    write_density_band_csv(&dir.join("band_multiscale.csv"), &artifacts.multiscale.sup)?;
    write_multiscale_meta_json(&dir.join("band_multiscale.json"), &artifacts.multiscale, report.config.level)?;
    write_cdf_band_csv(&dir.join("cdf_band.csv"), &artifacts.cdf)?;
    Ok(())
}

/// One row of the credibility table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub gamma: f64,
    /// Credibility of the sup-norm quantile band.
    pub sup_band: f64,
    pub sup_band_se: f64,
    /// Credibility of the multiscale quantile ball.
    pub multiscale_ball: f64,
    pub multiscale_ball_se: f64,
    /// Credibility of their intersection.
    pub intersection: f64,
    pub intersection_se: f64,
    /// Product of the two single-set credibilities.
    pub independence_product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Report {
    pub config: ExperimentConfig,
    pub rows: Vec<Table1Row>,
}

/// Reproduce the credibility table: calibrate the sup-norm quantile band
/// and the multiscale ball on one draw set, then estimate the credibility
/// of each set and of their intersection on a fresh draw set of the same
/// size.
pub fn reproduce_table1(config: &ExperimentConfig, gammas: &[f64]) -> Result<Table1Report> {
    let experiment = fit_from_config(config)?;
    let fp = &experiment.posterior;
    let median = median_tree(fp);
    let center = median_density(&median, fp.counts());
    let weights = MultiscaleWeights::new(config.weights_delta)?;
    let max_level = fp.max_depth();
    let sqrt_n = (fp.n() as f64).sqrt();

    let distances = |seed: u64| -> Vec<(f64, f64)> {
        (0..config.draws as u64)
            .into_par_iter()
            .map(|i| {
                let g = fp.sample_density(&mut rng_for(seed, i));
                let sup = center.sup_distance(&g);
                let ms = sqrt_n * multiscale_distance(&g, &center, &weights, max_level);
                (sup, ms)
            })
            .collect()
    };
    let calibration = distances(derive(config.seed, SALT_CALIBRATION));
    let fresh = distances(derive(config.seed, SALT_FRESH));

    let sup_cal: Vec<f64> = calibration.iter().map(|d| d.0).collect();
    let ms_cal: Vec<f64> = calibration.iter().map(|d| d.1).collect();
    let m = fresh.len() as f64;
    let se = |p: f64| (p * (1.0 - p) / m).sqrt();

    let mut rows = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        let sup_radius = quantile_radius(&sup_cal, gamma)?;
        let ms_radius = quantile_radius(&ms_cal, gamma)?;
        let mut in_sup = 0usize;
        let mut in_ms = 0usize;
        let mut in_both = 0usize;
        for &(sup, ms) in &fresh {
            let s = sup <= sup_radius;
            let m = ms <= ms_radius;
            in_sup += s as usize;
            in_ms += m as usize;
            in_both += (s && m) as usize;
        }
        let sup_band = in_sup as f64 / m;
        let multiscale_ball = in_ms as f64 / m;
        let intersection = in_both as f64 / m;
        rows.push(Table1Row {
            gamma,
            sup_band,
            sup_band_se: se(sup_band),
            multiscale_ball,
            multiscale_ball_se: se(multiscale_ball),
            intersection,
            intersection_se: se(intersection),
            independence_product: sup_band * multiscale_ball,
        });
    }
    Ok(Table1Report {
        config: config.clone(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: u64,
    pub median_sup_error: f64,
    pub median_depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateStudyReport {
    pub rows: Vec<RateRow>,
    /// Least-squares slope of `ln(median error)` against `ln n`.
    pub slope: f64,
}

/// Median sup-norm error of the median-tree estimate across replications,
/// for each sample size, plus the fitted log-log slope.
pub fn rate_study(
    truth_spec: &TruthSpec,
    ns: &[u64],
    replications: usize,
    seed: u64,
) -> Result<RateStudyReport> {
    let truth = make_truth(truth_spec)?;
    let mut rows = Vec::with_capacity(ns.len());
    for (i, &n) in ns.iter().enumerate() {
        let per_rep: Vec<(f64, usize)> = (0..replications)
            .into_par_iter()
            .map(|rep| -> Result<(f64, usize)> {
                let rep_seed = derive(seed, SALT_REPLICATION + (i * replications + rep) as u64);
                let data = sample_truth(&truth, n as usize, &mut rng_for(rep_seed, 0));
                let (prior, _) = GWParams::for_sample_size(n, 1.1)?;
                let counts = CountTable::build(&data, prior.max_depth)?;
                let fp = fit(counts, prior, 1.0)?;
                let mt = median_tree(&fp);
                let estimate = median_density(&mt, fp.counts());
                Ok((estimate.sup_distance(&truth.density), mt.depth()))
            })
            .collect::<Result<_>>()?;
        let errors: Vec<f64> = per_rep.iter().map(|r| r.0).collect();
        let depths: Vec<f64> = per_rep.iter().map(|r| r.1 as f64).collect();
        rows.push(RateRow {
            n,
            median_sup_error: median(errors),
            median_depth: median(depths),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.median_sup_error.ln()).collect();
    Ok(RateStudyReport {
        rows,
        slope: least_squares_slope(&xs, &ys),
    })
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    sxy / sxx
}

// --- file formats -----------------------------------------------------

/// Read a sample file: one decimal number per line, each in `[0,1)`.
/// Blank lines are ignored.
pub fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let value: f64 = text.parse().map_err(|_| Error::MalformedSample {
            path: path.display().to_string(),
            line: i + 1,
            text: text.to_string(),
        })?;
        if !(0.0..1.0).contains(&value) {
            return Err(Error::SampleOutOfRange(value));
        }
        out.push(value);
    }
    Ok(out)
}

pub fn write_samples(path: &Path, data: &[f64]) -> Result<()> {
    let mut w = writer(path)?;
    for x in data {
        writeln!(w, "{x}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// CSV with columns `left,right,height`.
pub fn write_histogram_csv(path: &Path, h: &DyadicHistogram) -> Result<()> {
    let mut w = writer(path)?;
    (|| -> std::io::Result<()> {
        writeln!(w, "left,right,height")?;
        for &(node, height) in h.cells() {
            let (left, right) = node.interval();
            writeln!(w, "{left},{right},{height}")?;
        }
        w.flush()
    })()
    .map_err(|e| Error::io(path, e))
}

/// CSV with columns `t,cdf`, one row per breakpoint.
pub fn write_cdf_csv(path: &Path, cdf: &PiecewiseLinearCdf) -> Result<()> {
    let mut w = writer(path)?;
    (|| -> std::io::Result<()> {
        writeln!(w, "t,cdf")?;
        let (xs, ys) = cdf.breakpoints();
        for (x, y) in xs.iter().zip(ys) {
            writeln!(w, "{x},{y}")?;
        }
        w.flush()
    })()
    .map_err(|e| Error::io(path, e))
}

/// CSV with columns `left,right,center_height,lower,upper` where
/// `lower/upper = center -+ radius`.
pub fn write_density_band_csv(path: &Path, band: &DensityBand) -> Result<()> {
    let mut w = writer(path)?;
    (|| -> std::io::Result<()> {
        writeln!(w, "left,right,center_height,lower,upper")?;
        for &(node, height) in band.center.cells() {
            let (left, right) = node.interval();
            writeln!(
                w,
                "{left},{right},{height},{},{}",
                height - band.radius,
                height + band.radius
            )?;
        }
        w.flush()
    })()
    .map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct MultiscaleMeta<'a> {
    gamma: f64,
    weights_delta: f64,
    scaled_radius: f64,
    ball_radius: f64,
    sup_radius: f64,
    level_max_coefficients: &'a [f64],
}

/// JSON companion of the multiscale band: the rescaled quantile radius and
/// the per-level maxima of coefficient deviations seen in calibration.
pub fn write_multiscale_meta_json(path: &Path, band: &MultiscaleBand, gamma: f64) -> Result<()> {
    let delta = match &band.ball.norm {
        crate::uq::DensityNorm::Multiscale { weights, .. } => weights.delta(),
        crate::uq::DensityNorm::Sup => unreachable!("ball norm is multiscale"),
    };
    write_json(
        path,
        &MultiscaleMeta {
            gamma,
            weights_delta: delta,
            scaled_radius: band.scaled_radius,
            ball_radius: band.ball.radius,
            sup_radius: band.sup.radius,
            level_max_coefficients: &band.level_profile,
        },
    )
}

/// CSV with columns `t,center,lower,upper`, one row per breakpoint of the
/// center CDF.
pub fn write_cdf_band_csv(path: &Path, band: &CdfBand) -> Result<()> {
    let mut w = writer(path)?;
    (|| -> std::io::Result<()> {
        writeln!(w, "t,center,lower,upper")?;
        let (xs, ys) = band.center.breakpoints();
        for (x, y) in xs.iter().zip(ys) {
            writeln!(w, "{x},{y},{},{}", y - band.radius, y + band.radius)?;
        }
        w.flush()
    })()
    .map_err(|e| Error::io(path, e))
}

/// JSON list of `[l,k]` pairs, sorted by `(l,k)`.
pub fn write_tree_json(path: &Path, tree: &FullBinaryTree) -> Result<()> {
    write_json(path, &tree.node_pairs())
}

pub fn read_tree_json(path: &Path) -> Result<FullBinaryTree> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let pairs: Vec<[usize; 2]> = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    FullBinaryTree::from_node_pairs(&pairs)
}

pub fn write_model_json(path: &Path, fp: &FittedPosterior) -> Result<()> {
    write_json(path, &ModelFile::from_posterior(fp))
}

pub fn read_model_json(path: &Path) -> Result<FittedPosterior> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let model: ModelFile = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    model.into_posterior()
}

/// CSV with columns `draw,left,right,height`: the leaf list of each draw.
pub fn write_draws_csv(path: &Path, draws: &[DyadicHistogram]) -> Result<()> {
    let mut w = writer(path)?;
    (|| -> std::io::Result<()> {
        writeln!(w, "draw,left,right,height")?;
        for (i, h) in draws.iter().enumerate() {
            for &(node, height) in h.cells() {
                let (left, right) = node.interval();
                writeln!(w, "{i},{left},{right},{height}")?;
            }
        }
        w.flush()
    })()
    .map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::json(path, e))?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn writer(path: &Path) -> Result<BufWriter<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(BufWriter::new(file))
}

/// Rate-study CSV with columns `n,median_sup_error,median_depth`.
pub fn write_rate_csv(path: &Path, report: &RateStudyReport) -> Result<()> {
    let mut w = writer(path)?;
    (|| -> std::io::Result<()> {
        writeln!(w, "n,median_sup_error,median_depth")?;
        for row in &report.rows {
            writeln!(w, "{},{},{}", row.n, row.median_sup_error, row.median_depth)?;
        }
        w.flush()
    })()
    .map_err(|e| Error::io(path, e))
}
