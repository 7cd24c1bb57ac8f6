//! Command-line front end; all logic lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use optree::dyadic::CountTable;
use optree::estimators::{clipped_renormalized, median_density, median_tree};
use optree::harness::{self, ExperimentConfig};
use optree::posterior::fit;
use optree::rng::{derive, rng_for};
use optree::trees::GWParams;
use optree::truths::{make_truth, sample_truth, TruthKind, TruthSpec};
use optree::uq::{band_multiscale, band_simple, cdf_band, MultiscaleWeights};

#[derive(Parser)]
#[command(
    name = "optree",
    about = "Optional Polya tree density estimation: simulate, fit, estimate, band",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw an i.i.d. sample from a ground-truth density.
    Simulate(SimulateArgs),
    /// Fit the posterior to a sample file.
    Fit(FitArgs),
    /// Export the median-tree density estimate from a fitted model.
    Estimate(EstimateArgs),
    /// Build a credible band around the median-tree estimate.
    Band(BandArgs),
    /// Build the credible band for the distribution function.
    CdfBand(CdfBandArgs),
    /// Re-run a packaged study.
    #[command(subcommand)]
    Reproduce(ReproduceCommand),
    /// Median-tree error against sample size, with the fitted log-log slope.
    RateStudy(RateStudyArgs),
    /// Run the whole pipeline (simulate, fit, estimate, all bands) into a
    /// directory.
    Pipeline(PipelineArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TruthArg {
    Triangular,
    ExpBrownian,
    Mixed,
    Sine,
}

impl From<TruthArg> for TruthKind {
    fn from(value: TruthArg) -> Self {
        match value {
            TruthArg::Triangular => TruthKind::Triangular,
            TruthArg::ExpBrownian => TruthKind::ExpBrownian,
            TruthArg::Mixed => TruthKind::Mixed,
            TruthArg::Sine => TruthKind::Sine,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    truth: TruthArg,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pin the Brownian truth path; defaults to a value derived from --seed.
    #[arg(long)]
    truth_seed: Option<u64>,
    /// Depth of the stored truth histogram.
    #[arg(long, default_value_t = 12)]
    resolution: usize,
    #[arg(long)]
    out: PathBuf,
    /// Also export the truth density as CSV.
    #[arg(long)]
    truth_out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    /// Prior split-probability decay per level.
    #[arg(long, default_value_t = 1.1)]
    gamma_split: f64,
    /// Beta mass-split parameter.
    #[arg(long, default_value_t = 1.0)]
    beta_a: f64,
    /// Flat-initialisation level: "auto" for ceil(sqrt(ln n)), or an integer.
    #[arg(long, default_value = "auto")]
    flat_init: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also export the median tree as JSON.
    #[arg(long)]
    tree_out: Option<PathBuf>,
    /// Also export the estimate's CDF as CSV.
    #[arg(long)]
    cdf_out: Option<PathBuf>,
    /// Clip negative cells and renormalize (display only).
    #[arg(long)]
    clip: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BandKind {
    Simple,
    Multiscale,
}

#[derive(Args)]
struct BandArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum)]
    kind: BandKind,
    /// Significance level gamma; the band targets credibility 1-gamma.
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    #[arg(long, default_value_t = 10_000)]
    draws: usize,
    #[arg(long, default_value_t = 0.501)]
    vn_exponent: f64,
    #[arg(long, default_value_t = 0.5)]
    w_delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Multiscale only: radius and per-level coefficient profile as JSON
    /// (defaults to the output path with a .json extension).
    #[arg(long)]
    json_out: Option<PathBuf>,
}

#[derive(Args)]
struct CdfBandArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    #[arg(long, default_value_t = 10_000)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum ReproduceCommand {
    /// Credibility table of the sup-norm band, the multiscale ball, and
    /// their intersection, on a fresh draw set.
    Table1(Table1Args),
}

#[derive(Args)]
struct Table1Args {
    #[arg(long, default_value_t = 10_000)]
    n: u64,
    #[arg(long, default_value_t = 10_000)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Significance levels, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.01, 0.05, 0.1, 0.15])]
    gammas: Vec<f64>,
    #[arg(long, value_enum, default_value_t = TruthArg::Triangular)]
    truth: TruthArg,
    /// Data replications; the default reading is a single dataset per n.
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RateStudyArgs {
    #[arg(long, value_enum)]
    truth: TruthArg,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    ns: Vec<u64>,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long, value_enum)]
    truth: TruthArg,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    draws: usize,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> optree::Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let spec = TruthSpec {
                kind: args.truth.into(),
                seed: derive(args.seed, 100),
                resolution: args.resolution,
            };
            let truth = make_truth(&spec)?;
            let data = sample_truth(&truth, args.n, &mut rng_for(derive(args.seed, 1), 0));
            harness::write_samples(&args.out, &data)?;
            if let Some(path) = args.truth_out {
                harness::write_histogram_csv(&path, &truth.density)?;
            }
            println!("wrote {} samples to {}", data.len(), args.out.display());
        }
        Command::Fit(args) => {
            let data = harness::read_samples(&args.input)?;
            let n = data.len() as u64;
            let (prior, clamped) = match args.flat_init.as_str() {
                "auto" => GWParams::for_sample_size(n, args.gamma_split)?,
                text => {
                    let flat: usize = text.parse().map_err(|_| optree::Error::MalformedSample {
                        path: "--flat-init".into(),
                        line: 0,
                        text: text.into(),
                    })?;
                    let budget = optree::trees::max_tree_depth(n);
                    (
                        GWParams::new(args.gamma_split, budget.max(flat + 1), flat)?,
                        budget < flat + 1,
                    )
                }
            };
            if clamped {
                eprintln!(
                    "warning: sample too small for the depth rule; clamped max depth to {}",
                    prior.max_depth
                );
            }
            let counts = CountTable::build(&data, prior.max_depth)?;
            let fp = fit(counts, prior, args.beta_a)?;
            harness::write_model_json(&args.out, &fp)?;
            println!(
                "fitted n={} at depth {} (flat init {}); wrote {}",
                n,
                prior.max_depth,
                prior.flat_init_level,
                args.out.display()
            );
        }
        Command::Estimate(args) => {
            let fp = harness::read_model_json(&args.model)?;
            let mt = median_tree(&fp);
            let mut estimate = median_density(&mt, fp.counts());
            if args.clip {
                estimate = clipped_renormalized(&estimate);
            }
            harness::write_histogram_csv(&args.out, &estimate)?;
            if let Some(path) = args.tree_out {
                harness::write_tree_json(&path, mt.tree())?;
            }
            if let Some(path) = args.cdf_out {
                harness::write_cdf_csv(&path, &estimate.cdf())?;
            }
            println!(
                "median tree depth {}, {} interior nodes; wrote {}",
                mt.depth(),
                mt.interior_count(),
                args.out.display()
            );
        }
        Command::Band(args) => {
            let fp = harness::read_model_json(&args.model)?;
            let mt = median_tree(&fp);
            match args.kind {
                BandKind::Simple => {
                    let band = band_simple(&fp, &mt, args.vn_exponent);
                    harness::write_density_band_csv(&args.out, &band)?;
                    println!("sup-norm band radius {}; wrote {}", band.radius, args.out.display());
                }
                BandKind::Multiscale => {
                    let weights = MultiscaleWeights::new(args.w_delta)?;
                    let band = band_multiscale(
                        &fp,
                        &mt,
                        args.level,
                        weights,
                        args.vn_exponent,
                        args.draws,
                        args.seed,
                    )?;
                    harness::write_density_band_csv(&args.out, &band.sup)?;
                    let json_out = args
                        .json_out
                        .unwrap_or_else(|| args.out.with_extension("json"));
                    harness::write_multiscale_meta_json(&json_out, &band, args.level)?;
                    println!(
                        "multiscale band: sup radius {}, scaled ball radius {}; wrote {} and {}",
                        band.sup.radius,
                        band.scaled_radius,
                        args.out.display(),
                        json_out.display()
                    );
                }
            }
        }
        Command::CdfBand(args) => {
            let fp = harness::read_model_json(&args.model)?;
            let mt = median_tree(&fp);
            let band = cdf_band(&fp, &mt, args.level, args.draws, args.seed)?;
            harness::write_cdf_band_csv(&args.out, &band)?;
            println!("cdf band radius {}; wrote {}", band.radius, args.out.display());
        }
        Command::Reproduce(ReproduceCommand::Table1(args)) => {
            let spec = TruthSpec {
                kind: args.truth.into(),
                seed: derive(args.seed, 100),
                resolution: 12,
            };
            let reports: Vec<_> = (0..args.reps.max(1))
                .map(|rep| {
                    let mut config =
                        ExperimentConfig::new(spec, args.n, derive(args.seed, rep as u64));
                    config.draws = args.draws;
                    harness::reproduce_table1(&config, &args.gammas)
                })
                .collect::<optree::Result<_>>()?;
            harness::write_json(&args.out, &reports)?;
            println!("gamma  sup-band  ms-ball  intersection  product");
            for (g, _) in args.gammas.iter().enumerate() {
                let mean = |f: fn(&harness::Table1Row) -> f64| {
                    reports.iter().map(|r| f(&r.rows[g])).sum::<f64>() / reports.len() as f64
                };
                println!(
                    "{:<6} {:<9.4} {:<8.4} {:<13.4} {:.4}",
                    args.gammas[g],
                    mean(|r| r.sup_band),
                    mean(|r| r.multiscale_ball),
                    mean(|r| r.intersection),
                    mean(|r| r.independence_product)
                );
            }
            if reports.len() > 1 {
                println!("(means over {} data replications)", reports.len());
            }
            println!("wrote {}", args.out.display());
        }
        Command::RateStudy(args) => {
            let spec = TruthSpec {
                kind: args.truth.into(),
                seed: derive(args.seed, 100),
                resolution: 12,
            };
            let report = harness::rate_study(&spec, &args.ns, args.reps, args.seed)?;
            harness::write_rate_csv(&args.out, &report)?;
            for row in &report.rows {
                println!(
                    "n={:<8} median error {:.5}  median depth {:.1}",
                    row.n, row.median_sup_error, row.median_depth
                );
            }
            println!("fitted log-log slope: {:.4}", report.slope);
            println!("wrote {}", args.out.display());
        }
        Command::Pipeline(args) => {
            let spec = TruthSpec {
                kind: args.truth.into(),
                seed: derive(args.seed, 100),
                resolution: 12,
            };
            let mut config = ExperimentConfig::new(spec, args.n, args.seed);
            config.draws = args.draws;
            config.level = args.level;
            let artifacts = harness::run_pipeline(&config, Some(&args.out_dir))?;
            let report = &artifacts.report;
            println!(
                "median tree depth {} ({} interior); sigma {:.4}; truth covered: simple={} multiscale={} cdf={}",
                report.median_depth,
                report.median_interior_count,
                report.sigma,
                report.truth_covered_simple,
                report.truth_covered_multiscale,
                report.truth_covered_cdf
            );
            println!("artifacts in {}", args.out_dir.display());
        }
    }
    Ok(())
}
