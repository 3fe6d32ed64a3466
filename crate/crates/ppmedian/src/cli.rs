//! Command-line surface: a thin shell over the library.
//!
//! Five subcommands: `simulate` writes one realization as a pattern file,
//! `estimate` runs a single estimator on a pattern file, `experiment`
//! executes a Monte Carlo grid from a TOML config, `median-figure`
//! tabulates exact Poisson and jittered medians, and `diagnostics` checks
//! the estimator's asymptotic distribution numerically.
//!
//! All data outputs are deterministic given `--seed`; `experiment
//! --deterministic` additionally zeroes the wall-time column and drops the
//! manifest timestamp so reruns are byte-identical at any worker count.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::estimators::{
    estimate_median_j, estimate_median_j2, estimate_std, estimate_voronoi, JitterFunction,
};
use crate::experiments::{run_experiment, ExperimentConfig, TimingColumn};
use crate::geometry::Window;
use crate::io::{read_pattern_file, write_pattern_file};
use crate::models::{ModelConfig, ModelSimulator};
use crate::rng::{substream, RandomStream};
use crate::theory::{clt_diagnostics, exact_jittered_median, poisson_integer_median};

#[derive(Parser, Debug)]
#[command(
    name = "ppmedian",
    version,
    about = "Simulation and robust median-based intensity estimation for spatial point processes"
)]
pub struct Cli {
    /// Worker threads for parallel sections (default: all logical cores).
    #[arg(long, global = true, env = "PPMEDIAN_WORKERS")]
    pub workers: Option<usize>,
    /// Random seed. `experiment` overrides the config's master_seed with
    /// it; `median-figure` is exact and ignores it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate one realization of a point process model.
    Simulate(SimulateArgs),
    /// Estimate the intensity of a pattern file.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo experiment from a TOML config file.
    Experiment(ExperimentArgs),
    /// Tabulate exact Poisson and jittered medians over a grid of means.
    MedianFigure(MedianFigureArgs),
    /// Numerical checks of the jittered median's limiting distribution.
    Diagnostics(DiagnosticsArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModelKind {
    Poisson,
    Lgcp,
    Thomas,
    MaternCluster,
    Phc,
}

/// Model selection shared by `simulate` and `diagnostics`. Which value
/// flags are required depends on `--model`; unused ones are rejected.
#[derive(Args, Debug)]
pub struct ModelFlags {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// Intensity (poisson, lgcp).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Log-field marginal variance (lgcp).
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Log-field correlation scale (lgcp).
    #[arg(long)]
    pub scale: Option<f64>,
    /// Field pixel size; defaults to scale/2 (lgcp).
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Parent intensity (thomas, matern-cluster).
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Mean offspring per parent (thomas, matern-cluster).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Offspring displacement scale (thomas, matern-cluster).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Reference intensity of the hard-core chain (phc).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Hard-core distance (phc).
    #[arg(long = "hard-core", alias = "R")]
    pub hard_core: Option<f64>,
    /// Birth-death chain length; defaults to a window-scaled value (phc).
    #[arg(long)]
    pub mh_steps: Option<u64>,
}

impl ModelFlags {
    pub fn build(&self) -> Result<ModelConfig> {
        fn need(value: Option<f64>, flag: &str, model: &str) -> Result<f64> {
            value.ok_or_else(|| Error::Config(format!("--{flag} is required for --model {model}")))
        }
        fn reject_unused(pairs: &[(&str, bool)], model: &str) -> Result<()> {
            for (flag, present) in pairs {
                if *present {
                    return Err(Error::Config(format!(
                        "--{flag} does not apply to --model {model}"
                    )));
                }
            }
            Ok(())
        }
        let config = match self.model {
            ModelKind::Poisson => {
                reject_unused(
                    &[
                        ("sigma2", self.sigma2.is_some()),
                        ("scale", self.scale.is_some()),
                        ("spacing", self.spacing.is_some()),
                        ("kappa", self.kappa.is_some()),
                        ("alpha", self.alpha.is_some()),
                        ("sigma", self.sigma.is_some()),
                        ("beta", self.beta.is_some()),
                        ("hard-core", self.hard_core.is_some()),
                        ("mh-steps", self.mh_steps.is_some()),
                    ],
                    "poisson",
                )?;
                ModelConfig::Poisson { lambda: need(self.lambda, "lambda", "poisson")? }
            }
            ModelKind::Lgcp => {
                reject_unused(
                    &[
                        ("kappa", self.kappa.is_some()),
                        ("alpha", self.alpha.is_some()),
                        ("sigma", self.sigma.is_some()),
                        ("beta", self.beta.is_some()),
                        ("hard-core", self.hard_core.is_some()),
                        ("mh-steps", self.mh_steps.is_some()),
                    ],
                    "lgcp",
                )?;
                ModelConfig::Lgcp {
                    lambda: need(self.lambda, "lambda", "lgcp")?,
                    sigma2: need(self.sigma2, "sigma2", "lgcp")?,
                    scale: need(self.scale, "scale", "lgcp")?,
                    spacing: self.spacing,
                }
            }
            ModelKind::Thomas | ModelKind::MaternCluster => {
                let name = match self.model {
                    ModelKind::Thomas => "thomas",
                    _ => "matern-cluster",
                };
                reject_unused(
                    &[
                        ("lambda", self.lambda.is_some()),
                        ("sigma2", self.sigma2.is_some()),
                        ("scale", self.scale.is_some()),
                        ("spacing", self.spacing.is_some()),
                        ("beta", self.beta.is_some()),
                        ("hard-core", self.hard_core.is_some()),
                        ("mh-steps", self.mh_steps.is_some()),
                    ],
                    name,
                )?;
                let kappa = need(self.kappa, "kappa", name)?;
                let alpha = need(self.alpha, "alpha", name)?;
                let sigma = need(self.sigma, "sigma", name)?;
                match self.model {
                    ModelKind::Thomas => ModelConfig::Thomas { kappa, alpha, sigma },
                    _ => ModelConfig::MaternCluster { kappa, alpha, sigma },
                }
            }
            ModelKind::Phc => {
                reject_unused(
                    &[
                        ("lambda", self.lambda.is_some()),
                        ("sigma2", self.sigma2.is_some()),
                        ("scale", self.scale.is_some()),
                        ("spacing", self.spacing.is_some()),
                        ("kappa", self.kappa.is_some()),
                        ("alpha", self.alpha.is_some()),
                        ("sigma", self.sigma.is_some()),
                    ],
                    "phc",
                )?;
                ModelConfig::PoissonHardCore {
                    beta: need(self.beta, "beta", "phc")?,
                    hard_core: need(self.hard_core, "hard-core", "phc")?,
                    mh_steps: self.mh_steps,
                }
            }
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    /// Window half-side; the window is [-n, n]^2.
    #[arg(long = "n")]
    pub half_side: f64,
    /// Substream index, for drawing several independent realizations under
    /// one seed.
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Output pattern file; stdout when omitted.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EstimatorKind {
    Std,
    MedianJ,
    MedianJ2,
    Voronoi,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// Pattern file as written by `simulate`.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = EstimatorKind::Std)]
    pub estimator: EstimatorKind,
    /// Tessellation cells per side s, so k_n = s^2 (median estimators).
    #[arg(long, default_value_t = 3)]
    pub cells_per_side: u32,
    /// Jitter function: identity, sqrt, or power:<p> (median estimators).
    #[arg(long, default_value = "identity")]
    pub jitter: String,
    /// Trim fraction per tail (voronoi).
    #[arg(long, default_value_t = 0.05)]
    pub trim: f64,
    /// Dummy points per side (voronoi).
    #[arg(long, default_value_t = 200)]
    pub grid_per_side: u32,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// Experiment configuration file (TOML).
    pub config: PathBuf,
    /// Directory for records.csv, aggregates.csv, and manifest.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Zero the seconds column and omit the manifest timestamp so reruns
    /// are byte-identical.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Args, Debug)]
pub struct MedianFigureArgs {
    /// Smallest mean on the grid.
    #[arg(long, default_value_t = 0.5)]
    pub nu_min: f64,
    /// Largest mean on the grid.
    #[arg(long, default_value_t = 30.0)]
    pub nu_max: f64,
    /// Grid step.
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    /// Jitter functions to tabulate, comma separated (identity, sqrt,
    /// power:<p>).
    #[arg(long, default_value = "identity", value_delimiter = ',')]
    pub jitter: Vec<String>,
    /// CSV output path; stdout when omitted.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot of the median offsets.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DiagnosticsArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    /// Window half-sides, comma separated.
    #[arg(long = "n", value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0])]
    pub half_sides: Vec<f64>,
    /// Tessellation cells per side s, so k_n = s^2.
    #[arg(long, default_value_t = 3)]
    pub cells_per_side: u32,
    #[arg(long, default_value_t = 1000)]
    pub replications: usize,
    /// Jitter function: identity, sqrt, or power:<p>.
    #[arg(long, default_value = "identity")]
    pub jitter: String,
    /// JSON output path; a summary table always goes to stdout.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

/// Entry point used by the binary. Returns the process exit message on
/// error; prints results to stdout on success.
pub fn run(cli: Cli) -> Result<()> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(Error::Config("--workers must be >= 1".into()));
        }
        // Ignore the error when a global pool already exists (e.g. when
        // called twice in-process from tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    }
    let seed = cli.seed;
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args, seed.unwrap_or(0)),
        Command::Estimate(args) => cmd_estimate(args, seed.unwrap_or(0)),
        Command::Experiment(args) => cmd_experiment(args, seed),
        Command::MedianFigure(args) => cmd_median_figure(args),
        Command::Diagnostics(args) => cmd_diagnostics(args, seed.unwrap_or(0)),
    }
}

fn cmd_simulate(args: SimulateArgs, seed: u64) -> Result<()> {
    let config = args.model.build()?;
    let window = Window::<2>::new(args.half_side)?;
    let simulator = ModelSimulator::new(config, window)?;
    let pattern = simulator.simulate(substream(seed, args.stream))?;
    match &args.out {
        Some(path) => {
            write_pattern_file(path, &pattern)?;
            println!("{}", pattern.len());
        }
        None => {
            print!("{}", crate::io::pattern_to_string(&pattern));
            eprintln!("{}", pattern.len());
        }
    }
    Ok(())
}

fn cmd_estimate(args: EstimateArgs, seed: u64) -> Result<()> {
    let pattern = read_pattern_file(&args.input)?;
    let result = match args.estimator {
        EstimatorKind::Std => estimate_std(&pattern),
        EstimatorKind::MedianJ => estimate_median_j(
            &pattern,
            args.cells_per_side,
            JitterFunction::parse(&args.jitter)?,
            RandomStream::new(seed),
        )?,
        EstimatorKind::MedianJ2 => estimate_median_j2(
            &pattern,
            args.cells_per_side,
            JitterFunction::parse(&args.jitter)?,
            RandomStream::new(seed),
        )?,
        EstimatorKind::Voronoi => {
            estimate_voronoi(&pattern, args.grid_per_side, args.trim)?
        }
    };
    println!("{} {:.10}", result.id.as_str(), result.value);
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs, seed: Option<u64>) -> Result<()> {
    let text = fs::read_to_string(&args.config)?;
    let mut config = ExperimentConfig::from_toml_str(&text)?;
    if let Some(seed) = seed {
        config.master_seed = seed;
    }
    let report = run_experiment(&config)?;
    let timing = if args.deterministic { TimingColumn::Zeroed } else { TimingColumn::Measured };

    fs::create_dir_all(&args.out_dir)?;
    let records_path = args.out_dir.join("records.csv");
    let aggregates_path = args.out_dir.join("aggregates.csv");
    let manifest_path = args.out_dir.join("manifest.json");
    fs::write(&records_path, report.records_csv(timing))?;
    fs::write(&aggregates_path, report.aggregates_csv())?;
    fs::write(&manifest_path, report.manifest_json(timing, "records.csv", "aggregates.csv")?)?;

    for r in &report.references {
        println!("reference intensity at n={}: {:.6} ({})", r.half_side, r.value, match r.source {
            crate::experiments::ReferenceSource::Analytic => "analytic".to_string(),
            crate::experiments::ReferenceSource::Provided => "provided".to_string(),
            crate::experiments::ReferenceSource::Calibrated { replications } => {
                format!("calibrated over {replications} replications")
            }
        });
    }
    println!(
        "{} records, {} aggregate rows, {} failures",
        report.records.len(),
        report.aggregates.len(),
        report.failures.len()
    );
    for path in [&records_path, &aggregates_path, &manifest_path] {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_median_figure(args: MedianFigureArgs) -> Result<()> {
    if !(args.nu_min > 0.0) || !args.nu_min.is_finite() {
        return Err(Error::Config("--nu-min must be finite and > 0".into()));
    }
    if args.nu_max < args.nu_min || !args.nu_max.is_finite() {
        return Err(Error::Config("--nu-max must be finite and >= --nu-min".into()));
    }
    if !(args.step > 0.0) || !args.step.is_finite() {
        return Err(Error::Config("--step must be finite and > 0".into()));
    }
    let jitters = args
        .jitter
        .iter()
        .map(|label| JitterFunction::parse(label))
        .collect::<Result<Vec<_>>>()?;

    let steps = ((args.nu_max - args.nu_min) / args.step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| args.nu_min + i as f64 * args.step).collect();

    let mut csv = String::from(
        "nu,jitter,integer_median,integer_offset,jittered_median,jittered_offset\n",
    );
    let mut curves: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    let mut integer_curve: Vec<(f64, f64)> = Vec::new();
    for jitter in &jitters {
        let mut curve = Vec::with_capacity(grid.len());
        for &nu in &grid {
            let integer = poisson_integer_median(nu);
            let report = exact_jittered_median(nu, *jitter)?;
            let integer_offset = integer as f64 - nu;
            writeln!(
                csv,
                "{nu},{},{integer},{integer_offset:.10},{:.10},{:.10}",
                jitter.label(),
                report.jittered_median,
                report.offset
            )
            .expect("write to string");
            curve.push((nu, report.offset));
            if curves.is_empty() {
                integer_curve.push((nu, integer_offset));
            }
        }
        curves.push((jitter.label(), curve));
    }

    match &args.out {
        Some(path) => {
            fs::write(path, &csv)?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    if let Some(path) = &args.svg {
        fs::write(path, median_offset_svg(&integer_curve, &curves))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Hand-rolled SVG: the integer-median offset staircase in grey, one
/// colored polyline per jitter function, and dashed guides at the
/// stationary bounds -log 2 and 1/3. No external assets, no timestamps.
fn median_offset_svg(integer_curve: &[(f64, f64)], curves: &[(String, Vec<(f64, f64)>)]) -> String {
    const W: f64 = 720.0;
    const H: f64 = 420.0;
    const MARGIN: f64 = 52.0;
    let x_min = integer_curve.first().map(|p| p.0).unwrap_or(0.0);
    let x_max = integer_curve.last().map(|p| p.0).unwrap_or(1.0);
    let y_min = -0.85;
    let y_max = 1.1;
    let sx = |x: f64| MARGIN + (x - x_min) / (x_max - x_min) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y_min) / (y_max - y_min) * (H - 2.0 * MARGIN);
    let polyline = |points: &[(f64, f64)], style: &str| {
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y.clamp(y_min, y_max))))
            .collect();
        format!("<polyline fill=\"none\" {style} points=\"{}\"/>\n", coords.join(" "))
    };

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    );
    // Axes.
    let _ = writeln!(
        svg,
        "<line x1=\"{0:.2}\" y1=\"{1:.2}\" x2=\"{2:.2}\" y2=\"{1:.2}\" stroke=\"black\"/>",
        sx(x_min),
        sy(y_min),
        sx(x_max)
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{0:.2}\" y1=\"{1:.2}\" x2=\"{0:.2}\" y2=\"{2:.2}\" stroke=\"black\"/>",
        sx(x_min),
        sy(y_min),
        sy(y_max)
    );
    for y in [-0.5, 0.0, 0.5, 1.0] {
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{y}</text>",
            sx(x_min) - 6.0,
            sy(y) + 4.0
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{2:.2}\" x2=\"{:.2}\" y2=\"{2:.2}\" stroke=\"#dddddd\"/>",
            sx(x_min),
            sx(x_max),
            sy(y)
        );
    }
    let x_step = ((x_max - x_min) / 6.0).max(1.0).round();
    let mut x = x_min.ceil();
    while x <= x_max {
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x}</text>",
            sx(x),
            sy(y_min) + 16.0
        );
        x += x_step;
    }
    // Stationary bounds of the integer-median offset.
    for (y, label) in [(1.0 / 3.0, "1/3"), (-std::f64::consts::LN_2, "-log 2")] {
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{2:.2}\" x2=\"{:.2}\" y2=\"{2:.2}\" \
             stroke=\"#888888\" stroke-dasharray=\"5,4\"/>",
            sx(x_min),
            sx(x_max),
            sy(y)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#555555\">{label}</text>",
            sx(x_max) + 4.0,
            sy(y) + 4.0
        );
    }
    svg.push_str(&polyline(integer_curve, "stroke=\"#999999\" stroke-width=\"1\""));
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
    for (i, (label, curve)) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        svg.push_str(&polyline(curve, &format!("stroke=\"{color}\" stroke-width=\"1.5\"")));
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"{color}\">{label}</text>",
            sx(x_min) + 10.0,
            sy(y_max) + 14.0 * (i + 1) as f64
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">mean</text>",
        (sx(x_min) + sx(x_max)) / 2.0,
        H - 8.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"14\" y=\"{:.2}\" transform=\"rotate(-90 14 {0:.2})\" \
         text-anchor=\"middle\">median - mean</text>",
        (sy(y_min) + sy(y_max)) / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}

fn cmd_diagnostics(args: DiagnosticsArgs, seed: u64) -> Result<()> {
    let config = args.model.build()?;
    let jitter = JitterFunction::parse(&args.jitter)?;
    let report = clt_diagnostics(
        &config,
        &args.half_sides,
        args.cells_per_side,
        args.replications,
        jitter,
        RandomStream::new(seed),
    )?;

    println!(
        "model {}, jitter {}, sigma^2 {:.4}, k_n {}",
        report.model,
        report.jitter.label(),
        report.sigma2.value,
        args.cells_per_side * args.cells_per_side,
    );
    println!(
        "{:>6} {:>12} {:>14} {:>14} {:>8} {:>12} {:>10}",
        "n", "var(cdf)", "var(scaled)", "target", "ratio", "density", "coverage"
    );
    for row in &report.rows {
        let var_cdf = row
            .var_cdf_statistic
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|| "-".into());
        let density = row
            .density_scaled
            .map(|v| format!("{v:.6}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:>6} {:>12} {:>14.3} {:>14.3} {:>8.3} {:>12} {:>10.3}",
            row.half_side,
            var_cdf,
            row.var_scaled_error,
            row.target_scaled_variance,
            row.variance_ratio,
            density,
            row.ci_coverage
        );
    }
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| Error::Config(format!("diagnostics not serializable: {e}")))?;
        fs::write(path, json)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn model_flags_require_and_reject_per_kind() {
        let parse = |argv: &[&str]| {
            let mut full = vec!["ppmedian", "simulate", "--n", "1"];
            full.extend_from_slice(argv);
            Cli::try_parse_from(full)
        };
        let build = |argv: &[&str]| -> Result<ModelConfig> {
            match parse(argv).unwrap().command {
                Command::Simulate(args) => args.model.build(),
                _ => unreachable!(),
            }
        };

        assert!(build(&["--model", "poisson", "--lambda", "5"]).is_ok());
        assert!(build(&["--model", "poisson"]).is_err());
        assert!(build(&["--model", "poisson", "--lambda", "5", "--kappa", "2"]).is_err());
        assert!(build(&[
            "--model", "lgcp", "--lambda", "5", "--sigma2", "0.5", "--scale", "0.02"
        ])
        .is_ok());
        assert!(build(&["--model", "lgcp", "--lambda", "5", "--sigma2", "0.5"]).is_err());
        assert!(build(&[
            "--model", "thomas", "--kappa", "25", "--alpha", "4", "--sigma", "0.03"
        ])
        .is_ok());
        assert!(build(&["--model", "phc", "--beta", "200", "--hard-core", "0.05"]).is_ok());
        // --R is an alias for --hard-core.
        assert!(build(&["--model", "phc", "--beta", "200", "--R", "0.05"]).is_ok());
        assert!(build(&["--model", "phc", "--beta", "200"]).is_err());
    }

    #[test]
    fn median_figure_grid_is_inclusive() {
        let args = match Cli::try_parse_from([
            "ppmedian",
            "median-figure",
            "--nu-min",
            "1",
            "--nu-max",
            "2",
            "--step",
            "0.5",
        ])
        .unwrap()
        .command
        {
            Command::MedianFigure(args) => args,
            _ => unreachable!(),
        };
        let steps = ((args.nu_max - args.nu_min) / args.step + 1e-9).floor() as usize;
        assert_eq!(steps, 2);
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let integer = vec![(1.0, 0.0), (2.0, -0.3), (3.0, 0.2)];
        let curves = vec![("identity".to_string(), vec![(1.0, 0.3), (2.0, 0.32), (3.0, 0.33)])];
        let svg = median_offset_svg(&integer, &curves);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("identity"));
        assert!(svg.contains("-log 2"));
    }
}
