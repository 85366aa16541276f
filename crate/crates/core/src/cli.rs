//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{run_benchmark, BenchmarkSpec};
use crate::error::{Error, Result};
use crate::estimators::{
    algebraic_minimization, eight_point, lemeds, normalized_eight_point, ransac, RobustConfig,
};
use crate::fit::{multi_start_fit, FitConfig, FitData, Objective, Parametrization, Params};
use crate::geometry::{CorrSet, FMat};
use crate::gradcheck::{gradcheck, Layer};
use crate::io;
use crate::layers::{normalize, EpiParams, NormKind, ReconParams};
use crate::metrics::{fmat_distance, MetricReport};
use crate::scene::generate_scene;

#[derive(Debug, Parser)]
#[command(name = "epigeom", version, about = "Two-view fundamental matrix toolkit")]
pub struct Cli {
    /// Seed for every random choice; drawn and printed when omitted.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (or directory for `generate`); stdout when omitted.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimateMethod {
    EightPoint,
    NormEightPoint,
    Ransac,
    Lemeds,
    AlgMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParamArg {
    Recon,
    Epi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    EpiSqr,
    Supervised,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scene: corrs.csv, calib.txt and f_gt.txt.
    Generate {
        /// JSON scene config.
        config: PathBuf,
    },
    /// Estimate F from a correspondence file and report the metrics.
    Estimate {
        #[arg(value_enum)]
        method: EstimateMethod,
        corrs: PathBuf,
        /// Normalization applied before computing the metrics.
        #[arg(long)]
        norm: NormKind,
        /// Ground-truth F; adds the distance to the report.
        #[arg(long)]
        gt: Option<PathBuf>,
        /// Inlier threshold (px^2) for RANSAC.
        #[arg(long, default_value_t = 2.0)]
        threshold: f64,
        #[arg(long, default_value_t = 2000)]
        max_iterations: usize,
    },
    /// Fit a parametrization by gradient descent.
    Fit {
        #[arg(long, value_enum, default_value_t = ParamArg::Epi)]
        param: ParamArg,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::EpiSqr)]
        objective: ObjectiveArg,
        /// Correspondences (EPI-SQR objective).
        #[arg(long)]
        corrs: Option<PathBuf>,
        /// Target F (supervised objective).
        #[arg(long)]
        target: Option<PathBuf>,
        /// Normalization inside the objective; `none` disables it.
        #[arg(long, default_value = "FBN")]
        norm: String,
        /// Eight reconstruction parameters `f1 f2 tx ty tz rx ry rz`; required
        /// for `--param recon`.
        #[arg(long)]
        init: Option<PathBuf>,
        /// Principal points `cx1,cy1,cx2,cy2`.
        #[arg(long, value_delimiter = ',')]
        principal: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1)]
        starts: usize,
        #[arg(long, default_value_t = 1e-2)]
        step_size: f64,
        #[arg(long, default_value_t = 2000)]
        max_steps: usize,
        #[arg(long, default_value_t = 1e-10)]
        grad_tolerance: f64,
    },
    /// Compare analytic and finite-difference gradients of one layer.
    Gradcheck {
        #[arg(long)]
        layer: Layer,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Place every trial on a tie or kink.
        #[arg(long)]
        tie: bool,
    },
    /// Run a benchmark spec and emit the result table.
    Benchmark {
        #[arg(long)]
        spec: PathBuf,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

/// Parse `args` (including the program name) and execute.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random();
        eprintln!("seed: {s}");
        s
    })
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let output = cli.output.as_deref();
    match &cli.command {
        Command::Generate { config } => {
            let mut cfg = io::read_scene_config(config)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let dir = output.ok_or_else(|| Error::InvalidConfig("generate needs --output <dir>".into()))?;
            let scene = generate_scene(&cfg)?;
            fs::create_dir_all(dir)?;
            let (p1, p2) = scene.projection_matrices();
            io::write_corrs(&dir.join("corrs.csv"), &scene.corrs_noisy)?;
            io::write_calibration(&dir.join("calib.txt"), &p1, &p2)?;
            io::write_fmat(&dir.join("f_gt.txt"), &scene.f_gt)?;
            println!("wrote {} correspondences to {}", scene.corrs_noisy.len(), dir.display());
            Ok(0)
        }
        Command::Estimate { method, corrs, norm, gt, threshold, max_iterations } => {
            let corrs = io::read_corrs(corrs)?.unlabeled();
            let robust = || RobustConfig {
                max_iterations: *max_iterations,
                inlier_threshold: *threshold,
                seed: resolve_seed(cli.seed),
                ..RobustConfig::default()
            };
            let f = match method {
                EstimateMethod::EightPoint => eight_point(&corrs)?,
                EstimateMethod::NormEightPoint => normalized_eight_point(&corrs)?,
                EstimateMethod::Ransac => ransac(&corrs, &robust())?.f,
                EstimateMethod::Lemeds => lemeds(&corrs, &robust())?.f,
                EstimateMethod::AlgMin => algebraic_minimization(&corrs, &normalized_eight_point(&corrs)?)?.f,
            };
            let f = f.canonical()?;
            let report = MetricReport::compute(&normalize(&f, *norm)?, &corrs, false);
            let distance = match gt {
                Some(p) => Some(fmat_distance(&f, &io::read_fmat(p)?)?),
                None => None,
            };
            emit(output, &io::format_fmat(&f))?;
            print_report(cli.format, &report, distance);
            Ok(0)
        }
        Command::Fit {
            param,
            objective,
            corrs,
            target,
            norm,
            init,
            principal,
            starts,
            step_size,
            max_steps,
            grad_tolerance,
        } => {
            let norm = match norm.to_ascii_lowercase().as_str() {
                "none" => None,
                other => Some(other.parse::<NormKind>()?),
            };
            let corrs: Option<CorrSet> = corrs.as_deref().map(io::read_corrs).transpose()?;
            let target: Option<FMat> = target.as_deref().map(io::read_fmat).transpose()?;
            let (objective, data) = match (objective, &corrs, &target) {
                (ObjectiveArg::EpiSqr, Some(c), _) => (Objective::EpiSqr, FitData::Corrs(c)),
                (ObjectiveArg::Supervised, _, Some(t)) => (Objective::Supervised, FitData::Target(t)),
                (ObjectiveArg::EpiSqr, None, _) => {
                    return Err(Error::InvalidConfig("epi-sqr objective needs --corrs".into()))
                }
                (ObjectiveArg::Supervised, _, None) => {
                    return Err(Error::InvalidConfig("supervised objective needs --target".into()))
                }
            };
            let principal = match principal.as_deref() {
                Some([a, b, c, d]) => [(*a, *b), (*c, *d)],
                None => [(0.0, 0.0); 2],
                Some(_) => return Err(Error::InvalidConfig("--principal takes four values".into())),
            };
            let init = match param {
                ParamArg::Recon => {
                    let path = init
                        .as_deref()
                        .ok_or_else(|| Error::InvalidConfig("--param recon needs --init <file>".into()))?;
                    Params::Recon(read_recon_params(path)?)
                }
                ParamArg::Epi => {
                    let start = match (&data, init) {
                        (_, Some(p)) => io::read_fmat(p)?,
                        (FitData::Corrs(c), None) => normalized_eight_point(c)?,
                        (FitData::Target(t), None) => t.rank2_projection(),
                    };
                    Params::Epi(EpiParams::from_fmat(&start)?)
                }
            };
            let seed = resolve_seed(cli.seed);
            let cfg = FitConfig {
                parametrization: match param {
                    ParamArg::Recon => Parametrization::Recon,
                    ParamArg::Epi => Parametrization::Epi,
                },
                norm,
                objective,
                step_size: *step_size,
                max_steps: *max_steps,
                grad_tolerance: *grad_tolerance,
                seed,
                principal,
                ..FitConfig::default()
            };
            let trace = multi_start_fit(&init, &cfg, data, *starts, seed)?;
            emit(output, &trace.to_text())?;
            eprintln!(
                "steps: {}  stop: {:?}  final objective: {:.6e}",
                trace.steps,
                trace.stop,
                trace.final_objective()
            );
            Ok(0)
        }
        Command::Gradcheck { layer, trials, tie } => {
            let report = gradcheck(*layer, *trials, resolve_seed(cli.seed), *tie)?;
            emit(output, &format!("{report}\n"))?;
            Ok(if report.passed() { 0 } else { 6 })
        }
        Command::Benchmark { spec, threads } => {
            let mut spec = BenchmarkSpec::from_json(&fs::read_to_string(spec)?)?;
            if let Some(s) = cli.seed {
                spec.seed = s;
            }
            let table = run_benchmark(&spec, *threads)?;
            let text = match cli.format {
                Format::Csv => table.to_csv(),
                Format::Text => table.to_text(),
            };
            emit(output, &text)?;
            Ok(0)
        }
    }
}

fn print_report(format: Format, report: &MetricReport, distance: Option<f64>) {
    match format {
        Format::Text => {
            print!("{}", report.to_key_value());
            if let Some(d) = distance {
                println!("fmat_distance: {}", io::fmt_f64(d));
            }
        }
        Format::Csv => {
            let mut header = MetricReport::CSV_HEADER.to_string();
            let mut row = report.to_csv_record();
            if let Some(d) = distance {
                header.push_str(",fmat_distance");
                row.push(',');
                row.push_str(&io::fmt_f64(d));
            }
            println!("{header}\n{row}");
        }
    }
}

fn read_recon_params(path: &Path) -> Result<ReconParams> {
    let v = fs::read_to_string(path)?
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("reconstruction parameters: bad number {t:?}"))))
        .collect::<Result<Vec<f64>>>()?;
    let v: [f64; 8] = v
        .try_into()
        .map_err(|v: Vec<f64>| Error::Parse(format!("reconstruction parameters: expected 8 values, found {}", v.len())))?;
    Ok(ReconParams(v))
}

