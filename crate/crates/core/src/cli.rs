//! Command-line front end behind the `gilbert` binary.
//!
//! Exit codes: 0 on success with every verdict passing, 1 when a verdict
//! fails, 2 on usage, configuration or runtime errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{GilbertError, Result};
use crate::experiments::config::{parse_window, resolve_seed, RawConfig};
use crate::experiments::{run_replications, verify, ExperimentConfig, ModelKind};
use crate::geometry::ConvexWindow;
use crate::rng::{stream, StreamDomain};
use crate::theory::moments::{
    covariance_bounds, covariance_exact, expectation_bounds, expectation_exact, kolmogorov_bound,
    variance_asymptotic, VarianceSource,
};
use crate::theory::{PredictionParams, PredictionValue, TheoryPrediction};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "gilbert",
    version,
    about = "Simulate Gilbert graphs and check them against closed-form theory"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump per-replication statistics as CSV.
    Simulate(RunArgs),
    /// Print theoretical predictions as JSON.
    Predict(RunArgs),
    /// Run a verification suite and write its report.
    Verify(RunArgs),
    /// Tabulate the covariogram along a direction.
    Covariogram(CovariogramArgs),
}

/// Flags shared by the experiment subcommands. Flags override values from
/// `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Verification kind (Moments, CLT, MultivariateCov, CompoundPoisson,
    /// OrderStatistics, LDI, PPConditions).
    #[arg(long)]
    pub kind: Option<String>,
    /// `box:1x1`, `ball:1@d=3`, or `box:1` / `ball:1` together with `--dim`.
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Poisson intensity, or a comma-separated grid.
    #[arg(long)]
    pub t: Option<String>,
    /// Binomial point count, or a comma-separated grid.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    /// Radius schedule `a,gamma` for `δ = a · t^{−γ}`.
    #[arg(long, allow_hyphen_values = true)]
    pub schedule: Option<String>,
    /// Comma-separated exponents.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub reps: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run replications on one thread.
    #[arg(long)]
    pub serial: bool,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CovariogramArgs {
    #[arg(long)]
    pub window: String,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Comma-separated direction, normalised internally; first axis by default.
    #[arg(long, allow_hyphen_values = true)]
    pub direction: Option<String>,
    /// Largest distance; the window diameter by default.
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    /// Monte Carlo samples where no closed form exists.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    fn raw_config(&self, default_kind: &str) -> Result<RawConfig> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::parse(&std::fs::read_to_string(path)?)?,
            None => RawConfig::default(),
        };
        let overrides = [
            ("kind", &self.kind),
            ("window", &self.window),
            ("t", &self.t),
            ("n", &self.n),
            ("delta", &self.delta),
            ("schedule", &self.schedule),
            ("alphas", &self.alpha),
            ("reps", &self.reps),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                raw.set(key, v.as_str())?;
            }
        }
        if let Some(d) = self.dim {
            raw.set("dim", d.to_string())?;
        }
        if self.serial {
            raw.set("parallel", "false")?;
        }
        if raw.get("kind").is_none() {
            raw.set("kind", default_kind)?;
        }
        Ok(raw)
    }

    /// Fully resolved configuration, with seed precedence applied.
    pub fn resolve(&self, default_kind: &str) -> Result<ExperimentConfig> {
        let mut cfg = self.raw_config(default_kind)?.resolve()?;
        cfg.seed = resolve_seed(self.seed, cfg.seed)?;
        Ok(cfg)
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn dispatch(command: &Command) -> Result<i32> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Predict(args) => predict(args),
        Command::Verify(args) => verify_command(args),
        Command::Covariogram(args) => covariogram(args),
    }
}

fn simulate(args: &RunArgs) -> Result<i32> {
    let cfg = args.resolve("Moments")?;
    let runs = run_replications(&cfg)?;
    let mut out = output(&args.out)?;
    for (k, run) in runs.iter().enumerate() {
        run.write_csv(&mut out, k == 0)?;
    }
    out.flush()?;
    Ok(EXIT_OK)
}

/// Moment predictions at every grid point and exponent.
pub fn predictions(cfg: &ExperimentConfig) -> Result<Vec<TheoryPrediction>> {
    if cfg.model != ModelKind::Poisson {
        return Err(GilbertError::Config {
            key: "n".into(),
            message: "predictions need a Poisson intensity `t`".into(),
        });
    }
    let w = &cfg.window;
    let mut out = Vec::new();
    for &t in &cfg.grid {
        let delta = cfg.radius.at(t);
        let params = |alphas: Vec<f64>| PredictionParams {
            window: w.clone(),
            t: Some(t),
            n: None,
            delta,
            alphas,
        };
        let mut push = |name: &str, value: PredictionValue, alphas: Vec<f64>, anchor: &str| {
            out.push(TheoryPrediction {
                name: name.into(),
                value,
                params: params(alphas),
                paper_anchor: anchor.into(),
            });
        };
        for &a in &cfg.alphas {
            let e = expectation_exact(w, t, delta, a)?;
            push(
                "expectation_exact",
                PredictionValue::Scalar(e),
                vec![a],
                "expectation identity",
            );
            let (lo, hi) = expectation_bounds(w, t, delta, a)?;
            push(
                "expectation_bounds",
                PredictionValue::Interval { lo, hi },
                vec![a],
                "expectation sandwich",
            );
            if a > -(w.dim() as f64) / 2.0 {
                let v = variance_asymptotic(w, t, delta, a)?;
                push(
                    "variance_asymptotic",
                    PredictionValue::Scalar(v),
                    vec![a],
                    "variance asymptotics",
                );
                match kolmogorov_bound(w, t, delta, a, VarianceSource::LowerBound) {
                    Ok(b) => push(
                        "kolmogorov_bound",
                        PredictionValue::Scalar(b),
                        vec![a],
                        "Kolmogorov distance bound",
                    ),
                    Err(GilbertError::DegenerateVariance(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        for (i, &a) in cfg.alphas.iter().enumerate() {
            for &b in &cfg.alphas[i..] {
                if a + b <= -(w.dim() as f64) {
                    continue;
                }
                let c = covariance_exact(w, t, delta, a, b)?;
                push(
                    "covariance_exact",
                    PredictionValue::Scalar(c),
                    vec![a, b],
                    "covariance identity",
                );
                let (lo, hi) = covariance_bounds(w, t, delta, a, b)?;
                push(
                    "covariance_bounds",
                    PredictionValue::Interval { lo, hi },
                    vec![a, b],
                    "covariance sandwich",
                );
            }
        }
    }
    Ok(out)
}

fn predict(args: &RunArgs) -> Result<i32> {
    let cfg = args.resolve("Moments")?;
    let preds = predictions(&cfg)?;
    let mut out = output(&args.out)?;
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&preds).expect("predictions serialise")
    )?;
    out.flush()?;
    Ok(EXIT_OK)
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// CSV path for table `name` next to the report at `report`.
pub fn table_path(report: &Path, name: &str) -> PathBuf {
    let stem = report
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("report");
    report.with_file_name(format!("{stem}.{}.csv", sanitize(name)))
}

fn verify_command(args: &RunArgs) -> Result<i32> {
    if args.kind.is_none() && args.config.is_none() {
        return Err(GilbertError::Config {
            key: "kind".into(),
            message: "verify needs --kind or a config file".into(),
        });
    }
    let cfg = args.resolve("Moments")?;
    let started = std::time::Instant::now();
    let report = verify(&cfg)?;
    eprintln!(
        "{} finished in {:.1}s",
        cfg.kind,
        started.elapsed().as_secs_f64()
    );
    for m in &report.metrics {
        eprintln!("{m}");
    }
    match &args.out {
        Some(path) => {
            report.write_json(path)?;
            for table in &report.tables {
                let mut f = BufWriter::new(File::create(table_path(path, &table.name))?);
                table.write_csv(&mut f)?;
                f.flush()?;
            }
        }
        None => println!("{}", report.to_json()),
    }
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}

fn covariogram(args: &CovariogramArgs) -> Result<i32> {
    let window: ConvexWindow = parse_window(&args.window, args.dim)?;
    let d = window.dim();
    let mut dir: Vec<f64> = match &args.direction {
        Some(s) => s
            .split(',')
            .map(|p| {
                p.trim().parse::<f64>().map_err(|_| GilbertError::Config {
                    key: "direction".into(),
                    message: format!("invalid component `{p}`"),
                })
            })
            .collect::<Result<_>>()?,
        None => {
            let mut e = vec![0.0; d];
            e[0] = 1.0;
            e
        }
    };
    if dir.len() != d {
        return Err(GilbertError::Config {
            key: "direction".into(),
            message: format!("expected {d} components, got {}", dir.len()),
        });
    }
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(GilbertError::Config {
            key: "direction".into(),
            message: "direction must be nonzero".into(),
        });
    }
    dir.iter_mut().for_each(|x| *x /= norm);
    let r_max = args.r_max.unwrap_or_else(|| window.diameter());
    if args.steps == 0 || !(r_max >= 0.0) {
        return Err(GilbertError::Config {
            key: "steps".into(),
            message: "need steps ≥ 1 and r_max ≥ 0".into(),
        });
    }
    let seed = resolve_seed(args.seed, 0)?;
    let mut rng = stream(seed, StreamDomain::Auxiliary, 0, 0);
    let mut out = output(&args.out)?;
    writeln!(out, "r,covariogram,estimated,std_error")?;
    for k in 0..=args.steps {
        let r = r_max * k as f64 / args.steps as f64;
        let y: Vec<f64> = dir.iter().map(|x| x * r).collect();
        let g = window.covariogram_or_estimate(&y, args.samples, &mut rng);
        writeln!(out, "{r},{},{},{}", g.value, g.estimated, g.std_error)?;
    }
    out.flush()?;
    Ok(EXIT_OK)
}
