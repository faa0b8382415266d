//! Command-line interface.
//!
//! Every flag may also come from a flat TOML file passed with `--config`:
//! keys are flag names without the leading dashes, lists are TOML arrays and
//! boolean `true` sets a switch. Flags given on the command line win over the
//! file. Exit codes: 0 success, 1 runtime error, 2 verification failed,
//! 64 usage error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::f64::consts::E;
use std::fs;
use std::path::PathBuf;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::distributions::{ml_moment, sample_mittag_leffler, JumpSpec, LimitLaw, Regime};
use crate::dpp::{disc_counts_csv, intensity_disc_integral, lsl_example_constant, sample_disc_counts};
use crate::error::{Error, Result};
use crate::limits::{
    covariance_x, covariance_y, default_quad, h_alpha, il_integral, lil_constant_with_law, limit_variance_with_law,
    norm_c_alpha,
};
use crate::renewal::{
    closed_series_table, path_cost, renewal_equation_grid, simulate_decoupled, smoothed_w_grid, RenewalTable, DEFAULT_DELTA,
    MAX_GRID_INTERVALS,
};
use crate::rng::{default_workers, run_replicates, SeedSpec};
use crate::verify::{
    clt_marginal_check, fclt_fdd_check, ks_calibration, lil_check, lil_trajectory_csv, moment_check,
    variance_check, variance_curve_csv, VerifyReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Largest number of jump variates a single command may draw.
pub const MAX_JUMP_DRAWS: f64 = 1e10;

/// Seed labels for the limit-law caches built next to replicate loops.
const LAW_SEED_LABEL: u64 = 0x4c41_5721;

#[derive(Debug, Parser)]
#[command(name = "drp", version, about = "Decoupled renewal processes: simulation and verification")]
pub struct RunConfig {
    /// Master seed of every random stream.
    #[arg(long, global = true, default_value_t = 42, allow_negative_numbers = true)]
    pub seed: u64,
    /// Worker threads [default: $DRP_WORKERS, else available parallelism].
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub workers: Option<usize>,
    /// Artifact path; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Artifact format [default: csv for tables, json for constants and reports].
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Flat TOML file of flag values; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate decoupled renewal counts N̂(t) on a time grid.
    Simulate(SimulateArgs),
    /// Tabulate the renewal function V on a uniform grid.
    RenewalFn(RenewalArgs),
    /// Covariance matrices of the regime-D Gaussian limits X and Y.
    Covariance(CovarianceArgs),
    /// Limit constants of a jump law.
    Constants(ConstantsArgs),
    /// Disc counts of the Mittag-Leffler determinantal point process.
    Dpp(DppArgs),
    /// Statistical verification checks.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Empirical moments of a limit law against closed forms.
    Moment(MomentArgs),
    /// KS test of standardized N̂(t) against the normal law.
    Clt(CltArgs),
    /// Finite-dimensional distributions of the regime-D functional limit.
    Fdd(FddArgs),
    /// Ratio of empirical to asymptotic Var N̂(t).
    Variance(VarianceArgs),
    /// Running maxima of the LIL statistic against a sanity band.
    Lil(LilArgs),
    /// Rejection rate of the KS test under the null.
    KsCalibration(KsCalibrationArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum JumpKind {
    Exp,
    Gamma,
    Pareto,
    Stable,
    Logpareto,
}

#[derive(Debug, Clone, Args)]
pub struct JumpArgs {
    /// Jump law.
    #[arg(long, value_enum, default_value = "exp")]
    pub jump: JumpKind,
    /// Gamma shape.
    #[arg(long, allow_negative_numbers = true)]
    pub shape: Option<f64>,
    /// Pareto or positive-stable index.
    #[arg(long, allow_negative_numbers = true)]
    pub index: Option<f64>,
}

impl JumpArgs {
    pub fn to_spec(&self) -> Result<JumpSpec> {
        let needs_shape = self.jump == JumpKind::Gamma;
        let needs_index = matches!(self.jump, JumpKind::Pareto | JumpKind::Stable);
        if !needs_shape && self.shape.is_some() {
            return Err(Error::usage("shape", "only valid with --jump gamma"));
        }
        if !needs_index && self.index.is_some() {
            return Err(Error::usage("index", "only valid with --jump pareto or stable"));
        }
        let shape = || self.shape.ok_or_else(|| Error::usage("shape", "required by --jump gamma"));
        let index = || self.index.ok_or_else(|| Error::usage("index", "required by this jump law"));
        match self.jump {
            JumpKind::Exp => Ok(JumpSpec::exponential()),
            JumpKind::Gamma => JumpSpec::gamma(shape()?).map_err(|e| Error::usage("shape", e.to_string())),
            JumpKind::Pareto => JumpSpec::pareto(index()?).map_err(|e| Error::usage("index", e.to_string())),
            JumpKind::Stable => JumpSpec::positive_stable(index()?).map_err(|e| Error::usage("index", e.to_string())),
            JumpKind::Logpareto => Ok(JumpSpec::log_pareto()),
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub jump: JumpArgs,
    /// Horizon of each path.
    #[arg(long, allow_negative_numbers = true)]
    pub tmax: f64,
    /// Times at which counts are reported [default: tmax].
    #[arg(long, value_delimiter = ',')]
    pub times: Vec<f64>,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub reps: usize,
    /// Truncation probability bound.
    #[arg(long, default_value_t = DEFAULT_DELTA, allow_negative_numbers = true)]
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RenewalMethodArg {
    /// Closed series for exact-convolution laws, grid otherwise.
    Auto,
    Series,
    Grid,
}

#[derive(Debug, Args)]
pub struct RenewalArgs {
    #[command(flatten)]
    pub jump: JumpArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub tmax: f64,
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    pub step: f64,
    /// Per-point accuracy of the closed series.
    #[arg(long, default_value_t = 1e-10, allow_negative_numbers = true)]
    pub tol: f64,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: RenewalMethodArg,
}

#[derive(Debug, Args)]
pub struct CovarianceArgs {
    /// Regime-D index in [0, 1).
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Time points u of the covariance matrix.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub u: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[command(flatten)]
    pub jump: JumpArgs,
    /// Time at which normalizers and the asymptotic variance are evaluated.
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Also report the point-process LIL constant for this ρ.
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DppArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub rho: f64,
    /// Disc radii, strictly increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    pub radii: Vec<f64>,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_DELTA, allow_negative_numbers = true)]
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MomentLaw {
    /// Mittag-Leffler limit law of regime D.
    Ml,
}

#[derive(Debug, Args)]
pub struct MomentArgs {
    #[arg(long, value_enum, default_value = "ml")]
    pub law: MomentLaw,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 100_000, allow_negative_numbers = true)]
    pub reps: usize,
    /// Highest moment order checked.
    #[arg(long, default_value_t = 4, allow_negative_numbers = true)]
    pub n_max: u32,
}

#[derive(Debug, Args)]
pub struct CltArgs {
    #[command(flatten)]
    pub jump: JumpArgs,
    /// Time of the marginal.
    #[arg(long, conflicts_with = "h_level", allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Use t = h_α(level) for regime-D laws.
    #[arg(long, allow_negative_numbers = true)]
    pub h_level: Option<f64>,
    #[arg(long, default_value_t = 5000, allow_negative_numbers = true)]
    pub reps: usize,
}

#[derive(Debug, Args)]
pub struct FddArgs {
    #[command(flatten)]
    pub jump: JumpArgs,
    /// Level t; marginals sit at times h_α(t + u).
    #[arg(long, allow_negative_numbers = true)]
    pub t: f64,
    #[arg(long, value_delimiter = ',', default_value = "-0.5,0,0.5", allow_hyphen_values = true)]
    pub u: Vec<f64>,
    #[arg(long, default_value_t = 5000, allow_negative_numbers = true)]
    pub reps: usize,
}

#[derive(Debug, Args)]
pub struct VarianceArgs {
    #[command(flatten)]
    pub jump: JumpArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub times: Vec<f64>,
    #[arg(long, default_value_t = 2000, allow_negative_numbers = true)]
    pub reps: usize,
    #[arg(long, default_value_t = 0.9, allow_negative_numbers = true)]
    pub band_lo: f64,
    #[arg(long, default_value_t = 1.1, allow_negative_numbers = true)]
    pub band_hi: f64,
}

#[derive(Debug, Args)]
pub struct LilArgs {
    #[command(flatten)]
    pub jump: JumpArgs,
    #[arg(long, default_value_t = 1e5, allow_negative_numbers = true)]
    pub horizon: f64,
    /// Geometric grid ratio.
    #[arg(long, default_value_t = 1.3, allow_negative_numbers = true)]
    pub ratio: f64,
    /// First grid time.
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub t0: f64,
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub band_lo: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub band_hi: f64,
}

#[derive(Debug, Args)]
pub struct KsCalibrationArgs {
    /// Sample size per trial.
    #[arg(long, default_value_t = 1000, allow_negative_numbers = true)]
    pub n: usize,
    #[arg(long, default_value_t = 200, allow_negative_numbers = true)]
    pub trials: usize,
}

/// What a successful run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
}

/// Parses `args` (program name first), runs, prints diagnostics and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let config = match parse_args(args) {
        Ok(c) => c,
        Err(ParseError::Clap(e)) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
        Err(ParseError::Lib(e)) => {
            eprintln!("drp: {e}");
            return exit_code_for(&e);
        }
    };
    match run(&config) {
        Ok(Outcome::Success) => EXIT_OK,
        Ok(Outcome::VerificationFailed) => EXIT_VERIFY_FAILED,
        Err(e) => {
            eprintln!("drp: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Usage { .. } => EXIT_USAGE,
        _ => EXIT_ERROR,
    }
}

#[derive(Debug)]
pub enum ParseError {
    Clap(clap::Error),
    Lib(Error),
}

impl From<clap::Error> for ParseError {
    fn from(e: clap::Error) -> Self {
        ParseError::Clap(e)
    }
}

impl From<Error> for ParseError {
    fn from(e: Error) -> Self {
        ParseError::Lib(e)
    }
}

/// Parses flags and merges the optional config file underneath them.
pub fn parse_args(args: Vec<OsString>) -> std::result::Result<RunConfig, ParseError> {
    // lenient first pass: required flags may still come from the file
    let cmd = RunConfig::command().ignore_errors(true);
    let matches = cmd.clone().try_get_matches_from(&args)?;
    let Some(path) = matches.get_one::<PathBuf>("config").cloned() else {
        let matches = RunConfig::command().try_get_matches_from(&args)?;
        return Ok(RunConfig::from_arg_matches(&matches)?);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::usage("config", format!("cannot read {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::usage("config", format!("{}: {}", path.display(), e.message())))?;

    let mut commands = vec![&cmd];
    let mut chain: Vec<&ArgMatches> = vec![&matches];
    while let Some((name, sub)) = chain.last().and_then(|m| m.subcommand()) {
        let parent = *commands.last().expect("nonempty chain");
        commands.push(parent.find_subcommand(name).expect("parsed subcommand exists"));
        chain.push(sub);
    }

    let mut extra: Vec<OsString> = Vec::new();
    for (key, value) in &table {
        if key == "config" {
            return Err(Error::usage("config", "a config file cannot name another config file").into());
        }
        let long = key.replace('_', "-");
        let arg = commands
            .iter()
            .flat_map(|c| c.get_arguments())
            .find(|a| a.get_long() == Some(long.as_str()))
            .ok_or_else(|| Error::usage(key.clone(), "unknown field for this subcommand"))?;
        let id = arg.get_id().as_str();
        let on_command_line = chain
            .iter()
            .any(|m| m.ids().any(|i| i.as_str() == id) && m.value_source(id) == Some(ValueSource::CommandLine));
        if on_command_line {
            continue;
        }
        let takes_value = arg.get_action().takes_values();
        match (value, takes_value) {
            (toml::Value::Boolean(true), false) => extra.push(format!("--{long}").into()),
            (toml::Value::Boolean(false), false) => {}
            (v, true) => {
                extra.push(format!("--{long}={}", toml_scalar(key, v)?).into());
            }
            (_, false) => return Err(Error::usage(key.clone(), "switch expects a boolean").into()),
        }
    }
    let merged: Vec<OsString> = args.into_iter().chain(extra).collect();
    let matches = RunConfig::command().try_get_matches_from(merged)?;
    Ok(RunConfig::from_arg_matches(&matches)?)
}

fn toml_scalar(key: &str, v: &toml::Value) -> Result<String> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        toml::Value::Boolean(b) => Ok(b.to_string()),
        toml::Value::Array(items) => Ok(items
            .iter()
            .map(|x| match x {
                toml::Value::Array(_) | toml::Value::Table(_) => {
                    Err(Error::usage(key, "list items must be scalars"))
                }
                x => toml_scalar(key, x),
            })
            .collect::<Result<Vec<_>>>()?
            .join(",")),
        _ => Err(Error::usage(key, "unsupported value type")),
    }
}

fn require(field: &str, ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::usage(field, message))
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    require(field, v > 0.0 && v.is_finite(), "must be positive and finite")
}

fn probability(field: &str, v: f64) -> Result<()> {
    require(field, v > 0.0 && v < 1.0, "must lie in (0, 1)")
}

fn finite_list(field: &str, xs: &[f64]) -> Result<()> {
    require(field, !xs.is_empty(), "must be nonempty")?;
    require(field, xs.iter().all(|x| x.is_finite()), "entries must be finite")
}

/// Rejects runs whose fresh-sum paths would take hours before any work starts.
fn within_budget(spec: &JumpSpec, horizon: f64, reps: usize) -> Result<()> {
    let draws = path_cost(spec, horizon, DEFAULT_DELTA)? * reps as f64;
    require(
        "reps",
        draws <= MAX_JUMP_DRAWS,
        &format!(
            "{} paths to {horizon:.4e} need {draws:.2e} jump draws (limit {MAX_JUMP_DRAWS:.0e}); reduce reps or the horizon",
            spec.label()
        ),
    )
}

fn increasing(field: &str, xs: &[f64]) -> Result<()> {
    require(field, xs.windows(2).all(|w| w[1] > w[0]), "must be strictly increasing")
}

/// Executes the subcommand and writes its artifact.
pub fn run(config: &RunConfig) -> Result<Outcome> {
    let workers = config.workers.unwrap_or_else(default_workers);
    require("workers", workers > 0, "must be at least 1")?;
    let seed = SeedSpec::new(config.seed);
    let ctx = Context { config, workers, seed };
    match &config.command {
        Command::Simulate(a) => ctx.simulate(a),
        Command::RenewalFn(a) => ctx.renewal_fn(a),
        Command::Covariance(a) => ctx.covariance(a),
        Command::Constants(a) => ctx.constants(a),
        Command::Dpp(a) => ctx.dpp(a),
        Command::Verify { check } => ctx.verify(check),
    }
}

struct Context<'a> {
    config: &'a RunConfig,
    workers: usize,
    seed: SeedSpec,
}

/// An artifact in both encodings; only the selected one is rendered.
struct Artifact<C, J> {
    csv: C,
    json: J,
    default: Format,
}

impl Context<'_> {
    fn emit<C, J>(&self, artifact: Artifact<C, J>, summary: &str) -> Result<()>
    where
        C: FnOnce() -> Result<String>,
        J: FnOnce() -> Result<String>,
    {
        let text = match self.config.format.unwrap_or(artifact.default) {
            Format::Csv => (artifact.csv)()?,
            Format::Json => (artifact.json)()? + "\n",
        };
        match &self.config.output {
            Some(path) => {
                fs::write(path, text)?;
                println!("{summary} -> {}", path.display());
            }
            None => {
                print!("{text}");
                eprintln!("{summary}");
            }
        }
        Ok(())
    }

    fn law_for(&self, spec: &JumpSpec) -> Result<LimitLaw> {
        LimitLaw::for_spec(spec, self.seed.derive(LAW_SEED_LABEL), self.workers)
    }

    fn simulate(&self, a: &SimulateArgs) -> Result<Outcome> {
        let spec = a.jump.to_spec()?;
        positive("tmax", a.tmax)?;
        probability("delta", a.delta)?;
        require("reps", a.reps >= 1, "must be at least 1")?;
        let times = if a.times.is_empty() { vec![a.tmax] } else { a.times.clone() };
        finite_list("times", &times)?;
        require(
            "times",
            times.iter().all(|&t| (0.0..=a.tmax).contains(&t)),
            "entries must lie in [0, tmax]",
        )?;
        within_budget(&spec, a.tmax, a.reps)?;
        let rows = run_replicates(self.seed, a.reps, self.workers, |_, rng| {
            let path = simulate_decoupled(&spec, a.tmax, a.delta, rng)?;
            let counts = times.iter().map(|&t| path.count_at(t)).collect::<Result<Vec<u64>>>()?;
            Ok((counts, path.truncation_index(), path.truncation_bound()))
        })?;
        let (n_max, bound) = (rows[0].1, rows[0].2);
        let mean_last = rows.iter().map(|r| *r.0.last().unwrap() as f64).sum::<f64>() / a.reps as f64;
        let summary = format!(
            "simulate {}: {} replicates, tmax={}, n_max={n_max}, mean N(t_last)={mean_last:.6}, seed={}",
            spec.label(),
            a.reps,
            a.tmax,
            self.seed.master_seed
        );
        self.emit(
            Artifact {
                csv: || {
                    let mut out = String::from("replicate,t,count\n");
                    for (i, r) in rows.iter().enumerate() {
                        for (t, c) in times.iter().zip(&r.0) {
                            let _ = writeln!(out, "{i},{t:.16e},{c}");
                        }
                    }
                    Ok(out)
                },
                json: || {
                    pretty(json!({
                        "jump": spec,
                        "seed": self.seed,
                        "tmax": a.tmax,
                        "delta": a.delta,
                        "truncation_index": n_max,
                        "truncation_bound": bound,
                        "times": times,
                        "counts": rows.iter().map(|r| &r.0).collect::<Vec<_>>(),
                    }))
                },
                default: Format::Csv,
            },
            &summary,
        )?;
        Ok(Outcome::Success)
    }

    fn renewal_fn(&self, a: &RenewalArgs) -> Result<Outcome> {
        let spec = a.jump.to_spec()?;
        positive("tmax", a.tmax)?;
        positive("step", a.step)?;
        probability("tol", a.tol)?;
        require(
            "step",
            a.tmax / a.step <= MAX_GRID_INTERVALS as f64,
            &format!("tmax/step exceeds {MAX_GRID_INTERVALS} intervals"),
        )?;
        let use_series = match a.method {
            RenewalMethodArg::Auto => spec.exact_convolution(),
            RenewalMethodArg::Series => {
                require("method", spec.exact_convolution(), "series needs an exact-convolution jump law")?;
                true
            }
            RenewalMethodArg::Grid => false,
        };
        let table: RenewalTable = if use_series {
            closed_series_table(&spec, a.tmax, a.step, a.tol)?
        } else {
            renewal_equation_grid(&spec, a.tmax, a.step)?
        };
        let summary = format!(
            "renewal-fn {}: {} points, method={:?}, error_bound={:.3e}",
            spec.label(),
            table.grid().len(),
            table.method(),
            table.error_bound()
        );
        self.emit(
            Artifact {
                csv: || Ok(table.to_csv()),
                json: || {
                    pretty(json!({
                        "jump": spec,
                        "method": table.method(),
                        "error_bound": table.error_bound(),
                        "step": table.step(),
                        "t": table.grid(),
                        "V": table.v_values(),
                        "W": smoothed_w_grid(&table),
                    }))
                },
                default: Format::Csv,
            },
            &summary,
        )?;
        Ok(Outcome::Success)
    }

    fn covariance(&self, a: &CovarianceArgs) -> Result<Outcome> {
        require("alpha", (0.0..1.0).contains(&a.alpha), "must lie in [0, 1)")?;
        finite_list("u", &a.u)?;
        let law = LimitLaw::new(Regime::D, a.alpha, self.seed.derive(LAW_SEED_LABEL), self.workers)?;
        let quad = default_quad();
        let il = il_integral(a.alpha, &law, &quad)?;
        let k = a.u.len();
        let mut cx = vec![vec![0.0; k]; k];
        let mut cy = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in i..k {
                cx[i][j] = covariance_x(a.alpha, a.u[i], a.u[j], &law, &quad)?;
                cy[i][j] = covariance_y(a.alpha, a.u[i], a.u[j], &law, &quad)?;
                cx[j][i] = cx[i][j];
                cy[j][i] = cy[i][j];
            }
        }
        let summary = format!("covariance alpha={}: {k}x{k}, I_alpha={:.12}", a.alpha, il.value);
        self.emit(
            Artifact {
                csv: || {
                    let mut out = String::from("u,v,cov_x,cov_y\n");
                    for i in 0..k {
                        for j in 0..k {
                            let _ = writeln!(
                                out,
                                "{:.16e},{:.16e},{:.16e},{:.16e}",
                                a.u[i], a.u[j], cx[i][j], cy[i][j]
                            );
                        }
                    }
                    Ok(out)
                },
                json: || {
                    pretty(json!({
                        "alpha": a.alpha,
                        "u": a.u,
                        "cov_x": cx,
                        "cov_y": cy,
                        "i_alpha": il.value,
                        "i_alpha_error": il.error,
                        "law": law.scale_note(),
                        "seed": self.seed,
                    }))
                },
                default: Format::Csv,
            },
            &summary,
        )?;
        Ok(Outcome::Success)
    }

    fn constants(&self, a: &ConstantsArgs) -> Result<Outcome> {
        let spec = a.jump.to_spec()?;
        if let Some(t) = a.t {
            positive("t", t)?;
        }
        if let Some(rho) = a.rho {
            positive("rho", rho)?;
        }
        let law = self.law_for(&spec)?;
        let quad = default_quad();
        let mut values: Vec<(&str, serde_json::Value)> = vec![
            ("regime", json!(spec.regime())),
            ("alpha", json!(spec.alpha())),
            ("mean", json!(spec.mean())),
            ("variance", json!(spec.variance())),
            ("lil_constant", json!(lil_constant_with_law(&spec, &law, &quad)?)),
        ];
        if spec.regime() == Regime::D {
            values.push(("i_alpha", json!(il_integral(spec.alpha(), &law, &quad)?.value)));
        }
        if let Some(t) = a.t {
            values.push(("t", json!(t)));
            values.push(("limit_variance", json!(limit_variance_with_law(&spec, t, &law, &quad)?)));
            match spec.regime() {
                Regime::D => values.push(("h_alpha", json!(h_alpha(&spec, t)?))),
                _ => values.push(("c_alpha", json!(norm_c_alpha(&spec, t)?))),
            }
        }
        if let Some(rho) = a.rho {
            values.push(("rho", json!(rho)));
            values.push(("lsl_constant", json!(lsl_example_constant(rho)?)));
        }
        values.push(("law", json!(law.scale_note())));
        let summary = format!(
            "constants {}: regime {:?}, lil_constant={}",
            spec.label(),
            spec.regime(),
            values[4].1
        );
        self.emit(
            Artifact {
                csv: || {
                    let mut out = String::from("key,value\n");
                    for (k, v) in &values {
                        let v = match v {
                            serde_json::Value::String(s) => format!("\"{}\"", s.replace('"', "\"\"")),
                            v => v.to_string(),
                        };
                        let _ = writeln!(out, "{k},{v}");
                    }
                    Ok(out)
                },
                json: || {
                    let mut map = serde_json::Map::new();
                    map.insert("jump".into(), json!(spec));
                    for (k, v) in &values {
                        map.insert((*k).into(), v.clone());
                    }
                    map.insert("seed".into(), json!(self.seed));
                    pretty(serde_json::Value::Object(map))
                },
                default: Format::Json,
            },
            &summary,
        )?;
        Ok(Outcome::Success)
    }

    fn dpp(&self, a: &DppArgs) -> Result<Outcome> {
        positive("rho", a.rho)?;
        probability("delta", a.delta)?;
        require("reps", a.reps >= 1, "must be at least 1")?;
        finite_list("radii", &a.radii)?;
        require("radii", a.radii[0] >= 0.0, "entries must be nonnegative")?;
        increasing("radii", &a.radii)?;
        let samples = run_replicates(self.seed, a.reps, self.workers, |i, rng| {
            sample_disc_counts(a.rho, &a.radii, a.delta, rng, self.seed, i)
        })?;
        let means: Vec<f64> = (0..a.radii.len())
            .map(|k| samples.iter().map(|s| s.counts[k] as f64).sum::<f64>() / a.reps as f64)
            .collect();
        let summary = format!(
            "dpp rho={}: {} replicates over {} radii, mean count at r_max={:.6}",
            a.rho,
            a.reps,
            a.radii.len(),
            means.last().unwrap()
        );
        self.emit(
            Artifact {
                csv: || Ok(disc_counts_csv(&samples)),
                json: || {
                    let quad = default_quad();
                    let intensity: Vec<Option<f64>> = a
                        .radii
                        .iter()
                        .map(|&r| intensity_disc_integral(a.rho, r, &quad).ok())
                        .collect();
                    pretty(json!({
                        "rho": a.rho,
                        "seed": self.seed,
                        "delta": a.delta,
                        "radii": a.radii,
                        "mean_counts": means,
                        "expected_counts": intensity,
                        "samples": samples,
                    }))
                },
                default: Format::Json,
            },
            &summary,
        )?;
        Ok(Outcome::Success)
    }

    fn verify(&self, check: &VerifyCommand) -> Result<Outcome> {
        let quad = default_quad();
        let (report, csv): (VerifyReport, Option<String>) = match check {
            VerifyCommand::Moment(a) => {
                require("alpha", (0.0..1.0).contains(&a.alpha), "must lie in [0, 1)")?;
                require("reps", a.reps >= 2, "must be at least 2")?;
                require("n-max", (1..=20).contains(&a.n_max), "must lie in 1..=20")?;
                let alpha = a.alpha;
                let report = match a.law {
                    MomentLaw::Ml => moment_check(
                        |rng| sample_mittag_leffler(alpha, rng),
                        |n| ml_moment(alpha, n),
                        a.n_max,
                        a.reps,
                        self.seed,
                        self.workers,
                    )?,
                };
                (report, None)
            }
            VerifyCommand::Clt(a) => {
                let spec = a.jump.to_spec()?;
                require("reps", a.reps >= 2, "must be at least 2")?;
                let t = match (a.t, a.h_level) {
                    (Some(t), None) => {
                        positive("t", t)?;
                        t
                    }
                    (None, Some(level)) => {
                        positive("h-level", level)?;
                        require("h-level", spec.regime() == Regime::D, "needs a regime-D jump law")?;
                        h_alpha(&spec, level)?
                    }
                    _ => return Err(Error::usage("t", "exactly one of --t and --h-level is required")),
                };
                within_budget(&spec, t, a.reps)?;
                (clt_marginal_check(&spec, t, a.reps, self.seed, self.workers)?, None)
            }
            VerifyCommand::Fdd(a) => {
                let spec = a.jump.to_spec()?;
                require("jump", spec.regime() == Regime::D, "fdd needs a regime-D jump law")?;
                positive("t", a.t)?;
                finite_list("u", &a.u)?;
                require("u", a.u.iter().all(|u| u.abs() <= 2.0), "entries must lie in [-2, 2]")?;
                require("u", a.u.iter().all(|u| a.t + u > 0.0), "t + u must be positive")?;
                require("reps", a.reps >= 2, "must be at least 2")?;
                let top = a.u.iter().copied().fold(f64::MIN, f64::max);
                within_budget(&spec, h_alpha(&spec, a.t + top)?, a.reps)?;
                let law = self.law_for(&spec)?;
                (fclt_fdd_check(&spec, a.t, &a.u, a.reps, self.seed, self.workers, &law, &quad)?, None)
            }
            VerifyCommand::Variance(a) => {
                let spec = a.jump.to_spec()?;
                finite_list("times", &a.times)?;
                require("times", a.times.iter().all(|&t| t > 0.0), "entries must be positive")?;
                require("reps", a.reps >= 2, "must be at least 2")?;
                positive("band-lo", a.band_lo)?;
                require("band-hi", a.band_hi > a.band_lo, "must exceed band-lo")?;
                within_budget(&spec, a.times.iter().copied().fold(0.0, f64::max), a.reps)?;
                let law = match spec.regime() {
                    Regime::D => Some(self.law_for(&spec)?),
                    _ => None,
                };
                let (report, rows) = variance_check(
                    &spec,
                    &a.times,
                    a.reps,
                    self.seed,
                    self.workers,
                    law.as_ref(),
                    (a.band_lo, a.band_hi),
                    "user-supplied band",
                )?;
                (report, Some(variance_curve_csv(&rows)))
            }
            VerifyCommand::Lil(a) => {
                let spec = a.jump.to_spec()?;
                positive("horizon", a.horizon)?;
                require("ratio", a.ratio > 1.0 && a.ratio.is_finite(), "must exceed 1")?;
                positive("t0", a.t0)?;
                require("t0", a.t0 <= a.horizon, "must not exceed horizon")?;
                let floor = if spec.regime() == Regime::D { E.powf(E) } else { E };
                require("t0", a.t0 > floor, &format!("must exceed {floor:.6} for this regime"))?;
                positive("band-lo", a.band_lo)?;
                require("band-hi", a.band_hi > a.band_lo, "must exceed band-lo")?;
                within_budget(&spec, a.horizon, 1)?;
                let law = self.law_for(&spec)?;
                let (report, traj) =
                    lil_check(&spec, a.horizon, a.ratio, a.t0, self.seed, &law, &quad, (a.band_lo, a.band_hi))?;
                (report, Some(lil_trajectory_csv(&traj)))
            }
            VerifyCommand::KsCalibration(a) => {
                require("n", a.n >= 1, "must be at least 1")?;
                require("trials", a.trials >= 1, "must be at least 1")?;
                (ks_calibration(a.n, a.trials, self.seed, self.workers)?, None)
            }
        };
        let summary = report.summary();
        self.emit(
            Artifact {
                csv: || match csv {
                    Some(c) => Ok(c),
                    None => Ok(report_csv(&report)),
                },
                json: || report.to_json(),
                default: Format::Json,
            },
            &summary,
        )?;
        Ok(if report.passed { Outcome::Success } else { Outcome::VerificationFailed })
    }
}

fn pretty(v: serde_json::Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(&v)?)
}

/// One-row CSV of the scalar report fields.
pub fn report_csv(r: &VerifyReport) -> String {
    #[derive(Serialize)]
    struct Row<'a> {
        check_name: &'a str,
        statistic: f64,
        tolerance: f64,
        replicates: u64,
        horizon: f64,
        p_value: Option<f64>,
        passed: bool,
        seed: u64,
    }
    let row = Row {
        check_name: &r.check_name,
        statistic: r.statistic,
        tolerance: r.tolerance,
        replicates: r.replicates,
        horizon: r.horizon,
        p_value: r.p_value,
        passed: r.passed,
        seed: r.seed.master_seed,
    };
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
    format!(
        "check_name,statistic,tolerance,replicates,horizon,p_value,passed,seed\n{},{:.16e},{:.16e},{},{:.16e},{},{},{}\n",
        row.check_name,
        row.statistic,
        row.tolerance,
        row.replicates,
        row.horizon,
        opt(row.p_value),
        row.passed,
        row.seed
    )
}
