//! `ruin` — point evaluation, grid export, Monte Carlo runs, and
//! verification suites for the two-firm collaboration model.
//!
//! Exit codes: 0 success; 1 a check suite failed an assertion; 2 invalid
//! parameters or simulation config; 3 unsupported quantity/correlation
//! combination without `--simulate`; 4 output I/O failure.

mod checks;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ruin_core::closed_forms::{
    gain_of_collaboration, survival_no_collab, value_grandits, value_mckean_shepp,
    value_rho1_extended, ClosedFormError,
};
use ruin_core::model::{ModelKind, ModelParams, Policy};
use ruin_core::simulator::{estimate_ruin, estimate_ruin_reflected, Estimate, SimConfig, SimError};
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("{0}")]
    Io(String),
    #[error("{0} assertion(s) failed")]
    CheckFailed(usize),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Unsupported(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ruin",
    version,
    about = "Minimal ruin probabilities for two collaborating firms: closed forms, simulation, verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed-form quantity at one point
    Eval(EvalCmd),
    /// Export a quantity over a grid as CSV (columns x,y,value; y fastest)
    Grid(GridCmd),
    /// Monte Carlo survival estimate; prints one JSON object
    Simulate(SimulateCmd),
    /// Gain of collaboration at one point (eval with quantity = gain)
    Gain(GainCmd),
    /// Run a verification suite; exit 0 iff every assertion passes
    Check(CheckCmd),
}

/// Model parameters from a JSON file and/or flags; flags override the file.
#[derive(Args, Debug, Clone)]
struct ParamArgs {
    /// JSON file with fields mu1, mu2, mu_bar, sigma1, sigma2, rho, delta
    /// (unknown fields rejected; mu1/mu2 optional)
    #[arg(long, value_name = "FILE")]
    params: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    mu1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    mu2: Option<f64>,
    /// Total drift; defaults to mu1 + mu2 when both are given
    #[arg(long = "mu-bar", allow_negative_numbers = true)]
    mu_bar: Option<f64>,
    /// Diffusion coefficient of firm 1 [default: 1]
    #[arg(long)]
    sigma1: Option<f64>,
    /// Diffusion coefficient of firm 2 [default: 1]
    #[arg(long)]
    sigma2: Option<f64>,
    /// Correlation of the driving Brownian motions (required)
    #[arg(long, allow_negative_numbers = true)]
    rho: Option<f64>,
    /// Transfer bound [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
}

impl ParamArgs {
    fn resolve(&self) -> Result<ModelParams, CliError> {
        let file: Option<ModelParams> = match &self.params {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::Invalid(format!("cannot read {}: {e}", path.display()))
                })?;
                Some(
                    serde_json::from_str(&text)
                        .map_err(|e| CliError::Invalid(format!("bad params file: {e}")))?,
                )
            }
            None => None,
        };
        let mu1 = self.mu1.or(file.and_then(|f| f.mu1));
        let mu2 = self.mu2.or(file.and_then(|f| f.mu2));
        let mu_bar = self
            .mu_bar
            .or(file.map(|f| f.mu_bar))
            .or(match (mu1, mu2) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            })
            .ok_or_else(|| {
                CliError::Invalid(
                    "mu_bar is required (give --mu-bar, or both --mu1 and --mu2, or a params file)"
                        .into(),
                )
            })?;
        let rho = self
            .rho
            .or(file.map(|f| f.rho))
            .ok_or_else(|| CliError::Invalid("rho is required".into()))?;
        let params = ModelParams {
            mu1,
            mu2,
            mu_bar,
            sigma1: self.sigma1.or(file.map(|f| f.sigma1)).unwrap_or(1.0),
            sigma2: self.sigma2.or(file.map(|f| f.sigma2)).unwrap_or(1.0),
            rho,
            delta: self.delta.or(file.map(|f| f.delta)).unwrap_or(0.0),
        };
        params
            .validate(ModelKind::Extended)
            .map_err(|e| CliError::Invalid(e.to_string()))?;
        Ok(params)
    }
}

#[derive(Args, Debug, Clone)]
struct SimArgs {
    /// Euler time step [default: 1e-3]
    #[arg(long)]
    dt: Option<f64>,
    /// Truncation time T [default: 50 / mu_bar]
    #[arg(long)]
    horizon: Option<f64>,
    /// Number of independent paths [default: 10000]
    #[arg(long)]
    paths: Option<u64>,
    /// RNG seed [default: 42]
    #[arg(long)]
    seed: Option<u64>,
    /// Brownian-bridge crossing correction
    #[arg(long)]
    bridge: bool,
    /// Antithetic noise pairing
    #[arg(long)]
    antithetic: bool,
}

impl SimArgs {
    fn to_config(&self, mu_bar: f64) -> SimConfig {
        let mut config = SimConfig::new(
            self.dt.unwrap_or(1e-3),
            self.horizon
                .unwrap_or_else(|| SimConfig::default_horizon(mu_bar)),
            self.paths.unwrap_or(10_000),
            self.seed.unwrap_or(42),
        );
        config.bridge_correction = self.bridge;
        config.antithetic = self.antithetic;
        config
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Quantity {
    Value,
    Survival,
    Gain,
}

#[derive(Args)]
struct EvalCmd {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    x: f64,
    #[arg(long)]
    y: f64,
    #[arg(long, value_enum, default_value_t = Quantity::Value)]
    quantity: Quantity,
    /// Fall back to Monte Carlo when no closed form covers the parameters
    #[arg(long)]
    simulate: bool,
    #[command(flatten)]
    sim: SimArgs,
}

/// Rectangular evaluation grid with its resolution.
#[derive(Args, Debug, Clone, Copy, PartialEq)]
struct GridSpec {
    #[arg(long, default_value_t = 0.0)]
    x_min: f64,
    #[arg(long, default_value_t = 4.0)]
    x_max: f64,
    #[arg(long, default_value_t = 0.0)]
    y_min: f64,
    #[arg(long, default_value_t = 4.0)]
    y_max: f64,
    /// Grid resolution in x (>= 2)
    #[arg(long, default_value_t = 81)]
    nx: usize,
    /// Grid resolution in y (>= 2)
    #[arg(long, default_value_t = 81)]
    ny: usize,
}

impl GridSpec {
    fn validate(&self) -> Result<(), CliError> {
        if !(self.x_min >= 0.0 && self.y_min >= 0.0) {
            return Err(CliError::Invalid("grid bounds must be nonnegative".into()));
        }
        if !(self.x_max > self.x_min && self.y_max > self.y_min) {
            return Err(CliError::Invalid(
                "grid upper bounds must exceed lower bounds".into(),
            ));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(CliError::Invalid("grid resolution must be >= 2".into()));
        }
        Ok(())
    }

    fn x_at(&self, i: usize) -> f64 {
        self.x_min + (self.x_max - self.x_min) * i as f64 / (self.nx - 1) as f64
    }

    fn y_at(&self, j: usize) -> f64 {
        self.y_min + (self.y_max - self.y_min) * j as f64 / (self.ny - 1) as f64
    }
}

#[derive(Args)]
struct GridCmd {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    grid: GridSpec,
    #[arg(long, value_enum, default_value_t = Quantity::Value)]
    quantity: Quantity,
    /// Output CSV path (written atomically)
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateCmd {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    x: f64,
    #[arg(long)]
    y: f64,
    /// push-bottom | none | constant:<u>
    #[arg(long, default_value = "push-bottom", value_parser = parse_policy)]
    policy: Policy,
    /// Use the one-dimensional reflected engine (requires rho = -1)
    #[arg(long)]
    reflected: bool,
    #[command(flatten)]
    sim: SimArgs,
}

#[derive(Args)]
struct GainCmd {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    x: f64,
    #[arg(long)]
    y: f64,
    /// Fall back to Monte Carlo when no closed form covers the parameters
    #[arg(long)]
    simulate: bool,
    #[command(flatten)]
    sim: SimArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Suite {
    Hjb,
    Boundary,
    McCrosscheck,
}

#[derive(Args)]
struct CheckCmd {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, value_enum)]
    suite: Suite,
    /// Add perturb * x to every checked value function (harness self-test;
    /// any nonzero value must make hjb/boundary fail)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    perturb: f64,
    #[command(flatten)]
    sim: SimArgs,
}

fn parse_policy(s: &str) -> Result<Policy, String> {
    match s {
        "push-bottom" => Ok(Policy::PushBottom),
        "none" => Ok(Policy::NoCollaboration),
        other => match other.strip_prefix("constant:") {
            Some(v) => v
                .parse::<f64>()
                .map(Policy::Constant)
                .map_err(|e| format!("bad constant drift: {e}")),
            None => Err(format!(
                "unknown policy {other:?}; use push-bottom, none, or constant:<u>"
            )),
        },
    }
}

/// Plain-decimal rendering with the given number of significant digits.
fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.*e}", digits - 1, v); // d.ddd…e±E
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("exponent");
    let neg = mantissa.starts_with('-');
    let digits_only: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let point = 1 + exp; // digits left of the decimal point
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        for _ in 0..-point {
            out.push('0');
        }
        out.push_str(&digits_only);
    } else if (point as usize) >= digits_only.len() {
        out.push_str(&digits_only);
        for _ in 0..(point as usize - digits_only.len()) {
            out.push('0');
        }
    } else {
        out.push_str(&digits_only[..point as usize]);
        out.push('.');
        out.push_str(&digits_only[point as usize..]);
    }
    out
}

fn closed_form_error(e: ClosedFormError) -> CliError {
    match e {
        ClosedFormError::RhoNotOne(r) => CliError::Unsupported(format!(
            "no closed form for rho = {r} here; rerun with --simulate"
        )),
        ClosedFormError::DeltaNotNegative(_) => CliError::Unsupported(
            "no closed form for rho = 0 with delta >= 0 unless mu_bar = 1 and delta = 0; rerun with --simulate".into(),
        ),
        other => CliError::Invalid(other.to_string()),
    }
}

/// Closed-form evaluator for a quantity, or Unsupported when the parameters
/// fall outside every formula's regime.
fn closed_form_evaluator(
    quantity: Quantity,
    params: &ModelParams,
) -> Result<Box<dyn Fn(f64, f64) -> f64 + '_>, CliError> {
    match quantity {
        Quantity::Value => {
            if params.rho == 1.0 {
                value_rho1_extended(1.0, 1.0, params).map_err(closed_form_error)?;
                Ok(Box::new(move |x, y| {
                    value_rho1_extended(x, y, params).expect("validated")
                }))
            } else if params.rho == 0.0 {
                let unit_sigma = params.sigma1 == 1.0 && params.sigma2 == 1.0;
                if params.delta == 0.0 && params.mu_bar == 1.0 && unit_sigma {
                    Ok(Box::new(value_mckean_shepp))
                } else if params.delta < 0.0 && unit_sigma {
                    value_grandits(1.0, 1.0, params).map_err(closed_form_error)?;
                    Ok(Box::new(move |x, y| {
                        value_grandits(x, y, params).expect("validated")
                    }))
                } else {
                    Err(CliError::Unsupported(
                        "no closed form for these rho = 0 parameters (need delta = 0, mu_bar = 1, unit sigmas, or delta < 0); rerun with --simulate".into(),
                    ))
                }
            } else {
                Err(CliError::Unsupported(format!(
                    "no closed form for rho = {}; rerun with --simulate",
                    params.rho
                )))
            }
        }
        Quantity::Survival => {
            survival_no_collab(1.0, 1.0, params).map_err(closed_form_error)?;
            Ok(Box::new(move |x, y| {
                survival_no_collab(x, y, params).expect("validated")
            }))
        }
        Quantity::Gain => {
            gain_of_collaboration(1.0, 1.0, params).map_err(closed_form_error)?;
            Ok(Box::new(move |x, y| {
                gain_of_collaboration(x, y, params).expect("validated")
            }))
        }
    }
}

fn check_point(x: f64, y: f64) -> Result<(), CliError> {
    if !(x.is_finite() && y.is_finite() && x >= 0.0 && y >= 0.0) {
        return Err(CliError::Invalid(format!(
            "endowments must be finite and nonnegative, got ({x}, {y})"
        )));
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct EstimateOutput {
    p_hat: f64,
    std_err: f64,
    ci_low: f64,
    ci_high: f64,
    n_paths: u64,
    seed: u64,
    horizon: f64,
    dt: f64,
    note: String,
}

impl EstimateOutput {
    fn new(est: Estimate, config: &SimConfig) -> Self {
        Self {
            p_hat: est.p_hat,
            std_err: est.std_err,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
            n_paths: est.n_paths,
            seed: config.seed,
            horizon: config.horizon,
            dt: config.dt,
            note: est.horizon_bias_note,
        }
    }
}

fn sim_error(e: SimError) -> CliError {
    CliError::Invalid(e.to_string())
}

fn eval_point(
    params: &ModelParams,
    x: f64,
    y: f64,
    quantity: Quantity,
    simulate: bool,
    sim: &SimArgs,
) -> Result<f64, CliError> {
    check_point(x, y)?;
    match closed_form_evaluator(quantity, params) {
        Ok(eval) => Ok(eval(x, y)),
        Err(CliError::Unsupported(msg)) if simulate => {
            let config = sim.to_config(params.mu_bar);
            eprintln!(
                "note: {msg}; falling back to Monte Carlo (seed {}, {} paths)",
                config.seed, config.n_paths
            );
            let estimate = |policy: &Policy| {
                estimate_ruin(x, y, policy, params, &config)
                    .map(|e| e.p_hat)
                    .map_err(sim_error)
            };
            match quantity {
                Quantity::Value => estimate(&Policy::PushBottom),
                Quantity::Survival => estimate(&Policy::NoCollaboration),
                Quantity::Gain => {
                    Ok(estimate(&Policy::PushBottom)? - estimate(&Policy::NoCollaboration)?)
                }
            }
        }
        Err(e) => Err(e),
    }
}

fn cmd_eval(cmd: &EvalCmd) -> Result<(), CliError> {
    let params = cmd.params.resolve()?;
    let v = eval_point(&params, cmd.x, cmd.y, cmd.quantity, cmd.simulate, &cmd.sim)?;
    println!("{}", format_significant(v, 10));
    Ok(())
}

fn cmd_grid(cmd: &GridCmd) -> Result<(), CliError> {
    let params = cmd.params.resolve()?;
    cmd.grid.validate()?;
    let eval = closed_form_evaluator(cmd.quantity, &params)?;

    let spec = &cmd.grid;
    let mut body = String::with_capacity(spec.nx * spec.ny * 24 + 16);
    body.push_str("x,y,value\n");
    for i in 0..spec.nx {
        let x = spec.x_at(i);
        for j in 0..spec.ny {
            let y = spec.y_at(j);
            writeln!(body, "{},{},{}", x, y, eval(x, y)).expect("write to string");
        }
    }

    // write-to-temp then atomic rename; no partial output files on error
    let dir = cmd.out.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(std::path::Path::new(".")))
        .map_err(|e| CliError::Io(format!("cannot create temp file: {e}")))?;
    tmp.write_all(body.as_bytes())
        .map_err(|e| CliError::Io(format!("cannot write grid: {e}")))?;
    tmp.persist(&cmd.out)
        .map_err(|e| CliError::Io(format!("cannot persist {}: {e}", cmd.out.display())))?;
    Ok(())
}

fn cmd_simulate(cmd: &SimulateCmd) -> Result<(), CliError> {
    let params = cmd.params.resolve()?;
    let config = cmd.sim.to_config(params.mu_bar);
    let est = if cmd.reflected {
        if cmd.policy != Policy::PushBottom {
            return Err(CliError::Invalid(
                "--reflected simulates the optimal policy; it cannot be combined with --policy"
                    .into(),
            ));
        }
        estimate_ruin_reflected(cmd.x, cmd.y, &params, &config).map_err(sim_error)?
    } else {
        estimate_ruin(cmd.x, cmd.y, &cmd.policy, &params, &config).map_err(sim_error)?
    };
    let out = EstimateOutput::new(est, &config);
    println!(
        "{}",
        serde_json::to_string(&out).expect("estimate serializes")
    );
    Ok(())
}

fn cmd_gain(cmd: &GainCmd) -> Result<(), CliError> {
    let params = cmd.params.resolve()?;
    let v = eval_point(
        &params,
        cmd.x,
        cmd.y,
        Quantity::Gain,
        cmd.simulate,
        &cmd.sim,
    )?;
    println!("{}", format_significant(v, 10));
    Ok(())
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Eval(cmd) => cmd_eval(cmd),
        Command::Grid(cmd) => cmd_grid(cmd),
        Command::Simulate(cmd) => cmd_simulate(cmd),
        Command::Gain(cmd) => cmd_gain(cmd),
        Command::Check(cmd) => checks::run(cmd),
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
