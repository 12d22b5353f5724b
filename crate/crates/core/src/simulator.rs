//! Monte Carlo engine for the controlled endowment pair, the sign-drift
//! difference SDE, and the reflected reformulation for `rho = -1`.
//!
//! Paths are independent work units evaluated in parallel under the
//! `parallel` feature. Every path owns a counter-based RNG stream keyed by
//! `(seed, path index)` and survival counts are integers, so estimates are
//! bit-identical across thread counts and to the `*_serial` variants.

use crate::model::{ModelKind, ModelParams, ParamError, Policy};
use crate::rng::path_stream;
use rand::Rng;
use rand_distr::StandardNormal;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use thiserror::Error;

/// Discretization and sampling plan for one estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Euler time step.
    pub dt: f64,
    /// Truncation time `T`: survival means no ruin up to `T`.
    pub horizon: f64,
    /// Number of independent paths.
    pub n_paths: u64,
    /// Seed of the counter-based stream family.
    pub seed: u64,
    /// Apply the Brownian-bridge crossing correction between grid points.
    pub bridge_correction: bool,
    /// Pair path `2k+1` with the negated noise of path `2k`.
    pub antithetic: bool,
}

impl SimConfig {
    pub fn new(dt: f64, horizon: f64, n_paths: u64, seed: u64) -> Self {
        Self {
            dt,
            horizon,
            n_paths,
            seed,
            bridge_correction: false,
            antithetic: false,
        }
    }

    /// Default truncation time `50 / mu_bar`: surviving paths drift upward
    /// linearly, leaving a residual ruin probability that is negligible
    /// against Monte Carlo noise at this horizon.
    pub fn default_horizon(mu_bar: f64) -> f64 {
        50.0 / mu_bar
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SimError::BadDt(self.dt));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(SimError::BadHorizon(self.horizon));
        }
        if self.dt > self.horizon {
            return Err(SimError::DtExceedsHorizon {
                dt: self.dt,
                horizon: self.horizon,
            });
        }
        if self.n_paths == 0 {
            return Err(SimError::NoPaths);
        }
        Ok(())
    }

    fn n_steps(&self) -> u64 {
        ((self.horizon / self.dt - 1e-9).ceil() as u64).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid parameters: {0}")]
    InvalidParams(#[from] ParamError),
    #[error("dt = {0} must be positive and finite")]
    BadDt(f64),
    #[error("horizon = {0} must be positive and finite")]
    BadHorizon(f64),
    #[error("dt = {dt} exceeds horizon = {horizon}")]
    DtExceedsHorizon { dt: f64, horizon: f64 },
    #[error("n_paths must be >= 1")]
    NoPaths,
    #[error("initial endowments must be positive, got ({x}, {y})")]
    NonPositiveStart { x: f64, y: f64 },
    #[error("NoCollaboration policy requires mu1")]
    MissingMu1,
    #[error("reflected engine requires rho = -1, got rho = {0}")]
    RhoNotMinusOne(f64),
}

/// State of one path during simulation. `w1`, `w2` are the two driving
/// Brownian coordinates (firm 2's noise is `rho w1 + sqrt(1-rho^2) w2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub w1: f64,
    pub w2: f64,
    pub ruined: bool,
    pub ruin_time: Option<f64>,
}

impl PathState {
    pub fn start(x: f64, y: f64) -> Self {
        Self {
            t: 0.0,
            x,
            y,
            w1: 0.0,
            w2: 0.0,
            ruined: false,
            ruin_time: None,
        }
    }
}

/// Probability estimate with its sampling error.
///
/// `p_hat` is the fraction of paths surviving to the horizon, i.e. an
/// estimate of `P[tau > T]`, which upper-bounds the infinite-horizon survival
/// probability; `horizon_bias_note` records this.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_paths: u64,
    pub horizon_bias_note: String,
}

impl Estimate {
    fn from_survivors(survivors: u64, config: &SimConfig) -> Self {
        let n = config.n_paths as f64;
        let p_hat = survivors as f64 / n;
        let std_err = (p_hat * (1.0 - p_hat) / n).sqrt();
        Self {
            p_hat,
            std_err,
            ci_low: (p_hat - 1.96 * std_err).max(0.0),
            ci_high: (p_hat + 1.96 * std_err).min(1.0),
            n_paths: config.n_paths,
            horizon_bias_note: format!(
                "p_hat estimates P[tau > {}], an upper bound on P[tau = infinity]",
                config.horizon
            ),
        }
    }
}

// Per-step constants hoisted out of the path loop.
#[derive(Clone, Copy)]
struct StepCoeffs {
    dt: f64,
    sqrt_dt: f64,
    rho: f64,
    rho_comp: f64, // sqrt(1 - rho^2)
    // bridge exponent scales 2 / (sigma_i^2 dt)
    q1: f64,
    q2: f64,
}

impl StepCoeffs {
    fn new(params: &ModelParams, config: &SimConfig) -> Self {
        Self {
            dt: config.dt,
            sqrt_dt: config.dt.sqrt(),
            rho: params.rho,
            rho_comp: (1.0 - params.rho * params.rho).max(0.0).sqrt(),
            q1: 2.0 / (params.sigma1 * params.sigma1 * config.dt),
            q2: 2.0 / (params.sigma2 * params.sigma2 * config.dt),
        }
    }
}

// exp underflows below -745; the bridge crossing probability is zero there.
#[inline]
fn bridge_crossing(q: f64, d0: f64, d1: f64) -> f64 {
    let e = -q * d0 * d1;
    if e < -745.0 {
        0.0
    } else {
        e.exp()
    }
}

#[inline]
fn advance<R: Rng>(
    state: PathState,
    policy: &Policy,
    params: &ModelParams,
    c: &StepCoeffs,
    noise: (f64, f64),
    bridge: bool,
    rng: &mut R,
) -> PathState {
    debug_assert!(!state.ruined);
    let u = policy.drift(state.x, state.y, params);
    let (g1, g2) = noise;
    let dw1 = c.sqrt_dt * g1;
    let dw2 = c.sqrt_dt * g2;
    let x1 = state.x + u * c.dt + params.sigma1 * dw1;
    let y1 =
        state.y + (params.mu_bar - u) * c.dt + params.sigma2 * (c.rho * dw1 + c.rho_comp * dw2);
    let t1 = state.t + c.dt;
    let mut ruined = x1 <= 0.0 || y1 <= 0.0;
    if !ruined && bridge {
        // both endpoints positive in each coordinate; crossings treated as
        // independent even for rho != 0 (error is second order in dt)
        let px = bridge_crossing(c.q1, state.x, x1);
        let py = bridge_crossing(c.q2, state.y, y1);
        let p = px + py - px * py;
        if p > 0.0 && rng.random::<f64>() < p {
            ruined = true;
        }
    }
    PathState {
        t: t1,
        x: x1,
        y: y1,
        w1: state.w1 + dw1,
        w2: state.w2 + dw2,
        ruined,
        ruin_time: if ruined { Some(t1) } else { None },
    }
}

/// One Euler step of the controlled pair:
///
/// ```text
/// x += u dt + sigma1 sqrt(dt) g1
/// y += (mu_bar - u) dt + sigma2 sqrt(dt) (rho g1 + sqrt(1-rho^2) g2)
/// ```
///
/// with `u` evaluated at the step's start state. Ruin is declared when either
/// coordinate ends at or below zero, or (with `bridge_correction`) with the
/// Brownian-bridge crossing probability `1 - (1-p_x)(1-p_y)`,
/// `p_i = exp(-2 d_start d_end / (sigma_i^2 dt))`, resolved with one uniform
/// draw from `rng`.
pub fn step_xy<R: Rng>(
    state: PathState,
    policy: &Policy,
    params: &ModelParams,
    config: &SimConfig,
    noise: (f64, f64),
    rng: &mut R,
) -> PathState {
    let coeffs = StepCoeffs::new(params, config);
    advance(
        state,
        policy,
        params,
        &coeffs,
        noise,
        config.bridge_correction,
        rng,
    )
}

// Stream index and negation flag for a path; antithetic pairs share a stream.
#[inline]
fn stream_of(config: &SimConfig, path: u64) -> (u64, bool) {
    if config.antithetic {
        (path / 2, path % 2 == 1)
    } else {
        (path, false)
    }
}

fn run_path_xy(
    x: f64,
    y: f64,
    policy: &Policy,
    params: &ModelParams,
    config: &SimConfig,
    coeffs: &StepCoeffs,
    path: u64,
) -> bool {
    let (stream, negate) = stream_of(config, path);
    let mut rng = path_stream(config.seed, stream);
    let mut state = PathState::start(x, y);
    let sign = if negate { -1.0 } else { 1.0 };
    for _ in 0..config.n_steps() {
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        state = advance(
            state,
            policy,
            params,
            coeffs,
            (sign * g1, sign * g2),
            config.bridge_correction,
            &mut rng,
        );
        if state.ruined {
            return false;
        }
    }
    true
}

fn check_inputs(
    x: f64,
    y: f64,
    policy: &Policy,
    params: &ModelParams,
    config: &SimConfig,
) -> Result<(), SimError> {
    params.validate(ModelKind::Extended)?;
    config.validate()?;
    if !(x > 0.0 && y > 0.0) {
        return Err(SimError::NonPositiveStart { x, y });
    }
    if matches!(policy, Policy::NoCollaboration) && params.mu1.is_none() {
        return Err(SimError::MissingMu1);
    }
    Ok(())
}

/// Survival probability estimate for the controlled pair started at
/// `(x, y)`, running `n_paths` independent paths to ruin or horizon.
///
/// Deterministic in `(seed, config, params, policy, x, y)` regardless of
/// thread count.
pub fn estimate_ruin(
    x: f64,
    y: f64,
    policy: &Policy,
    params: &ModelParams,
    config: &SimConfig,
) -> Result<Estimate, SimError> {
    check_inputs(x, y, policy, params, config)?;
    let coeffs = StepCoeffs::new(params, config);
    #[cfg(feature = "parallel")]
    let survivors = (0..config.n_paths)
        .into_par_iter()
        .map(|i| run_path_xy(x, y, policy, params, config, &coeffs, i) as u64)
        .sum();
    #[cfg(not(feature = "parallel"))]
    let survivors = (0..config.n_paths)
        .map(|i| run_path_xy(x, y, policy, params, config, &coeffs, i) as u64)
        .sum();
    Ok(Estimate::from_survivors(survivors, config))
}

/// Sequential fallback of [`estimate_ruin`]; bit-identical results.
pub fn estimate_ruin_serial(
    x: f64,
    y: f64,
    policy: &Policy,
    params: &ModelParams,
    config: &SimConfig,
) -> Result<Estimate, SimError> {
    check_inputs(x, y, policy, params, config)?;
    let coeffs = StepCoeffs::new(params, config);
    let survivors = (0..config.n_paths)
        .map(|i| run_path_xy(x, y, policy, params, config, &coeffs, i) as u64)
        .sum();
    Ok(Estimate::from_survivors(survivors, config))
}

// sign with sign(0) = 0, as the difference SDE defines it. f64::signum maps
// +0.0 to 1.0, which would inject spurious drift at the origin.
#[inline]
fn drift_sign(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else if z < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[inline]
fn sign_sde_step(z: f64, rate: f64, diff_sqrt_dt: f64, dt: f64, g: f64) -> f64 {
    z - rate * drift_sign(z) * dt + diff_sqrt_dt * g
}

/// Euler path of the optimally-controlled endowment difference
///
/// ```text
/// dZ = -(mu_bar + 2 delta) sign(Z) dt + sqrt(2 (1 - rho)) dB,   Z_0 = z0,
/// ```
///
/// sampled on the `config` grid (the returned vector starts with `z0`). The
/// drift vanishes exactly at `Z = 0`, so absent noise an exactly-zero state
/// stays put. Draws from stream 0 of `config.seed`.
pub fn simulate_sign_sde(z0: f64, params: &ModelParams, config: &SimConfig) -> Vec<f64> {
    let rate = params.mu_bar + 2.0 * params.delta;
    let diff_sqrt_dt = (2.0 * (1.0 - params.rho)).max(0.0).sqrt() * config.dt.sqrt();
    let mut rng = path_stream(config.seed, 0);
    let n = config.n_steps() as usize;
    let mut path = Vec::with_capacity(n + 1);
    path.push(z0);
    let mut z = z0;
    for _ in 0..n {
        let g: f64 = rng.sample(StandardNormal);
        z = sign_sde_step(z, rate, diff_sqrt_dt, config.dt, g);
        path.push(z);
    }
    path
}

fn run_path_reflected(x: f64, y: f64, params: &ModelParams, config: &SimConfig, path: u64) -> bool {
    let (stream, negate) = stream_of(config, path);
    let mut rng = path_stream(config.seed, stream);
    let sign = if negate { -1.0 } else { 1.0 };
    let rate = params.mu_bar + 2.0 * params.delta;
    let dt = config.dt;
    // rho = -1: diffusion coefficient sqrt(2 (1 - rho)) = 2
    let diff_sqrt_dt = 2.0 * dt.sqrt();
    let q = 2.0 / (4.0 * dt);
    let mut z = y - x;
    let mut barrier = x + y;
    if z.abs() >= barrier {
        return false;
    }
    for k in 1..=config.n_steps() {
        let g: f64 = rng.sample(StandardNormal);
        let z1 = sign_sde_step(z, rate, diff_sqrt_dt, dt, sign * g);
        let barrier1 = x + y + params.mu_bar * (k as f64 * dt);
        if z1.abs() >= barrier1 {
            return false;
        }
        if config.bridge_correction {
            // crossings of the two moving barriers +-b(t)
            let p_up = bridge_crossing(q, barrier - z, barrier1 - z1);
            let p_dn = bridge_crossing(q, barrier + z, barrier1 + z1);
            let p = p_up + p_dn - p_up * p_dn;
            if p > 0.0 && rng.random::<f64>() < p {
                return false;
            }
        }
        z = z1;
        barrier = barrier1;
    }
    true
}

/// Survival estimate for `rho = -1` via the one-dimensional reformulation:
/// the controlled difference `Z` (sign-drift SDE with diffusion 2) survives
/// while `|Z_t| < x + y + mu_bar t`; equivalently `|Z|/2`, a reflected
/// Brownian motion with drift `-(mu_bar/2 + delta)`, stays below the linear
/// barrier `(x + y + mu_bar t)/2`.
pub fn estimate_ruin_reflected(
    x: f64,
    y: f64,
    params: &ModelParams,
    config: &SimConfig,
) -> Result<Estimate, SimError> {
    check_reflected_inputs(x, y, params, config)?;
    #[cfg(feature = "parallel")]
    let survivors = (0..config.n_paths)
        .into_par_iter()
        .map(|i| run_path_reflected(x, y, params, config, i) as u64)
        .sum();
    #[cfg(not(feature = "parallel"))]
    let survivors = (0..config.n_paths)
        .map(|i| run_path_reflected(x, y, params, config, i) as u64)
        .sum();
    Ok(Estimate::from_survivors(survivors, config))
}

/// Sequential fallback of [`estimate_ruin_reflected`]; bit-identical results.
pub fn estimate_ruin_reflected_serial(
    x: f64,
    y: f64,
    params: &ModelParams,
    config: &SimConfig,
) -> Result<Estimate, SimError> {
    check_reflected_inputs(x, y, params, config)?;
    let survivors = (0..config.n_paths)
        .map(|i| run_path_reflected(x, y, params, config, i) as u64)
        .sum();
    Ok(Estimate::from_survivors(survivors, config))
}

fn check_reflected_inputs(
    x: f64,
    y: f64,
    params: &ModelParams,
    config: &SimConfig,
) -> Result<(), SimError> {
    params.validate(ModelKind::Extended)?;
    config.validate()?;
    if params.rho != -1.0 {
        return Err(SimError::RhoNotMinusOne(params.rho));
    }
    if !(x >= 0.0 && y >= 0.0) {
        return Err(SimError::NonPositiveStart { x, y });
    }
    Ok(())
}
