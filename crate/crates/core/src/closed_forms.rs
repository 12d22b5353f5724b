//! Closed-form survival probabilities and value functions.
//!
//! Explicit formulas exist in two regimes: independent driving noise
//! (`rho = 0`, McKean-Shepp and Grandits formulas) and perfectly positive
//! correlation (`rho = 1`, including different diffusion coefficients).
//! No closed form is attempted for other correlations; the simulator covers
//! those regimes.
//!
//! Every exponential term is gated on its exponent before evaluation: factors
//! like `exp(-2 mu x / sigma^2)` underflow long before the products stop
//! mattering, and multiplying an underflowed zero by a saturated normal CDF
//! keeps each term exact instead of producing `0 * inf` intermediates.

use crate::model::{ModelKind, ModelParams, ParamError};
use crate::normal::norm_cdf;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error("invalid parameters: {0}")]
    InvalidParams(#[from] ParamError),
    #[error("formula requires rho = 1, got rho = {0}")]
    RhoNotOne(f64),
    #[error("formula requires mu1 and mu2")]
    MissingDriftRates,
    #[error("drift rates must be positive, got mu1 = {mu1}, mu2 = {mu2}")]
    DriftNotPositive { mu1: f64, mu2: f64 },
    #[error("delta = {0} must be negative (the formula has a 1/delta pole at 0)")]
    DeltaNotNegative(f64),
    #[error("delta = {delta} must exceed -min(mu1, mu2) = {bound}")]
    DeltaTooNegative { delta: f64, bound: f64 },
}

// exp(e) underflows to zero below roughly -745; skip the evaluation entirely.
const EXP_UNDERFLOW: f64 = -745.0;

#[inline]
fn exp_or_zero(exponent: f64) -> f64 {
    if exponent < EXP_UNDERFLOW {
        0.0
    } else {
        exponent.exp()
    }
}

/// One additive term `exp(exponent) * Phi(phi_arg)` with the underflow gate.
#[inline]
fn exp_phi(exponent: f64, phi_arg: f64) -> f64 {
    if exponent < EXP_UNDERFLOW {
        0.0
    } else {
        exponent.exp() * norm_cdf(phi_arg)
    }
}

// Relative closeness to the switching diagonal sigma1 y = sigma2 x. Inside
// this band the off-diagonal formulas hit 0/0-style saturation, so the exact
// diagonal branch is used instead.
#[inline]
fn on_diagonal(sx: f64, sy: f64) -> bool {
    (sy - sx).abs() < 1e-12 * (1.0 + sx + sy)
}

/// Joint survival probability under optimal transfers for independent noise,
/// zero transfer bound and unit total drift (`rho = 0`, `delta = 0`,
/// `mu_bar = 1`):
///
/// ```text
/// 1 - exp(-2 min(x,y)) - 2 min(x,y) exp(-x-y)
/// ```
pub fn value_mckean_shepp(x: f64, y: f64) -> f64 {
    assert!(x >= 0.0 && y >= 0.0, "endowments must be nonnegative");
    let m = x.min(y);
    1.0 - exp_or_zero(-2.0 * m) - 2.0 * m * exp_or_zero(-x - y)
}

/// Joint survival probability under optimal transfers for independent noise
/// and a negative transfer bound `delta in (-min(mu1, mu2), 0)`:
///
/// ```text
/// 1 - exp(-(mu_bar+delta) min(x,y))
///   - (mu_bar+delta)/delta * exp(-mu_bar(x+y)) * (1 - exp(-2 delta min(x,y)))
/// ```
///
/// Implemented exactly in this printed form. Note that its `delta -> 0` limit
/// is `1 - exp(-mu_bar m) - 2 mu_bar m exp(-mu_bar(x+y))`, which does *not*
/// reduce to [`value_mckean_shepp`] at `mu_bar = 1` (the first exponent lacks
/// a factor 2), and the formula can leave `[0, 1]` for small endowments.
/// Monte Carlo comparison favors the variant with `2(mu_bar+delta)` in the
/// first exponent; this function still evaluates the form above verbatim.
pub fn value_grandits(x: f64, y: f64, params: &ModelParams) -> Result<f64, ClosedFormError> {
    assert!(x >= 0.0 && y >= 0.0, "endowments must be nonnegative");
    let (mu1, mu2) = match (params.mu1, params.mu2) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(ClosedFormError::MissingDriftRates),
    };
    let delta = params.delta;
    if delta >= 0.0 {
        return Err(ClosedFormError::DeltaNotNegative(delta));
    }
    if delta <= -mu1.min(mu2) {
        return Err(ClosedFormError::DeltaTooNegative {
            delta,
            bound: -mu1.min(mu2),
        });
    }
    let mu_bar = params.mu_bar;
    let m = x.min(y);
    // (1 - exp(-2 delta m)) grows like exp(|2 delta| m); folding it into the
    // outer exponential keeps both pieces bounded.
    let correction = (mu_bar + delta) / delta
        * (exp_or_zero(-mu_bar * (x + y)) - exp_or_zero(-mu_bar * (x + y) - 2.0 * delta * m));
    Ok(1.0 - exp_or_zero(-(mu_bar + delta) * m) - correction)
}

/// Value function for perfectly positively correlated noise with unit
/// diffusion, `delta = 0` and `mu_bar = 1`.
pub fn value_rho1_unit(x: f64, y: f64) -> f64 {
    assert!(x >= 0.0 && y >= 0.0, "endowments must be nonnegative");
    if x == 0.0 || y == 0.0 {
        return 0.0;
    }
    if on_diagonal(x, y) {
        return 1.0 - exp_or_zero(-x);
    }
    let m = x.min(y);
    let big = x.max(y);
    let d = (y - x).abs();
    let sd = d.sqrt();
    exp_phi(0.0, big / sd)
        - exp_phi(-2.0 * m, (d - m) / sd)
        - exp_or_zero(-0.5 * (x + y)) * (2.0 * norm_cdf(m / sd) - 1.0)
}

/// Coefficients of the four-term value function in the extended model,
/// evaluated above the diagonal (`sigma1 y > sigma2 x`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedCoefficients {
    /// Scale factor `N = sqrt(sigma2 (sigma1 y - sigma2 x) (mu_bar + delta (sigma1+sigma2)))`;
    /// positive above the diagonal, exactly zero on it.
    pub n: f64,
    /// `A = 2 mu_bar + delta (sigma1 + sigma2)`.
    pub a: f64,
    /// `B = (mu_bar + delta sigma2)(sigma1 + sigma2) - 2 mu_bar sigma1`.
    pub b: f64,
    /// `C = delta sigma1^2 + 3 delta sigma1 sigma2 + 2 (mu_bar + delta sigma2) sigma2`.
    pub c: f64,
}

impl ExtendedCoefficients {
    /// Requires `sigma1 y >= sigma2 x` (otherwise `n` would be NaN).
    pub fn new(x: f64, y: f64, params: &ModelParams) -> Self {
        let (s1, s2) = (params.sigma1, params.sigma2);
        let (mu, d) = (params.mu_bar, params.delta);
        debug_assert!(s1 * y >= s2 * x);
        Self {
            n: (s2 * (s1 * y - s2 * x) * params.eta()).sqrt(),
            a: 2.0 * mu + d * (s1 + s2),
            b: (mu + d * s2) * (s1 + s2) - 2.0 * mu * s1,
            c: d * s1 * s1 + 3.0 * d * s1 * s2 + 2.0 * (mu + d * s2) * s2,
        }
    }
}

/// Value function for perfectly positively correlated noise with diffusion
/// coefficients `sigma1`, `sigma2` and transfer bound `delta`.
///
/// Below the diagonal the mirrored identity
/// `V(x, y; sigma1, sigma2) = V(y, x; sigma2, sigma1)` is applied; on the
/// diagonal the exact single-exponential branch is used.
pub fn value_rho1_extended(x: f64, y: f64, params: &ModelParams) -> Result<f64, ClosedFormError> {
    assert!(x >= 0.0 && y >= 0.0, "endowments must be nonnegative");
    params.validate(ModelKind::Extended)?;
    if params.rho != 1.0 {
        return Err(ClosedFormError::RhoNotOne(params.rho));
    }
    Ok(value_rho1_extended_unchecked(x, y, params))
}

fn value_rho1_extended_unchecked(x: f64, y: f64, params: &ModelParams) -> f64 {
    if x == 0.0 || y == 0.0 {
        return 0.0;
    }
    let (s1, s2) = (params.sigma1, params.sigma2);
    let (mu, d) = (params.mu_bar, params.delta);
    let (sx, sy) = (s2 * x, s1 * y);
    if on_diagonal(sx, sy) {
        return 1.0 - exp_or_zero(-2.0 * mu * x / (s1 * (s1 + s2)));
    }
    if sy < sx {
        let mut swapped = *params;
        swapped.sigma1 = s2;
        swapped.sigma2 = s1;
        return value_rho1_extended_unchecked(y, x, &swapped);
    }
    let k = ExtendedCoefficients::new(x, y, params);
    let s = s1 + s2;
    let mds2 = mu + d * s2;
    let t1 = exp_phi(0.0, (d * s2 * x + mds2 * y) / k.n);
    let t2 = exp_phi(
        -2.0 * mu * (x + y) / (s * s),
        (k.a * s2 * x + k.b * y) / (s * k.n),
    );
    let t3 = exp_phi(
        -2.0 * mds2 * x / (s1 * s1),
        (mds2 * y - (k.a + d * s2) * (s2 / s1) * x) / k.n,
    );
    let t4 = exp_phi(
        -2.0 * mu * y / (s * s) - (2.0 * s2 * x / (s1 * s1)) * (mu * s2 / (s * s) + d),
        (k.b * y - k.c * (s2 / s1) * x) / (s * k.n),
    );
    t1 - t2 - t3 + t4
}

/// Coefficients of the four-term no-collaboration survival probability in the
/// mixed-ordering cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalCoefficients {
    /// `L = sqrt((sigma1 y - sigma2 x)(mu1 sigma2 - mu2 sigma1))`; real exactly
    /// when drift/diffusion ratios and scaled endowments order oppositely.
    pub l: f64,
    /// `D(1,2) = mu1 - 2 mu2 sigma1 / sigma2`.
    pub d12: f64,
    /// `D(2,1) = mu2 - 2 mu1 sigma2 / sigma1`.
    pub d21: f64,
}

impl SurvivalCoefficients {
    pub fn new(x: f64, y: f64, mu1: f64, mu2: f64, s1: f64, s2: f64) -> Self {
        Self {
            l: ((s1 * y - s2 * x) * (mu1 * s2 - mu2 * s1)).sqrt(),
            d12: mu1 - 2.0 * mu2 * s1 / s2,
            d21: mu2 - 2.0 * mu1 * s2 / s1,
        }
    }
}

/// Probability that both firms survive forever without any transfers, for
/// perfectly positively correlated noise (`rho = 1`) and positive drift
/// rates.
///
/// When the firm with the lower drift/diffusion ratio also starts with the
/// lower scaled endowment, its path stays below the other firm's forever and
/// the probability collapses to a single exponential; otherwise the paths
/// cross once and a four-term formula applies.
pub fn survival_no_collab(x: f64, y: f64, params: &ModelParams) -> Result<f64, ClosedFormError> {
    assert!(x >= 0.0 && y >= 0.0, "endowments must be nonnegative");
    if params.rho != 1.0 {
        return Err(ClosedFormError::RhoNotOne(params.rho));
    }
    let (mu1, mu2) = match (params.mu1, params.mu2) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(ClosedFormError::MissingDriftRates),
    };
    if mu1 <= 0.0 || mu2 <= 0.0 {
        return Err(ClosedFormError::DriftNotPositive { mu1, mu2 });
    }
    let (s1, s2) = (params.sigma1, params.sigma2);
    if x == 0.0 || y == 0.0 {
        return Ok(0.0);
    }
    let r1 = mu1 / s1;
    let r2 = mu2 / s2;
    let single_branch = r1 == r2 || (r1 > r2 && x / s1 >= y / s2) || (r1 < r2 && x / s1 <= y / s2);
    if single_branch {
        let m = (mu1 * x / (s1 * s1)).min(mu2 * y / (s2 * s2));
        return Ok(1.0 - exp_or_zero(-2.0 * m));
    }
    let k = SurvivalCoefficients::new(x, y, mu1, mu2, s1, s2);
    let mn = (mu2 * x).min(mu1 * y);
    let e1 = -2.0 * mu1 * x / (s1 * s1);
    let e2 = -2.0 * mu2 * y / (s2 * s2);
    Ok(exp_phi(0.0, (mu1 * y - mu2 * x).abs() / k.l)
        - exp_phi(e1, (mu1 * y + k.d21 * x) / k.l)
        - exp_phi(e2, (mu2 * x + k.d12 * y) / k.l)
        + exp_phi(
            e1 + e2 + 4.0 * mn / (s1 * s2),
            (k.d21 * x + k.d12 * y + 2.0 * mn) / k.l,
        ))
}

/// Gain of collaboration: optimal-transfer survival probability minus the
/// no-transfer survival probability. Negative values are possible when
/// `delta < -min(mu1/sigma1, mu2/sigma2)` (forced collaboration).
pub fn gain_of_collaboration(x: f64, y: f64, params: &ModelParams) -> Result<f64, ClosedFormError> {
    Ok(value_rho1_extended(x, y, params)? - survival_no_collab(x, y, params)?)
}

/// Which coordinate is sent to infinity in [`boundary_asymptote`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryAxis {
    /// `x -> inf`; the remaining coordinate is `y`.
    X,
    /// `y -> inf`; the remaining coordinate is `x`.
    Y,
}

/// Limit of the value function as one endowment tends to infinity:
/// the surviving firm's one-dimensional ruin problem at its own best drift.
///
/// ```text
/// x -> inf:  1 - exp(-2 (mu_bar + delta sigma1) y / sigma2^2)
/// y -> inf:  1 - exp(-2 (mu_bar + delta sigma2) x / sigma1^2)
/// ```
pub fn boundary_asymptote(axis: BoundaryAxis, coordinate: f64, params: &ModelParams) -> f64 {
    assert!(coordinate >= 0.0, "coordinate must be nonnegative");
    let exponent = match axis {
        BoundaryAxis::X => {
            -2.0 * (params.mu_bar + params.delta * params.sigma1) * coordinate
                / (params.sigma2 * params.sigma2)
        }
        BoundaryAxis::Y => {
            -2.0 * (params.mu_bar + params.delta * params.sigma2) * coordinate
                / (params.sigma1 * params.sigma1)
        }
    };
    1.0 - exp_or_zero(exponent)
}
