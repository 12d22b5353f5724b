//! Model parameters, admissibility constraints, and the transfer policies.
//!
//! Two firms hold endowments `x` and `y`. Firm 1 receives an instantaneous
//! drift allocation `u` out of the total drift `mu_bar`, firm 2 receives the
//! remainder `mu_bar - u`. The allocation is bounded so that each firm's
//! relative drift stays above `-delta`:
//!
//! ```text
//! u in [-delta * sigma1, mu_bar + delta * sigma2]
//! ```
//!
//! The base model has `sigma1 = sigma2 = 1` and requires the individual drift
//! rates `mu1`, `mu2`; the extended model allows arbitrary positive diffusion
//! coefficients and only needs the total drift `mu_bar`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which admissibility regime a parameter set is validated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Unit diffusion coefficients, individual drifts required,
    /// `delta > -min(mu1, mu2)`.
    Base,
    /// Arbitrary positive diffusion coefficients,
    /// `delta > -mu_bar / (sigma1 + sigma2)`.
    Extended,
}

/// Full parameterization of the two-firm model.
///
/// `mu_bar` is stored redundantly rather than derived from `mu1 + mu2`:
/// extended-model uses only need the total drift and may leave the individual
/// rates unset. When both are present, [`ModelParams::validate`] checks the
/// sum for exact (floating-point) consistency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Drift rate of firm 1; required by the base model and by the
    /// no-collaboration survival formula.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu1: Option<f64>,
    /// Drift rate of firm 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu2: Option<f64>,
    /// Total drift `mu1 + mu2` shared between the firms.
    pub mu_bar: f64,
    /// Diffusion coefficient of firm 1.
    pub sigma1: f64,
    /// Diffusion coefficient of firm 2.
    pub sigma2: f64,
    /// Correlation of the two driving Brownian motions, in `[-1, 1]`.
    pub rho: f64,
    /// Transfer bound: each firm's relative drift stays `>= -delta`.
    pub delta: f64,
}

impl ModelParams {
    /// Base-model parameters (`sigma1 = sigma2 = 1`) with explicit drift rates.
    pub fn base(mu1: f64, mu2: f64, rho: f64, delta: f64) -> Self {
        Self {
            mu1: Some(mu1),
            mu2: Some(mu2),
            mu_bar: mu1 + mu2,
            sigma1: 1.0,
            sigma2: 1.0,
            rho,
            delta,
        }
    }

    /// Extended-model parameters; individual drift rates left unset.
    pub fn extended(mu_bar: f64, sigma1: f64, sigma2: f64, rho: f64, delta: f64) -> Self {
        Self {
            mu1: None,
            mu2: None,
            mu_bar,
            sigma1,
            sigma2,
            rho,
            delta,
        }
    }

    /// Total available relative drift `eta = mu_bar + delta (sigma1 + sigma2)`.
    pub fn eta(&self) -> f64 {
        self.mu_bar + self.delta * (self.sigma1 + self.sigma2)
    }

    /// Admissible interval `[-delta sigma1, mu_bar + delta sigma2]` for the
    /// drift allocation of firm 1.
    pub fn drift_bounds(&self) -> (f64, f64) {
        (
            -self.delta * self.sigma1,
            self.mu_bar + self.delta * self.sigma2,
        )
    }

    /// Signed distance proxy `sigma1 * y - sigma2 * x` to the policy-switch
    /// diagonal; positive above it (firm 1 is the scaled-poorer firm).
    pub fn diagonal_gap(&self, x: f64, y: f64) -> f64 {
        self.sigma1 * y - self.sigma2 * x
    }

    /// Checks every invariant for the stated model kind; reports the first
    /// violated constraint.
    pub fn validate(&self, kind: ModelKind) -> Result<(), ParamError> {
        for (name, value) in [
            ("mu_bar", self.mu_bar),
            ("sigma1", self.sigma1),
            ("sigma2", self.sigma2),
            ("rho", self.rho),
            ("delta", self.delta),
        ] {
            if !value.is_finite() {
                return Err(ParamError::NonFinite(name));
            }
        }
        if let Some(mu1) = self.mu1 {
            if !mu1.is_finite() {
                return Err(ParamError::NonFinite("mu1"));
            }
        }
        if let Some(mu2) = self.mu2 {
            if !mu2.is_finite() {
                return Err(ParamError::NonFinite("mu2"));
            }
        }
        if self.sigma1 <= 0.0 {
            return Err(ParamError::SigmaNotPositive("sigma1"));
        }
        if self.sigma2 <= 0.0 {
            return Err(ParamError::SigmaNotPositive("sigma2"));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(ParamError::RhoOutOfRange(self.rho));
        }
        if self.mu_bar <= 0.0 {
            return Err(ParamError::MuBarNotPositive(self.mu_bar));
        }
        if let (Some(mu1), Some(mu2)) = (self.mu1, self.mu2) {
            if mu1 + mu2 != self.mu_bar {
                return Err(ParamError::MuBarInconsistent {
                    mu_bar: self.mu_bar,
                    sum: mu1 + mu2,
                });
            }
        }
        match kind {
            ModelKind::Base => {
                if self.sigma1 != 1.0 || self.sigma2 != 1.0 {
                    return Err(ParamError::BaseSigmaNotUnit);
                }
                let (mu1, mu2) = match (self.mu1, self.mu2) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return Err(ParamError::MissingDriftRates),
                };
                if mu1 <= 0.0 {
                    return Err(ParamError::DriftNotPositive("mu1"));
                }
                if mu2 <= 0.0 {
                    return Err(ParamError::DriftNotPositive("mu2"));
                }
                if self.delta <= -mu1.min(mu2) {
                    return Err(ParamError::DeltaBelowBaseBound {
                        delta: self.delta,
                        bound: -mu1.min(mu2),
                    });
                }
            }
            ModelKind::Extended => {
                let bound = -self.mu_bar / (self.sigma1 + self.sigma2);
                if self.delta <= bound {
                    return Err(ParamError::DeltaBelowExtendedBound {
                        delta: self.delta,
                        bound,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Constraint violations reported by [`ModelParams::validate`], first failure
/// wins.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{0} must be finite (NaN/Inf rejected)")]
    NonFinite(&'static str),
    #[error("{0} must be > 0")]
    SigmaNotPositive(&'static str),
    #[error("rho = {0} outside [-1, 1]")]
    RhoOutOfRange(f64),
    #[error("mu_bar = {0} must be > 0")]
    MuBarNotPositive(f64),
    #[error("mu_bar = {mu_bar} inconsistent with mu1 + mu2 = {sum}")]
    MuBarInconsistent { mu_bar: f64, sum: f64 },
    #[error("base model requires sigma1 = sigma2 = 1")]
    BaseSigmaNotUnit,
    #[error("base model requires mu1 and mu2")]
    MissingDriftRates,
    #[error("{0} must be > 0 in the base model")]
    DriftNotPositive(&'static str),
    #[error("delta = {delta} violates delta > -min(mu1, mu2) = {bound}")]
    DeltaBelowBaseBound { delta: f64, bound: f64 },
    #[error("delta = {delta} violates delta > -mu_bar/(sigma1+sigma2) = {bound}")]
    DeltaBelowExtendedBound { delta: f64, bound: f64 },
}

/// An endowment pair; both coordinates are nonnegative by construction.
/// Ruin is the first time either coordinate reaches zero or below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    x: f64,
    y: f64,
}

impl State {
    pub fn new(x: f64, y: f64) -> Result<Self, StateError> {
        if !x.is_finite() || !y.is_finite() {
            return Err(StateError::NonFinite);
        }
        if x < 0.0 || y < 0.0 {
            return Err(StateError::Negative { x, y });
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum StateError {
    #[error("endowments must be finite")]
    NonFinite,
    #[error("endowments must be nonnegative, got ({x}, {y})")]
    Negative { x: f64, y: f64 },
}

/// A Markovian rule mapping the current endowment pair to a drift allocation
/// for firm 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    /// Push the scaled-poorer firm with everything available: firm 1 gets
    /// `mu_bar + delta sigma2` on `{sigma1 y >= sigma2 x}` and `-delta sigma1`
    /// otherwise. Optimal for the ruin-minimization problem.
    ///
    /// On the switching diagonal itself the full drift goes to firm 1 (the
    /// tie is part of the `>=` branch). The process spends Lebesgue-null time
    /// there, so the tie-break does not change the law; it is a convention,
    /// not a requirement.
    PushBottom,
    /// No transfers: firm 1 keeps its own drift `mu1` (requires `mu1` to be
    /// set in the parameters).
    NoCollaboration,
    /// Fixed allocation, clamped into the admissible interval.
    Constant(f64),
}

impl Policy {
    /// Drift allocation for firm 1 at the given endowments.
    ///
    /// Always lies in `[-delta sigma1, mu_bar + delta sigma2]` for validated
    /// parameters. Panics if `NoCollaboration` is used without `mu1`.
    pub fn drift(&self, x: f64, y: f64, params: &ModelParams) -> f64 {
        let (lo, hi) = params.drift_bounds();
        match self {
            Policy::PushBottom => {
                if params.diagonal_gap(x, y) >= 0.0 {
                    hi
                } else {
                    lo
                }
            }
            Policy::NoCollaboration => params
                .mu1
                .expect("NoCollaboration policy requires mu1 to be set"),
            Policy::Constant(u) => u.clamp(lo, hi),
        }
    }
}

/// Drift allocation of `policy` at state `s`; see [`Policy::drift`].
pub fn policy_drift(policy: &Policy, s: State, params: &ModelParams) -> f64 {
    policy.drift(s.x(), s.y(), params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric_base() -> ModelParams {
        ModelParams::base(0.5, 0.5, 0.0, 0.0)
    }

    #[test]
    fn validate_accepts_symmetric_base() {
        assert_eq!(symmetric_base().validate(ModelKind::Base), Ok(()));
    }

    #[test]
    fn validate_rejects_delta_at_or_below_base_bound() {
        let p = ModelParams::base(0.5, 0.5, 0.0, -0.6);
        assert!(matches!(
            p.validate(ModelKind::Base),
            Err(ParamError::DeltaBelowBaseBound { .. })
        ));
        // boundary value is also rejected (strict inequality)
        let p = ModelParams::base(0.5, 0.5, 0.0, -0.5);
        assert!(matches!(
            p.validate(ModelKind::Base),
            Err(ParamError::DeltaBelowBaseBound { .. })
        ));
    }

    #[test]
    fn validate_extended_delta_bound() {
        // -0.25 > -1/3 passes without individual drift rates
        let p = ModelParams::extended(1.0, 2.0, 1.0, 1.0, -0.25);
        assert_eq!(p.validate(ModelKind::Extended), Ok(()));
        let p = ModelParams::extended(1.0, 2.0, 1.0, 1.0, -0.34);
        assert!(matches!(
            p.validate(ModelKind::Extended),
            Err(ParamError::DeltaBelowExtendedBound { .. })
        ));
    }

    #[test]
    fn validate_rejects_nan_and_inf() {
        let mut p = symmetric_base();
        p.delta = f64::NAN;
        assert_eq!(
            p.validate(ModelKind::Base),
            Err(ParamError::NonFinite("delta"))
        );
        let mut p = symmetric_base();
        p.mu_bar = f64::INFINITY;
        assert_eq!(
            p.validate(ModelKind::Base),
            Err(ParamError::NonFinite("mu_bar"))
        );
    }

    #[test]
    fn validate_rejects_inconsistent_mu_bar() {
        let mut p = symmetric_base();
        p.mu_bar = 1.5;
        assert!(matches!(
            p.validate(ModelKind::Base),
            Err(ParamError::MuBarInconsistent { .. })
        ));
    }

    #[test]
    fn validate_rejects_bad_sigma_and_rho() {
        let mut p = symmetric_base();
        p.sigma1 = 0.0;
        assert_eq!(
            p.validate(ModelKind::Extended),
            Err(ParamError::SigmaNotPositive("sigma1"))
        );
        let mut p = symmetric_base();
        p.rho = 1.5;
        assert_eq!(
            p.validate(ModelKind::Base),
            Err(ParamError::RhoOutOfRange(1.5))
        );
        let mut p = symmetric_base();
        p.sigma2 = 2.0;
        p.rho = 1.0;
        assert_eq!(
            p.validate(ModelKind::Base),
            Err(ParamError::BaseSigmaNotUnit)
        );
    }

    #[test]
    fn push_bottom_assigns_full_drift_to_poorer_firm() {
        let p = symmetric_base();
        assert_eq!(Policy::PushBottom.drift(1.0, 2.0, &p), 1.0);
        assert_eq!(Policy::PushBottom.drift(2.0, 1.0, &p), 0.0);
        // tie goes to firm 1
        assert_eq!(Policy::PushBottom.drift(1.5, 1.5, &p), 1.0);
    }

    #[test]
    fn push_bottom_uses_scaled_diagonal() {
        let p = ModelParams::extended(1.0, 2.0, 1.0, 1.0, -0.25);
        let (lo, hi) = p.drift_bounds();
        assert_eq!(hi, 1.0 + (-0.25));
        assert_eq!(lo, 0.5);
        // y >= x/2 is the "support firm 1" region
        assert_eq!(Policy::PushBottom.drift(1.0, 0.6, &p), hi);
        assert_eq!(Policy::PushBottom.drift(1.0, 0.4, &p), lo);
        assert_eq!(Policy::PushBottom.drift(1.0, 0.5, &p), hi);
    }

    #[test]
    fn no_collaboration_keeps_own_drift() {
        let p = ModelParams::base(0.25, 0.75, 0.0, 0.0);
        assert_eq!(Policy::NoCollaboration.drift(5.0, 0.1, &p), 0.25);
    }

    #[test]
    fn constant_policy_is_clamped_to_admissible_interval() {
        let p = ModelParams::base(0.5, 0.5, 0.0, 0.25);
        assert_eq!(Policy::Constant(10.0).drift(1.0, 1.0, &p), 1.25);
        assert_eq!(Policy::Constant(-10.0).drift(1.0, 1.0, &p), -0.25);
        assert_eq!(Policy::Constant(0.7).drift(1.0, 1.0, &p), 0.7);
    }

    #[test]
    fn state_rejects_negative_and_nan() {
        assert!(State::new(1.0, 0.0).is_ok());
        assert!(matches!(
            State::new(-0.1, 1.0),
            Err(StateError::Negative { .. })
        ));
        assert_eq!(State::new(f64::NAN, 1.0), Err(StateError::NonFinite));
    }

    #[test]
    fn params_json_round_trip_and_unknown_field_rejection() {
        let text =
            r#"{"mu1":0.5,"mu2":0.5,"mu_bar":1.0,"sigma1":1.0,"sigma2":1.0,"rho":0.0,"delta":0.0}"#;
        let p: ModelParams = serde_json::from_str(text).unwrap();
        assert_eq!(p, symmetric_base());

        let no_drifts = r#"{"mu_bar":1.0,"sigma1":2.0,"sigma2":1.0,"rho":1.0,"delta":-0.25}"#;
        let p: ModelParams = serde_json::from_str(no_drifts).unwrap();
        assert_eq!(p.mu1, None);
        assert_eq!(p.validate(ModelKind::Extended), Ok(()));

        let unknown = r#"{"mu_bar":1.0,"sigma1":1.0,"sigma2":1.0,"rho":0.0,"delta":0.0,"mu3":1.0}"#;
        assert!(serde_json::from_str::<ModelParams>(unknown).is_err());
    }
}
