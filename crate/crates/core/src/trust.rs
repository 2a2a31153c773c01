//! Bounded integrity score and the moving-average trust schemes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maps an unbounded utility to `[-1, 1]` via `sign(u)·(1 − e^{−|u|})`.
pub fn weighted_score(u: f64) -> f64 {
    if u > 0.0 {
        -(-u).exp_m1()
    } else if u < 0.0 {
        (u).exp_m1()
    } else {
        0.0
    }
}

/// Asymmetric weighted moving-average factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AwmaParams {
    /// Rewarding factor: good history, good slot.
    pub chi_a: f64,
    /// Punishment factor: good history, bad slot.
    pub chi_b_max: f64,
    /// Redemption factor: bad history, good slot.
    pub chi_c_min: f64,
    /// Retrogression factor: bad history, bad slot.
    pub chi_d: f64,
    /// Score threshold separating good from anomalous behaviour.
    pub gamma_onoff: f64,
}

impl Default for AwmaParams {
    fn default() -> Self {
        Self {
            chi_a: 0.99,
            chi_b_max: 0.999,
            chi_c_min: 0.001,
            chi_d: 0.001,
            gamma_onoff: 0.0,
        }
    }
}

impl AwmaParams {
    /// Parameters with every factor equal, which reduces AWMA to EWMA. Skips
    /// the asymmetry check.
    pub fn uniform(alpha: f64, gamma_onoff: f64) -> Self {
        Self {
            chi_a: alpha,
            chi_b_max: alpha,
            chi_c_min: alpha,
            chi_d: alpha,
            gamma_onoff,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("chi_a", self.chi_a),
            ("chi_b_max", self.chi_b_max),
            ("chi_c_min", self.chi_c_min),
            ("chi_d", self.chi_d),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::param(format!("trust.awma.{name}"), format!("must be in (0, 1), got {v}")));
            }
        }
        if self.chi_c_min > 0.1 {
            return Err(Error::param("trust.awma.chi_c_min", "redemption factor must be <= 0.1"));
        }
        if self.chi_b_max < 0.9 {
            return Err(Error::param("trust.awma.chi_b_max", "punishment factor must be >= 0.9"));
        }
        if !(-1.0..=1.0).contains(&self.gamma_onoff) {
            return Err(Error::param("trust.awma.gamma_onoff", "threshold must be in [-1, 1]"));
        }
        Ok(())
    }
}

/// Which of the four AWMA update rules applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AwmaCase {
    /// Good history, good slot.
    Reward,
    /// Good history, bad slot.
    Punish,
    /// Bad history, good slot.
    Redeem,
    /// Bad history, bad slot.
    Retrogress,
}

impl AwmaCase {
    pub fn select(prev: f64, w: f64, gamma_onoff: f64) -> Self {
        match (prev > gamma_onoff, w > gamma_onoff) {
            (true, true) => AwmaCase::Reward,
            (true, false) => AwmaCase::Punish,
            (false, true) => AwmaCase::Redeem,
            (false, false) => AwmaCase::Retrogress,
        }
    }

    pub fn factor(self, params: &AwmaParams) -> f64 {
        match self {
            AwmaCase::Reward => params.chi_a,
            AwmaCase::Punish => params.chi_b_max,
            AwmaCase::Redeem => params.chi_c_min,
            AwmaCase::Retrogress => params.chi_d,
        }
    }
}

/// Running values of the three moving-average schemes.
///
/// Each scheme starts empty; the first score initialises it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TrustState {
    pub cwma_mean: f64,
    pub cwma_count: u64,
    pub ewma_value: Option<f64>,
    pub awma_value: Option<f64>,
}

impl TrustState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cwma(&self) -> Option<f64> {
        (self.cwma_count > 0).then_some(self.cwma_mean)
    }
}

/// `(1 − factor)·prev + factor·w`, written so that `w == prev` is an exact
/// fixed point.
fn blend(prev: f64, w: f64, factor: f64) -> f64 {
    prev + factor * (w - prev)
}

/// Equal-weight running mean over all scores so far.
pub fn cwma_step(state: TrustState, w: f64) -> TrustState {
    let count = state.cwma_count + 1;
    TrustState {
        cwma_mean: state.cwma_mean + (w - state.cwma_mean) / count as f64,
        cwma_count: count,
        ..state
    }
}

pub fn ewma_step(state: TrustState, w: f64, alpha: f64) -> TrustState {
    TrustState {
        ewma_value: Some(state.ewma_value.map_or(w, |prev| blend(prev, w, alpha))),
        ..state
    }
}

pub fn awma_step(state: TrustState, w: f64, params: &AwmaParams) -> TrustState {
    let next = match state.awma_value {
        None => w,
        Some(prev) => {
            let case = AwmaCase::select(prev, w, params.gamma_onoff);
            blend(prev, w, case.factor(params))
        }
    };
    TrustState {
        awma_value: Some(next),
        ..state
    }
}
