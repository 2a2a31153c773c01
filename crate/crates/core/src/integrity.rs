//! Per-slot data-integrity utility.
//!
//! Costs turn verdict counts into deviations from the all-clean reference
//! point; the prospect-theory utility then combines an S-shaped value
//! function with inverse-S probability weighting of the posterior beliefs.
//! An expected-utility baseline is provided for comparison.

use serde::{Deserialize, Serialize};

use crate::bayes::BeliefVector;
use crate::error::{Error, Result};
use crate::monitor::ObservationCounts;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "model")]
pub enum CostKind {
    /// Undecided inputs cost the midpoint of clean and compromised.
    Optimistic,
    /// Undecided inputs lean towards the compromised cost with weight `w2`.
    Conservative { w2: f64 },
}

/// Per-device costs of each verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub c_n: f64,
    pub c_u: f64,
    pub c_c: f64,
    /// Average decision cost per device. Cancels out of every deviation.
    pub c: f64,
    pub kind: CostKind,
}

impl CostModel {
    pub fn optimistic(c_n: f64, c_c: f64, c: f64) -> Result<Self> {
        let model = Self {
            c_n,
            c_u: (c_c + c_n) / 2.0,
            c_c,
            c,
            kind: CostKind::Optimistic,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn conservative(c_n: f64, c_c: f64, w2: f64, c: f64) -> Result<Self> {
        if !(w2 > 0.5 && w2 <= 1.0) {
            return Err(Error::param("costs.w2", format!("must be in (0.5, 1], got {w2}")));
        }
        let model = Self {
            c_n,
            c_u: (1.0 - w2) * c_n + w2 * c_c,
            c_c,
            c,
            kind: CostKind::Conservative { w2 },
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c_n", self.c_n), ("c_c", self.c_c), ("c", self.c)] {
            if !v.is_finite() {
                return Err(Error::param(format!("costs.{name}"), "must be finite"));
            }
        }
        if !(self.c_n < self.c_u && self.c_u <= self.c_c) {
            return Err(Error::param(
                "costs",
                format!(
                    "require c_n < c_u <= c_c, got c_n={} c_u={} c_c={}",
                    self.c_n, self.c_u, self.c_c
                ),
            ));
        }
        Ok(())
    }

    /// Same costs with a different average decision cost `c`.
    pub fn with_decision_cost(mut self, c: f64) -> Self {
        self.c = c;
        self
    }
}

impl Default for CostModel {
    fn default() -> Self {
        Self::optimistic(0.01, 0.1, 0.1).expect("default costs are valid")
    }
}

/// Weight of the compromised cost that reproduces the default conservative
/// undecided cost `c_u = 0.09` with `c_n = 0.01`, `c_c = 0.1`.
pub const DEFAULT_CONSERVATIVE_W2: f64 = 8.0 / 9.0;

/// Prospect-theory parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PtParams {
    /// Loss aversion, `> 1`.
    pub lambda: f64,
    /// Risk aversion exponent, `(0, 1)`.
    pub gamma: f64,
    /// Gain weighting exponent, `[0.5, 1)`.
    pub rho: f64,
    /// Loss weighting exponent, `[0.5, 1)`.
    pub omega: f64,
}

impl Default for PtParams {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            gamma: 0.5,
            rho: 0.69,
            omega: 0.63,
        }
    }
}

impl PtParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 1.0 && self.lambda.is_finite()) {
            return Err(Error::param("pt.lambda", format!("must be > 1, got {}", self.lambda)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::param("pt.gamma", format!("must be in (0, 1), got {}", self.gamma)));
        }
        if !(0.5..1.0).contains(&self.rho) {
            return Err(Error::param("pt.rho", format!("must be in [0.5, 1), got {}", self.rho)));
        }
        if !(0.5..1.0).contains(&self.omega) {
            return Err(Error::param("pt.omega", format!("must be in [0.5, 1), got {}", self.omega)));
        }
        Ok(())
    }
}

/// Signed profit deviations from the reference point, in cost units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationVector {
    pub delta_alpha: f64,
    pub delta_beta: f64,
    pub delta_mu: f64,
}

impl DeviationVector {
    pub fn as_array(&self) -> [f64; 3] {
        [self.delta_alpha, self.delta_beta, self.delta_mu]
    }
}

/// Deviations of each outcome's profit `N·c − n_i·c_i` from the reference
/// profit `N·(c − c_n)`. The `N·c` terms cancel, so `c` never enters.
pub fn deviations(counts: &ObservationCounts, costs: &CostModel) -> DeviationVector {
    let n = counts.total() as f64;
    let reference = n * costs.c_n;
    DeviationVector {
        delta_alpha: (n - counts.n_alpha as f64) * costs.c_n,
        delta_beta: reference - counts.n_beta as f64 * costs.c_c,
        delta_mu: reference - counts.n_mu as f64 * costs.c_u,
    }
}

/// S-shaped value function: `δ^γ` for gains, `−λ(−δ)^γ` for losses.
pub fn value(delta: f64, pt: &PtParams) -> f64 {
    if delta >= 0.0 {
        delta.powf(pt.gamma)
    } else {
        -pt.lambda * (-delta).powf(pt.gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Gain,
    Loss,
}

impl Domain {
    /// Zero deviations count as gains.
    pub fn of(delta: f64) -> Self {
        if delta >= 0.0 {
            Domain::Gain
        } else {
            Domain::Loss
        }
    }
}

/// Inverse-S probability weighting `p^e / (p^e + (1 − p)^e)^(1/e)` with
/// `e = ρ` for gains and `e = ω` for losses.
pub fn weight(p: f64, domain: Domain, pt: &PtParams) -> f64 {
    let e = match domain {
        Domain::Gain => pt.rho,
        Domain::Loss => pt.omega,
    };
    let pe = p.powf(e);
    pe / (pe + (1.0 - p).powf(e)).powf(1.0 / e)
}

/// Prospect-theory utility `Σ V(δ_i)·W(R_i)`; each term is weighted in the
/// domain given by the sign of its deviation.
pub fn pt_utility(beliefs: &BeliefVector, devs: &DeviationVector, pt: &PtParams) -> f64 {
    devs.as_array()
        .into_iter()
        .zip(beliefs.as_array())
        .map(|(d, r)| value(d, pt) * weight(r, Domain::of(d), pt))
        .sum()
}

/// Form of the expected-utility baseline.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EutMode {
    /// Risk-neutral: identity value and identity weights.
    #[default]
    Identity,
    /// Prospect-theory value function with the raw beliefs as weights.
    PtValueNoWeights,
}

/// Risk-neutral expected utility `Σ δ_i·R_i`.
pub fn eut_utility(beliefs: &BeliefVector, devs: &DeviationVector) -> f64 {
    devs.as_array()
        .into_iter()
        .zip(beliefs.as_array())
        .map(|(d, r)| d * r)
        .sum()
}

pub fn eut_utility_with(
    beliefs: &BeliefVector,
    devs: &DeviationVector,
    mode: EutMode,
    pt: &PtParams,
) -> f64 {
    match mode {
        EutMode::Identity => eut_utility(beliefs, devs),
        EutMode::PtValueNoWeights => devs
            .as_array()
            .into_iter()
            .zip(beliefs.as_array())
            .map(|(d, r)| value(d, pt) * r)
            .sum(),
    }
}
