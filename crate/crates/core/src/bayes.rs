//! Posterior beliefs over the three monitoring outcomes.
//!
//! With a uniform Dirichlet(1, 1, 1) prior on the outcome probabilities and a
//! multinomial likelihood, the posterior predictive probability of each
//! outcome is `(n_i + 1) / (N + 3)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monitor::ObservationCounts;

const SIMPLEX_TOL: f64 = 1e-9;

/// Posterior beliefs `(R_α, R_β, R_μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefVector {
    pub r_alpha: f64,
    pub r_beta: f64,
    pub r_mu: f64,
}

impl BeliefVector {
    pub fn sum(&self) -> f64 {
        self.r_alpha + self.r_beta + self.r_mu
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.r_alpha, self.r_beta, self.r_mu]
    }
}

/// Posterior beliefs for one set of counts. Requires `N >= 1`.
pub fn posterior(counts: &ObservationCounts) -> Result<BeliefVector> {
    let n = counts.total();
    if n == 0 {
        return Err(Error::param("counts", "posterior requires at least one observation"));
    }
    let denom = (n + 3) as f64;
    Ok(BeliefVector {
        r_alpha: (counts.n_alpha + 1) as f64 / denom,
        r_beta: (counts.n_beta + 1) as f64 / denom,
        r_mu: (counts.n_mu + 1) as f64 / denom,
    })
}

/// Multinomial pmf `N! / (n_α! n_β! n_μ!) · θ_α^n_α θ_β^n_β θ_μ^n_μ`,
/// evaluated in log space.
pub fn multinomial_likelihood(counts: &ObservationCounts, theta: [f64; 3]) -> Result<f64> {
    if theta.iter().any(|&t| !(-SIMPLEX_TOL..=1.0 + SIMPLEX_TOL).contains(&t))
        || (theta.iter().sum::<f64>() - 1.0).abs() > SIMPLEX_TOL
    {
        return Err(Error::param(
            "theta",
            format!("{theta:?} is not on the probability simplex"),
        ));
    }
    let ns = [counts.n_alpha, counts.n_beta, counts.n_mu];
    let mut log_p = ln_factorial(counts.total());
    for (&k, &t) in ns.iter().zip(&theta) {
        if k == 0 {
            continue;
        }
        if t <= 0.0 {
            return Ok(0.0);
        }
        log_p += k as f64 * t.ln() - ln_factorial(k);
    }
    Ok(log_p.exp())
}

/// Marginal probability of the observed counts under the uniform prior,
/// `N! / (N + 2)! = 1 / ((N + 1)(N + 2))`.
pub fn marginal_evidence(n: u64) -> f64 {
    let n = n as f64;
    1.0 / ((n + 1.0) * (n + 2.0))
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}
