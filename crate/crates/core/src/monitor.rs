//! Stochastic model of the imperfect anomaly monitor.
//!
//! Every device input is classified as not compromised (α), compromised (β)
//! or undecided (μ). The monitor is not a detector: it draws each verdict
//! from the conditional probabilities of a [`MonitorProfile`] given the
//! ground truth supplied by the adversary.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SIMPLEX_TOL: f64 = 1e-12;

/// Ternary monitoring verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    /// α
    NotCompromised,
    /// β
    Compromised,
    /// μ
    Undecided,
}

/// Conditional verdict probabilities.
///
/// `a1..a3` apply to truly compromised inputs (verdict compromised /
/// undecided / not compromised), `b1..b3` to clean inputs (verdict not
/// compromised / undecided / compromised).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorProfile {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

impl MonitorProfile {
    pub fn new(a: [f64; 3], b: [f64; 3]) -> Result<Self> {
        let profile = Self {
            a1: a[0],
            a2: a[1],
            a3: a[2],
            b1: b[0],
            b2: b[1],
            b3: b[2],
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Symmetric profile with `a1 = b1 = p_detect`, `a3 = b3 = p_error` and
    /// the remainder undecided.
    pub fn from_pdetect(p_detect: f64, p_error: f64) -> Result<Self> {
        if !(0.5..=1.0).contains(&p_detect) {
            return Err(Error::param(
                "monitor.p_detect",
                format!("must be in [0.5, 1], got {p_detect}"),
            ));
        }
        if !(0.0..=1.0).contains(&p_error) {
            return Err(Error::param(
                "monitor.p_error",
                format!("must be in [0, 1], got {p_error}"),
            ));
        }
        if p_detect + p_error > 1.0 + SIMPLEX_TOL {
            return Err(Error::param(
                "monitor.p_error",
                format!("p_detect + p_error must not exceed 1, got {}", p_detect + p_error),
            ));
        }
        let undecided = (1.0 - p_detect - p_error).max(0.0);
        Self::new(
            [p_detect, undecided, p_error],
            [p_detect, undecided, p_error],
        )
    }

    /// A monitor that always reports the truth.
    pub fn perfect() -> Self {
        Self {
            a1: 1.0,
            a2: 0.0,
            a3: 0.0,
            b1: 1.0,
            b2: 0.0,
            b3: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a1", self.a1),
            ("a2", self.a2),
            ("a3", self.a3),
            ("b1", self.b1),
            ("b2", self.b2),
            ("b3", self.b3),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(
                    format!("monitor.{name}"),
                    format!("must be a probability, got {v}"),
                ));
            }
        }
        if (self.a1 + self.a2 + self.a3 - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::param("monitor", "a1 + a2 + a3 must equal 1"));
        }
        if (self.b1 + self.b2 + self.b3 - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::param("monitor", "b1 + b2 + b3 must equal 1"));
        }
        if self.p_detect() < 0.5 - SIMPLEX_TOL {
            return Err(Error::param(
                "monitor.p_detect",
                format!("(a1 + b1) / 2 must be at least 0.5, got {}", self.p_detect()),
            ));
        }
        Ok(())
    }

    pub fn p_detect(&self) -> f64 {
        (self.a1 + self.b1) / 2.0
    }

    pub fn p_uncertain(&self) -> f64 {
        (self.a2 + self.b2) / 2.0
    }

    pub fn p_error(&self) -> f64 {
        (self.a3 + self.b3) / 2.0
    }

    /// Draws one verdict for an input whose ground truth is `compromised`.
    pub fn classify<R: Rng + ?Sized>(&self, compromised: bool, rng: &mut R) -> Outcome {
        let (correct, wrong, hit, miss) = if compromised {
            (self.a1, self.a3, Outcome::Compromised, Outcome::NotCompromised)
        } else {
            (self.b1, self.b3, Outcome::NotCompromised, Outcome::Compromised)
        };
        let u: f64 = rng.random();
        if u < correct {
            hit
        } else if wrong > 0.0 && u >= 1.0 - wrong {
            miss
        } else {
            Outcome::Undecided
        }
    }
}

/// Per-slot verdict tally.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObservationCounts {
    pub n_alpha: u64,
    pub n_beta: u64,
    pub n_mu: u64,
}

impl ObservationCounts {
    pub fn new(n_alpha: u64, n_beta: u64, n_mu: u64) -> Self {
        Self {
            n_alpha,
            n_beta,
            n_mu,
        }
    }

    /// Total number of verdicts, `N`.
    pub fn total(&self) -> u64 {
        self.n_alpha + self.n_beta + self.n_mu
    }

    pub fn record(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::NotCompromised => self.n_alpha += 1,
            Outcome::Compromised => self.n_beta += 1,
            Outcome::Undecided => self.n_mu += 1,
        }
    }

    pub fn from_outcomes<'a, I>(outcomes: I) -> Self
    where
        I: IntoIterator<Item = &'a Outcome>,
    {
        let mut counts = Self::default();
        for &o in outcomes {
            counts.record(o);
        }
        counts
    }
}

impl std::ops::Add for ObservationCounts {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            n_alpha: self.n_alpha + rhs.n_alpha,
            n_beta: self.n_beta + rhs.n_beta,
            n_mu: self.n_mu + rhs.n_mu,
        }
    }
}

impl std::ops::AddAssign for ObservationCounts {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl std::ops::Sub for ObservationCounts {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self {
            n_alpha: self.n_alpha - rhs.n_alpha,
            n_beta: self.n_beta - rhs.n_beta,
            n_mu: self.n_mu - rhs.n_mu,
        }
    }
}

/// Classifies every device input of one slot.
///
/// Verdicts are drawn independently per device, in device order, so the
/// result is a pure function of `truth`, `profile` and the state of `rng`.
pub fn observe<R: Rng + ?Sized>(
    truth: &[bool],
    profile: &MonitorProfile,
    rng: &mut R,
) -> Result<(Vec<Outcome>, ObservationCounts)> {
    if truth.is_empty() {
        return Err(Error::param("n_devices", "at least one device is required"));
    }
    let verdicts: Vec<Outcome> = truth
        .iter()
        .map(|&compromised| profile.classify(compromised, rng))
        .collect();
    let counts = ObservationCounts::from_outcomes(&verdicts);
    Ok((verdicts, counts))
}
