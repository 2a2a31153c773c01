//! Ground-truth attack generation.
//!
//! Two attackers are modelled: a uniform attacker that keeps a long-run
//! average fraction `p_a` of inputs compromised, and a staged On-Off
//! attacker that is silent in Off stages and compromises a random number of
//! inputs in each On slot.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the per-slot attack magnitude is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Magnitude {
    /// Uniform attacker: `Binomial(n, p_a)` compromised inputs per slot.
    Binomial,
    /// Uniform attacker: exactly `round(n * p_a)` per slot.
    Fixed,
    /// On stages: uniform over `{1, ..., n}`.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformAttack {
    p_a: f64,
    magnitude: Magnitude,
}

impl UniformAttack {
    pub fn new(p_a: f64, magnitude: Magnitude) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_a) {
            return Err(Error::param("attack.p_a", format!("must be in [0, 1], got {p_a}")));
        }
        if magnitude == Magnitude::Uniform {
            return Err(Error::param(
                "attack.magnitude",
                "uniform attacks support `binomial` or `fixed` magnitudes",
            ));
        }
        Ok(Self { p_a, magnitude })
    }

    pub fn p_a(&self) -> f64 {
        self.p_a
    }

    pub fn slot<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<bool> {
        let k = match self.magnitude {
            Magnitude::Fixed => (n as f64 * self.p_a).round() as usize,
            _ => Binomial::new(n as u64, self.p_a)
                .expect("p_a validated")
                .sample(rng) as usize,
        };
        choose_subset(n, k, rng)
    }
}

/// Draws one slot of the uniform attacker with binomial magnitude.
pub fn uniform_attack_slot<R: Rng + ?Sized>(n: usize, p_a: f64, rng: &mut R) -> Result<Vec<bool>> {
    Ok(UniformAttack::new(p_a, Magnitude::Binomial)?.slot(n, rng))
}

/// Marks `k` of `n` inputs as compromised, chosen uniformly at random.
fn choose_subset<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<bool> {
    let mut truth = vec![false; n];
    if k >= n {
        truth.fill(true);
    } else if k > 0 {
        for i in index::sample(rng, n, k) {
            truth[i] = true;
        }
    }
    truth
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageMode {
    Off,
    On,
}

/// Inclusive slot range with an attack mode. Slots are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stage {
    pub start: usize,
    pub end: usize,
    pub mode: StageMode,
}

impl Stage {
    pub fn new(start: usize, end: usize, mode: StageMode) -> Self {
        Self { start, end, mode }
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    fn contains(&self, t: usize) -> bool {
        (self.start..=self.end).contains(&t)
    }
}

/// Contiguous staged schedule covering `[1, T]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OnOffSchedule {
    stages: Vec<Stage>,
}

impl OnOffSchedule {
    pub fn new(stages: Vec<Stage>) -> Result<Self> {
        let field = "attack.stages";
        let first = stages
            .first()
            .ok_or_else(|| Error::param(field, "schedule has no stages"))?;
        if first.start != 1 {
            return Err(Error::param(field, "first stage must start at slot 1"));
        }
        let mut next = 1;
        for (i, s) in stages.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::param(field, format!("stage {} ends before it starts", i + 1)));
            }
            if s.start != next {
                return Err(Error::param(
                    field,
                    format!("stage {} starts at {} but slot {} is next", i + 1, s.start, next),
                ));
            }
            next = s.end + 1;
        }
        let has = |m| stages.iter().any(|s| s.mode == m);
        if !has(StageMode::On) || !has(StageMode::Off) {
            return Err(Error::param(
                field,
                "schedule needs at least one On and one Off stage",
            ));
        }
        Ok(Self { stages })
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    /// Last covered slot, `T`.
    pub fn horizon(&self) -> usize {
        self.stages.last().map_or(0, |s| s.end)
    }

    pub fn mode_at(&self, t: usize) -> Result<StageMode> {
        self.stages
            .iter()
            .find(|s| s.contains(t))
            .map(|s| s.mode)
            .ok_or(Error::SlotOutOfSchedule {
                slot: t,
                horizon: self.horizon(),
            })
    }

    /// Number of (Off, On) slots within `[from, to]`.
    pub fn tally(&self, from: usize, to: usize) -> (usize, usize) {
        let mut off = 0;
        let mut on = 0;
        for s in &self.stages {
            let lo = s.start.max(from);
            let hi = s.end.min(to);
            if lo <= hi {
                match s.mode {
                    StageMode::Off => off += hi - lo + 1,
                    StageMode::On => on += hi - lo + 1,
                }
            }
        }
        (off, on)
    }

    pub fn slot<R: Rng + ?Sized>(
        &self,
        t: usize,
        n: usize,
        magnitude: OnMagnitude,
        rng: &mut R,
    ) -> Result<Vec<bool>> {
        match self.mode_at(t)? {
            StageMode::Off => Ok(vec![false; n]),
            StageMode::On => {
                let k = match magnitude {
                    OnMagnitude::Uniform => rng.random_range(1..=n),
                    OnMagnitude::Fixed(k) => k.min(n),
                };
                Ok(choose_subset(n, k, rng))
            }
        }
    }
}

/// Attack magnitude used in On slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnMagnitude {
    Uniform,
    Fixed(usize),
}

/// Draws slot `t` of an On-Off attack with magnitude uniform on `{1..n}`.
pub fn onoff_attack_slot<R: Rng + ?Sized>(
    schedule: &OnOffSchedule,
    t: usize,
    n: usize,
    rng: &mut R,
) -> Result<Vec<bool>> {
    schedule.slot(t, n, OnMagnitude::Uniform, rng)
}

/// Off:On 2:1 over 500 slots: attacks in 101..=150 and 251..=300.
pub fn schedule_2_to_1() -> OnOffSchedule {
    use StageMode::*;
    OnOffSchedule::new(vec![
        Stage::new(1, 100, Off),
        Stage::new(101, 150, On),
        Stage::new(151, 250, Off),
        Stage::new(251, 300, On),
        Stage::new(301, 500, Off),
    ])
    .expect("static schedule")
}

/// Off:On 3:1 over the same 300-slot attack period and 500-slot horizon.
/// The On blocks start where the 2:1 blocks do and last 37 and 38 slots.
pub fn schedule_3_to_1() -> OnOffSchedule {
    use StageMode::*;
    OnOffSchedule::new(vec![
        Stage::new(1, 100, Off),
        Stage::new(101, 137, On),
        Stage::new(138, 250, Off),
        Stage::new(251, 288, On),
        Stage::new(289, 500, Off),
    ])
    .expect("static schedule")
}

pub fn standard_onoff_schedules() -> Vec<(&'static str, OnOffSchedule)> {
    vec![("2:1", schedule_2_to_1()), ("3:1", schedule_3_to_1())]
}

/// Looks up a named schedule (`"2:1"` or `"3:1"`).
pub fn named_schedule(name: &str) -> Option<OnOffSchedule> {
    standard_onoff_schedules()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| s)
}
