//! Slot-loop simulation driver and parameter sweeps.
//!
//! Each slot runs adversary → monitor → posterior → deviations → utilities →
//! bounded score → trust updates. Replications are independent tasks, each
//! with its own ChaCha stream derived from `(seed, replication)`.

use std::collections::VecDeque;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bayes::posterior;
use crate::config::{AttackModel, AverageMode, BeliefMode, CostModelKind, Scenario, ScenarioConfig, Scheme};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::integrity::{deviations, eut_utility_with, pt_utility};
use crate::monitor::{observe, ObservationCounts};
use crate::trust::{awma_step, cwma_step, ewma_step, weighted_score, TrustState};

/// One simulated slot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotRecord {
    pub t: usize,
    pub attacked_count: usize,
    pub n_alpha: u64,
    pub n_beta: u64,
    pub n_mu: u64,
    pub r_alpha: f64,
    pub r_beta: f64,
    pub r_mu: f64,
    pub u_pt: Option<f64>,
    pub u_eut: Option<f64>,
    /// Moving average of `u_pt` (cumulative mean unless configured otherwise).
    pub u_pt_mavg: Option<f64>,
    pub u_eut_mavg: Option<f64>,
    pub w_di: f64,
    pub cwma: Option<f64>,
    pub ewma: Option<f64>,
    pub awma: Option<f64>,
    /// Set on slots where the periodic usability check fires.
    pub usable: Option<bool>,
}

impl SlotRecord {
    pub fn scheme(&self, scheme: Scheme) -> Option<f64> {
        match scheme {
            Scheme::Cwma => self.cwma,
            Scheme::Ewma => self.ewma,
            Scheme::Awma => self.awma,
        }
    }

    /// Checks the row invariants against the device count.
    pub fn check(&self, n_devices: usize) -> std::result::Result<(), String> {
        if self.n_alpha + self.n_beta + self.n_mu != n_devices as u64 {
            return Err(format!(
                "counts ({}, {}, {}) do not sum to {n_devices}",
                self.n_alpha, self.n_beta, self.n_mu
            ));
        }
        if self.attacked_count > n_devices {
            return Err(format!("attacked_count {} exceeds {n_devices}", self.attacked_count));
        }
        let sum = self.r_alpha + self.r_beta + self.r_mu;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(format!("beliefs sum to {sum}"));
        }
        for (name, v) in [
            ("w_di", Some(self.w_di)),
            ("cwma", self.cwma),
            ("ewma", self.ewma),
            ("awma", self.awma),
        ] {
            if let Some(v) = v {
                if !(-1.0..=1.0).contains(&v) {
                    return Err(format!("{name} = {v} outside [-1, 1]"));
                }
            }
        }
        for v in [self.u_pt, self.u_eut, self.u_pt_mavg, self.u_eut_mavg].into_iter().flatten() {
            if !v.is_finite() {
                return Err("non-finite utility".into());
            }
        }
        Ok(())
    }
}

/// Random stream for replication `r`.
pub fn replication_rng(seed: u64, replication: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication as u64);
    rng
}

struct MovingAverage {
    mode: AverageMode,
    window: usize,
    sum: f64,
    count: u64,
    recent: VecDeque<f64>,
}

impl MovingAverage {
    fn new(mode: AverageMode, window: usize) -> Self {
        Self {
            mode,
            window,
            sum: 0.0,
            count: 0,
            recent: VecDeque::with_capacity(window),
        }
    }

    fn push(&mut self, x: f64) -> f64 {
        match self.mode {
            AverageMode::Cumulative => {
                self.sum += x;
                self.count += 1;
                self.sum / self.count as f64
            }
            AverageMode::Window => {
                if self.recent.len() == self.window {
                    self.recent.pop_front();
                }
                self.recent.push_back(x);
                self.recent.iter().sum::<f64>() / self.recent.len() as f64
            }
        }
    }
}

/// Counts fed to the posterior: the current slot, or a sliding sum.
struct BeliefWindow {
    mode: BeliefMode,
    window: usize,
    recent: VecDeque<ObservationCounts>,
    total: ObservationCounts,
}

impl BeliefWindow {
    fn new(mode: BeliefMode, window: usize) -> Self {
        Self {
            mode,
            window,
            recent: VecDeque::new(),
            total: ObservationCounts::default(),
        }
    }

    fn push(&mut self, counts: ObservationCounts) -> ObservationCounts {
        match self.mode {
            BeliefMode::PerSlot => counts,
            BeliefMode::Window => {
                if self.recent.len() == self.window {
                    let old = self.recent.pop_front().expect("window non-empty");
                    self.total = self.total - old;
                }
                self.recent.push_back(counts);
                self.total += counts;
                self.total
            }
        }
    }
}

/// Runs one replication of a validated scenario.
pub fn run_replication(scenario: &Scenario, replication: usize) -> Result<Vec<SlotRecord>> {
    let cfg = &scenario.config;
    let mut rng = replication_rng(cfg.seed, replication);
    let n = cfg.n_devices;
    let theory = cfg.theory;
    let trust_cfg = &cfg.trust;
    let usability = &cfg.usability;

    let mut beliefs_in = BeliefWindow::new(cfg.beliefs.mode, cfg.beliefs.window);
    let mut pt_avg = MovingAverage::new(cfg.moving_average.mode, cfg.moving_average.window);
    let mut eut_avg = MovingAverage::new(cfg.moving_average.mode, cfg.moving_average.window);
    let mut trust = TrustState::new();
    let mut records = Vec::with_capacity(cfg.t_slots);

    for t in 1..=cfg.t_slots {
        let truth = match &scenario.attack {
            AttackModel::Uniform(attack) => attack.slot(n, &mut rng),
            AttackModel::OnOff { schedule, magnitude } => schedule.slot(t, n, *magnitude, &mut rng)?,
        };
        let attacked_count = truth.iter().filter(|&&c| c).count();
        let (_, counts) = observe(&truth, &scenario.profile, &mut rng)?;
        let beliefs = posterior(&beliefs_in.push(counts))?;
        let devs = deviations(&counts, &scenario.costs);

        let u_pt = theory.pt().then(|| pt_utility(&beliefs, &devs, &cfg.pt));
        let u_eut = theory
            .eut()
            .then(|| eut_utility_with(&beliefs, &devs, cfg.eut_mode, &cfg.pt));
        let primary = u_pt.or(u_eut).expect("at least one theory");
        let w_di = weighted_score(primary);

        if trust_cfg.tracks(Scheme::Cwma) {
            trust = cwma_step(trust, w_di);
        }
        if trust_cfg.tracks(Scheme::Ewma) {
            trust = ewma_step(trust, w_di, trust_cfg.ewma_alpha);
        }
        if trust_cfg.tracks(Scheme::Awma) {
            trust = awma_step(trust, w_di, &trust_cfg.awma);
        }

        let mut record = SlotRecord {
            t,
            attacked_count,
            n_alpha: counts.n_alpha,
            n_beta: counts.n_beta,
            n_mu: counts.n_mu,
            r_alpha: beliefs.r_alpha,
            r_beta: beliefs.r_beta,
            r_mu: beliefs.r_mu,
            u_pt,
            u_eut,
            u_pt_mavg: u_pt.map(|u| pt_avg.push(u)),
            u_eut_mavg: u_eut.map(|u| eut_avg.push(u)),
            w_di,
            cwma: trust.cwma(),
            ewma: trust.ewma_value,
            awma: trust.awma_value,
            usable: None,
        };
        if usability.period > 0 && t % usability.period == 0 {
            record.usable = record.scheme(usability.scheme).map(|v| v > usability.threshold);
        }
        records.push(record);
    }
    Ok(records)
}

/// Runs every replication of `config`; element `r` is replication `r`.
pub fn run_scenario(config: &ScenarioConfig, exec: Execution) -> Result<Vec<Vec<SlotRecord>>> {
    let scenario = config.validate()?;
    exec.map(config.replications, |r| run_replication(&scenario, r))
        .into_iter()
        .collect()
}

/// Parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    PA,
    PDetect,
    W2,
    Lambda,
    Gamma,
    Rho,
    Omega,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::PA => "p_a",
            SweepAxis::PDetect => "p_detect",
            SweepAxis::W2 => "w2",
            SweepAxis::Lambda => "lambda",
            SweepAxis::Gamma => "gamma",
            SweepAxis::Rho => "rho",
            SweepAxis::Omega => "omega",
        }
    }

    /// Sets the axis value on a copy of `base`. Sweeping `w2` switches the
    /// cost model to conservative.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> ScenarioConfig {
        let mut c = base.clone();
        match self {
            SweepAxis::PA => c.attack.p_a = value,
            SweepAxis::PDetect => c.monitor.p_detect = value,
            SweepAxis::W2 => {
                c.costs.model = CostModelKind::Conservative;
                c.costs.w2 = value;
            }
            SweepAxis::Lambda => c.pt.lambda = value,
            SweepAxis::Gamma => c.pt.gamma = value,
            SweepAxis::Rho => c.pt.rho = value,
            SweepAxis::Omega => c.pt.omega = value,
        }
        c
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "p_a" => SweepAxis::PA,
            "p_detect" => SweepAxis::PDetect,
            "w2" => SweepAxis::W2,
            "lambda" => SweepAxis::Lambda,
            "gamma" => SweepAxis::Gamma,
            "rho" => SweepAxis::Rho,
            "omega" => SweepAxis::Omega,
            other => return Err(Error::UnknownAxis(other.to_string())),
        })
    }
}

/// Replication statistics of the terminal moving-average utility at one
/// sweep value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub replications: usize,
    pub pt_mean: Option<f64>,
    pub pt_std: Option<f64>,
    pub eut_mean: Option<f64>,
    pub eut_std: Option<f64>,
}

/// Mean and sample standard deviation (0 for a single sample).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn sweep(
    base: &ScenarioConfig,
    axis: SweepAxis,
    values: &[f64],
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    let scenarios = values
        .iter()
        .map(|&v| axis.apply(base, v).validate())
        .collect::<Result<Vec<_>>>()?;
    let reps = base.replications;
    let terminal = exec.map(scenarios.len() * reps, |task| {
        let (point, r) = (task / reps, task % reps);
        run_replication(&scenarios[point], r).map(|recs| {
            let last = recs.last().expect("t_slots >= 1");
            (last.u_pt_mavg, last.u_eut_mavg)
        })
    });
    let terminal = terminal.into_iter().collect::<Result<Vec<_>>>()?;

    Ok(values
        .iter()
        .zip(terminal.chunks(reps))
        .map(|(&value, chunk)| {
            let stats = |xs: Option<Vec<f64>>| xs.map(|xs| mean_std(&xs));
            let pt = stats(chunk.iter().map(|p| p.0).collect());
            let eut = stats(chunk.iter().map(|p| p.1).collect());
            SweepRow {
                value,
                replications: reps,
                pt_mean: pt.map(|s| s.0),
                pt_std: pt.map(|s| s.1),
                eut_mean: eut.map(|s| s.0),
                eut_std: eut.map(|s| s.1),
            }
        })
        .collect())
}

/// Parses sweep values: `start:stop:step` (stop included when reached
/// within 1e-9) or a comma-separated list.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let bad = |msg: &str| Error::Parse(format!("--values `{spec}`: {msg}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step <= 0.0 || !step.is_finite() {
                return Err(bad("step must be positive"));
            }
            if stop < start {
                return Err(bad("stop is below start"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count)
                .map(|i| {
                    let v = start + i as f64 * step;
                    // Strip accumulated representation error (0.30000000000000004).
                    (v * 1e12).round() / 1e12
                })
                .collect()
        }
        [_] => spec.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => return Err(bad("expected start:stop:step or a comma list")),
    };
    if values.is_empty() {
        return Err(bad("no values"));
    }
    Ok(values)
}
