//! Scenario configuration: the TOML schema, `--set` overrides, and
//! validation into the typed domain objects the harness runs on.
//!
//! ```toml
//! name = "fig4"
//! n_devices = 100
//! t_slots = 300
//! seed = 7
//! replications = 20
//! theory = "pt"            # pt | eut | both
//! eut_mode = "identity"    # identity | pt-value-no-weights
//!
//! [attack]
//! kind = "uniform"         # uniform | onoff
//! p_a = 0.1
//! magnitude = "binomial"   # binomial | fixed (uniform); uniform | fixed (onoff)
//! schedule = "2:1"         # onoff only: "2:1" | "3:1", or explicit `stages`
//!
//! [monitor]
//! p_detect = 0.9
//! p_error = 0.0
//!
//! [costs]
//! model = "optimistic"     # optimistic | conservative
//! w2 = 0.888888889
//! c_n = 0.01
//! c_c = 0.1
//! c = 0.1
//!
//! [pt]
//! lambda = 2.0
//! gamma = 0.5
//! rho = 0.69
//! omega = 0.63
//!
//! [beliefs]
//! mode = "per-slot"        # per-slot | window
//! window = 10
//!
//! [moving_average]
//! mode = "cumulative"      # cumulative | window
//! window = 50
//!
//! [trust]
//! schemes = ["cwma", "ewma", "awma"]
//! ewma_alpha = 0.3
//!
//! [trust.awma]
//! chi_a = 0.99
//! chi_b_max = 0.999
//! chi_c_min = 0.001
//! chi_d = 0.001
//! gamma_onoff = 0.0
//!
//! [usability]
//! period = 0               # 0 disables the periodic check
//! threshold = 0.0
//! scheme = "awma"
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adversary::{named_schedule, Magnitude, OnMagnitude, OnOffSchedule, Stage, UniformAttack};
use crate::error::{ConfigIssue, Error, Result};
use crate::integrity::{CostModel, EutMode, PtParams, DEFAULT_CONSERVATIVE_W2};
use crate::monitor::MonitorProfile;
use crate::trust::AwmaParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theory {
    Pt,
    Eut,
    Both,
}

impl Theory {
    pub fn pt(self) -> bool {
        matches!(self, Theory::Pt | Theory::Both)
    }

    pub fn eut(self) -> bool {
        matches!(self, Theory::Eut | Theory::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackKind {
    Uniform,
    Onoff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub p_a: f64,
    /// Defaults to `binomial` for uniform attacks and `uniform` for On-Off.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub magnitude: Option<Magnitude>,
    /// Compromised inputs per On slot when `magnitude = "fixed"` (On-Off).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub on_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stages: Option<Vec<Stage>>,
}

impl Default for AttackSpec {
    fn default() -> Self {
        Self {
            kind: AttackKind::Uniform,
            p_a: 0.1,
            magnitude: None,
            on_count: None,
            schedule: None,
            stages: None,
        }
    }
}

impl AttackSpec {
    pub fn onoff(schedule: &str) -> Self {
        Self {
            kind: AttackKind::Onoff,
            schedule: Some(schedule.to_string()),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonitorSpec {
    pub p_detect: f64,
    pub p_error: f64,
}

impl Default for MonitorSpec {
    fn default() -> Self {
        Self {
            p_detect: 0.9,
            p_error: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostModelKind {
    Optimistic,
    Conservative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostSpec {
    pub model: CostModelKind,
    /// Only used by the conservative model.
    pub w2: f64,
    pub c_n: f64,
    pub c_c: f64,
    pub c: f64,
}

impl Default for CostSpec {
    fn default() -> Self {
        Self {
            model: CostModelKind::Optimistic,
            w2: DEFAULT_CONSERVATIVE_W2,
            c_n: 0.01,
            c_c: 0.1,
            c: 0.1,
        }
    }
}

impl CostSpec {
    pub fn conservative() -> Self {
        Self {
            model: CostModelKind::Conservative,
            ..Self::default()
        }
    }

    pub fn build(&self) -> Result<CostModel> {
        match self.model {
            CostModelKind::Optimistic => CostModel::optimistic(self.c_n, self.c_c, self.c),
            CostModelKind::Conservative => CostModel::conservative(self.c_n, self.c_c, self.w2, self.c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeliefMode {
    /// Beliefs from the current slot's counts only.
    PerSlot,
    /// Beliefs from counts summed over the last `window` slots.
    Window,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeliefSpec {
    pub mode: BeliefMode,
    pub window: usize,
}

impl Default for BeliefSpec {
    fn default() -> Self {
        Self {
            mode: BeliefMode::PerSlot,
            window: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AverageMode {
    Cumulative,
    Window,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AverageSpec {
    pub mode: AverageMode,
    pub window: usize,
}

impl Default for AverageSpec {
    fn default() -> Self {
        Self {
            mode: AverageMode::Cumulative,
            window: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Cwma,
    Ewma,
    Awma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrustSpec {
    pub schemes: Vec<Scheme>,
    pub ewma_alpha: f64,
    pub awma: AwmaParams,
}

impl Default for TrustSpec {
    fn default() -> Self {
        Self {
            schemes: vec![Scheme::Cwma, Scheme::Ewma, Scheme::Awma],
            ewma_alpha: 0.3,
            awma: AwmaParams::default(),
        }
    }
}

impl TrustSpec {
    pub fn tracks(&self, scheme: Scheme) -> bool {
        self.schemes.contains(&scheme)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UsabilitySpec {
    /// Check every `period` slots; 0 disables the check.
    pub period: usize,
    /// Scores strictly above the threshold are usable.
    pub threshold: f64,
    pub scheme: Scheme,
}

impl Default for UsabilitySpec {
    fn default() -> Self {
        Self {
            period: 0,
            threshold: 0.0,
            scheme: Scheme::Awma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub name: String,
    pub n_devices: usize,
    pub t_slots: usize,
    pub seed: u64,
    pub replications: usize,
    pub theory: Theory,
    pub eut_mode: EutMode,
    pub attack: AttackSpec,
    pub monitor: MonitorSpec,
    pub costs: CostSpec,
    pub pt: PtParams,
    pub beliefs: BeliefSpec,
    pub moving_average: AverageSpec,
    pub trust: TrustSpec,
    pub usability: UsabilitySpec,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "scenario".to_string(),
            n_devices: 100,
            t_slots: 300,
            seed: 0,
            replications: 1,
            theory: Theory::Pt,
            eut_mode: EutMode::Identity,
            attack: AttackSpec::default(),
            monitor: MonitorSpec::default(),
            costs: CostSpec::default(),
            pt: PtParams::default(),
            beliefs: BeliefSpec::default(),
            moving_average: AverageSpec::default(),
            trust: TrustSpec::default(),
            usability: UsabilitySpec::default(),
        }
    }
}

/// Attack model after validation.
#[derive(Debug, Clone, PartialEq)]
pub enum AttackModel {
    Uniform(UniformAttack),
    OnOff {
        schedule: OnOffSchedule,
        magnitude: OnMagnitude,
    },
}

/// A validated scenario with every component constructed.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub attack: AttackModel,
    pub profile: MonitorProfile,
    pub costs: CostModel,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        Self::deserialize(toml::Value::Table(table)).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_table(&self) -> toml::Table {
        match toml::Value::try_from(self) {
            Ok(toml::Value::Table(t)) => t,
            _ => unreachable!("config always serialises to a table"),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Loads `path` (or the defaults) and applies `key=value` overrides.
    pub fn load_with_overrides(path: Option<&Path>, sets: &[String]) -> Result<Self> {
        let table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?
            }
            None => Self::default().to_table(),
        };
        Self::from_table(apply_overrides(table, sets)?)
    }

    /// Returns a copy with `key=value` overrides applied.
    pub fn with_overrides(&self, sets: &[String]) -> Result<Self> {
        if sets.is_empty() {
            return Ok(self.clone());
        }
        Self::from_table(apply_overrides(self.to_table(), sets)?)
    }

    /// Validates every field and builds the domain objects. All failures
    /// are reported together.
    pub fn validate(&self) -> Result<Scenario> {
        let mut issues = Vec::new();
        let mut check = |ok: bool, field: &str, msg: String| {
            if !ok {
                issues.push(ConfigIssue::new(field, msg));
            }
        };
        check(self.n_devices >= 1, "n_devices", "must be at least 1".into());
        check(self.t_slots >= 1, "t_slots", "must be at least 1".into());
        check(self.replications >= 1, "replications", "must be at least 1".into());
        check(
            self.beliefs.window >= 1,
            "beliefs.window",
            "must be at least 1".into(),
        );
        check(
            self.moving_average.window >= 1,
            "moving_average.window",
            "must be at least 1".into(),
        );
        check(
            self.trust.ewma_alpha > 0.0 && self.trust.ewma_alpha < 1.0,
            "trust.ewma_alpha",
            format!("must be in (0, 1), got {}", self.trust.ewma_alpha),
        );
        check(
            (-1.0..=1.0).contains(&self.usability.threshold) || self.usability.period == 0,
            "usability.threshold",
            "must be in [-1, 1]".into(),
        );
        check(
            self.usability.period == 0 || self.trust.tracks(self.usability.scheme),
            "usability.scheme",
            format!("{:?} is not among trust.schemes", self.usability.scheme).to_lowercase(),
        );

        let mut push = |r: Result<()>| {
            if let Err(e) = r {
                issues.push(to_issue(e));
            }
        };
        push(self.pt.validate());
        if self.trust.tracks(Scheme::Awma) {
            push(self.trust.awma.validate());
        }

        let attack = self.attack_model().map_err(|e| issues.push(to_issue(e))).ok();
        if let Some(AttackModel::OnOff { schedule, .. }) = &attack {
            if self.t_slots > schedule.horizon() {
                issues.push(ConfigIssue::new(
                    "t_slots",
                    format!("exceeds the attack schedule horizon {}", schedule.horizon()),
                ));
            }
        }
        let profile = MonitorProfile::from_pdetect(self.monitor.p_detect, self.monitor.p_error)
            .map_err(|e| issues.push(to_issue(e)))
            .ok();
        let costs = self.costs.build().map_err(|e| issues.push(to_issue(e))).ok();

        if !issues.is_empty() {
            return Err(Error::InvalidConfig(issues));
        }
        Ok(Scenario {
            config: self.clone(),
            attack: attack.expect("no issues"),
            profile: profile.expect("no issues"),
            costs: costs.expect("no issues"),
        })
    }

    fn attack_model(&self) -> Result<AttackModel> {
        let spec = &self.attack;
        match spec.kind {
            AttackKind::Uniform => {
                let magnitude = spec.magnitude.unwrap_or(Magnitude::Binomial);
                Ok(AttackModel::Uniform(UniformAttack::new(spec.p_a, magnitude)?))
            }
            AttackKind::Onoff => {
                let schedule = match (&spec.stages, &spec.schedule) {
                    (Some(stages), _) => OnOffSchedule::new(stages.clone())?,
                    (None, Some(name)) => named_schedule(name).ok_or_else(|| {
                        Error::param("attack.schedule", format!("unknown schedule `{name}` (expected 2:1 or 3:1)"))
                    })?,
                    (None, None) => {
                        return Err(Error::param("attack.schedule", "onoff attacks need a schedule or stages"))
                    }
                };
                let magnitude = match spec.magnitude.unwrap_or(Magnitude::Uniform) {
                    Magnitude::Uniform => OnMagnitude::Uniform,
                    Magnitude::Fixed => {
                        let k = spec.on_count.ok_or_else(|| {
                            Error::param("attack.on_count", "required when magnitude = \"fixed\"")
                        })?;
                        if k == 0 || k > self.n_devices {
                            return Err(Error::param("attack.on_count", "must be in [1, n_devices]"));
                        }
                        OnMagnitude::Fixed(k)
                    }
                    Magnitude::Binomial => {
                        return Err(Error::param(
                            "attack.magnitude",
                            "onoff attacks support `uniform` or `fixed` magnitudes",
                        ))
                    }
                };
                Ok(AttackModel::OnOff { schedule, magnitude })
            }
        }
    }
}

fn to_issue(e: Error) -> ConfigIssue {
    match e {
        Error::InvalidParameter { field, message } => ConfigIssue::new(field, message),
        other => ConfigIssue::new("config", other.to_string()),
    }
}

/// Applies `dotted.key=value` assignments to a TOML table. Values are parsed
/// as TOML where possible and fall back to plain strings.
pub fn apply_overrides(mut table: toml::Table, sets: &[String]) -> Result<toml::Table> {
    for set in sets {
        let (key, raw) = set
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("override `{set}` is not of the form key=value")))?;
        let key = key.trim();
        let path: Vec<&str> = key.split('.').collect();
        if path.iter().any(|p| p.is_empty()) {
            return Err(Error::Parse(format!("override key `{key}` is malformed")));
        }
        let value = parse_value(raw.trim());
        let (last, parents) = path.split_last().expect("non-empty path");
        let mut cursor = &mut table;
        for part in parents {
            let entry = cursor
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            cursor = match entry {
                toml::Value::Table(t) => t,
                _ => return Err(Error::Parse(format!("override key `{key}`: `{part}` is not a section"))),
            };
        }
        cursor.insert(last.to_string(), value);
    }
    Ok(table)
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}
