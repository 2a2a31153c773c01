//! Named experiment bundles: each figure id expands into the scenarios and
//! sweeps needed to redraw one plot, and is persisted as CSVs plus a JSON
//! manifest under `<out>/<id>/`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::config::{AttackSpec, CostSpec, ScenarioConfig, Scheme, Theory};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::harness::{run_scenario, sweep, SweepAxis};
use crate::output::{sweep_csv, write_file, write_replications, Manifest, ManifestScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    SteadyStatePt,
    PaSweepOptimistic,
    PaSweepBothPdetect,
    PdetectSweep,
    PtVsEutTimeseries,
    PtVsEutPaSweep,
    PtVsEutBothSystems,
    PtVsEutPdetect,
    CwmaVsEwmaBaseline,
    AwmaVsCwma,
    AwmaVsEwma,
    OnoffRatioCompare,
}

impl FigureId {
    pub const ALL: [FigureId; 12] = [
        FigureId::SteadyStatePt,
        FigureId::PaSweepOptimistic,
        FigureId::PaSweepBothPdetect,
        FigureId::PdetectSweep,
        FigureId::PtVsEutTimeseries,
        FigureId::PtVsEutPaSweep,
        FigureId::PtVsEutBothSystems,
        FigureId::PtVsEutPdetect,
        FigureId::CwmaVsEwmaBaseline,
        FigureId::AwmaVsCwma,
        FigureId::AwmaVsEwma,
        FigureId::OnoffRatioCompare,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::SteadyStatePt => "steady-state-pt",
            FigureId::PaSweepOptimistic => "pa-sweep-optimistic",
            FigureId::PaSweepBothPdetect => "pa-sweep-both-pdetect",
            FigureId::PdetectSweep => "pdetect-sweep",
            FigureId::PtVsEutTimeseries => "pt-vs-eut-timeseries",
            FigureId::PtVsEutPaSweep => "pt-vs-eut-pa-sweep",
            FigureId::PtVsEutBothSystems => "pt-vs-eut-both-systems",
            FigureId::PtVsEutPdetect => "pt-vs-eut-pdetect",
            FigureId::CwmaVsEwmaBaseline => "cwma-vs-ewma-baseline",
            FigureId::AwmaVsCwma => "awma-vs-cwma",
            FigureId::AwmaVsEwma => "awma-vs-ewma",
            FigureId::OnoffRatioCompare => "onoff-ratio-compare",
        }
    }
}

impl std::fmt::Display for FigureId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownFigure(s.to_string()))
    }
}

/// One piece of a figure: a time-series scenario or a sweep.
#[derive(Debug, Clone)]
pub enum Job {
    Trace(ScenarioConfig),
    Sweep {
        base: ScenarioConfig,
        axis: SweepAxis,
        values: Vec<f64>,
    },
}

impl Job {
    pub fn config(&self) -> &ScenarioConfig {
        match self {
            Job::Trace(c) => c,
            Job::Sweep { base, .. } => base,
        }
    }
}

pub const SWEEP_REPLICATIONS: usize = 20;

fn pa_values() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

fn pdetect_values() -> Vec<f64> {
    (5..=10).map(|i| i as f64 / 10.0).collect()
}

/// Expands a figure id into named jobs. `base` supplies everything the
/// figure does not pin (seed, device count, PT parameters, ...).
pub fn plan(id: FigureId, base: &ScenarioConfig) -> Vec<Job> {
    let uniform = |name: &str, costs: CostSpec, theory: Theory| ScenarioConfig {
        name: name.to_string(),
        t_slots: 300,
        theory,
        costs,
        attack: AttackSpec {
            p_a: 0.1,
            ..AttackSpec::default()
        },
        ..base.clone()
    };
    let opt = CostSpec::default;
    let cons = CostSpec::conservative;
    let trace = |c: ScenarioConfig| Job::Trace(ScenarioConfig { replications: 1, ..c });
    let sweep_of = |c: ScenarioConfig, axis: SweepAxis, values: Vec<f64>| Job::Sweep {
        base: ScenarioConfig {
            replications: SWEEP_REPLICATIONS,
            ..c
        },
        axis,
        values,
    };
    let with_pd = |mut c: ScenarioConfig, pd: f64| {
        c.monitor.p_detect = pd;
        c
    };
    let onoff = |name: &str, schedule: &str, schemes: Vec<Scheme>, usable: Scheme| {
        let mut c = ScenarioConfig {
            name: name.to_string(),
            t_slots: 500,
            replications: 1,
            theory: Theory::Pt,
            costs: opt(),
            attack: AttackSpec::onoff(schedule),
            ..base.clone()
        };
        c.trust.schemes = schemes;
        c.usability.period = 50;
        c.usability.threshold = 0.0;
        c.usability.scheme = usable;
        Job::Trace(c)
    };

    use FigureId::*;
    use Scheme::*;
    match id {
        SteadyStatePt => vec![
            trace(uniform("optimistic", opt(), Theory::Pt)),
            trace(uniform("conservative", cons(), Theory::Pt)),
        ],
        PaSweepOptimistic => vec![sweep_of(uniform("optimistic", opt(), Theory::Pt), SweepAxis::PA, pa_values())],
        PaSweepBothPdetect => [0.9, 0.5]
            .into_iter()
            .flat_map(|pd| {
                [("optimistic", opt()), ("conservative", cons())].map(|(name, costs)| {
                    let c = with_pd(uniform(&format!("{name}_pd{pd}"), costs, Theory::Pt), pd);
                    sweep_of(c, SweepAxis::PA, pa_values())
                })
            })
            .collect(),
        PdetectSweep => vec![sweep_of(
            uniform("optimistic", opt(), Theory::Pt),
            SweepAxis::PDetect,
            pdetect_values(),
        )],
        PtVsEutTimeseries => vec![
            trace(uniform("optimistic", opt(), Theory::Both)),
            trace(uniform("conservative", cons(), Theory::Both)),
        ],
        PtVsEutPaSweep => vec![sweep_of(uniform("optimistic", opt(), Theory::Both), SweepAxis::PA, pa_values())],
        PtVsEutBothSystems => vec![
            sweep_of(uniform("optimistic", opt(), Theory::Both), SweepAxis::PA, pa_values()),
            sweep_of(uniform("conservative", cons(), Theory::Both), SweepAxis::PA, pa_values()),
        ],
        PtVsEutPdetect => vec![sweep_of(
            uniform("optimistic", opt(), Theory::Both),
            SweepAxis::PDetect,
            pdetect_values(),
        )],
        CwmaVsEwmaBaseline => vec![onoff("onoff_2to1", "2:1", vec![Cwma, Ewma], Ewma)],
        AwmaVsCwma => vec![onoff("onoff_2to1", "2:1", vec![Cwma, Awma], Awma)],
        AwmaVsEwma => vec![onoff("onoff_2to1", "2:1", vec![Ewma, Awma], Awma)],
        OnoffRatioCompare => vec![
            onoff("onoff_2to1", "2:1", vec![Awma], Awma),
            onoff("onoff_3to1", "3:1", vec![Awma], Awma),
        ],
    }
}

/// Caller-supplied adjustments applied to every job after the figure
/// defaults.
#[derive(Debug, Clone, Default)]
pub struct FigureOptions {
    pub base: Option<ScenarioConfig>,
    pub seed: Option<u64>,
    pub sets: Vec<String>,
}

pub fn resolved_plan(id: FigureId, options: &FigureOptions) -> Result<Vec<Job>> {
    let mut base = options.base.clone().unwrap_or_default();
    if let Some(seed) = options.seed {
        base.seed = seed;
    }
    plan(id, &base)
        .into_iter()
        .map(|job| {
            let adjust = |c: &ScenarioConfig| -> Result<ScenarioConfig> {
                let mut c = c.with_overrides(&options.sets)?;
                if let Some(seed) = options.seed {
                    c.seed = seed;
                }
                c.validate()?;
                Ok(c)
            };
            Ok(match job {
                Job::Trace(c) => Job::Trace(adjust(&c)?),
                Job::Sweep { base, axis, values } => Job::Sweep {
                    base: adjust(&base)?,
                    axis,
                    values,
                },
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct FigureOutput {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

/// Runs every job of `id` and writes its CSVs and manifest to `<out>/<id>/`.
pub fn reproduce_figure(
    id: FigureId,
    out: &Path,
    options: &FigureOptions,
    exec: Execution,
) -> Result<FigureOutput> {
    let jobs = resolved_plan(id, options)?;
    let dir = out.join(id.as_str());
    let mut files = Vec::new();
    let mut scenarios = Vec::new();

    for job in &jobs {
        match job {
            Job::Trace(c) => {
                let runs = run_scenario(c, exec)?;
                files.extend(write_replications(&dir, &c.name, &runs, c.n_devices)?);
                scenarios.push(ManifestScenario {
                    name: c.name.clone(),
                    sweep_axis: None,
                    sweep_values: None,
                    config: c.clone(),
                });
            }
            Job::Sweep { base, axis, values } => {
                let rows = sweep(base, *axis, values, exec)?;
                let path = dir.join(format!("{}_sweep_{}.csv", base.name, axis.name()));
                write_file(&path, &sweep_csv(axis.name(), &rows))?;
                files.push(path);
                scenarios.push(ManifestScenario {
                    name: base.name.clone(),
                    sweep_axis: Some(axis.name().to_string()),
                    sweep_values: Some(values.clone()),
                    config: base.clone(),
                });
            }
        }
    }

    let seed = jobs.first().map_or(0, |j| j.config().seed);
    let manifest = Manifest {
        figure: id.as_str().to_string(),
        seed,
        software: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        scenarios,
        files: files
            .iter()
            .map(|p| p.file_name().expect("file").to_string_lossy().into_owned())
            .collect(),
    };
    let manifest_path = dir.join("manifest.json");
    write_file(&manifest_path, &manifest.to_json())?;
    Ok(FigureOutput {
        dir,
        files,
        manifest: manifest_path,
    })
}
