//! CSV and manifest persistence.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::{SlotRecord, SweepRow};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "HUB_INTEGRITY_OUT";

pub const SLOT_COLUMNS: [&str; 17] = [
    "t",
    "attacked_count",
    "n_alpha",
    "n_beta",
    "n_mu",
    "r_alpha",
    "r_beta",
    "r_mu",
    "u_pt",
    "u_eut",
    "u_pt_mavg",
    "u_eut_mavg",
    "w_di",
    "cwma",
    "ewma",
    "awma",
    "usable",
];

pub const SWEEP_COLUMNS: [&str; 6] = ["value", "replications", "pt_mean", "pt_std", "eut_mean", "eut_std"];

/// Output directory: explicit flag, then `HUB_INTEGRITY_OUT`, then `results`.
pub fn output_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

/// Formats `x` like C's `%.9g`.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    trim_zeros(&format!("{x:.*}", (8 - exp) as usize)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_sig9).unwrap_or_default()
}

/// Renders slot records as CSV, validating every row first.
pub fn slot_records_csv(records: &[SlotRecord], n_devices: usize) -> Result<String> {
    let mut out = SLOT_COLUMNS.join(",");
    out.push('\n');
    for (i, r) in records.iter().enumerate() {
        r.check(n_devices)
            .map_err(|message| Error::InvalidRecord { row: i + 1, message })?;
        let usable = r.usable.map(|u| u.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.attacked_count,
            r.n_alpha,
            r.n_beta,
            r.n_mu,
            fmt_sig9(r.r_alpha),
            fmt_sig9(r.r_beta),
            fmt_sig9(r.r_mu),
            opt(r.u_pt),
            opt(r.u_eut),
            opt(r.u_pt_mavg),
            opt(r.u_eut_mavg),
            fmt_sig9(r.w_di),
            opt(r.cwma),
            opt(r.ewma),
            opt(r.awma),
            usable,
        )
        .expect("writing to a String");
    }
    Ok(out)
}

pub fn sweep_csv(axis: &str, rows: &[SweepRow]) -> String {
    let mut out = SWEEP_COLUMNS.join(",").replacen("value", axis, 1);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_sig9(r.value),
            r.replications,
            opt(r.pt_mean),
            opt(r.pt_std),
            opt(r.eut_mean),
            opt(r.eut_std),
        )
        .expect("writing to a String");
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `<dir>/<name>_rep<r>.csv` for every replication and returns the
/// paths written.
pub fn write_replications(
    dir: &Path,
    name: &str,
    runs: &[Vec<SlotRecord>],
    n_devices: usize,
) -> Result<Vec<PathBuf>> {
    // Render all first so a bad row leaves nothing half-written.
    let rendered = runs
        .iter()
        .map(|recs| slot_records_csv(recs, n_devices))
        .collect::<Result<Vec<_>>>()?;
    let mut paths = Vec::with_capacity(runs.len());
    for (r, csv) in rendered.iter().enumerate() {
        let path = dir.join(format!("{name}_rep{r}.csv"));
        write_file(&path, csv)?;
        paths.push(path);
    }
    Ok(paths)
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub figure: String,
    pub seed: u64,
    pub software: String,
    pub version: String,
    pub scenarios: Vec<ManifestScenario>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestScenario {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_axis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_values: Option<Vec<f64>>,
    pub config: crate::config::ScenarioConfig,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialises");
        s.push('\n');
        s
    }
}
