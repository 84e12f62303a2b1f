//! CSV series and the TOML run manifest.
//!
//! Floats are written in shortest round-trip form, so identical inputs give
//! identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tll_cd::{AggregateSeries, ModeTrajectory, SweepRow, ValidationReport};

use crate::config::RunConfig;
use crate::error::CliError;

pub const MODE_COLUMNS: [&str; 9] =
    ["t", "p", "n_bare", "n_qp", "fidelity", "pair_energy", "residual", "epsilon_cd", "chi"];
pub const AGGREGATE_COLUMNS: [&str; 7] = ["t", "total_residual", "total_energy", "v_s", "K", "chi", "min_margin"];
pub const SWEEP_COLUMNS: [&str; 5] = ["t_f", "stability_pass", "final_residual", "final_fidelity", "error"];

fn writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::io(path, std::io::Error::other(e.to_string()))
}

fn num(x: f64) -> String {
    format!("{x}")
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// `modes/mode_NNNN.csv`, numbered by `n` of `p_n = 2πn/L`.
pub fn mode_path(dir: &Path, mode: usize) -> PathBuf {
    dir.join("modes").join(format!("mode_{mode:04}.csv"))
}

pub fn write_mode_csv(path: &Path, trajectory: &ModeTrajectory) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(MODE_COLUMNS).map_err(|e| csv_err(path, e))?;
    for r in &trajectory.records {
        let row = [
            r.t,
            r.p,
            r.occupation_bare,
            r.occupation_quasiparticle,
            r.fidelity_instantaneous_gs,
            r.pair_energy,
            r.residual_energy,
            r.epsilon_cd,
            r.chi,
        ];
        w.write_record(row.map(num)).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_aggregate_csv(path: &Path, a: &AggregateSeries) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(AGGREGATE_COLUMNS).map_err(|e| csv_err(path, e))?;
    for k in 0..a.times.len() {
        let row = [a.times[k], a.total_residual[k], a.total_energy[k], a.v_s[k], a.k[k], a.chi[k], a.min_margin[k]];
        w.write_record(row.map(num)).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Per-mode files plus `aggregate.csv`.
pub fn write_outputs(
    dir: &Path,
    trajectories: &[(usize, &ModeTrajectory)],
    aggregate: &AggregateSeries,
) -> Result<(), CliError> {
    ensure_dir(&dir.join("modes"))?;
    for (mode, tr) in trajectories {
        write_mode_csv(&mode_path(dir, *mode), tr)?;
    }
    write_aggregate_csv(&dir.join("aggregate.csv"), aggregate)
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(SWEEP_COLUMNS).map_err(|e| csv_err(path, e))?;
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    for r in rows {
        let row = [
            num(r.t_f),
            r.stability_pass.to_string(),
            opt(r.final_residual),
            opt(r.final_fidelity),
            r.error.clone().unwrap_or_default(),
        ];
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_validation_csv(path: &Path, report: &ValidationReport) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(["check", "value", "tolerance", "pass", "detail"]).map_err(|e| csv_err(path, e))?;
    for c in &report.checks {
        let row = [c.name.clone(), num(c.value), num(c.tolerance), c.pass.to_string(), c.detail.clone()];
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Reads named numeric columns; empty cells become NaN.
pub fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = r.headers().map_err(|e| csv_err(path, e))?.clone();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            headers
                .iter()
                .position(|h| h == *n)
                .ok_or_else(|| CliError::Config(format!("{}: missing column {n}", path.display())))
        })
        .collect::<Result<_, _>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        for (c, &i) in cols.iter_mut().zip(&idx) {
            let cell = rec.get(i).unwrap_or("");
            c.push(cell.parse().unwrap_or(f64::NAN));
        }
    }
    Ok(cols)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitRecord {
    pub system: String,
    /// Configured units per simulation unit.
    pub length: f64,
    pub time: f64,
    pub velocity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityRecord {
    pub pass: bool,
    pub worst_margin: f64,
    pub worst_time: f64,
    pub worst_momentum: f64,
    pub t_min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form_bound: Option<f64>,
    pub t_adiabatic: f64,
    pub adiabatic_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub sound_velocity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gas_sound_velocity: Option<f64>,
    pub t_min: f64,
    pub t_upper: f64,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeFailureRecord {
    pub mode: usize,
    pub p: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct SummaryRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_total_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_quasiparticles: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_energy_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modes_ok: Option<usize>,
}

/// Scalars first, then tables: TOML needs that order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub code_version: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exit_code: Option<i32>,
    pub wall_time_s: f64,
    pub units: UnitRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilityRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experimental_estimate: Option<EstimateRecord>,
    pub summary: SummaryRecord,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mode_failures: Vec<ModeFailureRecord>,
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        let (length, time, velocity) = config.unit_factors();
        let system = match config.units {
            crate::config::Units::Natural => "natural",
            crate::config::Units::Experimental => "experimental (um, ms)",
        };
        RunManifest {
            command: command.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            status: "running".into(),
            failure: None,
            exit_code: None,
            wall_time_s: 0.0,
            units: UnitRecord { system: system.into(), length, time, velocity },
            stability: None,
            experimental_estimate: None,
            summary: SummaryRecord::default(),
            config: config.clone(),
            mode_failures: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = toml::to_string(self).map_err(|e| CliError::Config(format!("manifest: {e}")))?;
        fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}
