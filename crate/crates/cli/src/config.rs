//! Flat TOML run configuration.
//!
//! Every key is optional except `t_f` and `L`; unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use tll_cd::{
    CouplingFamily, CouplingSpec, DriveProtocol, EvolveOptions, InitialState, LorentzianChi, Schedule,
    TableRow, Tolerances,
};

use crate::error::CliError;
use crate::units::{experimental_sound_velocity, GasParameters};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    #[default]
    Poly5,
    Linear,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    /// `v_F`, lengths and times in arbitrary consistent units.
    #[default]
    Natural,
    /// Lengths in μm, times in ms, velocities and couplings in μm/ms.
    Experimental,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    #[default]
    Vacuum,
    GroundState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChiMode {
    #[default]
    Exact,
    Linearized,
}

fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}
fn default_n_modes() -> usize {
    64
}
fn default_true() -> bool {
    true
}
fn default_v_f() -> f64 {
    1.0
}
fn default_record_points() -> usize {
    tll_cd::DEFAULT_RECORD_POINTS
}
fn default_rtol() -> f64 {
    Tolerances::default().rtol
}
fn default_atol() -> f64 {
    Tolerances::default().atol
}
fn default_stability_points() -> usize {
    tll_cd::DEFAULT_STABILITY_POINTS
}
fn default_threshold() -> f64 {
    tll_cd::DEFAULT_ADIABATIC_THRESHOLD
}
fn default_adiabatic_factor() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_family")]
    pub family: CouplingFamily,
    #[serde(default)]
    pub g2_start: f64,
    #[serde(default)]
    pub g2_end: f64,
    #[serde(default)]
    pub g4_start: f64,
    #[serde(default)]
    pub g4_end: f64,
    #[serde(default)]
    pub r0: f64,
    /// Rows `[p, g2_end(p), g4_end(p)]` of the custom_table family.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<[f64; 3]>,
    #[serde(default)]
    pub lorentzian_chi: ChiMode,
    #[serde(default)]
    pub schedule: ScheduleKind,
    /// `[s, 𝒫(s)]` pairs of the custom schedule.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schedule_samples: Vec<[f64; 2]>,
    pub t_f: f64,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(default = "default_n_modes")]
    pub n_modes: usize,
    #[serde(default = "default_true")]
    pub cd: bool,
    #[serde(default = "default_v_f")]
    pub v_f: f64,
    #[serde(default)]
    pub units: Units,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    #[serde(default = "default_record_points")]
    pub record_points: usize,
    #[serde(default)]
    pub emit_plots: bool,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_stability_points")]
    pub stability_points: usize,
    #[serde(default = "default_threshold")]
    pub adiabatic_threshold: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep_tf: Vec<f64>,
    #[serde(default)]
    pub initial_state: InitialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Measured sound velocity for the dimensional speed estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sound_velocity: Option<f64>,
    /// Ratio between the slow and fast ends of the dimensional estimate.
    #[serde(default = "default_adiabatic_factor")]
    pub adiabatic_factor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_s_nm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom_mass_kg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trap_frequency_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_per_um: Option<f64>,
}

fn default_family() -> CouplingFamily {
    CouplingFamily::Contact
}

/// Command-line overrides applied after parsing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub cd: Option<bool>,
    pub t_f: Option<f64>,
    pub n_modes: Option<usize>,
    pub outputs: Option<PathBuf>,
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields are plain TOML values")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(cd) = o.cd {
            self.cd = cd;
        }
        if let Some(t_f) = o.t_f {
            self.t_f = t_f;
        }
        if let Some(n) = o.n_modes {
            self.n_modes = n;
        }
        if let Some(out) = &o.outputs {
            self.outputs = out.clone();
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.record_points < 2 {
            return Err(CliError::Config("record_points must be at least 2".into()));
        }
        if self.stability_points < 2 {
            return Err(CliError::Config("stability_points must be at least 2".into()));
        }
        if !(self.rtol > 0.0 && self.atol >= 0.0) {
            return Err(CliError::Config("rtol must be positive and atol non-negative".into()));
        }
        if !(self.adiabatic_threshold > 0.0 && self.adiabatic_factor > 0.0) {
            return Err(CliError::Config("adiabatic_threshold and adiabatic_factor must be positive".into()));
        }
        if self.sweep_tf.iter().any(|t| !(*t > 0.0)) {
            return Err(CliError::Config("sweep_tf entries must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        if self.schedule != ScheduleKind::Custom && !self.schedule_samples.is_empty() {
            return Err(CliError::Config("schedule_samples needs schedule = \"custom\"".into()));
        }
        if self.family != CouplingFamily::CustomTable && !self.table.is_empty() {
            return Err(CliError::Config("table needs family = \"custom_table\"".into()));
        }
        self.gas()?;
        self.protocol()?.validate().map_err(CliError::from)
    }

    pub fn coupling(&self) -> CouplingSpec {
        let s = self.velocity_scale();
        match self.family {
            CouplingFamily::CustomTable => CouplingSpec::custom_table(
                self.g2_start / s,
                self.g4_start / s,
                self.table.iter().map(|r| TableRow { p: r[0], g2: r[1] / s, g4: r[2] / s }).collect(),
            ),
            family => CouplingSpec {
                family,
                g2_start: self.g2_start / s,
                g2_end: self.g2_end / s,
                g4_start: self.g4_start / s,
                g4_end: self.g4_end / s,
                r0: self.r0,
                table: Vec::new(),
            },
        }
    }

    pub fn schedule(&self) -> Result<Schedule, CliError> {
        Ok(match self.schedule {
            ScheduleKind::Poly5 => Schedule::Poly5,
            ScheduleKind::Linear => Schedule::Linear,
            ScheduleKind::Custom => Schedule::custom(self.schedule_samples.iter().map(|s| (s[0], s[1])).collect())?,
        })
    }

    /// Velocity unit of the simulation: `v_F` in experimental units, 1 otherwise.
    pub fn velocity_scale(&self) -> f64 {
        match self.units {
            Units::Natural => 1.0,
            Units::Experimental => self.v_f,
        }
    }

    /// Conversion factors `(length, time, velocity)` from simulation to configured units.
    pub fn unit_factors(&self) -> (f64, f64, f64) {
        match self.units {
            Units::Natural => (1.0, 1.0, 1.0),
            // lengths in μm, velocities in units of v_F, so one time unit is 1/v_F ms
            Units::Experimental => (1.0, 1.0 / self.v_f, self.v_f),
        }
    }

    /// Protocol in simulation units (`v_F = 1` for experimental configs).
    pub fn protocol(&self) -> Result<DriveProtocol, CliError> {
        let (_, time_unit, _) = self.unit_factors();
        let mut p = DriveProtocol::new(self.coupling(), self.schedule()?, self.t_f / time_unit, self.length, self.n_modes)
            .with_cd(self.cd);
        p.v_f = self.v_f / self.velocity_scale();
        p.lorentzian_chi = match self.lorentzian_chi {
            ChiMode::Exact => LorentzianChi::Exact,
            ChiMode::Linearized => LorentzianChi::Linearized,
        };
        Ok(p)
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            tolerances: Tolerances { rtol: self.rtol, atol: self.atol },
            record_points: self.record_points,
            initial_state: match self.initial_state {
                InitialKind::Vacuum => InitialState::Vacuum,
                InitialKind::GroundState => InitialState::GroundState,
            },
            workers: self.workers,
        }
    }

    pub fn gas(&self) -> Result<Option<GasParameters>, CliError> {
        match (self.a_s_nm, self.atom_mass_kg, self.trap_frequency_hz, self.density_per_um) {
            (None, None, None, None) => Ok(None),
            (Some(a_s_nm), Some(mass_kg), Some(trap_hz), Some(density)) => {
                let gas = GasParameters { a_s_nm, mass_kg, trap_frequency_hz: trap_hz, density_per_um: density };
                gas.sound_velocity()?;
                Ok(Some(gas))
            }
            _ => Err(CliError::Config(
                "gas parameters need all of a_s_nm, atom_mass_kg, trap_frequency_hz, density_per_um".into(),
            )),
        }
    }

    /// Configured sound velocity, or the one implied by the gas parameters.
    pub fn experimental_sound_velocity(&self) -> Result<Option<f64>, CliError> {
        if let Some(v) = self.sound_velocity {
            return Ok(Some(v));
        }
        match self.gas()? {
            Some(g) => Ok(Some(experimental_sound_velocity(
                g.a_s_nm * 1e-9,
                g.mass_kg,
                std::f64::consts::TAU * g.trap_frequency_hz,
                g.density_per_um * 1e6,
            )?)),
            None => Ok(None),
        }
    }
}
