//! Subcommand orchestration. Every command that gets as far as a valid
//! configuration leaves a manifest behind, whether it succeeds or not.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use tll_cd::{
    mean_energy_scaling_check, run_simulation, run_validation, speed_window, stability_margin, sweep_tf,
    SimulationOutput, TWO_PI,
};

use crate::config::{parse_config, Overrides, RunConfig, Units};
use crate::error::CliError;
use crate::output::{self, EstimateRecord, ModeFailureRecord, RunManifest, StabilityRecord, SummaryRecord};
use crate::svg::{self, Panel};
use crate::units::dimensional_window;

pub const MANIFEST: &str = "manifest.toml";

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut config = parse_config(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })?;
    config.apply(overrides);
    config.validate()?;
    Ok(config)
}

/// Runtime settings that are not part of the echoed configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Runtime {
    pub workers: Option<usize>,
}

fn finish<T>(
    mut manifest: RunManifest,
    started: Instant,
    dir: &Path,
    result: Result<T, CliError>,
) -> Result<T, CliError> {
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    match &result {
        Ok(_) => manifest.status = "ok".into(),
        Err(e) => {
            manifest.status = "failed".into();
            manifest.failure = Some(e.to_string());
            manifest.exit_code = Some(e.exit_code());
        }
    }
    output::ensure_dir(dir)?;
    manifest.write(&dir.join(MANIFEST))?;
    result
}

fn stability_record(config: &RunConfig) -> Result<StabilityRecord, CliError> {
    let protocol = config.protocol()?;
    let s = stability_margin(&protocol, config.stability_points)?;
    let w = speed_window(&protocol, config.stability_points, config.adiabatic_threshold)?;
    let (length, time, velocity) = config.unit_factors();
    Ok(StabilityRecord {
        pass: s.pass,
        worst_margin: s.worst_margin * velocity / length,
        worst_time: s.worst_time * time,
        worst_momentum: s.worst_momentum / length,
        t_min: s.t_min * time,
        closed_form_bound: s.closed_form_bound.map(|b| b * time),
        t_adiabatic: w.t_adiabatic * time,
        adiabatic_threshold: w.threshold,
    })
}

fn estimate_record(config: &RunConfig) -> Result<Option<EstimateRecord>, CliError> {
    let Some(v_s) = config.experimental_sound_velocity()? else {
        return Ok(None);
    };
    let gas_sound_velocity = match config.gas()? {
        Some(g) => Some(g.sound_velocity()?),
        None => None,
    };
    let (t_min, t_upper) = dimensional_window(config.length, v_s, config.adiabatic_factor);
    Ok(Some(EstimateRecord { sound_velocity: v_s, gas_sound_velocity, t_min, t_upper, factor: config.adiabatic_factor }))
}

fn cd_precheck(config: &RunConfig, record: &StabilityRecord) -> Result<(), CliError> {
    if config.cd && !record.pass {
        return Err(CliError::Instability(format!(
            "cd-instability: |chi| reaches v_s p at t = {}, p = {} (need t_f > {})",
            record.worst_time, record.worst_momentum, record.t_min
        )));
    }
    Ok(())
}

fn mode_number(p: f64, length: f64) -> usize {
    (p * length / TWO_PI).round() as usize
}

fn summarize(out: &SimulationOutput, config: &RunConfig) -> Result<SummaryRecord, CliError> {
    let records = out.trajectories.iter().flat_map(|tr| tr.records.iter());
    let mut summary = SummaryRecord {
        final_total_residual: out.aggregate.total_residual.last().copied(),
        min_fidelity: records.clone().map(|r| r.fidelity_instantaneous_gs).reduce(f64::min),
        max_quasiparticles: records.map(|r| r.occupation_quasiparticle).reduce(f64::max),
        mean_energy_deviation: None,
        modes_ok: Some(out.trajectories.len()),
    };
    if config.cd && out.failures.is_empty() && !out.trajectories.is_empty() {
        summary.mean_energy_deviation = Some(mean_energy_scaling_check(&out.trajectories, &config.protocol()?)?);
    }
    Ok(summary)
}

pub fn simulate(config: &RunConfig, runtime: Runtime) -> Result<SummaryRecord, CliError> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("simulate", config);
    let result = (|| {
        let stability = stability_record(config)?;
        manifest.stability = Some(stability.clone());
        manifest.experimental_estimate = estimate_record(config)?;
        cd_precheck(config, &stability)?;

        let protocol = config.protocol()?;
        let mut options = config.evolve_options();
        if runtime.workers.is_some() {
            options.workers = runtime.workers;
        }
        log::info!("evolving {} modes to t_f = {}", protocol.n_modes, protocol.t_f);
        let out = run_simulation(&protocol, &options)?;
        let dir = &config.outputs;
        let modes: Vec<_> = out.trajectories.iter().map(|tr| (mode_number(tr.p, protocol.length), tr)).collect();
        output::write_outputs(dir, &modes, &out.aggregate)?;
        manifest.mode_failures = out
            .failures
            .iter()
            .map(|f| ModeFailureRecord { mode: f.mode, p: f.p, error: f.error.to_string() })
            .collect();
        manifest.summary = summarize(&out, config)?;
        if config.emit_plots {
            plot(dir)?;
        }
        if let Some(f) = out.failures.first() {
            return Err(CliError::Integration(format!(
                "{} of {} modes failed; first: mode {}: {}",
                out.failures.len(),
                protocol.n_modes,
                f.mode,
                f.error
            )));
        }
        Ok(manifest.summary.clone())
    })();
    finish(manifest, started, &config.outputs, result)
}

/// Human-readable stability report, also recorded in the manifest.
pub fn stability(config: &RunConfig, sink: &mut impl Write) -> Result<StabilityRecord, CliError> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("stability", config);
    let result = (|| {
        let record = stability_record(config)?;
        manifest.stability = Some(record.clone());
        let estimate = estimate_record(config)?;
        manifest.experimental_estimate = estimate.clone();
        let unit = match config.units {
            Units::Natural => "",
            Units::Experimental => " ms",
        };
        let io = |e| CliError::io("<stdout>", e);
        writeln!(sink, "stability: {}", if record.pass { "pass" } else { "FAIL" }).map_err(io)?;
        writeln!(
            sink,
            "worst margin = {:.6e} at t = {:.4}{unit}, p = {:.6}",
            record.worst_margin, record.worst_time, record.worst_momentum
        )
        .map_err(io)?;
        writeln!(sink, "shortest stable t_f = {:.4}{unit}", record.t_min).map_err(io)?;
        if let Some(b) = record.closed_form_bound {
            writeln!(sink, "closed-form bound = {b:.4}{unit}").map_err(io)?;
        }
        writeln!(
            sink,
            "adiabatic t_f (threshold {}) = {:.4}{unit}",
            record.adiabatic_threshold, record.t_adiabatic
        )
        .map_err(io)?;
        if let Some(e) = &estimate {
            writeln!(sink, "sound velocity = {:.4} um/ms", e.sound_velocity).map_err(io)?;
            if let Some(g) = e.gas_sound_velocity {
                writeln!(sink, "gas sound velocity = {g:.4} um/ms").map_err(io)?;
            }
            writeln!(sink, "experimental window: t_min = {:.2} ms, upper = {:.1} ms", e.t_min, e.t_upper).map_err(io)?;
        }
        Ok(record)
    })();
    finish(manifest, started, &config.outputs, result)
}

pub fn sweep(config: &RunConfig, runtime: Runtime) -> Result<Vec<tll_cd::SweepRow>, CliError> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("sweep", config);
    let result = (|| {
        if config.sweep_tf.is_empty() {
            return Err(CliError::Config("sweep needs a non-empty sweep_tf list".into()));
        }
        manifest.stability = Some(stability_record(config)?);
        let (_, time, _) = config.unit_factors();
        let protocol = config.protocol()?;
        let mut options = config.evolve_options();
        if runtime.workers.is_some() {
            options.workers = runtime.workers;
        }
        let tfs: Vec<f64> = config.sweep_tf.iter().map(|t| t / time).collect();
        let mut rows = sweep_tf(&protocol, &tfs, &options)?;
        for r in &mut rows {
            r.t_f *= time;
        }
        output::ensure_dir(&config.outputs)?;
        output::write_sweep_csv(&config.outputs.join("sweep.csv"), &rows)?;
        if config.emit_plots {
            plot(&config.outputs)?;
        }
        Ok(rows)
    })();
    finish(manifest, started, &config.outputs, result)
}

pub fn validate(config: &RunConfig, runtime: Runtime, sink: &mut impl Write) -> Result<tll_cd::ValidationReport, CliError> {
    let started = Instant::now();
    let manifest = RunManifest::new("validate", config);
    let result = (|| {
        let mut options = config.evolve_options();
        if runtime.workers.is_some() {
            options.workers = runtime.workers;
        }
        let report = run_validation(&config.protocol()?, &options)?;
        output::ensure_dir(&config.outputs)?;
        output::write_validation_csv(&config.outputs.join("validation.csv"), &report)?;
        for c in &report.checks {
            writeln!(
                sink,
                "{} {}: {:.3e} (tol {:.1e}) {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.tolerance,
                c.detail
            )
            .map_err(|e| CliError::io("<stdout>", e))?;
        }
        if !report.passed() {
            let failed: Vec<_> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            return Err(CliError::Validation(failed.join(", ")));
        }
        Ok(report)
    })();
    finish(manifest, started, &config.outputs, result)
}

/// Renders whichever of `aggregate.csv` and `sweep.csv` exist in `dir`.
/// Returns the files written.
pub fn plot(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    let aggregate = dir.join("aggregate.csv");
    if aggregate.exists() {
        let c = output::read_columns(&aggregate, &["t", "K", "v_s", "chi", "total_residual", "min_margin"])?;
        let params = svg::render(&[
            Panel::new("Luttinger parameter", "t", "K").with("K(t)", &c[0], &c[1]),
            Panel::new("sound velocity", "t", "v_s").with("v_s(t)", &c[0], &c[2]),
            Panel::new("CD amplitude", "t", "chi").with("chi(t)", &c[0], &c[3]),
        ]);
        let residual = svg::render(&[
            Panel::new("residual energy", "t", "E_res").with("total", &c[0], &c[4]),
            Panel::new("stability margin", "t", "v_s p - |chi|").with("min over modes", &c[0], &c[5]),
        ]);
        for (name, text) in [("parameters.svg", params), ("residual.svg", residual)] {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
            written.push(path);
        }
    }
    let sweep = dir.join("sweep.csv");
    if sweep.exists() {
        let c = output::read_columns(&sweep, &["t_f", "final_residual"])?;
        let text = svg::render(&[Panel::new("residual energy at t_f", "t_f", "E_res").log_y().with(
            "final residual",
            &c[0],
            &c[1],
        )]);
        let path = dir.join("sweep.svg");
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    if written.is_empty() {
        return Err(CliError::Config(format!("{}: no aggregate.csv or sweep.csv to plot", dir.display())));
    }
    Ok(written)
}
