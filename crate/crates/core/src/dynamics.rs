//! Pair-by-pair time evolution of the driven liquid.
//!
//! Each pair `(p, −p)` stays in a two-mode squeezed vacuum, stored as the
//! Bogoliubov map `(u, v)` of the operator `u b(p) + v b†(−p)` that annihilates
//! it. With `α = g + iχ` the Schrödinger equation reduces to
//!
//! ```text
//! u̇ = −i α* v,    v̇ = i (α u − 2ω v)
//! ```
//!
//! which keeps `|u|² − |v|²` fixed. In this gauge the vacuum amplitude of the
//! pair is `c₀ = exp(−i∫ω dt)/u`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::control::{spectrum_with_cd, stability_margin};
use crate::error::{Error, Result};
use crate::integrate::{integrate, StepStats, Tolerances};
use crate::model::{bogoliubov_angle, instantaneous_spectrum, PairCoefficients};
use crate::protocol::{DriveProtocol, DEFAULT_STABILITY_POINTS};
use crate::su11::{
    compose_unchecked, squeeze_from_angle, state_overlap, vacuum_observables, BogoliubovMap,
};

/// Default number of uniformly spaced output times.
pub const DEFAULT_RECORD_POINTS: usize = 201;

/// Largest tolerated `|u|² − |v|² − 1` along a stored trajectory.
pub const TRAJECTORY_INVARIANT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum InitialState {
    /// Ground state of the noninteracting Hamiltonian.
    #[default]
    Vacuum,
    /// Ground state of the interacting Hamiltonian at `t = 0`.
    GroundState,
    /// The same map for every pair.
    Map(BogoliubovMap),
}

impl InitialState {
    pub fn map_for(&self, protocol: &DriveProtocol, p: f64) -> Result<BogoliubovMap> {
        match self {
            InitialState::Vacuum => Ok(BogoliubovMap::IDENTITY),
            InitialState::GroundState => {
                let (omega, g) = protocol.pair_frequencies(p, 0.0);
                squeeze_from_angle(bogoliubov_angle(omega, g)?)
            }
            InitialState::Map(m) => {
                m.check()?;
                Ok(*m)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub tolerances: Tolerances,
    pub record_points: usize,
    pub initial_state: InitialState,
    /// Size of the worker pool for ensembles; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            tolerances: Tolerances::default(),
            record_points: DEFAULT_RECORD_POINTS,
            initial_state: InitialState::Vacuum,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableRecord {
    pub t: f64,
    pub p: f64,
    /// `⟨b†(p) b(p)⟩`.
    pub occupation_bare: f64,
    /// Quanta above the instantaneous interacting ground state.
    pub occupation_quasiparticle: f64,
    pub fidelity_instantaneous_gs: f64,
    /// `⟨H_TL⟩` per pair, zero-point constant `−ω` included.
    pub pair_energy: f64,
    /// `pair_energy − (ε − ω)`.
    pub residual_energy: f64,
    /// `⟨H_TL + H_CD⟩` per pair without the `−ω` constant.
    pub controlled_energy: f64,
    pub epsilon_cd: f64,
    /// Applied control amplitude, zero when CD is off.
    pub chi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeTrajectory {
    pub p: f64,
    pub times: Vec<f64>,
    pub maps: Vec<BogoliubovMap>,
    pub records: Vec<ObservableRecord>,
    /// `∫₀ᵗ ds/σ_s² = ∫₀ᵗ v_{s,p}/v_F ds`.
    pub scaled_time: Vec<f64>,
    /// `−ω₀p ∫ds/σ_s²`: phase picked up by a vacuum start under CD.
    pub zero_point_phase: Vec<f64>,
    /// Argument of the vacuum amplitude `c₀ = exp(−i∫ω)/u`.
    pub vacuum_phase: Vec<f64>,
    pub stats: StepStats,
}

impl ModeTrajectory {
    pub fn final_record(&self) -> Option<&ObservableRecord> {
        self.records.last()
    }

    /// Largest `| |u|² − |v|² − 1 |` over the stored maps.
    pub fn max_invariant_defect(&self) -> f64 {
        self.maps
            .iter()
            .map(|m| (m.u().norm_sqr() - m.v().norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// `state` seen from the instantaneous quasiparticle basis of angle `eta_t`.
pub fn quasiparticle_frame(state: &BogoliubovMap, eta_t: f64) -> Result<BogoliubovMap> {
    let diag = squeeze_from_angle(eta_t)?;
    Ok(compose_unchecked(state, &diag.inverse()))
}

/// `⟨H_TL⟩ = 2ω(n + 1/2) − ω + 2g Re⟨b b⟩` for one pair.
pub fn pair_energy(state: &BogoliubovMap, coeffs: &PairCoefficients) -> f64 {
    let obs = vacuum_observables(state);
    2.0 * coeffs.omega * obs.occupation + 2.0 * coeffs.g * obs.pair_correlator.re
}

/// `⟨2ωK₀ + g(K₊ + K₋) + iχ(K₊ − K₋)⟩ = 2ω(n + 1/2) + 2g Re⟨bb⟩ + 2χ Im⟨bb⟩`.
pub fn controlled_energy(state: &BogoliubovMap, coeffs: &PairCoefficients) -> f64 {
    let obs = vacuum_observables(state);
    2.0 * coeffs.omega * obs.k0_expectation
        + 2.0 * coeffs.g * obs.pair_correlator.re
        + 2.0 * coeffs.chi * obs.pair_correlator.im
}

/// Energy above the instantaneous pair ground energy `ε − ω`.
pub fn residual_energy(state: &BogoliubovMap, coeffs: &PairCoefficients) -> Result<f64> {
    let eps = instantaneous_spectrum(coeffs.omega, coeffs.g)?;
    Ok(pair_energy(state, coeffs) - (eps - coeffs.omega))
}

fn record(protocol: &DriveProtocol, p: f64, t: f64, map: &BogoliubovMap) -> Result<ObservableRecord> {
    let coeffs = protocol.pair_generator(p, t)?;
    let eta = bogoliubov_angle(coeffs.omega, coeffs.g)?;
    let frame = quasiparticle_frame(map, eta)?;
    let lp = protocol.luttinger(p, t)?;
    let epsilon_cd = spectrum_with_cd(lp.v_s, p, coeffs.chi)
        .map_err(|e| Error::cd(format!("mode p = {p} at t = {t}: {e}")))?;
    let pair = pair_energy(map, &coeffs);
    let eps = instantaneous_spectrum(coeffs.omega, coeffs.g)?;
    Ok(ObservableRecord {
        t,
        p,
        occupation_bare: map.v().norm_sqr(),
        occupation_quasiparticle: frame.v().norm_sqr(),
        fidelity_instantaneous_gs: state_overlap(&BogoliubovMap::IDENTITY, &frame),
        pair_energy: pair,
        residual_energy: pair - (eps - coeffs.omega),
        controlled_energy: controlled_energy(map, &coeffs),
        epsilon_cd,
        chi: coeffs.chi,
    })
}

/// Evolves one pair over `[0, t_f]` and records observables on a uniform grid.
pub fn evolve_pair(p: f64, protocol: &DriveProtocol, options: &EvolveOptions) -> Result<ModeTrajectory> {
    protocol.validate()?;
    evolve_validated(p, protocol, options)
}

fn evolve_validated(p: f64, protocol: &DriveProtocol, options: &EvolveOptions) -> Result<ModeTrajectory> {
    if options.record_points < 2 {
        return Err(Error::contract("record_points must be at least 2"));
    }
    if !(p > 0.0) {
        return Err(Error::contract(format!("pair momentum must be positive, got {p}")));
    }
    let start = options.initial_state.map_for(protocol, p)?;
    let times = protocol.time_grid(options.record_points);
    let y0 = [start.u().re, start.u().im, start.v().re, start.v().im, 0.0, 0.0];

    let mut failure: Option<Error> = None;
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let step = protocol
            .pair_generator(p, t)
            .and_then(|c| protocol.luttinger(p, t).map(|lp| (c, lp.v_s)));
        let (c, v_s) = match step {
            Ok(ok) => ok,
            Err(e) => {
                failure.get_or_insert(e);
                dy.fill(f64::NAN);
                return;
            }
        };
        let u = Complex64::new(y[0], y[1]);
        let v = Complex64::new(y[2], y[3]);
        let alpha = Complex64::new(c.g, c.chi);
        let i = Complex64::i();
        let du = -i * alpha.conj() * v;
        let dv = i * (alpha * u - 2.0 * c.omega * v);
        dy[0] = du.re;
        dy[1] = du.im;
        dy[2] = dv.re;
        dy[3] = dv.im;
        dy[4] = v_s / protocol.v_f;
        dy[5] = c.omega;
    };
    let outcome = integrate(rhs, 0.0, &y0, &times, options.tolerances);
    if let Some(e) = failure {
        return Err(e);
    }
    let (states, stats) = outcome?;

    let omega0 = protocol.v_f * p;
    let mut traj = ModeTrajectory {
        p,
        times: times.clone(),
        maps: Vec::with_capacity(times.len()),
        records: Vec::with_capacity(times.len()),
        scaled_time: Vec::with_capacity(times.len()),
        zero_point_phase: Vec::with_capacity(times.len()),
        vacuum_phase: Vec::with_capacity(times.len()),
        stats,
    };
    for (&t, y) in times.iter().zip(&states) {
        let u = Complex64::new(y[0], y[1]);
        let map = BogoliubovMap::from_parts_unchecked(u, Complex64::new(y[2], y[3]));
        let defect = (map.u().norm_sqr() - map.v().norm_sqr() - 1.0).abs();
        if defect > TRAJECTORY_INVARIANT_TOL {
            return Err(Error::Integration {
                t,
                reason: format!("|u|² − |v|² drifted from 1 by {defect:e}"),
            });
        }
        traj.records.push(record(protocol, p, t, &map)?);
        traj.maps.push(map);
        traj.scaled_time.push(y[4]);
        traj.zero_point_phase.push(-omega0 * y[4]);
        traj.vacuum_phase.push(-y[5] - u.arg());
    }
    Ok(traj)
}

/// Relative deviation `max_t |⟨ℋ(t)⟩ − Σ_p ⟨ℋ_p(0)⟩ v_{s,p}(t)/v_{s,p}(0)| / ⟨ℋ(0)⟩`.
///
/// `ℋ` is the controlled Hamiltonian with the zero-point energy included. For
/// a noninteracting start `v_{s,p}(0) = v_F`.
pub fn mean_energy_scaling_check(trajectories: &[ModeTrajectory], protocol: &DriveProtocol) -> Result<f64> {
    if !protocol.cd_enabled {
        return Err(Error::contract("mean-energy scaling only holds with CD enabled"));
    }
    let Some(first) = trajectories.first() else {
        return Ok(0.0);
    };
    if trajectories.iter().any(|tr| tr.times != first.times) {
        return Err(Error::contract("trajectories must share one time grid"));
    }
    let mut initial_total = 0.0;
    let mut initial_speed = Vec::with_capacity(trajectories.len());
    for tr in trajectories {
        let r0 = tr.records.first().ok_or_else(|| Error::contract("empty trajectory"))?;
        initial_total += r0.controlled_energy;
        initial_speed.push(protocol.luttinger(tr.p, tr.times[0])?.v_s);
    }
    let mut worst = 0.0f64;
    for (k, &t) in first.times.iter().enumerate() {
        let mut actual = 0.0;
        let mut expected = 0.0;
        for (tr, v0) in trajectories.iter().zip(&initial_speed) {
            actual += tr.records[k].controlled_energy;
            expected += tr.records[0].controlled_energy * protocol.luttinger(tr.p, t)?.v_s / v0;
        }
        worst = worst.max((actual - expected).abs());
    }
    Ok(worst / initial_total.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSeries {
    pub times: Vec<f64>,
    /// `Σ_p residual_energy`.
    pub total_residual: Vec<f64>,
    /// `Σ_p controlled_energy`.
    pub total_energy: Vec<f64>,
    /// Sound velocity, Luttinger parameter and CD amplitude of the slowest mode.
    pub v_s: Vec<f64>,
    pub k: Vec<f64>,
    pub chi: Vec<f64>,
    /// `min_p (v_{s,p}|p| − |χ_p|)`.
    pub min_margin: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeFailure {
    /// Mode number `n` of `p_n = 2πn/L`.
    pub mode: usize,
    pub p: f64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    /// Successful modes in increasing momentum.
    pub trajectories: Vec<ModeTrajectory>,
    pub failures: Vec<ModeFailure>,
    pub aggregate: AggregateSeries,
}

fn with_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::contract(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Evolves every mode `p_n`, `n = 1..=n_modes`, and sums the observables.
///
/// Modes run in parallel; the reduction walks them in momentum order, so the
/// output does not depend on the worker count.
pub fn run_simulation(protocol: &DriveProtocol, options: &EvolveOptions) -> Result<SimulationOutput> {
    protocol.validate()?;
    if options.record_points < 2 {
        return Err(Error::contract("record_points must be at least 2"));
    }
    let modes: Vec<(usize, f64)> = (1..=protocol.n_modes).map(|n| (n, protocol.momentum(n))).collect();
    let results: Vec<Result<ModeTrajectory>> = with_pool(options.workers, || {
        modes
            .par_iter()
            .map(|&(_, p)| evolve_validated(p, protocol, options))
            .collect()
    })?;

    let mut trajectories = Vec::new();
    let mut failures = Vec::new();
    for (&(mode, p), result) in modes.iter().zip(results) {
        match result {
            Ok(tr) => trajectories.push(tr),
            Err(error) => failures.push(ModeFailure { mode, p, error }),
        }
    }
    let aggregate = aggregate(protocol, &trajectories, options.record_points)?;
    Ok(SimulationOutput { trajectories, failures, aggregate })
}

fn aggregate(protocol: &DriveProtocol, trajectories: &[ModeTrajectory], points: usize) -> Result<AggregateSeries> {
    let times = protocol.time_grid(points);
    let n = times.len();
    let mut out = AggregateSeries {
        times: times.clone(),
        total_residual: vec![0.0; n],
        total_energy: vec![0.0; n],
        v_s: Vec::with_capacity(n),
        k: Vec::with_capacity(n),
        chi: Vec::with_capacity(n),
        min_margin: Vec::with_capacity(n),
    };
    for tr in trajectories {
        for (k, r) in tr.records.iter().enumerate() {
            out.total_residual[k] += r.residual_energy;
            out.total_energy[k] += r.controlled_energy;
        }
    }
    let p1 = protocol.momentum(1);
    let modes = protocol.modes();
    for &t in &times {
        let lp = protocol.luttinger(p1, t)?;
        out.v_s.push(lp.v_s);
        out.k.push(lp.k);
        out.chi.push(protocol.chi(p1, t)?);
        let mut margin = f64::INFINITY;
        for &p in &modes {
            let v_s = protocol.luttinger(p, t)?.v_s;
            margin = margin.min(v_s * p - protocol.chi(p, t)?.abs());
        }
        out.min_margin.push(margin);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub t_f: f64,
    pub stability_pass: bool,
    /// `Σ_p residual_energy` at `t_f`; absent when the run was skipped or failed.
    pub final_residual: Option<f64>,
    /// Smallest final ground-state fidelity over the modes.
    pub final_fidelity: Option<f64>,
    pub error: Option<String>,
}

/// One run per ramp time. With CD on, rows that fail the stability check are
/// reported without a simulation.
pub fn sweep_tf(template: &DriveProtocol, tf_list: &[f64], options: &EvolveOptions) -> Result<Vec<SweepRow>> {
    if tf_list.is_empty() {
        return Err(Error::contract("t_f list is empty"));
    }
    let run_options = EvolveOptions { record_points: 2, ..*options };
    let mut rows = Vec::with_capacity(tf_list.len());
    for &t_f in tf_list {
        let protocol = template.clone().with_t_f(t_f);
        protocol.validate_parameters()?;
        let stability_pass = stability_margin(&protocol, DEFAULT_STABILITY_POINTS)?.pass;
        let mut row = SweepRow { t_f, stability_pass, final_residual: None, final_fidelity: None, error: None };
        if protocol.cd_enabled && !stability_pass {
            row.error = Some("cd-instability: stability condition fails".into());
            rows.push(row);
            continue;
        }
        match run_simulation(&protocol, &run_options) {
            Ok(out) if out.failures.is_empty() => {
                row.final_residual = out.aggregate.total_residual.last().copied();
                row.final_fidelity = out
                    .trajectories
                    .iter()
                    .filter_map(|tr| tr.final_record())
                    .map(|r| r.fidelity_instantaneous_gs)
                    .reduce(f64::min);
            }
            Ok(out) => row.error = Some(out.failures[0].error.to_string()),
            Err(e) => row.error = Some(e.to_string()),
        }
        rows.push(row);
    }
    Ok(rows)
}
