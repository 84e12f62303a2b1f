//! Cross-checks of the Gaussian pair dynamics against the Fock oracle and
//! closed forms.

use num_complex::Complex64;

use crate::control::{spectrum_with_cd, stability_margin};
use crate::dynamics::{evolve_pair, mean_energy_scaling_check, run_simulation, EvolveOptions};
use crate::error::Result;
use crate::fock::{
    evolve_fock, fock_tolerances, gaussian_amplitudes, pair_hamiltonian_matrix, FockState, DEFAULT_N_MAX,
};
use crate::model::{bogoliubov_angle, CouplingSpec, PairCoefficients, TWO_PI};
use crate::protocol::{DriveProtocol, DEFAULT_STABILITY_POINTS};
use crate::schedule::Schedule;
use crate::su11::{state_overlap, vacuum_observables, BogoliubovMap};

/// Cutoff of the eigenvalue comparison.
pub const SPECTRUM_N_MAX: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationCheck {
    pub name: String,
    /// Measured error (or `1 − overlap`).
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl ValidationCheck {
    fn below(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        ValidationCheck {
            name: name.to_string(),
            value,
            tolerance,
            pass: value <= tolerance,
            detail: detail.into(),
        }
    }

    fn failed(name: &str, tolerance: f64, detail: impl Into<String>) -> Self {
        ValidationCheck { name: name.to_string(), value: f64::NAN, tolerance, pass: false, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Gaussian and Fock evolutions of one pair, compared at every record time.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub min_overlap: f64,
    /// `max_t ‖ψ_Fock − e^{−i∫ω} ψ_Gauss‖`: sensitive to phases as well.
    pub max_amplitude_distance: f64,
    pub max_occupation_gap: f64,
    pub max_correlator_gap: f64,
    pub max_tail_mass: f64,
    pub cutoff_safe: bool,
}

pub fn oracle_equivalence(
    protocol: &DriveProtocol,
    p: f64,
    n_max: usize,
    options: &EvolveOptions,
) -> Result<OracleComparison> {
    let gauss = evolve_pair(p, protocol, options)?;
    let start = gaussian_amplitudes(&gauss.maps[0], n_max)?;
    let fock = evolve_fock(&start, protocol, p, options.record_points, fock_tolerances())?;
    let mut out = OracleComparison {
        min_overlap: f64::INFINITY,
        max_amplitude_distance: 0.0,
        max_occupation_gap: 0.0,
        max_correlator_gap: 0.0,
        max_tail_mass: fock.max_tail_mass,
        cutoff_safe: fock.cutoff_safe(),
    };
    for (k, state) in fock.states.iter().enumerate() {
        let map = &gauss.maps[k];
        let predicted = gaussian_amplitudes(map, n_max).or_else(|_| {
            // untrusted cutoff: keep the truncated amplitudes for the comparison
            let r = map.fock_ratio();
            let mut c = 1.0 / map.u();
            FockState::new(
                (0..=n_max)
                    .map(|_| {
                        let z = c;
                        c *= r;
                        z
                    })
                    .collect(),
            )
        })?;
        let phase = Complex64::from_polar(1.0, gauss.vacuum_phase[k] + map.u().arg());
        let distance = state
            .amplitudes()
            .iter()
            .zip(predicted.amplitudes())
            .map(|(a, b)| (a - phase * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let obs = vacuum_observables(map);
        out.min_overlap = out.min_overlap.min(state.overlap(&predicted)?);
        out.max_amplitude_distance = out.max_amplitude_distance.max(distance);
        out.max_occupation_gap = out.max_occupation_gap.max((state.mean_occupation() - obs.occupation).abs());
        out.max_correlator_gap = out
            .max_correlator_gap
            .max((state.pair_correlator() - obs.pair_correlator).norm());
    }
    Ok(out)
}

/// `(ε_ground, (E₁ − E₀)/2)` of the truncated pair matrix.
pub fn fock_spectrum(coeffs: &PairCoefficients, n_max: usize) -> (f64, f64) {
    let ev = pair_hamiltonian_matrix(coeffs, n_max).lowest_eigenvalues(2);
    (ev[0], 0.5 * (ev[1] - ev[0]))
}

fn sample_maps() -> Vec<BogoliubovMap> {
    [(0.0, 0.0, 0.0), (0.3, 0.2, -0.4), (-0.7, 1.3, 2.0), (1.1, -2.5, 0.6)]
        .iter()
        .map(|&(r, a, b): &(f64, f64, f64)| {
            BogoliubovMap::from_parts_unchecked(
                Complex64::from_polar(r.cosh(), a),
                Complex64::from_polar(r.sinh().abs(), b),
            )
        })
        .collect()
}

fn closed_form_check() -> Result<ValidationCheck> {
    let maps = sample_maps();
    let mut worst = 0.0f64;
    for a in &maps {
        let fa = gaussian_amplitudes(a, DEFAULT_N_MAX)?;
        let obs = vacuum_observables(a);
        worst = worst
            .max((fa.norm_sqr() - 1.0).abs())
            .max((fa.mean_occupation() - obs.occupation).abs())
            .max((fa.pair_correlator() - obs.pair_correlator).norm());
        for b in &maps {
            let fb = gaussian_amplitudes(b, DEFAULT_N_MAX)?;
            worst = worst.max((fa.overlap(&fb)? - state_overlap(a, b)).abs());
        }
    }
    Ok(ValidationCheck::below(
        "gaussian_closed_forms_vs_fock",
        worst,
        1e-8,
        format!("{} maps at n_max = {DEFAULT_N_MAX}", maps.len()),
    ))
}

fn spectrum_check(protocol: &DriveProtocol) -> Result<ValidationCheck> {
    let p = protocol.momentum(1);
    let mut worst = 0.0f64;
    for t in protocol.time_grid(21) {
        let (omega, g) = protocol.pair_frequencies(p, t);
        let chi = protocol.chi(p, t)?;
        let lp = protocol.luttinger(p, t)?;
        let eps = match spectrum_with_cd(lp.v_s, p, chi) {
            Ok(e) => e,
            Err(e) => return Ok(ValidationCheck::failed("cd_spectrum_vs_fock", 1e-6, e.to_string())),
        };
        let (ground, half_gap) = fock_spectrum(&PairCoefficients { omega, g, chi }, SPECTRUM_N_MAX);
        worst = worst.max((ground - eps).abs()).max((half_gap - eps).abs());
    }
    Ok(ValidationCheck::below(
        "cd_spectrum_vs_fock",
        worst,
        1e-6,
        format!("slowest mode, 21 times, n_max = {SPECTRUM_N_MAX}"),
    ))
}

fn oracle_check(name: &str, protocol: &DriveProtocol) -> ValidationCheck {
    let options = EvolveOptions { record_points: 41, ..EvolveOptions::default() };
    match oracle_equivalence(protocol, protocol.momentum(1), DEFAULT_N_MAX, &options) {
        Ok(c) if !c.cutoff_safe => ValidationCheck::failed(
            name,
            1e-6,
            format!("cutoff-unsafe: tail mass {:e} at n_max = {DEFAULT_N_MAX}", c.max_tail_mass),
        ),
        Ok(c) => {
            let worst = (1.0 - c.min_overlap)
                .max(c.max_amplitude_distance)
                .max(c.max_occupation_gap)
                .max(c.max_correlator_gap);
            ValidationCheck::below(name, worst, 1e-6, format!("min overlap {:.12}", c.min_overlap))
        }
        Err(e) => ValidationCheck::failed(name, 1e-6, e.to_string()),
    }
}

fn sudden_quench_check() -> Result<ValidationCheck> {
    let mut worst = 0.0f64;
    for ratio in [0.2, 0.5, 0.8] {
        let coupling = CouplingSpec::contact(0.0, ratio * TWO_PI, 0.0, 0.0);
        let protocol = DriveProtocol::new(coupling, Schedule::Poly5, 1e-4, 10.0, 1).with_cd(false);
        let p = protocol.momentum(1);
        let options = EvolveOptions { record_points: 2, ..EvolveOptions::default() };
        let tr = evolve_pair(p, &protocol, &options)?;
        let (omega, g) = protocol.pair_frequencies(p, protocol.t_f);
        let eta_f = bogoliubov_angle(omega, g)?;
        let n = tr.records.last().map_or(f64::NAN, |r| r.occupation_quasiparticle);
        worst = worst.max((n - eta_f.sinh().powi(2)).abs());
    }
    Ok(ValidationCheck::below("sudden_quench", worst, 1e-6, "g/ω ∈ {0.2, 0.5, 0.8}, t_f = 1e-4"))
}

fn transitionless_checks(protocol: &DriveProtocol, options: &EvolveOptions) -> Vec<ValidationCheck> {
    let protocol = protocol.clone().with_cd(true);
    let run = match run_simulation(&protocol, options) {
        Ok(run) => run,
        Err(e) => {
            return vec![
                ValidationCheck::failed("transitionless_fidelity", 1e-8, e.to_string()),
                ValidationCheck::failed("mean_energy_scaling", 1e-8, e.to_string()),
            ]
        }
    };
    if let Some(f) = run.failures.first() {
        let msg = format!("mode {}: {}", f.mode, f.error);
        return vec![
            ValidationCheck::failed("transitionless_fidelity", 1e-8, msg.clone()),
            ValidationCheck::failed("mean_energy_scaling", 1e-8, msg),
        ];
    }
    let min_fidelity = run
        .trajectories
        .iter()
        .flat_map(|tr| &tr.records)
        .map(|r| r.fidelity_instantaneous_gs)
        .fold(1.0, f64::min);
    let mut checks = vec![ValidationCheck::below(
        "transitionless_fidelity",
        1.0 - min_fidelity,
        1e-8,
        format!("{} modes, {} times", run.trajectories.len(), options.record_points),
    )];
    checks.push(match mean_energy_scaling_check(&run.trajectories, &protocol) {
        Ok(dev) => ValidationCheck::below("mean_energy_scaling", dev, 1e-8, "relative deviation"),
        Err(e) => ValidationCheck::failed("mean_energy_scaling", 1e-8, e.to_string()),
    });
    checks
}

/// Runs every check on `protocol` (CD state as configured for the oracle
/// comparison; the transitionless checks force CD on).
pub fn run_validation(protocol: &DriveProtocol, options: &EvolveOptions) -> Result<ValidationReport> {
    protocol.validate()?;
    let mut checks = vec![closed_form_check()?, spectrum_check(protocol)?];
    checks.push(oracle_check("oracle_equivalence_cd_on", &protocol.clone().with_cd(true)));
    checks.push(oracle_check("oracle_equivalence_cd_off", &protocol.clone().with_cd(false)));
    checks.push(sudden_quench_check()?);
    let stable = stability_margin(protocol, DEFAULT_STABILITY_POINTS)?;
    if stable.pass {
        checks.extend(transitionless_checks(protocol, options));
    } else {
        checks.push(ValidationCheck::failed(
            "transitionless_fidelity",
            1e-8,
            format!("cd-instability: margin {:e} at t = {}", stable.worst_margin, stable.worst_time),
        ));
    }
    Ok(ValidationReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fock_spectrum_of_the_controlled_pair() {
        let (g0, half_gap) = fock_spectrum(&PairCoefficients { omega: 1.0, g: 0.3, chi: 0.4 }, SPECTRUM_N_MAX);
        let eps = (1.0f64 - 0.09 - 0.16).sqrt();
        assert!((g0 - eps).abs() < 1e-10);
        assert!((half_gap - eps).abs() < 1e-10);
    }

    #[test]
    fn suite_passes_on_a_short_stable_ramp() {
        let protocol = DriveProtocol::new(CouplingSpec::contact(0.0, 1.0, 0.0, 0.5), Schedule::Poly5, 9.5, 100.0, 4);
        let options = EvolveOptions { record_points: 21, ..EvolveOptions::default() };
        let report = run_validation(&protocol, &options).unwrap();
        for c in &report.checks {
            assert!(c.pass, "{c:?}");
        }
    }

    #[test]
    fn suite_flags_an_unstable_ramp() {
        let protocol = DriveProtocol::new(CouplingSpec::contact(0.0, 1.0, 0.0, 0.5), Schedule::Poly5, 0.5, 100.0, 2);
        let report = run_validation(&protocol, &EvolveOptions::default()).unwrap();
        assert!(!report.passed());
    }
}
