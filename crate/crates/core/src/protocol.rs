//! Drive protocols: coupling family, schedule, box and mode grid.

use crate::control::{cd_amplitude_contact, cd_amplitude_lorentzian};
use crate::error::{Error, Result};
use crate::model::{
    luttinger_params, pair_frequencies, CouplingFamily, CouplingSpec, Couplings, LuttingerParams,
    PairCoefficients, TWO_PI,
};
use crate::schedule::Schedule;

/// Default number of points of the dense time grid used for stability checks.
pub const DEFAULT_STABILITY_POINTS: usize = 2001;

/// How the CD amplitude is evaluated for Lorentzian couplings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LorentzianChi {
    /// `K̇_p/(2K_p)` from the full momentum-dependent couplings.
    #[default]
    Exact,
    /// First order in `R0 |p|`.
    Linearized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveProtocol {
    pub coupling: CouplingSpec,
    pub schedule: Schedule,
    pub t_f: f64,
    /// System length `L`; momenta are `p_n = 2πn/L`, `n = 1..=n_modes`.
    pub length: f64,
    pub n_modes: usize,
    pub cd_enabled: bool,
    pub v_f: f64,
    pub lorentzian_chi: LorentzianChi,
}

impl DriveProtocol {
    /// CD on, `v_F = 1`.
    pub fn new(coupling: CouplingSpec, schedule: Schedule, t_f: f64, length: f64, n_modes: usize) -> Self {
        DriveProtocol {
            coupling,
            schedule,
            t_f,
            length,
            n_modes,
            cd_enabled: true,
            v_f: 1.0,
            lorentzian_chi: LorentzianChi::Exact,
        }
    }

    pub fn with_cd(mut self, enabled: bool) -> Self {
        self.cd_enabled = enabled;
        self
    }

    pub fn with_t_f(mut self, t_f: f64) -> Self {
        self.t_f = t_f;
        self
    }

    pub fn with_modes(mut self, n_modes: usize) -> Self {
        self.n_modes = n_modes;
        self
    }

    pub fn momentum(&self, n: usize) -> f64 {
        TWO_PI * n as f64 / self.length
    }

    pub fn modes(&self) -> Vec<f64> {
        (1..=self.n_modes).map(|n| self.momentum(n)).collect()
    }

    /// Times `t_f · k/(points − 1)`, `k = 0..points`.
    pub fn time_grid(&self, points: usize) -> Vec<f64> {
        match points {
            0 => Vec::new(),
            1 => vec![self.t_f],
            _ => (0..points)
                .map(|k| self.t_f * k as f64 / (points - 1) as f64)
                .collect(),
        }
    }

    /// `(𝒫(t/t_f), d𝒫/dt)`, held constant outside `[0, t_f]`.
    pub fn progress(&self, t: f64) -> (f64, f64) {
        let s = t / self.t_f;
        if s <= 0.0 {
            (0.0, 0.0)
        } else if s >= 1.0 {
            (1.0, 0.0)
        } else {
            let (value, rate) = self.schedule.value_unchecked(s);
            (value, rate / self.t_f)
        }
    }

    pub fn couplings(&self, p: f64, t: f64) -> Couplings {
        let (value, rate) = self.progress(t);
        self.coupling.couplings(p, value, rate)
    }

    /// `(ω, g)` of the reference Hamiltonian.
    pub fn pair_frequencies(&self, p: f64, t: f64) -> (f64, f64) {
        let c = self.couplings(p, t);
        pair_frequencies(p, c.g2, c.g4, self.v_f)
    }

    pub fn luttinger(&self, p: f64, t: f64) -> Result<LuttingerParams> {
        let c = self.couplings(p, t);
        luttinger_params(c.g2, c.g4, self.v_f)
    }

    /// CD amplitude `χ = K̇_p/(2K_p)`, independent of `cd_enabled`.
    pub fn chi(&self, p: f64, t: f64) -> Result<f64> {
        match (self.coupling.family, self.lorentzian_chi) {
            (CouplingFamily::Lorentzian, LorentzianChi::Linearized) => {
                let (value, rate) = self.progress(t);
                let lambda = self.coupling.g2_start + (self.coupling.g2_end - self.coupling.g2_start) * value;
                let dlambda = (self.coupling.g2_end - self.coupling.g2_start) * rate;
                Ok(cd_amplitude_lorentzian(lambda, dlambda, self.coupling.r0, p, self.v_f)?.linearized)
            }
            _ => {
                let c = self.couplings(p, t);
                cd_amplitude_contact(c.g2, c.g4, c.dg2_dt, c.dg4_dt, self.v_f)
            }
        }
    }

    /// Generator coefficients of one pair; `χ = 0` when the control is off.
    pub fn pair_generator(&self, p: f64, t: f64) -> Result<PairCoefficients> {
        let (omega, g) = self.pair_frequencies(p, t);
        if !(omega > g.abs()) {
            return Err(Error::luttinger(format!(
                "mode p = {p} at t = {t}: |g| = {} is not below ω = {omega}",
                g.abs()
            )));
        }
        let chi = if self.cd_enabled { self.chi(p, t)? } else { 0.0 };
        Ok(PairCoefficients { omega, g, chi })
    }

    /// The same drive run backwards: start and end couplings swapped.
    ///
    /// For schedules with `𝒫(1 − s) = 1 − 𝒫(s)` (poly5, linear) this is the
    /// protocol `g(t_f − t)`.
    pub fn reversed(&self) -> Result<Self> {
        if self.coupling.family == CouplingFamily::CustomTable {
            return Err(Error::contract("custom_table couplings cannot be reversed"));
        }
        let mut out = self.clone();
        let c = &mut out.coupling;
        std::mem::swap(&mut c.g2_start, &mut c.g2_end);
        std::mem::swap(&mut c.g4_start, &mut c.g4_end);
        Ok(out)
    }

    /// Modes whose stability has to be checked: the slowest mode carries the
    /// binding constraint for momentum-independent couplings.
    pub(crate) fn critical_modes(&self) -> Vec<f64> {
        match self.coupling.family {
            CouplingFamily::Contact => vec![self.momentum(1)],
            _ => self.modes(),
        }
    }

    /// Parameter checks plus `|g(p,t)| < ω(p,t)` on the dense grid for every mode.
    pub fn validate(&self) -> Result<()> {
        self.validate_parameters()?;
        for t in self.time_grid(DEFAULT_STABILITY_POINTS) {
            for p in self.critical_modes() {
                self.luttinger(p, t).map_err(|e| {
                    Error::luttinger(format!("mode p = {p} at t = {t}: {e}"))
                })?;
            }
        }
        Ok(())
    }

    pub fn validate_parameters(&self) -> Result<()> {
        self.coupling.validate_shape()?;
        self.schedule.validate()?;
        if !(self.t_f > 0.0 && self.t_f.is_finite()) {
            return Err(Error::contract(format!("t_f must be positive, got {}", self.t_f)));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::contract(format!("L must be positive, got {}", self.length)));
        }
        if self.n_modes == 0 {
            return Err(Error::contract("n_modes must be at least 1"));
        }
        if !(self.v_f > 0.0 && self.v_f.is_finite()) {
            return Err(Error::contract(format!("v_F must be positive, got {}", self.v_f)));
        }
        if self.lorentzian_chi == LorentzianChi::Linearized {
            let c = &self.coupling;
            if c.family != CouplingFamily::Lorentzian || c.g2_start != c.g4_start || c.g2_end != c.g4_end {
                return Err(Error::contract(
                    "linearized CD amplitude needs the lorentzian family with g2 = g4",
                ));
            }
        }
        Ok(())
    }
}
