//! Counterdiabatic control: amplitudes, controlled coefficients, stability and
//! speed criteria, and the real-space forms of the control term.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{CouplingFamily, TWO_PI};
use crate::protocol::{DriveProtocol, DEFAULT_STABILITY_POINTS};

/// Default bound on `|Ω̇/Ω²|` that counts as adiabatic.
pub const DEFAULT_ADIABATIC_THRESHOLD: f64 = 0.01;

/// `χ = K̇/(2K)` for couplings `g2`, `g4` moving at `dg2_dt`, `dg4_dt`.
///
/// `K̇/K = [ġ4 g2 − ġ2 (2πv_F + g4)] / [(2πv_F + g4)² − g2²]`.
pub fn cd_amplitude_contact(g2: f64, g4: f64, dg2_dt: f64, dg4_dt: f64, v_f: f64) -> Result<f64> {
    let forward = TWO_PI * v_f + g4;
    let denom = forward * forward - g2 * g2;
    if !(denom > 0.0 && forward > 0.0) {
        return Err(Error::luttinger(format!(
            "(2πv_F + g4)² − g2² = {denom} is not positive"
        )));
    }
    Ok(0.5 * (dg4_dt * g2 - dg2_dt * forward) / denom)
}

/// CD amplitude of the Lorentzian family `g2 = g4 = λ exp(−R0|p|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianAmplitude {
    /// First order in `R0|p|`.
    pub linearized: f64,
    /// `−ġ24 / [4(πv_F + g24)]`.
    pub exact: f64,
}

pub fn cd_amplitude_lorentzian(
    lambda: f64,
    dlambda_dt: f64,
    r0: f64,
    p: f64,
    v_f: f64,
) -> Result<LorentzianAmplitude> {
    let base = PI * v_f + lambda;
    if !(base > 0.0) {
        return Err(Error::contract(format!("πv_F + λ = {base} must be positive")));
    }
    let p = p.abs();
    if r0 * p > 0.3 {
        log::warn!("R0|p| = {:.3} is outside the small-range regime of the linearized amplitude", r0 * p);
    }
    let linearized = -0.25 * dlambda_dt * (1.0 / base - r0 * PI * v_f * p / (base * base));
    let decay = (-r0 * p).exp();
    let exact = -0.25 * dlambda_dt * decay / (PI * v_f + lambda * decay);
    Ok(LorentzianAmplitude { linearized, exact })
}

/// Coefficients of the invariant-built controlled Hamiltonian for one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlledCoefficients {
    pub omega_cd: f64,
    pub g_cd: f64,
    /// `γ̇_p/γ_p = K̇_p/(2K_p)`.
    pub chi: f64,
    /// `γ_p = sqrt(K_p)`.
    pub gamma: f64,
    /// `σ_t² = v_F/v_{s,p}`.
    pub sigma_sq: f64,
    /// `ω₀p = v_F |p|`.
    pub omega0: f64,
}

/// Builds `ω_CD`, `g_CD` from `γ_p`, `σ_t` and `ω₀p`; they coincide with the
/// reference `(ω, g)` of the same `(p, t)`.
pub fn controlled_coefficients(p: f64, t: f64, protocol: &DriveProtocol) -> Result<ControlledCoefficients> {
    let lp = protocol.luttinger(p, t)?;
    let gamma = lp.k.sqrt();
    let sigma_sq = protocol.v_f / lp.v_s;
    let omega0 = protocol.v_f * p.abs();
    let squeezed = gamma * gamma / sigma_sq;
    let stretched = 1.0 / (sigma_sq * gamma * gamma);
    Ok(ControlledCoefficients {
        omega_cd: 0.5 * omega0 * (squeezed + stretched),
        g_cd: 0.5 * omega0 * (stretched - squeezed),
        chi: protocol.chi(p, t)?,
        gamma,
        sigma_sq,
        omega0,
    })
}

/// `ε = sqrt(v_s²p² − χ²)`, the spectrum of the controlled pair.
pub fn spectrum_with_cd(v_s: f64, p: f64, chi: f64) -> Result<f64> {
    let vp = v_s * p.abs();
    if !(vp > chi.abs()) {
        return Err(Error::cd(format!("v_s|p| = {vp} does not exceed |χ| = {}", chi.abs())));
    }
    Ok(((vp - chi) * (vp + chi)).sqrt())
}

/// `t_f > L |g24(t_f)| max𝒫̇ / (2πv_F)²`, the sufficient speed bound for
/// `g2 = g4 = g24` ramps starting from zero.
pub fn closed_form_tf_bound(g24_end: f64, max_rate: f64, length: f64, v_f: f64) -> f64 {
    length * (g24_end * max_rate).abs() / (TWO_PI * v_f).powi(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityMargin {
    /// `min_{t,p} (v_{s,p}(t)|p| − |χ_p(t)|)`.
    pub worst_margin: f64,
    pub worst_time: f64,
    pub worst_momentum: f64,
    pub pass: bool,
    /// Shortest `t_f` for which the same schedule stays stable.
    pub t_min: f64,
    /// Only for contact ramps with `g2 = g4` starting at zero.
    pub closed_form_bound: Option<f64>,
}

/// Evaluates `|χ_p(t)| < v_{s,p}(t)|p|` on a dense time grid.
pub fn stability_margin(protocol: &DriveProtocol, points: usize) -> Result<StabilityMargin> {
    protocol.validate_parameters()?;
    let mut worst = (f64::INFINITY, 0.0, protocol.momentum(1));
    let mut worst_ratio = 0.0f64;
    for t in protocol.time_grid(points.max(2)) {
        for p in protocol.critical_modes() {
            let lp = protocol.luttinger(p, t)?;
            let chi = protocol.chi(p, t)?;
            let vp = lp.v_s * p;
            let margin = vp - chi.abs();
            if margin < worst.0 {
                worst = (margin, t, p);
            }
            worst_ratio = worst_ratio.max(chi.abs() / vp);
        }
    }
    let c = &protocol.coupling;
    let closed_form_bound = (c.family == CouplingFamily::Contact
        && c.g2_start == 0.0
        && c.g4_start == 0.0
        && c.g2_end == c.g4_end)
        .then(|| closed_form_tf_bound(c.g2_end, protocol.schedule.max_rate(), protocol.length, protocol.v_f));
    Ok(StabilityMargin {
        worst_margin: worst.0,
        worst_time: worst.1,
        worst_momentum: worst.2,
        pass: worst.0 > 0.0,
        t_min: protocol.t_f * worst_ratio,
        closed_form_bound,
    })
}

/// `|v̇_{s,p}/(v_{s,p}² |p|)|`.
pub fn adiabaticity_parameter(protocol: &DriveProtocol, p: f64, t: f64) -> Result<f64> {
    let c = protocol.couplings(p, t);
    let lp = protocol.luttinger(p, t)?;
    let a = protocol.v_f + c.g4 / TWO_PI;
    let dv = (a * c.dg4_dt - c.g2 * c.dg2_dt / TWO_PI) / (TWO_PI * lp.v_s);
    Ok((dv / (lp.v_s * lp.v_s * p.abs())).abs())
}

/// Range of ramp times for which CD is both stable and needed.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedWindow {
    pub t_min: f64,
    /// Shortest `t_f` whose largest adiabaticity parameter is below `threshold`.
    pub t_adiabatic: f64,
    /// Largest adiabaticity parameter at the protocol's own `t_f`.
    pub max_adiabaticity: f64,
    pub threshold: f64,
}

/// Both ends scale as `1/t_f` for a fixed schedule, so one pass at the
/// configured `t_f` fixes the window.
pub fn speed_window(protocol: &DriveProtocol, points: usize, threshold: f64) -> Result<SpeedWindow> {
    if !(threshold > 0.0) {
        return Err(Error::contract("adiabatic threshold must be positive"));
    }
    let stability = stability_margin(protocol, points)?;
    let mut max_adiabaticity = 0.0f64;
    for t in protocol.time_grid(points.max(2)) {
        for p in protocol.critical_modes() {
            max_adiabaticity = max_adiabaticity.max(adiabaticity_parameter(protocol, p, t)?);
        }
    }
    Ok(SpeedWindow {
        t_min: stability.t_min,
        t_adiabatic: protocol.t_f * max_adiabaticity / threshold,
        max_adiabaticity,
        threshold,
    })
}

pub fn default_speed_window(protocol: &DriveProtocol) -> Result<SpeedWindow> {
    speed_window(protocol, DEFAULT_STABILITY_POINTS, DEFAULT_ADIABATIC_THRESHOLD)
}

/// `(Δ₁, Δ₂)` of the Lorentzian CD term in real space.
pub fn delta_coefficients(lambda: f64, dlambda_dt: f64, r0: f64, v_f: f64) -> Result<(f64, f64)> {
    let base = PI * v_f + lambda;
    if !(base > 0.0) {
        return Err(Error::contract(format!("πv_F + λ = {base} must be positive")));
    }
    let delta1 = -0.25 * PI * dlambda_dt / base;
    let delta2 = 0.25 * dlambda_dt * r0 * PI * v_f / (base * base);
    Ok((delta1, delta2))
}

/// Gauge-field strength `ν` realising the `Δ₂` term, `Δ₂ = −(v_s/K) L² ν`,
/// with `v_s/K ≈ 2(πv_F + λ)`:
///
/// `ν = −R0 λ̇ πv_F / [8 L² (πv_F + λ)³]`.
pub fn gauge_field_amplitude(lambda: f64, dlambda_dt: f64, r0: f64, v_f: f64, length: f64) -> Result<f64> {
    if !(length > 0.0) {
        return Err(Error::contract("L must be positive"));
    }
    let (_, delta2) = delta_coefficients(lambda, dlambda_dt, r0, v_f)?;
    Ok(-delta2 / (2.0 * (PI * v_f + lambda) * length * length))
}

/// `ν` from `Δ₂ = −(v_s/K) L² ν` with the exact `v_s/K = v_F + λ/π` of `g2 = g4 = λ`.
pub fn gauge_field_amplitude_exact(lambda: f64, dlambda_dt: f64, r0: f64, v_f: f64, length: f64) -> Result<f64> {
    if !(length > 0.0) {
        return Err(Error::contract("L must be positive"));
    }
    let (_, delta2) = delta_coefficients(lambda, dlambda_dt, r0, v_f)?;
    let velocity_ratio = v_f + lambda / PI;
    Ok(-delta2 / (velocity_ratio * length * length))
}

/// Shape of the antisymmetric density-density kernel of the CD term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    /// `πχ (x′ − x)/L`.
    Contact { chi: f64 },
    /// `Δ₁ (x′ − x)/L + Δ₂/(x − x′)`.
    Lorentzian { delta1: f64, delta2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelValue {
    Finite(f64),
    /// The `1/(x − x′)` pole; the sign is that of `Δ₂` approached from `x > x′`.
    Singular { sign: f64 },
}

impl KernelValue {
    pub fn value(&self) -> f64 {
        match *self {
            KernelValue::Finite(v) => v,
            KernelValue::Singular { sign } => sign * f64::INFINITY,
        }
    }
}

/// Kernel multiplying `ρ₁(x)ρ₋₁(x′) − ρ₁(x′)ρ₋₁(x)`.
///
/// Contact convention: the prefactor is `π K̇/(2K) = πχ`, i.e. the kernel is
/// `πχ (x′ − x)/L` with `χ` the per-pair amplitude.
pub fn realspace_cd_kernel(x: f64, x_prime: f64, length: f64, family: KernelFamily) -> Result<KernelValue> {
    if !(length > 0.0) {
        return Err(Error::contract("L must be positive"));
    }
    let inside = |y: f64| (0.0..=length).contains(&y);
    if !(inside(x) && inside(x_prime)) {
        return Err(Error::contract(format!("positions ({x}, {x_prime}) outside [0, {length}]")));
    }
    let linear = (x_prime - x) / length;
    Ok(match family {
        KernelFamily::Contact { chi } => KernelValue::Finite(PI * chi * linear),
        KernelFamily::Lorentzian { delta1, delta2 } => {
            if x == x_prime {
                if delta2 == 0.0 {
                    KernelValue::Finite(0.0)
                } else {
                    KernelValue::Singular { sign: delta2.signum() }
                }
            } else {
                KernelValue::Finite(delta1 * linear + delta2 / (x - x_prime))
            }
        }
    })
}
