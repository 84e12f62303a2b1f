//! Cold-gas parameters and the dimensional speed estimate.

use crate::error::CliError;

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Gas parameters in the units they are usually quoted in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasParameters {
    pub a_s_nm: f64,
    pub mass_kg: f64,
    /// `ω⊥/2π`.
    pub trap_frequency_hz: f64,
    pub density_per_um: f64,
}

impl GasParameters {
    pub fn sound_velocity(&self) -> Result<f64, CliError> {
        experimental_sound_velocity(
            self.a_s_nm * 1e-9,
            self.mass_kg,
            std::f64::consts::TAU * self.trap_frequency_hz,
            self.density_per_um * 1e6,
        )
    }
}

/// `v_s = sqrt(g_1D n_1D / m)` in μm/ms, with
/// `g_1D = ħ ω⊥ a_s (2 + 3 a_s n_1D)/(1 + 2 a_s n_1D)`.
///
/// Inputs in SI: `a_s` in m, `m` in kg, `omega_perp` in rad/s, `n_1d` in 1/m.
pub fn experimental_sound_velocity(a_s: f64, m: f64, omega_perp: f64, n_1d: f64) -> Result<f64, CliError> {
    if !(a_s > 0.0 && m > 0.0 && omega_perp > 0.0 && n_1d > 0.0) {
        return Err(CliError::Config("gas parameters must all be positive".into()));
    }
    let an = a_s * n_1d;
    let g_1d = HBAR * omega_perp * a_s * (2.0 + 3.0 * an) / (1.0 + 2.0 * an);
    // m/s → μm/ms
    Ok((g_1d * n_1d / m).sqrt() * 1e3)
}

/// Dimensional window `[L/(2π v_s), factor · L/(2π v_s)]` in the units of `L/v_s`.
pub fn dimensional_window(length: f64, v_s: f64, factor: f64) -> (f64, f64) {
    let t_min = length / (std::f64::consts::TAU * v_s);
    (t_min, factor * t_min)
}
