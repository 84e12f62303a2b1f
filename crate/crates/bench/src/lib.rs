//! Shared fixtures for the benchmarks.

use tll_cd::{CouplingSpec, DriveProtocol, Schedule};

/// Contact ramp `g2: 0 → 1`, `g4: 0 → 0.5` on a ring of length 100, run at
/// twice the closed-form speed bound.
pub fn reference_protocol(n_modes: usize) -> DriveProtocol {
    let t_f = 2.0 * tll_cd::closed_form_tf_bound(1.0, tll_cd::POLY5_MAX_RATE, 100.0, 1.0);
    DriveProtocol::new(CouplingSpec::contact(0.0, 1.0, 0.0, 0.5), Schedule::Poly5, t_f, 100.0, n_modes)
}
