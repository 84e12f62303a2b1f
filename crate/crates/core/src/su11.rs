//! SU(1,1) algebra of a single `(p, −p)` momentum pair.
//!
//! A [`BogoliubovMap`] `(u, v)` stands for the linear canonical map
//!
//! ```text
//! a(p)      = u  b(p) + v  b†(−p)
//! a†(−p)    = v* b(p) + u* b†(−p)
//! ```
//!
//! with `|u|² − |v|² = 1`. The same pair also labels a two-mode squeezed
//! vacuum: the state annihilated by `a(p)` (and by its partner `a(−p)`).
//! In the diagonal Fock sector that state is
//!
//! ```text
//! |ψ⟩ ∝ Σ_n (−v/u)ⁿ |n, n⟩
//! ```
//!
//! The squeeze `exp{η (K₊ − K₋)}` maps to `(cosh η, −sinh η)`, so the
//! instantaneous ground state of `2ωK₀ + g(K₊ + K₋)` is
//! `squeeze_from_angle(η)` with `tanh 2η = −g/ω`.
//!
//! Maps compose like the 2×2 matrices `[[u, v], [v*, u*]]`. Both the map and the
//! state are only defined up to a common phase of `(u, v)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Invariant drift that triggers a warning.
pub const INVARIANT_WARN: f64 = 1e-9;
/// Invariant drift that is rejected.
pub const INVARIANT_FAIL: f64 = 1e-6;

/// `cosh²` overflows just above this squeeze angle.
const MAX_SQUEEZE_ANGLE: f64 = 354.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovMap {
    u: Complex64,
    v: Complex64,
}

impl BogoliubovMap {
    pub const IDENTITY: BogoliubovMap = BogoliubovMap {
        u: Complex64::new(1.0, 0.0),
        v: Complex64::new(0.0, 0.0),
    };

    /// Checked constructor. Drift above [`INVARIANT_FAIL`] is an error; drift
    /// above [`INVARIANT_WARN`] is logged. The pair is never renormalized.
    pub fn new(u: Complex64, v: Complex64) -> Result<Self> {
        let map = BogoliubovMap { u, v };
        map.check()?;
        Ok(map)
    }

    /// Wraps raw coefficients without checking the invariant.
    pub fn from_parts_unchecked(u: Complex64, v: Complex64) -> Self {
        BogoliubovMap { u, v }
    }

    pub fn identity() -> Self {
        Self::IDENTITY
    }

    pub fn u(&self) -> Complex64 {
        self.u
    }

    pub fn v(&self) -> Complex64 {
        self.v
    }

    /// Relative drift `||u|² − |v|² − 1| / |u|²`.
    pub fn invariant_defect(&self) -> f64 {
        let uu = self.u.norm_sqr();
        if !uu.is_finite() || uu == 0.0 {
            return f64::INFINITY;
        }
        (uu - self.v.norm_sqr() - 1.0).abs() / uu
    }

    pub fn check(&self) -> Result<()> {
        let defect = self.invariant_defect();
        if !(defect <= INVARIANT_FAIL) {
            return Err(Error::contract(format!(
                "Bogoliubov invariant |u|²-|v|²=1 violated (relative drift {defect:.3e})"
            )));
        }
        if defect > INVARIANT_WARN {
            log::warn!("Bogoliubov invariant drift {defect:.3e} above {INVARIANT_WARN:e}");
        }
        Ok(())
    }

    /// `(u*, −v)`.
    pub fn inverse(&self) -> Self {
        BogoliubovMap {
            u: self.u.conj(),
            v: -self.v,
        }
    }

    /// Ratio `−v/u`: the geometric factor of the Fock amplitudes `c_n ∝ rⁿ`.
    pub fn fock_ratio(&self) -> Complex64 {
        -self.v / self.u
    }
}

impl Default for BogoliubovMap {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// `(cosh η, −sinh η)`, the map of `exp{η (K₊ − K₋)}`.
pub fn squeeze_from_angle(eta: f64) -> Result<BogoliubovMap> {
    if !eta.is_finite() {
        return Err(Error::contract(format!("squeeze angle must be finite, got {eta}")));
    }
    if eta.abs() > MAX_SQUEEZE_ANGLE {
        return Err(Error::Range(format!(
            "squeeze angle {eta} overflows cosh²; |η| must stay below {MAX_SQUEEZE_ANGLE}"
        )));
    }
    Ok(BogoliubovMap {
        u: Complex64::new(eta.cosh(), 0.0),
        v: Complex64::new(-eta.sinh(), 0.0),
    })
}

/// Squeeze `Q(γ) = exp{ln γ (K₊ − K₋)}` per pair, i.e. angle `ln γ`.
pub fn squeeze_from_gamma(gamma: f64) -> Result<BogoliubovMap> {
    if !(gamma > 0.0) {
        return Err(Error::contract(format!("γ must be positive, got {gamma}")));
    }
    squeeze_from_angle(gamma.ln())
}

/// `outer ∘ inner`: apply `inner` first.
pub fn compose(outer: &BogoliubovMap, inner: &BogoliubovMap) -> Result<BogoliubovMap> {
    outer.check()?;
    inner.check()?;
    Ok(compose_unchecked(outer, inner))
}

pub(crate) fn compose_unchecked(outer: &BogoliubovMap, inner: &BogoliubovMap) -> BogoliubovMap {
    BogoliubovMap {
        u: outer.u * inner.u + outer.v * inner.v.conj(),
        v: outer.u * inner.v + outer.v * inner.u.conj(),
    }
}

/// Expectations of the pair generators in a two-mode squeezed vacuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairObservables {
    /// `⟨b†(p) b(p)⟩ = |v|²`.
    pub occupation: f64,
    /// `⟨b(p) b(−p)⟩ = −u* v`.
    pub pair_correlator: Complex64,
    /// `⟨K₀⟩ = |v|² + 1/2`.
    pub k0_expectation: f64,
}

pub fn vacuum_observables(state: &BogoliubovMap) -> PairObservables {
    let n = state.v.norm_sqr();
    PairObservables {
        occupation: n,
        pair_correlator: -state.u.conj() * state.v,
        k0_expectation: n + 0.5,
    }
}

/// `|⟨ψ_a|ψ_b⟩| = 1 / |u_a* u_b − v_a* v_b|`.
pub fn state_overlap(a: &BogoliubovMap, b: &BogoliubovMap) -> f64 {
    let denom = (a.u.conj() * b.u - a.v.conj() * b.v).norm();
    (1.0 / denom).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn general_map(r: f64, th1: f64, th2: f64) -> BogoliubovMap {
        BogoliubovMap::new(
            Complex64::from_polar(r.cosh(), th1),
            Complex64::from_polar(r.sinh(), th2),
        )
        .unwrap()
    }

    #[test]
    fn squeeze_identity_and_values() {
        let m = squeeze_from_angle(0.0).unwrap();
        assert_eq!(m, BogoliubovMap::IDENTITY);

        let m = squeeze_from_angle(-0.27465).unwrap();
        assert_abs_diff_eq!(m.u().re, 1.03796, epsilon = 1e-5);
        assert_abs_diff_eq!(m.v().re, 0.27812, epsilon = 1e-5);
        assert!(m.invariant_defect() < 1e-15);

        let m = squeeze_from_angle(0.5).unwrap();
        assert_abs_diff_eq!((m.v() / m.u()).re, -0.46212, epsilon = 1e-5);
        assert_abs_diff_eq!((m.v() / m.u()).re, -(0.5f64).tanh(), epsilon = 1e-15);
    }

    #[test]
    fn squeeze_overflow_is_a_range_error() {
        assert!(matches!(squeeze_from_angle(400.0), Err(Error::Range(_))));
        assert!(matches!(squeeze_from_angle(-360.0), Err(Error::Range(_))));
        assert!(squeeze_from_angle(300.0).is_ok());
        assert!(matches!(squeeze_from_angle(f64::NAN), Err(Error::Contract(_))));
    }

    #[test]
    fn invalid_maps_are_rejected() {
        assert!(BogoliubovMap::new(c(1.0, 0.0), c(0.5, 0.0)).is_err());
        let bad = BogoliubovMap::from_parts_unchecked(c(2.0, 0.0), c(0.0, 0.0));
        assert!(compose(&bad, &BogoliubovMap::IDENTITY).is_err());
    }

    #[test]
    fn compose_identity_squeeze_additivity_and_inverse() {
        let m = general_map(0.8, 0.3, -1.1);
        assert_eq!(compose(&BogoliubovMap::IDENTITY, &m).unwrap(), m);
        assert_eq!(compose(&m, &BogoliubovMap::IDENTITY).unwrap(), m);

        let ab = compose(&squeeze_from_angle(0.3).unwrap(), &squeeze_from_angle(-0.75).unwrap())
            .unwrap();
        let sum = squeeze_from_angle(-0.45).unwrap();
        assert_abs_diff_eq!(ab.u().re, sum.u().re, epsilon = 1e-14);
        assert_abs_diff_eq!(ab.v().re, sum.v().re, epsilon = 1e-14);

        let id = compose(&m, &m.inverse()).unwrap();
        assert_abs_diff_eq!((id.u() - 1.0).norm(), 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(id.v().norm(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn observables_of_vacuum_and_squeeze() {
        let obs = vacuum_observables(&BogoliubovMap::IDENTITY);
        assert_eq!(obs.occupation, 0.0);
        assert_eq!(obs.pair_correlator, c(0.0, 0.0));
        assert_eq!(obs.k0_expectation, 0.5);

        let obs = vacuum_observables(&squeeze_from_angle(0.5).unwrap());
        assert_abs_diff_eq!(obs.occupation, 0.27154, epsilon = 1e-5);
        assert_abs_diff_eq!(obs.occupation, 0.5f64.sinh().powi(2), epsilon = 1e-15);
    }

    #[test]
    fn overlap_closed_forms() {
        let m = general_map(1.3, 0.4, 2.0);
        assert_abs_diff_eq!(state_overlap(&m, &m), 1.0, epsilon = 1e-12);
        let r = 0.9;
        assert_abs_diff_eq!(
            state_overlap(&BogoliubovMap::IDENTITY, &squeeze_from_angle(r).unwrap()),
            1.0 / r.cosh(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            state_overlap(&squeeze_from_angle(0.3).unwrap(), &squeeze_from_angle(0.7).unwrap()),
            1.0 / 0.4f64.cosh(),
            epsilon = 1e-14
        );
        // a global phase on (u, v) does not change the state
        let phased = BogoliubovMap::new(m.u() * c(0.0, 1.0), m.v() * c(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(state_overlap(&m, &phased), 1.0, epsilon = 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn compose_preserves_invariant(
            r1 in 0.0f64..2.5, a1 in -3.2f64..3.2, b1 in -3.2f64..3.2,
            r2 in 0.0f64..2.5, a2 in -3.2f64..3.2, b2 in -3.2f64..3.2,
        ) {
            let m = compose(&general_map(r1, a1, b1), &general_map(r2, a2, b2)).unwrap();
            prop_assert!(m.invariant_defect() < 1e-12);
        }

        #[test]
        fn correlator_identity(r in 0.0f64..3.0, a in -3.2f64..3.2, b in -3.2f64..3.2) {
            let obs = vacuum_observables(&general_map(r, a, b));
            let n = obs.occupation;
            let lhs = obs.pair_correlator.norm_sqr();
            prop_assert!((lhs - n * (n + 1.0)).abs() <= 1e-12 * (1.0 + n * n));
            prop_assert!((obs.k0_expectation - n - 0.5).abs() <= 1e-15 * (1.0 + n));
        }

        #[test]
        fn overlap_is_symmetric_and_bounded(
            r1 in 0.0f64..2.0, a1 in -3.2f64..3.2, b1 in -3.2f64..3.2,
            r2 in 0.0f64..2.0, a2 in -3.2f64..3.2, b2 in -3.2f64..3.2,
        ) {
            let x = general_map(r1, a1, b1);
            let y = general_map(r2, a2, b2);
            let f = state_overlap(&x, &y);
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!((f - state_overlap(&y, &x)).abs() < 1e-12);
        }
    }
}
