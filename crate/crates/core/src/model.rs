//! Tomonaga–Luttinger model parameters for a single momentum pair.
//!
//! Natural units throughout: `ħ = 1`, momenta in units of `1/length`,
//! couplings `g2`, `g4` in units of velocity (the same units as `v_F`).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LuttingerParams {
    /// Luttinger parameter `K`.
    pub k: f64,
    /// Sound velocity `v_s`.
    pub v_s: f64,
}

/// `K` and `v_s` for couplings `g2`, `g4` at Fermi velocity `v_f`.
pub fn luttinger_params(g2: f64, g4: f64, v_f: f64) -> Result<LuttingerParams> {
    let forward = TWO_PI * v_f + g4;
    if !(forward > g2.abs()) {
        return Err(Error::luttinger(format!(
            "2πv_F + g4 = {forward} does not exceed |g2| = {}",
            g2.abs()
        )));
    }
    let k = ((forward - g2) / (forward + g2)).sqrt();
    let a = v_f + g4 / TWO_PI;
    let b = g2 / TWO_PI;
    let v_s = ((a - b) * (a + b)).sqrt();
    Ok(LuttingerParams { k, v_s })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingFamily {
    /// Momentum-independent `g_{2/4}(p,t) = g̃_{2/4}(t)`.
    Contact,
    /// `g_{2/4}(p,t) = g̃_{2/4}(t) exp(−R0 |p|)`.
    Lorentzian,
    /// Endpoint couplings tabulated in `p`, linear in `p`, clamped at the edges.
    CustomTable,
}

/// One row of a tabulated coupling profile: the endpoint couplings at momentum `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub p: f64,
    pub g2: f64,
    pub g4: f64,
}

/// Interaction family together with its start and end couplings.
///
/// For `CustomTable` the end couplings come from `table` and the scalar
/// `g2_end`, `g4_end` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpec {
    pub family: CouplingFamily,
    pub g2_start: f64,
    pub g2_end: f64,
    pub g4_start: f64,
    pub g4_end: f64,
    pub r0: f64,
    pub table: Vec<TableRow>,
}

/// Couplings and their time derivatives at one `(p, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    pub g2: f64,
    pub g4: f64,
    pub dg2_dt: f64,
    pub dg4_dt: f64,
}

impl CouplingSpec {
    pub fn contact(g2_start: f64, g2_end: f64, g4_start: f64, g4_end: f64) -> Self {
        CouplingSpec {
            family: CouplingFamily::Contact,
            g2_start,
            g2_end,
            g4_start,
            g4_end,
            r0: 0.0,
            table: Vec::new(),
        }
    }

    pub fn lorentzian(lambda_start: f64, lambda_end: f64, r0: f64) -> Self {
        CouplingSpec {
            family: CouplingFamily::Lorentzian,
            g2_start: lambda_start,
            g2_end: lambda_end,
            g4_start: lambda_start,
            g4_end: lambda_end,
            r0,
            table: Vec::new(),
        }
    }

    pub fn custom_table(g2_start: f64, g4_start: f64, mut table: Vec<TableRow>) -> Self {
        table.sort_by(|a, b| a.p.total_cmp(&b.p));
        CouplingSpec {
            family: CouplingFamily::CustomTable,
            g2_start,
            g2_end: f64::NAN,
            g4_start,
            g4_end: f64::NAN,
            r0: 0.0,
            table,
        }
    }

    pub fn is_static(&self) -> bool {
        match self.family {
            CouplingFamily::CustomTable => self
                .table
                .iter()
                .all(|row| row.g2 == self.g2_start && row.g4 == self.g4_start),
            _ => self.g2_start == self.g2_end && self.g4_start == self.g4_end,
        }
    }

    /// Shape checks that do not depend on the schedule or the mode grid.
    pub fn validate_shape(&self) -> Result<()> {
        let finite = [self.g2_start, self.g4_start, self.r0].iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::contract("couplings must be finite"));
        }
        match self.family {
            CouplingFamily::Contact => {}
            CouplingFamily::Lorentzian => {
                if !(self.r0 > 0.0) {
                    return Err(Error::contract(format!(
                        "lorentzian family requires R0 > 0, got {}",
                        self.r0
                    )));
                }
            }
            CouplingFamily::CustomTable => {
                if self.table.is_empty() {
                    return Err(Error::contract("custom_table family requires at least one row"));
                }
                if self.table.windows(2).any(|w| !(w[1].p > w[0].p)) {
                    return Err(Error::contract("custom_table momenta must be strictly increasing"));
                }
                if self.table.iter().any(|r| !(r.p.is_finite() && r.g2.is_finite() && r.g4.is_finite())) {
                    return Err(Error::contract("custom_table entries must be finite"));
                }
            }
        }
        if self.family != CouplingFamily::CustomTable
            && !(self.g2_end.is_finite() && self.g4_end.is_finite())
        {
            return Err(Error::contract("end couplings must be finite"));
        }
        Ok(())
    }

    fn end_couplings(&self, p: f64) -> (f64, f64) {
        match self.family {
            CouplingFamily::Contact => (self.g2_end, self.g4_end),
            CouplingFamily::Lorentzian => {
                let decay = (-self.r0 * p.abs()).exp();
                (self.g2_end * decay, self.g4_end * decay)
            }
            CouplingFamily::CustomTable => interpolate_table(&self.table, p.abs()),
        }
    }

    fn start_couplings(&self, p: f64) -> (f64, f64) {
        match self.family {
            CouplingFamily::Lorentzian => {
                let decay = (-self.r0 * p.abs()).exp();
                (self.g2_start * decay, self.g4_start * decay)
            }
            _ => (self.g2_start, self.g4_start),
        }
    }

    /// Couplings at momentum `p` for schedule progress `progress = 𝒫(t/t_f)`
    /// advancing at `progress_rate = d𝒫/dt`.
    pub fn couplings(&self, p: f64, progress: f64, progress_rate: f64) -> Couplings {
        let (g2_0, g4_0) = self.start_couplings(p);
        let (g2_1, g4_1) = self.end_couplings(p);
        Couplings {
            g2: g2_0 + (g2_1 - g2_0) * progress,
            g4: g4_0 + (g4_1 - g4_0) * progress,
            dg2_dt: (g2_1 - g2_0) * progress_rate,
            dg4_dt: (g4_1 - g4_0) * progress_rate,
        }
    }
}

fn interpolate_table(table: &[TableRow], p: f64) -> (f64, f64) {
    let first = table[0];
    let last = table[table.len() - 1];
    if p <= first.p {
        return (first.g2, first.g4);
    }
    if p >= last.p {
        return (last.g2, last.g4);
    }
    let i = table.partition_point(|row| row.p <= p);
    let (lo, hi) = (table[i - 1], table[i]);
    let w = (p - lo.p) / (hi.p - lo.p);
    (lo.g2 + w * (hi.g2 - lo.g2), lo.g4 + w * (hi.g4 - lo.g4))
}

/// Coefficients of one pair's generator `2ωK₀ + g(K₊ + K₋) + iχ(K₊ − K₋)`.
///
/// `χ = K̇_p/(2K_p)` is the counterdiabatic amplitude and is zero when the
/// control is off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCoefficients {
    pub omega: f64,
    pub g: f64,
    pub chi: f64,
}

/// `ω = |p| [v_F + g4/2π]`, `g = |p| g2/2π`.
pub fn pair_frequencies(p: f64, g2: f64, g4: f64, v_f: f64) -> (f64, f64) {
    let p = p.abs();
    (p * (v_f + g4 / TWO_PI), p * g2 / TWO_PI)
}

fn check_pair_stability(omega: f64, g: f64) -> Result<()> {
    if !(omega > g.abs()) {
        return Err(Error::luttinger(format!("|g| = {} is not below ω = {omega}", g.abs())));
    }
    Ok(())
}

/// Diagonalizing angle `η` with `tanh 2η = −g/ω`.
pub fn bogoliubov_angle(omega: f64, g: f64) -> Result<f64> {
    check_pair_stability(omega, g)?;
    Ok(-0.5 * (g / omega).atanh())
}

/// `ε = sqrt(ω² − g²)`.
pub fn instantaneous_spectrum(omega: f64, g: f64) -> Result<f64> {
    check_pair_stability(omega, g)?;
    Ok(((omega - g) * (omega + g)).sqrt())
}

/// `E₀ = Σ_{pairs} (ε − ω)`, one term per unordered `(p, −p)` pair.
///
/// For contact couplings the sum grows linearly with the number of pairs; it
/// only converges when `ε → ω` at large momenta.
pub fn ground_state_energy<I>(pairs: I) -> Result<f64>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    pairs
        .into_iter()
        .map(|(omega, g)| instantaneous_spectrum(omega, g).map(|eps| eps - omega))
        .sum()
}

/// Effective oscillator of one pair: `H = P P†/2M + M Ω² X X†/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassFrequency {
    pub mass: f64,
    pub frequency: f64,
}

/// `Ω = v_{s,p}|p|`, `M = ω₀p / (K_p v_{s,p} |p|)` with `ω₀p = v_F |p|`.
pub fn mass_frequency(p: f64, k_p: f64, v_sp: f64, v_f: f64) -> Result<MassFrequency> {
    if !(p != 0.0 && k_p > 0.0 && v_sp > 0.0 && v_f > 0.0) {
        return Err(Error::contract("mass_frequency needs p ≠ 0 and positive K, v_s, v_F"));
    }
    let p = p.abs();
    let frequency = v_sp * p;
    Ok(MassFrequency {
        mass: v_f * p / (k_p * frequency),
        frequency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn luttinger_free_and_ramp_endpoint() {
        let lp = luttinger_params(0.0, 0.0, 1.0).unwrap();
        assert_eq!(lp.k, 1.0);
        assert_eq!(lp.v_s, 1.0);

        let lp = luttinger_params(1.0, 0.5, 1.0).unwrap();
        let k_direct = ((TWO_PI - 0.5) / (TWO_PI + 1.5)).sqrt();
        assert_abs_diff_eq!(lp.k, k_direct, epsilon = 1e-15);
        assert_abs_diff_eq!(lp.k, 0.8620, epsilon = 1e-4);
        assert_abs_diff_eq!(lp.v_s, 1.0678, epsilon = 1e-4);
    }

    #[test]
    fn luttinger_domain_error() {
        let err = luttinger_params(10.0, 0.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("luttinger-instability"));
        assert!(luttinger_params(-TWO_PI, 0.0, 1.0).is_err());
    }

    #[test]
    fn pair_frequency_examples() {
        assert_eq!(pair_frequencies(0.7, 0.0, 0.0, 1.0), (0.7, 0.0));
        let (w, g) = pair_frequencies(1.0, 1.0, 0.5, 1.0);
        assert_abs_diff_eq!(w, 1.07958, epsilon = 1e-5);
        assert_abs_diff_eq!(g, 0.15915, epsilon = 1e-5);

        let spec = CouplingSpec::lorentzian(0.0, 1.0, 1.0);
        let c = spec.couplings(1.0, 1.0, 0.0);
        assert_abs_diff_eq!(c.g2, (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(c.g2, 0.36788, epsilon = 1e-5);
    }

    #[test]
    fn custom_table_interpolates_and_clamps() {
        let spec = CouplingSpec::custom_table(
            0.0,
            0.0,
            vec![
                TableRow { p: 2.0, g2: 0.0, g4: 1.0 },
                TableRow { p: 1.0, g2: 1.0, g4: 0.0 },
            ],
        );
        spec.validate_shape().unwrap();
        let mid = spec.couplings(1.5, 1.0, 0.0);
        assert_abs_diff_eq!(mid.g2, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(mid.g4, 0.5, epsilon = 1e-15);
        assert_eq!(spec.couplings(0.1, 1.0, 0.0).g2, 1.0);
        assert_eq!(spec.couplings(9.0, 1.0, 0.0).g4, 1.0);
        let half = spec.couplings(0.1, 0.5, 2.0);
        assert_eq!((half.g2, half.dg2_dt), (0.5, 2.0));
    }

    #[test]
    fn lorentzian_needs_positive_range() {
        assert!(CouplingSpec::lorentzian(0.0, 1.0, 0.0).validate_shape().is_err());
        assert!(CouplingSpec::custom_table(0.0, 0.0, vec![]).validate_shape().is_err());
    }

    #[test]
    fn angle_and_spectrum() {
        assert_eq!(bogoliubov_angle(1.0, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(bogoliubov_angle(2.0, 1.0).unwrap(), -0.27465, epsilon = 1e-5);
        assert!(bogoliubov_angle(1.0, 1.0).is_err());
        assert!(bogoliubov_angle(1.0, -1.2).is_err());
        assert!(bogoliubov_angle(1.0, 1.0 - 1e-12).is_ok());

        assert_eq!(instantaneous_spectrum(1.3, 0.0).unwrap(), 1.3);
        assert_abs_diff_eq!(instantaneous_spectrum(2.0, 1.0).unwrap(), 3f64.sqrt(), epsilon = 1e-15);
        let eps = instantaneous_spectrum(1.07958, 0.15915).unwrap();
        assert_abs_diff_eq!(eps, 1.06778, epsilon = 1e-5);
    }

    #[test]
    fn ground_energy_examples() {
        assert_eq!(ground_state_energy([(1.0, 0.0), (2.0, 0.0)]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            ground_state_energy([(2.0, 1.0)]).unwrap(),
            3f64.sqrt() - 2.0,
            epsilon = 1e-15
        );
        assert!(ground_state_energy([(2.0, 1.0), (1.0, 1.5)]).is_err());
    }

    #[test]
    fn contact_ground_energy_tail_grows_with_cutoff() {
        let energy = |n: usize| {
            ground_state_energy((1..=n).map(|j| {
                pair_frequencies(TWO_PI * j as f64 / 100.0, 1.0, 0.5, 1.0)
            }))
            .unwrap()
        };
        let (e64, e128) = (energy(64), energy(128));
        // each pair contributes (v_s − ω/p) p, so doubling the cutoff roughly quadruples E₀
        let per_p = luttinger_params(1.0, 0.5, 1.0).unwrap().v_s - (1.0 + 0.5 / TWO_PI);
        let expected = |n: usize| per_p * TWO_PI / 100.0 * (n * (n + 1) / 2) as f64;
        assert_abs_diff_eq!(e64, expected(64), epsilon = 1e-10);
        assert_abs_diff_eq!(e128, expected(128), epsilon = 1e-10);
        assert!(e128 / e64 > 3.9);
    }

    #[test]
    fn mass_frequency_examples() {
        let mf = mass_frequency(0.3, 1.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(mf.mass, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mf.frequency, 0.3, epsilon = 1e-15);
        let mf = mass_frequency(1.0, 0.8620, 1.0678, 1.0).unwrap();
        assert_abs_diff_eq!(mf.mass, 1.0864, epsilon = 1e-4);
        assert!(mass_frequency(1.0, 0.0, 1.0, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn equal_couplings_give_unit_velocity_product(g in -3.1f64..10.0) {
            let lp = luttinger_params(g, g, 1.0).unwrap();
            prop_assert!((lp.v_s * lp.k - 1.0).abs() < 1e-12);
            let (w, gp) = pair_frequencies(0.37, g, g, 1.0);
            let mf = mass_frequency(0.37, lp.k, lp.v_s, 1.0).unwrap();
            prop_assert!((mf.mass - 1.0).abs() < 1e-12);
            let eps = instantaneous_spectrum(w, gp).unwrap();
            prop_assert!((eps - lp.v_s * 0.37).abs() < 1e-10);
        }

        #[test]
        fn velocity_products(g2 in -3.0f64..3.0, g4 in -2.0f64..8.0, v_f in 0.5f64..2.0, p in 0.01f64..10.0) {
            prop_assume!(TWO_PI * v_f + g4 > g2.abs() + 1e-3);
            let lp = luttinger_params(g2, g4, v_f).unwrap();
            prop_assert!((lp.v_s * lp.k - (v_f + (g4 - g2) / TWO_PI)).abs() < 1e-12);
            prop_assert!((lp.v_s / lp.k - (v_f + (g4 + g2) / TWO_PI)).abs() < 1e-12);
            let (w, g) = pair_frequencies(p, g2, g4, v_f);
            let eps = instantaneous_spectrum(w, g).unwrap();
            prop_assert!((eps - lp.v_s * p).abs() < 1e-10 * (1.0 + eps));
        }
    }
}
