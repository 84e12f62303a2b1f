//! Brute-force reference for one pair: the truncated sector `{|n,n⟩}`,
//! `n = 0..=n_max`, on which `K₀|n,n⟩ = (n + 1/2)|n,n⟩` and
//! `K₊|n,n⟩ = (n + 1)|n+1,n+1⟩`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrate::{integrate, Tolerances};
use crate::model::PairCoefficients;
use crate::protocol::DriveProtocol;
use crate::su11::BogoliubovMap;

pub const DEFAULT_N_MAX: usize = 120;
/// Largest trusted weight on the last level.
pub const TAIL_MASS_THRESHOLD: f64 = 1e-10;

pub fn fock_tolerances() -> Tolerances {
    Tolerances { rtol: 1e-11, atol: 1e-13 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    amplitudes: Vec<Complex64>,
}

impl FockState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::contract("Fock state needs n_max ≥ 1"));
        }
        Ok(FockState { amplitudes })
    }

    /// `|k,k⟩` in a space of cutoff `n_max`.
    pub fn number_state(k: usize, n_max: usize) -> Result<Self> {
        if k > n_max {
            return Err(Error::contract(format!("level {k} above n_max = {n_max}")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_max + 1];
        amplitudes[k] = Complex64::new(1.0, 0.0);
        FockState::new(amplitudes)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn tail_mass(&self) -> f64 {
        self.amplitudes[self.n_max()].norm_sqr()
    }

    pub fn is_cutoff_safe(&self) -> bool {
        self.tail_mass() < TAIL_MASS_THRESHOLD
    }

    /// `⟨b†(p) b(p)⟩ = Σ n |c_n|²`.
    pub fn mean_occupation(&self) -> f64 {
        self.amplitudes.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum()
    }

    /// `⟨b(p) b(−p)⟩ = Σ n c*_{n−1} c_n`.
    pub fn pair_correlator(&self) -> Complex64 {
        self.amplitudes
            .windows(2)
            .enumerate()
            .map(|(k, w)| (k + 1) as f64 * w[0].conj() * w[1])
            .sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockState) -> Result<Complex64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::contract("Fock states of different cutoff"));
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn overlap(&self, other: &FockState) -> Result<f64> {
        self.inner(other).map(|z| z.norm())
    }

    /// `⟨2ωK₀ + g(K₊ + K₋) + iχ(K₊ − K₋)⟩`.
    pub fn energy(&self, coeffs: &PairCoefficients) -> f64 {
        let h = pair_hamiltonian_matrix(coeffs, self.n_max());
        let hc = h.apply(&self.amplitudes);
        self.amplitudes.iter().zip(&hc).map(|(a, b)| (a.conj() * b).re).sum()
    }

    fn check_cutoff(self) -> Result<Self> {
        if self.is_cutoff_safe() {
            Ok(self)
        } else {
            Err(Error::CutoffUnsafe { tail_mass: self.tail_mass(), n_max: self.n_max() })
        }
    }
}

/// Hermitian tridiagonal matrix: `H_{n,n} = diag[n]`, `H_{n+1,n} = lower[n]`,
/// `H_{n,n+1} = lower[n]*`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    pub diag: Vec<f64>,
    pub lower: Vec<Complex64>,
}

/// Diagonal `2ω(n + 1/2)`, sub-diagonal `(g + iχ)(n + 1)`.
pub fn pair_hamiltonian_matrix(coeffs: &PairCoefficients, n_max: usize) -> TridiagonalMatrix {
    let alpha = Complex64::new(coeffs.g, coeffs.chi);
    TridiagonalMatrix {
        diag: (0..=n_max).map(|n| 2.0 * coeffs.omega * (n as f64 + 0.5)).collect(),
        lower: (0..n_max).map(|n| alpha * (n + 1) as f64).collect(),
    }
}

/// `K₀`, `K₊`, `K₋` in the truncated sector, as dense row-major matrices.
pub fn generator_matrices(n_max: usize) -> [Vec<Vec<f64>>; 3] {
    let dim = n_max + 1;
    let mut k0 = vec![vec![0.0; dim]; dim];
    let mut kp = vec![vec![0.0; dim]; dim];
    let mut km = vec![vec![0.0; dim]; dim];
    for n in 0..dim {
        k0[n][n] = n as f64 + 0.5;
        if n < n_max {
            kp[n + 1][n] = (n + 1) as f64;
            km[n][n + 1] = (n + 1) as f64;
        }
    }
    [k0, kp, km]
}

impl TridiagonalMatrix {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.lower[i].conj() * x[i + 1];
                }
                y
            })
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let n = self.dim();
        let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            m[i][i] = Complex64::new(self.diag[i], 0.0);
            if i + 1 < n {
                m[i + 1][i] = self.lower[i];
                m[i][i + 1] = self.lower[i].conj();
            }
        }
        m
    }

    /// Number of eigenvalues below `x` (Sturm count on the unitarily equivalent
    /// real matrix with off-diagonals `|lower[n]|`).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.dim() {
            let off = if i == 0 { 0.0 } else { self.lower[i - 1].norm_sqr() };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { off / q };
            if q == 0.0 {
                q = f64::EPSILON * (self.diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k` smallest eigenvalues in increasing order, by bisection.
    pub fn lowest_eigenvalues(&self, k: usize) -> Vec<f64> {
        let n = self.dim();
        let k = k.min(n);
        // Gershgorin interval
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let r = (if i > 0 { self.lower[i - 1].norm() } else { 0.0 })
                + (if i + 1 < n { self.lower[i].norm() } else { 0.0 });
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        let scale = lo.abs().max(hi.abs()).max(1.0);
        (0..k)
            .map(|j| {
                let (mut a, mut b) = (lo, hi);
                while b - a > 4.0 * f64::EPSILON * scale {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    if self.count_below(mid) > j {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                0.5 * (a + b)
            })
            .collect()
    }
}

/// `c_n = (tanh η)ⁿ / cosh η`: the state annihilated by `cosh η b − sinh η b†`,
/// i.e. the state of `squeeze_from_angle(η)`.
pub fn tmsv_amplitudes(eta: f64, n_max: usize) -> Result<FockState> {
    if !eta.is_finite() {
        return Err(Error::contract("squeeze angle must be finite"));
    }
    let r = eta.tanh();
    if !(r.abs() < 1.0) {
        return Err(Error::Range(format!("|tanh η| = 1 at η = {eta}")));
    }
    let c0 = 1.0 / eta.cosh();
    FockState::new(geometric(Complex64::new(c0, 0.0), Complex64::new(r, 0.0), n_max)?)?.check_cutoff()
}

/// Fock amplitudes `c_n = rⁿ/u`, `r = −v/u`, of the state annihilated by
/// `u b + v b†`.
pub fn gaussian_amplitudes(map: &BogoliubovMap, n_max: usize) -> Result<FockState> {
    map.check()?;
    FockState::new(geometric(1.0 / map.u(), map.fock_ratio(), n_max)?)?.check_cutoff()
}

fn geometric(c0: Complex64, r: Complex64, n_max: usize) -> Result<Vec<Complex64>> {
    if n_max < 1 {
        return Err(Error::contract("n_max must be at least 1"));
    }
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = c0;
    for _ in 0..=n_max {
        out.push(c);
        c *= r;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<FockState>,
    pub max_tail_mass: f64,
    pub max_norm_defect: f64,
}

impl FockTrajectory {
    pub fn cutoff_safe(&self) -> bool {
        self.max_tail_mass < TAIL_MASS_THRESHOLD
    }
}

/// Integrates `i ċ = H(t) c` for generator coefficients supplied by `coeffs`.
pub fn evolve_fock_with<F>(initial: &FockState, coeffs: F, times: &[f64], tol: Tolerances) -> Result<FockTrajectory>
where
    F: Fn(f64) -> Result<PairCoefficients>,
{
    let norm = initial.norm_sqr();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::contract(format!("initial Fock state has norm² {norm}")));
    }
    let dim = initial.amplitudes.len();
    let y0: Vec<f64> = initial.amplitudes.iter().flat_map(|c| [c.re, c.im]).collect();
    let mut failure: Option<Error> = None;
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let c = match coeffs(t) {
            Ok(c) => c,
            Err(e) => {
                failure.get_or_insert(e);
                dy.fill(f64::NAN);
                return;
            }
        };
        let alpha = Complex64::new(c.g, c.chi);
        let amp = |n: usize| Complex64::new(y[2 * n], y[2 * n + 1]);
        for n in 0..dim {
            let mut h = 2.0 * c.omega * (n as f64 + 0.5) * amp(n);
            if n > 0 {
                h += alpha * n as f64 * amp(n - 1);
            }
            if n + 1 < dim {
                h += alpha.conj() * (n + 1) as f64 * amp(n + 1);
            }
            // ċ = −i H c
            dy[2 * n] = h.im;
            dy[2 * n + 1] = -h.re;
        }
    };
    let t0 = times.first().copied().unwrap_or(0.0);
    let outcome = integrate(rhs, t0, &y0, times, tol);
    if let Some(e) = failure {
        return Err(e);
    }
    let (raw, _) = outcome?;
    let states: Vec<FockState> = raw
        .into_iter()
        .map(|y| FockState { amplitudes: y.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect() })
        .collect();
    let max_tail_mass = states.iter().map(FockState::tail_mass).fold(0.0, f64::max);
    let max_norm_defect = states.iter().map(|s| (s.norm_sqr() - 1.0).abs()).fold(0.0, f64::max);
    if !(max_tail_mass < TAIL_MASS_THRESHOLD) {
        log::warn!("Fock evolution is cutoff-unsafe: tail mass {max_tail_mass:e} at n_max = {}", dim - 1);
    }
    Ok(FockTrajectory { times: times.to_vec(), states, max_tail_mass, max_norm_defect })
}

/// Evolves pair `p` under `protocol` (CD as configured) on `record_points`
/// uniform times over `[0, t_f]`.
pub fn evolve_fock(
    initial: &FockState,
    protocol: &DriveProtocol,
    p: f64,
    record_points: usize,
    tol: Tolerances,
) -> Result<FockTrajectory> {
    protocol.validate()?;
    if record_points < 2 {
        return Err(Error::contract("record_points must be at least 2"));
    }
    let times = protocol.time_grid(record_points);
    evolve_fock_with(initial, |t| protocol.pair_generator(p, t), &times, tol)
}
