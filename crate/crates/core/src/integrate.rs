//! Adaptive Dormand–Prince 5(4) with continuous output.
//!
//! Solutions are reported at caller-supplied times through the 4th-order dense
//! interpolant, so accepted steps never have to land on the output grid.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const MAX_STEPS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-10, atol: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

struct Stages {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

impl Stages {
    fn new(n: usize) -> Self {
        Stages {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
        }
    }
}

/// Integrates `y' = f(t, y)` from `(t0, y0)` and returns `y` at each time in
/// `outputs` (non-decreasing, all `≥ t0`).
pub fn integrate<F>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    outputs: &[f64],
    tol: Tolerances,
) -> Result<(Vec<Vec<f64>>, StepStats)>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    if !(tol.rtol > 0.0 && tol.atol >= 0.0) {
        return Err(Error::contract("tolerances must be positive"));
    }
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&t| t < t0) {
        return Err(Error::contract("output times must be non-decreasing and not before t0"));
    }
    let n = y0.len();
    let mut stats = StepStats::default();
    let mut results = Vec::with_capacity(outputs.len());
    let mut next_out = 0;
    while next_out < outputs.len() && outputs[next_out] == t0 {
        results.push(y0.to_vec());
        next_out += 1;
    }
    let t_end = match outputs.last() {
        Some(&t) if t > t0 => t,
        _ => return Ok((results, stats)),
    };

    let mut st = Stages::new(n);
    let mut y = y0.to_vec();
    let mut y_new = vec![0.0; n];
    let mut t = t0;
    f(t, &y, &mut st.k[0]);
    stats.evaluations += 1;
    let mut h = initial_step(&mut f, t, &y, &st.k[0], t_end - t0, tol, &mut stats);
    let mut rcont: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);

    loop {
        if stats.accepted + stats.rejected > MAX_STEPS {
            return Err(Error::Integration { t, reason: "step budget exhausted".into() });
        }
        let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if h < h_min {
            return Err(Error::Integration { t, reason: format!("step size {h:e} underflowed") });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        let err = dp_step(&mut f, t, h, &y, &mut y_new, &mut st, tol);
        stats.evaluations += 6;
        if !err.is_finite() {
            stats.rejected += 1;
            h *= MIN_FACTOR;
            continue;
        }
        if err > 1.0 {
            stats.rejected += 1;
            h *= (SAFETY * err.powf(-0.2)).max(MIN_FACTOR);
            continue;
        }

        stats.accepted += 1;
        for i in 0..n {
            let k = &st.k;
            let dy = y_new[i] - y[i];
            let bspl = h * k[0][i] - dy;
            rcont[0][i] = y[i];
            rcont[1][i] = dy;
            rcont[2][i] = bspl;
            rcont[3][i] = dy - h * k[6][i] - bspl;
            rcont[4][i] = h
                * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
        }
        let t_new = if last { t_end } else { t + h };
        while next_out < outputs.len() && outputs[next_out] <= t_new {
            let theta = (outputs[next_out] - t) / h;
            let theta1 = 1.0 - theta;
            let out = (0..n)
                .map(|i| {
                    rcont[0][i]
                        + theta
                            * (rcont[1][i]
                                + theta1 * (rcont[2][i] + theta * (rcont[3][i] + theta1 * rcont[4][i])))
                })
                .collect();
            results.push(out);
            next_out += 1;
        }
        if last || next_out == outputs.len() {
            return Ok((results, stats));
        }

        // FSAL: the last stage is f at the accepted point
        let (first, rest) = st.k.split_at_mut(1);
        first[0].copy_from_slice(&rest[5]);
        std::mem::swap(&mut y, &mut y_new);
        t = t_new;
        let factor = if err == 0.0 { MAX_FACTOR } else { (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR) };
        h *= factor;
    }
}

/// One trial step; fills `y_new` and stages `k[1..7]`, returns the scaled error norm.
fn dp_step<F>(f: &mut F, t: f64, h: f64, y: &[f64], y_new: &mut [f64], st: &mut Stages, tol: Tolerances) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let Stages { k, tmp } = st;
    macro_rules! stage {
        ($dst:expr, $c:expr, $($a:expr => $j:expr),+) => {{
            for i in 0..n {
                tmp[i] = y[i] + h * (0.0 $(+ $a * k[$j][i])+);
            }
            let (head, tail) = k.split_at_mut($dst);
            let _ = head;
            f(t + $c * h, tmp, &mut tail[0]);
        }};
    }
    stage!(1, C2, A21 => 0);
    stage!(2, C3, A31 => 0, A32 => 1);
    stage!(3, C4, A41 => 0, A42 => 1, A43 => 2);
    stage!(4, C5, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
    stage!(5, 1.0, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
    for i in 0..n {
        y_new[i] = y[i] + h * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
    }
    f(t + h, y_new, &mut k[6]);

    let mut sum = 0.0;
    for i in 0..n {
        let e = h
            * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
        let scale = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
        sum += (e / scale).powi(2);
    }
    (sum / n.max(1) as f64).sqrt()
}

/// Starting step from the size of `y`, `f` and a finite-difference estimate of `f'`.
fn initial_step<F>(
    f: &mut F,
    t: f64,
    y: &[f64],
    f0: &[f64],
    span: f64,
    tol: Tolerances,
    stats: &mut StepStats,
) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len().max(1) as f64;
    let scale = |i: usize| tol.atol + tol.rtol * y[i].abs();
    let norm = |v: &dyn Fn(usize) -> f64| ((0..y.len()).map(|i| (v(i) / scale(i)).powi(2)).sum::<f64>() / n).sqrt();
    let d0 = norm(&|i| y[i]);
    let d1 = norm(&|i| f0[i]);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1: Vec<f64> = (0..y.len()).map(|i| y[i] + h0 * f0[i]).collect();
    let mut f1 = vec![0.0; y.len()];
    f(t + h0, &y1, &mut f1);
    stats.evaluations += 1;
    let d2 = norm(&|i| f1[i] - f0[i]) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}
