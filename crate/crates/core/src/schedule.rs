//! Interpolating schedules `𝒫(s)` on `s = t/t_f ∈ [0, 1]`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    /// `10s³ − 15s⁴ + 6s⁵`: first and second derivatives vanish at both ends.
    Poly5,
    Linear,
    /// Piecewise-linear through `(s, 𝒫)` samples spanning `(0, 0)` to `(1, 1)`.
    CustomSamples(Vec<(f64, f64)>),
}

/// Peak of `d𝒫/ds` for the quintic, reached at `s = 1/2`.
pub const POLY5_MAX_RATE: f64 = 1.875;

impl Schedule {
    pub fn custom(samples: Vec<(f64, f64)>) -> Result<Self> {
        let schedule = Schedule::CustomSamples(samples);
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn validate(&self) -> Result<()> {
        if let Schedule::CustomSamples(samples) = self {
            if samples.len() < 2 {
                return Err(Error::contract("custom schedule needs at least two samples"));
            }
            if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                return Err(Error::contract("custom schedule abscissae must be strictly increasing"));
            }
            let (first, last) = (samples[0], samples[samples.len() - 1]);
            if first != (0.0, 0.0) || last != (1.0, 1.0) {
                return Err(Error::contract(
                    "custom schedule must start at (0, 0) and end at (1, 1)",
                ));
            }
        }
        Ok(())
    }

    /// `(𝒫(s), d𝒫/ds)`.
    pub fn value(&self, s: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::contract(format!("schedule argument {s} outside [0, 1]")));
        }
        Ok(self.value_unchecked(s))
    }

    pub(crate) fn value_unchecked(&self, s: f64) -> (f64, f64) {
        match self {
            Schedule::Poly5 => {
                let s2 = s * s;
                let value = s2 * s * (10.0 + s * (-15.0 + 6.0 * s));
                let rate = 30.0 * s2 * (1.0 - s) * (1.0 - s);
                (value, rate)
            }
            Schedule::Linear => (s, 1.0),
            Schedule::CustomSamples(samples) => {
                let i = samples
                    .partition_point(|&(x, _)| x <= s)
                    .clamp(1, samples.len() - 1);
                let (x0, y0) = samples[i - 1];
                let (x1, y1) = samples[i];
                let slope = (y1 - y0) / (x1 - x0);
                (y0 + slope * (s - x0), slope)
            }
        }
    }

    /// Largest `|d𝒫/ds|` over `[0, 1]`.
    pub fn max_rate(&self) -> f64 {
        match self {
            Schedule::Poly5 => POLY5_MAX_RATE,
            Schedule::Linear => 1.0,
            Schedule::CustomSamples(samples) => samples
                .windows(2)
                .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
                .fold(0.0, f64::max),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Schedule::Poly5 => "poly5",
            Schedule::Linear => "linear",
            Schedule::CustomSamples(_) => "custom_samples",
        }
    }
}
