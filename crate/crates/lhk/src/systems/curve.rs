//! Time-dependent scalar coefficient curves.
//!
//! Systems are driven by curves `b_alpha(t)`. The primitive forms cover the
//! configurations used in practice (constants, polynomials in `t`, a single
//! sinusoid, and tabulated data interpolated by a monotone cubic that never
//! extrapolates). Two derived forms, [`CoefficientCurve::Squared`] and
//! [`CoefficientCurve::Scaled`], exist because generator coefficients are
//! sometimes algebraic images of the user-facing coefficient: a frequency
//! `omega(t)` enters as `omega^2(t)`, which is not itself a sinusoid, and
//! drift coefficients enter with flipped sign. Evaluating the exact image of
//! the user's curve keeps coefficient errors at machine precision instead of
//! interpolation precision.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from evaluating or validating coefficient curves.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("t = {t} outside the tabulated range [{lo}, {hi}] (no extrapolation)")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("tabulated curve needs at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("tabulated times must be strictly increasing (violated at index {0})")]
    NotIncreasing(usize),
    #[error("tabulated curve has {times} times but {values} values")]
    LengthMismatch { times: usize, values: usize },
    #[error("non-finite curve datum")]
    NotFinite,
}

/// A scalar function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum CoefficientCurve {
    /// `value`
    Constant { value: f64 },
    /// `coeffs[0] + coeffs[1] t + coeffs[2] t^2 + ...`
    Polynomial { coeffs: Vec<f64> },
    /// `amp * cos(omega t + phase) + offset`; serialized with the short
    /// keys `a`, `omega`, `phi`, `c`.
    Sinusoid {
        #[serde(rename = "a")]
        amp: f64,
        omega: f64,
        #[serde(rename = "phi")]
        phase: f64,
        #[serde(rename = "c")]
        offset: f64,
    },
    /// Monotone cubic through `(times[k], values[k])`; evaluation outside
    /// `[times[0], times[last]]` is an error.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
    /// `inner(t)^2`
    Squared { inner: Box<CoefficientCurve> },
    /// `factor * inner(t)`
    Scaled { factor: f64, inner: Box<CoefficientCurve> },
}

impl CoefficientCurve {
    pub fn constant(value: f64) -> Self {
        CoefficientCurve::Constant { value }
    }

    /// `amp * cos(omega t + phase) + offset`.
    pub fn sinusoid(amp: f64, omega: f64, phase: f64, offset: f64) -> Self {
        CoefficientCurve::Sinusoid {
            amp,
            omega,
            phase,
            offset,
        }
    }

    pub fn squared(inner: CoefficientCurve) -> Self {
        CoefficientCurve::Squared {
            inner: Box::new(inner),
        }
    }

    pub fn scaled(factor: f64, inner: CoefficientCurve) -> Self {
        CoefficientCurve::Scaled {
            factor,
            inner: Box::new(inner),
        }
    }

    /// Builds a validated tabulated curve.
    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self, CurveError> {
        let curve = CoefficientCurve::Tabulated { times, values };
        curve.validate()?;
        Ok(curve)
    }

    /// Checks structural invariants (needed after deserializing).
    pub fn validate(&self) -> Result<(), CurveError> {
        match self {
            CoefficientCurve::Constant { value } => {
                if !value.is_finite() {
                    return Err(CurveError::NotFinite);
                }
            }
            CoefficientCurve::Polynomial { coeffs } => {
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(CurveError::NotFinite);
                }
            }
            CoefficientCurve::Sinusoid {
                amp,
                omega,
                phase,
                offset,
            } => {
                if ![*amp, *omega, *phase, *offset].iter().all(|v| v.is_finite()) {
                    return Err(CurveError::NotFinite);
                }
            }
            CoefficientCurve::Tabulated { times, values } => {
                if times.len() != values.len() {
                    return Err(CurveError::LengthMismatch {
                        times: times.len(),
                        values: values.len(),
                    });
                }
                if times.len() < 2 {
                    return Err(CurveError::TooFewSamples(times.len()));
                }
                if times.iter().chain(values.iter()).any(|v| !v.is_finite()) {
                    return Err(CurveError::NotFinite);
                }
                for k in 1..times.len() {
                    if times[k] <= times[k - 1] {
                        return Err(CurveError::NotIncreasing(k));
                    }
                }
            }
            CoefficientCurve::Squared { inner } => inner.validate()?,
            CoefficientCurve::Scaled { factor, inner } => {
                if !factor.is_finite() {
                    return Err(CurveError::NotFinite);
                }
                inner.validate()?;
            }
        }
        Ok(())
    }

    /// Evaluates the curve at `t`.
    pub fn eval(&self, t: f64) -> Result<f64, CurveError> {
        match self {
            CoefficientCurve::Constant { value } => Ok(*value),
            CoefficientCurve::Polynomial { coeffs } => {
                // Horner, highest degree first.
                Ok(coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c))
            }
            CoefficientCurve::Sinusoid {
                amp,
                omega,
                phase,
                offset,
            } => Ok(amp * (omega * t + phase).cos() + offset),
            CoefficientCurve::Tabulated { times, values } => eval_monotone_cubic(times, values, t),
            CoefficientCurve::Squared { inner } => {
                let v = inner.eval(t)?;
                Ok(v * v)
            }
            CoefficientCurve::Scaled { factor, inner } => Ok(factor * inner.eval(t)?),
        }
    }
}

/// Monotone piecewise-cubic Hermite interpolation: tangents are harmonic
/// means of adjacent secant slopes (zero across local extrema), which keeps
/// the interpolant monotone wherever the data are.
fn eval_monotone_cubic(times: &[f64], values: &[f64], t: f64) -> Result<f64, CurveError> {
    let n = times.len();
    if n != values.len() {
        return Err(CurveError::LengthMismatch {
            times: n,
            values: values.len(),
        });
    }
    if n < 2 {
        return Err(CurveError::TooFewSamples(n));
    }
    let (lo, hi) = (times[0], times[n - 1]);
    if t < lo || t > hi {
        return Err(CurveError::OutOfRange { t, lo, hi });
    }
    // Segment index k with times[k] <= t <= times[k+1].
    let k = match times.partition_point(|&tk| tk <= t) {
        0 => 0,
        p => (p - 1).min(n - 2),
    };
    let h = times[k + 1] - times[k];
    let slope_at = |idx: usize| -> f64 {
        if idx == 0 {
            (values[1] - values[0]) / (times[1] - times[0])
        } else if idx == n - 1 {
            (values[n - 1] - values[n - 2]) / (times[n - 1] - times[n - 2])
        } else {
            let d_prev = (values[idx] - values[idx - 1]) / (times[idx] - times[idx - 1]);
            let d_next = (values[idx + 1] - values[idx]) / (times[idx + 1] - times[idx]);
            if d_prev * d_next <= 0.0 {
                0.0
            } else {
                2.0 * d_prev * d_next / (d_prev + d_next)
            }
        }
    };
    let m0 = slope_at(k);
    let m1 = slope_at(k + 1);
    let s = (t - times[k]) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    Ok(h00 * values[k] + h10 * h * m0 + h01 * values[k + 1] + h11 * h * m1)
}
