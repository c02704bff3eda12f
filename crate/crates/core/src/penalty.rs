//! Smooth monotone regularizations of the reaction term `v^p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The reaction `s^p` for `s > 0` and `0` otherwise; for `p = 0` this is the indicator of
/// `{s > 0}`.
#[inline]
pub fn reaction(s: f64, p: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if p == 0.0 {
        1.0
    } else {
        s.powf(p)
    }
}

/// Quintic smoothstep `σ(x) = 6x⁵ − 15x⁴ + 10x³` on `[0, 1]`, `0` below and `1` above.
/// It is C² with `σ' = σ'' = 0` at both ends.
#[inline]
pub fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (x * (6.0 * x - 15.0) + 10.0)
    }
}

#[inline]
pub fn smoothstep_derivative(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        30.0 * x * x * (x - 1.0) * (x - 1.0)
    }
}

/// `φ_δ(s) = s^p σ(s/δ)` (and `σ(s/δ)` when `p = 0`): zero for `s ≤ 0`, equal to `s^p` for
/// `s ≥ δ`, C² and nondecreasing on ℝ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyFamily {
    pub delta: f64,
    pub p: f64,
}

impl PenaltyFamily {
    pub fn new(delta: f64, p: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::ParameterRange(format!("penalty scale must be positive, got {delta}")));
        }
        check_exponent(p)?;
        Ok(Self { delta, p })
    }

    /// `φ` with the smoothing scale replaced by `delta` (used for position-dependent scales).
    #[inline]
    pub fn value_at_scale(&self, s: f64, delta: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let sig = smoothstep(s / delta);
        if self.p == 0.0 {
            sig
        } else {
            s.powf(self.p) * sig
        }
    }

    #[inline]
    pub fn derivative_at_scale(&self, s: f64, delta: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let x = s / delta;
        let dsig = smoothstep_derivative(x) / delta;
        if self.p == 0.0 {
            dsig
        } else {
            let sp = s.powf(self.p);
            self.p * sp / s * smoothstep(x) + sp * dsig
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.value_at_scale(s, self.delta)
    }

    pub fn derivative(&self, s: f64) -> f64 {
        self.derivative_at_scale(s, self.delta)
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::ParameterRange(format!("exponent p must lie in [0, 1), got {p}")));
    }
    Ok(())
}
