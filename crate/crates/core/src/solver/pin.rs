//! Keeping the origin on the free boundary.
//!
//! A free-boundary point sitting exactly at the coefficient discontinuity is not generic: an
//! `O(h²)` perturbation of the data moves the interface a distance `c` off the origin, and below
//! scale `c` the solution stops looking like a non-degenerate blow-up. Multiplying the boundary
//! data by an amplitude `s` moves the interface monotonically across the origin, so a scalar
//! root-find on `s` restores the configuration the blow-up theory is about.

use serde::{Deserialize, Serialize};

use super::config::{BoundaryData, SolveConfig};
use super::{solve, Solution};
use crate::error::{Error, Result};
use crate::polar::PolarField;

/// Mean of `v/r^β` over the row nearest `r`.
fn mean_w(field: &PolarField, beta: f64, r: f64) -> f64 {
    let i = field.grid().nearest_row(r);
    let ri = field.grid().r_values()[i];
    let row = field.row(i);
    row.iter().sum::<f64>() / row.len() as f64 / ri.powf(beta)
}

/// `w̄(probe)/target − 1`, with `w̄` the angular mean of `v/r^β` on the row nearest `probe`.
///
/// At a non-degenerate free-boundary point the blow-up is a rotated homogeneous profile, whose
/// angular mean does not depend on the rotation; `target` is that mean. Since `v` grows
/// pointwise with the boundary data, so does the mismatch.
pub fn origin_mismatch(field: &PolarField, beta: f64, probe: f64, target: f64) -> Result<f64> {
    let grid = field.grid();
    if !(probe > grid.r_min() && probe <= grid.r_max()) {
        return Err(Error::Coverage(format!(
            "probe radius {probe} outside ({}, {}]",
            grid.r_min(),
            grid.r_max()
        )));
    }
    if !(target > 0.0) {
        return Err(Error::ParameterRange(format!("target mean must be positive, got {target}")));
    }
    Ok(mean_w(field, beta, probe) / target - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinStep {
    pub amplitude: f64,
    pub mismatch: f64,
}

#[derive(Debug, Clone)]
pub struct PinnedSolution {
    pub solution: Solution,
    /// Factor applied to the configured boundary trace.
    pub amplitude: f64,
    pub mismatch: f64,
    pub history: Vec<PinStep>,
}

/// Solves with boundary data `s·trace`, choosing `s` so that `|origin_mismatch| ≤ tol` at
/// `probe` against the blow-up mean `target`. The root is bracketed by geometric steps away
/// from `s = 1`, then refined by safeguarded false position.
pub fn solve_pinned(
    config: &SolveConfig,
    probe: f64,
    target: f64,
    tol: f64,
    max_solves: usize,
) -> Result<PinnedSolution> {
    config.validate()?;
    let beta = config.beta();
    let theta = config.grid.theta_values().to_vec();
    let trace = config.boundary_trace()?;
    let mut history = Vec::new();

    // Each amplitude gets a full schedule: the interface crosses the origin between nearby
    // amplitudes, which defeats warm starts at the final smoothing scale.
    let run = |s: f64, history: &mut Vec<PinStep>| -> Result<(Solution, f64)> {
        let mut cfg = config.clone();
        cfg.boundary = BoundaryData::Tabulated {
            theta: theta.clone(),
            g: trace.iter().map(|g| s * g).collect(),
        };
        let sol = solve(&cfg)?;
        let f = origin_mismatch(&sol.field, beta, probe, target)?;
        history.push(PinStep { amplitude: s, mismatch: f });
        Ok((sol, f))
    };
    let exhausted = |history: &[PinStep]| {
        Error::Config(format!(
            "free boundary not pinned within {max_solves} solves; last mismatch {:e}",
            history.last().map_or(f64::NAN, |h| h.mismatch)
        ))
    };

    let (mut sol, f0) = run(1.0, &mut history)?;
    if f0.abs() <= tol {
        return Ok(PinnedSolution { solution: sol, amplitude: 1.0, mismatch: f0, history });
    }
    // The mismatch grows with the amplitude.
    let dir = if f0 > 0.0 { -1.0 } else { 1.0 };
    let (mut a, mut fa) = (1.0, f0);
    let mut step = 1e-3;
    let (mut b, mut fb) = loop {
        if history.len() >= max_solves {
            return Err(exhausted(&history));
        }
        let s = 1.0 + dir * step;
        let (next, f) = run(s, &mut history)?;
        sol = next;
        if f.abs() <= tol {
            return Ok(PinnedSolution { solution: sol, amplitude: s, mismatch: f, history });
        }
        if f.signum() != fa.signum() {
            break (s, f);
        }
        a = s;
        fa = f;
        step *= 2.0;
    };
    // Safeguarded false position: bisect while both ends sit on the saturated branches of the
    // mismatch or the interpolant hugs an end of the bracket.
    while history.len() < max_solves {
        let width = b - a;
        let secant = (a * fb - b * fa) / (fb - fa);
        let s = if (fa.abs() > 0.5 && fb.abs() > 0.5) || ((secant - a) / width).abs().min(((b - secant) / width).abs()) < 0.1 {
            0.5 * (a + b)
        } else {
            secant
        };
        let (next, f) = run(s, &mut history)?;
        sol = next;
        if f.abs() <= tol {
            return Ok(PinnedSolution { solution: sol, amplitude: s, mismatch: f, history });
        }
        if f.signum() == fa.signum() {
            a = s;
            fa = f;
        } else {
            b = s;
            fb = f;
        }
    }
    Err(exhausted(&history))
}
