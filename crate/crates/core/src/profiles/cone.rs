//! Cone geometry of the `p = 0` homogeneous solutions and the integrality scan.
//!
//! A degree-2 homogeneous solution whose free boundary is differentiable at the origin has a
//! positivity arc of length `kπ`, `k ∈ {1, 2}`, and the arcsine solution then forces
//! `ω_ε k ∈ 2ℤ`, hence `ω_ε ∈ ℤ`. Since `ω_ε` decreases strictly from `+∞` (ε → −1) to `√2`
//! (ε → ∞), integer values occur only at `ε_k = (4 − k²)/(k² − 2)`, `k ≥ 2`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::omega_eps;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeLabel {
    /// Coincidence cone narrower than a half-plane (ε > 0).
    Acute,
    /// Coincidence cone wider than a half-plane (ε < 0).
    Obtuse,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeAngles {
    pub positivity_arc: f64,
    pub coincidence_cone: f64,
    pub label: ConeLabel,
}

pub fn cone_angles(epsilon: f64) -> Result<ConeAngles> {
    if !(epsilon.is_finite() && 1.0 + epsilon > 0.0) {
        return Err(Error::Ellipticity(1.0 + epsilon));
    }
    let positivity_arc = TAU / omega_eps(epsilon);
    let coincidence_cone = TAU - positivity_arc;
    let label = if epsilon == 0.0 {
        ConeLabel::Flat
    } else if coincidence_cone < PI {
        ConeLabel::Acute
    } else {
        ConeLabel::Obtuse
    };
    Ok(ConeAngles {
        positivity_arc,
        coincidence_cone,
        label,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityRow {
    pub epsilon: f64,
    pub omega: f64,
    pub nearest_integer: i64,
    /// `|ω − round(ω)|`.
    pub distance: f64,
    /// Positivity arc over π; a differentiable free boundary needs 1 or 2.
    pub arc_over_pi: f64,
    pub hit: bool,
}

/// Exact solutions of `ω_ε = k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRoot {
    pub k: u32,
    pub epsilon: f64,
    /// `1 + ε > 0`.
    pub admissible: bool,
    pub in_scan_range: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub hit_tolerance: f64,
    pub rows: Vec<RigidityRow>,
    pub hits: Vec<f64>,
    pub strictly_decreasing: bool,
    pub branch_roots: Vec<BranchRoot>,
    /// `ε = 0` is the only grid hit inside `(−1/2, 1)`.
    pub unique_hit_at_zero: bool,
}

const HIT_TOLERANCE: f64 = 1e-12;

/// For each `ε`, the distance of `ω_ε` to the nearest integer. Grid points with `1 + ε ≤ 0`
/// are rejected.
pub fn rigidity_scan(epsilon_grid: &[f64]) -> Result<RigidityReport> {
    let mut rows = Vec::with_capacity(epsilon_grid.len());
    for &epsilon in epsilon_grid {
        if !(epsilon.is_finite() && 1.0 + epsilon > 0.0) {
            return Err(Error::ParameterRange(format!(
                "scan point epsilon = {epsilon} is outside (-1, inf)"
            )));
        }
        let omega = omega_eps(epsilon);
        let nearest = omega.round();
        let distance = (omega - nearest).abs();
        rows.push(RigidityRow {
            epsilon,
            omega,
            nearest_integer: nearest as i64,
            distance,
            arc_over_pi: 2.0 / omega,
            hit: distance <= HIT_TOLERANCE,
        });
    }
    let hits: Vec<f64> = rows.iter().filter(|r| r.hit).map(|r| r.epsilon).collect();
    let mut sorted: Vec<&RigidityRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    let strictly_decreasing = sorted
        .windows(2)
        .all(|w| w[0].epsilon == w[1].epsilon || w[1].omega < w[0].omega);

    let (lo, hi) = epsilon_grid
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &e| (l.min(e), h.max(e)));
    // ω ranges over (√2, ∞); the k = 1 root is listed to show it is not admissible.
    let max_omega = sorted.first().map(|r| r.omega).unwrap_or(2.0);
    let k_top = (max_omega.floor() as u32).max(2);
    let branch_roots = (1..=k_top)
        .map(|k| {
            let k2 = (k * k) as f64;
            let epsilon = (4.0 - k2) / (k2 - 2.0);
            BranchRoot {
                k,
                epsilon,
                admissible: 1.0 + epsilon > 0.0,
                in_scan_range: epsilon >= lo && epsilon <= hi,
            }
        })
        .collect();

    let window: Vec<f64> = hits.iter().cloned().filter(|e| *e > -0.5 && *e < 1.0).collect();
    let unique_hit_at_zero = window == [0.0];

    Ok(RigidityReport {
        hit_tolerance: HIT_TOLERANCE,
        rows,
        hits,
        strictly_decreasing,
        branch_roots,
        unique_hit_at_zero,
    })
}
