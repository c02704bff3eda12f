//! Positivity mask and per-radius free-boundary crossings.
//!
//! Near a regular free-boundary point the solution grows like `d^β` in the distance `d`, so
//! `v^{1/β}` is nearly linear across the interface. Each crossing is located by extrapolating
//! `v^{1/β}` to zero from the two outermost nodes above a small threshold, which sidesteps the
//! smeared tail left by the penalization.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::polar::PolarField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeBoundaryRow {
    pub r: f64,
    /// Angles in `[0, 2π)` where the row enters the positivity set (counterclockwise).
    pub entries: Vec<f64>,
    /// Angles where it leaves.
    pub exits: Vec<f64>,
    /// Angular length of each positivity arc, starting at the matching entry.
    pub arcs: Vec<f64>,
}

impl FreeBoundaryRow {
    /// All crossing angles, sorted.
    pub fn crossings(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.entries.iter().chain(&self.exits).cloned().collect();
        all.sort_by(f64::total_cmp);
        all
    }
}

pub fn positivity_threshold(field: &PolarField, i: usize, kappa: f64) -> f64 {
    let h = field.grid().local_spacing(i);
    kappa * h * h
}

/// `v > κ h_loc²` at every node.
pub fn positivity_mask(field: &PolarField, kappa: f64) -> Vec<bool> {
    let grid = field.grid();
    let nt = grid.n_theta();
    (0..grid.len())
        .map(|k| field.values()[k] > positivity_threshold(field, k / nt, kappa))
        .collect()
}

/// Crossings of the positivity mask on every row, located by `v^{1/β}` extrapolation.
///
/// The extrapolation is anchored on nodes above the homogeneously scaled threshold
/// `κ h² (r/r_max)^β`, which sits much closer to the interface than `κ h²` near the origin.
pub fn extract_free_boundary(field: &PolarField, beta: f64, kappa: f64) -> Vec<FreeBoundaryRow> {
    let grid = field.grid();
    let nt = grid.n_theta();
    let dth = grid.dtheta();
    let theta = grid.theta_values();
    (0..grid.n_r())
        .map(|i| {
            let r = grid.r_values()[i];
            let thr = positivity_threshold(field, i, kappa);
            let floor = thr * (r / grid.r_max()).powf(beta);
            let row = field.row(i);
            let pos: Vec<bool> = row.iter().map(|&v| v > thr).collect();
            let live: Vec<bool> = row.iter().map(|&v| v > floor).collect();
            let u = |j: usize| row[j].max(0.0).powf(1.0 / beta);
            let at = |j: isize| j.rem_euclid(nt as isize) as usize;
            let run = |mask: &[bool], j: usize, dir: isize| {
                (0..nt).take_while(|&k| !mask[at(j as isize + dir * k as isize)]).count()
            };
            // Walks from a masked boundary node towards the zero set through live nodes. Returns
            // the outermost live node, or None if the walk reaches another masked node.
            let anchor = |start: usize, dir: isize| {
                let mut a = start;
                for _ in 0..nt {
                    let b = at(a as isize + dir);
                    if !live[b] {
                        return Some(a);
                    }
                    if pos[b] {
                        return None;
                    }
                    a = b;
                }
                None
            };
            let crossing = |start: usize, dir: isize| {
                // dir = -1 for an entry (zero set at lower angles), +1 for an exit.
                let (a, mask): (usize, &[bool]) = match anchor(start, dir) {
                    Some(a) => (a, &live),
                    None => (start, &pos),
                };
                let inner = at(a as isize - dir);
                let (u0, u1) = (u(a), u(inner));
                let limit = run(mask, at(a as isize + dir), dir) as f64 * dth;
                let shift = if mask[inner] && u1 > u0 { u0 * dth / (u1 - u0) } else { 0.5 * dth };
                (theta[a] + dir as f64 * shift.min(limit)).rem_euclid(TAU)
            };
            let mut entries = Vec::new();
            let mut exits = Vec::new();
            for j in 0..nt {
                let next = at(j as isize + 1);
                if !pos[j] && pos[next] {
                    entries.push(crossing(next, -1));
                }
                if pos[j] && !pos[next] {
                    exits.push(crossing(j, 1));
                }
            }
            entries.sort_by(f64::total_cmp);
            exits.sort_by(f64::total_cmp);
            let arcs = entries
                .iter()
                .map(|&e| {
                    exits
                        .iter()
                        .map(|&x| (x - e).rem_euclid(TAU))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            FreeBoundaryRow { r, entries, exits, arcs }
        })
        .collect()
}
