//! The weighted homogeneity functional and the energy identity of homogeneous profiles.
//!
//! With `w = v/r^β` and `t = −ln r`, `∂_t w = β v/r^β − ∂_r v/r^{β−1}` and `dx/|x|² = dt dθ`, so
//! `∫ (β v/r^β − ∂_r v/r^{β−1})² dx/|x|² = ∫∫ (∂_t w)² dθ dt`. Differentiating `w` rather than
//! `v` makes the discrete functional vanish exactly on homogeneous samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polar::PolarField;
use crate::profiles::HomogeneousProfile;

/// Outer radius of the monitored ball.
pub const MONITOR_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub r_inner: f64,
    pub r_outer: f64,
    pub contribution: f64,
    /// Sum of this and all outer annuli.
    pub running_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub beta: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub total: f64,
    /// Dyadic shells `[2^{-k-1}, 2^{-k}]` from the outside in, the last one clipped at `r_min`.
    pub annuli: Vec<Annulus>,
    /// Set when the report concerns a profile.
    pub energy_residual_sup: Option<f64>,
    /// Empirical constant `total / ‖v‖²_∞`; the functional is quadratic in `v`.
    pub bound_estimate: f64,
}

/// Derivative of samples `f` at strictly monotone abscissae `x`, three-point and second order
/// (one-sided at the ends).
pub(crate) fn derivative_nonuniform(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert!(n >= 3 && f.len() == n);
    let three = |k0: usize, at: usize| {
        let (x0, x1, x2) = (x[k0], x[k0 + 1], x[k0 + 2]);
        let z = x[at];
        let w0 = ((z - x1) + (z - x2)) / ((x0 - x1) * (x0 - x2));
        let w1 = ((z - x0) + (z - x2)) / ((x1 - x0) * (x1 - x2));
        let w2 = ((z - x0) + (z - x1)) / ((x2 - x0) * (x2 - x1));
        w0 * f[k0] + w1 * f[k0 + 1] + w2 * f[k0 + 2]
    };
    (0..n)
        .map(|k| match k {
            0 => three(0, 0),
            _ if k + 1 == n => three(n - 3, n - 1),
            _ => three(k - 1, k),
        })
        .collect()
}

/// `∫_lo^hi` of the piecewise-linear interpolant of `(x, y)`, `x` ascending.
pub(crate) fn integrate_linear(x: &[f64], y: &[f64], lo: f64, hi: f64) -> f64 {
    let interp = |k: usize, z: f64| y[k] + (y[k + 1] - y[k]) * (z - x[k]) / (x[k + 1] - x[k]);
    (0..x.len() - 1)
        .map(|k| {
            let (a, b) = (x[k].max(lo), x[k + 1].min(hi));
            if b > a {
                0.5 * (b - a) * (interp(k, a) + interp(k, b))
            } else {
                0.0
            }
        })
        .sum()
}

/// Per-row angular integrals `Σ_j (∂_t w)² Δθ` over the valid rows, returned with their `t`
/// values in ascending order.
pub(crate) fn t_densities(field: &PolarField, beta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = field.grid();
    let rows = field.valid_rows();
    if rows.len() < 3 {
        return Err(Error::Coverage(format!("need at least 3 valid rows, got {}", rows.len())));
    }
    // Ascending t is descending r.
    let idx: Vec<usize> = rows.rev().collect();
    let t: Vec<f64> = idx.iter().map(|&i| -grid.r_values()[i].ln()).collect();
    let nt = grid.n_theta();
    let dth = grid.dtheta();
    let mut dens = vec![0.0; idx.len()];
    for j in 0..nt {
        let w: Vec<f64> = idx
            .iter()
            .map(|&i| field.at(i, j) / grid.r_values()[i].powf(beta))
            .collect();
        for (d, wt) in dens.iter_mut().zip(derivative_nonuniform(&t, &w)) {
            *d += wt * wt * dth;
        }
    }
    Ok((t, dens))
}

fn check_window(field: &PolarField, a: f64, b: f64) -> Result<()> {
    let grid = field.grid();
    let rows = field.valid_rows();
    if rows.is_empty() {
        return Err(Error::Coverage("field has no valid rows".into()));
    }
    let lo = grid.r_values()[rows.start];
    let hi = grid.r_values()[rows.end - 1];
    let slack = 1e-12;
    if !(a > 0.0 && a < b) || a < lo * (1.0 - slack) || b > hi * (1.0 + slack) {
        return Err(Error::Coverage(format!(
            "window [{a}, {b}] not inside the resolved radii [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// `∫∫ (∂_t w)² dθ dt` over `r ∈ [a, b]`.
pub fn spruck_integral(field: &PolarField, beta: f64, a: f64, b: f64) -> Result<f64> {
    check_window(field, a, b)?;
    let (t, dens) = t_densities(field, beta)?;
    Ok(integrate_linear(&t, &dens, -b.ln(), -a.ln()))
}

/// The functional in its original radial form, `∫∫ (β v/r^β − ∂_r v/r^{β−1})² r^{-1} dr dθ`,
/// with `∂_r v` differenced in `r`. Agrees with [`spruck_integral`] to second order.
pub fn spruck_integral_radial(field: &PolarField, beta: f64, a: f64, b: f64) -> Result<f64> {
    check_window(field, a, b)?;
    let grid = field.grid();
    let idx: Vec<usize> = field.valid_rows().collect();
    let r: Vec<f64> = idx.iter().map(|&i| grid.r_values()[i]).collect();
    let dth = grid.dtheta();
    let mut dens = vec![0.0; r.len()];
    for j in 0..grid.n_theta() {
        let v: Vec<f64> = idx.iter().map(|&i| field.at(i, j)).collect();
        let dv = derivative_nonuniform(&r, &v);
        for k in 0..r.len() {
            let q = beta * v[k] / r[k].powf(beta) - dv[k] / r[k].powf(beta - 1.0);
            dens[k] += q * q * dth / r[k];
        }
    }
    Ok(integrate_linear(&r, &dens, a, b))
}

/// The functional over `B_{1/2}` minus the core `B_{r_min}`, where `r_min` is the innermost
/// resolved radius, with its dyadic-shell breakdown.
pub fn spruck_functional(field: &PolarField, beta: f64) -> Result<MonitorReport> {
    let grid = field.grid();
    let rows = field.valid_rows();
    if rows.is_empty() {
        return Err(Error::Coverage("field has no valid rows".into()));
    }
    let r_min = grid.r_values()[rows.start];
    if r_min >= MONITOR_RADIUS || grid.r_values()[rows.end - 1] < MONITOR_RADIUS * (1.0 - 1e-12) {
        return Err(Error::Coverage(format!(
            "field must resolve [r_min, {MONITOR_RADIUS}] with r_min < {MONITOR_RADIUS}"
        )));
    }
    let (t, dens) = t_densities(field, beta)?;
    let mut annuli = Vec::new();
    let mut running_total = 0.0;
    let mut outer = MONITOR_RADIUS;
    while outer > r_min * (1.0 + 1e-12) {
        let inner = (0.5 * outer).max(r_min);
        let contribution = integrate_linear(&t, &dens, -outer.ln(), -inner.ln());
        running_total += contribution;
        annuli.push(Annulus {
            r_inner: inner,
            r_outer: outer,
            contribution,
            running_total,
        });
        outer *= 0.5;
    }
    let sup = field.sup_norm();
    Ok(MonitorReport {
        beta,
        r_min,
        r_max: MONITOR_RADIUS,
        total: running_total,
        annuli,
        energy_residual_sup: None,
        bound_estimate: if sup > 0.0 { running_total / (sup * sup) } else { 0.0 },
    })
}

/// `sup_θ |(1+ε) g'² + β(β+ε) g² − (2/(p+1)) g^{p+1}|` over the profile samples; zero exactly
/// when the first integral holds with vanishing constant.
pub fn energy_identity_residual(profile: &HomogeneousProfile) -> f64 {
    let (p, eps, beta) = (profile.p, profile.epsilon, profile.beta);
    profile
        .g
        .iter()
        .zip(&profile.gprime)
        .map(|(&g, &dg)| {
            let g = g.max(0.0);
            ((1.0 + eps) * dg * dg + beta * (beta + eps) * g * g - 2.0 / (p + 1.0) * g.powf(p + 1.0)).abs()
        })
        .fold(0.0, f64::max)
}
