//! Blow-up rescaling at the origin, dyadic suprema, growth fits and homogeneity deviations.
//!
//! Rescaling `v_r(x) = v(rx)/r^β` is a relabeling of the grid radii by `1/r` together with a
//! division of the samples by `r^β`; no interpolation is involved. In the cylinder variable it
//! is the shift `w_r(t) = w(t + ln r)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polar::PolarField;
use crate::spruck::spruck_integral;

/// Levels with `S(k)` at or below this are excluded from the growth fit.
pub const FIT_FLOOR: f64 = 1e-12;
/// Degeneracy is declared when `S(k) 2^{βk}` drops below this fraction of `S(0)`.
pub const DEGENERACY_RATIO: f64 = 1e-6;
/// Successive blow-up profiles closer than this in sup norm count as converged.
pub const PROFILE_CONVERGENCE: f64 = 1e-3;

/// `v_r(x) = v(rx)/r^β` for `r` in `(r_min, r_max]` of the source grid.
pub fn rescale(field: &PolarField, r: f64, beta: f64) -> Result<PolarField> {
    let grid = field.grid();
    let (lo, hi) = (grid.r_min(), grid.r_max());
    if !(r > lo && r <= hi) {
        return Err(Error::RescaleWindow { r, lo, hi });
    }
    if r == 1.0 {
        let mut out = field.clone();
        out.meta.beta = Some(beta);
        return Ok(out);
    }
    let scale = r.powf(-beta);
    let mut meta = field.meta.clone();
    meta.beta = Some(beta);
    if meta.p.is_some_and(|p| (crate::scaling_exponent(p) - beta).abs() > 1e-12 * beta) {
        meta.p = None;
    }
    PolarField::with_valid_rows(
        grid.scaled(r)?,
        field.values().iter().map(|v| v * scale).collect(),
        meta,
        field.valid_rows(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicReport {
    pub beta: f64,
    pub k_values: Vec<u32>,
    /// `S(k)`, the largest sample over nodes with `r ≤ 2^{-k}`.
    pub s_values: Vec<f64>,
    /// Slope of `log₂ S(k)` against `−k` over the fit window, when at least four levels there
    /// exceed the floor.
    pub fitted_beta: Option<f64>,
    pub fit_window: (u32, u32),
    /// `M = S(0)`.
    pub m: f64,
    /// Smallest `C ≥ 1` with `S(k+1) ≤ max{C M 2^{−βk}, S(k)/2}` for every resolved `k`.
    pub c: f64,
    /// Ratios `S(k) 2^{βk} / S(0)`.
    pub normalized: Vec<f64>,
    /// Proxy for degeneracy: some normalized ratio fell below [`DEGENERACY_RATIO`].
    pub degenerate: bool,
}

impl DyadicReport {
    /// Whether the dyadic inequality holds at every level with constant `c`.
    pub fn inequality_holds(&self, c: f64) -> bool {
        self.s_values.windows(2).enumerate().all(|(k, w)| {
            let bound = (c * self.m * 2f64.powf(-self.beta * k as f64)).max(0.5 * w[0]);
            w[1] <= bound * (1.0 + 1e-12)
        })
    }
}

/// Dyadic suprema `S(k)`, `k = 0..=k_max`, over the valid rows of `field`.
pub fn dyadic_sup(field: &PolarField, k_max: u32) -> Result<DyadicReport> {
    let beta = field.beta()?;
    let grid = field.grid();
    let rows = field.valid_rows();
    if rows.is_empty() {
        return Err(Error::UnderResolved("field has no valid rows".into()));
    }
    let r = grid.r_values();
    let (lo, hi) = (r[rows.start], r[rows.end - 1]);
    let slack = 1.0 + 1e-12;
    if hi * slack < 1.0 {
        return Err(Error::UnderResolved(format!("field stops at r = {hi}, inside the unit ball")));
    }
    if k_max < 1 {
        return Err(Error::UnderResolved("need k_max >= 1".into()));
    }
    let row_max: Vec<(f64, f64)> = rows
        .clone()
        .map(|i| (r[i], field.row(i).iter().cloned().fold(f64::NEG_INFINITY, f64::max)))
        .collect();
    let mut s_values = Vec::with_capacity(k_max as usize + 1);
    for k in 0..=k_max {
        let radius = 2f64.powi(-(k as i32));
        if k >= 1 {
            // Every dyadic shell must contain a node.
            let inner = 0.5 * radius;
            if lo > radius * slack || !row_max.iter().any(|&(rr, _)| rr > inner * slack && rr <= radius * slack) {
                return Err(Error::UnderResolved(format!(
                    "no grid radius in the shell ({inner}, {radius}] for k = {k}"
                )));
            }
        }
        let s = row_max
            .iter()
            .filter(|&&(rr, _)| rr <= radius * slack)
            .map(|&(_, m)| m)
            .fold(0.0f64, f64::max);
        s_values.push(s);
    }
    // Supremum over nested balls: enforce monotonicity against rounding in the shell test.
    for k in 1..s_values.len() {
        s_values[k] = s_values[k].min(s_values[k - 1]);
    }
    let m = s_values[0];
    let mut c: f64 = 1.0;
    for k in 0..k_max as usize {
        if s_values[k + 1] > 0.5 * s_values[k] && m > 0.0 {
            c = c.max(s_values[k + 1] * 2f64.powf(beta * k as f64) / m);
        }
    }
    let normalized: Vec<f64> = s_values
        .iter()
        .enumerate()
        .map(|(k, s)| if m > 0.0 { s * 2f64.powf(beta * k as f64) / m } else { 0.0 })
        .collect();
    let degenerate = m == 0.0 || normalized.iter().any(|x| *x < DEGENERACY_RATIO);
    let mut report = DyadicReport {
        beta,
        k_values: (0..=k_max).collect(),
        s_values,
        fitted_beta: None,
        fit_window: (1, k_max),
        m,
        c,
        normalized,
        degenerate,
    };
    report.fitted_beta = growth_exponent(&report).ok();
    Ok(report)
}

/// Least-squares slope of `log₂ S(k)` against `−k` over the report's fit window.
pub fn growth_exponent(report: &DyadicReport) -> Result<f64> {
    let (k_lo, k_hi) = report.fit_window;
    let points: Vec<(f64, f64)> = report
        .k_values
        .iter()
        .zip(&report.s_values)
        .filter(|(k, s)| **k >= k_lo && **k <= k_hi && **s > FIT_FLOOR)
        .map(|(k, s)| (-(*k as f64), s.log2()))
        .collect();
    if points.len() < 4 {
        return Err(Error::DegenerateWindow { usable: points.len() });
    }
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    Ok(sxy / sxx)
}

/// `√(∫∫ (∂_t w)² dθ dt)` over `r ∈ [a, b]`; zero exactly for degree-`β` homogeneous samples.
pub fn homogeneity_deviation(field: &PolarField, beta: f64, window: (f64, f64)) -> Result<f64> {
    Ok(spruck_integral(field, beta, window.0, window.1)?.max(0.0).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupStep {
    pub r: f64,
    /// Deviation of `v_r` over `[1/2, 1]`, i.e. of `v` over `[r/2, r]`.
    pub deviation: f64,
    /// `w(−ln r, ·)`, the angular profile of `v_r` on the unit circle.
    pub profile: Vec<f64>,
    /// Sup-norm change from the previous profile.
    pub change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub beta: f64,
    pub steps: Vec<BlowupStep>,
    pub deviations_decreasing: bool,
    /// The last profile change is below [`PROFILE_CONVERGENCE`].
    pub converged: bool,
    pub degenerate: bool,
}

/// Blow-up sequence along `r = 2^{-k}` for `k` in `k_range`: deviation on the unit shell and
/// angular profile of each rescaling.
pub fn blowup_sequence(field: &PolarField, beta: f64, k_range: std::ops::RangeInclusive<u32>) -> Result<BlowupReport> {
    let mut steps: Vec<BlowupStep> = Vec::new();
    for k in k_range {
        let r = 2f64.powi(-(k as i32));
        let scaled = rescale(field, r, beta)?;
        let deviation = homogeneity_deviation(&scaled, beta, (0.5, 1.0))?;
        let grid = scaled.grid();
        let i = grid.nearest_row(1.0);
        if (grid.r_values()[i] - 1.0).abs() > 1e-9 {
            return Err(Error::Coverage(format!("r = {r} is not a grid radius")));
        }
        let profile = scaled.row(i).to_vec();
        let change = steps.last().map(|prev: &BlowupStep| {
            prev.profile
                .iter()
                .zip(&profile)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        });
        steps.push(BlowupStep {
            r,
            deviation,
            profile,
            change,
        });
    }
    let deviations_decreasing = steps.windows(2).all(|w| w[1].deviation < w[0].deviation);
    let converged = steps
        .last()
        .and_then(|s| s.change)
        .is_some_and(|c| c < PROFILE_CONVERGENCE);
    let degenerate = steps
        .last()
        .map(|s| s.profile.iter().all(|v| v.abs() < DEGENERACY_RATIO * field.sup_norm().max(f64::MIN_POSITIVE)))
        .unwrap_or(true);
    Ok(BlowupReport {
        beta,
        steps,
        deviations_decreasing,
        converged,
        degenerate,
    })
}
