use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How radial nodes are distributed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialSpacing {
    /// Uniform in `r`.
    Uniform,
    /// Uniform in `t = -ln r` (log-polar).
    Log,
}

/// Structured `(r, θ)` grid on an annulus `r_min ≤ r ≤ r_max`, periodic in `θ`.
///
/// Radial nodes are stored in increasing `r`; index 0 is the inner ring. Angular nodes are
/// `θ_j = 2πj/N_θ`, so `θ = 2π` wraps back to node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct PolarGrid {
    spacing: RadialSpacing,
    r_min: f64,
    r_max: f64,
    r: Vec<f64>,
    theta: Vec<f64>,
    step: f64,
    dtheta: f64,
}

/// The serialized description; node coordinates are regenerated from it deterministically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub spacing: RadialSpacing,
    pub r_min: f64,
    #[serde(default = "one")]
    pub r_max: f64,
    pub n_r: usize,
    pub n_theta: usize,
}

fn one() -> f64 {
    1.0
}

impl PolarGrid {
    pub fn new(spacing: RadialSpacing, r_min: f64, r_max: f64, n_r: usize, n_theta: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_min.is_finite()) {
            return Err(Error::InvalidGrid(format!("r_min must be positive, got {r_min}")));
        }
        if !(r_max > r_min && r_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("r_max = {r_max} must exceed r_min = {r_min}")));
        }
        if n_r < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 radial nodes, got {n_r}")));
        }
        if n_theta < 8 {
            return Err(Error::InvalidGrid(format!("need at least 8 angular nodes, got {n_theta}")));
        }
        let last = (n_r - 1) as f64;
        let (step, r): (f64, Vec<f64>) = match spacing {
            RadialSpacing::Uniform => {
                let h = (r_max - r_min) / last;
                let r = (0..n_r)
                    .map(|i| if i + 1 == n_r { r_max } else { r_min + i as f64 * h })
                    .collect();
                (h, r)
            }
            RadialSpacing::Log => {
                let (lo, hi) = (r_min.ln(), r_max.ln());
                let h = (hi - lo) / last;
                let r = (0..n_r)
                    .map(|i| match i {
                        0 => r_min,
                        _ if i + 1 == n_r => r_max,
                        _ => (lo + i as f64 * h).exp(),
                    })
                    .collect();
                (h, r)
            }
        };
        let dtheta = TAU / n_theta as f64;
        let theta = (0..n_theta).map(|j| j as f64 * dtheta).collect();
        Ok(Self {
            spacing,
            r_min,
            r_max,
            r,
            theta,
            step,
            dtheta,
        })
    }

    /// Log-polar grid on `[r_min, 1]`.
    pub fn log_polar(r_min: f64, n_r: usize, n_theta: usize) -> Result<Self> {
        Self::new(RadialSpacing::Log, r_min, 1.0, n_r, n_theta)
    }

    /// Grid uniform in `r` on `[r_min, 1]`.
    pub fn uniform(r_min: f64, n_r: usize, n_theta: usize) -> Result<Self> {
        Self::new(RadialSpacing::Uniform, r_min, 1.0, n_r, n_theta)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            spacing: self.spacing,
            r_min: self.r_min,
            r_max: self.r_max,
            n_r: self.r.len(),
            n_theta: self.theta.len(),
        }
    }

    pub fn spacing(&self) -> RadialSpacing {
        self.spacing
    }
    pub fn r_min(&self) -> f64 {
        self.r_min
    }
    pub fn r_max(&self) -> f64 {
        self.r_max
    }
    pub fn n_r(&self) -> usize {
        self.r.len()
    }
    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }
    pub fn len(&self) -> usize {
        self.n_r() * self.n_theta()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn r_values(&self) -> &[f64] {
        &self.r
    }
    pub fn theta_values(&self) -> &[f64] {
        &self.theta
    }
    /// Step in the radial coordinate: `Δr` for uniform grids, `Δt = Δ ln r` for log grids.
    pub fn radial_step(&self) -> f64 {
        self.step
    }
    pub fn dtheta(&self) -> f64 {
        self.dtheta
    }

    /// `t = -ln r` at every radial node (decreasing with the node index).
    pub fn t_values(&self) -> Vec<f64> {
        self.r.iter().map(|r| -r.ln()).collect()
    }

    /// Physical radial spacing around row `i`: `Δr`, or `r_i Δt` on log grids.
    pub fn local_spacing(&self, i: usize) -> f64 {
        match self.spacing {
            RadialSpacing::Uniform => self.step,
            RadialSpacing::Log => self.r[i] * self.step,
        }
    }

    /// The value written in the first CSV column: `r` on uniform grids, `t` on log grids.
    pub fn radial_coordinate(&self, i: usize) -> f64 {
        match self.spacing {
            RadialSpacing::Uniform => self.r[i],
            RadialSpacing::Log => -self.r[i].ln(),
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.theta.len() + j
    }

    /// Same nodes with every radius divided by `factor` (the grid of `x ↦ x / factor`).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.spacing,
            self.r_min / factor,
            self.r_max / factor,
            self.n_r(),
            self.n_theta(),
        )
    }

    /// Index of the node nearest to radius `r`.
    pub fn nearest_row(&self, r: f64) -> usize {
        let pos = self.r.partition_point(|&x| x < r);
        match pos {
            0 => 0,
            p if p >= self.r.len() => self.r.len() - 1,
            p => {
                if (self.r[p] - r).abs() < (r - self.r[p - 1]).abs() {
                    p
                } else {
                    p - 1
                }
            }
        }
    }
}

impl TryFrom<GridSpec> for PolarGrid {
    type Error = Error;
    fn try_from(s: GridSpec) -> Result<Self> {
        PolarGrid::new(s.spacing, s.r_min, s.r_max, s.n_r, s.n_theta)
    }
}

impl From<PolarGrid> for GridSpec {
    fn from(g: PolarGrid) -> Self {
        g.spec()
    }
}
