use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientModel, ModelKind};
use crate::error::{Error, Result};
use crate::penalty::check_exponent;
use crate::polar::PolarGrid;
use crate::profiles::{
    closed_form_p0, lift_off_coefficient, ode_integrate, quadrature_profile, HomogeneousProfile,
};
use crate::scaling_exponent;

/// Largest admissible truncation radius.
pub const MAX_INNER_RADIUS: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub model: CoefficientModel,
    pub p: f64,
    pub grid: PolarGrid,
    pub boundary: BoundaryData,
    #[serde(default)]
    pub penalty: PenaltyConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub inner_boundary: InnerBoundary,
    /// Positivity threshold `κ h²` uses this `κ`.
    #[serde(default = "default_kappa")]
    pub free_boundary_kappa: f64,
}

fn default_kappa() -> f64 {
    1.0
}

/// Dirichlet data at the outer radius. Profile-based kinds prescribe the trace of the
/// homogeneous function `scale · r^β g(θ − rotation)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryData {
    Zero {},
    /// `a_ε (1 − cos ω_ε θ)` on its arc (`p = 0` only).
    ClosedForm {
        #[serde(default)]
        rotation: f64,
        #[serde(default = "unit")]
        scale: f64,
    },
    /// `c (x₂⁺)^β` with `c β(β−1) = c^p`, the one-dimensional solution for the Laplacian.
    HalfPlane {
        #[serde(default)]
        rotation: f64,
        #[serde(default = "unit")]
        scale: f64,
    },
    /// Homogeneous profile for the configured `p` and `ε`, built numerically.
    HomogeneousProfile {
        #[serde(default)]
        method: ProfileMethod,
        #[serde(default)]
        rotation: f64,
        #[serde(default = "unit")]
        scale: f64,
    },
    /// `g(θ)` at the outer radius, linearly interpolated and periodic.
    Tabulated { theta: Vec<f64>, g: Vec<f64> },
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMethod {
    #[default]
    Ode,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyConfig {
    #[serde(default = "default_schedule")]
    pub schedule: Vec<f64>,
    #[serde(default)]
    pub scaling: PenaltyScaling,
}

fn default_schedule() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3, 1e-4]
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            schedule: default_schedule(),
            scaling: PenaltyScaling::default(),
        }
    }
}

/// How the smoothing scale depends on position.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyScaling {
    /// The same `δ` everywhere.
    Uniform,
    /// `δ (r/r_max)^β`, which commutes with the blow-up scaling so that small radii are not
    /// swamped by the smoothing.
    #[default]
    Homogeneous,
}

impl PenaltyScaling {
    pub fn local_delta(self, delta: f64, r: f64, r_max: f64, beta: f64) -> f64 {
        match self {
            Self::Uniform => delta,
            Self::Homogeneous => delta * (r / r_max).powf(beta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Under-relaxation of the fixed-point fallback.
    #[serde(default = "default_damping")]
    pub damping: f64,
}

fn default_residual_tol() -> f64 {
    1e-8
}
fn default_max_iters() -> usize {
    200
}
fn default_damping() -> f64 {
    0.5
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual_tol: default_residual_tol(),
            max_iters: default_max_iters(),
            damping: default_damping(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerBoundary {
    /// `v(r_min, θ) = (r_min/r₁)^β v(r₁, θ)`, eliminated into the first interior row.
    #[default]
    HomogeneousExtrapolation,
    Zero,
}

impl SolveConfig {
    pub fn new(model: CoefficientModel, p: f64, grid: PolarGrid, boundary: BoundaryData) -> Self {
        Self {
            model,
            p,
            grid,
            boundary,
            penalty: PenaltyConfig::default(),
            tolerances: Tolerances::default(),
            inner_boundary: InnerBoundary::default(),
            free_boundary_kappa: default_kappa(),
        }
    }

    /// Parses and validates a JSON configuration.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn beta(&self) -> f64 {
        scaling_exponent(self.p)
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent(self.p)?;
        if let ModelKind::RadialNd { n } = self.model.kind() {
            return Err(Error::Config(format!(
                "the solver works in the plane; the {n}-dimensional radial model is not supported"
            )));
        }
        let r_min = self.grid.r_min();
        if !(r_min > 0.0 && r_min <= MAX_INNER_RADIUS) {
            return Err(Error::Config(format!(
                "truncation radius r_min = {r_min} must lie in (0, {MAX_INNER_RADIUS}]"
            )));
        }
        let schedule = &self.penalty.schedule;
        if schedule.is_empty() {
            return Err(Error::Config("penalty schedule is empty".into()));
        }
        if schedule.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::Config("penalty scales must be positive and finite".into()));
        }
        if schedule.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("penalty schedule must be strictly decreasing".into()));
        }
        let tol = &self.tolerances;
        if !(tol.residual_tol > 0.0) || tol.max_iters == 0 {
            return Err(Error::Config("residual_tol and max_iters must be positive".into()));
        }
        if !(tol.damping > 0.0 && tol.damping <= 1.0) {
            return Err(Error::Config(format!("damping must lie in (0, 1], got {}", tol.damping)));
        }
        if !(self.free_boundary_kappa >= 0.0 && self.free_boundary_kappa.is_finite()) {
            return Err(Error::Config("free_boundary_kappa must be nonnegative".into()));
        }
        self.boundary.validate(self.p, &self.model)
    }

    /// Boundary values at the outer radius, one per angular node.
    pub fn boundary_trace(&self) -> Result<Vec<f64>> {
        let trace = self.boundary.generator(self.p, &self.model, self.grid.r_max())?;
        Ok(self.grid.theta_values().iter().map(|&th| trace(th)).collect())
    }
}

impl BoundaryData {
    fn scale_and_rotation(&self) -> Option<(f64, f64)> {
        match *self {
            Self::ClosedForm { rotation, scale }
            | Self::HalfPlane { rotation, scale }
            | Self::HomogeneousProfile { rotation, scale, .. } => Some((scale, rotation)),
            _ => None,
        }
    }

    fn validate(&self, p: f64, model: &CoefficientModel) -> Result<()> {
        if let Some((scale, rotation)) = self.scale_and_rotation() {
            if !(scale >= 0.0 && scale.is_finite() && rotation.is_finite()) {
                return Err(Error::Config("boundary scale must be nonnegative and finite".into()));
            }
        }
        match self {
            Self::ClosedForm { .. } if p != 0.0 => Err(Error::Config(format!(
                "closed-form boundary data exists only for p = 0, got p = {p}"
            ))),
            Self::HomogeneousProfile { .. } => {
                crate::profiles::check_parameters(p, model.epsilon()).map(|_| ())
            }
            Self::Tabulated { theta, g } => {
                if theta.len() != g.len() || theta.len() < 2 {
                    return Err(Error::Config(
                        "tabulated boundary needs matching theta and g arrays of length >= 2".into(),
                    ));
                }
                if theta.iter().any(|t| !(0.0..TAU).contains(t)) || theta.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config(
                        "tabulated theta must be strictly increasing within [0, 2 pi)".into(),
                    ));
                }
                if g.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return Err(Error::Config("boundary data must be nonnegative".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The homogeneous profile whose trace this data prescribes, if any (unscaled, unrotated).
    pub fn profile(&self, p: f64, model: &CoefficientModel) -> Result<Option<HomogeneousProfile>> {
        let eps = model.epsilon();
        Ok(match self {
            Self::ClosedForm { .. } => Some(closed_form_p0(eps)?),
            Self::HomogeneousProfile { method, .. } => Some(match method {
                ProfileMethod::Ode => ode_integrate(p, eps, 1e-4)?,
                ProfileMethod::Quadrature => quadrature_profile(p, eps, 2048)?,
            }),
            _ => None,
        })
    }

    /// Exact solution `r^β g(θ)` when the data is an unscaled trace of one.
    pub fn exact_solution(&self, p: f64, model: &CoefficientModel) -> Result<Option<Box<dyn Fn(f64, f64) -> f64>>> {
        let beta = scaling_exponent(p);
        match *self {
            Self::Zero {} => Ok(Some(Box::new(|_, _| 0.0))),
            Self::ClosedForm { rotation, scale } | Self::HomogeneousProfile { rotation, scale, .. }
                if scale == 1.0 =>
            {
                let prof = self.profile(p, model)?.expect("profile-based data");
                Ok(Some(Box::new(move |r: f64, th: f64| r.powf(beta) * prof.eval(th - rotation))))
            }
            Self::HalfPlane { rotation, scale } if scale == 1.0 && model.epsilon() == 0.0 => {
                let c = lift_off_coefficient(p, 0.0);
                Ok(Some(Box::new(move |r: f64, th: f64| {
                    c * (r * (th - rotation).sin()).max(0.0).powf(beta)
                })))
            }
            _ => Ok(None),
        }
    }

    /// `θ ↦ v(r_max, θ)`.
    pub fn generator(&self, p: f64, model: &CoefficientModel, r_max: f64) -> Result<Box<dyn Fn(f64) -> f64>> {
        let beta = scaling_exponent(p);
        let radial = r_max.powf(beta);
        Ok(match self {
            Self::Zero {} => Box::new(|_| 0.0),
            Self::ClosedForm { rotation, scale } | Self::HomogeneousProfile { rotation, scale, .. } => {
                let prof = self.profile(p, model)?.expect("profile-based data");
                let (rotation, factor) = (*rotation, scale * radial);
                Box::new(move |th| factor * prof.eval(th - rotation))
            }
            Self::HalfPlane { rotation, scale } => {
                let c = scale * lift_off_coefficient(p, 0.0) * radial;
                let rotation = *rotation;
                Box::new(move |th| c * (th - rotation).sin().max(0.0).powf(beta))
            }
            Self::Tabulated { theta, g } => {
                let (theta, g) = (theta.clone(), g.clone());
                Box::new(move |th| periodic_linear(&theta, &g, th))
            }
        })
    }
}

fn periodic_linear(theta: &[f64], g: &[f64], th: f64) -> f64 {
    let x = th.rem_euclid(TAU);
    let n = theta.len();
    let k = theta.partition_point(|&t| t <= x);
    let (t0, g0, t1, g1) = if k == 0 {
        (theta[n - 1] - TAU, g[n - 1], theta[0], g[0])
    } else if k == n {
        (theta[n - 1], g[n - 1], theta[0] + TAU, g[0])
    } else {
        (theta[k - 1], g[k - 1], theta[k], g[k])
    };
    g0 + (g1 - g0) * (x - t0) / (t1 - t0)
}
