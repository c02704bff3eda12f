//! Homogeneous global solutions `v = r^β g(θ)` of the planar model.
//!
//! Substituting the ansatz into the polar form of the operator gives the angular equation
//! `β(β+ε) g + (1+ε) g'' = g^p` on each positivity arc `(0, α)`, with `g(0) = g'(0) = 0`.
//! Its first integral with the constant fixed by the initial data is
//! `(1+ε) g'² + β(β+ε) g² = (2/(p+1)) g^{p+1}`, and separating variables yields the arc length.

mod closed_form;
mod cone;
mod ode;
mod quadrature;

use serde::{Deserialize, Serialize};

pub use closed_form::{a_eps, closed_form_p0, omega_eps};
pub use cone::{cone_angles, rigidity_scan, BranchRoot, ConeAngles, ConeLabel, RigidityReport, RigidityRow};
pub use ode::{lift_off_coefficient, ode_integrate};
pub use quadrature::{arc_length_quadrature, gauss_kronrod_adaptive, peak_value, quadrature_profile};

use crate::penalty::reaction;
use crate::scaling_exponent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    OdeShooting,
    Quadrature,
}

/// Angular profile on its positivity arc `[0, α]`; zero elsewhere on the circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousProfile {
    pub p: f64,
    pub epsilon: f64,
    pub beta: f64,
    /// `1/(2(2+ε))`, recorded for `p = 0`.
    pub a_eps: Option<f64>,
    /// `√(2(2+ε)/(1+ε))`, recorded for `p = 0`.
    pub omega_eps: Option<f64>,
    pub alpha: f64,
    pub theta: Vec<f64>,
    pub g: Vec<f64>,
    pub gprime: Vec<f64>,
    pub provenance: Provenance,
}

impl HomogeneousProfile {
    /// `g(θ)` for any angle (taken mod 2π).
    pub fn eval(&self, theta: f64) -> f64 {
        self.eval_with_derivative(theta).0
    }

    /// `(g, g')` at any angle. Closed-form profiles are evaluated exactly, sampled ones by
    /// cubic Hermite interpolation of `(g, g')`.
    pub fn eval_with_derivative(&self, theta: f64) -> (f64, f64) {
        let th = theta.rem_euclid(std::f64::consts::TAU);
        if th <= 0.0 || th >= self.alpha {
            return (0.0, 0.0);
        }
        if let (Provenance::ClosedForm, Some(a), Some(w)) = (self.provenance, self.a_eps, self.omega_eps) {
            return (a * (1.0 - (w * th).cos()), a * w * (w * th).sin());
        }
        let k = match self.theta.partition_point(|&x| x <= th) {
            0 => 0,
            n if n >= self.theta.len() => self.theta.len() - 2,
            n => n - 1,
        };
        let h = self.theta[k + 1] - self.theta[k];
        let s = (th - self.theta[k]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let (y0, y1) = (self.g[k], self.g[k + 1]);
        let (d0, d1) = (self.gprime[k] * h, self.gprime[k + 1] * h);
        let g = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * d1;
        let dg = ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * d0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * d1)
            / h;
        (g.max(0.0), dg)
    }

    /// `g''` from the angular equation, `(g^p − β(β+ε) g)/(1+ε)`, on the open arc.
    pub fn second_derivative_from_equation(&self, g: f64) -> f64 {
        (reaction(g, self.p) - self.beta * (self.beta + self.epsilon) * g) / (1.0 + self.epsilon)
    }

    pub fn max_value(&self) -> f64 {
        self.g.iter().cloned().fold(0.0, f64::max)
    }

    /// The same profile rotated so that its arc starts at `shift`.
    pub fn eval_rotated(&self, theta: f64, shift: f64) -> f64 {
        self.eval(theta - shift)
    }
}

pub(crate) fn check_parameters(p: f64, epsilon: f64) -> crate::Result<f64> {
    crate::penalty::check_exponent(p)?;
    if !(epsilon.is_finite() && 1.0 + epsilon > 0.0) {
        return Err(crate::Error::Ellipticity(1.0 + epsilon));
    }
    Ok(scaling_exponent(p))
}
