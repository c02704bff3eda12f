//! Diffusion-matrix models and their ellipticity data.
//!
//! Three models are implemented:
//!
//! - `Identity`: `a = I`, the Laplacian.
//! - `Planar2D`: `a(x) = I + ε τ⊗τ` with `τ = (-x₂, x₁)/|x|` the unit tangent to the circle
//!   through `x`. Entries are `1 + εx₂²/|x|²`, `-εx₁x₂/|x|²`, `1 + εx₁²/|x|²`.
//! - `RadialND`: `a(x) = I + ε x⊗x/|x|²` in any dimension `n ≥ 2`.
//!
//! Both perturbed models are homogeneous of degree zero and therefore discontinuous at the
//! origin. Evaluating them there is an error rather than a limit.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Identity,
    Planar2D,
    RadialNd { n: usize },
}

/// A validated coefficient model. `Identity` always carries `epsilon = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpec", into = "ModelSpec")]
pub struct CoefficientModel {
    kind: ModelKind,
    epsilon: f64,
}

/// Ellipticity constants `λ|ξ|² ≤ a_ij ξ_i ξ_j ≤ Λ|ξ|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticityBounds {
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
}

/// Coefficients of the operator written in polar coordinates,
/// `L v = rr·∂_rr v + r·∂_r v / r + thth·∂_θθ v / r²`.
///
/// In the plane all three models are diagonal in `(r, θ)`; no mixed derivative appears.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarCoefficients {
    pub rr: f64,
    pub r: f64,
    pub thth: f64,
}

impl CoefficientModel {
    pub fn identity() -> Self {
        Self {
            kind: ModelKind::Identity,
            epsilon: 0.0,
        }
    }

    pub fn planar(epsilon: f64) -> Result<Self> {
        Self::new(ModelKind::Planar2D, epsilon)
    }

    pub fn radial(n: usize, epsilon: f64) -> Result<Self> {
        Self::new(ModelKind::RadialNd { n }, epsilon)
    }

    pub fn new(kind: ModelKind, epsilon: f64) -> Result<Self> {
        match kind {
            ModelKind::Identity => Ok(Self::identity()),
            ModelKind::RadialNd { n } if n < 2 => Err(Error::ParameterRange(format!(
                "radial model needs dimension n >= 2, got {n}"
            ))),
            _ => {
                if !epsilon.is_finite() || 1.0 + epsilon <= 0.0 {
                    return Err(Error::Ellipticity(1.0 + epsilon));
                }
                Ok(Self { kind, epsilon })
            }
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Spatial dimension, or `None` for the identity (which adapts to its input).
    pub fn dimension(&self) -> Option<usize> {
        match self.kind {
            ModelKind::Identity => None,
            ModelKind::Planar2D => Some(2),
            ModelKind::RadialNd { n } => Some(n),
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<f64> {
        if let Some(n) = self.dimension() {
            if x.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: x.len(),
                });
            }
        }
        let norm2: f64 = x.iter().map(|c| c * c).sum();
        if self.kind != ModelKind::Identity && norm2 == 0.0 {
            return Err(Error::OriginEvaluation);
        }
        Ok(norm2)
    }

    /// The matrix `a(x)`.
    pub fn evaluate_matrix(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let norm2 = self.check_point(x)?;
        let n = x.len();
        let eps = self.epsilon;
        let m = match self.kind {
            ModelKind::Identity => DMatrix::identity(n, n),
            ModelKind::Planar2D => {
                let (x1, x2) = (x[0], x[1]);
                DMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        1.0 + eps * x2 * x2 / norm2,
                        -eps * x1 * x2 / norm2,
                        -eps * x1 * x2 / norm2,
                        1.0 + eps * x1 * x1 / norm2,
                    ],
                )
            }
            ModelKind::RadialNd { .. } => DMatrix::from_fn(n, n, |i, j| {
                let delta = if i == j { 1.0 } else { 0.0 };
                delta + eps * x[i] * x[j] / norm2
            }),
        };
        Ok(m)
    }

    /// `a_ij(x) ξ_i ξ_j` from the closed formulas
    /// `|ξ|² + ε(x₁ξ₂ − x₂ξ₁)²/|x|²` (planar) and `|ξ|² + ε(x·ξ)²/|x|²` (radial).
    pub fn quadratic_form(&self, x: &[f64], xi: &[f64]) -> Result<f64> {
        let norm2 = self.check_point(x)?;
        if xi.len() != x.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                got: xi.len(),
            });
        }
        let xi2: f64 = xi.iter().map(|c| c * c).sum();
        let q = match self.kind {
            ModelKind::Identity => xi2,
            ModelKind::Planar2D => {
                let cross = x[0] * xi[1] - x[1] * xi[0];
                xi2 + self.epsilon * cross * cross / norm2
            }
            ModelKind::RadialNd { .. } => {
                let dot: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
                xi2 + self.epsilon * dot * dot / norm2
            }
        };
        Ok(q)
    }

    /// `a_ij(x) H_ij` for a symmetric Hessian `H`; the non-divergence operator at a point.
    pub fn contract_hessian(&self, x: &[f64], hessian: &DMatrix<f64>) -> Result<f64> {
        let a = self.evaluate_matrix(x)?;
        if hessian.nrows() != a.nrows() || hessian.ncols() != a.ncols() {
            return Err(Error::Dimension {
                expected: a.nrows(),
                got: hessian.nrows(),
            });
        }
        Ok(a.component_mul(hessian).sum())
    }

    pub fn ellipticity_bounds(&self) -> EllipticityBounds {
        // The perturbation is a rank-one multiple of a unit projector, so its eigenvalues are
        // 1 (multiplicity n-1) and 1 + ε.
        let top = 1.0 + self.epsilon;
        EllipticityBounds {
            lambda: top.min(1.0),
            big_lambda: top.max(1.0),
        }
    }

    /// Polar-coordinate coefficients of the operator in the `(x₁, x₂)` plane.
    ///
    /// For `Planar2D`, `L v = Δv + ε ∂_ττ v = v_rr + (1+ε)(v_r/r + v_θθ/r²)`.
    /// For `RadialNd`, `L v = Δv + ε v_rr`, which in the plane reads
    /// `(1+ε) v_rr + v_r/r + v_θθ/r²`. For `n ≥ 3` the same expression is the operator in a
    /// meridian plane at points on the `x₁` axis, which is where it is used.
    pub fn polar_coefficients(&self) -> PolarCoefficients {
        let e = self.epsilon;
        match self.kind {
            ModelKind::Identity => PolarCoefficients {
                rr: 1.0,
                r: 1.0,
                thth: 1.0,
            },
            ModelKind::Planar2D => PolarCoefficients {
                rr: 1.0,
                r: 1.0 + e,
                thth: 1.0 + e,
            },
            ModelKind::RadialNd { .. } => PolarCoefficients {
                rr: 1.0 + e,
                r: 1.0,
                thth: 1.0,
            },
        }
    }
}

/// Wire form: `{"kind": "planar2d"|"identity"|"radial_nd", "epsilon": number, "n": integer?}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSpec {
    kind: String,
    #[serde(default)]
    epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
}

impl TryFrom<ModelSpec> for CoefficientModel {
    type Error = Error;

    fn try_from(spec: ModelSpec) -> Result<Self> {
        let kind = match spec.kind.as_str() {
            "identity" => ModelKind::Identity,
            "planar2d" => ModelKind::Planar2D,
            "radial_nd" => ModelKind::RadialNd {
                n: spec.n.ok_or_else(|| {
                    Error::Config("radial_nd model requires the dimension \"n\"".into())
                })?,
            },
            other => return Err(Error::Config(format!("unknown model kind \"{other}\""))),
        };
        CoefficientModel::new(kind, spec.epsilon)
    }
}

impl From<CoefficientModel> for ModelSpec {
    fn from(m: CoefficientModel) -> Self {
        let (kind, n) = match m.kind {
            ModelKind::Identity => ("identity", None),
            ModelKind::Planar2D => ("planar2d", None),
            ModelKind::RadialNd { n } => ("radial_nd", Some(n)),
        };
        ModelSpec {
            kind: kind.into(),
            epsilon: m.epsilon,
            n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn planar_matrix_on_axis() {
        let m = CoefficientModel::planar(0.1).unwrap();
        let a = m.evaluate_matrix(&[1.0, 0.0]).unwrap();
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.1]));
    }

    #[test]
    fn zero_epsilon_is_identity() {
        let m = CoefficientModel::planar(0.0).unwrap();
        let a = m.evaluate_matrix(&[0.3, 0.4]).unwrap();
        assert_eq!(a, DMatrix::identity(2, 2));
    }

    #[test]
    fn radial_matrix_on_axis() {
        let m = CoefficientModel::radial(3, 0.2).unwrap();
        let a = m.evaluate_matrix(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(a, DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 1.2])));
    }

    #[test]
    fn origin_and_ellipticity_errors() {
        let m = CoefficientModel::planar(0.3).unwrap();
        assert!(matches!(m.evaluate_matrix(&[0.0, 0.0]), Err(Error::OriginEvaluation)));
        assert!(matches!(
            m.quadratic_form(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::OriginEvaluation)
        ));
        assert!(matches!(CoefficientModel::planar(-1.0), Err(Error::Ellipticity(_))));
        assert!(matches!(CoefficientModel::radial(3, -1.5), Err(Error::Ellipticity(_))));
        assert!(CoefficientModel::identity().evaluate_matrix(&[0.0, 0.0]).is_ok());
        assert!(matches!(
            m.evaluate_matrix(&[1.0, 0.0, 0.0]),
            Err(Error::Dimension { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn quadratic_form_examples() {
        let m = CoefficientModel::planar(0.1).unwrap();
        assert_abs_diff_eq!(m.quadratic_form(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.1, epsilon = 1e-15);
        let m = CoefficientModel::planar(0.7).unwrap();
        let x = [0.6, -0.8];
        assert_abs_diff_eq!(m.quadratic_form(&x, &x).unwrap(), 1.0, epsilon = 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = CoefficientModel::planar(0.5).unwrap();
        // cross term (x₁ξ₂ − x₂ξ₁)² = (−1/2 − 1/2)² = 1
        assert_abs_diff_eq!(m.quadratic_form(&[s, s], &[s, -s]).unwrap(), 1.5, epsilon = 1e-14);
    }

    #[test]
    fn bounds_examples() {
        let b = |e: f64| CoefficientModel::planar(e).unwrap().ellipticity_bounds();
        assert_eq!(b(0.0), EllipticityBounds { lambda: 1.0, big_lambda: 1.0 });
        assert_eq!(b(0.5), EllipticityBounds { lambda: 1.0, big_lambda: 1.5 });
        let e = b(-0.3);
        assert_abs_diff_eq!(e.lambda, 0.7, epsilon = 1e-15);
        assert_eq!(e.big_lambda, 1.0);
    }

    #[test]
    fn bounds_are_attained() {
        for &eps in &[-0.3, 0.5] {
            let m = CoefficientModel::planar(eps).unwrap();
            let b = m.ellipticity_bounds();
            let radial = m.quadratic_form(&[1.0, 0.0], &[1.0, 0.0]).unwrap();
            let tangential = m.quadratic_form(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
            assert_abs_diff_eq!(radial.min(tangential), b.lambda, epsilon = 1e-15);
            assert_abs_diff_eq!(radial.max(tangential), b.big_lambda, epsilon = 1e-15);
        }
    }

    #[test]
    fn eigenvalues_within_bounds_on_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for model in [
            CoefficientModel::planar(0.4).unwrap(),
            CoefficientModel::planar(-0.6).unwrap(),
            CoefficientModel::radial(3, 0.25).unwrap(),
            CoefficientModel::radial(2, -0.2).unwrap(),
        ] {
            let b = model.ellipticity_bounds();
            let n = model.dimension().unwrap();
            for _ in 0..10_000 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                if x.iter().all(|c| *c == 0.0) {
                    continue;
                }
                let eig = model.evaluate_matrix(&x).unwrap().symmetric_eigenvalues();
                for ev in eig.iter() {
                    assert!(*ev >= b.lambda - 1e-12 && *ev <= b.big_lambda + 1e-12);
                }
            }
        }
    }

    #[test]
    fn wire_format() {
        let m: CoefficientModel =
            serde_json::from_str(r#"{"kind": "planar2d", "epsilon": 0.1}"#).unwrap();
        assert_eq!(m, CoefficientModel::planar(0.1).unwrap());
        let m: CoefficientModel =
            serde_json::from_str(r#"{"kind": "radial_nd", "epsilon": 0.2, "n": 3}"#).unwrap();
        assert_eq!(m.kind(), ModelKind::RadialNd { n: 3 });
        let m: CoefficientModel =
            serde_json::from_str(r#"{"kind": "identity", "epsilon": 0.9}"#).unwrap();
        assert_eq!(m.epsilon(), 0.0);
        assert!(serde_json::from_str::<CoefficientModel>(r#"{"kind": "planar2d", "epsilon": -2}"#).is_err());
        assert!(serde_json::from_str::<CoefficientModel>(r#"{"kind": "radial_nd", "epsilon": 0.1}"#).is_err());
        assert!(serde_json::from_str::<CoefficientModel>(r#"{"kind": "planar2d", "eps": 0.1}"#).is_err());
        let back: CoefficientModel =
            serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    fn point2() -> impl Strategy<Value = (f64, f64)> {
        (-5.0..5.0f64, -5.0..5.0f64).prop_filter("nonzero", |(a, b)| a.abs() + b.abs() > 1e-6)
    }

    proptest! {
        #[test]
        fn quadratic_form_matches_matrix(eps in -0.9..3.0f64, (x1, x2) in point2(), xi1 in -3.0..3.0f64, xi2 in -3.0..3.0f64) {
            let m = CoefficientModel::planar(eps).unwrap();
            let a = m.evaluate_matrix(&[x1, x2]).unwrap();
            let xi = nalgebra::DVector::from_vec(vec![xi1, xi2]);
            let direct = (xi.transpose() * &a * &xi)[(0, 0)];
            let q = m.quadratic_form(&[x1, x2], &[xi1, xi2]).unwrap();
            prop_assert!((q - direct).abs() <= 1e-12 * (1.0 + q.abs()));
        }

        #[test]
        fn planar_matrix_homogeneous_of_degree_zero(eps in -0.9..3.0f64, (x1, x2) in point2(), k in 0i32..8) {
            // Powers of two scale exactly, so the entries must agree bit for bit.
            let s = 2f64.powi(k - 4);
            let m = CoefficientModel::planar(eps).unwrap();
            prop_assert_eq!(m.evaluate_matrix(&[x1, x2]).unwrap(), m.evaluate_matrix(&[s * x1, s * x2]).unwrap());
            let r = CoefficientModel::radial(2, eps).unwrap();
            prop_assert_eq!(r.evaluate_matrix(&[x1, x2]).unwrap(), r.evaluate_matrix(&[s * x1, s * x2]).unwrap());
        }

        #[test]
        fn planar_trace(eps in -0.9..3.0f64, (x1, x2) in point2()) {
            let a = CoefficientModel::planar(eps).unwrap().evaluate_matrix(&[x1, x2]).unwrap();
            prop_assert!((a.trace() - (2.0 + eps)).abs() < 1e-13);
        }
    }
}
