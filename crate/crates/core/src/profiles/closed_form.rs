use std::f64::consts::TAU;

use super::{HomogeneousProfile, Provenance};
use crate::error::{Error, Result};

const SAMPLES: usize = 4097;

/// `a_ε = 1/(2(2+ε))`, the amplitude of the `p = 0` profile.
pub fn a_eps(epsilon: f64) -> f64 {
    1.0 / (2.0 * (2.0 + epsilon))
}

/// `ω_ε = √(2(2+ε)/(1+ε))`, the angular frequency of the `p = 0` profile.
pub fn omega_eps(epsilon: f64) -> f64 {
    (2.0 * (2.0 + epsilon) / (1.0 + epsilon)).sqrt()
}

/// `g(θ) = a_ε (1 − cos ω_ε θ)` on `(0, 2π/ω_ε)`: the homogeneous obstacle-problem solution
/// `v = r² g(θ)` of `L v = 1` in `{v > 0}`.
pub fn closed_form_p0(epsilon: f64) -> Result<HomogeneousProfile> {
    if !(epsilon.is_finite() && 1.0 + epsilon > 0.0 && 2.0 + epsilon > 0.0) {
        return Err(Error::ParameterRange(format!(
            "closed form needs 1 + epsilon > 0, got epsilon = {epsilon}"
        )));
    }
    let a = a_eps(epsilon);
    let w = omega_eps(epsilon);
    let alpha = TAU / w;
    let theta: Vec<f64> = (0..SAMPLES)
        .map(|k| alpha * k as f64 / (SAMPLES - 1) as f64)
        .collect();
    let g = theta.iter().map(|t| a * (1.0 - (w * t).cos())).collect();
    let gprime = theta.iter().map(|t| a * w * (w * t).sin()).collect();
    Ok(HomogeneousProfile {
        p: 0.0,
        epsilon,
        beta: 2.0,
        a_eps: Some(a),
        omega_eps: Some(w),
        alpha,
        theta,
        g,
        gprime,
        provenance: Provenance::ClosedForm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn flat_case_is_half_plane() {
        let prof = closed_form_p0(0.0).unwrap();
        assert_eq!(prof.a_eps, Some(0.25));
        assert_eq!(prof.omega_eps, Some(2.0));
        assert_eq!(prof.alpha, PI);
        for th in [0.1, 0.7, 1.5, 2.9] {
            assert!((prof.eval(th) - th.sin().powi(2) / 2.0).abs() < 1e-15);
        }
        assert_eq!(prof.eval(3.5), 0.0);
    }

    #[test]
    fn reference_values() {
        // ε = 0.5: a = 1/5, ω² = 10/3.
        let p = closed_form_p0(0.5).unwrap();
        assert!((p.a_eps.unwrap() - 0.2).abs() < 1e-15);
        assert!((p.omega_eps.unwrap() - 1.825_741_858_350_553_8).abs() < 1e-12);
        assert!((p.alpha - 3.441_442_325_727_285_5).abs() < 1e-9);
        // ε = −0.3: ω² = 34/7.
        let p = closed_form_p0(-0.3).unwrap();
        assert!((p.omega_eps.unwrap() - (34.0f64 / 7.0).sqrt()).abs() < 1e-15);
        assert!((p.alpha - 2.850_948_878_317_44).abs() < 1e-9);
        assert!(closed_form_p0(-1.0).is_err());
    }

    #[test]
    fn solves_angular_equation_exactly() {
        for eps in [-0.3, 0.0, 0.1, 0.5] {
            let prof = closed_form_p0(eps).unwrap();
            let (a, w) = (prof.a_eps.unwrap(), prof.omega_eps.unwrap());
            for &th in prof.theta.iter().skip(1).take(prof.theta.len() - 2) {
                let g = a * (1.0 - (w * th).cos());
                let g2 = a * w * w * (w * th).cos();
                let lhs = 2.0 * (2.0 + eps) * g + (1.0 + eps) * g2;
                assert!((lhs - 1.0).abs() < 1e-13);
            }
        }
    }
}
