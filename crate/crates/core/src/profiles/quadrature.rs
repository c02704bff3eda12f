//! Arc length of a positivity arc from the separated first integral.
//!
//! On the rising half `g' = √R(g)/√(1+ε)` with `R(g) = (2/(p+1)) g^{p+1} − β(β+ε) g²`, so
//! `α = 2√(1+ε) ∫₀^{g_max} dg/√R(g)` where `R(g_max) = 0`. Both endpoints are singular:
//! `R ~ g^{p+1}` at zero and `R` has a simple root at `g_max`. The integral is split at
//! `g_max/2`; the lower part is mapped by `g = g_max x^β`, which makes the integrand bounded,
//! and the upper part by `g = g_max (1 − y²)`, which removes the square-root singularity.

use super::{check_parameters, HomogeneousProfile, Provenance};
use crate::error::{Error, Result};

const TOLERANCE: f64 = 1e-13;

/// `g_max = [2/((p+1) β(β+ε))]^{1/(1−p)}`, the root of the radicand (`2a_ε` when `p = 0`).
pub fn peak_value(p: f64, epsilon: f64) -> f64 {
    let beta = crate::scaling_exponent(p);
    (2.0 / ((p + 1.0) * beta * (beta + epsilon))).powf(1.0 / (1.0 - p))
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = h * XGK[k];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[k] * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod quadrature; returns the integral and its error estimate.
pub fn gauss_kronrod_adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_intervals: usize) -> (f64, f64) {
    let mut pieces = vec![(a, b, gk15(&f, a, b))];
    loop {
        let total: f64 = pieces.iter().map(|p| p.2 .0).sum();
        let err: f64 = pieces.iter().map(|p| p.2 .1).sum();
        if err <= tol * total.abs().max(1e-300) || pieces.len() >= max_intervals {
            return (total, err);
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .map(|(k, _)| k)
            .unwrap();
        let (lo, hi, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        pieces.push((lo, mid, gk15(&f, lo, mid)));
        pieces.push((mid, hi, gk15(&f, mid, hi)));
    }
}

struct Radicand {
    p: f64,
    beta: f64,
    a: f64,
    g_max: f64,
}

impl Radicand {
    fn new(p: f64, epsilon: f64, beta: f64) -> Self {
        Self {
            p,
            beta,
            a: 2.0 / (p + 1.0),
            g_max: peak_value(p, epsilon),
        }
    }

    /// Integrand of the lower half in `x`, `g = g_max x^β`.
    fn lower(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let g = self.g_max * x.powf(self.beta);
        // R(g) = g^{p+1} (A − B g^{1−p}) and B g_max^{1−p} = A, so the bracket is A(1 − x²).
        let bracket = self.a * (1.0 - x * x);
        let jac = self.g_max * self.beta * x.powf(self.beta - 1.0);
        jac / (g.powf(self.p + 1.0) * bracket).sqrt()
    }

    /// Integrand of the upper half in `y`, `g = g_max (1 − y²)`.
    fn upper(&self, y: f64) -> f64 {
        if y <= 0.0 {
            let g = self.g_max;
            return 2.0 * g / (g.powf(self.p + 1.0) * self.a * (1.0 - self.p)).sqrt();
        }
        let g = self.g_max * (1.0 - y * y);
        let bracket = -self.a * ((1.0 - self.p) * (-y * y).ln_1p()).exp_m1();
        2.0 * self.g_max * y / (g.powf(self.p + 1.0) * bracket).sqrt()
    }

    fn x_of(&self, g: f64) -> f64 {
        (g / self.g_max).powf(1.0 / self.beta)
    }

    fn y_of(&self, g: f64) -> f64 {
        (1.0 - g / self.g_max).max(0.0).sqrt()
    }

    /// `∫₀^g ds/√R(s)`.
    fn partial(&self, g: f64) -> Result<f64> {
        let half = 0.5 * self.g_max;
        let integrate = |f: &dyn Fn(f64) -> f64, a: f64, b: f64| -> Result<f64> {
            if b <= a {
                return Ok(0.0);
            }
            let (v, err) = gauss_kronrod_adaptive(f, a, b, TOLERANCE, 2000);
            if err > 1e-10 * v.abs().max(1e-300) {
                return Err(Error::Quadrature {
                    achieved: err,
                    tolerance: 1e-10 * v.abs(),
                });
            }
            Ok(v)
        };
        let low = integrate(&|x| self.lower(x), 0.0, self.x_of(g.min(half)))?;
        if g <= half {
            return Ok(low);
        }
        let high = integrate(&|y| self.upper(y), self.y_of(g), self.y_of(half))?;
        Ok(low + high)
    }
}

/// Positivity-arc length `α = 2√(1+ε) ∫₀^{g_max} dg/√R(g)` by adaptive quadrature.
pub fn arc_length_quadrature(p: f64, epsilon: f64) -> Result<f64> {
    let beta = check_parameters(p, epsilon)?;
    let rad = Radicand::new(p, epsilon, beta);
    Ok(2.0 * (1.0 + epsilon).sqrt() * rad.partial(rad.g_max)?)
}

/// Profile tabulated by inverting `θ(g) = √(1+ε) ∫₀^g ds/√R(s)` on the rising half, mirrored
/// about the peak. Levels cluster at both ends of `[0, g_max]`.
pub fn quadrature_profile(p: f64, epsilon: f64, levels: usize) -> Result<HomogeneousProfile> {
    let beta = check_parameters(p, epsilon)?;
    if levels < 8 {
        return Err(Error::ParameterRange(format!("need at least 8 levels, got {levels}")));
    }
    let rad = Radicand::new(p, epsilon, beta);
    let scale = (1.0 + epsilon).sqrt();
    let b = beta * (beta + epsilon);
    let mut rising = Vec::with_capacity(levels + 1);
    for k in 0..=levels {
        let s = std::f64::consts::PI * k as f64 / levels as f64;
        let g = if k == levels { rad.g_max } else { rad.g_max * 0.5 * (1.0 - s.cos()) };
        let theta = scale * rad.partial(g)?;
        let r = (rad.a * g.powf(p + 1.0) - b * g * g).max(0.0);
        let dg = if k == levels { 0.0 } else { r.sqrt() / scale };
        rising.push((theta, g, dg));
    }
    let alpha = 2.0 * rising[levels].0;
    let mut theta = Vec::with_capacity(2 * levels + 1);
    let mut g = Vec::with_capacity(2 * levels + 1);
    let mut gprime = Vec::with_capacity(2 * levels + 1);
    for &(t, v, d) in &rising {
        theta.push(t);
        g.push(v);
        gprime.push(d);
    }
    for &(t, v, d) in rising[..levels].iter().rev() {
        theta.push(alpha - t);
        g.push(v);
        gprime.push(-d);
    }
    Ok(HomogeneousProfile {
        p,
        epsilon,
        beta,
        a_eps: (p == 0.0).then(|| super::a_eps(epsilon)),
        omega_eps: (p == 0.0).then(|| super::omega_eps(epsilon)),
        alpha,
        theta,
        g,
        gprime,
        provenance: Provenance::Quadrature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::omega_eps;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn kronrod_on_smooth_and_endpoint_singular() {
        let (v, _) = gauss_kronrod_adaptive(|x: f64| x.exp(), 0.0, 1.0, 1e-14, 100);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
        let (v, _) = gauss_kronrod_adaptive(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-12, 2000);
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn p0_matches_arcsine_solution() {
        for eps in [-0.3, 0.0, 0.1, 0.5, 2.0] {
            let a = arc_length_quadrature(0.0, eps).unwrap();
            assert!((a - TAU / omega_eps(eps)).abs() < 1e-8, "eps {eps}: {a}");
        }
        assert!((arc_length_quadrature(0.0, 0.0).unwrap() - PI).abs() < 1e-12);
    }

    #[test]
    fn peak_is_twice_amplitude_for_obstacle_case() {
        for eps in [-0.3, 0.0, 0.5] {
            assert!((peak_value(0.0, eps) - 2.0 * crate::profiles::a_eps(eps)).abs() < 1e-15);
        }
    }

    #[test]
    fn tabulated_profile_satisfies_first_integral() {
        let prof = quadrature_profile(0.5, 0.2, 256).unwrap();
        assert!((prof.alpha - arc_length_quadrature(0.5, 0.2).unwrap()).abs() < 1e-12);
        let n = prof.theta.len();
        assert!(prof.theta.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(prof.g[0], 0.0);
        assert!((prof.g[n - 1]).abs() < 1e-15);
    }
}
