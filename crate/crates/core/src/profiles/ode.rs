//! Shooting the angular equation off the degenerate equilibrium `g(0) = g'(0) = 0`.
//!
//! The trivial branch `g ≡ 0` also satisfies the initial data; the nontrivial branch is
//! selected by starting from its power series. Balancing `(1+ε) g''` against `g^p` for
//! `g ≈ c θ^m` forces `m − 2 = m p`, i.e. `m = β`, and `(1+ε) c β(β−1) = c^p`. The series
//! continues in powers of `θ²`; the `θ^{β+2}` term is included so that the truncation error at
//! the start offset stays well below the integrator's.
//!
//! The profile is symmetric about its peak, where `g'` changes sign transversally, so the
//! integration runs to the peak and the second half is mirrored. Near `θ = α` the solution
//! returns to zero tangentially and `g^p` is not Lipschitz there, which would degrade a
//! zero-crossing search.

use std::f64::consts::TAU;

use super::{check_parameters, HomogeneousProfile, Provenance};
use crate::error::{Error, Result};
use crate::penalty::reaction;

/// `c₀ = [(1+ε) β(β−1)]^{−1/(1−p)}`, the leading lift-off coefficient.
pub fn lift_off_coefficient(p: f64, epsilon: f64) -> f64 {
    let beta = crate::scaling_exponent(p);
    ((1.0 + epsilon) * beta * (beta - 1.0)).powf(-1.0 / (1.0 - p))
}

struct AngularOde {
    p: f64,
    eps: f64,
    stiffness: f64,
}

impl AngularOde {
    fn new(p: f64, eps: f64, beta: f64) -> Self {
        Self {
            p,
            eps,
            stiffness: beta * (beta + eps),
        }
    }

    #[inline]
    fn accel(&self, g: f64) -> f64 {
        (reaction(g, self.p) - self.stiffness * g) / (1.0 + self.eps)
    }

    fn rk4(&self, (g, dg): (f64, f64), h: f64) -> (f64, f64) {
        let k1 = (dg, self.accel(g));
        let k2 = (dg + 0.5 * h * k1.1, self.accel(g + 0.5 * h * k1.0));
        let k3 = (dg + 0.5 * h * k2.1, self.accel(g + 0.5 * h * k2.0));
        let k4 = (dg + h * k3.1, self.accel(g + h * k3.0));
        (
            g + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            dg + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        )
    }
}

/// Two-term lift-off series `g ≈ c θ^β (1 + d θ²)`.
struct LiftOff {
    beta: f64,
    c: f64,
    d: f64,
}

impl LiftOff {
    fn new(p: f64, eps: f64, beta: f64) -> Self {
        let c = lift_off_coefficient(p, eps);
        let d = -beta * (beta + eps)
            / ((1.0 + eps) * ((beta + 2.0) * (beta + 1.0) - p * beta * (beta - 1.0)));
        Self { beta, c, d }
    }

    fn state(&self, th: f64) -> (f64, f64) {
        if th <= 0.0 {
            return (0.0, 0.0);
        }
        let b = self.beta;
        let g = self.c * th.powf(b) * (1.0 + self.d * th * th);
        let dg = self.c * th.powf(b - 1.0) * (b + self.d * (b + 2.0) * th * th);
        (g, dg)
    }
}

/// Integrates from `10·h` with `n_steps` steps of `h`, returning every state. If `n_steps` is
/// `None`, stops after the step on which `g'` turns nonpositive.
fn shoot(ode: &AngularOde, series: &LiftOff, h: f64, n_steps: Option<usize>) -> Result<Vec<(f64, f64)>> {
    let mut states: Vec<(f64, f64)> = (0..=10).map(|k| series.state(k as f64 * h)).collect();
    let mut y = states[10];
    let mut k = 10usize;
    loop {
        if let Some(n) = n_steps {
            if k >= n {
                break;
            }
        }
        y = ode.rk4(y, h);
        k += 1;
        states.push(y);
        if n_steps.is_none() && y.1 <= 0.0 {
            break;
        }
        if k as f64 * h > TAU {
            return Err(Error::NonReturn);
        }
    }
    Ok(states)
}

/// Solves for the sub-step `τ ∈ (0, h]` at which `g'` vanishes, by Newton on the RK4 map.
fn locate_peak(ode: &AngularOde, from: (f64, f64), h: f64) -> f64 {
    let mut tau = h * 0.5;
    for _ in 0..50 {
        let (g, dg) = ode.rk4(from, tau);
        let next = tau - dg / ode.accel(g);
        let next = next.clamp(0.0, 2.0 * h);
        if (next - tau).abs() < 1e-16 {
            return next;
        }
        tau = next;
    }
    tau
}

/// Shoots the angular equation with a fourth-order Runge–Kutta step no larger than `step`.
///
/// The returned samples are uniform in `θ` on `[0, α]`; the step is shortened slightly so
/// that the peak `α/2` falls on a node.
pub fn ode_integrate(p: f64, epsilon: f64, step: f64) -> Result<HomogeneousProfile> {
    let beta = check_parameters(p, epsilon)?;
    if !(step > 0.0 && step <= 1e-2) {
        return Err(Error::ParameterRange(format!("step must lie in (0, 1e-2], got {step}")));
    }
    let ode = AngularOde::new(p, epsilon, beta);
    let series = LiftOff::new(p, epsilon, beta);

    let mut h = step;
    let mut peak = {
        let states = shoot(&ode, &series, h, None)?;
        let n = states.len() - 1;
        (n - 1) as f64 * h + locate_peak(&ode, states[n - 1], h)
    };
    // Refit the step so the peak is a node; the start offset moves with it, so iterate.
    let mut states = Vec::new();
    for _ in 0..4 {
        let m = (peak / step).ceil().max(11.0) as usize;
        h = peak / m as f64;
        states = shoot(&ode, &series, h, Some(m))?;
        let last = states[m];
        let correction = -last.1 / ode.accel(last.0);
        let next = m as f64 * h + correction;
        let done = (next - peak).abs() < 1e-14;
        peak = next;
        if done {
            break;
        }
    }
    let m = states.len() - 1;
    let alpha = 2.0 * peak;

    let mut theta = Vec::with_capacity(2 * m + 1);
    let mut g = Vec::with_capacity(2 * m + 1);
    let mut gprime = Vec::with_capacity(2 * m + 1);
    for (k, &(gk, dk)) in states.iter().enumerate() {
        theta.push(k as f64 * h);
        g.push(gk);
        gprime.push(if k == m { 0.0 } else { dk });
    }
    for k in (0..m).rev() {
        theta.push(alpha - k as f64 * h);
        g.push(states[k].0);
        gprime.push(-states[k].1);
    }
    *theta.last_mut().unwrap() = alpha;

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
        provenance: Provenance::OdeShooting,
    })
}
