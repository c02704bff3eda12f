//! Exact homogeneous solutions of the discrete scheme on log grids.
//!
//! On a log grid with homogeneous penalty scaling the discrete equations commute with
//! `v(r, θ) ↦ λ^{−β} v(λr, θ)` for `λ` a power of the radial ratio, so `v = (r/r_max)^β g_h(θ)`
//! solves them exactly once `g_h` solves a periodic problem in `θ` alone. Using `g_h` as outer
//! data removes the `O(h²)` mismatch between the continuous profile and the scheme, which would
//! otherwise seed lower-degree modes that grow relative to `r^β` towards the origin.

use nalgebra::{DMatrix, DVector};

use super::config::{PenaltyScaling, SolveConfig};
use crate::error::{Error, Result};
use crate::penalty::PenaltyFamily;
use crate::polar::{row_stencil, RadialSpacing};

const MAX_NEWTON: usize = 100;

/// `g_h` at the angular nodes, symmetric about the node nearest `center`, clamped at zero. The
/// initial guess is the configured continuous profile with its bisector moved to that node.
pub fn discrete_homogeneous_trace(config: &SolveConfig, center: f64) -> Result<Vec<f64>> {
    config.validate()?;
    let grid = &config.grid;
    if grid.spacing() != RadialSpacing::Log {
        return Err(Error::Config("discrete homogeneous data needs a log grid".into()));
    }
    if config.penalty.scaling != PenaltyScaling::Homogeneous {
        return Err(Error::Config("discrete homogeneous data needs homogeneous penalty scaling".into()));
    }
    let profile = config
        .boundary
        .profile(config.p, &config.model)?
        .ok_or_else(|| Error::Config("boundary data carries no homogeneous profile".into()))?;
    let beta = config.beta();
    let nt = grid.n_theta();
    let nr = grid.n_r();
    let st = row_stencil(grid, config.model.polar_coefficients(), nr - 1);
    let q = grid.r_values()[nr - 1] / grid.r_values()[nr - 2];
    let diag = st.lower * q.powf(-beta) + st.upper * q.powf(beta) + st.center;
    let side = st.side;

    let dth = grid.dtheta();
    let jc = ((center.rem_euclid(std::f64::consts::TAU) / dth).round() as usize) % nt;
    // Reduced unknowns: the node at distance k from jc, k = 0..=nt/2.
    let m = nt / 2 + 1;
    let reduce = |j: isize| {
        let d = (j - jc as isize).rem_euclid(nt as isize) as usize;
        d.min(nt - d)
    };
    let mut g: Vec<f64> = (0..m)
        .map(|k| profile.eval(0.5 * profile.alpha + k as f64 * dth))
        .collect();

    // The angular problem is autonomous: once δ exceeds the profile's peak its only solution is
    // g = 0. Continuation therefore starts well below the peak.
    let delta_final = *config.penalty.schedule.last().expect("validated schedule");
    let mut deltas = Vec::new();
    let mut d = 0.1 * profile.max_value();
    while d > delta_final {
        deltas.push(d);
        d /= 3.0;
    }
    deltas.push(delta_final);
    for delta in deltas {
        let phi = PenaltyFamily::new(delta, config.p)?;
        let residual = |g: &[f64]| -> Vec<f64> {
            (0..m)
                .map(|k| {
                    let j = (jc + k) as isize;
                    diag * g[k] + side * (g[reduce(j - 1)] + g[reduce(j + 1)]) - phi.value(g[k])
                })
                .collect()
        };
        let norm = |f: &[f64]| f.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = diag.abs() * g.iter().cloned().fold(0.0, f64::max);
        let tol = 1e-13 * scale.max(1.0);
        let mut f = residual(&g);
        let mut iterations = 0;
        while f.iter().fold(0.0f64, |a, x| a.max(x.abs())) > tol {
            iterations += 1;
            if iterations > MAX_NEWTON {
                return Err(Error::Config(format!(
                    "discrete homogeneous profile did not converge at delta = {delta:e}"
                )));
            }
            let mut jac = DMatrix::<f64>::zeros(m, m);
            for k in 0..m {
                let j = (jc + k) as isize;
                jac[(k, k)] += diag - phi.derivative(g[k]);
                jac[(k, reduce(j - 1))] += side;
                jac[(k, reduce(j + 1))] += side;
            }
            let rhs = DVector::from_iterator(m, f.iter().map(|x| -x));
            let du = jac
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::LinearSolve("singular angular Jacobian".into()))?;
            let n0 = norm(&f);
            let mut lambda = 1.0;
            loop {
                let trial: Vec<f64> = g.iter().zip(du.iter()).map(|(a, d)| a + lambda * d).collect();
                let ft = residual(&trial);
                if norm(&ft) < (1.0 - 1e-4 * lambda) * n0 {
                    g = trial;
                    f = ft;
                    break;
                }
                lambda *= 0.5;
                if lambda < 1e-6 {
                    return Err(Error::Config(format!(
                        "discrete homogeneous profile: line search stalled at delta = {delta:e}, residual {n0:e} after {iterations}"
                    )));
                }
            }
        }
    }
    let peak = g.iter().cloned().fold(0.0, f64::max);
    if peak < 0.5 * profile.max_value() {
        return Err(Error::Config(format!(
            "discrete homogeneous profile collapsed towards g = 0 (peak {peak:e}, continuous {:e})",
            profile.max_value()
        )));
    }
    // The penalized profile undershoots by O(δ) next to the free boundary; data must be
    // nonnegative.
    Ok((0..nt).map(|j| g[reduce(j as isize)].max(0.0)).collect())
}
