//! Damped Newton iteration for `F(u) = A u + b − φ_δ(u) = 0`, with a relaxed fixed-point
//! fallback.
//!
//! The Jacobian `A − diag φ_δ'(u)` keeps the M-matrix sign pattern because `φ_δ' ≥ 0`, and its
//! sparsity never changes, so one symbolic LU factorization serves every iteration.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::assemble::DiscreteOperator;
use super::config::{PenaltyScaling, Tolerances};
use crate::error::{Error, Result};
use crate::penalty::PenaltyFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Newton,
    FixedPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub stage: usize,
    pub delta: f64,
    pub iteration: usize,
    pub method: Method,
    /// Sup norm of the residual after the step.
    pub residual: f64,
    /// Accepted step length (relaxation factor for the fixed-point method).
    pub step: f64,
}

/// Smoothed reaction with a per-unknown smoothing scale.
pub(crate) struct Penalized {
    family: PenaltyFamily,
    local_delta: Vec<f64>,
}

impl Penalized {
    pub(crate) fn new(op: &DiscreteOperator, p: f64, beta: f64, delta: f64, scaling: PenaltyScaling) -> Result<Self> {
        let family = PenaltyFamily::new(delta, p)?;
        let grid = op.grid();
        let nt = grid.n_theta();
        let r = grid.r_values();
        let local_delta = (0..op.n_unknowns())
            .map(|k| scaling.local_delta(delta, r[k / nt + 1], grid.r_max(), beta))
            .collect();
        Ok(Self { family, local_delta })
    }

    fn value(&self, k: usize, s: f64) -> f64 {
        self.family.value_at_scale(s, self.local_delta[k])
    }

    fn derivative(&self, k: usize, s: f64) -> f64 {
        self.family.derivative_at_scale(s, self.local_delta[k])
    }
}

pub(crate) struct StageSolver<'a> {
    op: &'a DiscreteOperator,
    symbolic: SymbolicLu<usize>,
    tol: Tolerances,
}

pub(crate) struct StageResult {
    pub residual: f64,
    pub newton_iterations: usize,
    pub fixed_point_iterations: usize,
}

fn sup(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

const MIN_STEP: f64 = 1.0 / 1_048_576.0;

impl<'a> StageSolver<'a> {
    pub(crate) fn new(op: &'a DiscreteOperator, tol: Tolerances) -> Result<Self> {
        let symbolic = SymbolicLu::try_new(op.matrix().symbolic())
            .map_err(|e| Error::LinearSolve(format!("symbolic factorization: {e:?}")))?;
        Ok(Self { op, symbolic, tol })
    }

    /// `F(u) = A u + b − φ(u)`.
    pub(crate) fn residual(&self, u: &[f64], phi: &Penalized) -> Vec<f64> {
        let mut f = vec![0.0; u.len()];
        self.op.apply_affine(u, &mut f);
        f.par_iter_mut()
            .enumerate()
            .for_each(|(k, x)| *x -= phi.value(k, u[k]));
        f
    }

    /// Solves `(A − diag(shift)) x = rhs`.
    fn linear_solve(&self, shift: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
        let mut jac = self.op.matrix().clone();
        {
            let vals = jac.val_mut();
            for (&slot, &s) in self.op.diagonal_slots().iter().zip(shift) {
                vals[slot] -= s;
            }
        }
        let lu = Lu::try_new_with_symbolic(self.symbolic.clone(), jac.as_ref())
            .map_err(|e| Error::LinearSolve(format!("numeric factorization: {e:?}")))?;
        let mut x = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        lu.solve_in_place(x.as_mut());
        let out: Vec<f64> = (0..rhs.len()).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolve("non-finite solution of the Newton system".into()));
        }
        Ok(out)
    }

    /// Drives `u` to `‖F(u)‖∞ ≤ residual_tol`; on failure returns the reason, leaving the last
    /// iterate in `u`.
    pub(crate) fn solve(
        &self,
        u: &mut Vec<f64>,
        phi: &Penalized,
        stage: usize,
        log: &mut Vec<IterationRecord>,
    ) -> std::result::Result<StageResult, String> {
        let delta = phi.family.delta;
        let tol = self.tol.residual_tol;
        let mut f = self.residual(u, phi);
        let mut res = sup(&f);
        let mut newton_iterations = 0;
        let mut newton_failure = None;

        while res > tol {
            if newton_iterations >= self.tol.max_iters {
                newton_failure = Some(format!("Newton reached {} iterations", self.tol.max_iters));
                break;
            }
            newton_iterations += 1;
            let shift: Vec<f64> = u.iter().enumerate().map(|(k, &s)| phi.derivative(k, s)).collect();
            let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
            let du = match self.linear_solve(&shift, &rhs) {
                Ok(du) => du,
                Err(e) => {
                    newton_failure = Some(e.to_string());
                    break;
                }
            };
            let norm = l2(&f);
            let mut lambda = 1.0;
            let accepted = loop {
                let trial: Vec<f64> = u.iter().zip(&du).map(|(a, d)| a + lambda * d).collect();
                let ft = self.residual(&trial, phi);
                if l2(&ft) <= (1.0 - 1e-4 * lambda) * norm || sup(&ft) <= tol {
                    break Some((trial, ft));
                }
                lambda *= 0.5;
                if lambda < MIN_STEP {
                    break None;
                }
            };
            match accepted {
                Some((trial, ft)) => {
                    *u = trial;
                    f = ft;
                    res = sup(&f);
                    log.push(IterationRecord {
                        stage,
                        delta,
                        iteration: newton_iterations,
                        method: Method::Newton,
                        residual: res,
                        step: lambda,
                    });
                }
                None => {
                    newton_failure = Some(format!("line search stalled at residual {res:e}"));
                    break;
                }
            }
        }
        if res <= tol {
            return Ok(StageResult {
                residual: res,
                newton_iterations,
                fixed_point_iterations: 0,
            });
        }

        // Relaxed fixed point: A v = φ(u) − b, u ← (1−ω) u + ω v.
        let omega = self.tol.damping;
        let mut fixed_point_iterations = 0;
        while res > tol && fixed_point_iterations < self.tol.max_iters {
            fixed_point_iterations += 1;
            let rhs: Vec<f64> = u
                .iter()
                .enumerate()
                .map(|(k, &s)| phi.value(k, s) - self.op.boundary_rhs()[k])
                .collect();
            let v = self
                .linear_solve(&vec![0.0; u.len()], &rhs)
                .map_err(|e| format!("{}; fixed point: {e}", newton_failure.clone().unwrap_or_default()))?;
            for (a, b) in u.iter_mut().zip(&v) {
                *a = (1.0 - omega) * *a + omega * b;
            }
            f = self.residual(u, phi);
            res = sup(&f);
            log.push(IterationRecord {
                stage,
                delta,
                iteration: newton_iterations + fixed_point_iterations,
                method: Method::FixedPoint,
                residual: res,
                step: omega,
            });
        }
        if res <= tol {
            Ok(StageResult {
                residual: res,
                newton_iterations,
                fixed_point_iterations,
            })
        } else {
            Err(format!(
                "{}; fixed-point fallback ended at residual {res:e} after {fixed_point_iterations} iterations",
                newton_failure.unwrap_or_else(|| "Newton failed".into())
            ))
        }
    }
}
