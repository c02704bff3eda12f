//! Penalized finite-difference solver for `L v = v^p` on the unit disk.
//!
//! The reaction is replaced by `φ_δ` and the smoothing scale is driven down a schedule, each
//! stage warm-started from the previous one. The disk is truncated at `r_min`.

mod assemble;
mod config;
mod free_boundary;
mod homogeneous;
mod newton;
mod pin;

use serde::{Deserialize, Serialize};

pub use assemble::{assemble_operator, DiscreteOperator, MMatrixReport};
pub use config::{
    BoundaryData, InnerBoundary, PenaltyConfig, PenaltyScaling, ProfileMethod, SolveConfig, Tolerances,
    MAX_INNER_RADIUS,
};
pub use free_boundary::{extract_free_boundary, positivity_mask, positivity_threshold, FreeBoundaryRow};
pub use homogeneous::discrete_homogeneous_trace;
pub use newton::{IterationRecord, Method};
pub use pin::{origin_mismatch, solve_pinned, PinStep, PinnedSolution};

use crate::coefficients::CoefficientModel;
use crate::error::{Error, Result};
use crate::penalty::reaction;
use crate::polar::{apply_polar, FieldMeta, PolarField, Quantity};
use newton::{Penalized, StageSolver};

/// Undershoot below which a warning is attached to the solution.
pub const UNDERSHOOT_WARNING: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    pub delta: f64,
    pub residual: f64,
    pub newton_iterations: usize,
    pub fixed_point_iterations: usize,
    /// Smallest value of the stage iterate, before clamping.
    pub min_value: f64,
}

/// Diagnostics of a failed stage. The partial field holds the last iterate.
#[derive(Debug, Clone)]
pub struct SolveFailure {
    pub stage: usize,
    pub delta: f64,
    pub reason: String,
    pub log: Vec<IterationRecord>,
    pub stages: Vec<StageReport>,
    pub partial: Option<PolarField>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// Clamped to be nonnegative.
    pub field: PolarField,
    pub stages: Vec<StageReport>,
    pub positivity: Vec<bool>,
    pub positivity_fraction: f64,
    pub free_boundary: Vec<FreeBoundaryRow>,
    pub log: Vec<IterationRecord>,
    pub warnings: Vec<String>,
    /// Each stage ended at a residual no larger than the previous stage's (or the tolerance).
    pub monotone_continuation: bool,
    pub delta_final: f64,
    pub penalty_scaling: PenaltyScaling,
}

impl Solution {
    pub fn residual_report(&self, model: &CoefficientModel, p: f64) -> Result<ResidualReport> {
        residual_check(&self.field, model, p, self.delta_final, self.penalty_scaling)
    }
}

fn field_meta(config: &SolveConfig) -> FieldMeta {
    FieldMeta::new(Quantity::V)
        .with_p(config.p)
        .with_epsilon(config.model.epsilon())
}

fn failure(stage: usize, delta: f64, reason: String, log: Vec<IterationRecord>, stages: Vec<StageReport>, partial: Option<PolarField>) -> Error {
    Error::NonConvergence(Box::new(SolveFailure {
        stage,
        delta,
        reason,
        log,
        stages,
        partial,
    }))
}

/// One penalized solve at smoothing scale `delta`, starting from the homogeneous extension
/// `(r/r_max)^β g(θ)` of the boundary data.
pub fn solve_penalized(config: &SolveConfig, delta: f64) -> Result<PolarField> {
    let op = assemble_operator(config)?;
    let solver = StageSolver::new(&op, config.tolerances)?;
    let phi = Penalized::new(&op, config.p, config.beta(), delta, config.penalty.scaling)?;
    let mut u = op.homogeneous_extension(config.beta());
    let mut log = Vec::new();
    solver.solve(&mut u, &phi, 0, &mut log).map_err(|reason| {
        let partial = PolarField::new(config.grid.clone(), op.expand(&u), field_meta(config)).ok();
        failure(0, delta, reason, log.clone(), Vec::new(), partial)
    })?;
    PolarField::new(config.grid.clone(), op.expand(&u), field_meta(config))
}

/// Runs the penalty schedule, clamps the result and extracts the free boundary.
pub fn solve(config: &SolveConfig) -> Result<Solution> {
    let op = assemble_operator(config)?;
    let solver = StageSolver::new(&op, config.tolerances)?;
    let beta = config.beta();
    let mut u = op.homogeneous_extension(beta);
    let mut log = Vec::new();
    let mut stages: Vec<StageReport> = Vec::new();
    let mut warnings = Vec::new();

    for (stage, &delta) in config.penalty.schedule.iter().enumerate() {
        let phi = Penalized::new(&op, config.p, beta, delta, config.penalty.scaling)?;
        match solver.solve(&mut u, &phi, stage, &mut log) {
            Ok(res) => {
                let min_value = u.iter().cloned().fold(f64::INFINITY, f64::min);
                if min_value < -UNDERSHOOT_WARNING {
                    warnings.push(format!("stage {stage} (delta = {delta:e}): undershoot, min v = {min_value:e}"));
                }
                stages.push(StageReport {
                    stage,
                    delta,
                    residual: res.residual,
                    newton_iterations: res.newton_iterations,
                    fixed_point_iterations: res.fixed_point_iterations,
                    min_value,
                });
            }
            Err(reason) => {
                let partial = PolarField::new(config.grid.clone(), op.expand(&u), field_meta(config)).ok();
                return Err(failure(stage, delta, reason, log, stages, partial));
            }
        }
    }

    let tol = config.tolerances.residual_tol;
    let monotone_continuation = stages
        .windows(2)
        .all(|w| w[1].residual <= w[0].residual.max(tol));
    let values: Vec<f64> = op.expand(&u).into_iter().map(|v| v.max(0.0)).collect();
    let field = PolarField::new(config.grid.clone(), values, field_meta(config))?;
    let kappa = config.free_boundary_kappa;
    let positivity = positivity_mask(&field, kappa);
    let positivity_fraction = positivity.iter().filter(|m| **m).count() as f64 / positivity.len() as f64;
    let free_boundary = extract_free_boundary(&field, beta, kappa);
    Ok(Solution {
        field,
        stages,
        positivity,
        positivity_fraction,
        free_boundary,
        log,
        warnings,
        monotone_continuation,
        delta_final: *config.penalty.schedule.last().expect("validated schedule"),
        penalty_scaling: config.penalty.scaling,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `‖L_h v − v^p‖` over interior nodes with `v` above the final smoothing scale.
    pub positive_sup: f64,
    pub positive_l2: f64,
    pub positive_nodes: usize,
    /// The same sup, restricted to positive nodes whose four neighbours are positive too.
    pub core_sup: f64,
    /// `‖L_h v‖` over interior nodes where `v = 0`.
    pub zero_set_sup: f64,
    pub zero_set_l2: f64,
    pub zero_nodes: usize,
}

/// Residual norms of a field against `L v = v^p`. L² norms use the polar area element.
pub fn residual_check(
    field: &PolarField,
    model: &CoefficientModel,
    p: f64,
    delta_final: f64,
    scaling: PenaltyScaling,
) -> Result<ResidualReport> {
    crate::penalty::check_exponent(p)?;
    let grid = field.grid();
    let lv = apply_polar(field, model)?;
    let beta = crate::scaling_exponent(p);
    let nt = grid.n_theta();
    let dth = grid.dtheta();
    let threshold = |i: usize| scaling.local_delta(delta_final, grid.r_values()[i], grid.r_max(), beta);
    let mut rep = ResidualReport {
        positive_sup: 0.0,
        positive_l2: 0.0,
        positive_nodes: 0,
        core_sup: 0.0,
        zero_set_sup: 0.0,
        zero_set_l2: 0.0,
        zero_nodes: 0,
    };
    for i in lv.valid_rows() {
        let weight = grid.r_values()[i] * grid.local_spacing(i) * dth;
        let thr = threshold(i);
        for j in 0..nt {
            let v = field.at(i, j);
            let l = lv.at(i, j);
            if v > thr {
                let res = l - reaction(v, p);
                rep.positive_sup = rep.positive_sup.max(res.abs());
                rep.positive_l2 += weight * res * res;
                rep.positive_nodes += 1;
                let jm = (j + nt - 1) % nt;
                let jp = (j + 1) % nt;
                let neighbours = [field.at(i - 1, j), field.at(i + 1, j), field.at(i, jm), field.at(i, jp)];
                if neighbours.iter().all(|&x| x > thr) {
                    rep.core_sup = rep.core_sup.max(res.abs());
                }
            } else if v == 0.0 {
                rep.zero_set_sup = rep.zero_set_sup.max(l.abs());
                rep.zero_set_l2 += weight * l * l;
                rep.zero_nodes += 1;
            }
        }
    }
    rep.positive_l2 = rep.positive_l2.sqrt();
    rep.zero_set_l2 = rep.zero_set_l2.sqrt();
    Ok(rep)
}
