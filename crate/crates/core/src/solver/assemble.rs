//! Sparse assembly of the interior equations.
//!
//! Unknowns are the interior rows `1..n_r−1`; the outer row carries Dirichlet data and the
//! inner row is either zero or tied to the first interior row by homogeneous extrapolation,
//! in which case it is eliminated into that row's diagonal.

use faer::sparse::{SparseColMat, Triplet};
use serde::{Deserialize, Serialize};

use super::config::{InnerBoundary, SolveConfig};
use crate::coefficients::CoefficientModel;
use crate::error::{Error, Result};
use crate::polar::{apply_polar, row_stencils, PolarField, PolarGrid, RowStencil};

/// Sign pattern of `−L_h` restricted to the unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MMatrixReport {
    /// Largest off-diagonal entry; an M-matrix needs this `≤ 0`.
    pub max_off_diagonal: f64,
    pub min_diagonal: f64,
    /// Smallest `diagonal − Σ|off-diagonal|` over rows.
    pub min_row_excess: f64,
    pub holds: bool,
}

/// The linear part `u ↦ A u + b` of the discrete equations, where `u` collects the unknowns
/// and `b` the boundary contributions.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    grid: PolarGrid,
    model: CoefficientModel,
    stencils: Vec<RowStencil>,
    inner: InnerBoundary,
    /// `(r_min/r₁)^β`, the inner extrapolation factor.
    inner_factor: f64,
    matrix: SparseColMat<usize, f64>,
    /// Position of each diagonal entry in the matrix value array.
    diagonal_slots: Vec<usize>,
    rhs: Vec<f64>,
    outer: Vec<f64>,
    m_matrix: MMatrixReport,
}

impl DiscreteOperator {
    pub fn n_unknowns(&self) -> usize {
        self.rhs.len()
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    pub fn model(&self) -> &CoefficientModel {
        &self.model
    }

    pub fn m_matrix(&self) -> MMatrixReport {
        self.m_matrix
    }

    pub(crate) fn matrix(&self) -> &SparseColMat<usize, f64> {
        &self.matrix
    }

    pub(crate) fn diagonal_slots(&self) -> &[usize] {
        &self.diagonal_slots
    }

    /// Boundary contribution `b`.
    pub fn boundary_rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// `A u + b`, evaluated matrix-free.
    pub fn apply_affine(&self, u: &[f64], out: &mut [f64]) {
        let full = self.expand(u);
        let mut image = vec![0.0; self.grid.len()];
        crate::polar::apply_stencils(&self.grid, &self.stencils, &full, &mut image);
        let nt = self.grid.n_theta();
        out.copy_from_slice(&image[nt..nt + u.len()]);
    }

    /// Full-grid values from the unknowns: boundary data on the outer row, the inner policy on
    /// the inner row.
    pub fn expand(&self, u: &[f64]) -> Vec<f64> {
        let nt = self.grid.n_theta();
        let mut full = Vec::with_capacity(self.grid.len());
        match self.inner {
            InnerBoundary::Zero => full.extend(std::iter::repeat_n(0.0, nt)),
            InnerBoundary::HomogeneousExtrapolation => {
                full.extend(u[..nt].iter().map(|v| self.inner_factor * v))
            }
        }
        full.extend_from_slice(u);
        full.extend_from_slice(&self.outer);
        full
    }

    /// `(r/r_max)^β` times the outer data: exact for homogeneous data, and the default initial
    /// guess of the nonlinear solve.
    pub fn homogeneous_extension(&self, beta: f64) -> Vec<f64> {
        let nt = self.grid.n_theta();
        let r = self.grid.r_values();
        let r_max = self.grid.r_max();
        (0..self.n_unknowns())
            .map(|k| (r[k / nt + 1] / r_max).powf(beta) * self.outer[k % nt])
            .collect()
    }

    /// Unknowns of a full-grid vector.
    pub fn restrict<'a>(&self, full: &'a [f64]) -> &'a [f64] {
        let nt = self.grid.n_theta();
        &full[nt..full.len() - nt]
    }

    /// `L_h` applied to a full field (same stencils as the assembled matrix).
    pub fn apply(&self, field: &PolarField) -> Result<PolarField> {
        apply_polar(field, &self.model)
    }
}

/// Assembles the interior equations for `config`, rejecting grids on which the stencil is not
/// monotone.
pub fn assemble_operator(config: &SolveConfig) -> Result<DiscreteOperator> {
    config.validate()?;
    let outer = config.boundary_trace()?;
    assemble_with_trace(&config.grid, &config.model, config.beta(), config.inner_boundary, outer)
}

pub(crate) fn assemble_with_trace(
    grid: &PolarGrid,
    model: &CoefficientModel,
    beta: f64,
    inner: InnerBoundary,
    outer: Vec<f64>,
) -> Result<DiscreteOperator> {
    let (nr, nt) = (grid.n_r(), grid.n_theta());
    if nr < 3 {
        return Err(Error::GridTooCoarse(format!("need at least one interior row, got n_r = {nr}")));
    }
    let stencils = row_stencils(grid, model);
    let r = grid.r_values();
    let inner_factor = (r[0] / r[1]).powf(beta);
    let n = (nr - 2) * nt;
    let mut triplets = Vec::with_capacity(5 * n);
    let mut rhs = vec![0.0; n];
    let mut report = MMatrixReport {
        max_off_diagonal: f64::NEG_INFINITY,
        min_diagonal: f64::INFINITY,
        min_row_excess: f64::INFINITY,
        holds: true,
    };

    for i in 1..nr - 1 {
        let s = stencils[i];
        let mut center = s.center;
        if i == 1 && inner == InnerBoundary::HomogeneousExtrapolation {
            center += s.lower * inner_factor;
        }
        let has_lower = i > 1;
        let has_upper = i < nr - 2;
        // Row of −A: diagonal −center, off-diagonals −weights.
        let off: Vec<f64> = [
            Some(-s.side),
            Some(-s.side),
            has_lower.then_some(-s.lower),
            has_upper.then_some(-s.upper),
        ]
        .into_iter()
        .flatten()
        .collect();
        let max_off = off.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let excess = -center - off.iter().map(|x| x.abs()).sum::<f64>();
        report.max_off_diagonal = report.max_off_diagonal.max(max_off.max(-s.lower).max(-s.upper));
        report.min_diagonal = report.min_diagonal.min(-center);
        report.min_row_excess = report.min_row_excess.min(excess);

        for j in 0..nt {
            let row = (i - 1) * nt + j;
            let jm = if j == 0 { nt - 1 } else { j - 1 };
            let jp = if j + 1 == nt { 0 } else { j + 1 };
            triplets.push(Triplet::new(row, row, center));
            triplets.push(Triplet::new(row, (i - 1) * nt + jm, s.side));
            triplets.push(Triplet::new(row, (i - 1) * nt + jp, s.side));
            if has_lower {
                triplets.push(Triplet::new(row, row - nt, s.lower));
            }
            if has_upper {
                triplets.push(Triplet::new(row, row + nt, s.upper));
            } else {
                rhs[row] += s.upper * outer[j];
            }
        }
    }
    // A negative neighbour weight anywhere (including those folded into boundary terms)
    // breaks the discrete maximum principle.
    report.holds = report.max_off_diagonal <= 0.0 && report.min_diagonal > 0.0 && report.min_row_excess >= -1e-9 * report.min_diagonal.abs().max(1.0);
    if !report.holds {
        return Err(Error::GridTooCoarse(format!(
            "stencil is not monotone (largest off-diagonal of -L_h is {:e}); refine the radial step or raise r_min",
            report.max_off_diagonal
        )));
    }
    let matrix = SparseColMat::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
    let diagonal_slots = diagonal_positions(&matrix)?;
    Ok(DiscreteOperator {
        grid: grid.clone(),
        model: *model,
        stencils,
        inner,
        inner_factor,
        matrix,
        diagonal_slots,
        rhs,
        outer,
        m_matrix: report,
    })
}

fn diagonal_positions(matrix: &SparseColMat<usize, f64>) -> Result<Vec<usize>> {
    let sym = matrix.symbolic();
    let (col_ptr, row_idx) = (sym.col_ptr(), sym.row_idx());
    (0..matrix.ncols())
        .map(|c| {
            (col_ptr[c]..col_ptr[c + 1])
                .find(|&k| row_idx[k] == c)
                .ok_or_else(|| Error::LinearSolve(format!("missing diagonal entry in column {c}")))
        })
        .collect()
}
