//! Five-point polar stencils for the model operators and the cylinder-equation residual.
//!
//! Every model is diagonal in polar coordinates, `L v = A v_rr + B v_r/r + C v_θθ/r²`, so the
//! discrete operator only couples a node to its two radial and two angular neighbours.
//!
//! On uniform-`r` grids the derivatives are centered differences in `r`. On log grids, with
//! `s = ln r`, the operator reads `r² L v = A v_ss + (B − A) v_s + C v_θθ` and the differences
//! are taken in `s`; the resulting stencil commutes with shifts in `s`.

use rayon::prelude::*;

use super::field::{PolarField, Quantity};
use super::grid::{PolarGrid, RadialSpacing};
use crate::coefficients::{CoefficientModel, PolarCoefficients};
use crate::error::{Error, Result};
use crate::penalty::reaction;
use crate::scaling_exponent;

/// Weights of the five-point stencil on one radial row:
/// `(L v)_ij = lower·v_{i-1,j} + upper·v_{i+1,j} + side·(v_{i,j-1} + v_{i,j+1}) + center·v_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowStencil {
    pub lower: f64,
    pub upper: f64,
    pub side: f64,
    pub center: f64,
}

impl RowStencil {
    /// Nonnegative neighbour weights and a negative center: `-L_h` is an M-matrix row.
    pub fn is_monotone(&self) -> bool {
        self.lower >= 0.0 && self.upper >= 0.0 && self.side >= 0.0 && self.center < 0.0
    }
}

pub fn row_stencil(grid: &PolarGrid, coeffs: PolarCoefficients, i: usize) -> RowStencil {
    let r = grid.r_values()[i];
    let h = grid.radial_step();
    let side = coeffs.thth / (r * r * grid.dtheta() * grid.dtheta());
    match grid.spacing() {
        RadialSpacing::Uniform => {
            let second = coeffs.rr / (h * h);
            let first = coeffs.r / (2.0 * r * h);
            RowStencil {
                lower: second - first,
                upper: second + first,
                side,
                center: -2.0 * second - 2.0 * side,
            }
        }
        RadialSpacing::Log => {
            let r2 = r * r;
            let second = coeffs.rr / (h * h * r2);
            let first = (coeffs.r - coeffs.rr) / (2.0 * h * r2);
            RowStencil {
                lower: second - first,
                upper: second + first,
                side,
                center: -2.0 * second - 2.0 * side,
            }
        }
    }
}

/// Stencils for every row of the grid (boundary rows included; callers decide their use).
pub fn row_stencils(grid: &PolarGrid, model: &CoefficientModel) -> Vec<RowStencil> {
    let coeffs = model.polar_coefficients();
    (0..grid.n_r()).map(|i| row_stencil(grid, coeffs, i)).collect()
}

fn check_resolvable(grid: &PolarGrid) -> Result<()> {
    if grid.n_r() < 3 {
        return Err(Error::GridTooCoarse(format!(
            "need at least 3 radial rows for a centered stencil, got {}",
            grid.n_r()
        )));
    }
    Ok(())
}

/// Applies a row-stencil family to `values`, writing interior rows of `out`.
pub(crate) fn apply_stencils(grid: &PolarGrid, stencils: &[RowStencil], values: &[f64], out: &mut [f64]) {
    let nt = grid.n_theta();
    let nr = grid.n_r();
    out[nt..(nr - 1) * nt]
        .par_chunks_mut(nt)
        .enumerate()
        .for_each(|(k, row)| {
            let i = k + 1;
            let s = stencils[i];
            let below = &values[(i - 1) * nt..i * nt];
            let here = &values[i * nt..(i + 1) * nt];
            let above = &values[(i + 1) * nt..(i + 2) * nt];
            for j in 0..nt {
                let jm = if j == 0 { nt - 1 } else { j - 1 };
                let jp = if j + 1 == nt { 0 } else { j + 1 };
                row[j] = s.lower * below[j]
                    + s.upper * above[j]
                    + s.side * (here[jm] + here[jp])
                    + s.center * here[j];
            }
        });
}

/// Second-order approximation of `L v` at interior nodes. The first and last rows of the
/// result are zero and excluded from its valid rows.
pub fn apply_polar(field: &PolarField, model: &CoefficientModel) -> Result<PolarField> {
    let grid = field.grid();
    check_resolvable(grid)?;
    let stencils = row_stencils(grid, model);
    let mut out = vec![0.0; grid.len()];
    apply_stencils(grid, &stencils, field.values(), &mut out);
    PolarField::with_valid_rows(
        grid.clone(),
        out,
        field.meta.as_quantity(Quantity::Operator),
        1..grid.n_r() - 1,
    )
}

/// Coefficients of the cylinder equation for `w = v / r^β`, `t = -ln r`:
/// `r^{2-β} (L v − v^p) = tt·w_tt + t·w_t + thth·w_θθ + zero·w − w^p`.
///
/// Derived from `v_r = r^{β-1}(βw − w_t)` and `v_rr = r^{β-2}(w_tt − (2β−1)w_t + β(β−1)w)`.
/// For the planar model this gives `w_tt − (2β+ε)w_t + (1+ε)w_θθ + β(β+ε)w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderCoefficients {
    pub tt: f64,
    pub t: f64,
    pub thth: f64,
    pub zero: f64,
}

pub fn cylinder_coefficients(model: &CoefficientModel, beta: f64) -> CylinderCoefficients {
    let PolarCoefficients { rr, r, thth } = model.polar_coefficients();
    CylinderCoefficients {
        tt: rr,
        t: -(rr * (2.0 * beta - 1.0) + r),
        thth,
        zero: rr * beta * (beta - 1.0) + r * beta,
    }
}

/// Residual `R(w)` of the cylinder equation on a log-polar grid, interior rows only.
pub fn w_residual(wfield: &PolarField, model: &CoefficientModel, p: f64) -> Result<PolarField> {
    let grid = wfield.grid();
    if grid.spacing() != RadialSpacing::Log {
        return Err(Error::InvalidGrid("the cylinder residual needs a log-polar grid".into()));
    }
    check_resolvable(grid)?;
    let beta = scaling_exponent(p);
    if let Some(b) = wfield.meta.beta {
        if (b - beta).abs() > 1e-12 * beta {
            return Err(Error::ParameterRange(format!(
                "field carries beta = {b}, but p = {p} gives {beta}"
            )));
        }
    }
    let c = cylinder_coefficients(model, beta);
    let h = grid.radial_step();
    let nt = grid.n_theta();
    let nr = grid.n_r();
    let dth2 = grid.dtheta() * grid.dtheta();
    let w = wfield.values();
    let mut out = vec![0.0; grid.len()];
    out[nt..(nr - 1) * nt]
        .par_chunks_mut(nt)
        .enumerate()
        .for_each(|(k, row)| {
            let i = k + 1;
            for j in 0..nt {
                let jm = if j == 0 { nt - 1 } else { j - 1 };
                let jp = if j + 1 == nt { 0 } else { j + 1 };
                let here = w[i * nt + j];
                let inner = w[(i - 1) * nt + j];
                let outer = w[(i + 1) * nt + j];
                // Row index grows with r, i.e. t decreases: w_t = -(outer - inner)/(2h).
                let w_tt = (outer - 2.0 * here + inner) / (h * h);
                let w_t = -(outer - inner) / (2.0 * h);
                let w_thth = (w[i * nt + jm] - 2.0 * here + w[i * nt + jp]) / dth2;
                row[j] = c.tt * w_tt + c.t * w_t + c.thth * w_thth + c.zero * here
                    - reaction(here, p);
            }
        });
    PolarField::with_valid_rows(
        grid.clone(),
        out,
        wfield.meta.as_quantity(Quantity::Residual),
        1..nr - 1,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::field::FieldMeta;
    use crate::polar::to_logpolar;

    fn meta(p: f64) -> FieldMeta {
        FieldMeta::new(Quantity::V).with_p(p)
    }

    fn interior_sup(f: &PolarField, target: f64) -> f64 {
        f.valid_rows()
            .flat_map(|i| f.row(i).iter().map(move |v| (v - target).abs()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn r_squared_constant_image() {
        for eps in [0.0, 0.2, -0.3, 1.5] {
            let model = CoefficientModel::planar(eps).unwrap();
            let grid = PolarGrid::uniform(0.01, 40, 32).unwrap();
            let v = PolarField::from_fn(grid, meta(0.0), |r, _| r * r).unwrap();
            let lv = apply_polar(&v, &model).unwrap();
            assert!(interior_sup(&lv, 4.0 + 2.0 * eps) < 1e-9, "eps = {eps}");
        }
    }

    #[test]
    fn half_plane_profile_has_unit_image() {
        let model = CoefficientModel::planar(0.0).unwrap();
        let grid = PolarGrid::uniform(0.05, 64, 128).unwrap();
        let v = PolarField::from_fn(grid, meta(0.0), |r, th| r * r * (1.0 - (2.0 * th).cos()) / 4.0).unwrap();
        let lv = apply_polar(&v, &model).unwrap();
        // cos 2θ is resolved to O(Δθ²) only.
        let dth = v.grid().dtheta();
        assert!(interior_sup(&lv, 1.0) < dth * dth);
    }

    #[test]
    fn log_grid_r_squared_second_order() {
        let model = CoefficientModel::planar(0.3).unwrap();
        let err = |n: usize| {
            let grid = PolarGrid::log_polar(1e-2, n, 16).unwrap();
            let v = PolarField::from_fn(grid, meta(0.0), |r, _| r * r).unwrap();
            interior_sup(&apply_polar(&v, &model).unwrap(), 4.6)
        };
        let (e1, e2) = (err(33), err(65));
        let order = (e1 / e2).log2();
        assert!(order > 1.95 && order < 2.05, "order {order}");
    }

    #[test]
    fn monotone_stencils() {
        for eps in [-0.3, 0.0, 0.5] {
            let model = CoefficientModel::planar(eps).unwrap();
            for grid in [
                PolarGrid::uniform(1e-3, 32, 64).unwrap(),
                PolarGrid::log_polar(1e-3, 32, 64).unwrap(),
            ] {
                for s in &row_stencils(&grid, &model)[1..grid.n_r() - 1] {
                    assert!(s.is_monotone(), "{s:?}");
                    let sum = s.lower + s.upper + 2.0 * s.side + s.center;
                    assert!(sum.abs() <= 1e-9 * s.center.abs());
                }
            }
        }
    }

    #[test]
    fn rejects_two_row_grid() {
        let grid = PolarGrid::uniform(0.1, 2, 16).unwrap();
        let v = PolarField::zeros(grid, meta(0.0));
        assert!(matches!(
            apply_polar(&v, &CoefficientModel::identity()),
            Err(Error::GridTooCoarse(_))
        ));
    }

    #[test]
    fn cylinder_constant_solution() {
        // w ≡ 1/(2(2+ε)) solves the p = 0 cylinder equation: β(β+ε)w = 1 with β = 2.
        for eps in [0.0, 0.1, -0.3] {
            let model = CoefficientModel::planar(eps).unwrap();
            let c = cylinder_coefficients(&model, 2.0);
            assert!((c.zero - 2.0 * (2.0 + eps)).abs() < 1e-15);
            assert!((c.t + (4.0 + eps)).abs() < 1e-15);
            let a = 1.0 / (2.0 * (2.0 + eps));
            let grid = PolarGrid::log_polar(1e-2, 20, 16).unwrap();
            let w = PolarField::from_fn(grid, meta(0.0).as_quantity(Quantity::W), |_, _| a).unwrap();
            let res = w_residual(&w, &model, 0.0).unwrap();
            assert!(res.sup_norm() < 1e-13);
            // Same constant through the v route: L(a r²) = (4 + 2ε) a = 1.
            let v = PolarField::from_fn(PolarGrid::uniform(0.01, 20, 16).unwrap(), meta(0.0), |r, _| a * r * r).unwrap();
            assert!(interior_sup(&apply_polar(&v, &model).unwrap(), 1.0) < 1e-10);
        }
    }

    #[test]
    fn cylinder_zero_field() {
        let grid = PolarGrid::log_polar(1e-2, 20, 16).unwrap();
        let w = PolarField::zeros(grid, meta(0.5).as_quantity(Quantity::W));
        let res = w_residual(&w, &CoefficientModel::planar(0.2).unwrap(), 0.5).unwrap();
        assert_eq!(res.sup_norm(), 0.0);
    }

    #[test]
    fn cylinder_identity_against_polar_form() {
        // r^{2-β}(L v − v^p) and R(w) approximate the same function; their gap shrinks as h².
        let p = 0.25;
        let beta = scaling_exponent(p);
        let model = CoefficientModel::planar(0.4).unwrap();
        let v_of = |r: f64, th: f64| r.powf(beta) * (2.0 + 0.3 * th.sin()) + r.powf(beta + 1.5) * (0.5 + 0.2 * (2.0 * th).cos());
        let gap = |n_r: usize, n_t: usize| {
            let grid = PolarGrid::log_polar(0.05, n_r, n_t).unwrap();
            let v = PolarField::from_fn(grid.clone(), meta(p), v_of).unwrap();
            let lv = apply_polar(&v, &model).unwrap();
            let res = w_residual(&to_logpolar(&v).unwrap(), &model, p).unwrap();
            let mut worst = 0.0f64;
            for i in lv.valid_rows() {
                let r = grid.r_values()[i];
                for j in 0..grid.n_theta() {
                    let lhs = r.powf(2.0 - beta) * (lv.at(i, j) - reaction(v.at(i, j), p));
                    worst = worst.max((lhs - res.at(i, j)).abs());
                }
            }
            worst
        };
        let (g1, g2) = (gap(41, 32), gap(81, 64));
        assert!((g1 / g2).log2() > 1.8, "{g1} {g2}");
    }
}
