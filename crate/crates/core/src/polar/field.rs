use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::grid::PolarGrid;
use crate::error::{Error, Result};
use crate::scaling_exponent;

/// What the samples of a field represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// A solution candidate `v(r, θ)`.
    V,
    /// The cylinder variable `w(t, θ) = v / r^β`.
    W,
    /// An operator image such as `L v`.
    Operator,
    /// An equation residual.
    Residual,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldMeta {
    pub quantity: Quantity,
    pub p: Option<f64>,
    pub epsilon: Option<f64>,
    pub beta: Option<f64>,
    #[serde(default)]
    pub description: String,
}

impl FieldMeta {
    pub fn new(quantity: Quantity) -> Self {
        Self {
            quantity,
            p: None,
            epsilon: None,
            beta: None,
            description: String::new(),
        }
    }

    /// Records `p` together with its scaling exponent `β = 2/(1-p)`.
    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self.beta = Some(scaling_exponent(p));
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn describe(mut self, text: impl Into<String>) -> Self {
        self.description = text.into();
        self
    }

    pub fn as_quantity(&self, quantity: Quantity) -> Self {
        Self {
            quantity,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        if let (Some(p), Some(beta)) = (self.p, self.beta) {
            let expected = scaling_exponent(p);
            if (beta - expected).abs() > 1e-12 * expected {
                return Err(Error::ParameterRange(format!(
                    "beta = {beta} inconsistent with p = {p} (expected {expected})"
                )));
            }
        }
        Ok(())
    }
}

/// Scalar samples on a [`PolarGrid`], stored row by row (one row per radius).
///
/// `valid_rows` marks rows carrying meaningful values; operator images leave the first and
/// last rows zero and exclude them.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarField {
    grid: PolarGrid,
    values: Vec<f64>,
    pub meta: FieldMeta,
    valid_rows: Range<usize>,
}

impl PolarField {
    pub fn new(grid: PolarGrid, values: Vec<f64>, meta: FieldMeta) -> Result<Self> {
        let rows = 0..grid.n_r();
        Self::with_valid_rows(grid, values, meta, rows)
    }

    pub fn with_valid_rows(
        grid: PolarGrid,
        values: Vec<f64>,
        meta: FieldMeta,
        valid_rows: Range<usize>,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "field has {} samples, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::ParameterRange(format!("non-finite sample at flat index {k}")));
        }
        if valid_rows.end > grid.n_r() || valid_rows.start > valid_rows.end {
            return Err(Error::InvalidGrid(format!("valid rows {valid_rows:?} outside grid")));
        }
        meta.validate()?;
        Ok(Self {
            grid,
            values,
            meta,
            valid_rows,
        })
    }

    /// Samples `f(r, θ)` at every node.
    pub fn from_fn(grid: PolarGrid, meta: FieldMeta, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for &r in grid.r_values() {
            for &th in grid.theta_values() {
                values.push(f(r, th));
            }
        }
        Self::new(grid, values, meta)
    }

    pub fn zeros(grid: PolarGrid, meta: FieldMeta) -> Self {
        let n = grid.n_r();
        Self {
            values: vec![0.0; grid.len()],
            grid,
            meta,
            valid_rows: 0..n,
        }
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn valid_rows(&self) -> Range<usize> {
        self.valid_rows.clone()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.grid.n_theta();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn beta(&self) -> Result<f64> {
        self.meta.beta.ok_or(Error::MissingBeta)
    }

    /// Largest `|value|` over valid rows.
    pub fn sup_norm(&self) -> f64 {
        self.valid_rows
            .clone()
            .flat_map(|i| self.row(i).iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Pointwise map, keeping grid and metadata.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::with_valid_rows(
            self.grid.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
            self.meta.clone(),
            self.valid_rows.clone(),
        )
    }

    /// `a·self + b·other` on a shared grid; valid rows are intersected.
    pub fn combine(&self, a: f64, other: &PolarField, b: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::InvalidGrid("fields live on different grids".into()));
        }
        let rows = self.valid_rows.start.max(other.valid_rows.start)
            ..self.valid_rows.end.min(other.valid_rows.end);
        Self::with_valid_rows(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            self.meta.clone(),
            rows,
        )
    }
}
