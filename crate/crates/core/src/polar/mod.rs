//! Fields on polar and log-polar grids and the polar forms of the model operators.

mod field;
mod grid;
mod logpolar;
mod operator;

pub use field::{FieldMeta, PolarField, Quantity};
pub use grid::{GridSpec, PolarGrid, RadialSpacing};
pub use logpolar::{to_logpolar, MonotoneCubic};
pub use operator::{
    apply_polar, cylinder_coefficients, row_stencil, row_stencils, w_residual, CylinderCoefficients,
    RowStencil,
};
pub(crate) use operator::apply_stencils;
