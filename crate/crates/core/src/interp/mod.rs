//! Interpolation operators. Each builder returns a sparse
//! [`InterpolationMatrix`] that can be applied to every step of a result.

mod averaging;
mod idw;
mod linalg;
mod matrix;
mod projection;
mod rbf;

pub use averaging::{cell2node, cell2node_matrix, node2cell, node2cell_matrix};
pub use idw::{build_idw, resolve_direction, shepard_weights, IdwConfig, SearchDirection};
pub use linalg::{DenseSolver, MAX_CONDITION};
pub use matrix::{DofSpace, InterpolationMatrix};
pub use projection::{build_projection, ProjectionConfig, ProjectionDirection};
pub use rbf::{rbf_apply, rbf_gradient, rbf_interpolate, Kernel, RbfConfig, RbfMode};
