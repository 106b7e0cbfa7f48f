//! Sweeps (extrude/revolve), rigid transforms and rigid mesh fitting.

mod fit;
mod rigid;
mod sweep;

pub use fit::{fit_mesh, fit_mesh_with, FitOptions, FitResult};
pub use rigid::{transform_mesh_data, Matrix3, RigidTransform};
pub use sweep::{extrude_mesh_region, revolve_mesh_region};
