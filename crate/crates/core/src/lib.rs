//! Finite-element mesh and result data in the openCFS HDF5 layout.
//!
//! - [`model`]: meshes, regions, result arrays and containers
//! - [`io`]: `.cfs` (HDF5) reader and writer
//! - [`interp`]: node/cell averaging, Shepard IDW, projection and RBF interpolation
//! - [`transform`]: extrude/revolve, rigid transforms and rigid mesh fitting
//! - [`signal`]: noise-robust time derivative and field FFT
//! - [`modal`]: MAC, MSF and MCF
//! - [`extras`]: STL and EnSight Gold readers

pub mod error;
pub mod extras;
pub mod interp;
pub mod io;
pub mod modal;
pub mod model;
pub mod signal;
pub mod spatial;
pub mod transform;
pub mod vec3;

pub use error::{Error, Result};
pub use model::{
    AnalysisType, ElementType, Mesh, MeshInfo, Point3, Region, ResType, ResultArray, ResultContainer,
    ResultData,
};
