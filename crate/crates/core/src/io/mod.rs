//! Reading and writing meshes and results in the openCFS HDF5 layout.
//!
//! ```text
//! /Mesh                                   attr Dimension (u32)
//! /Mesh/Nodes/Coordinates                 f64 [num_nodes x 3]
//! /Mesh/Elements/Types                    i32 [num_elements]
//! /Mesh/Elements/Connectivity             u32 [num_elements x max_nodes], 1-based, 0-padded
//! /Mesh/Regions/<name>/Nodes              u32
//! /Mesh/Regions/<name>/Elements           u32, attrs Dimension (u32), IsGroup (u8)
//! /Results/Mesh/MultiStep_<id>            attrs AnalysisType, LastStepNum, LastStepValue
//!     ResultDescription/<quantity>/...    DOFNames, DefinedOn, EntityNames, NumDOFs,
//!                                         StepNumbers, StepValues
//!     Step_<k>                            attr StepValue
//!         <quantity>/<region>/<Nodes|Elements>/Real   f64 [M x D] (+ Imag)
//! /Results/History/MultiStep_<id>         attr AnalysisType
//!     <quantity>/<region>/Real            f64 [N x D] (+ Imag), StepValues, DOFNames
//! ```

mod reader;
mod writer;

use std::path::Path;

use crate::error::Result;
use crate::model::{Mesh, ResultContainer};

pub use reader::CfsReader;
pub use writer::CfsWriter;

pub(crate) const MESH: &str = "Mesh";
pub(crate) const COORDINATES: &str = "Mesh/Nodes/Coordinates";
pub(crate) const ELEMENT_TYPES: &str = "Mesh/Elements/Types";
pub(crate) const CONNECTIVITY: &str = "Mesh/Elements/Connectivity";
pub(crate) const REGIONS: &str = "Mesh/Regions";
pub(crate) const RESULTS_MESH: &str = "Results/Mesh";
pub(crate) const RESULTS_HISTORY: &str = "Results/History";

/// `link_exists` for a relative path, checked one segment at a time so a
/// missing intermediate group is a plain `false` instead of an HDF5 error.
pub(crate) fn path_exists(group: &hdf5::Group, path: &str) -> bool {
    let mut current = String::new();
    for seg in path.split('/').filter(|s| !s.is_empty()) {
        if !current.is_empty() {
            current.push('/');
        }
        current.push_str(seg);
        if !group.link_exists(&current) {
            return false;
        }
    }
    true
}

pub(crate) fn multi_step_name(id: u32) -> String {
    format!("MultiStep_{id}")
}

/// Reads the mesh of a `.cfs` file.
pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    CfsReader::open(path)?.mesh()
}

/// Reads one multi-step of result data.
pub fn read_data(path: impl AsRef<Path>, multi_step_id: u32) -> Result<ResultContainer> {
    CfsReader::open(path)?.multi_step_data(multi_step_id)
}

/// Reads the mesh and the results of multi-step 1. Files without a
/// `/Results` group yield an empty container.
pub fn read_file(path: impl AsRef<Path>) -> Result<(Mesh, ResultContainer)> {
    let reader = CfsReader::open(path)?;
    let mesh = reader.mesh()?;
    let data = if reader.has_results() {
        reader.multi_step_data(1)?
    } else {
        ResultContainer::default()
    };
    Ok((mesh, data))
}

/// Writes a new file (truncating any existing one) with the mesh and
/// optional results.
pub fn write_file(path: impl AsRef<Path>, mesh: &Mesh, result: Option<&ResultContainer>) -> Result<()> {
    let writer = CfsWriter::create(path)?;
    writer.create_file(mesh, result)
}
