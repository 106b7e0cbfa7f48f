//! Readers for external mesh formats: STL surfaces and EnSight Gold cases.

mod ensight;
mod stl;

pub use ensight::read_ensight_case;
pub use stl::{parse_stl, read_stl, write_stl, MERGE_TOLERANCE};
