//! In-memory data model: meshes, regions and result arrays.

mod element;
mod geometry;
mod mesh;
mod result;

pub use element::ElementType;
pub use geometry::{
    compute_centroids, compute_node_normals, element_normal, extract_region, single_region_mesh,
    ExtractedRegion,
};
pub use mesh::{Mesh, MeshInfo, Point3, Region};
pub(crate) use mesh::bbox_diagonal;
pub(crate) use result::from_view3;
pub use result::{
    check_quantity_name, default_dim_names, AnalysisType, ResType, ResultArray, ResultArrayBuilder,
    ResultContainer, ResultData, ResultInfo, KNOWN_QUANTITIES,
};
