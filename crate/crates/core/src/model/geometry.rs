//! Derived geometric quantities: element centroids, node normals and
//! standalone region meshes.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::vec3;

use super::element::ElementType;
use super::mesh::{Mesh, Point3, Region};

/// Arithmetic mean of the node coordinates of every region element, in
/// region element order.
pub fn compute_centroids(mesh: &Mesh, region: &Region) -> Result<Vec<Point3>> {
    region
        .element_ids()
        .iter()
        .map(|&id| {
            let idx = mesh.element_index(id)?;
            let nodes = mesh.element_nodes(idx);
            vec3::mean(nodes.iter().map(|&n| mesh.node(n))).ok_or_else(|| {
                Error::InvalidMesh(format!(
                    "element {id} ({}) has no nodes",
                    mesh.element_type(idx)
                ))
            })
        })
        .collect()
}

/// Unit normal of a surface element from its corner nodes, following the
/// right-hand rule on the connectivity order. `None` for degenerate elements.
pub fn element_normal(mesh: &Mesh, index: usize) -> Option<Point3> {
    let nodes = mesh.element_nodes(index);
    let p = |k: usize| mesh.node(nodes[k]);
    let n = match mesh.element_type(index).corner_count() {
        3 => vec3::cross(vec3::sub(p(1), p(0)), vec3::sub(p(2), p(0))),
        4 => vec3::cross(vec3::sub(p(2), p(0)), vec3::sub(p(3), p(1))),
        _ => return None,
    };
    vec3::normalize(n)
}

/// Normalized average of adjacent element unit normals per region node.
///
/// Degenerate elements are skipped with a warning; nodes without a usable
/// adjacent element get a zero row.
pub fn compute_node_normals(mesh: &Mesh, region: &Region) -> Result<Vec<Point3>> {
    let mut acc = vec![[0.0; 3]; region.num_nodes()];
    for &id in region.element_ids() {
        let idx = mesh.element_index(id)?;
        let t = mesh.element_type(idx);
        if t.dimension() != 2 {
            return Err(Error::InvalidMesh(format!(
                "node normals need surface elements, region '{}' contains {t} (element {id})",
                region.name()
            )));
        }
        let Some(n) = element_normal(mesh, idx) else {
            log::warn!("skipping degenerate element {id} in normal computation");
            continue;
        };
        for &node in mesh.element_nodes(idx) {
            let k = region.local_node_index(node).ok_or_else(|| {
                Error::InvalidMesh(format!(
                    "element {id} uses node {node} which is not in region '{}'",
                    region.name()
                ))
            })?;
            acc[k] = vec3::add(acc[k], n);
        }
    }
    Ok(acc
        .into_iter()
        .map(|v| vec3::normalize(v).unwrap_or([0.0; 3]))
        .collect())
}

/// A region extracted into its own mesh plus the id maps back to the parent.
#[derive(Debug, Clone)]
pub struct ExtractedRegion {
    pub mesh: Mesh,
    /// `node_map[i]` is the parent id of local node `i + 1`.
    pub node_map: Vec<u32>,
    /// `element_map[i]` is the parent id of local element `i + 1`.
    pub element_map: Vec<u32>,
}

/// Copies a region into a standalone mesh with compacted 1-based ids. The
/// result holds one region with the same name covering everything.
pub fn extract_region(mesh: &Mesh, region_name: &str) -> Result<ExtractedRegion> {
    let region = mesh.region(region_name)?;
    let mut node_map: Vec<u32> = region.node_ids().to_vec();
    for &e in region.element_ids() {
        node_map.extend_from_slice(mesh.element_nodes(mesh.element_index(e)?));
    }
    node_map.sort_unstable();
    node_map.dedup();
    let local: HashMap<u32, u32> = node_map
        .iter()
        .enumerate()
        .map(|(i, &g)| (g, i as u32 + 1))
        .collect();
    let coords = node_map.iter().map(|&g| mesh.node(g)).collect();
    let mut types = Vec::with_capacity(region.num_elements());
    let mut elements = Vec::with_capacity(region.num_elements());
    for &e in region.element_ids() {
        let idx = e as usize - 1;
        types.push(mesh.element_type(idx));
        elements.push(mesh.element_nodes(idx).iter().map(|n| local[n]).collect());
    }
    let n_nodes = node_map.len() as u32;
    let n_elems = region.num_elements() as u32;
    let sub = Region::new(
        region.name(),
        region.dimension(),
        (1..=n_nodes).collect(),
        (1..=n_elems).collect(),
        region.is_group(),
    )?;
    Ok(ExtractedRegion {
        mesh: Mesh::new(coords, types, elements, vec![sub])?,
        node_map,
        element_map: region.element_ids().to_vec(),
    })
}

/// Convenience: a mesh with one region covering all nodes and elements.
pub fn single_region_mesh(
    coordinates: Vec<Point3>,
    element_types: Vec<ElementType>,
    elements: Vec<Vec<u32>>,
    region_name: &str,
) -> Result<Mesh> {
    let dim = element_types.iter().map(|t| t.dimension()).max().unwrap_or(0);
    let region = Region::new(
        region_name,
        dim,
        (1..=coordinates.len() as u32).collect(),
        (1..=element_types.len() as u32).collect(),
        false,
    )?;
    Mesh::new(coordinates, element_types, elements, vec![region])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cube() -> Mesh {
        let coords = vec![
            [0., 0., 0.], [1., 0., 0.], [1., 1., 0.], [0., 1., 0.],
            [0., 0., 1.], [1., 0., 1.], [1., 1., 1.], [0., 1., 1.],
        ];
        single_region_mesh(coords, vec![ElementType::Hexa8], vec![(1..=8).collect()], "vol").unwrap()
    }

    #[test]
    fn centroids() {
        let m = single_region_mesh(
            vec![[0., 0., 0.], [1., 0., 0.], [0., 1., 0.]],
            vec![ElementType::Tria3],
            vec![vec![1, 2, 3]],
            "s",
        )
        .unwrap();
        let c = compute_centroids(&m, m.region("s").unwrap()).unwrap();
        assert!((c[0][0] - 1.0 / 3.0).abs() < 1e-15 && (c[0][1] - 1.0 / 3.0).abs() < 1e-15);

        let p = single_region_mesh(vec![[2., 3., 4.]], vec![ElementType::Point], vec![vec![1]], "p").unwrap();
        assert_eq!(compute_centroids(&p, p.region("p").unwrap()).unwrap(), vec![[2., 3., 4.]]);

        let cube = unit_cube();
        assert_eq!(compute_centroids(&cube, cube.region("vol").unwrap()).unwrap(), vec![[0.5; 3]]);
    }

    #[test]
    fn centroid_of_empty_element_fails() {
        let m = single_region_mesh(vec![[0.; 3]], vec![ElementType::Undef], vec![vec![]], "u").unwrap();
        assert!(compute_centroids(&m, m.region("u").unwrap()).is_err());
    }

    #[test]
    fn planar_quad_patch_normals() {
        let coords = vec![
            [0., 0., 0.], [1., 0., 0.], [2., 0., 0.],
            [0., 1., 0.], [1., 1., 0.], [2., 1., 0.],
        ];
        let m = single_region_mesh(
            coords,
            vec![ElementType::Quad4; 2],
            vec![vec![1, 2, 5, 4], vec![2, 3, 6, 5]],
            "s",
        )
        .unwrap();
        for n in compute_node_normals(&m, m.region("s").unwrap()).unwrap() {
            assert_eq!(n, [0., 0., 1.]);
        }
    }

    #[test]
    fn wedge_edge_normal_is_bisector() {
        // face 1 in z=0 plane (normal +z), face 2 in y=0 plane wound to give +y
        let coords = vec![[0., 0., 0.], [1., 0., 0.], [1., 1., 0.], [0., 1., 0.], [1., 0., -1.], [0., 0., -1.]];
        let m = single_region_mesh(
            coords,
            vec![ElementType::Quad4; 2],
            vec![vec![1, 2, 3, 4], vec![1, 2, 5, 6]],
            "s",
        )
        .unwrap();
        let normals = compute_node_normals(&m, m.region("s").unwrap()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for k in [0, 1] {
            assert!((normals[k][0]).abs() < 1e-15);
            assert!((normals[k][1] - h).abs() < 1e-15);
            assert!((normals[k][2] - h).abs() < 1e-15);
        }
    }

    #[test]
    fn single_triangle_and_volume_error() {
        let m = single_region_mesh(
            vec![[0., 0., 0.], [0., 1., 0.], [0., 0., 1.]],
            vec![ElementType::Tria3],
            vec![vec![1, 2, 3]],
            "s",
        )
        .unwrap();
        for n in compute_node_normals(&m, m.region("s").unwrap()).unwrap() {
            assert_eq!(n, [1., 0., 0.]);
        }
        let cube = unit_cube();
        assert!(compute_node_normals(&cube, cube.region("vol").unwrap()).is_err());
    }

    #[test]
    fn extract() {
        let coords: Vec<Point3> = (0..11).map(|i| [i as f64, 0., 0.]).collect();
        let elements: Vec<Vec<u32>> = (1..=10).map(|i| vec![i, i + 1]).collect();
        let mut m = single_region_mesh(coords, vec![ElementType::Line2; 10], elements, "all").unwrap();
        let sub = Region::from_elements(&m, "pair", vec![4, 5]).unwrap();
        m.add_region(sub).unwrap();
        let ex = extract_region(&m, "pair").unwrap();
        assert_eq!(ex.mesh.num_elements(), 2);
        assert_eq!(ex.mesh.num_nodes(), 3);
        for (i, &g) in ex.node_map.iter().enumerate() {
            assert_eq!(ex.mesh.node(i as u32 + 1), m.node(g));
        }
        assert_eq!(ex.mesh.element_nodes(0), &[1, 2]);
        assert!(extract_region(&m, "nope").is_err());

        let whole = extract_region(&m, "all").unwrap();
        assert_eq!(whole.mesh.coordinates(), m.coordinates());
    }
}
