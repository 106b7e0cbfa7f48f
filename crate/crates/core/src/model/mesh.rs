use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

use super::element::ElementType;

pub type Point3 = [f64; 3];

/// Named subset of mesh nodes and elements. Ids are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    name: String,
    dimension: u32,
    node_ids: Vec<u32>,
    element_ids: Vec<u32>,
    is_group: bool,
}

impl Region {
    /// Builds a region; id lists are sorted and de-duplicated.
    pub fn new(
        name: impl Into<String>,
        dimension: u32,
        mut node_ids: Vec<u32>,
        mut element_ids: Vec<u32>,
        is_group: bool,
    ) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::InvalidMesh("region name must not be empty".into()));
        }
        if dimension > 3 {
            return Err(Error::InvalidMesh(format!(
                "region '{name}' has dimension {dimension}"
            )));
        }
        node_ids.sort_unstable();
        node_ids.dedup();
        element_ids.sort_unstable();
        element_ids.dedup();
        if node_ids.first() == Some(&0) || element_ids.first() == Some(&0) {
            return Err(Error::InvalidMesh(format!(
                "region '{name}' references id 0 (ids are 1-based)"
            )));
        }
        Ok(Region {
            name,
            dimension,
            node_ids,
            element_ids,
            is_group,
        })
    }

    /// Region made of the given elements, their nodes, and the maximum element dimension.
    pub fn from_elements(mesh: &Mesh, name: impl Into<String>, element_ids: Vec<u32>) -> Result<Self> {
        let mut nodes = BTreeSet::new();
        let mut dim = 0;
        for &e in &element_ids {
            let idx = mesh.element_index(e)?;
            dim = dim.max(mesh.element_type(idx).dimension());
            nodes.extend(mesh.element_nodes(idx).iter().copied());
        }
        Region::new(name, dim, nodes.into_iter().collect(), element_ids, false)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn node_ids(&self) -> &[u32] {
        &self.node_ids
    }

    pub fn element_ids(&self) -> &[u32] {
        &self.element_ids
    }

    pub fn is_group(&self) -> bool {
        self.is_group
    }

    pub fn num_nodes(&self) -> usize {
        self.node_ids.len()
    }

    pub fn num_elements(&self) -> usize {
        self.element_ids.len()
    }

    /// Position of a global node id within this region's node list.
    pub fn local_node_index(&self, node_id: u32) -> Option<usize> {
        self.node_ids.binary_search(&node_id).ok()
    }
}

/// Summary counts of a mesh.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeshInfo {
    pub num_nodes: usize,
    pub num_elements: usize,
    /// 2 or 3; meshes made only of points or lines report 2.
    pub dimension: u32,
    pub element_counts: BTreeMap<ElementType, usize>,
}

impl MeshInfo {
    fn compute(num_nodes: usize, types: &[ElementType]) -> Self {
        let mut element_counts = BTreeMap::new();
        for &t in types {
            *element_counts.entry(t).or_insert(0) += 1;
        }
        let max_dim = types.iter().map(|t| t.dimension()).max().unwrap_or(0);
        MeshInfo {
            num_nodes,
            num_elements: types.len(),
            dimension: max_dim.max(2),
            element_counts,
        }
    }
}

/// Finite element mesh: node coordinates, typed elements with 1-based
/// zero-padded connectivity, and named regions.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    coordinates: Vec<Point3>,
    element_types: Vec<ElementType>,
    /// Row-major, `width` entries per element.
    connectivity: Vec<u32>,
    width: usize,
    regions: Vec<Region>,
    info: MeshInfo,
}

impl Mesh {
    /// Builds a mesh from per-element node lists (1-based node ids).
    pub fn new(
        coordinates: Vec<Point3>,
        element_types: Vec<ElementType>,
        elements: Vec<Vec<u32>>,
        regions: Vec<Region>,
    ) -> Result<Self> {
        if element_types.len() != elements.len() {
            return Err(Error::InvalidMesh(format!(
                "{} element types for {} connectivity rows",
                element_types.len(),
                elements.len()
            )));
        }
        let width = elements.iter().map(Vec::len).max().unwrap_or(0);
        let mut connectivity = vec![0u32; width * elements.len()];
        for (row, nodes) in connectivity.chunks_mut(width.max(1)).zip(&elements) {
            row[..nodes.len()].copy_from_slice(nodes);
        }
        Self::from_padded(coordinates, element_types, connectivity, width, regions)
    }

    /// Builds a mesh from a flat row-major zero-padded connectivity array.
    pub fn from_padded(
        coordinates: Vec<Point3>,
        element_types: Vec<ElementType>,
        connectivity: Vec<u32>,
        width: usize,
        regions: Vec<Region>,
    ) -> Result<Self> {
        if connectivity.len() != width * element_types.len() {
            return Err(Error::InvalidMesh(format!(
                "connectivity has {} entries, expected {} x {}",
                connectivity.len(),
                element_types.len(),
                width
            )));
        }
        let info = MeshInfo::compute(coordinates.len(), &element_types);
        let mut mesh = Mesh {
            coordinates,
            element_types,
            connectivity,
            width,
            regions: Vec::new(),
            info,
        };
        mesh.validate_connectivity()?;
        for region in regions {
            mesh.add_region(region)?;
        }
        Ok(mesh)
    }

    fn validate_connectivity(&self) -> Result<()> {
        let n = self.coordinates.len() as u32;
        for (i, &t) in self.element_types.iter().enumerate() {
            let row = self.padded_row(i);
            let count = t.node_count();
            if count > self.width {
                return Err(Error::InvalidMesh(format!(
                    "element {} ({t}) needs {count} nodes but connectivity width is {}",
                    i + 1,
                    self.width
                )));
            }
            for (k, &id) in row.iter().enumerate() {
                if k < count {
                    if id == 0 || id > n {
                        return Err(Error::InvalidMesh(format!(
                            "element {} ({t}) references node {id} outside [1, {n}]",
                            i + 1
                        )));
                    }
                } else if id != 0 {
                    return Err(Error::InvalidMesh(format!(
                        "element {} ({t}) has {} non-zero entries, expected {count}",
                        i + 1,
                        row.iter().filter(|&&x| x != 0).count()
                    )));
                }
            }
        }
        Ok(())
    }

    fn validate_region(&self, region: &Region) -> Result<()> {
        if self.regions.iter().any(|r| r.name == region.name) {
            return Err(Error::InvalidMesh(format!(
                "duplicate region name '{}'",
                region.name
            )));
        }
        if let Some(&last) = region.node_ids.last() {
            if last as usize > self.num_nodes() {
                return Err(Error::InvalidMesh(format!(
                    "region '{}' references node {last} of {}",
                    region.name,
                    self.num_nodes()
                )));
            }
        }
        if let Some(&last) = region.element_ids.last() {
            if last as usize > self.num_elements() {
                return Err(Error::InvalidMesh(format!(
                    "region '{}' references element {last} of {}",
                    region.name,
                    self.num_elements()
                )));
            }
        }
        Ok(())
    }

    pub fn add_region(&mut self, region: Region) -> Result<()> {
        self.validate_region(&region)?;
        let pos = self.regions.partition_point(|r| r.name < region.name);
        self.regions.insert(pos, region);
        Ok(())
    }

    pub fn remove_region(&mut self, name: &str) -> Result<Region> {
        let pos = self
            .regions
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegion(name.to_string()))?;
        Ok(self.regions.remove(pos))
    }

    /// Appends nodes, returning the 1-based id of the first new node.
    pub fn append_nodes(&mut self, points: &[Point3]) -> u32 {
        let first = self.coordinates.len() as u32 + 1;
        self.coordinates.extend_from_slice(points);
        self.info = MeshInfo::compute(self.coordinates.len(), &self.element_types);
        first
    }

    /// Appends one element, returning its 1-based id.
    pub fn append_element(&mut self, element_type: ElementType, nodes: &[u32]) -> Result<u32> {
        if nodes.len() != element_type.node_count() {
            return Err(Error::InvalidMesh(format!(
                "{element_type} needs {} nodes, got {}",
                element_type.node_count(),
                nodes.len()
            )));
        }
        if let Some(&bad) = nodes
            .iter()
            .find(|&&id| id == 0 || id as usize > self.coordinates.len())
        {
            return Err(Error::InvalidMesh(format!(
                "node {bad} outside [1, {}]",
                self.coordinates.len()
            )));
        }
        if nodes.len() > self.width {
            let new_width = nodes.len();
            let mut widened = vec![0u32; new_width * self.element_types.len()];
            for i in 0..self.element_types.len() {
                widened[i * new_width..i * new_width + self.width]
                    .copy_from_slice(self.padded_row(i));
            }
            self.connectivity = widened;
            self.width = new_width;
        }
        let mut row = vec![0u32; self.width];
        row[..nodes.len()].copy_from_slice(nodes);
        self.connectivity.extend_from_slice(&row);
        self.element_types.push(element_type);
        self.info = MeshInfo::compute(self.coordinates.len(), &self.element_types);
        Ok(self.element_types.len() as u32)
    }

    /// Replaces all node coordinates (same node count).
    pub fn set_coordinates(&mut self, coordinates: Vec<Point3>) -> Result<()> {
        if coordinates.len() != self.coordinates.len() {
            return Err(Error::InvalidMesh(format!(
                "expected {} coordinates, got {}",
                self.coordinates.len(),
                coordinates.len()
            )));
        }
        self.coordinates = coordinates;
        Ok(())
    }

    pub fn info(&self) -> &MeshInfo {
        &self.info
    }

    pub fn num_nodes(&self) -> usize {
        self.coordinates.len()
    }

    pub fn num_elements(&self) -> usize {
        self.element_types.len()
    }

    pub fn coordinates(&self) -> &[Point3] {
        &self.coordinates
    }

    /// Coordinates of a 1-based node id.
    pub fn node(&self, id: u32) -> Point3 {
        self.coordinates[id as usize - 1]
    }

    pub fn element_types(&self) -> &[ElementType] {
        &self.element_types
    }

    /// Type of the element at 0-based index.
    pub fn element_type(&self, index: usize) -> ElementType {
        self.element_types[index]
    }

    /// 1-based node ids of the element at 0-based index (padding stripped).
    pub fn element_nodes(&self, index: usize) -> &[u32] {
        let n = self.element_types[index].node_count();
        &self.padded_row(index)[..n]
    }

    fn padded_row(&self, index: usize) -> &[u32] {
        &self.connectivity[index * self.width..(index + 1) * self.width]
    }

    /// Connectivity width (maximum nodes per element).
    pub fn connectivity_width(&self) -> usize {
        self.width
    }

    /// Flat row-major zero-padded connectivity.
    pub fn connectivity(&self) -> &[u32] {
        &self.connectivity
    }

    /// Regions sorted by name, which is also the order they are read back
    /// from a file.
    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, name: &str) -> Result<&Region> {
        self.regions
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegion(name.to_string()))
    }

    /// 0-based index of a 1-based element id, bounds checked.
    pub fn element_index(&self, id: u32) -> Result<usize> {
        if id == 0 || id as usize > self.num_elements() {
            return Err(Error::InvalidMesh(format!(
                "element id {id} outside [1, {}]",
                self.num_elements()
            )));
        }
        Ok(id as usize - 1)
    }

    /// Coordinates of the region's nodes in region order.
    pub fn region_points(&self, region: &Region) -> Vec<Point3> {
        region.node_ids().iter().map(|&id| self.node(id)).collect()
    }

    /// Axis-aligned bounding box diagonal length.
    pub fn bbox_diagonal(&self) -> f64 {
        bbox_diagonal(&self.coordinates)
    }
}

pub(crate) fn bbox_diagonal(points: &[Point3]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (0..3).map(|k| (hi[k] - lo[k]).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_tri_mesh() -> Mesh {
        Mesh::new(
            vec![[0., 0., 0.], [1., 0., 0.], [1., 1., 0.], [0., 1., 0.]],
            vec![ElementType::Tria3, ElementType::Tria3],
            vec![vec![1, 2, 3], vec![1, 3, 4]],
            vec![Region::new("surf", 2, vec![1, 2, 3, 4], vec![1, 2], false).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn info_counts() {
        let m = two_tri_mesh();
        assert_eq!(m.info().num_nodes, 4);
        assert_eq!(m.info().num_elements, 2);
        assert_eq!(m.info().dimension, 2);
        assert_eq!(m.info().element_counts[&ElementType::Tria3], 2);
    }

    #[test]
    fn rejects_out_of_range_and_padding_errors() {
        let coords = vec![[0., 0., 0.], [1., 0., 0.]];
        assert!(Mesh::new(coords.clone(), vec![ElementType::Line2], vec![vec![1, 3]], vec![]).is_err());
        assert!(Mesh::new(coords.clone(), vec![ElementType::Line2], vec![vec![1, 0]], vec![]).is_err());
        assert!(Mesh::from_padded(coords.clone(), vec![ElementType::Point], vec![1, 2], 2, vec![]).is_err());
        assert!(Mesh::new(coords, vec![ElementType::Line2], vec![vec![1, 2]], vec![]).is_ok());
    }

    #[test]
    fn region_rules() {
        assert!(Region::new("", 2, vec![], vec![], false).is_err());
        let r = Region::new("a", 1, vec![3, 1, 1, 2], vec![2, 1], true).unwrap();
        assert_eq!(r.node_ids(), &[1, 2, 3]);
        assert_eq!(r.element_ids(), &[1, 2]);
        let mut m = two_tri_mesh();
        assert!(m.add_region(Region::new("surf", 2, vec![1], vec![], false).unwrap()).is_err());
        assert!(m.add_region(Region::new("b", 2, vec![5], vec![], false).unwrap()).is_err());
        assert!(m.add_region(Region::new("b", 2, vec![], vec![3], false).unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn connectivity_corruption_is_rejected(idx in 0usize..6, bad in prop_oneof![Just(0u32), 5u32..1000]) {
            let mut conn = vec![1u32, 2, 3, 1, 3, 4];
            conn[idx] = bad;
            let r = Mesh::from_padded(
                vec![[0.; 3]; 4],
                vec![ElementType::Tria3, ElementType::Tria3],
                conn,
                3,
                vec![],
            );
            prop_assert!(r.is_err());
        }

        #[test]
        fn info_tracks_mutations(ops in proptest::collection::vec((0u8..3, 0usize..20), 1..30)) {
            let mut m = two_tri_mesh();
            for (op, k) in ops {
                match op {
                    0 => { m.append_nodes(&[[k as f64, 0., 1.]]); }
                    1 => {
                        let t = ElementType::ALL[k % ElementType::ALL.len()];
                        let n = m.num_nodes() as u32;
                        let nodes: Vec<u32> = (0..t.node_count() as u32).map(|i| 1 + (i % n)).collect();
                        m.append_element(t, &nodes).unwrap();
                    }
                    _ => { let _ = m.set_coordinates(vec![[k as f64; 3]; m.num_nodes()]); }
                }
                let recomputed = MeshInfo::compute(m.num_nodes(), m.element_types());
                prop_assert_eq!(m.info(), &recomputed);
                prop_assert_eq!(recomputed.element_counts.values().sum::<usize>(), m.num_elements());
            }
        }
    }
}
