//! Node-to-cell and cell-to-node averaging on one region.

use crate::error::{Error, Result};
use crate::model::{Mesh, ResType, ResultArray};

use super::matrix::{DofSpace, InterpolationMatrix};

/// Operator mapping region node values to region element values: each
/// element gets the mean of its node values.
pub fn node2cell_matrix(mesh: &Mesh, region_name: &str) -> Result<InterpolationMatrix> {
    let region = mesh.region(region_name)?;
    let rows = region
        .element_ids()
        .iter()
        .map(|&id| {
            let nodes = mesh.element_nodes(mesh.element_index(id)?);
            if nodes.is_empty() {
                return Err(Error::InvalidMesh(format!("element {id} has no nodes")));
            }
            let w = 1.0 / nodes.len() as f64;
            nodes
                .iter()
                .map(|&n| {
                    region.local_node_index(n).map(|k| (k, w)).ok_or_else(|| {
                        Error::InvalidMesh(format!(
                            "element {id} uses node {n} which is not in region '{region_name}'"
                        ))
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InterpolationMatrix::from_rows(region.num_nodes(), rows)?.with_spaces(
        DofSpace::new(region_name, ResType::Node),
        DofSpace::new(region_name, ResType::Element),
    ))
}

/// Operator mapping region element values to region node values: each node
/// gets the mean over its adjacent region elements. Nodes without adjacent
/// elements are unmatched (zero) and logged.
pub fn cell2node_matrix(mesh: &Mesh, region_name: &str) -> Result<InterpolationMatrix> {
    let region = mesh.region(region_name)?;
    let mut adjacent: Vec<Vec<usize>> = vec![Vec::new(); region.num_nodes()];
    for (e, &id) in region.element_ids().iter().enumerate() {
        for &n in mesh.element_nodes(mesh.element_index(id)?) {
            let k = region.local_node_index(n).ok_or_else(|| {
                Error::InvalidMesh(format!(
                    "element {id} uses node {n} which is not in region '{region_name}'"
                ))
            })?;
            if adjacent[k].last() != Some(&e) {
                adjacent[k].push(e);
            }
        }
    }
    let rows = adjacent
        .into_iter()
        .enumerate()
        .map(|(k, elems)| {
            if elems.is_empty() {
                log::warn!(
                    "node {} of region '{region_name}' has no adjacent element (unmatched)",
                    region.node_ids()[k]
                );
            }
            let w = 1.0 / elems.len().max(1) as f64;
            elems.into_iter().map(|e| (e, w)).collect()
        })
        .collect();
    Ok(InterpolationMatrix::from_rows(region.num_elements(), rows)?.with_spaces(
        DofSpace::new(region_name, ResType::Element),
        DofSpace::new(region_name, ResType::Node),
    ))
}

/// Averages nodal values onto element centroids.
pub fn node2cell(mesh: &Mesh, region_name: &str, values: &ResultArray) -> Result<ResultArray> {
    if values.res_type() != ResType::Node {
        return Err(Error::InvalidArgument(format!(
            "node2cell needs node data, '{}' is {:?}",
            values.quantity(),
            values.res_type()
        )));
    }
    node2cell_matrix(mesh, region_name)?.apply(values)
}

/// Averages element values onto nodes.
pub fn cell2node(mesh: &Mesh, region_name: &str, values: &ResultArray) -> Result<ResultArray> {
    if values.res_type() != ResType::Element {
        return Err(Error::InvalidArgument(format!(
            "cell2node needs element data, '{}' is {:?}",
            values.quantity(),
            values.res_type()
        )));
    }
    cell2node_matrix(mesh, region_name)?.apply(values)
}
