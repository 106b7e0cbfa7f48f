//! Projection of target nodes onto a source surface, evaluated with linear
//! shape functions at the hit point.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{compute_node_normals, element_normal, Mesh, Point3, ResType};
use crate::spatial::KdTree;
use crate::vec3::{self, cross, dot, sub};

use super::matrix::{DofSpace, InterpolationMatrix};

const INSIDE_TOL: f64 = 1e-8;
const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 20;
const PRUNE_TOL: f64 = 1e-13;

/// Direction along which each target node is projected.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ProjectionDirection {
    /// Averaged node normals of the target region; nodes without a usable
    /// normal use the normal of the nearest source element.
    #[default]
    NodeNormals,
    Constant(Point3),
    /// One vector per target region node.
    PerNode(Vec<Point3>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionConfig {
    pub direction: ProjectionDirection,
    /// Largest accepted distance between a target node and its hit point.
    pub max_distance: f64,
    /// Source elements whose centroid lies within this radius of a target
    /// node are tested.
    pub search_radius: f64,
}

impl ProjectionConfig {
    pub fn new(max_distance: f64, search_radius: f64) -> Self {
        ProjectionConfig {
            direction: ProjectionDirection::NodeNormals,
            max_distance,
            search_radius,
        }
    }
}

/// Linearized source surface element: corner coordinates and the region
/// local indices of its corner nodes.
struct Face {
    corners: Vec<Point3>,
    columns: Vec<usize>,
}

/// Hit of the line `p + s d` with a face: signed distance and corner weights.
fn intersect(face: &Face, p: Point3, d: Point3) -> Option<(f64, Vec<f64>)> {
    match face.corners.len() {
        3 => intersect_tria(&face.corners, p, d),
        4 => intersect_quad(&face.corners, p, d),
        _ => None,
    }
}

fn intersect_tria(c: &[Point3], p: Point3, d: Point3) -> Option<(f64, Vec<f64>)> {
    let (e1, e2) = (sub(c[1], c[0]), sub(c[2], c[0]));
    let n = cross(e1, e2);
    let denom = dot(d, n);
    if denom.abs() <= 1e-14 * vec3::norm(n) {
        return None;
    }
    let s = dot(sub(c[0], p), n) / denom;
    let q = sub(vec3::add(p, vec3::scale(d, s)), c[0]);
    let nn = dot(n, n);
    let l1 = dot(cross(q, e2), n) / nn;
    let l2 = dot(cross(e1, q), n) / nn;
    let w = vec![1.0 - l1 - l2, l1, l2];
    w.iter().all(|&x| x >= -INSIDE_TOL).then_some((s, w))
}

fn quad_shape(xi: f64, eta: f64) -> [f64; 4] {
    [
        0.25 * (1.0 - xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 + eta),
        0.25 * (1.0 - xi) * (1.0 + eta),
    ]
}

/// Newton solve of `X(xi, eta) - s d = p` for the bilinear quad.
fn intersect_quad(c: &[Point3], p: Point3, d: Point3) -> Option<(f64, Vec<f64>)> {
    let (mut xi, mut eta) = (0.0, 0.0);
    let center = vec3::mean(c.iter().copied())?;
    let n = cross(sub(c[2], c[0]), sub(c[3], c[1]));
    let denom = dot(d, n);
    if denom.abs() <= 1e-14 * vec3::norm(n) {
        return None;
    }
    let mut s = dot(sub(center, p), n) / denom;
    let mut converged = false;
    for _ in 0..NEWTON_MAX_ITER {
        let nsh = quad_shape(xi, eta);
        let dxi = [-(1.0 - eta), 1.0 - eta, 1.0 + eta, -(1.0 + eta)];
        let deta = [-(1.0 - xi), -(1.0 + xi), 1.0 + xi, 1.0 - xi];
        let mut x = [0.0; 3];
        let (mut tx, mut te) = ([0.0; 3], [0.0; 3]);
        for k in 0..4 {
            x = vec3::add(x, vec3::scale(c[k], nsh[k]));
            tx = vec3::add(tx, vec3::scale(c[k], 0.25 * dxi[k]));
            te = vec3::add(te, vec3::scale(c[k], 0.25 * deta[k]));
        }
        let f = sub(sub(x, vec3::scale(d, s)), p);
        let jac = nalgebra::Matrix3::new(tx[0], te[0], -d[0], tx[1], te[1], -d[1], tx[2], te[2], -d[2]);
        let delta = jac.lu().solve(&nalgebra::Vector3::new(-f[0], -f[1], -f[2]))?;
        xi += delta[0];
        eta += delta[1];
        s += delta[2];
        if !(xi.is_finite() && eta.is_finite() && s.is_finite()) {
            return None;
        }
        if delta[0].abs().max(delta[1].abs()) < NEWTON_TOL {
            converged = true;
            break;
        }
    }
    if !converged || xi.abs() > 1.0 + INSIDE_TOL || eta.abs() > 1.0 + INSIDE_TOL {
        return None;
    }
    Some((s, quad_shape(xi, eta).to_vec()))
}

fn row_from_weights(face: &Face, w: &[f64]) -> Vec<(usize, f64)> {
    let mut row: Vec<(usize, f64)> = face
        .columns
        .iter()
        .zip(w)
        .filter(|(_, w)| w.abs() >= PRUNE_TOL)
        .map(|(&c, &w)| (c, w))
        .collect();
    let sum: f64 = row.iter().map(|e| e.1).sum();
    row.iter_mut().for_each(|e| e.1 /= sum);
    row
}

/// Builds the operator from source region nodes to target region nodes.
pub fn build_projection(
    source_mesh: &Mesh,
    source_region: &str,
    target_mesh: &Mesh,
    target_region: &str,
    cfg: &ProjectionConfig,
) -> Result<InterpolationMatrix> {
    if !(cfg.max_distance > 0.0) || !(cfg.search_radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "max_distance and search_radius must be > 0, got {} and {}",
            cfg.max_distance, cfg.search_radius
        )));
    }
    let src = source_mesh.region(source_region)?;
    let tgt = target_mesh.region(target_region)?;
    let targets = target_mesh.region_points(tgt);

    let mut faces = Vec::new();
    let mut face_elems = Vec::new();
    for &id in src.element_ids() {
        let idx = source_mesh.element_index(id)?;
        let t = source_mesh.element_type(idx);
        if t.dimension() != 2 {
            continue;
        }
        let corners = &source_mesh.element_nodes(idx)[..t.corner_count()];
        let columns = corners
            .iter()
            .map(|&n| {
                src.local_node_index(n).ok_or_else(|| {
                    Error::InvalidMesh(format!("element {id} uses node {n} outside region '{source_region}'"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        faces.push(Face {
            corners: corners.iter().map(|&n| source_mesh.node(n)).collect(),
            columns,
        });
        face_elems.push(idx);
    }
    if faces.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "source region '{source_region}' has no surface elements to project onto"
        )));
    }
    let centroids: Vec<Point3> = faces
        .iter()
        .map(|f| vec3::mean(f.corners.iter().copied()).expect("faces have corners"))
        .collect();
    let tree = KdTree::new(&centroids);

    let directions: Vec<Option<Point3>> = match &cfg.direction {
        ProjectionDirection::Constant(d) => {
            let d = vec3::normalize(*d)
                .ok_or_else(|| Error::InvalidArgument("projection direction must be non-zero".into()))?;
            vec![Some(d); targets.len()]
        }
        ProjectionDirection::PerNode(ds) => {
            if ds.len() != targets.len() {
                return Err(Error::ShapeMismatch(format!(
                    "{} projection directions for {} target nodes",
                    ds.len(),
                    targets.len()
                )));
            }
            ds.iter().map(|&d| vec3::normalize(d)).collect()
        }
        ProjectionDirection::NodeNormals => match compute_node_normals(target_mesh, tgt) {
            Ok(n) => n.into_iter().map(vec3::normalize).collect(),
            Err(e) => {
                log::warn!("target node normals unavailable ({e}); using nearest source element normals");
                vec![None; targets.len()]
            }
        },
    };

    let results: Vec<(bool, Vec<(usize, f64)>, bool)> = targets
        .par_iter()
        .zip(directions.par_iter())
        .map(|(&p, dir)| {
            let mut fallback = false;
            let d = match dir {
                Some(d) => Some(*d),
                None => {
                    fallback = true;
                    tree.nearest_one(p).and_then(|h| element_normal(source_mesh, face_elems[h.index]))
                }
            };
            let Some(d) = d else {
                return (false, Vec::new(), fallback);
            };
            let candidates = tree.within(p, cfg.search_radius);
            let any = !candidates.is_empty();
            let best = candidates
                .iter()
                .filter_map(|h| intersect(&faces[h.index], p, d).map(|(s, w)| (s.abs(), h.index, w)))
                .filter(|(s, _, _)| *s <= cfg.max_distance)
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let row = best.map_or_else(Vec::new, |(_, f, w)| row_from_weights(&faces[f], &w));
            (any, row, fallback)
        })
        .collect();

    if !targets.is_empty() && results.iter().all(|r| !r.0) {
        return Err(Error::InvalidArgument(format!(
            "no source element centroid within search_radius {} of any target node",
            cfg.search_radius
        )));
    }
    let fallbacks = results.iter().filter(|r| r.2).count();
    if fallbacks > 0 && matches!(cfg.direction, ProjectionDirection::NodeNormals) {
        log::warn!("{fallbacks} target nodes had a degenerate normal; used the nearest source element normal");
    }
    let rows: Vec<Vec<(usize, f64)>> = results.into_iter().map(|r| r.1).collect();
    for (k, row) in rows.iter().enumerate() {
        if row.is_empty() {
            log::warn!(
                "projection: target node {} of region '{target_region}' is unmatched",
                tgt.node_ids()[k]
            );
        }
    }
    Ok(InterpolationMatrix::from_rows(src.num_nodes(), rows)?.with_spaces(
        DofSpace::new(source_region, ResType::Node),
        DofSpace::new(target_region, ResType::Node),
    ))
}
