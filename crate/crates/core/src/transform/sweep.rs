//! Mesh generation by sweeping a 1D/2D region along a path or around an axis.

use crate::error::{Error, Result};
use crate::model::{ElementType, Mesh, Point3, Region};
use crate::vec3::{self, cross, dot, sub};

use super::rigid::{mat_vec, Matrix3};

fn centroid(coords: &[Point3], nodes: &[u32]) -> Point3 {
    vec3::mean(nodes.iter().map(|&n| coords[n as usize - 1])).expect("elements have nodes")
}

/// Reorders a swept volume element so that it has positive volume.
fn orient(t: ElementType, nodes: &mut [u32], coords: &[Point3]) {
    let p = |k: usize, nodes: &[u32]| coords[nodes[k] as usize - 1];
    match t {
        ElementType::Tet4 => {
            let v = dot(cross(sub(p(1, nodes), p(0, nodes)), sub(p(2, nodes), p(0, nodes))), sub(p(3, nodes), p(0, nodes)));
            if v < 0.0 {
                nodes.swap(1, 2);
            }
        }
        ElementType::Pyra5 => {
            let n = cross(sub(p(2, nodes), p(0, nodes)), sub(p(3, nodes), p(1, nodes)));
            if dot(n, sub(p(4, nodes), centroid(coords, &nodes[..4]))) < 0.0 {
                nodes.swap(1, 3);
            }
        }
        ElementType::Wedge6 => {
            let n = cross(sub(p(1, nodes), p(0, nodes)), sub(p(2, nodes), p(0, nodes)));
            if dot(n, sub(centroid(coords, &nodes[3..]), centroid(coords, &nodes[..3]))) < 0.0 {
                nodes.swap(1, 2);
                nodes.swap(4, 5);
            }
        }
        ElementType::Hexa8 => {
            let n = cross(sub(p(2, nodes), p(0, nodes)), sub(p(3, nodes), p(1, nodes)));
            if dot(n, sub(centroid(coords, &nodes[4..]), centroid(coords, &nodes[..4]))) < 0.0 {
                nodes.swap(1, 3);
                nodes.swap(5, 7);
            }
        }
        _ => {}
    }
}

/// Base region elements as `(type, nodes as local region indices)`.
fn base_elements(mesh: &Mesh, region: &Region) -> Result<Vec<(ElementType, Vec<usize>)>> {
    if !(1..=2).contains(&region.dimension()) {
        return Err(Error::InvalidArgument(format!(
            "region '{}' has dimension {}; sweeping needs a 1D or 2D region",
            region.name(),
            region.dimension()
        )));
    }
    region
        .element_ids()
        .iter()
        .map(|&id| {
            let idx = mesh.element_index(id)?;
            let t = mesh.element_type(idx);
            if !matches!(t, ElementType::Line2 | ElementType::Tria3 | ElementType::Quad4) {
                return Err(Error::Unsupported(format!(
                    "cannot sweep {t} element {id}; supported base types are LINE2, TRIA3, QUAD4"
                )));
            }
            let local = mesh
                .element_nodes(idx)
                .iter()
                .map(|&n| {
                    region.local_node_index(n).ok_or_else(|| {
                        Error::InvalidMesh(format!("element {id} uses node {n} outside region '{}'", region.name()))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((t, local))
        })
        .collect()
}

fn swept_type(t: ElementType) -> ElementType {
    match t {
        ElementType::Line2 => ElementType::Quad4,
        ElementType::Tria3 => ElementType::Wedge6,
        _ => ElementType::Hexa8,
    }
}

fn build(coords: Vec<Point3>, cells: Vec<(ElementType, Vec<u32>)>, name: &str, dim: u32) -> Result<Mesh> {
    let n = coords.len() as u32;
    let (types, elems): (Vec<_>, Vec<_>) = cells.into_iter().unzip();
    let ne = types.len() as u32;
    let region = Region::new(name, dim, (1..=n).collect(), (1..=ne).collect(), false)?;
    Mesh::new(coords, types, elems, vec![region])
}

/// Extrudes a region along a path of offsets. Each offset adds one layer of
/// nodes at the cumulative position and one layer of elements:
/// LINE2 -> QUAD4, TRIA3 -> WEDGE6, QUAD4 -> HEXA8. The result holds one
/// region with the same name.
pub fn extrude_mesh_region(mesh: &Mesh, region_name: &str, path: &[Point3]) -> Result<Mesh> {
    let region = mesh.region(region_name)?;
    let base = base_elements(mesh, region)?;
    if path.is_empty() {
        return Err(Error::InvalidArgument("extrusion path needs at least one segment".into()));
    }
    let scale = mesh.bbox_diagonal().max(path.iter().map(|&d| vec3::norm(d)).fold(0.0, f64::max));
    if let Some(k) = path.iter().position(|&d| !(vec3::norm(d) > 1e-12 * scale)) {
        return Err(Error::InvalidArgument(format!("extrusion segment {k} has zero length")));
    }
    let base_pts = mesh.region_points(region);
    let nb = base_pts.len();
    let mut coords = base_pts.clone();
    let mut offset = [0.0; 3];
    for d in path {
        offset = vec3::add(offset, *d);
        coords.extend(base_pts.iter().map(|&p| vec3::add(p, offset)));
    }
    let id = |layer: usize, k: usize| (layer * nb + k + 1) as u32;
    let mut cells = Vec::with_capacity(base.len() * path.len());
    for l in 0..path.len() {
        for (t, nodes) in &base {
            let lower: Vec<u32> = nodes.iter().map(|&k| id(l, k)).collect();
            let upper: Vec<u32> = nodes.iter().map(|&k| id(l + 1, k)).collect();
            let new_t = swept_type(*t);
            let mut conn = if *t == ElementType::Line2 {
                vec![lower[0], lower[1], upper[1], upper[0]]
            } else {
                [lower, upper].concat()
            };
            orient(new_t, &mut conn, &coords);
            cells.push((new_t, conn));
        }
    }
    build(coords, cells, region_name, region.dimension() + 1)
}

/// Rotation by `angle` about a unit axis (Rodrigues).
fn axis_rotation(axis: Point3, angle: f64) -> Matrix3 {
    let (s, c) = angle.sin_cos();
    let [x, y, z] = axis;
    let t = 1.0 - c;
    [
        [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
        [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
        [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
    ]
}

/// Revolves a region about the axis through `axis_point` along `axis_dir` by
/// `angle` radians in `num_segments` equal steps.
///
/// Nodes on the axis (within `1e-10` of the bounding-box diagonal) are
/// shared between layers, which collapses elements touching the axis:
/// LINE2 with one node on the axis -> TRIA3, QUAD4 with an edge on the axis ->
/// WEDGE6, TRIA3 with one or two nodes on it -> PYRA5 or TET4. A full turn
/// closes the ring by reusing the first layer.
pub fn revolve_mesh_region(
    mesh: &Mesh,
    region_name: &str,
    axis_point: Point3,
    axis_dir: Point3,
    angle: f64,
    num_segments: usize,
) -> Result<Mesh> {
    let region = mesh.region(region_name)?;
    let base = base_elements(mesh, region)?;
    let axis = vec3::normalize(axis_dir)
        .ok_or_else(|| Error::InvalidArgument("revolution axis direction must be non-zero".into()))?;
    let two_pi = 2.0 * std::f64::consts::PI;
    if !(angle.is_finite() && angle != 0.0 && angle.abs() <= two_pi * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument(format!("revolution angle must be in [-2pi, 2pi] \\ {{0}}, got {angle}")));
    }
    if num_segments == 0 {
        return Err(Error::InvalidArgument("num_segments must be >= 1".into()));
    }
    let full = (angle.abs() - two_pi).abs() <= 1e-12 * two_pi;
    if full && num_segments < 3 {
        return Err(Error::InvalidArgument("a full revolution needs at least 3 segments".into()));
    }

    let base_pts = mesh.region_points(region);
    let tol = 1e-10 * crate::model::bbox_diagonal(&base_pts).max(vec3::norm(axis_point)).max(f64::MIN_POSITIVE);
    let on_axis: Vec<bool> = base_pts
        .iter()
        .map(|&p| {
            let d = sub(p, axis_point);
            vec3::norm(sub(d, vec3::scale(axis, dot(d, axis)))) <= tol
        })
        .collect();

    let layers = if full { num_segments } else { num_segments + 1 };
    let mut coords = Vec::new();
    // ids[layer][k]
    let mut ids = vec![vec![0u32; base_pts.len()]; layers];
    for l in 0..layers {
        let r = axis_rotation(axis, angle * l as f64 / num_segments as f64);
        for (k, &p) in base_pts.iter().enumerate() {
            if on_axis[k] && l > 0 {
                ids[l][k] = ids[0][k];
                continue;
            }
            let q = vec3::add(axis_point, mat_vec(&r, sub(p, axis_point)));
            coords.push(q);
            ids[l][k] = coords.len() as u32;
        }
    }

    let mut cells = Vec::with_capacity(base.len() * num_segments);
    for s in 0..num_segments {
        let (l0, l1) = (s, (s + 1) % layers);
        for (t, nodes) in &base {
            let a = |i: usize| ids[l0][nodes[i]];
            let b = |i: usize| ids[l1][nodes[i]];
            let axial: Vec<bool> = nodes.iter().map(|&k| on_axis[k]).collect();
            let n_on = axial.iter().filter(|&&x| x).count();
            let (new_t, mut conn) = match (t, n_on) {
                (_, n) if n == nodes.len() => {
                    return Err(Error::InvalidArgument(format!(
                        "a {t} element of region '{region_name}' lies entirely on the revolution axis"
                    )))
                }
                (_, 0) => {
                    let conn = if *t == ElementType::Line2 {
                        vec![a(0), a(1), b(1), b(0)]
                    } else {
                        (0..nodes.len()).map(a).chain((0..nodes.len()).map(b)).collect()
                    };
                    (swept_type(*t), conn)
                }
                (ElementType::Line2, 1) => {
                    let (on, off) = if axial[0] { (0, 1) } else { (1, 0) };
                    (ElementType::Tria3, vec![a(on), a(off), b(off)])
                }
                (ElementType::Tria3, 1) => {
                    let on = axial.iter().position(|&x| x).unwrap();
                    let (i, j) = ((on + 1) % 3, (on + 2) % 3);
                    (ElementType::Pyra5, vec![a(i), a(j), b(j), b(i), a(on)])
                }
                (ElementType::Tria3, 2) => {
                    let off = axial.iter().position(|&x| !x).unwrap();
                    let (i, j) = ((off + 1) % 3, (off + 2) % 3);
                    (ElementType::Tet4, vec![a(i), a(j), a(off), b(off)])
                }
                (ElementType::Quad4, 2) => {
                    // the two axis nodes must share an edge
                    let Some(e) = (0..4).find(|&e| axial[e] && axial[(e + 1) % 4]) else {
                        return Err(Error::Unsupported(
                            "QUAD4 with two opposite nodes on the revolution axis".into(),
                        ));
                    };
                    let (p, q, r, w) = (e, (e + 1) % 4, (e + 2) % 4, (e + 3) % 4);
                    (ElementType::Wedge6, vec![a(p), a(w), b(w), a(q), a(r), b(r)])
                }
                _ => {
                    return Err(Error::Unsupported(format!(
                        "{t} with {n_on} node(s) on the revolution axis cannot be revolved"
                    )))
                }
            };
            orient(new_t, &mut conn, &coords);
            cells.push((new_t, conn));
        }
    }
    build(coords, cells, region_name, region.dimension() + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::single_region_mesh;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn quad(x0: f64) -> Mesh {
        single_region_mesh(
            vec![[x0, 0., 0.], [x0 + 1., 0., 0.], [x0 + 1., 1., 0.], [x0, 1., 0.]],
            vec![ElementType::Quad4],
            vec![vec![1, 2, 3, 4]],
            "base",
        )
        .unwrap()
    }

    fn volume_sign_ok(m: &Mesh) -> bool {
        (0..m.num_elements()).all(|i| {
            let mut nodes = m.element_nodes(i).to_vec();
            let before = nodes.clone();
            orient(m.element_type(i), &mut nodes, m.coordinates());
            nodes == before
        })
    }

    #[test]
    fn extrude_quad_and_counts() {
        let m = extrude_mesh_region(&quad(0.0), "base", &[[0., 0., 1.]]).unwrap();
        assert_eq!(m.num_elements(), 1);
        assert_eq!(m.num_nodes(), 8);
        assert_eq!(m.element_type(0), ElementType::Hexa8);
        let down = extrude_mesh_region(&quad(0.0), "base", &[[0., 0., -1.], [0., 0., -0.5], [0.1, 0., -1.]]).unwrap();
        assert_eq!(down.num_elements(), 3);
        assert_eq!(down.num_nodes(), 16);
        assert!(volume_sign_ok(&down));
        assert_eq!(down.region("base").unwrap().dimension(), 3);
    }

    #[test]
    fn extrude_errors() {
        assert!(extrude_mesh_region(&quad(0.0), "base", &[[0., 0., 0.]]).is_err());
        assert!(extrude_mesh_region(&quad(0.0), "base", &[]).is_err());
        let pts = single_region_mesh(vec![[0., 0., 0.]], vec![ElementType::Point], vec![vec![1]], "p").unwrap();
        assert!(extrude_mesh_region(&pts, "p", &[[1., 0., 0.]]).is_err());
    }

    #[test]
    fn revolve_full_ring_and_quarter() {
        let seg = single_region_mesh(
            vec![[1., 0., 0.], [2., 0., 0.]],
            vec![ElementType::Line2],
            vec![vec![1, 2]],
            "s",
        )
        .unwrap();
        let ring = revolve_mesh_region(&seg, "s", [0.; 3], [0., 0., 1.], 2.0 * PI, 4).unwrap();
        assert_eq!(ring.num_nodes(), 8);
        assert_eq!(ring.num_elements(), 4);
        // last element closes onto the first layer
        let last = ring.element_nodes(3);
        assert!(last.contains(&1) && last.contains(&2));

        let q = revolve_mesh_region(&quad(1.0), "base", [0.; 3], [0., 1., 0.], FRAC_PI_2, 1).unwrap();
        assert_eq!(q.num_elements(), 1);
        assert_eq!(q.element_type(0), ElementType::Hexa8);
        assert!(volume_sign_ok(&q));
        for p in q.coordinates() {
            let r = (p[0] * p[0] + p[2] * p[2]).sqrt();
            assert!((r - 1.0).abs() < 1e-12 || (r - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn revolve_axis_degeneracies() {
        let on = revolve_mesh_region(&quad(0.0), "base", [0.; 3], [0., 1., 0.], PI, 3).unwrap();
        assert!(on.element_types().iter().all(|&t| t == ElementType::Wedge6));
        assert_eq!(on.num_nodes(), 2 + 2 * 4);
        assert!(volume_sign_ok(&on));

        let tri = single_region_mesh(
            vec![[0., 0., 0.], [1., 0., 0.], [0., 1., 0.]],
            vec![ElementType::Tria3],
            vec![vec![1, 2, 3]],
            "t",
        )
        .unwrap();
        let t1 = revolve_mesh_region(&tri, "t", [0.; 3], [1., 0., 0.], FRAC_PI_2, 2).unwrap();
        assert!(t1.element_types().iter().all(|&t| t == ElementType::Tet4));
        let t2 = revolve_mesh_region(&tri, "t", [0., 0., 0.], [1., 1., 0.], FRAC_PI_2, 2).unwrap();
        assert!(t2.element_types().iter().all(|&t| t == ElementType::Pyra5));
        assert!(volume_sign_ok(&t1) && volume_sign_ok(&t2));

        let line = single_region_mesh(vec![[0., 0., 0.], [0., 1., 0.]], vec![ElementType::Line2], vec![vec![1, 2]], "l").unwrap();
        assert!(revolve_mesh_region(&line, "l", [0.; 3], [0., 1., 0.], PI, 2).is_err());
        assert!(revolve_mesh_region(&quad(1.0), "base", [0.; 3], [0., 1., 0.], 0.0, 2).is_err());
    }
}
