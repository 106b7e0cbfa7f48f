use ndarray::Array3;

use crate::error::{Error, Result};
use crate::model::{from_view3, Mesh, Point3, ResultArray};
use crate::vec3;

pub type Matrix3 = [[f64; 3]; 3];

/// Rotation followed by translation, `x' = R x + t`.
///
/// Angles are radians: `alpha` about x, `beta` about y, `gamma` about z, with
/// `R = Rz(gamma) Ry(beta) Rx(alpha)` (intrinsic Z-Y'-X'' order).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RigidTransform {
    pub translation: Point3,
    /// `[alpha, beta, gamma]`
    pub euler_angles: [f64; 3],
}

fn matmul(a: &Matrix3, b: &Matrix3) -> Matrix3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn mat_vec(m: &Matrix3, v: Point3) -> Point3 {
    [vec3::dot(m[0], v), vec3::dot(m[1], v), vec3::dot(m[2], v)]
}

fn transpose(m: &Matrix3) -> Matrix3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m[j][i];
        }
    }
    t
}

impl RigidTransform {
    pub fn new(translation: Point3, euler_angles: [f64; 3]) -> Self {
        RigidTransform { translation, euler_angles }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn translation(t: Point3) -> Self {
        Self::new(t, [0.0; 3])
    }

    pub fn rotation(&self) -> Matrix3 {
        let [a, b, g] = self.euler_angles;
        let (sa, ca) = a.sin_cos();
        let (sb, cb) = b.sin_cos();
        let (sg, cg) = g.sin_cos();
        let rx = [[1.0, 0.0, 0.0], [0.0, ca, -sa], [0.0, sa, ca]];
        let ry = [[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]];
        let rz = [[cg, -sg, 0.0], [sg, cg, 0.0], [0.0, 0.0, 1.0]];
        matmul(&rz, &matmul(&ry, &rx))
    }

    /// Builds a transform from a rotation matrix (assumed orthonormal).
    pub fn from_matrix(r: &Matrix3, translation: Point3) -> Self {
        let beta = (-r[2][0]).clamp(-1.0, 1.0).asin();
        let (alpha, gamma) = if r[2][0].abs() < 1.0 - 1e-12 {
            (r[2][1].atan2(r[2][2]), r[1][0].atan2(r[0][0]))
        } else {
            // gimbal lock: only alpha -/+ gamma is defined, put it all in alpha
            (r[0][1].atan2(r[1][1]) * -r[2][0].signum(), 0.0)
        };
        RigidTransform::new(translation, [alpha, beta, gamma])
    }

    pub fn apply_point(&self, p: Point3) -> Point3 {
        vec3::add(mat_vec(&self.rotation(), p), self.translation)
    }

    pub fn apply_vector(&self, v: Point3) -> Point3 {
        mat_vec(&self.rotation(), v)
    }

    pub fn inverse(&self) -> Self {
        let rt = transpose(&self.rotation());
        let t = vec3::scale(mat_vec(&rt, self.translation), -1.0);
        Self::from_matrix(&rt, t)
    }

    /// `self` after `first`: `x -> self(first(x))`.
    pub fn compose(&self, first: &RigidTransform) -> Self {
        let r = matmul(&self.rotation(), &first.rotation());
        Self::from_matrix(&r, self.apply_point(first.translation))
    }
}

/// Moves the nodes of the given regions (all nodes when `regions` is empty)
/// and rotates the given 3-component vector arrays. Scalars are left to the
/// caller; vector data is rotated but not translated.
pub fn transform_mesh_data(
    mesh: &Mesh,
    regions: &[&str],
    transform: &RigidTransform,
    vector_arrays: &[ResultArray],
) -> Result<(Mesh, Vec<ResultArray>)> {
    let mut coords = mesh.coordinates().to_vec();
    if regions.is_empty() {
        coords.iter_mut().for_each(|p| *p = transform.apply_point(*p));
    } else {
        let mut moved = vec![false; coords.len()];
        for name in regions {
            for &id in mesh.region(name)?.node_ids() {
                moved[id as usize - 1] = true;
            }
        }
        for (p, m) in coords.iter_mut().zip(moved) {
            if m {
                *p = transform.apply_point(*p);
            }
        }
    }
    let mut out = mesh.clone();
    out.set_coordinates(coords)?;

    let r = transform.rotation();
    let arrays = vector_arrays
        .iter()
        .map(|a| {
            if a.num_dims() != 3 {
                return Err(Error::InvalidArgument(format!(
                    "'{}' has {} components; only 3-component vectors can be rotated",
                    a.quantity(),
                    a.num_dims()
                )));
            }
            if !regions.is_empty() && !regions.contains(&a.region()) {
                return Err(Error::InvalidArgument(format!(
                    "'{}' is defined on region '{}' which is not transformed",
                    a.quantity(),
                    a.region()
                )));
            }
            let b = a.to_builder();
            if let Some(v) = a.real_view3() {
                b.build(from_view3(rotate(&r, v), a.res_type()))
            } else {
                b.build(from_view3(rotate(&r, a.complex_view3().unwrap()), a.res_type()))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((out, arrays))
}

fn rotate<T>(r: &Matrix3, v: ndarray::ArrayView3<'_, T>) -> Array3<T>
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let (n, m, _) = v.dim();
    Array3::from_shape_fn((n, m, 3), |(s, i, k)| {
        (0..3).fold(T::default(), |acc, j| acc + v[[s, i, j]] * r[k][j])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{single_region_mesh, ElementType, ResType};
    use std::f64::consts::FRAC_PI_2;

    fn close(a: Point3, b: Point3) -> bool {
        vec3::dist(a, b) < 1e-12
    }

    #[test]
    fn quarter_turn_about_z() {
        let t = RigidTransform::new([0.0; 3], [0.0, 0.0, FRAC_PI_2]);
        assert!(close(t.apply_point([1., 0., 0.]), [0., 1., 0.]));
        let t = RigidTransform::new([0.0; 3], [FRAC_PI_2, 0.0, 0.0]);
        assert!(close(t.apply_point([0., 1., 0.]), [0., 0., 1.]));
    }

    #[test]
    fn rotation_is_orthonormal_and_roundtrips() {
        let t = RigidTransform::new([0.3, -1.0, 2.0], [0.4, -0.7, 2.1]);
        let r = t.rotation();
        let rtr = matmul(&transpose(&r), &r);
        for i in 0..3 {
            for j in 0..3 {
                assert!((rtr[i][j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        let back = RigidTransform::from_matrix(&r, t.translation);
        for k in 0..3 {
            assert!((back.euler_angles[k] - t.euler_angles[k]).abs() < 1e-12);
        }
        let p = [0.2, 0.9, -1.3];
        assert!(close(t.inverse().apply_point(t.apply_point(p)), p));
        let u = RigidTransform::new([1.0, 0.0, 0.5], [0.1, 0.2, 0.3]);
        assert!(close(u.compose(&t).apply_point(p), u.apply_point(t.apply_point(p))));
    }

    #[test]
    fn mesh_and_vector_data() {
        let m = single_region_mesh(
            vec![[1., 0., 0.], [0., 0., 0.]],
            vec![ElementType::Line2],
            vec![vec![1, 2]],
            "l",
        )
        .unwrap();
        let v = ResultArray::builder("v", "l", ResType::Node)
            .build(Array3::from_shape_vec((1, 2, 3), vec![1., 0., 0., 0., 0., 2.]).unwrap())
            .unwrap();
        let t = RigidTransform::new([0., 0., 1.], [0., 0., FRAC_PI_2]);
        let (m2, arrays) = transform_mesh_data(&m, &[], &t, &[v]).unwrap();
        assert!(close(m2.coordinates()[0], [0., 1., 1.]));
        let w = arrays[0].real_view3().unwrap();
        assert!(close([w[[0, 0, 0]], w[[0, 0, 1]], w[[0, 0, 2]]], [0., 1., 0.]));
        assert!(close([w[[0, 1, 0]], w[[0, 1, 1]], w[[0, 1, 2]]], [0., 0., 2.]));

        let s = ResultArray::builder("s", "l", ResType::Node)
            .build(Array3::<f64>::zeros((1, 2, 1)))
            .unwrap();
        assert!(transform_mesh_data(&m, &[], &t, &[s]).is_err());
        assert!(transform_mesh_data(&m, &["nope"], &t, &[]).is_err());
    }
}
