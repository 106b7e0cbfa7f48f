//! Radial basis function interpolation and analytic gradients, global or on
//! local neighbourhoods.

use nalgebra::{DMatrix, SymmetricEigen, Matrix3};
use ndarray::{Array2, Array3, ArrayView2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{from_view3, Point3, ResultArray};
use crate::spatial::KdTree;
use crate::vec3;

use super::linalg::DenseSolver;
use super::matrix::DofSpace;

/// Radial kernel `phi(r)` with shape parameter `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    /// `exp(-(eps r)^2)`
    #[default]
    Gaussian,
    /// `sqrt(1 + (eps r)^2)`
    Multiquadric,
    /// `(1 - eps r)_+^4 (4 eps r + 1)`, zero for `eps r >= 1`
    WendlandC2,
}

impl std::str::FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "gaussian" => Ok(Kernel::Gaussian),
            "multiquadric" => Ok(Kernel::Multiquadric),
            "wendland_c2" | "wendland" => Ok(Kernel::WendlandC2),
            _ => Err(Error::InvalidArgument(format!("unknown RBF kernel '{s}'"))),
        }
    }
}

impl Kernel {
    pub fn eval(self, epsilon: f64, r: f64) -> f64 {
        let q = epsilon * r;
        match self {
            Kernel::Gaussian => (-q * q).exp(),
            Kernel::Multiquadric => (1.0 + q * q).sqrt(),
            Kernel::WendlandC2 => {
                let s = (1.0 - q).max(0.0);
                s.powi(4) * (4.0 * q + 1.0)
            }
        }
    }

    /// `g` such that the gradient of `phi(|x - c|)` with respect to `x` is
    /// `g * (x - c)`.
    pub fn gradient_factor(self, epsilon: f64, r: f64) -> f64 {
        let e2 = epsilon * epsilon;
        match self {
            Kernel::Gaussian => -2.0 * e2 * self.eval(epsilon, r),
            Kernel::Multiquadric => e2 / self.eval(epsilon, r),
            Kernel::WendlandC2 => -20.0 * e2 * (1.0 - epsilon * r).max(0.0).powi(3),
        }
    }

    /// Gradient of `phi(|x - center|)` at `x`.
    pub fn gradient(self, epsilon: f64, x: Point3, center: Point3) -> Point3 {
        let d = vec3::sub(x, center);
        vec3::scale(d, self.gradient_factor(epsilon, vec3::norm(d)))
    }
}

/// Global solve over all sources or one small solve per evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RbfMode {
    Global,
    /// Neighbourhood radius `r = radius_factor * mean(distance to the
    /// `neighbors` nearest sources)`; all sources within `r` are used, but at
    /// least the `min_neighbors` nearest.
    Local {
        neighbors: usize,
        min_neighbors: usize,
        radius_factor: f64,
    },
}

impl RbfMode {
    /// Local mode with the conventional defaults (20 neighbours, at least 5,
    /// radius factor 1.5).
    pub fn local() -> Self {
        RbfMode::Local {
            neighbors: 20,
            min_neighbors: 5,
            radius_factor: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbfConfig {
    pub kernel: Kernel,
    pub epsilon: f64,
    /// Added to the kernel matrix diagonal.
    pub smoothing: f64,
    /// Append a constant + linear polynomial. `None` means on for gradients
    /// and off for plain interpolation.
    pub polynomial_tail: Option<bool>,
    pub mode: RbfMode,
}

impl Default for RbfConfig {
    fn default() -> Self {
        RbfConfig {
            kernel: Kernel::Gaussian,
            epsilon: 1.0,
            smoothing: 0.0,
            polynomial_tail: None,
            mode: RbfMode::Global,
        }
    }
}

impl RbfConfig {
    fn validate(&self, num_sources: usize) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("RBF epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.smoothing >= 0.0 && self.smoothing.is_finite()) {
            return Err(Error::InvalidArgument(format!("RBF smoothing must be >= 0, got {}", self.smoothing)));
        }
        if num_sources == 0 {
            return Err(Error::InvalidArgument("RBF needs at least one source point".into()));
        }
        if let RbfMode::Local { neighbors, min_neighbors, radius_factor } = self.mode {
            if min_neighbors == 0 || neighbors < min_neighbors {
                return Err(Error::InvalidArgument(format!(
                    "need 1 <= min_neighbors <= neighbors, got min_neighbors={min_neighbors}, neighbors={neighbors}"
                )));
            }
            if min_neighbors > num_sources {
                return Err(Error::InvalidArgument(format!(
                    "min_neighbors={min_neighbors} exceeds the {num_sources} source points"
                )));
            }
            if !(radius_factor > 0.0 && radius_factor.is_finite()) {
                return Err(Error::InvalidArgument(format!("radius_factor must be > 0, got {radius_factor}")));
            }
        }
        Ok(())
    }
}

/// Constant plus linear terms along the principal axes of the centres that
/// actually have spread (so planar or collinear point sets stay solvable).
struct Tail {
    origin: Point3,
    axes: Vec<Point3>,
}

impl Tail {
    fn new(points: &[Point3]) -> Tail {
        let origin = vec3::mean(points.iter().copied()).unwrap_or([0.0; 3]);
        let mut cov = Matrix3::zeros();
        for p in points {
            let d = vec3::sub(*p, origin);
            for i in 0..3 {
                for j in 0..3 {
                    cov[(i, j)] += d[i] * d[j];
                }
            }
        }
        let eig = SymmetricEigen::new(cov);
        let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let axes = (0..3)
            .filter(|&k| max > 0.0 && eig.eigenvalues[k] > 1e-10 * max)
            .map(|k| {
                let v = eig.eigenvectors.column(k);
                [v[0], v[1], v[2]]
            })
            .collect();
        Tail { origin, axes }
    }

    fn len(&self) -> usize {
        1 + self.axes.len()
    }

    fn basis(&self, x: Point3) -> impl Iterator<Item = f64> + '_ {
        let d = vec3::sub(x, self.origin);
        std::iter::once(1.0).chain(self.axes.iter().map(move |a| vec3::dot(d, *a)))
    }
}

/// Solved interpolant over a set of centres, for `k` value columns.
struct Fit {
    centers: Vec<Point3>,
    weights: DMatrix<f64>,
    tail: Option<(Tail, DMatrix<f64>)>,
}

impl Fit {
    fn solve(centers: Vec<Point3>, values: DMatrix<f64>, cfg: &RbfConfig, with_tail: bool) -> Result<Fit> {
        let n = centers.len();
        let tail = with_tail.then(|| Tail::new(&centers));
        let m = tail.as_ref().map_or(0, Tail::len);
        let k = values.ncols();
        let mut a = DMatrix::zeros(n + m, n + m);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = cfg.kernel.eval(cfg.epsilon, vec3::dist(centers[i], centers[j]));
            }
            a[(i, i)] += cfg.smoothing;
            if let Some(t) = &tail {
                for (c, v) in t.basis(centers[i]).enumerate() {
                    a[(i, n + c)] = v;
                    a[(n + c, i)] = v;
                }
            }
        }
        let mut rhs = DMatrix::zeros(n + m, k);
        rhs.rows_mut(0, n).copy_from(&values);
        let sol = DenseSolver::new(a)?.solve(&rhs);
        Ok(Fit {
            centers,
            weights: sol.rows(0, n).into_owned(),
            tail: tail.map(|t| (t, sol.rows(n, m).into_owned())),
        })
    }

    fn eval(&self, cfg: &RbfConfig, x: Point3, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (j, c) in self.centers.iter().enumerate() {
            let phi = cfg.kernel.eval(cfg.epsilon, vec3::dist(x, *c));
            if phi != 0.0 {
                for (col, o) in out.iter_mut().enumerate() {
                    *o += self.weights[(j, col)] * phi;
                }
            }
        }
        if let Some((t, b)) = &self.tail {
            for (r, p) in t.basis(x).enumerate() {
                for (col, o) in out.iter_mut().enumerate() {
                    *o += b[(r, col)] * p;
                }
            }
        }
    }

    fn gradient(&self, cfg: &RbfConfig, x: Point3, out: &mut [Point3]) {
        out.iter_mut().for_each(|v| *v = [0.0; 3]);
        for (j, c) in self.centers.iter().enumerate() {
            let g = cfg.kernel.gradient(cfg.epsilon, x, *c);
            for (col, o) in out.iter_mut().enumerate() {
                *o = vec3::add(*o, vec3::scale(g, self.weights[(j, col)]));
            }
        }
        if let Some((t, b)) = &self.tail {
            for (r, axis) in t.axes.iter().enumerate() {
                for (col, o) in out.iter_mut().enumerate() {
                    *o = vec3::add(*o, vec3::scale(*axis, b[(r + 1, col)]));
                }
            }
        }
    }
}

fn to_dmatrix(values: ArrayView2<'_, f64>, rows: impl Iterator<Item = usize>) -> DMatrix<f64> {
    let rows: Vec<usize> = rows.collect();
    DMatrix::from_fn(rows.len(), values.ncols(), |i, j| values[[rows[i], j]])
}

fn local_neighbourhood(tree: &KdTree, x: Point3, neighbors: usize, min_neighbors: usize, radius_factor: f64) -> Vec<usize> {
    let knn = tree.nearest(x, neighbors.min(tree.len()));
    let mean = knn.iter().map(|h| h.dist()).sum::<f64>() / knn.len() as f64;
    let mut set = tree.within(x, radius_factor * mean);
    if set.len() < min_neighbors {
        set = tree.nearest(x, min_neighbors);
    }
    let mut idx: Vec<usize> = set.into_iter().map(|h| h.index).collect();
    idx.sort_unstable();
    idx
}

/// Runs `f` with the fit that applies to each evaluation point.
fn for_each_fit<T, F>(
    sources: &[Point3],
    values: ArrayView2<'_, f64>,
    eval_points: &[Point3],
    cfg: &RbfConfig,
    with_tail: bool,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Fit, Point3) -> T + Sync,
{
    cfg.validate(sources.len())?;
    if values.nrows() != sources.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} source points but {} value rows",
            sources.len(),
            values.nrows()
        )));
    }
    match cfg.mode {
        RbfMode::Global => {
            let fit = Fit::solve(sources.to_vec(), to_dmatrix(values, 0..sources.len()), cfg, with_tail)?;
            Ok(eval_points.par_iter().map(|&x| f(&fit, x)).collect())
        }
        RbfMode::Local { neighbors, min_neighbors, radius_factor } => {
            let tree = KdTree::new(sources);
            eval_points
                .par_iter()
                .map(|&x| {
                    let idx = local_neighbourhood(&tree, x, neighbors, min_neighbors, radius_factor);
                    let centers = idx.iter().map(|&i| sources[i]).collect();
                    let fit = Fit::solve(centers, to_dmatrix(values, idx.iter().copied()), cfg, with_tail)?;
                    Ok(f(&fit, x))
                })
                .collect()
        }
    }
}

/// Interpolates every column of `values` (`[num_sources x k]`) to the
/// evaluation points, giving `[num_eval x k]`.
pub fn rbf_interpolate(
    sources: &[Point3],
    values: ArrayView2<'_, f64>,
    eval_points: &[Point3],
    cfg: &RbfConfig,
) -> Result<Array2<f64>> {
    let k = values.ncols();
    let rows = for_each_fit(sources, values, eval_points, cfg, cfg.polynomial_tail.unwrap_or(false), |fit, x| {
        let mut out = vec![0.0; k];
        fit.eval(cfg, x, &mut out);
        out
    })?;
    Ok(Array2::from_shape_vec((eval_points.len(), k), rows.concat()).expect("row lengths are k"))
}

/// Analytic gradient of the interpolant of every column, `[num_eval x k x 3]`.
pub fn rbf_gradient(
    sources: &[Point3],
    values: ArrayView2<'_, f64>,
    eval_points: &[Point3],
    cfg: &RbfConfig,
) -> Result<Array3<f64>> {
    let k = values.ncols();
    let rows = for_each_fit(sources, values, eval_points, cfg, cfg.polynomial_tail.unwrap_or(true), |fit, x| {
        let mut out = vec![[0.0; 3]; k];
        fit.gradient(cfg, x, &mut out);
        out
    })?;
    let flat: Vec<f64> = rows.into_iter().flatten().flatten().collect();
    Ok(Array3::from_shape_vec((eval_points.len(), k, 3), flat).expect("row lengths are 3k"))
}

/// Interpolates a field array defined at `sources` onto `eval_points`, for all
/// steps and dimensions (complex data is handled per real/imaginary part).
pub fn rbf_apply(
    sources: &[Point3],
    values: &ResultArray,
    eval_points: &[Point3],
    cfg: &RbfConfig,
    target: &DofSpace,
) -> Result<ResultArray> {
    if values.is_history() {
        return Err(Error::InvalidArgument(format!("'{}' is history data", values.quantity())));
    }
    if values.num_dofs() != sources.len() {
        return Err(Error::ShapeMismatch(format!(
            "'{}' has {} DOFs but {} source points were given",
            values.quantity(),
            values.num_dofs(),
            sources.len()
        )));
    }
    let (n, d) = (values.num_steps(), values.num_dims());
    let m = sources.len();
    let parts: Vec<ndarray::Array3<f64>> = match values.real_view3() {
        Some(v) => vec![v.to_owned()],
        None => {
            let c = values.complex_view3().expect("field data is real or complex");
            vec![c.mapv(|z| z.re), c.mapv(|z| z.im)]
        }
    };
    // columns ordered (part, step, dim)
    let k = parts.len() * n * d;
    let mut cols = Array2::<f64>::zeros((m, k));
    for (p, a) in parts.iter().enumerate() {
        for s in 0..n {
            for j in 0..d {
                let c = (p * n + s) * d + j;
                for i in 0..m {
                    cols[[i, c]] = a[[s, i, j]];
                }
            }
        }
    }
    let out = rbf_interpolate(sources, cols.view(), eval_points, cfg)?;
    let ne = eval_points.len();
    let unpack = |p: usize| Array3::from_shape_fn((n, ne, d), |(s, i, j)| out[[i, (p * n + s) * d + j]]);
    let b = ResultArray::builder(values.quantity(), target.region.clone(), target.res_type)
        .analysis(values.analysis_type())
        .steps(values.step_values().to_vec())
        .dim_names(values.dim_names().iter().cloned())
        .complex(values.is_complex())
        .multi_step(values.multi_step_id());
    if parts.len() == 1 {
        b.build(from_view3(unpack(0), target.res_type))
    } else {
        let (re, im) = (unpack(0), unpack(1));
        let z = ndarray::Zip::from(&re)
            .and(&im)
            .map_collect(|&a, &b| num_complex::Complex64::new(a, b));
        b.build(from_view3(z, target.res_type))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};

    const KERNELS: [Kernel; 3] = [Kernel::Gaussian, Kernel::Multiquadric, Kernel::WendlandC2];

    #[test]
    fn kernel_values() {
        for k in KERNELS {
            assert_eq!(k.eval(2.0, 0.0), 1.0);
        }
        assert_eq!(Kernel::WendlandC2.eval(2.0, 0.5), 0.0);
        assert_eq!(Kernel::WendlandC2.eval(2.0, 3.0), 0.0);
        assert!((Kernel::Gaussian.eval(1.0, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((Kernel::Multiquadric.eval(1.0, 1.0) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn kernel_gradients_match_finite_differences() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for k in KERNELS {
            for _ in 0..50 {
                let c = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
                let x = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
                let eps = 0.8;
                let g = k.gradient(eps, x, c);
                let h = 1e-6;
                for a in 0..3 {
                    let (mut xp, mut xm) = (x, x);
                    xp[a] += h;
                    xm[a] -= h;
                    let fd = (k.eval(eps, vec3::dist(xp, c)) - k.eval(eps, vec3::dist(xm, c))) / (2.0 * h);
                    assert!((fd - g[a]).abs() <= 1e-6 * vec3::norm(g).max(1e-3), "{k:?} {fd} {}", g[a]);
                }
            }
        }
    }

    #[test]
    fn reproduces_data_at_sources() {
        let pts: Vec<Point3> = (0..30).map(|i| [(i % 6) as f64, (i / 6) as f64, 0.0]).collect();
        let vals = Array2::from_shape_fn((30, 1), |(i, _)| (pts[i][0] * 0.7).sin() + pts[i][1]);
        for k in KERNELS {
            let cfg = RbfConfig { kernel: k, epsilon: 0.9, ..Default::default() };
            let out = rbf_interpolate(&pts, vals.view(), &pts, &cfg).unwrap();
            for i in 0..30 {
                assert!((out[[i, 0]] - vals[[i, 0]]).abs() < 1e-8, "{k:?}");
            }
        }
    }

    #[test]
    fn constant_with_tail_is_exact() {
        let pts: Vec<Point3> = (0..20).map(|i| [i as f64 * 0.5, (i as f64).sqrt(), 0.1 * i as f64]).collect();
        let vals = Array2::from_elem((20, 1), 4.2);
        let cfg = RbfConfig { polynomial_tail: Some(true), epsilon: 0.5, ..Default::default() };
        let out = rbf_interpolate(&pts, vals.view(), &[[1.3, 0.4, 2.0], [7.0, 1.0, -1.0]], &cfg).unwrap();
        assert!(out.iter().all(|v| (v - 4.2).abs() < 1e-9));
    }

    #[test]
    fn local_gradient_of_linear_field() {
        let mut pts = Vec::new();
        for i in 0..8 {
            for j in 0..8 {
                for k in 0..8 {
                    pts.push([i as f64 * 0.1, j as f64 * 0.1, k as f64 * 0.1]);
                }
            }
        }
        let a = [1.5, -2.0, 0.25];
        let vals = Array2::from_shape_fn((pts.len(), 1), |(i, _)| vec3::dot(a, pts[i]) + 3.0);
        let cfg = RbfConfig { kernel: Kernel::WendlandC2, epsilon: 2.0, mode: RbfMode::local(), ..Default::default() };
        let eval = [[0.33, 0.41, 0.29], [0.05, 0.6, 0.12]];
        let g = rbf_gradient(&pts, vals.view(), &eval, &cfg).unwrap();
        for e in 0..2 {
            for c in 0..3 {
                assert!((g[[e, 0, c]] - a[c]).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn duplicate_points_are_singular() {
        let pts = [[0., 0., 0.], [0., 0., 0.], [1., 0., 0.]];
        let vals = Array2::from_shape_vec((3, 1), vec![1., 1., 2.]).unwrap();
        let err = rbf_interpolate(&pts, vals.view(), &pts, &RbfConfig::default()).unwrap_err();
        assert!(matches!(err, Error::SingularMatrix(_)));
        assert!(err.to_string().contains("smoothing"));
        let cfg = RbfConfig { smoothing: 1e-3, ..Default::default() };
        assert!(rbf_interpolate(&pts, vals.view(), &pts, &cfg).is_ok());
    }

    #[test]
    fn invalid_configs() {
        let pts = [[0., 0., 0.]];
        let vals = Array2::from_elem((1, 1), 1.0);
        let bad = RbfConfig { epsilon: 0.0, ..Default::default() };
        assert!(rbf_interpolate(&pts, vals.view(), &pts, &bad).is_err());
        let bad = RbfConfig { mode: RbfMode::Local { neighbors: 2, min_neighbors: 3, radius_factor: 1.5 }, ..Default::default() };
        assert!(rbf_interpolate(&pts, vals.view(), &pts, &bad).is_err());
        assert!(rbf_interpolate(&[], Array2::zeros((0, 1)).view(), &pts, &RbfConfig::default()).is_err());
    }
}
