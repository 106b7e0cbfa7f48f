//! Rigid registration of one region onto another by minimizing the summed
//! squared nearest-neighbour distances with a Nelder-Mead simplex search.

use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{bbox_diagonal, Mesh, Point3};
use crate::spatial::KdTree;
use crate::vec3;

use super::rigid::{mat_vec, RigidTransform};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Iteration limit per simplex run.
    pub max_iterations: usize,
    /// A run stops once the objective spread over the simplex falls below this.
    pub tolerance: f64,
    /// Extra runs restarted from the best point with a random simplex.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 500,
            tolerance: 1e-12,
            restarts: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub transform: RigidTransform,
    /// Sum of squared nearest-neighbour distances at the optimum.
    pub objective: f64,
    pub iterations: usize,
    /// Best objective after every iteration (non-increasing).
    pub history: Vec<f64>,
}

/// Objective over `[u0, u1, u2, alpha, beta, gamma]` where the translation
/// is `scale * u` and the rotation acts about the source centroid.
struct Problem {
    source: Vec<Point3>,
    tree: KdTree,
    center: Point3,
    scale: f64,
}

impl Problem {
    fn transform(&self, x: &[f64; 6]) -> RigidTransform {
        let rot = RigidTransform::new([0.0; 3], [x[3], x[4], x[5]]);
        let rc = mat_vec(&rot.rotation(), self.center);
        let t = vec3::add(vec3::sub(self.center, rc), vec3::scale([x[0], x[1], x[2]], self.scale));
        RigidTransform::new(t, rot.euler_angles)
    }

    fn params(&self, t: &RigidTransform) -> [f64; 6] {
        let rc = mat_vec(&t.rotation(), self.center);
        let u = vec3::scale(vec3::sub(vec3::add(t.translation, rc), self.center), 1.0 / self.scale);
        let [a, b, g] = t.euler_angles;
        [u[0], u[1], u[2], a, b, g]
    }

    fn objective(&self, x: &[f64; 6]) -> f64 {
        let t = self.transform(x);
        let r = t.rotation();
        let d2: Vec<f64> = self
            .source
            .par_iter()
            .map(|&p| {
                let q = vec3::add(mat_vec(&r, p), t.translation);
                self.tree.nearest_one(q).map_or(0.0, |h| h.dist2)
            })
            .collect();
        d2.iter().sum()
    }
}

type Simplex = Vec<([f64; 6], f64)>;

fn nelder_mead(
    f: &dyn Fn(&[f64; 6]) -> f64,
    mut simplex: Simplex,
    opts: &FitOptions,
    monitor: &mut dyn FnMut(usize, f64),
    iterations: &mut usize,
) -> ([f64; 6], f64) {
    let combine = |a: &[f64; 6], b: &[f64; 6], t: f64| {
        let mut c = [0.0; 6];
        for i in 0..6 {
            c[i] = a[i] + t * (b[i] - a[i]);
        }
        c
    };
    for _ in 0..opts.max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[6].1);
        if worst - best < opts.tolerance {
            break;
        }
        let mut centroid = [0.0; 6];
        for (x, _) in &simplex[..6] {
            for i in 0..6 {
                centroid[i] += x[i] / 6.0;
            }
        }
        let xw = simplex[6].0;
        let xr = combine(&centroid, &xw, -1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = combine(&centroid, &xw, -2.0);
            let fe = f(&xe);
            simplex[6] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[5].1 {
            simplex[6] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let xc = combine(&centroid, &xr, 0.5);
                (xc, f(&xc))
            } else {
                let xc = combine(&centroid, &xw, 0.5);
                (xc, f(&xc))
            };
            if fc < fr.min(worst) {
                simplex[6] = (xc, fc);
            } else {
                let x0 = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    v.0 = combine(&x0, &v.0, 0.5);
                    v.1 = f(&v.0);
                }
            }
        }
        *iterations += 1;
        let best = simplex.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        monitor(*iterations, best);
    }
    simplex
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("simplex is non-empty")
}

/// Finds the rigid transform that best maps the source region nodes onto
/// the target region nodes.
pub fn fit_mesh(
    source_mesh: &Mesh,
    source_region: &str,
    target_mesh: &Mesh,
    target_region: &str,
    init: Option<&RigidTransform>,
) -> Result<FitResult> {
    fit_mesh_with(source_mesh, source_region, target_mesh, target_region, init, &FitOptions::default(), &mut |_, _| {})
}

/// [`fit_mesh`] with explicit options and a monitor called with
/// `(iteration, best objective)` after every simplex iteration.
pub fn fit_mesh_with(
    source_mesh: &Mesh,
    source_region: &str,
    target_mesh: &Mesh,
    target_region: &str,
    init: Option<&RigidTransform>,
    opts: &FitOptions,
    monitor: &mut dyn FnMut(usize, f64),
) -> Result<FitResult> {
    let source = source_mesh.region_points(source_mesh.region(source_region)?);
    let target = target_mesh.region_points(target_mesh.region(target_region)?);
    if source.is_empty() {
        return Err(Error::InvalidArgument(format!("source region '{source_region}' has no nodes")));
    }
    let target_size = bbox_diagonal(&target);
    if target.len() < 2 || !(target_size > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "target region '{target_region}' is degenerate (needs at least two distinct nodes)"
        )));
    }
    let scale = bbox_diagonal(&source).max(target_size);
    let problem = Problem {
        center: vec3::mean(source.iter().copied()).expect("source is non-empty"),
        source,
        tree: KdTree::new(&target),
        scale,
    };
    let f = |x: &[f64; 6]| problem.objective(x);

    let steps = [0.05, 0.05, 0.05, 0.1, 0.1, 0.1];
    let make_simplex = |x0: [f64; 6], step: &dyn Fn(usize) -> f64| -> Simplex {
        let mut s = vec![(x0, f(&x0))];
        for k in 0..6 {
            let mut x = x0;
            x[k] += step(k);
            s.push((x, f(&x)));
        }
        s
    };

    let mut best_f = f64::INFINITY;
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut record = |it: usize, v: f64, best: &mut f64| {
        *best = best.min(v);
        history.push(*best);
        monitor(it, *best);
    };

    let x0 = init.map_or([0.0; 6], |t| problem.params(t));
    let mut best_x = x0;
    let mut rng = rand::rngs::StdRng::seed_from_u64(opts.seed);
    for run in 0..=opts.restarts {
        let simplex = if run == 0 {
            make_simplex(best_x, &|k| steps[k])
        } else {
            let factors: Vec<f64> = (0..6)
                .map(|_| rng.gen_range(0.5..1.5) * if rng.gen::<bool>() { 1.0 } else { -1.0 })
                .collect();
            make_simplex(best_x, &|k| steps[k] * factors[k])
        };
        let (x, fx) = nelder_mead(&f, simplex, opts, &mut |it, v| record(it, v, &mut best_f), &mut iterations);
        if fx <= best_f || run == 0 {
            best_x = x;
            best_f = best_f.min(fx);
        }
    }
    let objective = f(&best_x);
    Ok(FitResult {
        transform: problem.transform(&best_x),
        objective,
        iterations,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{single_region_mesh, ElementType};

    fn cloud(n: usize, seed: u64) -> Mesh {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let pts: Vec<Point3> = (0..n).map(|_| [rng.gen(), rng.gen::<f64>() * 0.6, rng.gen::<f64>() * 0.3]).collect();
        single_region_mesh(pts, vec![ElementType::Point; n], (1..=n as u32).map(|i| vec![i]).collect(), "r").unwrap()
    }

    fn moved(m: &Mesh, t: &RigidTransform) -> Mesh {
        let mut out = m.clone();
        out.set_coordinates(m.coordinates().iter().map(|&p| t.apply_point(p)).collect()).unwrap();
        out
    }

    #[test]
    fn identical_meshes_give_identity() {
        let m = cloud(100, 1);
        let r = fit_mesh(&m, "r", &m, "r", None).unwrap();
        assert!(r.objective < 1e-8);
        assert!(vec3::norm(r.transform.translation) < 1e-4);
    }

    #[test]
    fn recovers_translation_and_history_is_monotone() {
        let m = cloud(200, 2);
        let t = moved(&m, &RigidTransform::translation([0.1, 0.0, 0.0]));
        let r = fit_mesh(&m, "r", &t, "r", None).unwrap();
        assert!(vec3::dist(r.transform.translation, [0.1, 0.0, 0.0]) < 1e-4, "{:?}", r.transform);
        assert!(r.transform.euler_angles.iter().all(|a| a.abs() < 1e-4));
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn recovers_rotation_about_z() {
        let m = cloud(500, 4);
        let g = 10f64.to_radians();
        let t = moved(&m, &RigidTransform::new([0.0; 3], [0.0, 0.0, g]));
        let r = fit_mesh(&m, "r", &t, "r", None).unwrap();
        assert!((r.transform.euler_angles[2] - g).abs() < 1e-3, "{:?} {}", r.transform, r.objective);
    }

    #[test]
    fn degenerate_target_errors() {
        let m = cloud(10, 3);
        let p = single_region_mesh(vec![[0.; 3]], vec![ElementType::Point], vec![vec![1]], "r").unwrap();
        assert!(fit_mesh(&m, "r", &p, "r", None).is_err());
    }
}
