//! Noise-robust time derivative with a 5-point smooth differentiator.
//!
//! Interior steps use `(2 (q[+1] - q[-1]) + q[+2] - q[-2]) / (8 dt)`. The
//! scheme is exact for polynomials up to degree two and has a double zero at
//! the Nyquist frequency, which damps high-frequency noise.

use ndarray::{Array3, ArrayView3};

use crate::error::{Error, Result};
use crate::model::{from_view3, AnalysisType, ResultArray};

use super::uniform_step;

/// Central stencil over offsets -2..=2, in units of `1 / (8 dt)`.
pub const CENTRAL: [f64; 5] = [-1.0, -2.0, 0.0, 2.0, 1.0];

/// One-sided stencils from the same family (exact for 1, t, t^2 and zero
/// with zero slope at Nyquist), in units of `1 / (8 dt)`. Each acts on five
/// consecutive samples; the evaluated step is at the given position.
/// First step, samples 0..5.
pub const FORWARD_0: [f64; 5] = [-5.0, -2.0, 8.0, 2.0, -3.0];
/// Second step, samples 0..5.
pub const FORWARD_1: [f64; 5] = [-3.0, -2.0, 4.0, 2.0, -1.0];
/// Second to last step, samples N-5..N.
pub const BACKWARD_1: [f64; 5] = [1.0, -2.0, -4.0, 2.0, 3.0];
/// Last step, samples N-5..N.
pub const BACKWARD_0: [f64; 5] = [3.0, -2.0, -8.0, 2.0, 5.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryTreatment {
    /// Drop the two first and two last steps.
    Remove,
    /// Keep the boundary steps with the input values copied unchanged.
    None,
    /// Use one-sided differentiators at the boundary steps.
    #[default]
    OneSided,
}

impl std::str::FromStr for BoundaryTreatment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "remove" => Ok(BoundaryTreatment::Remove),
            "none" => Ok(BoundaryTreatment::None),
            "one-sided" | "onesided" => Ok(BoundaryTreatment::OneSided),
            _ => Err(Error::InvalidArgument(format!(
                "unknown boundary treatment '{s}' (expected remove, none or one-sided)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeDerivative {
    pub result: ResultArray,
    /// Output step indices whose values were copied from the input rather
    /// than differentiated (only with [`BoundaryTreatment::None`]).
    pub untreated: Vec<usize>,
}

fn apply_stencil<T>(v: &ArrayView3<'_, T>, start: usize, c: &[f64; 5], scale: f64, i: usize, j: usize) -> T
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    (0..5).fold(T::default(), |acc, k| acc + v[[start + k, i, j]] * (c[k] * scale))
}

fn differentiate<T>(v: ArrayView3<'_, T>, dt: f64, boundary: BoundaryTreatment) -> Array3<T>
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let (n, m, d) = v.dim();
    let scale = 1.0 / (8.0 * dt);
    let interior = |s: usize, i: usize, j: usize| apply_stencil(&v, s - 2, &CENTRAL, scale, i, j);
    match boundary {
        BoundaryTreatment::Remove => Array3::from_shape_fn((n - 4, m, d), |(s, i, j)| interior(s + 2, i, j)),
        BoundaryTreatment::None => Array3::from_shape_fn((n, m, d), |(s, i, j)| {
            if s < 2 || s >= n - 2 {
                v[[s, i, j]]
            } else {
                interior(s, i, j)
            }
        }),
        BoundaryTreatment::OneSided => Array3::from_shape_fn((n, m, d), |(s, i, j)| match s {
            0 => apply_stencil(&v, 0, &FORWARD_0, scale, i, j),
            1 => apply_stencil(&v, 0, &FORWARD_1, scale, i, j),
            s if s == n - 2 => apply_stencil(&v, n - 5, &BACKWARD_1, scale, i, j),
            s if s == n - 1 => apply_stencil(&v, n - 5, &BACKWARD_0, scale, i, j),
            s => interior(s, i, j),
        }),
    }
}

/// Differentiates a transient array along its step axis. The output
/// quantity gets a `_dt` suffix.
pub fn time_derivative(values: &ResultArray, boundary: BoundaryTreatment) -> Result<TimeDerivative> {
    if values.analysis_type() != AnalysisType::Transient {
        return Err(Error::InvalidArgument(format!(
            "time derivative needs transient data, '{}' is {}",
            values.quantity(),
            values.analysis_type()
        )));
    }
    let n = values.num_steps();
    if n < 5 {
        return Err(Error::InvalidArgument(format!(
            "time derivative needs at least 5 steps, '{}' has {n}",
            values.quantity()
        )));
    }
    let dt = uniform_step(values.step_values())?;
    let steps = values.step_values();
    let (out_steps, untreated) = match boundary {
        BoundaryTreatment::Remove => (steps[2..n - 2].to_vec(), Vec::new()),
        BoundaryTreatment::None => (steps.to_vec(), vec![0, 1, n - 2, n - 1]),
        BoundaryTreatment::OneSided => (steps.to_vec(), Vec::new()),
    };
    let b = ResultArray::builder(format!("{}_dt", values.quantity()), values.region(), values.res_type())
        .analysis(values.analysis_type())
        .steps(out_steps)
        .dim_names(values.dim_names().iter().cloned())
        .complex(values.is_complex())
        .multi_step(values.multi_step_id());
    let rt = values.res_type();
    let result = match values.real_view3() {
        Some(v) => b.build(from_view3(differentiate(v, dt, boundary), rt))?,
        None => b.build(from_view3(differentiate(values.complex_view3().unwrap(), dt, boundary), rt))?,
    };
    Ok(TimeDerivative { result, untreated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ResType;

    fn series(f: impl Fn(f64) -> f64, n: usize, dt: f64) -> ResultArray {
        let t: Vec<f64> = (0..n).map(|k| 1.0 + k as f64 * dt).collect();
        ResultArray::builder("q", "r", ResType::Node)
            .steps(t.clone())
            .build(Array3::from_shape_fn((n, 1, 1), |(s, _, _)| f(t[s])))
            .unwrap()
    }

    fn out(d: &TimeDerivative) -> Vec<f64> {
        d.result.real_view3().unwrap().iter().copied().collect()
    }

    #[test]
    fn stencils_are_exact_for_quadratics() {
        for st in [CENTRAL, FORWARD_0, FORWARD_1, BACKWARD_1, BACKWARD_0] {
            assert_eq!(st.iter().sum::<f64>(), 0.0);
            let alt: f64 = st.iter().enumerate().map(|(k, c)| c * if k % 2 == 0 { 1.0 } else { -1.0 }).sum();
            assert_eq!(alt, 0.0);
        }
        let dt = 0.1;
        let d = time_derivative(&series(|t| t * t, 12, dt), BoundaryTreatment::OneSided).unwrap();
        for (k, v) in out(&d).iter().enumerate() {
            let t = 1.0 + k as f64 * dt;
            assert!((v - 2.0 * t).abs() < 1e-12 * 2.0 * t, "step {k}: {v}");
        }
    }

    #[test]
    fn boundary_modes() {
        let a = series(|t| 3.0 * t, 8, 0.5);
        let r = time_derivative(&a, BoundaryTreatment::Remove).unwrap();
        assert_eq!(r.result.num_steps(), 4);
        assert_eq!(r.result.step_values(), &a.step_values()[2..6]);
        assert!(out(&r).iter().all(|v| (v - 3.0).abs() < 1e-12));
        assert_eq!(r.result.quantity(), "q_dt");

        let n = time_derivative(&a, BoundaryTreatment::None).unwrap();
        assert_eq!(n.untreated, vec![0, 1, 6, 7]);
        let v = out(&n);
        assert_eq!(v[0], 3.0);
        assert_eq!(v[7], a.real_view3().unwrap()[[7, 0, 0]]);
        assert!((v[3] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(time_derivative(&series(|t| t, 4, 0.1), BoundaryTreatment::OneSided).is_err());
        let mut t: Vec<f64> = (0..6).map(|k| k as f64).collect();
        t[3] = 3.1;
        let a = ResultArray::builder("q", "r", ResType::Node)
            .steps(t)
            .build(Array3::<f64>::zeros((6, 1, 1)))
            .unwrap();
        assert!(time_derivative(&a, BoundaryTreatment::OneSided).is_err());
        let h = ResultArray::builder("q", "r", ResType::Node)
            .analysis(AnalysisType::Harmonic)
            .build(Array3::<f64>::zeros((6, 1, 1)))
            .unwrap();
        assert!(time_derivative(&h, BoundaryTreatment::OneSided).is_err());
    }
}
