//! Mode-shape comparison metrics: MAC, MSF and MCF.

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex mode shapes stored column-wise, `[num_dof x num_modes]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    shapes: Array2<Complex64>,
    labels: Vec<String>,
}

impl ModeSet {
    /// Labels default to `mode_1, mode_2, ...`.
    pub fn new(shapes: Array2<Complex64>) -> Result<Self> {
        let labels = (1..=shapes.ncols()).map(|k| format!("mode_{k}")).collect();
        Self::with_labels(shapes, labels)
    }

    pub fn with_labels(shapes: Array2<Complex64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != shapes.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for {} modes",
                labels.len(),
                shapes.ncols()
            )));
        }
        for (k, col) in shapes.columns().into_iter().enumerate() {
            if !(norm2(col).sqrt() > 1e-300) {
                return Err(Error::InvalidArgument(format!("mode {} ('{}') has zero norm", k + 1, labels[k])));
            }
        }
        Ok(ModeSet { shapes, labels })
    }

    /// Real mode shapes.
    pub fn from_real(shapes: Array2<f64>) -> Result<Self> {
        Self::new(shapes.mapv(|x| Complex64::new(x, 0.0)))
    }

    pub fn num_dofs(&self) -> usize {
        self.shapes.nrows()
    }

    pub fn num_modes(&self) -> usize {
        self.shapes.ncols()
    }

    pub fn shapes(&self) -> &Array2<Complex64> {
        &self.shapes
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mode(&self, k: usize) -> ArrayView1<'_, Complex64> {
        self.shapes.column(k)
    }
}

/// `a^H b`
fn inner(a: ArrayView1<'_, Complex64>, b: ArrayView1<'_, Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(a: ArrayView1<'_, Complex64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

fn check_dofs(a: &ModeSet, b: &ModeSet) -> Result<()> {
    if a.num_dofs() != b.num_dofs() {
        return Err(Error::ShapeMismatch(format!(
            "mode sets have {} and {} DOFs",
            a.num_dofs(),
            b.num_dofs()
        )));
    }
    Ok(())
}

/// Modal assurance criterion, `|phi_i^H psi_j|^2 / ((phi_i^H phi_i)(psi_j^H psi_j))`.
pub fn mac(a: &ModeSet, b: &ModeSet) -> Result<Array2<f64>> {
    check_dofs(a, b)?;
    Ok(Array2::from_shape_fn((a.num_modes(), b.num_modes()), |(i, j)| {
        let (p, q) = (a.mode(i), b.mode(j));
        inner(p, q).norm_sqr() / (norm2(p) * norm2(q))
    }))
}

/// Modal scale factor of each mode of `a` relative to the reference modes
/// `b`: `(psi_j^H phi_i) / (psi_j^H psi_j)`.
pub fn msf(a: &ModeSet, b: &ModeSet) -> Result<Array2<Complex64>> {
    check_dofs(a, b)?;
    Ok(Array2::from_shape_fn((a.num_modes(), b.num_modes()), |(i, j)| {
        let (p, q) = (a.mode(i), b.mode(j));
        inner(q, p) / norm2(q)
    }))
}

/// Modal complexity factor per mode, `1 - (l_max - l_min) / (l_max + l_min)`
/// with the eigenvalues of the 2x2 covariance of real and imaginary parts.
/// 0 for modes with a common phase, 1 for maximally complex modes.
pub fn mcf(a: &ModeSet) -> Array1<f64> {
    (0..a.num_modes())
        .map(|k| {
            let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
            for z in a.mode(k) {
                sxx += z.re * z.re;
                syy += z.im * z.im;
                sxy += z.re * z.im;
            }
            let tr = sxx + syy;
            // l_max - l_min of a symmetric 2x2 matrix
            let gap = ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt();
            (1.0 - gap / tr).max(0.0)
        })
        .collect()
}
