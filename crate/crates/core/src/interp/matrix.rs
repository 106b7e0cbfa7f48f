use ndarray::{Array3, Axis};

use crate::error::{Error, Result};
use crate::model::{from_view3, ResType, ResultArray};

/// Where the rows or columns of an interpolation operator live.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofSpace {
    pub region: String,
    pub res_type: ResType,
}

impl DofSpace {
    pub fn new(region: impl Into<String>, res_type: ResType) -> Self {
        DofSpace {
            region: region.into(),
            res_type,
        }
    }
}

/// Sparse `target x source` linear operator in CSR form. Rows that received
/// no source contribution are flagged unmatched and stay all-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationMatrix {
    num_rows: usize,
    num_cols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
    unmatched: Vec<bool>,
    pub source: Option<DofSpace>,
    pub target: Option<DofSpace>,
}

impl InterpolationMatrix {
    /// Builds from per-row `(column, weight)` lists. Empty rows are unmatched.
    /// Entries of a row are sorted by column; duplicate columns are summed.
    pub fn from_rows(num_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        let mut unmatched = Vec::with_capacity(rows.len());
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            unmatched.push(row.is_empty());
            for (c, w) in row {
                if c >= num_cols {
                    return Err(Error::ShapeMismatch(format!(
                        "column {c} out of range for {num_cols} source DOFs"
                    )));
                }
                if cols.len() > *row_ptr.last().unwrap() && *cols.last().unwrap() == c {
                    *values.last_mut().unwrap() += w;
                } else {
                    cols.push(c);
                    values.push(w);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(InterpolationMatrix {
            num_rows: unmatched.len(),
            num_cols,
            row_ptr,
            cols,
            values,
            unmatched,
            source: None,
            target: None,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_rows(n, (0..n).map(|i| vec![(i, 1.0)]).collect()).unwrap()
    }

    pub fn with_spaces(mut self, source: DofSpace, target: DofSpace) -> Self {
        self.source = Some(source);
        self.target = Some(target);
        self
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and weights of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.values[r])
    }

    pub fn is_unmatched(&self, i: usize) -> bool {
        self.unmatched[i]
    }

    pub fn unmatched_rows(&self) -> Vec<usize> {
        (0..self.num_rows).filter(|&i| self.unmatched[i]).collect()
    }

    pub fn unmatched_count(&self) -> usize {
        self.unmatched.iter().filter(|&&u| u).count()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.num_rows).map(|i| self.row(i).1.iter().sum()).collect()
    }

    /// Dense copy, mainly for tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.num_cols]; self.num_rows];
        for (i, row) in out.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            for (&c, &v) in c.iter().zip(v) {
                row[c] += v;
            }
        }
        out
    }

    /// `y = A x` for one source vector.
    pub fn mul_vec<T>(&self, x: &[T]) -> Result<Vec<T>>
    where
        T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        if x.len() != self.num_cols {
            return Err(Error::ShapeMismatch(format!(
                "operator expects {} source values, got {}",
                self.num_cols,
                x.len()
            )));
        }
        Ok((0..self.num_rows)
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).fold(T::default(), |acc, (&c, &w)| acc + x[c] * w)
            })
            .collect())
    }

    /// Operator product `self * rhs` (apply `rhs` first). Rows unmatched in
    /// `self` stay unmatched.
    pub fn compose(&self, rhs: &InterpolationMatrix) -> Result<InterpolationMatrix> {
        if self.num_cols != rhs.num_rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot compose {}x{} with {}x{}",
                self.num_rows, self.num_cols, rhs.num_rows, rhs.num_cols
            )));
        }
        let rows = (0..self.num_rows)
            .map(|i| {
                let mut acc = std::collections::BTreeMap::new();
                let (c, v) = self.row(i);
                for (&k, &w) in c.iter().zip(v) {
                    let (c2, v2) = rhs.row(k);
                    for (&j, &w2) in c2.iter().zip(v2) {
                        *acc.entry(j).or_insert(0.0) += w * w2;
                    }
                }
                acc.into_iter().collect()
            })
            .collect();
        let mut m = InterpolationMatrix::from_rows(rhs.num_cols, rows)?;
        for i in 0..m.num_rows {
            m.unmatched[i] = self.unmatched[i] || (m.row(i).0.is_empty());
        }
        m.source = rhs.source.clone();
        m.target = self.target.clone();
        Ok(m)
    }

    /// Applies the operator to every step and dimension of a field array.
    /// Metadata is carried over; region and result type switch to the target
    /// space when one is attached.
    pub fn apply(&self, values: &ResultArray) -> Result<ResultArray> {
        if values.is_history() {
            return Err(Error::InvalidArgument(format!(
                "'{}' is history data; interpolation needs field data",
                values.quantity()
            )));
        }
        if values.num_dofs() != self.num_cols {
            return Err(Error::ShapeMismatch(format!(
                "'{}' has {} DOFs, operator expects {}",
                values.quantity(),
                values.num_dofs(),
                self.num_cols
            )));
        }
        let mut b = values.to_builder();
        if let Some(t) = &self.target {
            b = ResultArray::builder(values.quantity(), t.region.clone(), t.res_type)
                .analysis(values.analysis_type())
                .steps(values.step_values().to_vec())
                .dim_names(values.dim_names().iter().cloned())
                .complex(values.is_complex())
                .multi_step(values.multi_step_id());
        }
        let res_type = self.target.as_ref().map_or(values.res_type(), |t| t.res_type);
        if let Some(v) = values.real_view3() {
            b.build(from_view3(self.apply3(v), res_type))
        } else {
            let v = values.complex_view3().unwrap();
            b.build(from_view3(self.apply3(v), res_type))
        }
    }

    fn apply3<T>(&self, v: ndarray::ArrayView3<'_, T>) -> Array3<T>
    where
        T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        let (n, _, d) = v.dim();
        let mut out = Array3::<T>::from_elem((n, self.num_rows, d), T::default());
        for (step_in, mut step_out) in v.axis_iter(Axis(0)).zip(out.axis_iter_mut(Axis(0))) {
            for i in 0..self.num_rows {
                let (c, w) = self.row(i);
                for k in 0..d {
                    step_out[[i, k]] = c
                        .iter()
                        .zip(w)
                        .fold(T::default(), |acc, (&c, &w)| acc + step_in[[c, k]] * w);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AnalysisType;
    use num_complex::Complex64;

    fn field(data: Array3<f64>) -> ResultArray {
        ResultArray::builder("q", "r", ResType::Node).build(data).unwrap()
    }

    #[test]
    fn identity_keeps_values() {
        let a = field(Array3::from_shape_fn((2, 3, 2), |(i, j, k)| (i * 10 + j * 3 + k) as f64));
        let out = InterpolationMatrix::identity(3).apply(&a).unwrap();
        assert_eq!(out, a);
    }

    #[test]
    fn unmatched_row_is_zero() {
        let m = InterpolationMatrix::from_rows(2, vec![vec![(0, 0.5), (1, 0.5)], vec![]]).unwrap();
        assert!(m.is_unmatched(1));
        assert_eq!(m.unmatched_count(), 1);
        let out = m.apply(&field(Array3::from_elem((1, 2, 1), 3.0))).unwrap();
        assert_eq!(out.real_view3().unwrap()[[0, 0, 0]], 3.0);
        assert_eq!(out.real_view3().unwrap()[[0, 1, 0]], 0.0);
    }

    #[test]
    fn composition_matches_sequential_application() {
        let b = InterpolationMatrix::from_rows(3, vec![vec![(0, 0.2), (2, 0.8)], vec![(1, 1.0)], vec![(0, 0.5), (1, 0.5)], vec![(2, 1.0)]]).unwrap();
        let a = InterpolationMatrix::from_rows(4, vec![vec![(0, 0.25), (3, 0.75)], vec![(1, 0.1), (2, 0.9)]]).unwrap();
        let v = field(Array3::from_shape_fn((3, 3, 2), |(i, j, k)| ((i + 1) * (j + 2)) as f64 - 0.7 * k as f64));
        let seq = a.apply(&b.apply(&v).unwrap()).unwrap();
        let ab = a.compose(&b).unwrap().apply(&v).unwrap();
        let (s, c) = (seq.real_view3().unwrap(), ab.real_view3().unwrap());
        for (x, y) in s.iter().zip(c.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_and_shape_checks() {
        let m = InterpolationMatrix::from_rows(2, vec![vec![(0, 0.5), (1, 0.5)]])
            .unwrap()
            .with_spaces(DofSpace::new("src", ResType::Node), DofSpace::new("dst", ResType::Element));
        let a = ResultArray::builder("p", "src", ResType::Node)
            .analysis(AnalysisType::Harmonic)
            .build(Array3::from_shape_vec((1, 2, 1), vec![Complex64::new(1., 2.), Complex64::new(3., -2.)]).unwrap())
            .unwrap();
        let out = m.apply(&a).unwrap();
        assert_eq!(out.region(), "dst");
        assert_eq!(out.res_type(), ResType::Element);
        assert_eq!(out.complex_view3().unwrap()[[0, 0, 0]], Complex64::new(2., 0.));
        assert!(m.apply(&field(Array3::zeros((1, 3, 1)))).is_err());
        assert!(InterpolationMatrix::from_rows(1, vec![vec![(1, 1.0)]]).is_err());
    }
}
