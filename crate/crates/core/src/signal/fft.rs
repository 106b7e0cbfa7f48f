//! One-sided amplitude spectrum of transient arrays along the step axis.

use ndarray::{Array3, ArrayView3};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::model::{from_view3, AnalysisType, ResultArray};

use super::uniform_step;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FftOptions {
    /// Apply a periodic Hann window, scaled to unit mean so on-bin
    /// amplitudes are preserved.
    pub hann_window: bool,
}

/// Amplitude scale of bin `k` for an `n`-point transform: `1/n` for DC and
/// (even `n`) Nyquist, `2/n` otherwise.
fn bin_scale(k: usize, n: usize) -> f64 {
    if k == 0 || (n % 2 == 0 && k == n / 2) {
        1.0 / n as f64
    } else {
        2.0 / n as f64
    }
}

/// [`field_fft_with`] without windowing.
pub fn field_fft(values: &ResultArray) -> Result<ResultArray> {
    field_fft_with(values, &FftOptions::default())
}

/// Transforms a real transient array into a harmonic array over frequencies
/// `k / (N dt)`, `k = 0..=N/2`, holding amplitude-scaled complex bins, so a
/// unit sinusoid on a bin has magnitude 1.
pub fn field_fft_with(values: &ResultArray, opts: &FftOptions) -> Result<ResultArray> {
    if values.analysis_type() != AnalysisType::Transient {
        return Err(Error::InvalidArgument(format!(
            "FFT needs transient data, '{}' is {}",
            values.quantity(),
            values.analysis_type()
        )));
    }
    let v = values.real_view3().ok_or_else(|| {
        Error::InvalidArgument(format!("FFT needs real-valued data, '{}' is complex", values.quantity()))
    })?;
    let dt = uniform_step(values.step_values())?;
    let (n, m, d) = v.dim();
    let nf = n / 2 + 1;
    let window: Vec<f64> = (0..n)
        .map(|k| {
            if opts.hann_window {
                1.0 - (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos()
            } else {
                1.0
            }
        })
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let columns: Vec<Vec<Complex64>> = (0..m * d)
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c / d, c % d);
            let mut buf: Vec<Complex64> = (0..n).map(|s| Complex64::new(v[[s, i, j]] * window[s], 0.0)).collect();
            fft.process(&mut buf);
            buf.truncate(nf);
            buf.iter_mut().enumerate().for_each(|(k, z)| *z *= bin_scale(k, n));
            buf
        })
        .collect();
    let out = Array3::from_shape_fn((nf, m, d), |(k, i, j)| columns[i * d + j][k]);
    let freqs: Vec<f64> = (0..nf).map(|k| k as f64 / (n as f64 * dt)).collect();
    ResultArray::builder(values.quantity(), values.region(), values.res_type())
        .analysis(AnalysisType::Harmonic)
        .steps(freqs)
        .dim_names(values.dim_names().iter().cloned())
        .complex(true)
        .multi_step(values.multi_step_id())
        .build(from_view3(out, values.res_type()))
}

/// Rebuilds the `n`-sample real signal from a one-sided spectrum produced by
/// [`field_fft`] (without window). Returns `[n x M x D]` samples.
pub fn inverse_field_fft(spectrum: &ResultArray, n: usize) -> Result<Array3<f64>> {
    let s: ArrayView3<'_, Complex64> = spectrum
        .complex_view3()
        .ok_or_else(|| Error::InvalidArgument("spectrum must be complex".into()))?;
    let (nf, m, d) = s.dim();
    if n == 0 || n / 2 + 1 != nf {
        return Err(Error::ShapeMismatch(format!("{nf} frequency bins cannot come from {n} samples")));
    }
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let mut out = Array3::zeros((n, m, d));
    for i in 0..m {
        for j in 0..d {
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            for k in 0..nf {
                let x = s[[k, i, j]] / bin_scale(k, n);
                buf[k] = x;
                if k != 0 && n - k != k {
                    buf[n - k] = x.conj();
                }
            }
            ifft.process(&mut buf);
            for t in 0..n {
                out[[t, i, j]] = buf[t].re / n as f64;
            }
        }
    }
    Ok(out)
}
