//! Time-domain processing of transient arrays: smooth time derivative and
//! one-sided FFT.

mod derivative;
mod fft;

pub use derivative::{
    time_derivative, BoundaryTreatment, TimeDerivative, BACKWARD_0, BACKWARD_1, CENTRAL, FORWARD_0, FORWARD_1,
};
pub use fft::{field_fft, field_fft_with, inverse_field_fft, FftOptions};

use crate::error::{Error, Result};

/// Common step size of uniformly spaced step values (relative tolerance
/// `1e-9` per step).
pub fn uniform_step(steps: &[f64]) -> Result<f64> {
    if steps.len() < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 steps, got {}", steps.len())));
    }
    let dt = (steps[steps.len() - 1] - steps[0]) / (steps.len() - 1) as f64;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument("step values must be increasing".into()));
    }
    if let Some(k) = steps.windows(2).position(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt) {
        return Err(Error::InvalidArgument(format!(
            "step values are not uniformly spaced: step {} -> {} is {} but the mean spacing is {dt}",
            k + 1,
            k + 2,
            steps[k + 1] - steps[k]
        )));
    }
    Ok(dt)
}
