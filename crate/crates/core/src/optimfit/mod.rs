//! Direct optimisation of a voxel logit field.
//!
//! The prediction is `y = sigmoid(smooth(theta, sigma))`. Gradients of the
//! loss with respect to `y` are pulled back through the sigmoid and then
//! through the smoothing, which is self-adjoint, so the same kernel is
//! applied again.

mod adam;
mod fit;
mod smooth;

pub use adam::Adam;
pub use fit::{fit, FitConfig, FitOutcome, LogitField, LossRecord, Target};
pub use smooth::{gaussian_kernel, reflect_index, smooth};
