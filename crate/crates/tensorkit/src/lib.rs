//! Minimal dense-tensor numeric kernel for training small convolutional
//! networks on the CPU.
//!
//! The kernel provides exactly the operations needed by a stride-1,
//! same-padded heatmap-regression CNN: 2D cross-correlation with analytic
//! gradients, leaky ReLU, 2×2 max pooling with argmax routing, inverted
//! dropout, mean-squared-error loss, and an Adam optimizer. There is no
//! autodiff graph; callers chain the per-op backward functions by hand.
//!
//! All operations are generic over [`Scalar`] (`f32` or `f64`). Training
//! runs in `f32`; the `f64` instantiation exists so gradient checks can be
//! verified at tight tolerances.
//!
//! Determinism: every op is a pure function of its inputs (dropout takes an
//! explicit seed), and all reductions run in a fixed order, so results are
//! bit-reproducible for a given build.

mod adam;
mod conv;
mod dropout;
mod error;
pub mod gradcheck;
mod loss;
mod pool;
mod relu;
mod scalar;
mod tensor;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use conv::{conv2d_backward, conv2d_forward, ConvGrads};
pub use dropout::{dropout, dropout_mask, dropout_with_mask};
pub use error::TensorError;
pub use loss::{mse_loss, mse_loss_backward};
pub use pool::{maxpool2x2, maxpool2x2_backward};
pub use relu::{leaky_relu, leaky_relu_backward};
pub use scalar::Scalar;
pub use tensor::Tensor4;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, TensorError>;
