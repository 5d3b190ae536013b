//! Dense numeric kernel: vectors, matrices, affine layers, activations,
//! softmax, dropout, losses, and the Adam optimizer.

mod activation;
mod adam;
mod dropout;
mod init;
mod loss;
mod tensor;

pub use activation::{affine_forward, sigmoid, softmax, Activation, AffineOutput};
pub use adam::{adam_step, AdamConfig, AdamState};
pub use dropout::{dropout_apply, dropout_mask, DropoutSpec};
pub(crate) use dropout::validate_rate;
pub use init::glorot_uniform;
pub use loss::{bce_batch, bce_grad, bce_loss, squared_error, BCE_CLAMP};
pub use tensor::{DenseMatrix, DenseVector};
pub(crate) use tensor::{check_dim, dot};
