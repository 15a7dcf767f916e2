//! Layer kernels with hand-written backward passes.

pub mod activation;
pub mod conv;
pub mod dense;
pub mod dropout;
pub mod gradcheck;
pub mod loss;
pub mod matrix;

pub use activation::{hard_sigmoid, hard_sigmoid_backward, relu, relu_backward};
pub use conv::{conv1d_depthwise, conv1d_depthwise_backward, conv1d_output_len};
pub use dense::{dense, dense_backward};
pub use dropout::{dropout, DropoutMask, Mode};
pub use gradcheck::{central_difference, grad_check, relative_error};
pub use loss::{l1_activity_penalty, l2_weight_penalty, mse_loss};
pub use matrix::Matrix;

/// Gradients of a scalar loss with respect to one layer's operands.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads<T> {
    pub d_input: Matrix<T>,
    pub d_weights: Matrix<T>,
    pub d_bias: Vec<T>,
}
