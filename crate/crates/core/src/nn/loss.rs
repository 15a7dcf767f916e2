//! Reconstruction loss and regularizers.

use crate::error::{Error, Result};
use crate::nn::Matrix;
use crate::scalar::Scalar;

/// Mean squared error over all elements and its gradient `2(pred−target)/N`.
pub fn mse_loss<T: Scalar>(pred: &Matrix<T>, target: &Matrix<T>) -> Result<(T, Matrix<T>)> {
    if pred.shape() != target.shape() {
        return Err(Error::shape(format!(
            "prediction {:?} vs target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    let n = T::lit(pred.len() as f64);
    let diff: Vec<T> = pred
        .as_slice()
        .iter()
        .zip(target.as_slice())
        .map(|(&p, &t)| p - t)
        .collect();
    let loss = diff.iter().map(|&d| d * d).sum::<T>() / n;
    let two_over_n = T::lit(2.0) / n;
    let grad = diff.into_iter().map(|d| d * two_over_n).collect();
    Ok((loss, Matrix::new(pred.rows(), pred.cols(), grad)?))
}

/// `λ1·Σ|h|` with gradient `λ1·sign(h)` (0 at 0).
pub fn l1_activity_penalty<T: Scalar>(h: &[T], lambda1: T) -> (T, Vec<T>) {
    let penalty = lambda1 * h.iter().map(|v| v.abs()).sum::<T>();
    let grad = h
        .iter()
        .map(|&v| {
            if v > T::zero() {
                lambda1
            } else if v < T::zero() {
                -lambda1
            } else {
                T::zero()
            }
        })
        .collect();
    (penalty, grad)
}

/// `λ2·Σw²` over every tensor in `weights`, gradient `2·λ2·w` per tensor.
pub fn l2_weight_penalty<T: Scalar>(weights: &[&[T]], lambda2: T) -> (T, Vec<Vec<T>>) {
    let penalty = lambda2 * weights.iter().map(|w| w.iter().map(|&v| v * v).sum::<T>()).sum::<T>();
    let two = T::lit(2.0) * lambda2;
    let grads = weights.iter().map(|w| w.iter().map(|&v| two * v).collect()).collect();
    (penalty, grads)
}
