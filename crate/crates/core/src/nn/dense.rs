use crate::error::{Error, Result};
use crate::nn::{LayerGrads, Matrix};
use crate::scalar::Scalar;

fn check_shapes<T: Scalar>(input: &[T], weights: &Matrix<T>, bias_len: usize) -> Result<()> {
    if input.len() != weights.rows() || bias_len != weights.cols() {
        return Err(Error::shape(format!(
            "dense layer {}x{} cannot take input {} with bias {}",
            weights.rows(),
            weights.cols(),
            input.len(),
            bias_len
        )));
    }
    Ok(())
}

/// `inputᵀ·W + b` for an `n×m` weight matrix.
pub fn dense<T: Scalar>(input: &[T], weights: &Matrix<T>, bias: &[T]) -> Result<Vec<T>> {
    check_shapes(input, weights, bias.len())?;
    let mut out = bias.to_vec();
    for (i, &x) in input.iter().enumerate() {
        if x == T::zero() {
            continue;
        }
        for (o, &w) in out.iter_mut().zip(weights.row(i)) {
            *o += x * w;
        }
    }
    Ok(out)
}

/// Adds `input ⊗ d_out` into `d_weights`, `d_out` into `d_bias`, and
/// returns `W·d_out`.
pub fn dense_backward_into<T: Scalar>(
    input: &[T],
    weights: &Matrix<T>,
    d_out: &[T],
    d_weights: &mut Matrix<T>,
    d_bias: &mut [T],
) -> Result<Vec<T>> {
    check_shapes(input, weights, d_out.len())?;
    if d_weights.shape() != weights.shape() || d_bias.len() != d_out.len() {
        return Err(Error::shape("dense gradient buffer shape"));
    }
    for (b, &g) in d_bias.iter_mut().zip(d_out) {
        *b += g;
    }
    let mut d_input = Vec::with_capacity(input.len());
    for (i, &x) in input.iter().enumerate() {
        let row = weights.row(i);
        d_input.push(row.iter().zip(d_out).map(|(&w, &g)| w * g).sum());
        if x != T::zero() {
            for (dw, &g) in d_weights.row_mut(i).iter_mut().zip(d_out) {
                *dw += x * g;
            }
        }
    }
    Ok(d_input)
}

pub fn dense_backward<T: Scalar>(input: &[T], weights: &Matrix<T>, d_out: &[T]) -> Result<LayerGrads<T>> {
    let mut d_weights = Matrix::zeros(weights.rows(), weights.cols());
    let mut d_bias = vec![T::zero(); d_out.len()];
    let d_input = dense_backward_into(input, weights, d_out, &mut d_weights, &mut d_bias)?;
    Ok(LayerGrads {
        d_input: Matrix::new(1, input.len(), d_input)?,
        d_weights,
        d_bias,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_weights() {
        let x = vec![0.3f64, -1.0, 2.5];
        assert_eq!(dense(&x, &Matrix::identity(3), &[0.0; 3]).unwrap(), x);
    }

    #[test]
    fn small_arithmetic() {
        let w = Matrix::new(2, 2, vec![1.0f64, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(dense(&[1.0, 2.0], &w, &[1.0, -1.0]).unwrap(), vec![2.0, 1.0]);
    }

    #[test]
    fn mismatch_is_shape_error() {
        let w = Matrix::<f64>::zeros(3, 2);
        assert!(matches!(dense(&[1.0, 2.0], &w, &[0.0; 2]), Err(Error::Shape(_))));
        assert!(matches!(dense(&[1.0, 2.0, 3.0], &w, &[0.0; 3]), Err(Error::Shape(_))));
    }

    #[test]
    fn backward_formulas() {
        let w = Matrix::new(2, 3, vec![1.0f64, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let g = dense_backward(&[1.0, -1.0], &w, &[1.0, 0.0, 2.0]).unwrap();
        assert_eq!(g.d_input.as_slice(), &[7.0, 16.0]);
        assert_eq!(g.d_weights.as_slice(), &[1.0, 0.0, 2.0, -1.0, 0.0, -2.0]);
        assert_eq!(g.d_bias, vec![1.0, 0.0, 2.0]);
    }
}
