//! Depthwise 1-D cross-correlation.
//!
//! Every filter is applied to every input row independently; output row
//! `f * C + c` holds filter `f` over channel `c` (filter-major, channel-minor).

use crate::error::{Error, Result};
use crate::nn::{LayerGrads, Matrix};
use crate::scalar::Scalar;

pub fn conv1d_output_len(input_len: usize, taps: usize, pad: usize) -> Result<usize> {
    let padded = input_len + 2 * pad;
    if taps == 0 || taps > padded {
        return Err(Error::shape(format!(
            "kernel of {taps} taps does not fit {input_len} samples with padding {pad}"
        )));
    }
    Ok(padded - taps + 1)
}

fn padded_row<T: Scalar>(row: &[T], pad: usize) -> Vec<T> {
    let mut p = vec![T::zero(); row.len() + 2 * pad];
    p[pad..pad + row.len()].copy_from_slice(row);
    p
}

pub fn conv1d_depthwise<T: Scalar>(input: &Matrix<T>, filters: &Matrix<T>, pad: usize) -> Result<Matrix<T>> {
    let (channels, len) = input.shape();
    let (n_filters, taps) = filters.shape();
    let out_len = conv1d_output_len(len, taps, pad)?;
    let mut out = Matrix::zeros(n_filters * channels, out_len);
    for c in 0..channels {
        let x = padded_row(input.row(c), pad);
        for f in 0..n_filters {
            let w = filters.row(f);
            let y = out.row_mut(f * channels + c);
            for (t, yt) in y.iter_mut().enumerate() {
                let window = &x[t..t + taps];
                *yt = window.iter().zip(w).map(|(&a, &b)| a * b).sum();
            }
        }
    }
    Ok(out)
}

/// Gradient pass that adds the filter gradient into `d_filters` and returns
/// the input gradient.
pub fn conv1d_depthwise_backward_into<T: Scalar>(
    input: &Matrix<T>,
    filters: &Matrix<T>,
    pad: usize,
    d_out: &Matrix<T>,
    d_filters: &mut Matrix<T>,
) -> Result<Matrix<T>> {
    let (channels, len) = input.shape();
    let (n_filters, taps) = filters.shape();
    let out_len = conv1d_output_len(len, taps, pad)?;
    if d_out.shape() != (n_filters * channels, out_len) {
        return Err(Error::shape(format!(
            "conv output gradient is {:?}, expected ({}, {out_len})",
            d_out.shape(),
            n_filters * channels
        )));
    }
    if d_filters.shape() != filters.shape() {
        return Err(Error::shape("filter gradient buffer shape"));
    }
    let mut d_input = Matrix::zeros(channels, len);
    for c in 0..channels {
        let x = padded_row(input.row(c), pad);
        let mut dx = vec![T::zero(); x.len()];
        for f in 0..n_filters {
            let g = d_out.row(f * channels + c);
            let w = filters.row(f);
            let dw = d_filters.row_mut(f);
            for (k, dwk) in dw.iter_mut().enumerate() {
                *dwk += g.iter().zip(&x[k..k + out_len]).map(|(&a, &b)| a * b).sum::<T>();
            }
            for (t, &gt) in g.iter().enumerate() {
                if gt == T::zero() {
                    continue;
                }
                for (d, &wk) in dx[t..t + taps].iter_mut().zip(w) {
                    *d += gt * wk;
                }
            }
        }
        d_input.row_mut(c).copy_from_slice(&dx[pad..pad + len]);
    }
    Ok(d_input)
}

pub fn conv1d_depthwise_backward<T: Scalar>(
    input: &Matrix<T>,
    filters: &Matrix<T>,
    pad: usize,
    d_out: &Matrix<T>,
) -> Result<LayerGrads<T>> {
    let mut d_weights = Matrix::zeros(filters.rows(), filters.cols());
    let d_input = conv1d_depthwise_backward_into(input, filters, pad, d_out, &mut d_weights)?;
    Ok(LayerGrads {
        d_input,
        d_weights,
        d_bias: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_filter_is_identity() {
        let input = Matrix::new(2, 88, (0..176).map(|v| (v as f64 * 0.3).sin()).collect()).unwrap();
        for k in [1usize, 5, 41, 81] {
            let mut taps = vec![0.0; k];
            taps[k / 2] = 1.0;
            let filters = Matrix::new(1, k, taps).unwrap();
            let out = conv1d_depthwise(&input, &filters, (k - 1) / 2).unwrap();
            assert_eq!(out, input);
        }
    }

    #[test]
    fn encoder_shape() {
        let input = Matrix::<f64>::zeros(2, 88);
        let filters = Matrix::<f64>::zeros(2, 40);
        let out = conv1d_depthwise(&input, &filters, 40).unwrap();
        assert_eq!(out.shape(), (4, 129));
        assert_eq!(out.len(), 516);
    }

    #[test]
    fn row_order_is_filter_major() {
        let input = Matrix::new(2, 3, vec![1.0f64, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        let filters = Matrix::new(2, 1, vec![2.0, 3.0]).unwrap();
        let out = conv1d_depthwise(&input, &filters, 0).unwrap();
        assert_eq!(out.row(0), &[2.0, 0.0, 0.0]);
        assert_eq!(out.row(1), &[0.0, 2.0, 0.0]);
        assert_eq!(out.row(2), &[3.0, 0.0, 0.0]);
        assert_eq!(out.row(3), &[0.0, 3.0, 0.0]);
    }

    #[test]
    fn oversized_kernel_is_shape_error() {
        let input = Matrix::<f64>::zeros(1, 4);
        let filters = Matrix::<f64>::zeros(1, 7);
        assert!(matches!(conv1d_depthwise(&input, &filters, 1), Err(Error::Shape(_))));
        assert!(conv1d_depthwise(&input, &filters, 2).is_ok());
    }
}
