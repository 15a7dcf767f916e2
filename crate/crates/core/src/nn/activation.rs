//! Piecewise-linear activations. Both use subgradient 0 at their corners.

use crate::scalar::Scalar;

#[inline]
fn hard_sigmoid_scalar<T: Scalar>(x: T) -> T {
    (T::lit(0.2) * x + T::lit(0.5)).max(T::zero()).min(T::one())
}

/// `max(0, min(1, 0.2·x + 0.5))`
pub fn hard_sigmoid<T: Scalar>(x: &[T]) -> Vec<T> {
    x.iter().map(|&v| hard_sigmoid_scalar(v)).collect()
}

/// Backward pass given the pre-activation `x`. Strictly inside (-2.5, 2.5)
/// the slope is 0.2.
pub fn hard_sigmoid_backward<T: Scalar>(x: &[T], d_out: &[T]) -> Vec<T> {
    let edge = T::lit(2.5);
    let slope = T::lit(0.2);
    x.iter()
        .zip(d_out)
        .map(|(&v, &g)| if v > -edge && v < edge { slope * g } else { T::zero() })
        .collect()
}

pub fn relu<T: Scalar>(x: &[T]) -> Vec<T> {
    x.iter().map(|&v| v.max(T::zero())).collect()
}

pub fn relu_backward<T: Scalar>(x: &[T], d_out: &[T]) -> Vec<T> {
    x.iter()
        .zip(d_out)
        .map(|(&v, &g)| if v > T::zero() { g } else { T::zero() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hard_sigmoid_values() {
        assert_eq!(hard_sigmoid(&[0.0f64, 10.0, -10.0]), vec![0.5, 1.0, 0.0]);
        assert!((hard_sigmoid(&[1.0f64])[0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn kinks_have_zero_subgradient() {
        assert_eq!(
            hard_sigmoid_backward(&[-2.5f64, 2.5, 0.0], &[1.0; 3]),
            vec![0.0, 0.0, 0.2]
        );
        assert_eq!(relu_backward(&[0.0f64, -1.0, 1.0], &[1.0; 3]), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn relu_values() {
        assert_eq!(relu(&[-1.0f64, 0.0, 2.0]), vec![0.0, 0.0, 2.0]);
        assert_eq!(relu(&[0.5f64, 3.0]), vec![0.5, 3.0]);
    }
}
