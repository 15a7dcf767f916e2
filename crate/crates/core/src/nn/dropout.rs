use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Per-element multiplier applied in the forward pass; empty means identity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DropoutMask<T> {
    scale: Vec<T>,
}

impl<T: Scalar> DropoutMask<T> {
    pub fn is_identity(&self) -> bool {
        self.scale.is_empty()
    }

    pub fn scale(&self) -> &[T] {
        &self.scale
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        if self.is_identity() {
            return x.to_vec();
        }
        x.iter().zip(&self.scale).map(|(&v, &s)| v * s).collect()
    }

    pub fn backward(&self, d_out: &[T]) -> Vec<T> {
        self.apply(d_out)
    }
}

/// Inverted dropout: in training each element is zeroed with probability
/// `rate` and survivors are scaled by `1/(1 - rate)`. Eval mode is identity.
pub fn dropout<T: Scalar, R: Rng + ?Sized>(
    x: &[T],
    rate: f64,
    mode: Mode,
    rng: &mut R,
) -> Result<(Vec<T>, DropoutMask<T>)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::param(format!("dropout rate must be in [0, 1), got {rate}")));
    }
    if mode == Mode::Eval || rate == 0.0 {
        return Ok((x.to_vec(), DropoutMask::default()));
    }
    let keep = T::lit(1.0 / (1.0 - rate));
    let scale: Vec<T> = (0..x.len())
        .map(|_| if rng.random::<f64>() < rate { T::zero() } else { keep })
        .collect();
    let mask = DropoutMask { scale };
    Ok((mask.apply(x), mask))
}
