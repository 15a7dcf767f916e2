//! Adam with bias-corrected moment estimates.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper<T> {
    pub alpha: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
}

impl<T: Scalar> Default for AdamHyper<T> {
    fn default() -> Self {
        Self {
            alpha: T::lit(0.001),
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            epsilon: T::lit(1e-8),
        }
    }
}

impl<T: Scalar> AdamHyper<T> {
    pub fn validate(&self) -> Result<()> {
        let unit = |b: T| b > T::zero() && b < T::one();
        if !(self.alpha > T::zero() && self.alpha.is_finite()) {
            return Err(Error::param(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !unit(self.beta1) || !unit(self.beta2) {
            return Err(Error::param("beta1 and beta2 must lie in (0, 1)"));
        }
        if !(self.epsilon > T::zero() && self.epsilon.is_finite()) {
            return Err(Error::param(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    step: u64,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
    hyper: AdamHyper<T>,
}

impl<T: Scalar> AdamState<T> {
    /// Zeroed accumulators, one per tensor of length `sizes[k]`.
    pub fn new(sizes: &[usize], hyper: AdamHyper<T>) -> Result<Self> {
        hyper.validate()?;
        Ok(Self {
            step: 0,
            m: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            v: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            hyper,
        })
    }

    /// Rebuilds a state from stored parts, e.g. a checkpoint.
    pub fn from_parts(step: u64, m: Vec<Vec<T>>, v: Vec<Vec<T>>, hyper: AdamHyper<T>) -> Result<Self> {
        hyper.validate()?;
        if m.len() != v.len() || m.iter().zip(&v).any(|(a, b)| a.len() != b.len()) {
            return Err(Error::shape("first and second moment shapes differ"));
        }
        if v.iter().flatten().any(|&x| !(x >= T::zero())) {
            return Err(Error::param("second moment must be non-negative"));
        }
        Ok(Self { step, m, v, hyper })
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn hyper(&self) -> &AdamHyper<T> {
        &self.hyper
    }

    pub fn first_moments(&self) -> &[Vec<T>] {
        &self.m
    }

    pub fn second_moments(&self) -> &[Vec<T>] {
        &self.v
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.m.iter().map(Vec::len).collect()
    }

    pub fn element_count(&self) -> usize {
        self.m.iter().map(Vec::len).sum()
    }

    /// One update of every tensor. Shapes are checked before anything is
    /// written, so a mismatch leaves params and state untouched.
    pub fn step(&mut self, params: &mut [&mut [T]], grads: &[&[T]]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::shape(format!(
                "optimizer tracks {} tensors, got {} params and {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        for (k, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.len() != self.m[k].len() || g.len() != self.m[k].len() {
                return Err(Error::shape(format!(
                    "tensor {k}: state {} params {} grads {}",
                    self.m[k].len(),
                    p.len(),
                    g.len()
                )));
            }
        }
        self.step += 1;
        let AdamHyper {
            alpha,
            beta1,
            beta2,
            epsilon,
        } = self.hyper;
        let t = T::lit(self.step as f64);
        let bias1 = T::one() - beta1.powf(t);
        let bias2 = T::one() - beta2.powf(t);
        let one = T::one();
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            for (((theta, &gk), mk), vk) in p.iter_mut().zip(g.iter()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mk = beta1 * *mk + (one - beta1) * gk;
                *vk = beta2 * *vk + (one - beta2) * gk * gk;
                let m_hat = *mk / bias1;
                let v_hat = *vk / bias2;
                *theta -= alpha * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}

pub fn adam_init<T: Scalar>(sizes: &[usize], hyper: AdamHyper<T>) -> Result<AdamState<T>> {
    AdamState::new(sizes, hyper)
}

pub fn adam_step<T: Scalar>(state: &mut AdamState<T>, params: &mut [&mut [T]], grads: &[&[T]]) -> Result<()> {
    state.step(params, grads)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_zero() {
        let s = adam_init::<f64>(&[3, 5], AdamHyper::default()).unwrap();
        assert_eq!(s.step_count(), 0);
        assert!(s.first_moments().iter().flatten().all(|&v| v == 0.0));
        assert!(s.second_moments().iter().flatten().all(|&v| v == 0.0));
        assert_eq!(s.element_count(), 8);
    }

    #[test]
    fn invalid_hyper() {
        let bad = [
            AdamHyper {
                alpha: 0.0,
                ..AdamHyper::<f64>::default()
            },
            AdamHyper {
                beta1: 1.0,
                ..AdamHyper::default()
            },
            AdamHyper {
                beta2: 0.0,
                ..AdamHyper::default()
            },
            AdamHyper {
                epsilon: -1.0,
                ..AdamHyper::default()
            },
        ];
        for h in bad {
            assert!(adam_init(&[1], h).is_err());
        }
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut s = adam_init::<f64>(&[2], AdamHyper::default()).unwrap();
        let mut p = vec![1.5, -2.0];
        adam_step(&mut s, &mut [&mut p], &[&[0.0, 0.0]]).unwrap();
        assert_eq!(p, vec![1.5, -2.0]);
        assert_eq!(s.step_count(), 1);
    }

    #[test]
    fn shape_mismatch_has_no_side_effects() {
        let mut s = adam_init::<f64>(&[2], AdamHyper::default()).unwrap();
        let mut p = vec![1.0, 2.0];
        assert!(adam_step(&mut s, &mut [&mut p], &[&[1.0]]).is_err());
        assert_eq!(s.step_count(), 0);
        assert_eq!(p, vec![1.0, 2.0]);
    }

    #[test]
    fn first_step_magnitude_is_alpha() {
        for g in [1e-6, 0.3, 1.0, 250.0, -42.0] {
            let mut s = adam_init::<f64>(&[1], AdamHyper::default()).unwrap();
            let mut p = vec![0.0];
            adam_step(&mut s, &mut [&mut p], &[&[g]]).unwrap();
            let d = p[0].abs();
            assert!((0.9e-3..=1e-3).contains(&d), "g={g} step={d}");
        }
    }
}
