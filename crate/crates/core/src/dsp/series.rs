use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Baseband IQ time series stored as two equal-length real rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeries<T> {
    i: Vec<T>,
    q: Vec<T>,
}

impl<T: Scalar> ComplexSeries<T> {
    pub fn new(i: Vec<T>, q: Vec<T>) -> Result<Self> {
        if i.len() != q.len() {
            return Err(Error::shape(format!("I has {} samples but Q has {}", i.len(), q.len())));
        }
        if let Some(t) = i.iter().zip(&q).position(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::param(format!("non-finite sample at index {t}")));
        }
        Ok(Self { i, q })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            i: vec![T::zero(); len],
            q: vec![T::zero(); len],
        }
    }

    pub fn from_complex(samples: &[Complex<T>]) -> Self {
        Self {
            i: samples.iter().map(|s| s.re).collect(),
            q: samples.iter().map(|s| s.im).collect(),
        }
    }

    pub fn to_complex(&self) -> Vec<Complex<T>> {
        self.i
            .iter()
            .zip(&self.q)
            .map(|(&re, &im)| Complex::new(re, im))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i.is_empty()
    }

    pub fn i(&self) -> &[T] {
        &self.i
    }

    pub fn q(&self) -> &[T] {
        &self.q
    }

    pub fn sample(&self, t: usize) -> Complex<T> {
        Complex::new(self.i[t], self.q[t])
    }

    /// Mean of `i² + q²` over all samples; zero for an empty series.
    pub fn power(&self) -> T {
        if self.is_empty() {
            return T::zero();
        }
        let sum: T = self.i.iter().zip(&self.q).map(|(&a, &b)| a * a + b * b).sum();
        sum / T::lit(self.len() as f64)
    }

    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.len() {
            return Err(Error::shape(format!(
                "window {start}..{} exceeds series length {}",
                start + len,
                self.len()
            )));
        }
        Ok(Self {
            i: self.i[start..start + len].to_vec(),
            q: self.q[start..start + len].to_vec(),
        })
    }

    pub fn scale(&self, k: T) -> Self {
        Self {
            i: self.i.iter().map(|&v| v * k).collect(),
            q: self.q.iter().map(|&v| v * k).collect(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> ComplexSeries<U> {
        ComplexSeries {
            i: self.i.iter().map(|v| U::lit(v.as_f64())).collect(),
            q: self.q.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }

    pub fn into_parts(self) -> (Vec<T>, Vec<T>) {
        (self.i, self.q)
    }
}

/// Rescales `signal` to unit average power.
pub fn normalize_power<T: Scalar>(signal: &ComplexSeries<T>) -> Result<ComplexSeries<T>> {
    let p = signal.power();
    if !(p > T::zero()) {
        return Err(Error::param("cannot normalize a zero-power signal"));
    }
    Ok(signal.scale(T::one() / p.sqrt()))
}
