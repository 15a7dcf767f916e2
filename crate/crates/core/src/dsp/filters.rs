//! Pulse-shaping filter design.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    RootRaisedCosine,
    Gaussian,
    /// Caller-supplied taps.
    Custom,
}

/// Symmetric FIR taps with an odd length and a single center tap.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterTaps<T> {
    taps: Vec<T>,
    sps: usize,
    kind: FilterKind,
}

impl<T: Scalar> FilterTaps<T> {
    pub fn custom(taps: Vec<T>, sps: usize) -> Result<Self> {
        if taps.is_empty() || taps.len().is_multiple_of(2) {
            return Err(Error::param(format!(
                "filter needs an odd, nonzero tap count, got {}",
                taps.len()
            )));
        }
        if sps == 0 {
            return Err(Error::param("samples per symbol must be positive"));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::param("non-finite filter tap"));
        }
        Ok(Self {
            taps,
            sps,
            kind: FilterKind::Custom,
        })
    }

    pub fn taps(&self) -> &[T] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn sps(&self) -> usize {
        self.sps
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn center(&self) -> usize {
        self.taps.len() / 2
    }

    pub fn energy(&self) -> T {
        self.taps.iter().map(|&t| t * t).sum()
    }

    pub fn dc_gain(&self) -> T {
        self.taps.iter().copied().sum()
    }
}

/// Root-raised-cosine impulse response value at `t` symbol periods, for
/// unit symbol period. Both removable singularities use their limits.
fn rrc_impulse(t: f64, beta: f64) -> f64 {
    if t == 0.0 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let quarter = 1.0 / (4.0 * beta);
    if (t.abs() - quarter).abs() < 1e-12 {
        let a = PI / (4.0 * beta);
        return beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}

fn check_odd_length(sps: usize, span: usize) -> Result<()> {
    if !(span * sps).is_multiple_of(2) {
        return Err(Error::param(format!(
            "span·sps must be even so the filter has a center tap, got {span}·{sps}"
        )));
    }
    Ok(())
}

/// Unit-energy root-raised-cosine taps spanning `span` symbols.
pub fn rrc_taps<T: Scalar>(beta: f64, sps: usize, span: usize) -> Result<FilterTaps<T>> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::param(format!("RRC roll-off must be in (0, 1], got {beta}")));
    }
    if sps < 2 {
        return Err(Error::param(format!("RRC needs sps >= 2, got {sps}")));
    }
    if span < 4 {
        return Err(Error::param(format!("RRC needs span >= 4 symbols, got {span}")));
    }
    check_odd_length(sps, span)?;
    let n = span * sps + 1;
    let center = (n / 2) as f64;
    let mut taps: Vec<f64> = (0..n)
        .map(|k| rrc_impulse((k as f64 - center) / sps as f64, beta))
        .collect();
    let norm = taps.iter().map(|t| t * t).sum::<f64>().sqrt();
    taps.iter_mut().for_each(|t| *t /= norm);
    // exact mirror so the tap set is symmetric to the last bit
    for k in 0..n / 2 {
        taps[n - 1 - k] = taps[k];
    }
    Ok(FilterTaps {
        taps: taps.into_iter().map(T::lit).collect(),
        sps,
        kind: FilterKind::RootRaisedCosine,
    })
}

/// Standard deviation, in samples, of the Gaussian pulse whose 3 dB
/// bandwidth is `bt / sps` cycles per sample.
pub fn gaussian_sigma(bt: f64, sps: usize) -> f64 {
    (2f64.ln()).sqrt() / (2.0 * PI * bt) * sps as f64
}

/// Gaussian lowpass taps with unit DC gain spanning `span` symbols.
pub fn gaussian_taps<T: Scalar>(bt: f64, sps: usize, span: usize) -> Result<FilterTaps<T>> {
    if !(bt > 0.0 && bt <= 1.0) {
        return Err(Error::param(format!("Gaussian BT must be in (0, 1], got {bt}")));
    }
    if sps < 2 {
        return Err(Error::param(format!("Gaussian filter needs sps >= 2, got {sps}")));
    }
    if span == 0 {
        return Err(Error::param("Gaussian filter span must be positive"));
    }
    check_odd_length(sps, span)?;
    let n = span * sps + 1;
    let center = (n / 2) as f64;
    let sigma = gaussian_sigma(bt, sps);
    let mut taps: Vec<f64> = (0..n)
        .map(|k| {
            let t = k as f64 - center;
            (-t * t / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    for k in 0..n / 2 {
        taps[n - 1 - k] = taps[k];
    }
    Ok(FilterTaps {
        taps: taps.into_iter().map(T::lit).collect(),
        sps,
        kind: FilterKind::Gaussian,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rrc_shape_contract() {
        let f = rrc_taps::<f64>(0.35, 4, 8).unwrap();
        assert_eq!(f.len(), 33);
        let t = f.taps();
        for k in 0..33 {
            assert!((t[k] - t[32 - k]).abs() <= 1e-12);
        }
        let argmax = (0..33).max_by(|&a, &b| t[a].partial_cmp(&t[b]).unwrap()).unwrap();
        assert_eq!(argmax, 16);
        assert!((f.energy() - 1.0).abs() < 1e-9);
        assert_eq!(f.kind(), FilterKind::RootRaisedCosine);
    }

    #[test]
    fn rrc_rejects_bad_parameters() {
        assert!(rrc_taps::<f64>(0.0, 4, 8).is_err());
        assert!(rrc_taps::<f64>(1.5, 4, 8).is_err());
        assert!(rrc_taps::<f64>(0.35, 1, 8).is_err());
        assert!(rrc_taps::<f64>(0.35, 4, 3).is_err());
    }

    #[test]
    fn gaussian_shape_contract() {
        let f = gaussian_taps::<f64>(0.3, 8, 4).unwrap();
        assert_eq!(f.len(), 33);
        assert!((f.dc_gain() - 1.0).abs() < 1e-9);
        let t = f.taps();
        let c = f.center();
        for k in 0..c {
            assert!(t[c + k + 1] < t[c + k]);
            assert!(t[c - k - 1] < t[c - k]);
            assert_eq!(t[k], t[32 - k]);
        }
    }

    #[test]
    fn gaussian_rejects_bad_bt() {
        assert!(gaussian_taps::<f64>(0.0, 8, 4).is_err());
        assert!(gaussian_taps::<f64>(1.1, 8, 4).is_err());
        assert!(gaussian_taps::<f64>(0.3, 1, 4).is_err());
    }

    #[test]
    fn custom_requires_odd_length() {
        assert!(FilterTaps::custom(vec![1.0f64, 0.0], 2).is_err());
        assert!(FilterTaps::custom(vec![1.0f64], 2).is_ok());
    }
}
