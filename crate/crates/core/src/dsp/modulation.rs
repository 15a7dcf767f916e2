use std::f64::consts::PI;

use num_complex::Complex;

use crate::dsp::filters::{gaussian_taps, FilterTaps};
use crate::dsp::series::ComplexSeries;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Qpsk,
    Gfsk,
}

impl Modulation {
    /// Code stored in dataset headers.
    pub fn code(self) -> u8 {
        match self {
            Modulation::Qpsk => 0,
            Modulation::Gfsk => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Modulation::Qpsk),
            1 => Some(Modulation::Gfsk),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Modulation::Qpsk => "qpsk",
            Modulation::Gfsk => "gfsk",
        }
    }
}

impl std::str::FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Modulation::Qpsk),
            "gfsk" => Ok(Modulation::Gfsk),
            other => Err(Error::param(format!("unknown modulation `{other}`"))),
        }
    }
}

impl std::fmt::Display for Modulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolStream<T> {
    pub symbols: Vec<Complex<T>>,
    pub bits_per_symbol: usize,
}

/// Gray-coded QPSK: bit pair `(b0, b1)` maps to `((1-2b0) + j(1-2b1))/√2`.
pub fn map_qpsk<T: Scalar>(bits: &[u8]) -> Result<SymbolStream<T>> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::param(format!(
            "QPSK needs an even bit count, got {}",
            bits.len()
        )));
    }
    let a = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let level = |b: u8| if b == 0 { a } else { -a };
    let symbols = bits
        .chunks_exact(2)
        .map(|p| Complex::new(level(p[0]), level(p[1])))
        .collect();
    Ok(SymbolStream {
        symbols,
        bits_per_symbol: 2,
    })
}

/// Full linear convolution of a complex sequence with real taps.
fn convolve_full<T: Scalar>(x: &[Complex<T>], taps: &[T]) -> Vec<Complex<T>> {
    if x.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex::new(T::zero(), T::zero()); x.len() + taps.len() - 1];
    for (n, &xn) in x.iter().enumerate() {
        if xn.re == T::zero() && xn.im == T::zero() {
            continue;
        }
        for (k, &h) in taps.iter().enumerate() {
            out[n + k] += xn * h;
        }
    }
    out
}

/// QPSK waveform: symbols zero-stuffed by `sps` and filtered by `shaping`.
/// Output length is `symbols·sps + taps − 1`; callers trim transients.
pub fn modulate_qpsk<T: Scalar>(bits: &[u8], sps: usize, shaping: &FilterTaps<T>) -> Result<ComplexSeries<T>> {
    if shaping.sps() != sps {
        return Err(Error::param(format!(
            "shaping filter designed for sps={} but modulating at sps={sps}",
            shaping.sps()
        )));
    }
    let stream = map_qpsk::<T>(bits)?;
    let zero = Complex::new(T::zero(), T::zero());
    let mut upsampled = vec![zero; stream.symbols.len() * sps];
    for (k, &s) in stream.symbols.iter().enumerate() {
        upsampled[k * sps] = s;
    }
    Ok(ComplexSeries::from_complex(&convolve_full(&upsampled, shaping.taps())))
}

/// Continuous-phase GFSK with unit envelope; output has `bits·sps` samples.
pub fn modulate_gfsk<T: Scalar>(
    bits: &[u8],
    sps: usize,
    bt: f64,
    mod_index: f64,
    span: usize,
) -> Result<ComplexSeries<T>> {
    if bits.is_empty() {
        return Err(Error::param("GFSK needs at least one bit"));
    }
    if !(mod_index > 0.0) {
        return Err(Error::param(format!("modulation index must be > 0, got {mod_index}")));
    }
    let gauss = gaussian_taps::<f64>(bt, sps, span)?;
    let taps = gauss.taps();
    let half = gauss.center();
    let n = bits.len() * sps;
    let nrz: Vec<f64> = bits
        .iter()
        .flat_map(|&b| std::iter::repeat_n(if b == 0 { -1.0 } else { 1.0 }, sps))
        .collect();
    // centered filtering, zero beyond the edges
    let freq: Vec<f64> = (0..n)
        .map(|t| {
            taps.iter()
                .enumerate()
                .filter_map(|(k, &h)| {
                    let j = t as isize + k as isize - half as isize;
                    (j >= 0 && (j as usize) < n).then(|| h * nrz[j as usize])
                })
                .sum()
        })
        .collect();
    let step = PI * mod_index / sps as f64;
    let mut phase = 0.0f64;
    let mut i = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for f in freq {
        phase += step * f;
        i.push(T::lit(phase.cos()));
        q.push(T::lit(phase.sin()));
    }
    ComplexSeries::new(i, q)
}
