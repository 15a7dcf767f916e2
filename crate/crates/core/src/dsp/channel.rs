//! Channel impairments: multipath, clock drift, LO rotation and additive noise.

use std::f64::consts::PI;

use num_complex::Complex;
use rand::Rng;

use crate::dsp::series::ComplexSeries;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// SNR sentinel meaning "no additive noise".
pub const NOISELESS: f64 = f64::INFINITY;

/// Unvalidated channel description. Defaults to the identity channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSettings {
    /// Random-walk phase increment std, radians per sample.
    pub phase_noise_std: f64,
    /// Sample-rate offset in parts per million.
    pub clock_ppm: f64,
    /// Initial delay in samples.
    pub clock_delay: f64,
    pub impulse_response: Vec<Complex<f64>>,
    /// Additive-noise SNR in dB, or [`NOISELESS`].
    pub snr_db: f64,
    /// Frequency offset in cycles per sample.
    pub carrier_offset: f64,
}

impl Default for ChannelSettings {
    fn default() -> Self {
        Self {
            phase_noise_std: 0.0,
            clock_ppm: 0.0,
            clock_delay: 0.0,
            impulse_response: vec![Complex::new(1.0, 0.0)],
            snr_db: NOISELESS,
            carrier_offset: 0.0,
        }
    }
}

/// One concrete, validated realization of the channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    settings: ChannelSettings,
}

impl ChannelParams {
    pub fn new(settings: ChannelSettings) -> Result<Self> {
        let s = &settings;
        if !(s.phase_noise_std >= 0.0 && s.phase_noise_std.is_finite()) {
            return Err(Error::param(format!(
                "phase_noise_std must be finite and >= 0, got {}",
                s.phase_noise_std
            )));
        }
        if !s.clock_ppm.is_finite() || s.clock_ppm.abs() >= 1e6 {
            return Err(Error::param(format!("clock_ppm out of range: {}", s.clock_ppm)));
        }
        if !(s.clock_delay.is_finite() && s.clock_delay >= 0.0) {
            return Err(Error::param(format!(
                "clock_delay must be finite and >= 0, got {}",
                s.clock_delay
            )));
        }
        match s.impulse_response.first() {
            None => return Err(Error::param("impulse response is empty")),
            Some(h0) if h0.norm() == 0.0 => return Err(Error::param("first impulse-response tap must be nonzero")),
            _ => {}
        }
        if s.impulse_response
            .iter()
            .any(|h| !h.re.is_finite() || !h.im.is_finite())
        {
            return Err(Error::param("non-finite impulse-response tap"));
        }
        if s.snr_db.is_nan() || s.snr_db == f64::NEG_INFINITY {
            return Err(Error::param("snr_db must be finite or the noiseless sentinel"));
        }
        if !s.carrier_offset.is_finite() {
            return Err(Error::param("carrier offset must be finite"));
        }
        Ok(Self { settings })
    }

    pub fn identity() -> Self {
        Self {
            settings: ChannelSettings::default(),
        }
    }

    pub fn settings(&self) -> &ChannelSettings {
        &self.settings
    }

    pub fn snr_db(&self) -> f64 {
        self.settings.snr_db
    }

    /// Same realization with the additive-noise stage switched off.
    pub fn without_noise(&self) -> Self {
        let mut settings = self.settings.clone();
        settings.snr_db = NOISELESS;
        Self { settings }
    }
}

fn is_noiseless(snr_db: f64) -> bool {
    snr_db == f64::INFINITY
}

/// Adds circular complex Gaussian noise at `snr_db` relative to the signal power.
pub fn awgn<T: Scalar, R: Rng + ?Sized>(
    signal: &ComplexSeries<T>,
    snr_db: f64,
    rng: &mut R,
) -> Result<ComplexSeries<T>> {
    if snr_db.is_nan() {
        return Err(Error::param("snr_db is NaN"));
    }
    if is_noiseless(snr_db) {
        return Ok(signal.clone());
    }
    let p = signal.power();
    if !(p > T::zero()) {
        return Err(Error::param("cannot calibrate noise against a zero-power signal"));
    }
    let noise_var = p.as_f64() / 10f64.powf(snr_db / 10.0);
    let sigma = T::lit((noise_var / 2.0).sqrt());
    let i = signal
        .i()
        .iter()
        .map(|&v| v + sigma * T::standard_normal(rng))
        .collect::<Vec<_>>();
    let q = signal
        .q()
        .iter()
        .map(|&v| v + sigma * T::standard_normal(rng))
        .collect::<Vec<_>>();
    ComplexSeries::new(i, q)
}

/// `10·log10(P_clean / P_residual)`, or `+inf` when `noisy == clean`.
pub fn measure_snr<T: Scalar>(clean: &ComplexSeries<T>, noisy: &ComplexSeries<T>) -> Result<f64> {
    if clean.len() != noisy.len() {
        return Err(Error::param(format!(
            "clean has {} samples, noisy has {}",
            clean.len(),
            noisy.len()
        )));
    }
    let pc = clean.power().as_f64();
    if !(pc > 0.0) {
        return Err(Error::param("clean signal has zero power"));
    }
    let n = clean.len() as f64;
    let residual: f64 = (0..clean.len())
        .map(|t| {
            let di = (noisy.i()[t] - clean.i()[t]).as_f64();
            let dq = (noisy.q()[t] - clean.q()[t]).as_f64();
            di * di + dq * dq
        })
        .sum::<f64>()
        / n;
    if residual == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (pc / residual).log10())
}

/// Applies multipath, resampling, LO rotation and AWGN in that order.
/// The output has the same length as the input.
pub fn apply_channel<T: Scalar, R: Rng + ?Sized>(
    signal: &ComplexSeries<T>,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<ComplexSeries<T>> {
    if signal.is_empty() {
        return Err(Error::param("cannot apply a channel to an empty signal"));
    }
    let s = &params.settings;
    let n = signal.len();
    let x = signal.to_complex();
    let zero = Complex::new(T::zero(), T::zero());

    let h: Vec<Complex<T>> = s
        .impulse_response
        .iter()
        .map(|c| Complex::new(T::lit(c.re), T::lit(c.im)))
        .collect();
    let mut y: Vec<Complex<T>> = (0..n)
        .map(|t| {
            h.iter()
                .enumerate()
                .take(t + 1)
                .fold(zero, |acc, (k, &hk)| acc + hk * x[t - k])
        })
        .collect();

    if s.clock_ppm != 0.0 || s.clock_delay != 0.0 {
        let rate = 1.0 + s.clock_ppm * 1e-6;
        let at = |j: isize| -> Complex<T> {
            if j >= 0 && (j as usize) < n {
                y[j as usize]
            } else {
                zero
            }
        };
        let resampled: Vec<Complex<T>> = (0..n)
            .map(|t| {
                let pos = t as f64 * rate - s.clock_delay;
                let base = pos.floor();
                let frac = pos - base;
                let j = base as isize;
                if frac == 0.0 {
                    at(j)
                } else {
                    let f = T::lit(frac);
                    at(j) * (T::one() - f) + at(j + 1) * f
                }
            })
            .collect();
        y = resampled;
    }

    if s.carrier_offset != 0.0 || s.phase_noise_std > 0.0 {
        let mut walk = 0.0f64;
        for (t, v) in y.iter_mut().enumerate() {
            if t > 0 && s.phase_noise_std > 0.0 {
                walk += s.phase_noise_std * f64::standard_normal(rng);
            }
            let theta = 2.0 * PI * s.carrier_offset * t as f64 + walk;
            *v *= Complex::new(T::lit(theta.cos()), T::lit(theta.sin()));
        }
    }

    let out = ComplexSeries::from_complex(&y);
    if is_noiseless(s.snr_db) {
        return Ok(out);
    }
    awgn(&out, s.snr_db, rng)
}

/// Distribution over channel realizations. Defaults describe a mild,
/// slowly varying channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    pub phase_noise_std: f64,
    /// Clock offset drawn uniformly from `±clock_ppm_max`.
    pub clock_ppm_max: f64,
    /// Initial delay drawn uniformly from `[0, clock_delay_max)` samples.
    pub clock_delay_max: f64,
    /// Magnitude of the echo tap; its phase is uniform.
    pub echo_amplitude: f64,
    /// Echo delay in samples; 0 disables the echo.
    pub echo_delay: usize,
    pub snr_db: f64,
    /// Carrier offset drawn uniformly from `±carrier_offset_max`.
    pub carrier_offset_max: f64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            phase_noise_std: 0.001,
            clock_ppm_max: 50.0,
            clock_delay_max: 1.0,
            echo_amplitude: 0.05,
            echo_delay: 1,
            snr_db: 20.0,
            carrier_offset_max: 0.0025,
        }
    }
}

impl ChannelModel {
    /// A model whose every draw is the identity channel.
    pub fn identity() -> Self {
        Self {
            phase_noise_std: 0.0,
            clock_ppm_max: 0.0,
            clock_delay_max: 0.0,
            echo_amplitude: 0.0,
            echo_delay: 0,
            snr_db: NOISELESS,
            carrier_offset_max: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("phase_noise_std", self.phase_noise_std),
            ("clock_ppm_max", self.clock_ppm_max),
            ("clock_delay_max", self.clock_delay_max),
            ("echo_amplitude", self.echo_amplitude),
            ("carrier_offset_max", self.carrier_offset_max),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(Error::param("snr_db must be finite or the noiseless sentinel"));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ChannelParams> {
        self.validate()?;
        let sym = |rng: &mut R, max: f64| f64::uniform(rng, -max, max);
        let clock_ppm = sym(rng, self.clock_ppm_max);
        let clock_delay = f64::uniform(rng, 0.0, self.clock_delay_max);
        let carrier_offset = sym(rng, self.carrier_offset_max);
        let mut impulse_response = vec![Complex::new(1.0, 0.0)];
        if self.echo_delay > 0 && self.echo_amplitude > 0.0 {
            let theta = f64::uniform(rng, 0.0, 2.0 * PI);
            impulse_response.resize(self.echo_delay + 1, Complex::new(0.0, 0.0));
            impulse_response[self.echo_delay] = Complex::from_polar(self.echo_amplitude, theta);
        }
        ChannelParams::new(ChannelSettings {
            phase_noise_std: self.phase_noise_std,
            clock_ppm,
            clock_delay,
            impulse_response,
            snr_db: self.snr_db,
            carrier_offset,
        })
    }
}
