//! Reconstruction quality and bit-budget accounting.

use rayon::prelude::*;

use crate::dsp::Dataset;
use crate::error::{Error, Result};
use crate::model::{decode, encode_eval, ModelParams, CHANNELS};
use crate::nn::{mse_loss, Matrix};
use crate::rng::child_rng;
use crate::scalar::Scalar;
use crate::train::add_input_noise;

/// Quantizer resolution equivalent to an SNR.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EffectiveBits {
    pub bits: u32,
    /// Set when the SNR is at or below the 1.76 dB single-bit floor.
    pub below_floor: bool,
}

/// `⌈(snr_db − 1.76) / 6.02⌉`, or 0 with the floor flag set.
pub fn n_eff(snr_db: f64) -> EffectiveBits {
    if !(snr_db > 1.76) {
        return EffectiveBits {
            bits: 0,
            below_floor: true,
        };
    }
    let ratio = (snr_db - 1.76) / 6.02;
    // absorb representation error of decimal dB inputs like 7.78
    let bits = (ratio - 1e-9).ceil().max(1.0);
    EffectiveBits {
        bits: bits.min(u32::MAX as f64) as u32,
        below_floor: false,
    }
}

pub fn compression_ratio(n_samples: usize, n_components: usize, bits_per_value: u32, code_bits: usize) -> Result<f64> {
    if code_bits == 0 {
        return Err(Error::param("code_bits must be positive"));
    }
    if n_samples == 0 || n_components == 0 || bits_per_value == 0 {
        return Err(Error::param("sample, component and bit counts must be positive"));
    }
    Ok((n_samples * n_components) as f64 * bits_per_value as f64 / code_bits as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub noise_sigma: f64,
    /// Nominal channel SNR used for the bit accounting.
    pub snr_db: f64,
    /// Code values within this distance of 0 or 1 count as saturated.
    pub saturation_delta: f64,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            noise_sigma: 0.05,
            snr_db: 20.0,
            saturation_delta: 0.05,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Mean MSE of the reconstruction against the clean target.
    pub mean_mse: f64,
    /// Mean MSE of the noisy presentation against the clean target.
    pub noisy_mse: f64,
    pub saturation_fraction: f64,
    pub n_eff_bits: u32,
    pub compression_ratio: f64,
}

pub fn is_saturated(v: f64, delta: f64) -> bool {
    v <= delta || v >= 1.0 - delta
}

pub fn evaluate<T: Scalar>(model: &ModelParams<T>, dataset: &Dataset, config: &EvalConfig) -> Result<Metrics> {
    if dataset.is_empty() {
        return Err(Error::param("cannot evaluate on an empty dataset"));
    }
    if dataset.example_len != model.arch.example_len {
        return Err(Error::param(format!(
            "dataset examples have {} samples, model expects {}",
            dataset.example_len, model.arch.example_len
        )));
    }
    let sigma = T::lit(config.noise_sigma);
    let delta = config.saturation_delta;
    let rows = dataset
        .examples
        .par_iter()
        .enumerate()
        .map(|(k, ex)| {
            let clean: Matrix<T> = ex.cast();
            let noisy = add_input_noise(&clean, sigma, &mut child_rng(config.seed, k as u64));
            let code = encode_eval(model, &noisy)?;
            let rec = decode(model, &code)?;
            let saturated = code
                .as_slice()
                .iter()
                .filter(|v| is_saturated(v.as_f64(), delta))
                .count();
            Ok((
                mse_loss(&rec, &clean)?.0.as_f64(),
                mse_loss(&noisy, &clean)?.0.as_f64(),
                saturated,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = rows.len() as f64;
    let mean_mse = rows.iter().map(|r| r.0).sum::<f64>() / n;
    let noisy_mse = rows.iter().map(|r| r.1).sum::<f64>() / n;
    let saturated: usize = rows.iter().map(|r| r.2).sum();
    let code_len = model.arch.code_len;
    let bits = n_eff(config.snr_db);
    Ok(Metrics {
        mean_mse,
        noisy_mse,
        saturation_fraction: saturated as f64 / (n * code_len as f64),
        n_eff_bits: bits.bits,
        compression_ratio: compression_ratio(model.arch.example_len, CHANNELS, bits.bits.max(1), code_len)?,
    })
}
