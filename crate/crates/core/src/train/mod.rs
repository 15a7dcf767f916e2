//! Denoising training loop.

pub mod export;
pub mod metrics;

use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::dsp::modulation::Modulation;
use crate::dsp::Dataset;
use crate::error::{Error, Result};
use crate::model::{example_loss_into, init_model, reconstruct, weight_penalty_into, Architecture, ModelParams};
use crate::nn::{mse_loss, Matrix, Mode};
use crate::optim::{AdamHyper, AdamState};
use crate::rng::{child_rng, split_seed, SeededRng};
use crate::scalar::Scalar;

pub use export::{export_weights, read_history, reconstruct_examples, write_history};
pub use metrics::{compression_ratio, evaluate, n_eff, EffectiveBits, EvalConfig, Metrics};

/// Examples per gradient work unit. Units are reduced in index order, so
/// results do not depend on the worker count.
const WORK_UNIT: usize = 16;

const STREAM_SHUFFLE: u64 = 1;
const STREAM_NOISE: u64 = 2;
const STREAM_VAL_NOISE: u64 = 3;
const STREAM_INIT: u64 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Std of the Gaussian input corruption per real component.
    pub noise_sigma: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub adam: AdamHyper<f64>,
    pub arch: Architecture,
    pub seed: u64,
    pub modulation: Modulation,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 25,
            batch_size: 128,
            noise_sigma: 0.05,
            lambda1: 1e-4,
            lambda2: 1e-4,
            adam: AdamHyper::default(),
            arch: Architecture::default(),
            seed: 1,
            modulation: Modulation::Qpsk,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::param("epochs must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::param("batch_size must be >= 1"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::param("noise_sigma must be finite and >= 0"));
        }
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0) {
            return Err(Error::param("lambda1 and lambda2 must be >= 0"));
        }
        self.adam.validate()?;
        self.arch.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_total: f64,
    pub train_mse: f64,
    pub val_mse: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
}

impl TrainHistory {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.epochs.last()
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub model: ModelParams<T>,
    pub optimizer: AdamState<T>,
    pub history: TrainHistory,
}

/// Clean target plus i.i.d. Gaussian noise of std `sigma`.
pub fn add_input_noise<T: Scalar>(clean: &Matrix<T>, sigma: T, rng: &mut SeededRng) -> Matrix<T> {
    if sigma == T::zero() {
        return clean.clone();
    }
    let data = clean
        .as_slice()
        .iter()
        .map(|&v| v + sigma * T::standard_normal(rng))
        .collect();
    Matrix::new(clean.rows(), clean.cols(), data).expect("same shape")
}

fn lift_examples<T: Scalar>(dataset: &Dataset) -> Vec<Matrix<T>> {
    dataset.examples.iter().map(Matrix::cast).collect()
}

fn check_dataset(dataset: &Dataset, arch: &Architecture, what: &str) -> Result<()> {
    if dataset.is_empty() {
        return Err(Error::param(format!("{what} set is empty")));
    }
    if dataset.example_len != arch.example_len {
        return Err(Error::param(format!(
            "{what} examples have {} samples, model expects {}",
            dataset.example_len, arch.example_len
        )));
    }
    Ok(())
}

/// Eval-mode reconstruction MSE over fixed noisy presentations.
fn validation_mse<T: Scalar>(model: &ModelParams<T>, inputs: &[Matrix<T>], targets: &[Matrix<T>]) -> Result<f64> {
    let total = inputs
        .par_iter()
        .zip(targets)
        .map(|(x, y)| Ok(mse_loss(&reconstruct(model, x)?, y)?.0.as_f64()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .sum::<f64>();
    Ok(total / inputs.len() as f64)
}

pub fn train<T: Scalar>(train_set: &Dataset, val_set: &Dataset, config: &TrainConfig) -> Result<TrainOutcome<T>> {
    train_with_progress(train_set, val_set, config, |_| {})
}

/// Trains from a fresh initialization, calling `on_epoch` after every epoch.
pub fn train_with_progress<T: Scalar>(
    train_set: &Dataset,
    val_set: &Dataset,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome<T>> {
    config.validate()?;
    check_dataset(train_set, &config.arch, "training")?;
    check_dataset(val_set, &config.arch, "validation")?;

    let mut model = init_model::<T>(config.arch, split_seed(config.seed, STREAM_INIT))?;
    let hyper = AdamHyper {
        alpha: T::lit(config.adam.alpha),
        beta1: T::lit(config.adam.beta1),
        beta2: T::lit(config.adam.beta2),
        epsilon: T::lit(config.adam.epsilon),
    };
    let mut optimizer = AdamState::new(&model.tensor_sizes(), hyper)?;

    let targets: Vec<Matrix<T>> = lift_examples(train_set);
    let val_targets: Vec<Matrix<T>> = lift_examples(val_set);
    let sigma = T::lit(config.noise_sigma);
    let val_inputs: Vec<Matrix<T>> = val_targets
        .iter()
        .enumerate()
        .map(|(k, y)| {
            let mut rng = child_rng(split_seed(config.seed, STREAM_VAL_NOISE), k as u64);
            add_input_noise(y, sigma, &mut rng)
        })
        .collect();

    let lambda1 = T::lit(config.lambda1);
    let lambda2 = T::lit(config.lambda2);
    let mut history = TrainHistory::default();
    let mut order: Vec<usize> = (0..targets.len()).collect();

    for epoch in 0..config.epochs {
        let started = Instant::now();
        let epoch_seed = split_seed(config.seed, epoch as u64);
        order.shuffle(&mut child_rng(epoch_seed, STREAM_SHUFFLE));
        let noise_seed = split_seed(epoch_seed, STREAM_NOISE);

        let mut sum_mse = 0.0f64;
        let mut sum_total = 0.0f64;
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let base = b * config.batch_size;
            let units: Vec<(ModelParams<T>, f64, f64)> = batch
                .par_chunks(WORK_UNIT)
                .enumerate()
                .map(|(u, unit)| {
                    let mut grads = model.zeros_like();
                    let mut mse = 0.0f64;
                    let mut l1 = 0.0f64;
                    for (j, &idx) in unit.iter().enumerate() {
                        let position = (base + u * WORK_UNIT + j) as u64;
                        let mut rng = child_rng(noise_seed, position);
                        let clean = &targets[idx];
                        let noisy = add_input_noise(clean, sigma, &mut rng);
                        let (m, a) =
                            example_loss_into(&model, &noisy, clean, lambda1, Mode::Train, &mut rng, &mut grads)?;
                        mse += m.as_f64();
                        l1 += a.as_f64();
                    }
                    Ok((grads, mse, l1))
                })
                .collect::<Result<_>>()?;

            let mut iter = units.into_iter();
            let (mut grads, mut batch_mse, mut batch_l1) = iter.next().expect("non-empty batch");
            for (g, m, a) in iter {
                grads.add_scaled(&g, T::one());
                batch_mse += m;
                batch_l1 += a;
            }
            let n = batch.len() as f64;
            grads.scale(T::lit(1.0 / n));
            let l2 = weight_penalty_into(&model, lambda2, &mut grads, T::one()).as_f64();
            if !grads.all_finite() || !batch_mse.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite loss or gradient in epoch {}",
                    epoch + 1
                )));
            }
            let g = grads.tensors();
            optimizer.step(&mut model.tensors_mut(), &g)?;

            sum_mse += batch_mse;
            sum_total += batch_mse + batch_l1 + l2 * n;
        }

        let val_mse = validation_mse(&model, &val_inputs, &val_targets)?;
        if !val_mse.is_finite() {
            return Err(Error::Numeric(format!(
                "validation MSE diverged in epoch {}",
                epoch + 1
            )));
        }
        let count = targets.len() as f64;
        let record = EpochRecord {
            epoch: epoch + 1,
            train_total: sum_total / count,
            train_mse: sum_mse / count,
            val_mse,
            seconds: started.elapsed().as_secs_f64(),
        };
        on_epoch(&record);
        history.epochs.push(record);
    }

    Ok(TrainOutcome {
        model,
        optimizer,
        history,
    })
}
