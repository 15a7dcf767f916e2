use rand::Rng;
use rayon::prelude::*;

use crate::dsp::channel::{apply_channel, ChannelModel};
use crate::dsp::filters::rrc_taps;
use crate::dsp::modulation::{modulate_gfsk, modulate_qpsk, Modulation};
use crate::dsp::series::{normalize_power, ComplexSeries};
use crate::error::{Error, Result};
use crate::nn::Matrix;
use crate::rng::child_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub modulation: Modulation,
    pub n_examples: usize,
    pub example_len: usize,
    pub sps: usize,
    pub rrc_beta: f64,
    pub rrc_span: usize,
    pub gfsk_bt: f64,
    pub gfsk_mod_index: f64,
    pub gfsk_span: usize,
    pub channel: ChannelModel,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            modulation: Modulation::Qpsk,
            n_examples: 20_000,
            example_len: 88,
            sps: 4,
            rrc_beta: 0.35,
            rrc_span: 8,
            gfsk_bt: 0.3,
            gfsk_mod_index: 0.5,
            gfsk_span: 4,
            channel: ChannelModel::default(),
            seed: 1,
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_examples == 0 {
            return Err(Error::param("n_examples must be positive"));
        }
        if self.sps < 2 {
            return Err(Error::param(format!("sps must be >= 2, got {}", self.sps)));
        }
        if self.example_len < 2 * self.sps {
            return Err(Error::param(format!(
                "example_len {} is shorter than two symbols at sps {}",
                self.example_len, self.sps
            )));
        }
        self.channel.validate()?;
        // surface filter parameter errors before any generation
        match self.modulation {
            Modulation::Qpsk => rrc_taps::<f64>(self.rrc_beta, self.sps, self.rrc_span).map(|_| ()),
            Modulation::Gfsk => {
                modulate_gfsk::<f64>(&[1], self.sps, self.gfsk_bt, self.gfsk_mod_index, self.gfsk_span).map(|_| ())
            }
        }
    }
}

/// Clean single-modulation examples, each a 2×`example_len` matrix holding
/// the I row then the Q row, normalized to unit average power.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub modulation: Modulation,
    pub example_len: usize,
    pub seed: u64,
    pub examples: Vec<Matrix<f32>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

fn random_bits<R: Rng>(rng: &mut R, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

/// One example: modulate, pass through a channel draw without its additive
/// noise stage, crop a random settled window, normalize.
fn build_example(config: &DatasetConfig, index: u64) -> Result<Matrix<f32>> {
    let mut rng = child_rng(config.seed, index);
    let len = config.example_len;
    let sps = config.sps;
    let (signal, transient) = match config.modulation {
        Modulation::Qpsk => {
            let taps = rrc_taps::<f64>(config.rrc_beta, sps, config.rrc_span)?;
            let n_sym = len.div_ceil(sps) + 2 * config.rrc_span + 8;
            let bits = random_bits(&mut rng, 2 * n_sym);
            (modulate_qpsk(&bits, sps, &taps)?, taps.len())
        }
        Modulation::Gfsk => {
            let n_sym = len.div_ceil(sps) + 2 * config.gfsk_span + 8;
            let bits = random_bits(&mut rng, n_sym);
            let sig = modulate_gfsk::<f64>(&bits, sps, config.gfsk_bt, config.gfsk_mod_index, config.gfsk_span)?;
            (sig, config.gfsk_span * sps + 1)
        }
    };
    let params = config.channel.sample(&mut rng)?.without_noise();
    let received = apply_channel(&signal, &params, &mut rng)?;
    let guard = transient + 2;
    let last = received
        .len()
        .checked_sub(guard + len)
        .filter(|&l| l >= guard)
        .ok_or_else(|| Error::param("generated signal too short for the crop window"))?;
    let start = rng.random_range(guard..=last);
    let window = normalize_power(&received.window(start, len)?)?;
    to_matrix(&window)
}

pub fn to_matrix(series: &ComplexSeries<f64>) -> Result<Matrix<f32>> {
    let data = series.i().iter().chain(series.q()).map(|&v| v as f32).collect();
    Matrix::new(2, series.len(), data)
}

/// Deterministic in `config.seed`: example `k` draws from stream `k` only.
pub fn build_dataset(config: &DatasetConfig) -> Result<Dataset> {
    config.validate()?;
    let examples = (0..config.n_examples as u64)
        .into_par_iter()
        .map(|k| build_example(config, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        modulation: config.modulation,
        example_len: config.example_len,
        seed: config.seed,
        examples,
    })
}
