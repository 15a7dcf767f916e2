//! Run configuration: a plain-text `key = value` file with `[section]`
//! headers and `#` comments.
//!
//! ```text
//! [run]
//! seed = 1
//!
//! [dataset]
//! modulation = qpsk
//! examples = 20000
//!
//! [train]
//! epochs = 25
//! ```

use std::path::Path;
use std::str::FromStr;

use radio_ae::dsp::ChannelModel;
use radio_ae::rng::split_seed;
use radio_ae::train::EvalConfig;
use radio_ae::{DatasetConfig, Modulation, TrainConfig};

use crate::error::{io_at, CliError, CliResult};

const STREAM_TRAIN: u64 = 0x7261;
const STREAM_VAL: u64 = 0x7661;
const STREAM_EVAL: u64 = 0x6576;
const STREAM_EXPORT: u64 = 0x6578;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub dataset: DatasetConfig,
    pub val_examples: usize,
    pub train: TrainConfig,
    pub saturation_delta: f64,
    pub export_examples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            dataset: DatasetConfig::default(),
            val_examples: 4000,
            train: TrainConfig::default(),
            saturation_delta: 0.05,
            export_examples: 2,
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> CliResult<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_at(path))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |msg: String| CliError::Config { line, msg };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("unterminated section header `{content}`")))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(err(format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(err(format!("missing value for `{key}`")));
            }
            let sec = section
                .as_deref()
                .ok_or_else(|| err(format!("`{key}` appears before any [section]")))?;
            cfg.set(sec, key, value).map_err(err)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), String> {
        let ds = &mut self.dataset;
        let ch = &mut ds.channel;
        let tr = &mut self.train;
        match (section, key) {
            ("run", "seed") => self.seed = num(key, value)?,
            ("dataset", "modulation") => ds.modulation = modulation(value)?,
            ("dataset", "examples") => ds.n_examples = num(key, value)?,
            ("dataset", "example_len") => ds.example_len = num(key, value)?,
            ("dataset", "sps") => ds.sps = num(key, value)?,
            ("dataset", "rrc_beta") => ds.rrc_beta = num(key, value)?,
            ("dataset", "rrc_span") => ds.rrc_span = num(key, value)?,
            ("dataset", "gfsk_bt") => ds.gfsk_bt = num(key, value)?,
            ("dataset", "gfsk_mod_index") => ds.gfsk_mod_index = num(key, value)?,
            ("dataset", "gfsk_span") => ds.gfsk_span = num(key, value)?,
            ("dataset", "val_examples") => self.val_examples = num(key, value)?,
            ("channel", "phase_noise_std") => ch.phase_noise_std = num(key, value)?,
            ("channel", "clock_ppm_max") => ch.clock_ppm_max = num(key, value)?,
            ("channel", "clock_delay_max") => ch.clock_delay_max = num(key, value)?,
            ("channel", "echo_amplitude") => ch.echo_amplitude = num(key, value)?,
            ("channel", "echo_delay") => ch.echo_delay = num(key, value)?,
            ("channel", "snr_db") => ch.snr_db = snr(value)?,
            ("channel", "carrier_offset_max") => ch.carrier_offset_max = num(key, value)?,
            ("channel", "preset") => match value {
                "identity" => *ch = ChannelModel::identity(),
                "default" => *ch = ChannelModel::default(),
                _ => return Err(format!("unknown channel preset `{value}`")),
            },
            ("model", "enc_filters") => tr.arch.enc_filters = num(key, value)?,
            ("model", "enc_taps") => tr.arch.enc_taps = num(key, value)?,
            ("model", "enc_pad") => tr.arch.enc_pad = num(key, value)?,
            ("model", "code_len") => tr.arch.code_len = num(key, value)?,
            ("model", "dec_taps") => tr.arch.dec_taps = num(key, value)?,
            ("model", "dropout") => tr.arch.dropout_rate = num(key, value)?,
            ("train", "epochs") => tr.epochs = num(key, value)?,
            ("train", "batch_size") => tr.batch_size = num(key, value)?,
            ("train", "noise_sigma") => tr.noise_sigma = num(key, value)?,
            ("train", "lambda1") => tr.lambda1 = num(key, value)?,
            ("train", "lambda2") => tr.lambda2 = num(key, value)?,
            ("train", "learning_rate") => tr.adam.alpha = num(key, value)?,
            ("train", "beta1") => tr.adam.beta1 = num(key, value)?,
            ("train", "beta2") => tr.adam.beta2 = num(key, value)?,
            ("train", "epsilon") => tr.adam.epsilon = num(key, value)?,
            ("eval", "saturation_delta") => self.saturation_delta = num(key, value)?,
            ("export", "examples") => self.export_examples = num(key, value)?,
            _ => return Err(format!("unknown key `{key}` in [{section}]")),
        }
        Ok(())
    }

    /// Cross-field checks shared by file parsing and flag overrides.
    pub fn validate(&self) -> CliResult<()> {
        let invalid = |e: radio_ae::Error| CliError::Invalid(e.to_string());
        let mut ds = self.resolved_dataset();
        ds.validate().map_err(invalid)?;
        ds.n_examples = self.val_examples.max(1);
        ds.validate().map_err(invalid)?;
        self.resolved_train(self.dataset.modulation)
            .validate()
            .map_err(invalid)?;
        if self.dataset.example_len != self.train.arch.example_len {
            return Err(CliError::Invalid(format!(
                "dataset example_len {} does not match model example_len {}",
                self.dataset.example_len, self.train.arch.example_len
            )));
        }
        if !(self.saturation_delta > 0.0 && self.saturation_delta < 0.5) {
            return Err(CliError::Invalid(format!(
                "saturation_delta must be in (0, 0.5), got {}",
                self.saturation_delta
            )));
        }
        Ok(())
    }

    pub fn resolved_dataset(&self) -> DatasetConfig {
        DatasetConfig {
            seed: self.seed,
            ..self.dataset.clone()
        }
    }

    /// Validation examples come from a seed stream disjoint from training.
    pub fn validation_dataset(&self, modulation: Modulation, train_seed: u64) -> DatasetConfig {
        DatasetConfig {
            modulation,
            n_examples: self.val_examples,
            seed: split_seed(train_seed, STREAM_VAL),
            ..self.dataset.clone()
        }
    }

    pub fn resolved_train(&self, modulation: Modulation) -> TrainConfig {
        TrainConfig {
            seed: split_seed(self.seed, STREAM_TRAIN),
            modulation,
            ..self.train.clone()
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            noise_sigma: self.train.noise_sigma,
            snr_db: self.dataset.channel.snr_db,
            saturation_delta: self.saturation_delta,
            seed: split_seed(self.seed, STREAM_EVAL),
        }
    }

    pub fn export_seed(&self) -> u64 {
        split_seed(self.seed, STREAM_EXPORT)
    }
}

const SECTIONS: [&str; 7] = ["run", "dataset", "channel", "model", "train", "eval", "export"];

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| format!("bad value `{value}` for `{key}`: {e}"))
}

fn modulation(value: &str) -> Result<Modulation, String> {
    if value.contains(',') {
        return Err("one modulation per dataset; mixing is not supported".to_string());
    }
    value.parse::<Modulation>().map_err(|e| e.to_string())
}

/// `snr_db` accepts a number or `inf`/`none` for a noiseless channel.
pub fn snr(value: &str) -> Result<f64, String> {
    match value.to_ascii_lowercase().as_str() {
        "inf" | "none" | "noiseless" => Ok(f64::INFINITY),
        v => v
            .parse::<f64>()
            .map_err(|e| format!("bad snr_db `{value}`: {e}"))
            .and_then(|x| {
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(format!("bad snr_db `{value}`"))
                }
            }),
    }
}
