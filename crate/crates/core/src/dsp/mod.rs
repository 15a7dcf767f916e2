//! Signal synthesis: pulse shaping, modulators, channel model and datasets.

pub mod channel;
pub mod dataset;
pub mod filters;
pub mod modulation;
pub mod raed;
pub mod series;

pub use channel::{apply_channel, awgn, measure_snr, ChannelModel, ChannelParams, ChannelSettings, NOISELESS};
pub use dataset::{build_dataset, Dataset, DatasetConfig};
pub use filters::{gaussian_taps, rrc_taps, FilterKind, FilterTaps};
pub use modulation::{map_qpsk, modulate_gfsk, modulate_qpsk, Modulation, SymbolStream};
pub use raed::{read_dataset, write_dataset};
pub use series::{normalize_power, ComplexSeries};
