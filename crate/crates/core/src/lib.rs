//! Synthetic radio IQ datasets and a convolutional denoising autoencoder
//! trained on them with hand-written backpropagation.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`). Training
//! runs in `f32`; gradient checks use `f64`. The aliases below name the two
//! concrete instantiations.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod binio;
pub mod dsp;
pub mod error;
pub mod model;
pub mod nn;
pub mod optim;
pub mod rng;
pub mod scalar;
pub mod train;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use dsp::{ComplexSeries, Dataset, DatasetConfig, Modulation};
pub use model::{Architecture, Code, LossBreakdown, ModelParams};
pub use nn::{Matrix, Mode};
pub use optim::{AdamHyper, AdamState};
pub use train::{Metrics, TrainConfig, TrainHistory};

pub type ModelF32 = ModelParams<f32>;
pub type ModelF64 = ModelParams<f64>;
pub type AdamF32 = AdamState<f32>;
pub type AdamF64 = AdamState<f64>;
pub type MatrixF32 = Matrix<f32>;
pub type MatrixF64 = Matrix<f64>;
pub type SeriesF32 = ComplexSeries<f32>;
pub type SeriesF64 = ComplexSeries<f64>;
