//! The convolutional denoising autoencoder.
//!
//! Shape chain for the default architecture:
//! `2×88 → conv(2 filters, 40 taps, pad 40) → 4×129 → 516 → dropout →
//! dense → 44 → hard-sigmoid → dense → 176 → relu → 2×88 → conv(81 taps,
//! pad 40) → 2×88`.

pub mod checkpoint;

use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::activation::{hard_sigmoid, hard_sigmoid_backward, relu, relu_backward};
use crate::nn::conv::{conv1d_depthwise, conv1d_depthwise_backward_into, conv1d_output_len};
use crate::nn::dense::{dense, dense_backward_into};
use crate::nn::dropout::{dropout, DropoutMask, Mode};
use crate::nn::loss::{l1_activity_penalty, mse_loss};
use crate::nn::Matrix;
use crate::rng::rng_from_seed;
use crate::scalar::Scalar;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_model, save_model};

/// Layer sizes. Everything else is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Architecture {
    pub example_len: usize,
    pub enc_filters: usize,
    pub enc_taps: usize,
    pub enc_pad: usize,
    pub code_len: usize,
    /// Odd, so the decoder convolution can be length-preserving.
    pub dec_taps: usize,
    pub dropout_rate: f64,
}

impl Default for Architecture {
    fn default() -> Self {
        Self {
            example_len: 88,
            enc_filters: 2,
            enc_taps: 40,
            enc_pad: 40,
            code_len: 44,
            dec_taps: 81,
            dropout_rate: 0.5,
        }
    }
}

/// Number of IQ rows in every example.
pub const CHANNELS: usize = 2;

impl Architecture {
    pub fn validate(&self) -> Result<()> {
        if self.example_len == 0 || self.enc_filters == 0 || self.code_len == 0 {
            return Err(Error::param("architecture sizes must be positive"));
        }
        conv1d_output_len(self.example_len, self.enc_taps, self.enc_pad)?;
        if self.dec_taps.is_multiple_of(2) {
            return Err(Error::param(format!("decoder taps must be odd, got {}", self.dec_taps)));
        }
        conv1d_output_len(self.example_len, self.dec_taps, self.dec_pad())?;
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::param("dropout rate must be in [0, 1)"));
        }
        Ok(())
    }

    pub fn enc_out_len(&self) -> usize {
        self.example_len + 2 * self.enc_pad - self.enc_taps + 1
    }

    pub fn flat_len(&self) -> usize {
        self.enc_filters * CHANNELS * self.enc_out_len()
    }

    pub fn dec_pad(&self) -> usize {
        (self.dec_taps - 1) / 2
    }

    pub fn wide_len(&self) -> usize {
        CHANNELS * self.example_len
    }

    /// `(name, rows, cols)` of every tensor, in checkpoint order.
    pub fn tensor_shapes(&self) -> [(&'static str, usize, usize); 6] {
        [
            (ENC_FILTERS, self.enc_filters, self.enc_taps),
            (ENC_W, self.flat_len(), self.code_len),
            (ENC_B, 1, self.code_len),
            (DEC_W, self.code_len, self.wide_len()),
            (DEC_B, 1, self.wide_len()),
            (DEC_FILTER, 1, self.dec_taps),
        ]
    }
}

pub const ENC_FILTERS: &str = "enc_filters";
pub const ENC_W: &str = "enc_dense.weight";
pub const ENC_B: &str = "enc_dense.bias";
pub const DEC_W: &str = "dec_dense.weight";
pub const DEC_B: &str = "dec_dense.bias";
pub const DEC_FILTER: &str = "dec_filter";

/// Tensors covered by the weight penalty: everything except biases.
pub fn is_weight(name: &str) -> bool {
    !name.ends_with(".bias")
}

/// All learnable tensors. Also used as the gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    pub arch: Architecture,
    pub enc_filters: Matrix<T>,
    pub enc_w: Matrix<T>,
    pub enc_b: Vec<T>,
    pub dec_w: Matrix<T>,
    pub dec_b: Vec<T>,
    pub dec_filter: Matrix<T>,
}

impl<T: Scalar> ModelParams<T> {
    pub fn zeros(arch: Architecture) -> Result<Self> {
        arch.validate()?;
        Ok(Self {
            arch,
            enc_filters: Matrix::zeros(arch.enc_filters, arch.enc_taps),
            enc_w: Matrix::zeros(arch.flat_len(), arch.code_len),
            enc_b: vec![T::zero(); arch.code_len],
            dec_w: Matrix::zeros(arch.code_len, arch.wide_len()),
            dec_b: vec![T::zero(); arch.wide_len()],
            dec_filter: Matrix::zeros(1, arch.dec_taps),
        })
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.arch).expect("architecture already validated")
    }

    /// Tensors in checkpoint order.
    pub fn tensors(&self) -> [&[T]; 6] {
        [
            self.enc_filters.as_slice(),
            self.enc_w.as_slice(),
            &self.enc_b,
            self.dec_w.as_slice(),
            &self.dec_b,
            self.dec_filter.as_slice(),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [T]; 6] {
        [
            self.enc_filters.as_mut_slice(),
            self.enc_w.as_mut_slice(),
            &mut self.enc_b,
            self.dec_w.as_mut_slice(),
            &mut self.dec_b,
            self.dec_filter.as_mut_slice(),
        ]
    }

    pub fn named_tensors(&self) -> impl Iterator<Item = (&'static str, &[T])> {
        self.arch
            .tensor_shapes()
            .into_iter()
            .map(|(name, _, _)| name)
            .zip(self.tensors())
    }

    pub fn tensor_sizes(&self) -> Vec<usize> {
        self.tensors().iter().map(|t| t.len()).collect()
    }

    pub fn total_len(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// `(convolution parameters, dense weight values)`; biases excluded.
    pub fn param_count(&self) -> (usize, usize) {
        (
            self.enc_filters.len() + self.dec_filter.len(),
            self.enc_w.len() + self.dec_w.len(),
        )
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    /// Flattened copy of every tensor in checkpoint order.
    pub fn to_flat(&self) -> Vec<T> {
        self.tensors().concat()
    }

    pub fn set_from_flat(&mut self, flat: &[T]) -> Result<()> {
        if flat.len() != self.total_len() {
            return Err(Error::shape(format!(
                "flat vector has {} values, model has {}",
                flat.len(),
                self.total_len()
            )));
        }
        let mut offset = 0;
        for t in self.tensors_mut() {
            let n = t.len();
            t.copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> ModelParams<U> {
        ModelParams {
            arch: self.arch,
            enc_filters: self.enc_filters.cast(),
            enc_w: self.enc_w.cast(),
            enc_b: self.enc_b.iter().map(|v| U::lit(v.as_f64())).collect(),
            dec_w: self.dec_w.cast(),
            dec_b: self.dec_b.iter().map(|v| U::lit(v.as_f64())).collect(),
            dec_filter: self.dec_filter.cast(),
        }
    }

    /// `self += k·other`, tensor by tensor.
    pub fn add_scaled(&mut self, other: &Self, k: T) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, &y) in a.iter_mut().zip(b) {
                *x += k * y;
            }
        }
    }

    pub fn scale(&mut self, k: T) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= k);
        }
    }
}

/// Glorot-uniform weights, zero biases, deterministic per seed.
pub fn init_model<T: Scalar>(arch: Architecture, seed: u64) -> Result<ModelParams<T>> {
    let mut model = ModelParams::<T>::zeros(arch)?;
    let mut rng = rng_from_seed(seed);
    let fans = [
        (arch.enc_taps, arch.enc_filters * arch.enc_taps),
        (arch.flat_len(), arch.code_len),
        (0, 0),
        (arch.code_len, arch.wide_len()),
        (0, 0),
        (arch.dec_taps, arch.dec_taps),
    ];
    for (tensor, (fan_in, fan_out)) in model.tensors_mut().into_iter().zip(fans) {
        if fan_in == 0 {
            continue;
        }
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        for v in tensor.iter_mut() {
            *v = T::lit(rng.random_range(-limit..limit));
        }
    }
    Ok(model)
}

/// Bottleneck activations, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Code<T>(Vec<T>);

impl<T: Scalar> Code<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.iter().any(|&v| !(v >= T::zero() && v <= T::one())) {
            return Err(Error::param("code values must lie in [0, 1]"));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown<T> {
    pub mse: T,
    pub l1_activity: T,
    pub l2_weights: T,
    pub total: T,
}

/// Intermediate activations of one forward pass, kept for backprop.
#[derive(Debug, Clone)]
pub struct Trace<T> {
    pub conv_out: Matrix<T>,
    pub flat: Vec<T>,
    pub mask: DropoutMask<T>,
    pub dropped: Vec<T>,
    pub enc_pre: Vec<T>,
    pub code: Vec<T>,
    pub dec_pre: Vec<T>,
    pub hidden: Matrix<T>,
    pub output: Matrix<T>,
}

fn check_example<T: Scalar>(arch: &Architecture, x: &Matrix<T>, what: &str) -> Result<()> {
    if x.shape() != (CHANNELS, arch.example_len) {
        return Err(Error::shape(format!(
            "{what} is {:?}, expected ({CHANNELS}, {})",
            x.shape(),
            arch.example_len
        )));
    }
    Ok(())
}

/// conv output, flat, mask, dropped, pre-activation, code
type EncoderTrace<T> = (Matrix<T>, Vec<T>, DropoutMask<T>, Vec<T>, Vec<T>, Vec<T>);

fn encode_trace<T: Scalar, R: Rng + ?Sized>(
    model: &ModelParams<T>,
    x: &Matrix<T>,
    mode: Mode,
    rng: &mut R,
) -> Result<EncoderTrace<T>> {
    let arch = &model.arch;
    check_example(arch, x, "encoder input")?;
    let conv_out = conv1d_depthwise(x, &model.enc_filters, arch.enc_pad)?;
    let flat = conv_out.as_slice().to_vec();
    let (dropped, mask) = dropout(&flat, arch.dropout_rate, mode, rng)?;
    let enc_pre = dense(&dropped, &model.enc_w, &model.enc_b)?;
    let code = hard_sigmoid(&enc_pre);
    Ok((conv_out, flat, mask, dropped, enc_pre, code))
}

fn decode_trace<T: Scalar>(model: &ModelParams<T>, code: &[T]) -> Result<(Vec<T>, Matrix<T>, Matrix<T>)> {
    let arch = &model.arch;
    if code.len() != arch.code_len {
        return Err(Error::shape(format!(
            "code has {} values, expected {}",
            code.len(),
            arch.code_len
        )));
    }
    let dec_pre = dense(code, &model.dec_w, &model.dec_b)?;
    let hidden = Matrix::new(CHANNELS, arch.example_len, relu(&dec_pre))?;
    let output = conv1d_depthwise(&hidden, &model.dec_filter, arch.dec_pad())?;
    Ok((dec_pre, hidden, output))
}

pub fn forward<T: Scalar, R: Rng + ?Sized>(
    model: &ModelParams<T>,
    x: &Matrix<T>,
    mode: Mode,
    rng: &mut R,
) -> Result<Trace<T>> {
    let (conv_out, flat, mask, dropped, enc_pre, code) = encode_trace(model, x, mode, rng)?;
    let (dec_pre, hidden, output) = decode_trace(model, &code)?;
    Ok(Trace {
        conv_out,
        flat,
        mask,
        dropped,
        enc_pre,
        code,
        dec_pre,
        hidden,
        output,
    })
}

/// Encoder half. `rng` is only drawn from in [`Mode::Train`].
pub fn encode<T: Scalar, R: Rng + ?Sized>(
    model: &ModelParams<T>,
    x: &Matrix<T>,
    mode: Mode,
    rng: &mut R,
) -> Result<Code<T>> {
    let (.., code) = encode_trace(model, x, mode, rng)?;
    Ok(Code(code))
}

/// Eval-mode encoder, no randomness.
pub fn encode_eval<T: Scalar>(model: &ModelParams<T>, x: &Matrix<T>) -> Result<Code<T>> {
    encode(model, x, Mode::Eval, &mut rng_from_seed(0))
}

pub fn decode<T: Scalar>(model: &ModelParams<T>, code: &Code<T>) -> Result<Matrix<T>> {
    Ok(decode_trace(model, code.as_slice())?.2)
}

pub fn reconstruct<T: Scalar>(model: &ModelParams<T>, x: &Matrix<T>) -> Result<Matrix<T>> {
    decode(model, &encode_eval(model, x)?)
}

/// Data term of the loss for one example: MSE against `x_clean` plus the
/// bottleneck activity penalty. Gradients are added into `grads`.
pub fn example_loss_into<T: Scalar, R: Rng + ?Sized>(
    model: &ModelParams<T>,
    x_noisy: &Matrix<T>,
    x_clean: &Matrix<T>,
    lambda1: T,
    mode: Mode,
    rng: &mut R,
    grads: &mut ModelParams<T>,
) -> Result<(T, T)> {
    let arch = model.arch;
    if grads.arch != arch {
        return Err(Error::shape("gradient buffer architecture differs from model"));
    }
    check_example(&arch, x_clean, "target")?;
    let tr = forward(model, x_noisy, mode, rng)?;
    let (mse, d_out) = mse_loss(&tr.output, x_clean)?;
    let (l1, d_code_l1) = l1_activity_penalty(&tr.code, lambda1);

    let d_hidden = conv1d_depthwise_backward_into(
        &tr.hidden,
        &model.dec_filter,
        arch.dec_pad(),
        &d_out,
        &mut grads.dec_filter,
    )?;
    let d_dec_pre = relu_backward(&tr.dec_pre, d_hidden.as_slice());
    let mut d_code = dense_backward_into(&tr.code, &model.dec_w, &d_dec_pre, &mut grads.dec_w, &mut grads.dec_b)?;
    for (d, l) in d_code.iter_mut().zip(&d_code_l1) {
        *d += *l;
    }
    let d_enc_pre = hard_sigmoid_backward(&tr.enc_pre, &d_code);
    let d_dropped = dense_backward_into(
        &tr.dropped,
        &model.enc_w,
        &d_enc_pre,
        &mut grads.enc_w,
        &mut grads.enc_b,
    )?;
    let d_flat = tr.mask.backward(&d_dropped);
    let d_conv = Matrix::new(tr.conv_out.rows(), tr.conv_out.cols(), d_flat)?;
    conv1d_depthwise_backward_into(
        x_noisy,
        &model.enc_filters,
        arch.enc_pad,
        &d_conv,
        &mut grads.enc_filters,
    )?;
    Ok((mse, l1))
}

/// `λ2·Σw²` over all non-bias tensors; `scale·2λ2·w` is added into `grads`.
pub fn weight_penalty_into<T: Scalar>(model: &ModelParams<T>, lambda2: T, grads: &mut ModelParams<T>, scale: T) -> T {
    let names = model.arch.tensor_shapes().map(|(n, _, _)| n);
    let mut penalty = T::zero();
    let two = T::lit(2.0) * lambda2 * scale;
    for ((name, w), g) in names.iter().zip(model.tensors()).zip(grads.tensors_mut()) {
        if !is_weight(name) {
            continue;
        }
        penalty += w.iter().map(|&v| v * v).sum::<T>();
        for (gk, &wk) in g.iter_mut().zip(w) {
            *gk += two * wk;
        }
    }
    lambda2 * penalty
}

/// Full regularized denoising loss for one example with gradients for
/// every tensor.
#[allow(clippy::too_many_arguments)]
pub fn forward_loss<T: Scalar, R: Rng + ?Sized>(
    model: &ModelParams<T>,
    x_noisy: &Matrix<T>,
    x_clean: &Matrix<T>,
    lambda1: T,
    lambda2: T,
    mode: Mode,
    rng: &mut R,
) -> Result<(LossBreakdown<T>, ModelParams<T>)> {
    if lambda1 < T::zero() || lambda2 < T::zero() {
        return Err(Error::param("regularization weights must be >= 0"));
    }
    let mut grads = model.zeros_like();
    let (mse, l1_activity) = example_loss_into(model, x_noisy, x_clean, lambda1, mode, rng, &mut grads)?;
    let l2_weights = weight_penalty_into(model, lambda2, &mut grads, T::one());
    Ok((
        LossBreakdown {
            mse,
            l1_activity,
            l2_weights,
            total: mse + l1_activity + l2_weights,
        },
        grads,
    ))
}

pub fn param_count<T: Scalar>(model: &ModelParams<T>) -> (usize, usize) {
    model.param_count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_example(seed: u64) -> Matrix<f64> {
        let mut rng = rng_from_seed(seed);
        Matrix::new(2, 88, (0..176).map(|_| f64::standard_normal(&mut rng)).collect()).unwrap()
    }

    #[test]
    fn default_counts() {
        let m = init_model::<f32>(Architecture::default(), 1).unwrap();
        assert_eq!(m.param_count(), (161, 30448));
        assert_eq!(2 * 40 + 81, 161);
        assert_eq!(516 * 44 + 44 * 176, 30448);
        assert_eq!(m.total_len(), 30448 + 161 + 44 + 176);
    }

    #[test]
    fn init_is_deterministic_with_zero_biases() {
        let a = init_model::<f64>(Architecture::default(), 9).unwrap();
        let b = init_model::<f64>(Architecture::default(), 9).unwrap();
        assert_eq!(a, b);
        assert!(a.enc_b.iter().chain(&a.dec_b).all(|&v| v == 0.0));
        let limit = (6.0f64 / (516.0 + 44.0)).sqrt();
        assert!(a.enc_w.as_slice().iter().all(|v| v.abs() <= limit));
        assert_ne!(a, init_model::<f64>(Architecture::default(), 10).unwrap());
    }

    #[test]
    fn shape_chain() {
        let m = init_model::<f64>(Architecture::default(), 2).unwrap();
        let tr = forward(&m, &random_example(1), Mode::Eval, &mut rng_from_seed(0)).unwrap();
        assert_eq!(tr.conv_out.shape(), (4, 129));
        assert_eq!(tr.flat.len(), 516);
        assert_eq!(tr.code.len(), 44);
        assert_eq!(tr.dec_pre.len(), 176);
        assert_eq!(tr.hidden.shape(), (2, 88));
        assert_eq!(tr.output.shape(), (2, 88));
    }

    #[test]
    fn zero_input_codes_half() {
        let m = init_model::<f64>(Architecture::default(), 3).unwrap();
        let code = encode_eval(&m, &Matrix::zeros(2, 88)).unwrap();
        assert_eq!(code.len(), 44);
        assert!(code.as_slice().iter().all(|&c| c == 0.5));
    }

    #[test]
    fn zero_code_decodes_to_zero() {
        let m = init_model::<f64>(Architecture::default(), 3).unwrap();
        let out = decode(&m, &Code::new(vec![0.0; 44]).unwrap()).unwrap();
        assert_eq!(out.shape(), (2, 88));
        assert!(out.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn eval_is_deterministic() {
        let m = init_model::<f64>(Architecture::default(), 4).unwrap();
        let x = random_example(5);
        assert_eq!(encode_eval(&m, &x).unwrap(), encode_eval(&m, &x).unwrap());
        assert_eq!(reconstruct(&m, &x).unwrap(), reconstruct(&m, &x).unwrap());
    }

    #[test]
    fn wrong_shapes_rejected() {
        let m = init_model::<f64>(Architecture::default(), 4).unwrap();
        assert!(matches!(encode_eval(&m, &Matrix::zeros(2, 87)), Err(Error::Shape(_))));
        assert!(matches!(
            decode(&m, &Code::new(vec![0.0; 43]).unwrap()),
            Err(Error::Shape(_))
        ));
        let x = random_example(1);
        let r = forward_loss(
            &m,
            &x,
            &Matrix::zeros(1, 88),
            0.0,
            0.0,
            Mode::Eval,
            &mut rng_from_seed(0),
        );
        assert!(matches!(r, Err(Error::Shape(_))));
    }

    #[test]
    fn loss_decomposes() {
        let m = init_model::<f64>(Architecture::default(), 6).unwrap();
        let x = random_example(7);
        let (loss, _) = forward_loss(&m, &x, &x, 1e-3, 1e-3, Mode::Train, &mut rng_from_seed(1)).unwrap();
        assert!((loss.total - (loss.mse + loss.l1_activity + loss.l2_weights)).abs() <= 1e-12);
        assert!(loss.l2_weights > 0.0 && loss.total > loss.mse);
        assert!(loss.mse >= 0.0 && loss.l1_activity >= 0.0);
    }

    #[test]
    fn all_zero_model_reconstructs_zero_exactly() {
        let m = ModelParams::<f64>::zeros(Architecture::default()).unwrap();
        let x = Matrix::zeros(2, 88);
        let (loss, _) = forward_loss(&m, &x, &x, 0.0, 0.0, Mode::Eval, &mut rng_from_seed(0)).unwrap();
        assert_eq!(loss.total, 0.0);
    }

    #[test]
    fn architecture_validation() {
        let bad = Architecture {
            dec_taps: 80,
            ..Default::default()
        };
        assert!(init_model::<f32>(bad, 0).is_err());
        let bad = Architecture {
            enc_taps: 300,
            ..Default::default()
        };
        assert!(init_model::<f32>(bad, 0).is_err());
    }
}
