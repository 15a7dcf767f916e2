//! `RAEM` v1 checkpoints.
//!
//! Little-endian throughout:
//!
//! ```text
//! "RAEM"  u32 version
//! u32 example_len, enc_filters, enc_taps, enc_pad, code_len, dec_taps; f64 dropout_rate
//! u32 tensor count, then per tensor: u32 name length, UTF-8 name,
//!     u32 ndims, u32 dims[ndims], f32 values
//! f64 alpha, beta1, beta2, epsilon
//! per tensor: f32 first moments, f32 second moments
//! u64 training step
//! ```

use std::fs;
use std::path::Path;

use crate::binio::{put_f32s, Reader};
use crate::error::{Error, Result};
use crate::model::{Architecture, ModelParams};
use crate::optim::{AdamHyper, AdamState};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 4] = b"RAEM";
pub const VERSION: u32 = 1;

fn put_u32(out: &mut Vec<u8>, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::param(format!("{v} does not fit in u32")))?;
    out.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

fn to_f32s<T: Scalar>(v: &[T]) -> Vec<f32> {
    v.iter().map(|x| x.as_f32()).collect()
}

pub fn encode_checkpoint<T: Scalar>(model: &ModelParams<T>, state: &AdamState<T>) -> Result<Vec<u8>> {
    if state.sizes() != model.tensor_sizes() {
        return Err(Error::shape("optimizer state does not match model tensors"));
    }
    let arch = &model.arch;
    let mut out = Vec::with_capacity(64 + 12 * model.total_len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for v in [
        arch.example_len,
        arch.enc_filters,
        arch.enc_taps,
        arch.enc_pad,
        arch.code_len,
        arch.dec_taps,
    ] {
        put_u32(&mut out, v)?;
    }
    out.extend_from_slice(&arch.dropout_rate.to_le_bytes());

    let shapes = arch.tensor_shapes();
    put_u32(&mut out, shapes.len())?;
    for ((name, rows, cols), data) in shapes.iter().zip(model.tensors()) {
        put_u32(&mut out, name.len())?;
        out.extend_from_slice(name.as_bytes());
        put_u32(&mut out, 2)?;
        put_u32(&mut out, *rows)?;
        put_u32(&mut out, *cols)?;
        put_f32s(&mut out, &to_f32s(data));
    }

    let h = state.hyper();
    for v in [h.alpha, h.beta1, h.beta2, h.epsilon] {
        out.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    for (m, v) in state.first_moments().iter().zip(state.second_moments()) {
        put_f32s(&mut out, &to_f32s(m));
        put_f32s(&mut out, &to_f32s(v));
    }
    out.extend_from_slice(&state.step_count().to_le_bytes());
    Ok(out)
}

fn lift<T: Scalar>(v: Vec<f32>) -> Vec<T> {
    v.into_iter().map(|x| T::lit(x as f64)).collect()
}

pub fn decode_checkpoint<T: Scalar>(bytes: &[u8]) -> Result<(ModelParams<T>, AdamState<T>)> {
    let mut r = Reader::new(bytes);
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::format("magic", "not a RAEM checkpoint"));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::format("version", format!("unsupported version {version}")));
    }
    let mut dims = [0usize; 6];
    for (d, field) in dims.iter_mut().zip([
        "arch.example_len",
        "arch.enc_filters",
        "arch.enc_taps",
        "arch.enc_pad",
        "arch.code_len",
        "arch.dec_taps",
    ]) {
        *d = r.u32(field)? as usize;
    }
    let arch = Architecture {
        example_len: dims[0],
        enc_filters: dims[1],
        enc_taps: dims[2],
        enc_pad: dims[3],
        code_len: dims[4],
        dec_taps: dims[5],
        dropout_rate: r.f64("arch.dropout_rate")?,
    };
    arch.validate().map_err(|e| Error::format("arch", e.to_string()))?;

    let mut model = ModelParams::<T>::zeros(arch)?;
    let shapes = arch.tensor_shapes();
    let count = r.u32("tensor_count")? as usize;
    if count != shapes.len() {
        return Err(Error::format(
            "tensor_count",
            format!("expected {}, found {count}", shapes.len()),
        ));
    }
    for (k, &(name, rows, cols)) in shapes.iter().enumerate() {
        let field = format!("tensor[{k}]");
        let name_len = r.u32(&format!("{field}.name_len"))? as usize;
        let stored = r.take(name_len, &format!("{field}.name"))?;
        if stored != name.as_bytes() {
            return Err(Error::format(
                format!("{field}.name"),
                format!("expected `{name}`, found `{}`", String::from_utf8_lossy(stored)),
            ));
        }
        let ndims = r.u32(&format!("{name}.ndims"))? as usize;
        if ndims != 2 {
            return Err(Error::format(
                format!("{name}.ndims"),
                format!("expected 2, found {ndims}"),
            ));
        }
        let shape = (
            r.u32(&format!("{name}.dims"))? as usize,
            r.u32(&format!("{name}.dims"))? as usize,
        );
        if shape != (rows, cols) {
            return Err(Error::format(
                format!("{name}.dims"),
                format!("expected {rows}x{cols}, found {}x{}", shape.0, shape.1),
            ));
        }
        let data = r.f32s(rows * cols, name)?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::format(name, "non-finite value"));
        }
        model.tensors_mut()[k].copy_from_slice(&lift::<T>(data));
    }

    let hyper = AdamHyper {
        alpha: T::lit(r.f64("adam.alpha")?),
        beta1: T::lit(r.f64("adam.beta1")?),
        beta2: T::lit(r.f64("adam.beta2")?),
        epsilon: T::lit(r.f64("adam.epsilon")?),
    };
    let mut m = Vec::with_capacity(shapes.len());
    let mut v = Vec::with_capacity(shapes.len());
    for &(name, rows, cols) in &shapes {
        m.push(lift(r.f32s(rows * cols, &format!("adam.m.{name}"))?));
        v.push(lift(r.f32s(rows * cols, &format!("adam.v.{name}"))?));
    }
    let step = r.u64("step")?;
    r.finish("step")?;
    let state = AdamState::from_parts(step, m, v, hyper).map_err(|e| Error::format("adam", e.to_string()))?;
    Ok((model, state))
}

pub fn save_model<T: Scalar>(model: &ModelParams<T>, state: &AdamState<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_checkpoint(model, state)?)?;
    Ok(())
}

pub fn load_model<T: Scalar>(path: impl AsRef<Path>) -> Result<(ModelParams<T>, AdamState<T>)> {
    decode_checkpoint(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::init_model;

    fn sample() -> (ModelParams<f32>, AdamState<f32>) {
        let model = init_model::<f32>(Architecture::default(), 11).unwrap();
        let mut state = AdamState::new(&model.tensor_sizes(), AdamHyper::default()).unwrap();
        let grads: Vec<Vec<f32>> = model
            .tensors()
            .iter()
            .map(|t| t.iter().map(|v| v * 0.5 + 0.01).collect())
            .collect();
        let mut m2 = model.clone();
        let g: Vec<&[f32]> = grads.iter().map(Vec::as_slice).collect();
        state.step(&mut m2.tensors_mut(), &g).unwrap();
        (m2, state)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (model, state) = sample();
        let bytes = encode_checkpoint(&model, &state).unwrap();
        let (m2, s2) = decode_checkpoint::<f32>(&bytes).unwrap();
        assert_eq!(m2, model);
        assert_eq!(s2, state);
        assert_eq!(s2.step_count(), 1);
    }

    #[test]
    fn size_matches_inventory() {
        let (model, state) = sample();
        let bytes = encode_checkpoint(&model, &state).unwrap();
        let values = 3 * model.total_len();
        let names: usize = model.arch.tensor_shapes().iter().map(|(n, _, _)| n.len()).sum();
        let header = 8 + 6 * 4 + 8 + 4 + 6 * (4 + 4 + 8) + names + 4 * 8 + 8;
        assert_eq!(bytes.len(), values * 4 + header);
    }

    #[test]
    fn truncation_is_a_format_error() {
        let (model, state) = sample();
        let bytes = encode_checkpoint(&model, &state).unwrap();
        for cut in [3, 10, 40, 200, bytes.len() / 2, bytes.len() - 1] {
            let err = decode_checkpoint::<f32>(&bytes[..cut]).unwrap_err();
            assert!(matches!(err, Error::Format { .. }), "cut {cut}: {err}");
        }
    }

    #[test]
    fn renamed_tensor_reports_field() {
        let (model, state) = sample();
        let mut bytes = encode_checkpoint(&model, &state).unwrap();
        // first tensor name starts after magic, version, arch block and count
        let at = 8 + 24 + 8 + 4 + 4;
        bytes[at] = b'X';
        let err = decode_checkpoint::<f32>(&bytes).unwrap_err();
        assert!(
            matches!(&err, Error::Format { field, .. } if field == "tensor[0].name"),
            "{err}"
        );
    }

    #[test]
    fn mismatched_state_rejected() {
        let (model, _) = sample();
        let state = AdamState::<f32>::new(&[1, 2], AdamHyper::default()).unwrap();
        assert!(encode_checkpoint(&model, &state).is_err());
    }
}
