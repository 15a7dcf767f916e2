//! `RAED` v1 dataset files.
//!
//! Layout, little-endian: `"RAED"`, `u32` version, `u8` modulation code,
//! `u32` example count, `u32` example length, `u64` seed, then for every
//! example `example_len` f32 I samples followed by `example_len` f32 Q samples.

use std::fs;
use std::path::Path;

use crate::binio::{put_f32s, Reader};
use crate::dsp::dataset::Dataset;
use crate::dsp::modulation::Modulation;
use crate::error::{Error, Result};
use crate::nn::Matrix;

pub const MAGIC: &[u8; 4] = b"RAED";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 4 + 4 + 1 + 4 + 4 + 8;

pub fn encode_dataset(dataset: &Dataset) -> Result<Vec<u8>> {
    let len = dataset.example_len;
    let mut out = Vec::with_capacity(HEADER_LEN + dataset.len() * 2 * len * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(dataset.modulation.code());
    let n = u32::try_from(dataset.len()).map_err(|_| Error::param("too many examples"))?;
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&(len as u32).to_le_bytes());
    out.extend_from_slice(&dataset.seed.to_le_bytes());
    for (k, ex) in dataset.examples.iter().enumerate() {
        if ex.shape() != (2, len) {
            return Err(Error::shape(format!(
                "example {k} is {:?}, expected (2, {len})",
                ex.shape()
            )));
        }
        put_f32s(&mut out, ex.as_slice());
    }
    Ok(out)
}

pub fn decode_dataset(bytes: &[u8]) -> Result<Dataset> {
    let mut r = Reader::new(bytes);
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::format("magic", "not a RAED file"));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::format("version", format!("unsupported version {version}")));
    }
    let code = r.u8("modulation")?;
    let modulation =
        Modulation::from_code(code).ok_or_else(|| Error::format("modulation", format!("unknown code {code}")))?;
    let n = r.u32("n_examples")? as usize;
    let len = r.u32("example_len")? as usize;
    if len == 0 {
        return Err(Error::format("example_len", "zero-length examples"));
    }
    let seed = r.u64("seed")?;
    let mut examples = Vec::with_capacity(n.min(1 << 20));
    for k in 0..n {
        let data = r.f32s(2 * len, &format!("example[{k}]"))?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::format(format!("example[{k}]"), "non-finite sample"));
        }
        examples.push(Matrix::new(2, len, data)?);
    }
    r.finish("payload")?;
    Ok(Dataset {
        modulation,
        example_len: len,
        seed,
        examples,
    })
}

pub fn write_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_dataset(dataset)?)?;
    Ok(())
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    decode_dataset(&fs::read(path)?)
}
