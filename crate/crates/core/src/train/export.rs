//! CSV exports: learned weights, reconstructions and training history.

use std::fs;
use std::path::{Path, PathBuf};

use crate::dsp::Dataset;
use crate::error::{Error, Result};
use crate::model::{decode, encode_eval, ModelParams};
use crate::nn::Matrix;
use crate::rng::child_rng;
use crate::scalar::Scalar;
use crate::train::{add_input_noise, EpochRecord, TrainHistory};

pub const ENC_FILTERS_CSV: &str = "enc_filters.csv";
pub const DEC_FILTER_CSV: &str = "dec_filter.csv";
pub const DENSE_ROWS_CSV: &str = "dense_enc_rows.csv";
pub const HISTORY_CSV: &str = "train_history.csv";

/// Number of bottleneck units whose input weights are exported.
pub const DENSE_ROWS: usize = 4;

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::format("csv", format!("{other:?}")),
    }
}

fn fmt<T: Scalar>(v: T) -> String {
    // shortest representation that parses back to the same f32
    format!("{}", v.as_f32())
}

fn write_series(path: &Path, prefix: &str, names: &[String], rows: &[Vec<String>]) -> Result<()> {
    let width = rows.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["series".to_string()];
    header.extend((0..width).map(|k| format!("{prefix}_{k}")));
    w.write_record(&header).map_err(csv_err)?;
    for (name, row) in names.iter().zip(rows) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().cloned());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`export_weights`] back as `(name, values)` rows.
pub fn read_series(path: impl AsRef<Path>) -> Result<Vec<(String, Vec<f32>)>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let name = rec.get(0).unwrap_or_default().to_string();
        let values = rec
            .iter()
            .skip(1)
            .map(|s| s.parse::<f32>().map_err(|e| Error::format(&name, e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        out.push((name, values));
    }
    Ok(out)
}

/// Writes encoder filters, decoder filter and the input weights of the
/// first few bottleneck units. Returns the written paths.
pub fn export_weights<T: Scalar>(model: &ModelParams<T>, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir)?;
    let row = |v: &[T]| v.iter().map(|&x| fmt(x)).collect::<Vec<_>>();

    let enc = dir.join(ENC_FILTERS_CSV);
    let n = model.enc_filters.rows();
    write_series(
        &enc,
        "tap",
        &(0..n).map(|f| format!("enc_filter_{f}")).collect::<Vec<_>>(),
        &(0..n).map(|f| row(model.enc_filters.row(f))).collect::<Vec<_>>(),
    )?;

    let dec = dir.join(DEC_FILTER_CSV);
    write_series(
        &dec,
        "tap",
        &["dec_filter".to_string()],
        &[row(model.dec_filter.row(0))],
    )?;

    let dense = dir.join(DENSE_ROWS_CSV);
    let by_unit = model.enc_w.transpose();
    let units = DENSE_ROWS.min(by_unit.rows());
    write_series(
        &dense,
        "in",
        &(0..units).map(|j| format!("code_{j}")).collect::<Vec<_>>(),
        &(0..units).map(|j| row(by_unit.row(j))).collect::<Vec<_>>(),
    )?;
    Ok(vec![enc, dec, dense])
}

/// For each of the first `n` examples writes five rows: noisy I and Q,
/// reconstructed I and Q, and the bottleneck code padded to the row width.
pub fn reconstruct_examples<T: Scalar>(
    model: &ModelParams<T>,
    dataset: &Dataset,
    n: usize,
    noise_sigma: f64,
    seed: u64,
    out_path: impl AsRef<Path>,
) -> Result<PathBuf> {
    if n > dataset.len() {
        return Err(Error::param(format!(
            "asked for {n} reconstructions from {} examples",
            dataset.len()
        )));
    }
    let path = out_path.as_ref().to_path_buf();
    let len = model.arch.example_len;
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    let mut header = vec!["example".to_string(), "row".to_string()];
    header.extend((0..len).map(|k| format!("v{k}")));
    w.write_record(&header).map_err(csv_err)?;

    let sigma = T::lit(noise_sigma);
    for (k, ex) in dataset.examples.iter().take(n).enumerate() {
        let clean: Matrix<T> = ex.cast();
        let noisy = add_input_noise(&clean, sigma, &mut child_rng(seed, k as u64));
        let code = encode_eval(model, &noisy)?;
        let rec = decode(model, &code)?;
        let mut emit = |label: &str, values: &[T]| -> Result<()> {
            let mut r = vec![k.to_string(), label.to_string()];
            r.extend(values.iter().map(|&v| fmt(v)));
            r.resize(len + 2, String::new());
            w.write_record(&r).map_err(csv_err)
        };
        emit("i_in", noisy.row(0))?;
        emit("q_in", noisy.row(1))?;
        emit("i_rec", rec.row(0))?;
        emit("q_rec", rec.row(1))?;
        emit("code", code.as_slice())?;
    }
    w.flush()?;
    Ok(path)
}

/// One parsed reconstruction block.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionBlock {
    pub example: usize,
    pub rows: Vec<(String, Vec<f32>)>,
}

pub fn read_reconstructions(path: impl AsRef<Path>) -> Result<Vec<ReconstructionBlock>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut blocks: Vec<ReconstructionBlock> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let example: usize = rec
            .get(0)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format("example", "bad example index"))?;
        let label = rec.get(1).unwrap_or_default().to_string();
        let values = rec
            .iter()
            .skip(2)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f32>().map_err(|e| Error::format(&label, e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        match blocks.last_mut() {
            Some(b) if b.example == example => b.rows.push((label, values)),
            _ => blocks.push(ReconstructionBlock {
                example,
                rows: vec![(label, values)],
            }),
        }
    }
    Ok(blocks)
}

pub fn write_history(history: &TrainHistory, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["epoch", "train_total", "train_mse", "val_mse", "seconds"])
        .map_err(csv_err)?;
    for e in &history.epochs {
        w.write_record([
            e.epoch.to_string(),
            format!("{:?}", e.train_total),
            format!("{:?}", e.train_mse),
            format!("{:?}", e.val_mse),
            format!("{:.3}", e.seconds),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_history(path: impl AsRef<Path>) -> Result<TrainHistory> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut epochs = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let field = |k: usize, name: &str| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::format(name, "missing or unparsable"))
        };
        epochs.push(EpochRecord {
            epoch: field(0, "epoch")? as usize,
            train_total: field(1, "train_total")?,
            train_mse: field(2, "train_mse")?,
            val_mse: field(3, "val_mse")?,
            seconds: field(4, "seconds")?,
        });
    }
    Ok(TrainHistory { epochs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{init_model, Architecture};

    #[test]
    fn weights_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = init_model::<f32>(Architecture::default(), 5).unwrap();
        let files = export_weights(&m, dir.path()).unwrap();
        assert_eq!(files.len(), 3);

        let enc = read_series(dir.path().join(ENC_FILTERS_CSV)).unwrap();
        assert_eq!(enc.len(), 2);
        assert!(enc.iter().all(|(_, v)| v.len() == 40));
        assert_eq!(enc[1].1, m.enc_filters.row(1));

        let dec = read_series(dir.path().join(DEC_FILTER_CSV)).unwrap();
        assert_eq!(dec.len(), 1);
        assert_eq!(dec[0].1, m.dec_filter.row(0));

        let dense = read_series(dir.path().join(DENSE_ROWS_CSV)).unwrap();
        assert_eq!(dense.len(), 4);
        for (j, (_, row)) in dense.iter().enumerate() {
            assert_eq!(row.len(), 516);
            for (i, &v) in row.iter().enumerate() {
                assert_eq!(v, m.enc_w.get(i, j));
            }
        }
    }

    #[test]
    fn history_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let h = TrainHistory {
            epochs: vec![EpochRecord {
                epoch: 1,
                train_total: 0.125,
                train_mse: 0.1,
                val_mse: 0.09,
                seconds: 1.5,
            }],
        };
        let p = dir.path().join(HISTORY_CSV);
        write_history(&h, &p).unwrap();
        assert_eq!(read_history(&p).unwrap(), h);
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("epoch,train_total,train_mse,val_mse,seconds\n"));
    }
}
