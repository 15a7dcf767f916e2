use std::io::Write;
use std::path::{Path, PathBuf};

use radio_ae::dsp::{build_dataset, read_dataset, write_dataset};
use radio_ae::model::{load_model, save_model};
use radio_ae::train::export::{export_weights, reconstruct_examples, write_history, HISTORY_CSV};
use radio_ae::train::{evaluate, train_with_progress};
use radio_ae::{Dataset, Metrics, Modulation};

use crate::config::RunConfig;
use crate::error::{at_path, io_at, CliError, CliResult};
use crate::{Command, Common};

pub const METRICS_CSV: &str = "metrics.csv";
pub const RECONSTRUCTIONS_CSV: &str = "reconstructions.csv";
pub const MANIFEST: &str = "MANIFEST";

pub fn dispatch(command: Command, out: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::GenDataset {
            common,
            examples,
            out: path,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(n) = examples {
                cfg.dataset.n_examples = n;
            }
            cfg.validate()?;
            gen_dataset(&cfg, &path, out)
        }
        Command::Train {
            common,
            data,
            epochs,
            out: path,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(e) = epochs {
                cfg.train.epochs = e;
            }
            cfg.validate()?;
            train(&cfg, common.modulation, &data, &path, out)
        }
        Command::Eval {
            common,
            model,
            data,
            out: dir,
        } => {
            let cfg = load_config(&common)?;
            let dir = dir.unwrap_or_else(|| parent_dir(&model));
            eval(&cfg, common.modulation, &model, &data, &dir, out).map(|_| ())
        }
        Command::Export {
            common,
            model,
            data,
            out: dir,
            n,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(n) = n {
                cfg.export_examples = n;
            }
            export(&cfg, common.modulation, &model, &data, &dir, out).map(|_| ())
        }
    }
}

fn load_config(common: &Common) -> CliResult<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            if !path.exists() {
                return Err(CliError::Usage(format!(
                    "config file {} does not exist",
                    path.display()
                )));
            }
            RunConfig::load(path)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(m) = common.modulation {
        cfg.dataset.modulation = m;
    }
    if let Some(snr) = common.snr_db {
        cfg.dataset.channel.snr_db = snr;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn ensure_parent(path: &Path) -> CliResult<()> {
    let dir = parent_dir(path);
    std::fs::create_dir_all(&dir).map_err(io_at(dir))
}

fn require_input(path: &Path, what: &str) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{what} {} does not exist", path.display())))
    }
}

fn load_dataset(path: &Path, expect: Option<Modulation>) -> CliResult<Dataset> {
    require_input(path, "dataset")?;
    let ds = read_dataset(path).map_err(at_path(path))?;
    if let Some(m) = expect {
        if m != ds.modulation {
            return Err(CliError::Invalid(format!(
                "{} holds {} examples but --mod asks for {m}",
                path.display(),
                ds.modulation
            )));
        }
    }
    Ok(ds)
}

pub fn gen_dataset(cfg: &RunConfig, path: &Path, out: &mut dyn Write) -> CliResult<()> {
    let ds_cfg = cfg.resolved_dataset();
    let ds = build_dataset(&ds_cfg)?;
    ensure_parent(path)?;
    write_dataset(&ds, path).map_err(at_path(path))?;
    let snr = ds_cfg.channel.snr_db;
    let snr = if snr.is_finite() {
        format!("{snr:?} dB")
    } else {
        "noiseless".to_string()
    };
    let _ = writeln!(
        out,
        "wrote {} {} examples of {} samples (nominal snr {snr}) to {}",
        ds.len(),
        ds.modulation,
        ds.example_len,
        path.display()
    );
    Ok(())
}

pub fn train(
    cfg: &RunConfig,
    expect: Option<Modulation>,
    data: &Path,
    path: &Path,
    out: &mut dyn Write,
) -> CliResult<()> {
    let ds = load_dataset(data, expect)?;
    if ds.example_len != cfg.train.arch.example_len {
        return Err(CliError::Invalid(format!(
            "dataset examples have {} samples, model expects {}",
            ds.example_len, cfg.train.arch.example_len
        )));
    }
    let val = build_dataset(&cfg.validation_dataset(ds.modulation, ds.seed))?;
    let tc = cfg.resolved_train(ds.modulation);
    let epochs = tc.epochs;
    let outcome = train_with_progress::<f32>(&ds, &val, &tc, |r| {
        let _ = writeln!(
            out,
            "epoch {}/{epochs} train_total={:?} train_mse={:?} val_mse={:?} ({:.1}s)",
            r.epoch, r.train_total, r.train_mse, r.val_mse, r.seconds
        );
    })?;
    ensure_parent(path)?;
    save_model(&outcome.model, &outcome.optimizer, path).map_err(at_path(path))?;
    let history = parent_dir(path).join(HISTORY_CSV);
    write_history(&outcome.history, &history).map_err(at_path(&history))?;
    let (conv, dense) = outcome.model.param_count();
    let last = outcome.history.last().map(|r| r.val_mse).unwrap_or(f64::NAN);
    let _ = writeln!(out, "conv={conv} dense={dense}");
    let _ = writeln!(out, "final_val_mse={last:?}");
    let _ = writeln!(out, "wrote {} and {}", path.display(), history.display());
    Ok(())
}

pub fn eval(
    cfg: &RunConfig,
    expect: Option<Modulation>,
    model_path: &Path,
    data: &Path,
    dir: &Path,
    out: &mut dyn Write,
) -> CliResult<Metrics> {
    require_input(model_path, "checkpoint")?;
    let (model, _) = load_model::<f32>(model_path).map_err(at_path(model_path))?;
    if model.arch != cfg.train.arch {
        return Err(CliError::Invalid(format!(
            "checkpoint architecture {:?} differs from the configured {:?}",
            model.arch, cfg.train.arch
        )));
    }
    let ds = load_dataset(data, expect)?;
    let metrics = evaluate(&model, &ds, &cfg.eval_config()).map_err(|e| match e {
        radio_ae::Error::Param(msg) => CliError::Invalid(msg),
        e => e.into(),
    })?;
    let rows = metric_rows(&metrics);
    for (k, v) in &rows {
        let _ = writeln!(out, "{k}={v}");
    }
    std::fs::create_dir_all(dir).map_err(io_at(dir))?;
    let path = dir.join(METRICS_CSV);
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
    w.write_record(rows.iter().map(|(k, _)| *k))
        .map_err(|e| csv_err(&path, e))?;
    w.write_record(rows.iter().map(|(_, v)| v.as_str()))
        .map_err(|e| csv_err(&path, e))?;
    w.flush().map_err(io_at(&path))?;
    Ok(metrics)
}

/// Name/value pairs in print and CSV order.
pub fn metric_rows(m: &Metrics) -> Vec<(&'static str, String)> {
    vec![
        ("mean_mse", format!("{:?}", m.mean_mse)),
        ("noisy_mse", format!("{:?}", m.noisy_mse)),
        ("saturation_fraction", format!("{:?}", m.saturation_fraction)),
        ("n_eff_bits", m.n_eff_bits.to_string()),
        ("compression_ratio", format!("{:?}", m.compression_ratio)),
    ]
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

pub fn export(
    cfg: &RunConfig,
    expect: Option<Modulation>,
    model_path: &Path,
    data: &Path,
    dir: &Path,
    out: &mut dyn Write,
) -> CliResult<Vec<PathBuf>> {
    require_input(model_path, "checkpoint")?;
    let (model, _) = load_model::<f32>(model_path).map_err(at_path(model_path))?;
    let ds = load_dataset(data, expect)?;
    std::fs::create_dir_all(dir).map_err(io_at(dir))?;
    let mut files = export_weights(&model, dir).map_err(at_path(dir))?;
    let rec = dir.join(RECONSTRUCTIONS_CSV);
    files.push(
        reconstruct_examples(
            &model,
            &ds,
            cfg.export_examples,
            cfg.train.noise_sigma,
            cfg.export_seed(),
            &rec,
        )
        .map_err(at_path(&rec))?,
    );
    let names: Vec<String> = files
        .iter()
        .map(|p| {
            p.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default()
        })
        .collect();
    let manifest = dir.join(MANIFEST);
    let mut text = names.join("\n");
    text.push('\n');
    std::fs::write(&manifest, text).map_err(io_at(&manifest))?;
    for n in &names {
        let _ = writeln!(out, "wrote {}", dir.join(n).display());
    }
    Ok(files)
}
