//! The `coldid` command-line pipeline: synthetic data, preprocessing,
//! feature extraction, plots, training and prediction.

pub mod args;
pub mod commands;
pub mod manifest;

use std::io::Write;

use anyhow::Result;

use args::{Cli, Command};
use commands::*;

/// Runs one command and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn partial(failures: usize, total: usize, what: &str) -> Result<u8> {
    if failures > 0 && failures == total {
        return Err(no_rows(what));
    }
    Ok(u8::from(failures > 0))
}

fn dispatch(cli: Cli) -> Result<u8> {
    let cfg = cli.config.resolve()?;
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Preprocess { manifest, out_dir } => {
            let r = cmd_preprocess(&manifest, &out_dir, &cfg)?;
            let crops: usize = r.images.iter().map(|i| i.lines.len()).sum();
            writeln!(out, "{} image(s), {crops} line crop(s), {} failure(s)", r.images.len(), r.failures.len())?;
            partial(r.failures.len(), r.images.len() + r.failures.len(), "image")
        }
        Command::Extract { manifest, out: path, dump_dir } => {
            let r = cmd_extract(&manifest, &path, dump_dir.as_deref(), &cfg)?;
            writeln!(out, "{} row(s), {} warning(s), {} failure(s)", r.rows, r.warnings.len(), r.failures.len())?;
            partial(r.failures.len(), r.rows + r.failures.len(), "image")
        }
        Command::Plot { input, out: path } => {
            let r = cmd_plot(&input, &path, &cfg)?;
            for p in &r.written {
                writeln!(out, "{}", p.display())?;
            }
            Ok(u8::from(!r.failures.is_empty()))
        }
        Command::Train {
            features,
            model,
            holdout,
            search,
            report,
        } => {
            let (r, _) = cmd_train(&features, &model, holdout, search, &cfg)?;
            write!(out, "{}", r.text)?;
            if let Some(path) = report {
                cold_core::io::write_atomic(&path, r.text.as_bytes())?;
            }
            Ok(0)
        }
        Command::Predict { model, inputs } => {
            let (rows, failures) = cmd_predict(&model, &inputs, &cfg)?;
            for r in &rows {
                writeln!(out, "{}", r.to_line())?;
            }
            partial(failures.len(), inputs.len(), "input")
        }
        Command::Synth {
            out_dir,
            per_class,
            writers,
            pages,
            ruled,
        } => {
            let r = cmd_synth(&out_dir, per_class, writers, pages, ruled, cfg.seed)?;
            writeln!(out, "{} line image(s), {} page(s) in {}", r.lines, r.pages, out_dir.display())?;
            Ok(0)
        }
    }
}
