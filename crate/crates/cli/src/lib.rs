//! Command-line harness for the `qthermo-core` experiments: configuration
//! resolution, experiment drivers and deterministic table output.

// `!(x > 0.0)` also rejects NaN, which is the point of those checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod run;
pub mod table;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use config::{OutputFormat, RunConfig};
use error::CliError;
use run::RunOutput;
use table::ResultTable;

/// Where and how to write the tables of one run.
#[derive(Debug, Clone)]
pub struct Emit {
    /// File for single-table runs, directory for multi-table runs; `None` writes
    /// a single table to stdout and multiple tables under `./<experiment>/`.
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    /// Seconds spent in the run, recorded in metadata when present.
    pub wall_clock: Option<f64>,
}

fn render(table: &ResultTable, format: OutputFormat) -> Vec<u8> {
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => table.write_csv(&mut buf),
        OutputFormat::Text => table.write_text(&mut buf),
    }
    .expect("writing to memory cannot fail");
    buf
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Attaches metadata to every table and writes it out. Returns the files written.
pub fn emit(cfg: &RunConfig, mut output: RunOutput, emit: &Emit) -> Result<Vec<PathBuf>, CliError> {
    let multiple = output.tables.len() > 1 || cfg.experiment == config::Experiment::Figure2;
    let mut written = Vec::new();
    let extension = match emit.format {
        OutputFormat::Csv => "csv",
        OutputFormat::Text => "txt",
    };
    let dir = multiple.then(|| {
        emit.out
            .clone()
            .unwrap_or_else(|| PathBuf::from(cfg.experiment.name()))
    });
    if let Some(dir) = &dir {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    for (name, table) in &mut output.tables {
        let mut result = Table::new();
        result.insert(
            "version".into(),
            Value::String(env!("CARGO_PKG_VERSION").into()),
        );
        result.insert("warnings".into(), Value::Integer(output.warnings as i64));
        if multiple {
            result.insert("table".into(), Value::String(name.clone()));
        }
        if let Some(s) = emit.wall_clock {
            result.insert("wall_clock_s".into(), Value::Float(s));
        }
        table.metadata = cfg.to_toml(&result);
        let bytes = render(table, emit.format);
        match (&dir, &emit.out) {
            (Some(dir), _) => {
                let path = dir.join(format!("{name}.{extension}"));
                write_file(&path, &bytes)?;
                written.push(path);
            }
            (None, Some(path)) => {
                write_file(path, &bytes)?;
                written.push(path.clone());
            }
            (None, None) => std::io::stdout()
                .write_all(&bytes)
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })?,
        }
    }
    Ok(written)
}
