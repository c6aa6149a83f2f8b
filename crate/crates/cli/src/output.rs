//! Report files.
//!
//! Every CSV file starts with `#`-prefixed provenance lines followed by a
//! header row naming every column. NDJSON files start with one `meta`
//! object and hold one snapshot per line. Numbers are written without
//! locale: shortest round-trip decimal, switching to exponent notation
//! outside `[1e-4, 1e15)`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use lvspde::analysis::Verdict;
use serde::Serialize;

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    /// `None` under `--reproducible`.
    pub runtime: Option<Duration>,
}

impl Provenance {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("version", format!("lvspde {VERSION}")),
            ("command", self.command.clone()),
            ("config_sha256", self.config_hash.clone()),
            ("seed", self.seed.map_or("-".into(), |s| s.to_string())),
            (
                "runtime_s",
                self.runtime
                    .map_or("-".into(), |d| format!("{:.3}", d.as_secs_f64())),
            ),
        ]
    }

    fn meta(&self) -> String {
        #[derive(Serialize)]
        struct Meta<'a> {
            version: &'a str,
            command: &'a str,
            config_sha256: &'a str,
            seed: Option<u64>,
            runtime_s: Option<f64>,
        }
        #[derive(Serialize)]
        struct Line<'a> {
            meta: Meta<'a>,
        }
        serde_json::to_string(&Line {
            meta: Meta {
                version: VERSION,
                command: &self.command,
                config_sha256: &self.config_hash,
                seed: self.seed,
                runtime_s: self.runtime.map(|d| (d.as_secs_f64() * 1e3).round() / 1e3),
            },
        })
        .expect("metadata serializes")
    }
}

/// Locale-free number formatting.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub file: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &str, columns: &[&str]) -> Self {
        Self {
            file: file.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Everything a command produces, written once the run is complete.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub seed: Option<u64>,
    pub tables: Vec<Table>,
    /// File name and serialized lines of an NDJSON stream.
    pub snapshots: Option<(String, Vec<String>)>,
    pub verdicts: Vec<Verdict>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict_table(&self) -> Table {
        let mut t = Table::new(
            "verdicts.csv",
            &[
                "check_name",
                "theorem_ref",
                "pass",
                "statistic",
                "threshold",
            ],
        );
        for v in &self.verdicts {
            t.push(vec![
                v.check.clone(),
                v.property.clone(),
                v.pass.to_string(),
                num(v.statistic),
                num(v.threshold),
            ]);
        }
        t
    }

    /// Writes every table, the snapshot stream and `verdicts.csv` into `dir`.
    pub fn write(&self, dir: &Path, prov: &Provenance) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut written = Vec::new();
        for t in self
            .tables
            .iter()
            .chain(std::iter::once(&self.verdict_table()))
        {
            let path = dir.join(&t.file);
            write_csv(&path, t, prov)?;
            written.push(path);
        }
        if let Some((file, lines)) = &self.snapshots {
            let path = dir.join(file);
            write_ndjson(&path, lines, prov)?;
            written.push(path);
        }
        Ok(written)
    }
}

fn write_csv(path: &Path, table: &Table, prov: &Provenance) -> Result<(), CliError> {
    let err = |e: std::io::Error| CliError::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(err)?);
    for (k, v) in prov.pairs() {
        writeln!(out, "# {k} {v}").map_err(err)?;
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let csv_err = |e: csv::Error| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(err)
}

fn write_ndjson(path: &Path, lines: &[String], prov: &Provenance) -> Result<(), CliError> {
    let err = |e: std::io::Error| CliError::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(err)?);
    writeln!(out, "{}", prov.meta()).map_err(err)?;
    for l in lines {
        writeln!(out, "{l}").map_err(err)?;
    }
    out.flush().map_err(err)
}
