//! Input parsing and output files.
//!
//! Inputs are comma-separated UTF-8 with a header row and `.` decimals.
//! Parse errors name the file, line and column.

use serde::Serialize;
use serde_json::Value;
use skewjeff_core::binreg::GlmData;
use skewjeff_core::{Dataset, Interval, PairedSample};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: line {line}, column {column} ({name}): {msg}")]
    Parse {
        path: String,
        line: u64,
        column: usize,
        name: String,
        msg: String,
    },

    #[error("{path}: {msg}")]
    Input { path: String, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Model(#[from] skewjeff_core::Error),
}

impl CliError {
    /// 2 for usage and input errors, 1 for numerical or model failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } | CliError::Input { .. } => 2,
            CliError::Io { .. } => 1,
            CliError::Model(e) => match e {
                skewjeff_core::Error::Domain(_) => 2,
                _ => 1,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// A parsed CSV table: header names and data records with their line numbers.
pub struct Table {
    path: String,
    pub headers: Vec<String>,
    pub records: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    pub fn read(path: &Path) -> CliResult<Table> {
        let shown = path.display().to_string();
        let file = fs::File::open(path).map_err(io_err(path))?;
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(file);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| csv_error(&shown, e))?
            .iter()
            .map(|h| h.to_ascii_lowercase())
            .collect();
        if headers.iter().all(|h| h.is_empty()) {
            return Err(CliError::Input {
                path: shown,
                msg: "missing header row".into(),
            });
        }
        let mut records = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_error(&shown, e))?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            records.push((line, rec));
        }
        if records.is_empty() {
            return Err(CliError::Input {
                path: shown,
                msg: "no data rows".into(),
            });
        }
        Ok(Table {
            path: shown,
            headers,
            records,
        })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn require(&self, name: &str) -> CliResult<usize> {
        self.column(name).ok_or_else(|| CliError::Input {
            path: self.path.clone(),
            msg: format!(
                "missing column '{name}' (found: {})",
                self.headers.join(", ")
            ),
        })
    }

    fn error(&self, line: u64, col: usize, msg: impl Into<String>) -> CliError {
        CliError::Parse {
            path: self.path.clone(),
            line,
            column: col + 1,
            name: self.headers[col].clone(),
            msg: msg.into(),
        }
    }

    fn cell<'a>(&self, rec: &'a csv::StringRecord, col: usize) -> &'a str {
        rec.get(col).unwrap_or("")
    }

    /// Reals, allowing `inf` and `-inf` when `infinite` is set.
    pub fn real(
        &self,
        line: u64,
        rec: &csv::StringRecord,
        col: usize,
        infinite: bool,
    ) -> CliResult<f64> {
        let s = self.cell(rec, col);
        if s.is_empty() {
            return Err(self.error(line, col, "empty cell"));
        }
        let v: f64 = s
            .parse()
            .map_err(|_| self.error(line, col, format!("'{s}' is not a number")))?;
        if v.is_nan() || (v.is_infinite() && !infinite) {
            return Err(self.error(line, col, format!("'{s}' is not a finite number")));
        }
        Ok(v)
    }

    pub fn count(&self, line: u64, rec: &csv::StringRecord, col: usize) -> CliResult<u64> {
        let s = self.cell(rec, col);
        s.parse()
            .map_err(|_| self.error(line, col, format!("'{s}' is not a non-negative integer")))
    }
}

fn csv_error(path: &str, e: csv::Error) -> CliError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => CliError::Parse {
            path: path.into(),
            line,
            column: (*len as usize).min(*expected_len as usize) + 1,
            name: String::new(),
            msg: format!("expected {expected_len} fields, found {len}"),
        },
        csv::ErrorKind::Utf8 { err, .. } => CliError::Parse {
            path: path.into(),
            line,
            column: err.field() + 1,
            name: String::new(),
            msg: "invalid UTF-8".into(),
        },
        _ => CliError::Input {
            path: path.into(),
            msg: e.to_string(),
        },
    }
}

/// A `y` column of exact values, or `lo`/`hi` columns where `lo == hi`
/// marks an exact value and infinite ends mark one-sided censoring.
pub fn read_dataset(path: &Path) -> CliResult<Dataset> {
    let t = Table::read(path)?;
    let mut exact = Vec::new();
    let mut censored = Vec::new();
    match (t.column("lo"), t.column("hi"), t.column("y")) {
        (Some(lo), Some(hi), _) => {
            for (line, rec) in &t.records {
                let a = t.real(*line, rec, lo, true)?;
                let b = t.real(*line, rec, hi, true)?;
                if a == b {
                    if !a.is_finite() {
                        return Err(t.error(*line, lo, "an exact value must be finite"));
                    }
                    exact.push(a);
                } else {
                    censored
                        .push(Interval::new(a, b).map_err(|e| t.error(*line, hi, e.to_string()))?);
                }
            }
        }
        (_, _, Some(y)) => {
            for (line, rec) in &t.records {
                exact.push(t.real(*line, rec, y, false)?);
            }
        }
        _ => {
            return Err(CliError::Input {
                path: t.path.clone(),
                msg: "expected a 'y' column or 'lo' and 'hi' columns".into(),
            })
        }
    }
    Ok(Dataset::new(exact, censored)?)
}

/// `x` and `y` columns. Empty cells are rejected: censored pairs have no
/// usable difference.
pub fn read_pairs(path: &Path) -> CliResult<PairedSample> {
    let t = Table::read(path)?;
    let (cx, cy) = (t.require("x")?, t.require("y")?);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (line, rec) in &t.records {
        for c in [cx, cy] {
            if t.cell(rec, c).is_empty() {
                return Err(t.error(*line, c, "missing value; censored pairs are not supported"));
            }
        }
        x.push(t.real(*line, rec, cx, false)?);
        y.push(t.real(*line, rec, cy, false)?);
    }
    Ok(PairedSample::new(x, y)?)
}

/// Covariate columns plus `n` (trials) and `y` (successes). An intercept
/// is added.
pub fn read_glm(path: &Path) -> CliResult<GlmData> {
    let t = Table::read(path)?;
    let (cn, cy) = (t.require("n")?, t.require("y")?);
    let covs: Vec<usize> = (0..t.headers.len())
        .filter(|&c| c != cn && c != cy)
        .collect();
    if covs.is_empty() {
        return Err(CliError::Input {
            path: t.path.clone(),
            msg: "no covariate columns".into(),
        });
    }
    let mut rows = Vec::new();
    let mut n = Vec::new();
    let mut y = Vec::new();
    for (line, rec) in &t.records {
        let row = covs
            .iter()
            .map(|&c| t.real(*line, rec, c, false))
            .collect::<CliResult<Vec<f64>>>()?;
        let (ni, yi) = (t.count(*line, rec, cn)?, t.count(*line, rec, cy)?);
        if yi > ni {
            return Err(t.error(*line, cy, format!("{yi} successes out of {ni} trials")));
        }
        rows.push(row);
        n.push(ni);
        y.push(yi);
    }
    let names = covs.iter().map(|&c| t.headers[c].clone()).collect();
    Ok(GlmData::from_covariates(names, rows, n, y)?)
}

/// Output files for one run. Every file name is checked before any work is
/// done so an existing artifact is never half-replaced.
pub struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    pub fn prepare(dir: Option<&Path>, force: bool, files: &[&str]) -> CliResult<Output> {
        let Some(dir) = dir else {
            return Ok(Output { dir: None });
        };
        if !force {
            for f in files {
                let p = dir.join(f);
                if p.exists() {
                    return Err(CliError::Usage(format!(
                        "{} exists; pass --force to overwrite",
                        p.display()
                    )));
                }
            }
        }
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Output {
            dir: Some(dir.to_path_buf()),
        })
    }

    pub fn write_json(&self, name: &str, value: &Value) -> CliResult<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let path = dir.join(name);
        let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
        text.push('\n');
        fs::write(&path, text).map_err(io_err(&path))
    }

    /// A header row, then one record per row. Numbers use the shortest
    /// representation that round-trips.
    pub fn write_csv<R: AsRef<[String]>>(
        &self,
        name: &str,
        header: &[&str],
        rows: &[R],
    ) -> CliResult<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let path = dir.join(name);
        let file = fs::File::create(&path).map_err(io_err(&path))?;
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
        let to_io = |e: csv::Error| CliError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e.to_string()),
        };
        w.write_record(header).map_err(to_io)?;
        for r in rows {
            w.write_record(r.as_ref()).map_err(to_io)?;
        }
        w.flush().map_err(io_err(&path))
    }
}

/// The schema-versioned envelope shared by every JSON artifact.
pub fn envelope<C: Serialize, R: Serialize>(command: &str, config: &C, result: &R) -> Value {
    serde_json::json!({
        "schema": SCHEMA,
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "result": result,
    })
}

pub fn print_json(value: &Value) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).expect("JSON values serialize");
    writeln!(out).map_err(|source| CliError::Io {
        path: "<stdout>".into(),
        source,
    })
}

pub fn num(v: f64) -> String {
    format!("{v}")
}
