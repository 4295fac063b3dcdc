//! Run records and the delimited numeric text files of a run directory.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::scenario::Scenario;

/// Format tag of `record.toml`.
pub const RUN_FORMAT: &str = "volpres-run/1";
/// Format tag of `sweep.toml`.
pub const SWEEP_FORMAT: &str = "volpres-sweep/1";

pub const RECORD_FILE: &str = "record.toml";
pub const SWEEP_FILE: &str = "sweep.toml";
pub const INVARIANTS_FILE: &str = "invariants.csv";
pub const STUDY_FILE: &str = "study.csv";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const INDEX_FILE: &str = "index.csv";

/// Full-precision, locale-independent rendering: the shortest decimal that
/// parses back to the same `f64`, in scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// Rejected configuration or initial data (exit code 2).
    Validation,
    /// Solver or integrator failure (exit code 3).
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Failure {
    pub kind: FailureKind,
    pub message: String,
}

impl Failure {
    pub fn from_core(e: &volpres_core::Error) -> Self {
        use volpres_core::Error as E;
        let kind = match e {
            E::InvalidGrid(_)
            | E::ShapeMismatch { .. }
            | E::InvalidConfig(_)
            | E::InvalidInitialData { .. }
            | E::Unsupported(_)
            | E::MinimalImmersion
            | E::RankDeficient { .. } => FailureKind::Validation,
            _ => FailureKind::Numerical,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }

    /// A failure after the first step is numerical whatever its cause.
    pub fn during_run(e: &volpres_core::Error) -> Self {
        Self {
            kind: FailureKind::Numerical,
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            FailureKind::Validation => 2,
            FailureKind::Numerical => 3,
        }
    }
}

/// Final invariant summary. Fields that do not apply to a case are omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    /// Completed time steps.
    pub steps: usize,
    pub t_final: f64,
    pub snapshots: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_initial: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_final: Option<f64>,
    /// `max_t |E(t) − E(0)|/|E(0)|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_drift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rho_deviation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_constraint_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enstrophy_drift: Option<f64>,
    /// `‖ω(T) − ω(0)‖∞`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_change: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_idempotency_defect: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_orthogonality_defect: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub format: String,
    /// The only field that differs between reruns of the same scenario.
    pub wall_time_s: f64,
    pub summary: Summary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    pub scenario: Scenario,
}

impl RunRecord {
    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, Failure::exit_code)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{0}: no run record found")]
    MissingRun(PathBuf),
}

pub fn io_err(path: &Path) -> impl FnOnce(io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(io_err(path))
}

pub fn create_dir(path: &Path) -> Result<(), IoError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

/// Writes a CSV file with a header row; numeric cells go through [`num`].
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), IoError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let csv_err = |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// A CSV file read back as a header and rows of raw cells.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self, IoError> {
        let csv_err = |source| IoError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let header = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(csv_err)?.iter().map(str::to_string).collect());
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric column `name`; errors name the file.
    pub fn floats(&self, name: &str, path: &Path) -> Result<Vec<f64>, IoError> {
        let fmt = |message: String| IoError::Format {
            path: path.to_path_buf(),
            message,
        };
        let c = self.column(name).ok_or_else(|| fmt(format!("missing column `{name}`")))?;
        self.rows
            .iter()
            .map(|r| r[c].parse::<f64>().map_err(|e| fmt(format!("column `{name}`: {e}"))))
            .collect()
    }
}

pub fn read_record(dir: &Path) -> Result<RunRecord, IoError> {
    let path = dir.join(RECORD_FILE);
    if !path.is_file() {
        return Err(IoError::MissingRun(dir.to_path_buf()));
    }
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    toml::from_str(&text).map_err(|e| IoError::Format {
        path,
        message: e.message().to_string(),
    })
}

pub fn snapshot_name(i: usize) -> String {
    format!("snap_{i:05}.csv")
}
