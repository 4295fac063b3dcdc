//! Time-step sweeps: one run per `dt`, fanned out over a worker pool, plus
//! a convergence table with the measured order.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::record::{io_err, num, write_text, IoError, RunRecord, SWEEP_FILE, SWEEP_FORMAT};
use crate::run::run_capture;
use crate::scenario::{InitialSpec, Scenario};

pub const CONVERGENCE_FILE: &str = "convergence.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEntry {
    pub dt: f64,
    pub dir: String,
    pub exit_code: i32,
    /// Sup-norm error of the final state; absent for the reference run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRecord {
    pub format: String,
    pub wall_time_s: f64,
    /// `exact` for closed-form oracles, otherwise `finest` (smallest dt).
    pub reference: String,
    /// Least-squares slope of `log error` against `log dt`.
    pub slope: f64,
    pub runs: Vec<SweepEntry>,
    pub scenario: Scenario,
}

impl SweepRecord {
    pub fn exit_code(&self) -> i32 {
        self.runs.iter().map(|r| r.exit_code).max().unwrap_or(0)
    }
}

/// Least-squares slope of `ln y` against `ln x`; NaN with fewer than two
/// usable points.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    num / den
}

/// Exact final positions of the rigid rotation, in snapshot layout.
fn rotation_oracle(s: &Scenario, t: f64) -> Option<Vec<f64>> {
    let InitialSpec::CircleRotation { radius, omega } = s.initial() else {
        return None;
    };
    let n = s.grid.n[0];
    let angle = |i: usize| i as f64 * std::f64::consts::TAU / n as f64 + omega * t;
    let x = (0..n).map(|i| radius * angle(i).cos());
    let y = (0..n).map(|i| radius * angle(i).sin());
    Some(x.chain(y).collect())
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn sweep(s: &Scenario, out: &Path, threads: usize) -> Result<SweepRecord, IoError> {
    let start = Instant::now();
    let dts = s.sweep.as_ref().map(|w| w.dt.clone()).unwrap_or_default();
    let variants: Vec<(Scenario, PathBuf)> = dts
        .iter()
        .enumerate()
        .map(|(i, &dt)| {
            let mut v = s.clone();
            v.sweep = None;
            v.name = format!("{}-dt{i:02}", s.name);
            v.integrator.dt = dt;
            (v, out.join(format!("run_{i:02}")))
        })
        .collect();
    fs::create_dir_all(out).map_err(io_err(out))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool");
    let results: Vec<Result<(RunRecord, Option<Vec<f64>>), IoError>> =
        pool.install(|| variants.par_iter().map(|(v, dir)| run_capture(v, dir)).collect());
    let mut runs = Vec::new();
    let mut finals = Vec::new();
    for ((v, dir), res) in variants.iter().zip(results) {
        let (record, last) = res?;
        runs.push(SweepEntry {
            dt: v.integrator.dt,
            dir: dir.file_name().unwrap().to_string_lossy().into_owned(),
            exit_code: record.exit_code(),
            error: None,
        });
        finals.push(if record.failure.is_none() { last } else { None });
    }
    let finest = (0..runs.len()).min_by(|&a, &b| runs[a].dt.total_cmp(&runs[b].dt));
    let (reference, oracle, skip) = match rotation_oracle(s, s.integrator.t_end) {
        Some(exact) => ("exact", Some(exact), None),
        None => ("finest", finest.and_then(|i| finals[i].clone()), finest),
    };
    if let Some(oracle) = &oracle {
        for (i, (entry, last)) in runs.iter_mut().zip(&finals).enumerate() {
            if Some(i) != skip {
                entry.error = last.as_ref().map(|state| max_diff(state, oracle));
            }
        }
    }
    let points: Vec<(f64, f64)> = runs.iter().filter_map(|r| r.error.map(|e| (r.dt, e))).collect();
    let slope = loglog_slope(&points);
    write_convergence(&out.join(CONVERGENCE_FILE), slope, &points)?;
    let record = SweepRecord {
        format: SWEEP_FORMAT.to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        reference: reference.to_string(),
        slope,
        runs,
        scenario: s.clone(),
    };
    let text = toml::to_string(&record).expect("sweep records always serialise");
    write_text(&out.join(SWEEP_FILE), &text)?;
    Ok(record)
}

fn write_convergence(path: &Path, slope: f64, points: &[(f64, f64)]) -> Result<(), IoError> {
    let mut text = format!("# slope = {}\ndt,error\n", num(slope));
    for (dt, e) in points {
        let _ = writeln!(text, "{},{}", num(*dt), num(*e));
    }
    write_text(path, &text)
}

/// Reads `convergence.csv` back as `(slope, [(dt, error)])`.
pub fn read_convergence(path: &Path) -> Result<(f64, Vec<(f64, f64)>), IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let bad = |message: &str| IoError::Format {
        path: path.to_path_buf(),
        message: message.to_string(),
    };
    let mut lines = text.lines();
    let slope = lines
        .next()
        .and_then(|l| l.strip_prefix("# slope = "))
        .and_then(|v| v.trim().parse::<f64>().ok())
        .ok_or_else(|| bad("missing slope comment"))?;
    if lines.next() != Some("dt,error") {
        return Err(bad("missing header"));
    }
    let rows = lines
        .map(|l| {
            let (a, b) = l.split_once(',').ok_or_else(|| bad("malformed row"))?;
            Ok((a.parse().map_err(|_| bad("bad dt"))?, b.parse().map_err(|_| bad("bad error"))?))
        })
        .collect::<Result<_, IoError>>()?;
    Ok((slope, rows))
}
