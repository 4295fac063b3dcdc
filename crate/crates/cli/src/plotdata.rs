//! Plot-ready text files derived from a run or sweep directory.
//!
//! Everything goes to `<dir>/plot/` as whitespace-separated columns with `#`
//! comment headers, which gnuplot, numpy.loadtxt and friends read directly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::record::{
    create_dir, io_err, num, read_record, write_text, IoError, Table, INDEX_FILE, INVARIANTS_FILE, SNAPSHOT_DIR,
    STUDY_FILE, SWEEP_FILE,
};
use crate::scenario::Case;
use crate::sweep::{read_convergence, CONVERGENCE_FILE};

pub const PLOT_DIR: &str = "plot";

fn fmt_err(path: &Path, message: impl Into<String>) -> IoError {
    IoError::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Writes the plot files for `dir` and returns their paths.
pub fn emit_plotdata(dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    let plot = dir.join(PLOT_DIR);
    if dir.join(SWEEP_FILE).is_file() {
        clear(dir)?;
        create_dir(&plot)?;
        return Ok(vec![convergence(dir, &plot)?]);
    }
    let record = read_record(dir)?;
    clear(dir)?;
    create_dir(&plot)?;
    let mut files = Vec::new();
    match record.scenario.case {
        Case::WhipCurve => files.extend(curves(dir, &plot)?),
        Case::SurfaceL2 => files.extend(surfaces(dir, &plot)?),
        Case::EulerTorus => files.extend(vorticity(dir, &plot, record.scenario.grid.n[0])?),
        Case::ProjectionStudy => files.extend(study(dir, &plot)?),
    }
    if dir.join(INVARIANTS_FILE).is_file() {
        files.extend(time_series(dir, &plot)?);
    }
    Ok(files)
}

fn snapshots(dir: &Path) -> Result<Vec<(usize, f64, PathBuf)>, IoError> {
    let snap_dir = dir.join(SNAPSHOT_DIR);
    let index_path = snap_dir.join(INDEX_FILE);
    let index = Table::read(&index_path)?;
    let times = index.floats("t", &index_path)?;
    let file = index.column("file").ok_or_else(|| fmt_err(&index_path, "missing column `file`"))?;
    Ok(index
        .rows
        .iter()
        .zip(times)
        .enumerate()
        .map(|(i, (row, t))| (i, t, snap_dir.join(&row[file])))
        .collect())
}

/// Per-snapshot `x y` files, closed by repeating the first point.
fn curves(dir: &Path, plot: &Path) -> Result<Vec<PathBuf>, IoError> {
    let mut out = Vec::new();
    for (i, t, path) in snapshots(dir)? {
        let table = Table::read(&path)?;
        let x = table.floats("x", &path)?;
        let y = table.floats("y", &path)?;
        let mut text = format!("# t = {}\n# x y\n", num(t));
        for k in (0..x.len()).chain((!x.is_empty()).then_some(0)) {
            let _ = writeln!(text, "{} {}", num(x[k]), num(y[k]));
        }
        let target = plot.join(format!("curve_{i:05}.dat"));
        write_text(&target, &text)?;
        out.push(target);
    }
    Ok(out)
}

/// Renders `values` (first index fastest) as an `n1 × n0` matrix: one row
/// per second-direction index.
fn matrix(values: &[f64], n0: usize, header: &str) -> String {
    let mut text = String::from(header);
    for row in values.chunks(n0) {
        let line: Vec<String> = row.iter().map(|&v| num(v)).collect();
        text.push_str(&line.join(" "));
        text.push('\n');
    }
    text
}

fn grid_width(table: &Table, path: &Path, column: &str) -> Result<usize, IoError> {
    let coord = table.floats(column, path)?;
    // the first direction varies fastest; its size is the run of the first row
    let n0 = coord.iter().skip(1).position(|&c| c == coord[0]).map_or(coord.len(), |p| p + 1);
    if n0 == 0 || coord.len() % n0 != 0 {
        return Err(fmt_err(path, "snapshot is not a tensor grid"));
    }
    Ok(n0)
}

fn surfaces(dir: &Path, plot: &Path) -> Result<Vec<PathBuf>, IoError> {
    let mut out = Vec::new();
    for (i, t, path) in snapshots(dir)? {
        let table = Table::read(&path)?;
        let n0 = grid_width(&table, &path, "u")?;
        for c in ["x", "y", "z"] {
            let vals = table.floats(c, &path)?;
            let target = plot.join(format!("surface_{i:05}_{c}.dat"));
            write_text(&target, &matrix(&vals, n0, &format!("# t = {}\n# {c}[v][u]\n", num(t))))?;
            out.push(target);
        }
    }
    Ok(out)
}

fn vorticity(dir: &Path, plot: &Path, n0: usize) -> Result<Vec<PathBuf>, IoError> {
    let mut out = Vec::new();
    for (i, t, path) in snapshots(dir)? {
        let table = Table::read(&path)?;
        let w = table.floats("omega", &path)?;
        if w.len() % n0 != 0 {
            return Err(fmt_err(&path, "vorticity does not fill the grid"));
        }
        let target = plot.join(format!("vorticity_{i:05}.dat"));
        write_text(&target, &matrix(&w, n0, &format!("# t = {}\n# omega[y][x]\n", num(t))))?;
        out.push(target);
    }
    Ok(out)
}

/// One `t value` file per invariant column.
fn time_series(dir: &Path, plot: &Path) -> Result<Vec<PathBuf>, IoError> {
    let path = dir.join(INVARIANTS_FILE);
    let table = Table::read(&path)?;
    let t = table.floats("t", &path)?;
    let mut out = Vec::new();
    for name in table.header.iter().skip(1) {
        let v = table.floats(name, &path)?;
        let mut text = format!("# t {name}\n");
        for (a, b) in t.iter().zip(&v) {
            let _ = writeln!(text, "{} {}", num(*a), num(*b));
        }
        let target = plot.join(format!("{name}.dat"));
        write_text(&target, &text)?;
        out.push(target);
    }
    Ok(out)
}

/// One `n idempotency orthogonality` file per metric order.
fn study(dir: &Path, plot: &Path) -> Result<Vec<PathBuf>, IoError> {
    let path = dir.join(STUDY_FILE);
    let table = Table::read(&path)?;
    let n = table.floats("n", &path)?;
    let l = table.floats("l", &path)?;
    let idem = table.floats("idempotency", &path)?;
    let orth = table.floats("orthogonality", &path)?;
    let mut orders: Vec<u32> = l.iter().map(|&v| v as u32).collect();
    orders.sort_unstable();
    orders.dedup();
    let mut out = Vec::new();
    for order in orders {
        let mut text = format!("# l = {order}\n# n idempotency orthogonality\n");
        for k in (0..n.len()).filter(|&k| l[k] as u32 == order) {
            let _ = writeln!(text, "{} {} {}", n[k], num(idem[k]), num(orth[k]));
        }
        let target = plot.join(format!("study_l{order}.dat"));
        write_text(&target, &text)?;
        out.push(target);
    }
    Ok(out)
}

fn convergence(dir: &Path, plot: &Path) -> Result<PathBuf, IoError> {
    let (slope, rows) = read_convergence(&dir.join(CONVERGENCE_FILE))?;
    let mut text = format!("# measured slope = {}\n# dt error\n", num(slope));
    for (dt, err) in rows {
        let _ = writeln!(text, "{} {}", num(dt), num(err));
    }
    let target = plot.join("convergence.dat");
    write_text(&target, &text)?;
    Ok(target)
}

/// Removes a previous `plot/` directory so reruns do not leave stale files.
fn clear(dir: &Path) -> Result<(), IoError> {
    let plot = dir.join(PLOT_DIR);
    if plot.is_dir() {
        fs::remove_dir_all(&plot).map_err(io_err(&plot))?;
    }
    Ok(())
}
