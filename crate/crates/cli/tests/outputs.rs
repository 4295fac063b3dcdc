use std::fs;

use volpres_cli::plotdata::PLOT_DIR;
use volpres_cli::record::IoError;
use volpres_cli::sweep::{loglog_slope, read_convergence, CONVERGENCE_FILE};
use volpres_cli::{emit_plotdata, parse_scenario, run, sweep};

#[test]
fn plotdata_for_a_curve_run() {
    let dir = tempfile::tempdir().unwrap();
    let s = parse_scenario(
        "name = \"c\"\ncase = \"whip_curve\"\n[grid]\nn = [32]\n[integrator]\ndt = 1e-2\nt_end = 0.05\noutput_stride = 5\n",
    )
    .unwrap();
    run(&s, dir.path()).unwrap();
    let files = emit_plotdata(dir.path()).unwrap();
    let plot = dir.path().join(PLOT_DIR);
    assert!(files.contains(&plot.join("curve_00000.dat")));
    assert!(files.contains(&plot.join("energy.dat")));
    let curve = fs::read_to_string(plot.join("curve_00001.dat")).unwrap();
    let rows: Vec<Vec<f64>> = curve
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect();
    // closed loop: 32 nodes plus the first one repeated
    assert_eq!(rows.len(), 33);
    assert_eq!(rows[0], rows[32]);
    // rerunning replaces the directory contents
    assert_eq!(emit_plotdata(dir.path()).unwrap(), files);
}

#[test]
fn plotdata_without_a_run_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(emit_plotdata(dir.path()), Err(IoError::MissingRun(_))));
}

#[test]
fn rotation_sweep_measures_fourth_order() {
    let dir = tempfile::tempdir().unwrap();
    let s = parse_scenario(
        "name = \"r\"\ncase = \"whip_curve\"\n[grid]\nn = [32]\n[integrator]\nt_end = 1.0\n\
         [initial]\nfamily = \"circle_rotation\"\n[sweep]\ndt = [0.1, 0.05, 0.025]\n",
    )
    .unwrap();
    let record = sweep(&s, dir.path(), 2).unwrap();
    assert_eq!(record.exit_code(), 0);
    assert_eq!(record.reference, "exact");
    assert!((record.slope - 4.0).abs() <= 0.3, "{}", record.slope);
    let (slope, rows) = read_convergence(&dir.path().join(CONVERGENCE_FILE)).unwrap();
    assert_eq!(slope, record.slope);
    assert_eq!(rows.len(), 3);
    assert!(dir.path().join("run_02").join("record.toml").is_file());
    let files = emit_plotdata(dir.path()).unwrap();
    assert_eq!(files, vec![dir.path().join(PLOT_DIR).join("convergence.dat")]);
}

#[test]
fn whip_sweep_uses_the_finest_run_as_reference() {
    let dir = tempfile::tempdir().unwrap();
    let s = parse_scenario(
        "name = \"w\"\ncase = \"whip_curve\"\n[grid]\nn = [32]\n[integrator]\nscheme = \"rattle\"\nt_end = 0.2\n\
         [sweep]\ndt = [0.02, 0.01, 0.005, 0.0025]\n",
    )
    .unwrap();
    let record = sweep(&s, dir.path(), 4).unwrap();
    assert_eq!(record.reference, "finest");
    assert!(record.runs[3].error.is_none());
    assert!((record.slope - 2.0).abs() <= 0.3, "{}", record.slope);
}

#[test]
fn slope_of_exact_power_laws() {
    let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.025].iter().map(|&h: &f64| (h, 3.0 * h.powi(2))).collect();
    assert!((loglog_slope(&pts) - 2.0).abs() < 1e-12);
    assert!(loglog_slope(&pts[..1]).is_nan());
}
