//! The `volpres` binary: exit codes and reproducible output.

use std::fs;
use std::path::Path;
use std::process::Command;

fn volpres(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_volpres")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const WHIP: &str = "name = \"w\"\ncase = \"whip_curve\"\n[grid]\nn = [32]\n\
                    [integrator]\nscheme = \"rattle\"\ndt = 1e-2\nt_end = 0.1\noutput_stride = 2\n";

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let ok = write(dir.path(), "ok.toml", WHIP);
    assert_eq!(volpres(&["run", &ok, "--out", out]).status.code(), Some(0));
    assert_eq!(volpres(&["plotdata", out]).status.code(), Some(0));

    let bad = write(dir.path(), "bad.toml", "name = \"w\"\ncase = \"whip_curve\"\nspeed = 1\n");
    let o = volpres(&["run", &bad, "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("SchemaError at `speed`"));

    let range = write(dir.path(), "range.toml", "name = \"w\"\ncase = \"whip_curve\"\n[integrator]\ndt = -1.0\n");
    let o = volpres(&["run", &range, "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("RangeError at `integrator.dt`"));

    let stuck = write(
        dir.path(),
        "stuck.toml",
        "name = \"u\"\ncase = \"whip_curve\"\n[integrator]\nscheme = \"rattle\"\ntol = 1e-18\n",
    );
    assert_eq!(volpres(&["run", &stuck, "--out", out]).status.code(), Some(3));

    assert_eq!(volpres(&["sweep", &ok, "--out", out]).status.code(), Some(2));
    assert_ne!(volpres(&["plotdata", dir.path().join("none").to_str().unwrap()]).status.code(), Some(0));
}

fn without_wall_time(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with("wall_time_s")).collect::<Vec<_>>().join("\n")
}

fn files(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(files(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

#[test]
fn reruns_are_byte_identical_apart_from_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let scen = write(
        dir.path(),
        "s.toml",
        "name = \"d\"\ncase = \"projection_study\"\nseed = 5\n[study]\nsizes = [16, 32]\norders = [0, 1]\n",
    );
    let whip = write(dir.path(), "w.toml", WHIP);
    for (k, s) in [scen, whip].iter().enumerate() {
        let a = dir.path().join(format!("a{k}"));
        let b = dir.path().join(format!("b{k}"));
        for o in [&a, &b] {
            assert_eq!(volpres(&["run", s, "--out", o.to_str().unwrap()]).status.code(), Some(0));
            assert_eq!(volpres(&["plotdata", o.to_str().unwrap()]).status.code(), Some(0));
        }
        let (fa, fb) = (files(&a), files(&b));
        assert_eq!(fa.len(), fb.len());
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(x.strip_prefix(&a).unwrap(), y.strip_prefix(&b).unwrap());
            let (tx, ty) = (fs::read_to_string(x).unwrap(), fs::read_to_string(y).unwrap());
            if x.ends_with("record.toml") {
                assert_eq!(without_wall_time(&tx), without_wall_time(&ty));
            } else {
                assert_eq!(tx, ty, "{x:?}");
            }
        }
    }
}

#[test]
fn seed_flag_changes_random_initial_data() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "s.toml",
        "name = \"d\"\ncase = \"projection_study\"\n[study]\nsizes = [16]\norders = [0]\n",
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    volpres(&["run", &s, "--out", a.to_str().unwrap(), "--seed", "1"]);
    volpres(&["run", &s, "--out", b.to_str().unwrap(), "--seed", "2"]);
    let ra = fs::read_to_string(a.join("record.toml")).unwrap();
    assert!(ra.contains("seed = 1"));
    assert_ne!(fs::read_to_string(a.join("study.csv")).unwrap(), fs::read_to_string(b.join("study.csv")).unwrap());
}
