use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn brownheat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brownheat"))
        .args(args)
        .output()
        .expect("spawn brownheat")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn dir_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_prints_config_and_writes_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = brownheat(&[
        "run",
        "--mode",
        "full-coupling",
        "--theta",
        "0.2",
        "--n-particles",
        "50",
        "--seed",
        "7",
        "--snapshot",
        "all",
        "-o",
        dir_arg(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("mode = \"full-coupling\""));
    assert!(text.contains("# seeds: 7"));
    assert!(text.contains("seed 7: E1 = "));
    for f in [
        "config.toml",
        "density.csv",
        "diagnostics.csv",
        "trajectories.csv",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let traj = fs::read_to_string(out.join("trajectories.csv")).unwrap();
    assert_eq!(traj.lines().count(), 1 + 50 * 501);
    let density = fs::read_to_string(out.join("density.csv")).unwrap();
    assert_eq!(density.lines().count(), 51);

    // the written config reproduces the run
    let again = tmp.path().join("again");
    let cfg = out.join("config.toml");
    let o = brownheat(&["run", "-c", dir_arg(&cfg), "-o", dir_arg(&again)]);
    assert!(o.status.success());
    assert_eq!(
        fs::read(out.join("density.csv")).unwrap(),
        fs::read(again.join("density.csv")).unwrap()
    );
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let args = [
        "run",
        "--mode",
        "partial-coupling-ii",
        "--n-particles",
        "200",
        "--n-seeds",
        "3",
        "--seed",
        "5",
        "-o",
        dir_arg(&out),
    ];
    let read_all = || {
        let mut files = Vec::new();
        for seed in 5..8 {
            for f in ["density.csv", "diagnostics.csv", "config.toml"] {
                files.push(fs::read(out.join(format!("seed-{seed}/{f}"))).unwrap());
            }
        }
        files
    };
    assert!(brownheat(&args).status.success());
    let first = read_all();
    fs::remove_dir_all(&out).unwrap();
    assert!(brownheat(&args).status.success());
    assert_eq!(first, read_all());
}

#[test]
fn sweep_writes_summary_and_per_run_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let o = brownheat(&[
        "sweep",
        "--mode",
        "partial-coupling-ii",
        "--thetas",
        "0.5,1",
        "--particles",
        "20,40",
        "--n-seeds",
        "2",
        "-o",
        dir_arg(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let lines: Vec<_> = summary.lines().collect();
    assert_eq!(
        lines[0],
        "theta,n_particles,mean_error,standard_error,n_seeds"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("1.0000000000000000e0,40,"));
    assert!(out.join("theta-0.5_np-20/seed-1/density.csv").is_file());
}

#[test]
fn check_reports_cfl_and_fails_on_violation() {
    let o = brownheat(&["check"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("D dt / dx^2 = 0.043945 (ok)"));

    let o = brownheat(&["check", "--n-steps", "20"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("CFL"));
}

#[test]
fn validation_errors_exit_with_category() {
    let o = brownheat(&["check", "--theta", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("theta"));

    let o = brownheat(&["check", "--t-init", "0"]);
    assert_eq!(o.status.code(), Some(2));

    // accepted by the parser, rejected once the run is set up
    let o = brownheat(&["check", "--mode", "full-coupling", "--n-particles", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_particles"));

    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "mode = \"macro-only\"\nspeed = 3\n").unwrap();
    let o = brownheat(&["check", "-c", dir_arg(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("speed"));
}

#[test]
fn figure_writes_panel_data() {
    let tmp = tempfile::tempdir().unwrap();
    let o = brownheat(&["figure", "fig1c", "-o", dir_arg(tmp.path())]);
    assert!(o.status.success());
    let traj = fs::read_to_string(tmp.path().join("fig1c/trajectories.csv")).unwrap();
    assert_eq!(traj.lines().count(), 1 + 100 * 501);
    let cfg = fs::read_to_string(tmp.path().join("fig1c/config.toml")).unwrap();
    assert!(cfg.contains("mode = \"partial-coupling-i\"") && cfg.contains("theta = 0.0"));

    let o = brownheat(&["figure", "fig9z"]);
    assert!(!o.status.success());
}

#[test]
fn iso_error_reports_unbracketed_weight() {
    let tmp = tempfile::tempdir().unwrap();
    let o = brownheat(&[
        "iso-error",
        "--thetas",
        "0,1",
        "--target",
        "0.2",
        "--search-seeds",
        "4",
        "-o",
        dir_arg(tmp.path()),
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("theta 0"));
    let csv = fs::read_to_string(tmp.path().join("iso_error.csv")).unwrap();
    let rows: Vec<_> = csv.lines().collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("1.0000000000000000e0,"));
}
