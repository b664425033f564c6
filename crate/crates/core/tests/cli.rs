use std::path::Path;
use std::process::Command;

use modboat::cli::csv::{parse_telemetry, write_telemetry, HEADER};
use modboat::cli::{presets, run_batch, RunOptions, ScenarioConfig};
use modboat::mission::run_mission;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_modboat"))
}

fn write_cfg(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("scenario.cfg");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn csv_round_trip() {
    let cfg = ScenarioConfig::parse(
        "mission.kind = waypoints\nmission.waypoints = 0.5, 0; 0.5, 0.5\nmission.duration = 12",
    )
    .unwrap();
    let log = run_mission(&cfg.boat, &cfg.controller, &cfg.mission).unwrap();
    let mut buf = Vec::new();
    write_telemetry(&mut buf, &log).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with(&format!("{HEADER}\n")));
    assert!(text.ends_with('\n'));
    let back = parse_telemetry(&text).unwrap();
    assert_eq!(back.len(), log.len());
    let close = |a: f64, b: f64| (a - b).abs() <= 5e-9 * a.abs().max(1e-300);
    for (a, b) in log.records.iter().zip(&back) {
        let pairs = [
            (a.t, b.t),
            (a.theta, b.theta),
            (a.theta_dot, b.theta_dot),
            (a.phi, b.phi),
            (a.phi_dot, b.phi_dot),
            (a.theta_t_dot, b.theta_t_dot),
            (a.x, b.x),
            (a.y, b.y),
            (a.vx, b.vx),
            (a.vy, b.vy),
            (a.theta_r, b.theta_r),
            (a.theta_des, b.theta_des),
            (a.psi_hat, b.psi_hat),
            (a.tau, b.tau),
        ];
        assert!(pairs.iter().all(|&(x, y)| close(x, y)), "{a:?} vs {b:?}");
        assert_eq!(a.waypoint_index, b.waypoint_index);
    }
}

#[test]
fn forcing_gain_sweep_raises_speed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = presets::load("k-sweep").unwrap();
    let opts = RunOptions {
        out_dir: Some(dir.path().to_path_buf()),
        ..RunOptions::default()
    };
    let batch = run_batch(&cfg, &opts).unwrap();
    let speeds: Vec<f64> = batch
        .points
        .iter()
        .map(|p| p.report.get("steady_speed").unwrap().median)
        .collect();
    assert_eq!(speeds.len(), 3);
    assert!(speeds.windows(2).all(|w| w[1] > w[0]), "{speeds:?}");
}

#[test]
fn repeats_pool_into_one_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig::parse("name = rep\nmission.duration = 5").unwrap();
    let opts = RunOptions {
        out_dir: Some(dir.path().to_path_buf()),
        repeats: Some(3),
        ..RunOptions::default()
    };
    let batch = run_batch(&cfg, &opts).unwrap();
    assert_eq!(batch.points[0].report.runs, 3);
    assert_eq!(batch.points[0].report.get("steady_speed").unwrap().n, 3);
    for name in [
        "rep_r00.csv",
        "rep_r02.csv",
        "rep_report.txt",
        "rep_report.dat",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let a = std::fs::read(dir.path().join("rep_r00.csv")).unwrap();
    let b = std::fs::read(dir.path().join("rep_r02.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args([
            "presets",
            "run",
            "table1-defaults",
            "--dry-run",
            "--out-dir",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(!out.exists());
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_cfg(dir.path(), "mission.duration = 2\n");
    assert!(bin()
        .arg("validate")
        .arg(&good)
        .output()
        .unwrap()
        .status
        .success());

    let bad = write_cfg(dir.path(), "boat.mass = 1\nboat.wings = 2\n");
    let out = bin().arg("validate").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("boat.wings"));

    let invalid = write_cfg(dir.path(), "boat.I_t = -1\n");
    assert_eq!(
        bin()
            .arg("validate")
            .arg(&invalid)
            .output()
            .unwrap()
            .status
            .code(),
        Some(2)
    );

    let missing = bin()
        .arg("run")
        .arg(dir.path().join("none.cfg"))
        .output()
        .unwrap()
        .status;
    assert_eq!(missing.code(), Some(4));

    let unsettled = write_cfg(
        dir.path(),
        "controller.mode = limit-cycle\nmission.kind = step-test\nmission.steps = 15, pi/2\nmission.duration = 30\n",
    );
    let strict = bin()
        .arg("run")
        .arg(&unsettled)
        .arg("--strict-settle")
        .arg("--out-dir")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(strict.status.code(), Some(3));
}

#[test]
fn presets_listed_and_shown() {
    let out = bin().args(["presets", "list"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    for name in presets::names() {
        assert!(text.lines().any(|l| l == name), "{name}");
    }
    let shown = bin()
        .args(["presets", "show", "fig1-converge"])
        .output()
        .unwrap();
    assert_eq!(
        String::from_utf8(shown.stdout).unwrap(),
        presets::source("fig1-converge").unwrap()
    );
}
