// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use rqd::formats::{parse_table_csv, parse_trajectory_csv};

fn rqd(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rqd"));
    cmd.args(args).env_remove("RQD_OUTPUT_DIR");
    if let Some(d) = out_dir {
        cmd.env("RQD_OUTPUT_DIR", d);
    }
    cmd.output().expect("rqd binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write_config(dir: &Path, name: &str, value: serde_json::Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_vec_pretty(&value).unwrap()).unwrap();
    p
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    v.sort();
    v
}

fn assert_same_trajectories(a: &Path, b: &Path) {
    let (fa, fb) = (
        csv_files(&a.join("trajectories")),
        csv_files(&b.join("trajectories")),
    );
    assert!(!fa.is_empty());
    assert_eq!(
        fa.iter()
            .map(|p| p.file_name().unwrap())
            .collect::<Vec<_>>(),
        fb.iter()
            .map(|p| p.file_name().unwrap())
            .collect::<Vec<_>>()
    );
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(
            std::fs::read(x).unwrap(),
            std::fs::read(y).unwrap(),
            "{}",
            x.display()
        );
    }
}

#[test]
fn smoke_preset_runs_quickly_and_reproducibly() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let t0 = Instant::now();
    let o = rqd(&["run", "--preset", "paper-fig2", "--smoke"], Some(&first));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(t0.elapsed() < Duration::from_secs(60));

    let files = csv_files(&first.join("trajectories"));
    assert_eq!(files.len(), 8);
    for f in &files {
        let rows = parse_trajectory_csv(&std::fs::read(f).unwrap()).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].t, 0.0);
        for r in &rows {
            assert!((-1.0..=1.0).contains(&r.imbalance));
            assert!(r.fidelity_noisy > -1e-9 && r.fidelity_noisy < 1.0 + 1e-9);
        }
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(first.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["runs"].as_array().unwrap().len(), 8);
    assert!(manifest["runs"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["error"].is_null()));
    assert_eq!(manifest["config"]["model"]["num_sites"], 4);

    // Same config, more workers: byte-identical trajectories.
    let second = tmp.path().join("second");
    let o = rqd(
        &["run", "--preset", "paper-fig2", "--smoke", "--workers", "3"],
        Some(&second),
    );
    assert_eq!(code(&o), 0);
    assert_same_trajectories(&first, &second);

    // The manifest is itself a runnable config.
    let third = tmp.path().join("third");
    let m = first.join("manifest.json");
    let o = rqd(&["run", m.to_str().unwrap()], Some(&third));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_same_trajectories(&first, &third);

    let o = rqd(&["report", first.to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = first.join("report");
    for name in [
        "fig2_imbalance_per_phi.csv",
        "fig2_imbalance_mean.csv",
        "fig3_fidelity_vs_coherence.csv",
        "fig3_fidelity_vs_t.csv",
        "table1.csv",
    ] {
        assert!(report.join(name).is_file(), "{name}");
    }
    let averaged = csv_files(&report.join("averaged"));
    assert_eq!(averaged.len(), 4);
    for f in averaged {
        assert_eq!(
            parse_trajectory_csv(&std::fs::read(f).unwrap())
                .unwrap()
                .len(),
            6
        );
    }
    let table = parse_table_csv(&std::fs::read(report.join("table1.csv")).unwrap()).unwrap();
    assert_eq!(table.len(), 2);
}

#[test]
fn report_of_a_single_run_reproduces_it() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        "exact.json",
        serde_json::json!({
            "model": {"num_sites": 4},
            "phi_list": [1.0],
            "t_max": 0.4,
            "coherence_list": [null],
            "strategies": ["exact"],
            "output_dir": out.to_str().unwrap()
        }),
    );
    assert_eq!(code(&rqd(&["run", cfg.to_str().unwrap()], None)), 0);
    let traj = std::fs::read(out.join("trajectories/exact_phi1.00000000_Tnone.csv")).unwrap();
    assert_eq!(parse_trajectory_csv(&traj).unwrap().len(), 11);

    assert_eq!(code(&rqd(&["report", out.to_str().unwrap()], None)), 0);
    let avg = std::fs::read(out.join("report/averaged/exact_Tnone.csv")).unwrap();
    assert_eq!(avg, traj);
}

#[test]
fn report_rejects_empty_or_malformed_directories() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&rqd(&["report", tmp.path().to_str().unwrap()], None)),
        1
    );
    assert_eq!(code(&rqd(&["report", "/nonexistent/rqd"], None)), 1);
    std::fs::write(
        tmp.path().join("trotter_phi1.00000000_T25.csv"),
        "t,imbalance\n0,1\n",
    )
    .unwrap();
    assert_eq!(
        code(&rqd(&["report", tmp.path().to_str().unwrap()], None)),
        1
    );
}

#[test]
fn circuits_prints_the_table_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "default.json", serde_json::json!({}));
    let a = rqd(&["circuits", cfg.to_str().unwrap()], None);
    assert_eq!(code(&a), 0);
    let rows = parse_table_csv(&a.stdout).unwrap();
    assert_eq!(rows.len(), 16);
    for r in &rows {
        assert!((0.05..=0.5).contains(&r.total_time_ms), "{r:?}");
        assert_eq!((r.layers, r.gates), (91, 124));
    }
    let b = rqd(&["circuits", cfg.to_str().unwrap()], None);
    assert_eq!(a.stdout, b.stdout);

    let small = write_config(
        tmp.path(),
        "n2.json",
        serde_json::json!({"model": {"num_sites": 2}}),
    );
    let dump = tmp.path().join("dump");
    let o = rqd(
        &[
            "circuits",
            small.to_str().unwrap(),
            "--dump",
            dump.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&o), 0);
    for r in parse_table_csv(&o.stdout).unwrap() {
        assert!(r.layers <= r.gates && r.layers > 0);
    }
    let texts: Vec<_> = std::fs::read_dir(&dump).unwrap().collect();
    assert_eq!(texts.len(), 2 * 16);
}

#[test]
fn config_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let bad_dt = write_config(tmp.path(), "bad.json", serde_json::json!({"dt": -1}));
    let unknown = write_config(
        tmp.path(),
        "unknown.json",
        serde_json::json!({"colour": "red"}),
    );
    let broken = tmp.path().join("broken.json");
    std::fs::write(&broken, "{ nope").unwrap();
    let good = write_config(tmp.path(), "good.json", serde_json::json!({}));
    for args in [
        vec!["run", bad_dt.to_str().unwrap()],
        vec!["run", unknown.to_str().unwrap()],
        vec!["run", broken.to_str().unwrap()],
        vec!["run", "/nonexistent/config.json"],
        vec!["run"],
        vec!["run", good.to_str().unwrap(), "--preset", "paper-fig2"],
        vec!["run", "--preset", "paper-fig9"],
        vec!["run", "--preset", "paper-fig2", "--workers", "0"],
        vec!["circuits", bad_dt.to_str().unwrap()],
        vec!["frobnicate"],
    ] {
        let o = rqd(&args, Some(&out));
        assert_eq!(
            code(&o),
            1,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    assert!(!out.join("manifest.json").exists());
    assert_eq!(code(&rqd(&["--help"], None)), 0);
}

#[test]
fn failed_runs_exit_with_two_and_keep_the_rest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        "two.json",
        serde_json::json!({
            "model": {"num_sites": 4},
            "phi_list": [1.0, 2.0],
            "t_max": 0.2,
            "coherence_list": [null],
            "strategies": ["exact"],
            "output_dir": out.to_str().unwrap()
        }),
    );
    // A directory squatting on one target path makes that run's rename fail.
    let blocked = out.join("trajectories/exact_phi2.00000000_Tnone.csv");
    std::fs::create_dir_all(blocked.join("occupied")).unwrap();
    let o = rqd(&["run", cfg.to_str().unwrap()], None);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out
        .join("trajectories/exact_phi1.00000000_Tnone.csv")
        .is_file());
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    let runs = manifest["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    assert!(runs[0]["error"].is_null());
    assert!(runs[1]["error"].is_string());
}
