// SPDX-License-Identifier: Apache-2.0

//! Sweep orchestration: a bounded worker pool over (strategy, φ, T1) runs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use rqd_core::dynamics::{compile_trotter_step, run_prepared, PreparedModel};
use rqd_core::schedule::CircuitReport;
use serde::Serialize;

use crate::config::{ExperimentConfig, Job};
use crate::formats::{self, write_atomic};
use crate::Error;

pub const TRAJECTORY_DIR: &str = "trajectories";
pub const DIAGNOSTICS_DIR: &str = "diagnostics";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub strategy: String,
    pub phi: f64,
    pub t1_ms: Option<f64>,
    /// Trajectory path relative to the output directory.
    pub file: String,
    pub error: Option<String>,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    code_version: &'static str,
    config: serde_json::Value,
    output_dir: String,
    wall_time_s: f64,
    runs: &'a [RunOutcome],
}

#[derive(Debug)]
pub struct SweepSummary {
    pub output_dir: PathBuf,
    pub runs: Vec<RunOutcome>,
}

impl SweepSummary {
    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.error.is_some()).count()
    }
}

fn run_one(
    cfg: &ExperimentConfig,
    job: &Job,
    model: &PreparedModel,
    out: &Path,
) -> Result<(), Error> {
    let rc = cfg.run_config(job)?;
    let tr = run_prepared(&rc, model)?;
    let stem = formats::run_stem(job.strategy.name(), job.phi, job.t1_ms);
    let rows = formats::trajectory_rows(&tr);
    write_atomic(
        &out.join(TRAJECTORY_DIR).join(format!("{stem}.csv")),
        &formats::trajectory_csv(&rows),
    )?;
    if cfg.verbose && tr.records.iter().any(|r| r.optimizer.is_some()) {
        write_atomic(
            &out.join(DIAGNOSTICS_DIR).join(format!("{stem}.csv")),
            &formats::diagnostics_csv(&tr),
        )?;
    }
    Ok(())
}

/// Executes every run of `cfg` with `workers` threads and writes the
/// trajectories plus a manifest. Failed runs are reported in the summary and
/// the manifest; finished files are kept.
pub fn run_sweep(cfg: &ExperimentConfig, workers: usize) -> Result<SweepSummary, Error> {
    let started = Instant::now();
    cfg.validate()?;
    let out = cfg.resolve_output_dir();
    std::fs::create_dir_all(out.join(TRAJECTORY_DIR))?;
    if cfg.verbose {
        std::fs::create_dir_all(out.join(DIAGNOSTICS_DIR))?;
    }
    let jobs = cfg.jobs()?;

    // One model (Hamiltonian and its spectrum) per φ, shared by all runs.
    let mut models = BTreeMap::new();
    for job in &jobs {
        let key = job.phi.to_bits();
        if let std::collections::btree_map::Entry::Vacant(e) = models.entry(key) {
            e.insert(PreparedModel::new(&cfg.model_params(job.phi)?)?);
        }
    }

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|s| {
        for _ in 0..workers.max(1).min(jobs.len()) {
            let tx = tx.clone();
            let (jobs, models, next, out) = (&jobs, &models, &next, &out);
            s.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let t0 = Instant::now();
                log::info!(
                    "run {} phi={:.8} T1={:?}",
                    job.strategy.name(),
                    job.phi,
                    job.t1_ms
                );
                let res = run_one(cfg, job, &models[&job.phi.to_bits()], out);
                if let Err(e) = &res {
                    log::error!(
                        "run {} phi={:.8} T1={:?} failed: {e}",
                        job.strategy.name(),
                        job.phi,
                        job.t1_ms
                    );
                }
                let stem = formats::run_stem(job.strategy.name(), job.phi, job.t1_ms);
                let outcome = RunOutcome {
                    strategy: job.strategy.name().into(),
                    phi: job.phi,
                    t1_ms: job.t1_ms,
                    file: format!("{TRAJECTORY_DIR}/{stem}.csv"),
                    error: res.err().map(|e| e.to_string()),
                    seconds: t0.elapsed().as_secs_f64(),
                };
                if tx.send((i, outcome)).is_err() {
                    break;
                }
            });
        }
    });
    drop(tx);
    let mut indexed: Vec<(usize, RunOutcome)> = rx.into_iter().collect();
    indexed.sort_by_key(|(i, _)| *i);
    let runs: Vec<RunOutcome> = indexed.into_iter().map(|(_, r)| r).collect();

    let manifest = Manifest {
        code_version: env!("CARGO_PKG_VERSION"),
        config: cfg.to_value(),
        output_dir: out.display().to_string(),
        wall_time_s: started.elapsed().as_secs_f64(),
        runs: &runs,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&out.join(MANIFEST_FILE), text.as_bytes())?;
    Ok(SweepSummary {
        output_dir: out,
        runs,
    })
}

/// Table-I rows: the compiled Trotter step for every φ of `cfg`.
pub fn circuit_reports(cfg: &ExperimentConfig) -> Result<Vec<CircuitReport>, Error> {
    let rc_dt = cfg.dt;
    cfg.phis()?
        .into_iter()
        .map(|phi| {
            let model = PreparedModel::new(&cfg.model_params(phi)?)?;
            let tc = rqd_core::trotter::TrotterConfig {
                dt: rc_dt,
                term_order: crate::config::term_order(&cfg.term_order)?,
                use_rzz: true,
            };
            let lc = compile_trotter_step(&model.pauli, &tc, &cfg.timings())?;
            Ok(CircuitReport::new(phi, &lc))
        })
        .collect()
}
