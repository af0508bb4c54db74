// SPDX-License-Identifier: Apache-2.0

//! Aggregation of a results directory into plot-ready tables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::formats::{self, fmt_num, write_atomic, TrajectoryRow};
use crate::harness::{circuit_reports, MANIFEST_FILE, TRAJECTORY_DIR};
use crate::Error;

pub const REPORT_DIR: &str = "report";
pub const AVERAGED_DIR: &str = "averaged";

#[derive(Debug, Clone, Copy, Default)]
pub struct ReportOptions {
    /// Negate imbalance in the figure tables, for plots that start at `+1`.
    pub flip_imbalance_sign: bool,
}

/// One trajectory file with the run identity parsed from its name.
#[derive(Debug, Clone)]
pub struct LoadedRun {
    pub strategy: String,
    pub phi: f64,
    pub t1_ms: Option<f64>,
    pub rows: Vec<TrajectoryRow>,
}

/// Reads every trajectory CSV below `dir` (or in `dir/trajectories`).
pub fn load_runs(dir: &Path) -> Result<Vec<LoadedRun>, Error> {
    let sub = dir.join(TRAJECTORY_DIR);
    let src = if sub.is_dir() { sub } else { dir.to_path_buf() };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&src)
        .map_err(|e| Error::Format(format!("{}: {e}", src.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Format(format!(
            "no trajectory CSVs in {}",
            src.display()
        )));
    }
    paths
        .iter()
        .map(|p| {
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            let (strategy, phi, t1_ms) = formats::parse_run_stem(stem).ok_or_else(|| {
                Error::Format(format!("{}: not a trajectory file name", p.display()))
            })?;
            let bytes = std::fs::read(p)?;
            let rows = formats::parse_trajectory_csv(&bytes)
                .map_err(|e| Error::Format(format!("{}: {e}", p.display())))?;
            Ok(LoadedRun {
                strategy,
                phi,
                t1_ms,
                rows,
            })
        })
        .collect()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

/// Pointwise mean over runs with a shared time grid. Optimizer columns are
/// averaged where every run has them; `converged` holds only if it holds for
/// all runs.
pub fn average_rows(runs: &[&[TrajectoryRow]]) -> Result<Vec<TrajectoryRow>, Error> {
    let first = runs
        .first()
        .ok_or_else(|| Error::Format("nothing to average".into()))?;
    for r in runs {
        if r.len() != first.len()
            || r.iter()
                .zip(first.iter())
                .any(|(a, b)| (a.t - b.t).abs() > 1e-9)
        {
            return Err(Error::Format("runs have different time grids".into()));
        }
    }
    Ok((0..first.len())
        .map(|i| {
            let col = |f: fn(&TrajectoryRow) -> f64| mean(runs.iter().map(|r| f(&r[i])));
            let opt = |f: fn(&TrajectoryRow) -> Option<f64>| -> Option<f64> {
                let vals: Option<Vec<f64>> = runs.iter().map(|r| f(&r[i])).collect();
                vals.map(|v| mean(v.into_iter()))
            };
            let converged: Option<Vec<bool>> = runs.iter().map(|r| r[i].converged).collect();
            TrajectoryRow {
                t: first[i].t,
                imbalance: col(|r| r.imbalance),
                fidelity_noisy: col(|r| r.fidelity_noisy),
                fidelity_pure: col(|r| r.fidelity_pure),
                objective: opt(|r| r.objective),
                iterations: opt(|r| r.iterations),
                converged: converged.map(|c| c.iter().all(|&x| x)),
                cum_circuit_ms: col(|r| r.cum_circuit_ms),
            }
        })
        .collect())
}

fn t1_text(t1: Option<f64>) -> String {
    t1.map(fmt_num).unwrap_or_default()
}

/// Sort key placing noiseless runs after every finite coherence time.
fn t1_key(t1: Option<f64>) -> u64 {
    t1.map(f64::to_bits).unwrap_or(u64::MAX)
}

/// Writes the aggregated tables into `dir/report` and returns their paths.
pub fn write_report(dir: &Path, opts: ReportOptions) -> Result<Vec<PathBuf>, Error> {
    let runs = load_runs(dir)?;
    let sign = if opts.flip_imbalance_sign { -1.0 } else { 1.0 };
    let out = dir.join(REPORT_DIR);
    std::fs::create_dir_all(out.join(AVERAGED_DIR))?;
    let mut written = Vec::new();
    let mut emit = |name: String, bytes: Vec<u8>| -> Result<(), Error> {
        let p = out.join(name);
        write_atomic(&p, &bytes)?;
        written.push(p);
        Ok(())
    };

    let mut groups: BTreeMap<(String, u64), Vec<&LoadedRun>> = BTreeMap::new();
    for r in &runs {
        groups
            .entry((r.strategy.clone(), t1_key(r.t1_ms)))
            .or_default()
            .push(r);
    }

    let mut per_phi = Vec::new();
    let mut mean_imb = Vec::new();
    let mut vs_coherence = Vec::new();
    let mut vs_t = Vec::new();
    for ((strategy, _), members) in &groups {
        let t1 = members[0].t1_ms;
        let mut members = members.clone();
        members.sort_by(|a, b| a.phi.total_cmp(&b.phi));
        let slices: Vec<&[TrajectoryRow]> = members.iter().map(|r| r.rows.as_slice()).collect();
        let avg = average_rows(&slices)
            .map_err(|e| Error::Format(format!("{strategy} T1={t1:?}: {e}")))?;
        emit(
            format!(
                "{AVERAGED_DIR}/{strategy}_T{}.csv",
                t1.map(fmt_num).unwrap_or_else(|| "none".into())
            ),
            formats::trajectory_csv(&avg),
        )?;
        let n = members.len().to_string();
        for m in &members {
            for r in &m.rows {
                per_phi.push(vec![
                    strategy.clone(),
                    t1_text(t1),
                    format!("{:.8}", m.phi),
                    fmt_num(r.t),
                    fmt_num(sign * r.imbalance),
                ]);
            }
        }
        for r in &avg {
            mean_imb.push(vec![
                strategy.clone(),
                t1_text(t1),
                fmt_num(r.t),
                fmt_num(sign * r.imbalance),
                n.clone(),
            ]);
            vs_t.push(vec![
                strategy.clone(),
                t1_text(t1),
                fmt_num(r.t),
                fmt_num(r.fidelity_noisy),
                fmt_num(r.fidelity_pure),
                n.clone(),
            ]);
        }
        let last = avg.last().expect("trajectories are non-empty");
        vs_coherence.push(vec![
            strategy.clone(),
            t1_text(t1),
            fmt_num(last.t),
            fmt_num(last.fidelity_noisy),
            fmt_num(last.fidelity_pure),
            n,
        ]);
    }

    emit(
        "fig2_imbalance_per_phi.csv".into(),
        formats::numeric_csv(&["strategy", "t1_ms", "phi", "t", "imbalance"], &per_phi),
    )?;
    emit(
        "fig2_imbalance_mean.csv".into(),
        formats::numeric_csv(
            &["strategy", "t1_ms", "t", "imbalance", "num_phi"],
            &mean_imb,
        ),
    )?;
    emit(
        "fig3_fidelity_vs_coherence.csv".into(),
        formats::numeric_csv(
            &[
                "strategy",
                "t1_ms",
                "t",
                "fidelity_noisy",
                "fidelity_pure",
                "num_phi",
            ],
            &vs_coherence,
        ),
    )?;
    emit(
        "fig3_fidelity_vs_t.csv".into(),
        formats::numeric_csv(
            &[
                "strategy",
                "t1_ms",
                "t",
                "fidelity_noisy",
                "fidelity_pure",
                "num_phi",
            ],
            &vs_t,
        ),
    )?;

    let manifest = dir.join(MANIFEST_FILE);
    if manifest.is_file() {
        let cfg = ExperimentConfig::load(&manifest)?;
        emit(
            "table1.csv".into(),
            formats::table_csv(&circuit_reports(&cfg)?),
        )?;
    } else {
        log::warn!(
            "no {MANIFEST_FILE} in {}; skipping the circuit table",
            dir.display()
        );
    }
    Ok(written)
}
