// SPDX-License-Identifier: Apache-2.0

//! Command-line interface.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rqd_core::dynamics::{compile_trotter_step, PreparedModel};
use rqd_core::trotter::TrotterConfig;

use crate::config::{check_schema, term_order, ExperimentConfig, Preset};
use crate::formats::{self, write_atomic};
use crate::harness::{circuit_reports, run_sweep};
use crate::report::{write_report, ReportOptions};
use crate::Error;

#[derive(Debug, Parser)]
#[command(
    name = "rqd",
    version,
    about = "Restarted quantum dynamics experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every (strategy, φ, coherence time) combination of a config.
    Run {
        /// JSON config, or the manifest of an earlier run.
        config: Option<PathBuf>,
        /// Four sites, five steps, two phases.
        #[arg(long)]
        smoke: bool,
        /// Built-in experiment instead of a config file.
        #[arg(long, value_parser = ["paper-fig2", "paper-fig3"])]
        preset: Option<String>,
        /// Worker threads; defaults to the config's `parallelism`.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Aggregate the trajectories of a results directory.
    Report {
        dir: PathBuf,
        /// Negate imbalance in the figure tables.
        #[arg(long)]
        flip_imbalance_sign: bool,
    },
    /// Print the compiled Trotter-step report without running dynamics.
    Circuits {
        config: PathBuf,
        /// Also write each step's circuit text and Hamiltonian JSON here.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                1
            } else {
                0
            }
        }
    }
}

pub fn execute(cli: Cli) -> u8 {
    let res = match cli.command {
        Command::Run {
            config,
            smoke,
            preset,
            workers,
        } => cmd_run(config, smoke, preset, workers),
        Command::Report {
            dir,
            flip_imbalance_sign,
        } => write_report(
            &dir,
            ReportOptions {
                flip_imbalance_sign,
            },
        )
        .map(|written| {
            for p in written {
                println!("{}", p.display());
            }
            0
        }),
        Command::Circuits { config, dump } => cmd_circuits(config, dump),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn resolve_config(
    config: Option<PathBuf>,
    preset: Option<String>,
    smoke: bool,
) -> Result<ExperimentConfig, Error> {
    let cfg = match (config, preset) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "give either a config file or --preset, not both".into(),
            ))
        }
        (None, None) => {
            return Err(Error::Config(
                "a config file or --preset is required".into(),
            ))
        }
        (Some(path), None) => ExperimentConfig::load(&path)?,
        (None, Some(name)) => {
            let preset = Preset::from_name(&name)
                .ok_or_else(|| Error::Config(format!("unknown preset {name:?}")))?;
            let cfg = preset.config();
            check_schema(&cfg.to_value())?;
            cfg
        }
    };
    let cfg = if smoke { cfg.smoke()? } else { cfg };
    check_schema(&cfg.to_value())?;
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(
    config: Option<PathBuf>,
    smoke: bool,
    preset: Option<String>,
    workers: Option<usize>,
) -> Result<u8, Error> {
    let cfg = resolve_config(config, preset, smoke)?;
    let workers = workers.unwrap_or(cfg.parallelism);
    if workers == 0 {
        return Err(Error::Config("--workers must be at least 1".into()));
    }
    let summary = run_sweep(&cfg, workers)?;
    let failed = summary.failures();
    println!(
        "{} runs, {} failed; results in {}",
        summary.runs.len(),
        failed,
        summary.output_dir.display()
    );
    Ok(if failed == 0 { 0 } else { 2 })
}

fn cmd_circuits(config: PathBuf, dump: Option<PathBuf>) -> Result<u8, Error> {
    let cfg = ExperimentConfig::load(&config)?;
    let reports = circuit_reports(&cfg)?;
    std::io::stdout().write_all(&formats::table_csv(&reports))?;
    if let Some(dir) = dump {
        std::fs::create_dir_all(&dir)?;
        let tc = TrotterConfig {
            dt: cfg.dt,
            term_order: term_order(&cfg.term_order)?,
            use_rzz: true,
        };
        for phi in cfg.phis()? {
            let model = PreparedModel::new(&cfg.model_params(phi)?)?;
            let step = compile_trotter_step(&model.pauli, &tc, &cfg.timings())?;
            write_atomic(
                &dir.join(format!("trotter_phi{phi:.8}.txt")),
                formats::circuit_to_text(&step.flatten()).as_bytes(),
            )?;
            write_atomic(
                &dir.join(format!("hamiltonian_phi{phi:.8}.json")),
                formats::hamiltonian_to_json(&model.pauli).as_bytes(),
            )?;
        }
    }
    Ok(0)
}
