// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration, presets and their validation.

use std::path::{Path, PathBuf};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rqd_core::ansatz::ALayout;
use rqd_core::circuit::GateTimings;
use rqd_core::dynamics::{RunConfig, Strategy};
use rqd_core::model::{ModelParams, SiteIndexing};
use rqd_core::noise::NoiseParams;
use rqd_core::optimizer::{FidelityMode, LbfgsConfig};
use rqd_core::trotter::TermOrder;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::Error;

/// JSON Schema every configuration document must satisfy.
pub const SCHEMA: &str = include_str!("../schema/config.schema.json");

/// Fallback for `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "RQD_OUTPUT_DIR";

/// Directory used when neither the config nor the environment names one.
pub const DEFAULT_OUTPUT_DIR: &str = "rqd-output";

/// The sixteen disorder phases of the reference circuit table.
pub const TABLE_PHIS: [f64; 16] = [
    1.93146731, 5.64240529, 1.57973617, 0.08769829, 4.42879993, 1.59366522, 1.69972758, 3.26279226,
    6.09740422, 3.34460202, 3.26276960, 4.52159699, 2.94545992, 4.71502552, 1.08255072, 4.85940981,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub num_sites: usize,
    pub hopping: f64,
    pub interaction: f64,
    pub disorder: f64,
    pub beta: f64,
    /// `"one-based"` (default) or `"zero-based"` site index in the cosine.
    pub site_indexing: String,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            num_sites: 6,
            hopping: 1.0,
            interaction: 4.0,
            disorder: 4.0,
            beta: std::f64::consts::SQRT_2,
            site_indexing: "one-based".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimingConfig {
    pub single_qubit_ns: f64,
    pub two_qubit_ns: f64,
    pub oracle_ns: f64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        let t = GateTimings::DEFAULT;
        Self {
            single_qubit_ns: t.single_qubit_ns,
            two_qubit_ns: t.two_qubit_ns,
            oracle_ns: t.oracle_ns,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub dephasing_prefactor: f64,
    pub idle_decoherence: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            dephasing_prefactor: 1.0,
            idle_decoherence: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub history: usize,
    pub fd_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        let d = LbfgsConfig::DEFAULT;
        Self {
            tol: d.tol,
            max_iter: d.max_iter,
            history: d.history,
            fd_step: d.fd_step,
        }
    }
}

/// Either an explicit list, `"table"` for the sixteen reference phases, or
/// `"random:k:seed"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhiList {
    Values(Vec<f64>),
    Spec(String),
}

impl Default for PhiList {
    fn default() -> Self {
        Self::Spec("table".into())
    }
}

impl PhiList {
    pub fn resolve(&self) -> Result<Vec<f64>, Error> {
        match self {
            Self::Values(v) => Ok(v.clone()),
            Self::Spec(s) if s == "table" => Ok(TABLE_PHIS.to_vec()),
            Self::Spec(s) => {
                let parts: Vec<&str> = s.split(':').collect();
                let bad = || Error::Config(format!("unrecognised phi_list {s:?}"));
                if parts.len() != 3 || parts[0] != "random" {
                    return Err(bad());
                }
                let k: usize = parts[1].parse().map_err(|_| bad())?;
                let seed: u64 = parts[2].parse().map_err(|_| bad())?;
                Ok(random_phis(k, seed))
            }
        }
    }
}

/// `k` phases uniform in `[0, 2π)` from a seeded ChaCha8 stream, so that
/// `random:k:seed` means the same list on every platform.
fn random_phis(k: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * std::f64::consts::TAU)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub phi_list: PhiList,
    pub dt: f64,
    pub t_max: f64,
    /// `T1 = T2*` in ms per noisy sweep point; `null` disables noise.
    pub coherence_list: Vec<Option<f64>>,
    pub strategies: Vec<String>,
    pub output_dir: Option<String>,
    pub parallelism: usize,
    pub steps_per_restart: usize,
    pub fidelity_mode: String,
    pub term_order: String,
    pub timings: TimingConfig,
    pub noise: NoiseConfig,
    pub optimizer: OptimizerConfig,
    /// Half-width of a uniform perturbation of the first restart's start.
    pub initial_jitter: f64,
    pub seed: u64,
    /// Write per-restart optimizer traces next to the trajectories.
    pub verbose: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::default(),
            phi_list: PhiList::default(),
            dt: 0.04,
            t_max: 5.0,
            coherence_list: vec![Some(25.0)],
            strategies: Strategy::ALL.iter().map(|s| s.name().to_string()).collect(),
            output_dir: None,
            parallelism: 1,
            steps_per_restart: 1,
            fidelity_mode: FidelityMode::default().name().into(),
            term_order: TermOrder::default().name().into(),
            timings: TimingConfig::default(),
            noise: NoiseConfig::default(),
            optimizer: OptimizerConfig::default(),
            initial_jitter: 0.0,
            seed: 0,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    PaperFig2,
    PaperFig3,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Self::PaperFig2 => "paper-fig2",
            Self::PaperFig3 => "paper-fig3",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Self::PaperFig2, Self::PaperFig3]
            .into_iter()
            .find(|p| p.name() == s)
    }

    pub fn config(self) -> ExperimentConfig {
        match self {
            Self::PaperFig2 => ExperimentConfig::default(),
            Self::PaperFig3 => ExperimentConfig {
                // Nine half-decade points from 0.25 to 2500 ms.
                coherence_list: (0..9)
                    .map(|k| Some(0.25 * 10f64.powf(k as f64 / 2.0)))
                    .collect(),
                strategies: vec!["trotter".into(), "rqd_number".into(), "rqd_oracle".into()],
                ..ExperimentConfig::default()
            },
        }
    }
}

/// One (strategy, φ, coherence) run of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub strategy: Strategy,
    pub phi: f64,
    pub t1_ms: Option<f64>,
}

impl ExperimentConfig {
    /// Parses and schema-checks a JSON document.
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self, Error> {
        check_schema(&value)?;
        let cfg: Self = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file, or the config echoed inside a run manifest.
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        match value {
            Value::Object(mut m) if m.contains_key("code_version") && m.contains_key("config") => {
                Self::from_value(m.remove("config").expect("checked above"))
            }
            v => Self::from_value(v),
        }
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// Reduced variant: four sites, five steps, the first two phases.
    pub fn smoke(mut self) -> Result<Self, Error> {
        self.model.num_sites = 4;
        self.t_max = 5.0 * self.dt;
        let phis = self.phi_list.resolve()?;
        self.phi_list = PhiList::Values(phis.into_iter().take(2).collect());
        Ok(self)
    }

    pub fn num_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    pub fn phis(&self) -> Result<Vec<f64>, Error> {
        self.phi_list.resolve()
    }

    pub fn strategies(&self) -> Result<Vec<Strategy>, Error> {
        self.strategies
            .iter()
            .map(|s| {
                Strategy::from_name(s)
                    .ok_or_else(|| Error::Config(format!("unknown strategy {s:?}")))
            })
            .collect()
    }

    /// `output_dir`, then `$RQD_OUTPUT_DIR`, then [`DEFAULT_OUTPUT_DIR`].
    pub fn resolve_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var(OUTPUT_DIR_ENV).ok().filter(|s| !s.is_empty()))
            .unwrap_or_else(|| DEFAULT_OUTPUT_DIR.into())
            .into()
    }

    pub fn model_params(&self, phi: f64) -> Result<ModelParams, Error> {
        let indexing = match self.model.site_indexing.as_str() {
            "one-based" => SiteIndexing::OneBased,
            "zero-based" => SiteIndexing::ZeroBased,
            s => return Err(Error::Config(format!("unknown site_indexing {s:?}"))),
        };
        Ok(ModelParams {
            num_sites: self.model.num_sites,
            hopping: self.model.hopping,
            disorder: self.model.disorder,
            interaction: self.model.interaction,
            beta: self.model.beta,
            phi,
            indexing,
        })
    }

    pub fn timings(&self) -> GateTimings {
        GateTimings {
            single_qubit_ns: self.timings.single_qubit_ns,
            two_qubit_ns: self.timings.two_qubit_ns,
            oracle_ns: self.timings.oracle_ns,
        }
    }

    pub fn noise_params(&self, t1_ms: Option<f64>) -> NoiseParams {
        match t1_ms {
            Some(t) => NoiseParams {
                dephasing_prefactor: self.noise.dephasing_prefactor,
                idle_decoherence: self.noise.idle_decoherence,
                ..NoiseParams::uniform(t)
            },
            None => NoiseParams::disabled(),
        }
    }

    /// All runs of the sweep, strategy-major.
    pub fn jobs(&self) -> Result<Vec<Job>, Error> {
        let phis = self.phis()?;
        let mut jobs = Vec::new();
        for strategy in self.strategies()? {
            for &phi in &phis {
                for &t1_ms in &self.coherence_list {
                    jobs.push(Job {
                        strategy,
                        phi,
                        t1_ms,
                    });
                }
            }
        }
        Ok(jobs)
    }

    pub fn run_config(&self, job: &Job) -> Result<RunConfig, Error> {
        let mut rc = RunConfig::new(
            self.model_params(job.phi)?,
            job.strategy,
            self.num_steps(),
            self.noise_params(job.t1_ms),
        );
        rc.dt = self.dt;
        rc.steps_per_restart = self.steps_per_restart;
        rc.optimizer = LbfgsConfig {
            tol: self.optimizer.tol,
            max_iter: self.optimizer.max_iter,
            history: self.optimizer.history,
            fd_step: self.optimizer.fd_step,
            ..LbfgsConfig::DEFAULT
        };
        rc.fidelity_mode = FidelityMode::from_name(&self.fidelity_mode).ok_or_else(|| {
            Error::Config(format!("unknown fidelity_mode {:?}", self.fidelity_mode))
        })?;
        rc.timings = self.timings();
        rc.term_order = term_order(&self.term_order)?;
        rc.layout = ALayout::BrickWallV1;
        rc.initial_jitter = self.initial_jitter;
        rc.seed = self.seed;
        rc.validate()?;
        Ok(rc)
    }

    /// Semantic checks beyond the schema: every referenced name resolves and
    /// every run's parameters are valid.
    pub fn validate(&self) -> Result<(), Error> {
        if self.dt.is_nan() || self.dt <= 0.0 || self.t_max.is_nan() || self.t_max <= 0.0 {
            return Err(Error::Config("dt and t_max must be positive".into()));
        }
        let steps = self.t_max / self.dt;
        if (steps - steps.round()).abs() > 1e-6 || steps.round() < 1.0 {
            return Err(Error::Config(
                "t_max must be a positive multiple of dt".into(),
            ));
        }
        if self.parallelism == 0 {
            return Err(Error::Config("parallelism must be at least 1".into()));
        }
        if self.coherence_list.is_empty() || self.strategies.is_empty() {
            return Err(Error::Config(
                "coherence_list and strategies must be non-empty".into(),
            ));
        }
        let phis = self.phis()?;
        if phis.is_empty() {
            return Err(Error::Config("phi_list is empty".into()));
        }
        self.strategies()?;
        for &phi in &phis {
            for &t1_ms in &self.coherence_list {
                self.run_config(&Job {
                    strategy: Strategy::Trotter,
                    phi,
                    t1_ms,
                })?;
            }
        }
        Ok(())
    }
}

pub fn term_order(name: &str) -> Result<TermOrder, Error> {
    [TermOrder::AsConstructed, TermOrder::SortedBySupport]
        .into_iter()
        .find(|o| o.name() == name)
        .ok_or_else(|| Error::Config(format!("unknown term_order {name:?}")))
}

/// Checks `value` against [`SCHEMA`].
pub fn check_schema(value: &Value) -> Result<(), Error> {
    let schema: Value = serde_json::from_str(SCHEMA).expect("bundled schema is valid JSON");
    let validator = jsonschema::validator_for(&schema).expect("bundled schema compiles");
    let errors: Vec<String> = validator
        .iter_errors(value)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "schema violation: {}",
            errors.join("; ")
        )))
    }
}
