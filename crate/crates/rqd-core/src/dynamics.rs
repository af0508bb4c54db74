// SPDX-License-Identifier: Apache-2.0

//! Propagation strategies (exact, noisy Trotter, restarted dynamics with
//! either ansatz) and the imbalance observable.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ansatz::{build_ansatz_circuit, initial_occupied_qubits, ALayout, AnsatzSpec};
use crate::circuit::{apply_circuit, invert, lower, GateTimings};
use crate::linalg::{bit, HermitianEigen, StateVector};
use crate::model::{build_aubry_andre, jordan_wigner, ModelParams, PauliHamiltonian};
use crate::noise::{DensityMatrix, NoiseParams, NoisyProgram};
use crate::optimizer::{FidelityMode, IterRecord, LbfgsConfig, ObjectiveContext};
use crate::schedule::{schedule, LayeredCircuit};
use crate::trotter::{trotter_step, TermOrder, TrotterConfig};
use crate::{Error, Result};

/// Largest register the exact reference handles.
pub const MAX_EXACT_QUBITS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Trotter,
    RqdNumber,
    RqdOracle,
    Exact,
}

impl Strategy {
    pub const ALL: [Self; 4] = [Self::Trotter, Self::RqdNumber, Self::RqdOracle, Self::Exact];

    pub fn name(self) -> &'static str {
        match self {
            Self::Trotter => "trotter",
            Self::RqdNumber => "rqd_number",
            Self::RqdOracle => "rqd_oracle",
            Self::Exact => "exact",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub dt: f64,
    pub num_steps: usize,
    pub noise: NoiseParams,
    pub strategy: Strategy,
    pub steps_per_restart: usize,
    pub optimizer: LbfgsConfig,
    pub fidelity_mode: FidelityMode,
    pub timings: GateTimings,
    pub term_order: TermOrder,
    pub layout: ALayout,
    /// Half-width of a uniform perturbation of the first restart's zero
    /// starting point; `0` starts exactly at zero.
    pub initial_jitter: f64,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(
        model: ModelParams,
        strategy: Strategy,
        num_steps: usize,
        noise: NoiseParams,
    ) -> Self {
        Self {
            model,
            dt: 0.04,
            num_steps,
            noise,
            strategy,
            steps_per_restart: 1,
            optimizer: LbfgsConfig::DEFAULT,
            fidelity_mode: FidelityMode::default(),
            timings: GateTimings::DEFAULT,
            term_order: TermOrder::default(),
            layout: ALayout::default(),
            initial_jitter: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.noise.validate()?;
        self.optimizer.validate()?;
        self.timings.validate()?;
        self.trotter().validate()?;
        if self.num_steps == 0 {
            return Err(Error::InvalidConfig("num_steps must be at least 1".into()));
        }
        if self.steps_per_restart == 0 {
            return Err(Error::InvalidConfig(
                "steps_per_restart must be at least 1".into(),
            ));
        }
        if !(self.initial_jitter >= 0.0 && self.initial_jitter.is_finite()) {
            return Err(Error::InvalidConfig(
                "initial_jitter must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn trotter(&self) -> TrotterConfig {
        TrotterConfig {
            dt: self.dt,
            term_order: self.term_order,
            use_rzz: true,
        }
    }
}

/// One time slice of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub imbalance: f64,
    /// `<ψ_exact(t)|ρ|ψ_exact(t)>` for the state the device holds.
    pub fidelity_noisy: f64,
    /// Same overlap for the noise-free counterpart of that state.
    pub fidelity_pure: f64,
    /// Optimizer outcome of the restart ending at this slice.
    pub optimizer: Option<RestartInfo>,
    /// Device time spent on circuits up to this slice.
    pub cum_circuit_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartInfo {
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub function_evals: usize,
    pub params: Vec<f64>,
    pub trace: Vec<IterRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RqdTrajectory {
    pub strategy: Strategy,
    pub phi: f64,
    /// Wall-clock duration of one compiled Trotter step.
    pub step_duration_ms: f64,
    /// Starts at `t = 0`.
    pub records: Vec<StepRecord>,
}

/// Model Hamiltonian in both representations plus its spectrum.
#[derive(Debug, Clone)]
pub struct PreparedModel {
    pub pauli: PauliHamiltonian,
    pub eigen: Arc<HermitianEigen>,
}

impl PreparedModel {
    pub fn new(model: &ModelParams) -> Result<Self> {
        model.validate()?;
        let n = model.num_sites;
        if n > MAX_EXACT_QUBITS {
            return Err(Error::TooLarge {
                num_qubits: n,
                max: MAX_EXACT_QUBITS,
            });
        }
        let pauli = jordan_wigner(&build_aubry_andre(model), n)?;
        let eigen = Arc::new(HermitianEigen::new(&pauli.to_dense()?)?);
        Ok(Self { pauli, eigen })
    }

    pub fn num_qubits(&self) -> usize {
        self.pauli.num_qubits
    }
}

/// Charge density wave `|1010…>`.
pub fn initial_state(num_qubits: usize) -> StateVector {
    let occ: Vec<bool> = (0..num_qubits).map(|q| q % 2 == 0).collect();
    StateVector::from_occupations(&occ)
}

/// Lowered and scheduled Trotter step.
pub fn compile_trotter_step(
    ph: &PauliHamiltonian,
    cfg: &TrotterConfig,
    timings: &GateTimings,
) -> Result<LayeredCircuit> {
    Ok(schedule(&lower(&trotter_step(ph, cfg, timings)?, timings)?))
}

fn imbalance_from(n: usize, population: impl Fn(usize) -> f64) -> f64 {
    let (mut even, mut odd) = (0.0, 0.0);
    for i in 0..1usize << n {
        let p = population(i);
        if p == 0.0 {
            continue;
        }
        for q in 0..n {
            if i & bit(n, q) != 0 {
                // Qubit q carries site q + 1.
                if q % 2 == 1 {
                    even += p;
                } else {
                    odd += p;
                }
            }
        }
    }
    let total = even + odd;
    if total < 1e-12 {
        0.0
    } else {
        (even - odd) / total
    }
}

/// `(N_e - N_o) / (N_e + N_o)` over 1-indexed sites; zero for an empty
/// lattice.
pub fn imbalance(rho: &DensityMatrix) -> f64 {
    imbalance_from(rho.num_qubits(), |i| rho.population(i))
}

pub fn imbalance_pure(psi: &StateVector) -> f64 {
    imbalance_from(psi.num_qubits(), |i| psi.amplitudes()[i].norm_sqr())
}

fn exact_state(eigen: &HermitianEigen, psi0: &StateVector, t: f64) -> StateVector {
    StateVector::new(psi0.num_qubits(), eigen.evolve(psi0.amplitudes(), t))
        .expect("dimension preserved")
}

fn overlap_sq(a: &StateVector, b: &StateVector) -> f64 {
    let s: Complex64 = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .sum();
    s.norm_sqr()
}

fn time(cfg: &RunConfig, k: usize) -> f64 {
    k as f64 * cfg.dt
}

pub fn exact_trajectory(cfg: &RunConfig) -> Result<RqdTrajectory> {
    cfg.validate()?;
    let pm = PreparedModel::new(&cfg.model)?;
    exact_with(cfg, &pm)
}

fn exact_with(cfg: &RunConfig, pm: &PreparedModel) -> Result<RqdTrajectory> {
    let psi0 = initial_state(pm.num_qubits());
    let records = (0..=cfg.num_steps)
        .map(|k| {
            let psi = exact_state(&pm.eigen, &psi0, time(cfg, k));
            StepRecord {
                t: time(cfg, k),
                imbalance: imbalance_pure(&psi),
                fidelity_noisy: 1.0,
                fidelity_pure: 1.0,
                optimizer: None,
                cum_circuit_ms: 0.0,
            }
        })
        .collect();
    Ok(RqdTrajectory {
        strategy: Strategy::Exact,
        phi: cfg.model.phi,
        step_duration_ms: 0.0,
        records,
    })
}

pub fn run_trotter(cfg: &RunConfig) -> Result<RqdTrajectory> {
    cfg.validate()?;
    let pm = PreparedModel::new(&cfg.model)?;
    trotter_with(cfg, &pm)
}

fn trotter_with(cfg: &RunConfig, pm: &PreparedModel) -> Result<RqdTrajectory> {
    let n = pm.num_qubits();
    let lc = compile_trotter_step(&pm.pauli, &cfg.trotter(), &cfg.timings)?;
    let step_ms = lc.total_duration_ms();
    let program = NoisyProgram::new(&lc)?;
    let step_circuit = lc.flatten();

    let psi0 = initial_state(n);
    let mut rho = DensityMatrix::from_pure(&psi0);
    let mut psi = psi0.clone();
    let mut records = Vec::with_capacity(cfg.num_steps + 1);
    records.push(StepRecord {
        t: 0.0,
        imbalance: imbalance(&rho),
        fidelity_noisy: 1.0,
        fidelity_pure: 1.0,
        optimizer: None,
        cum_circuit_ms: 0.0,
    });
    for k in 1..=cfg.num_steps {
        program.run(&mut rho, &cfg.noise)?;
        psi = apply_circuit(&step_circuit, &psi)?;
        let exact = exact_state(&pm.eigen, &psi0, time(cfg, k));
        records.push(StepRecord {
            t: time(cfg, k),
            imbalance: imbalance(&rho),
            fidelity_noisy: rho.fidelity_with_pure(&exact)?,
            fidelity_pure: overlap_sq(&exact, &psi),
            optimizer: None,
            cum_circuit_ms: k as f64 * step_ms,
        });
    }
    Ok(RqdTrajectory {
        strategy: Strategy::Trotter,
        phi: cfg.model.phi,
        step_duration_ms: step_ms,
        records,
    })
}

/// Ansatz for an RQD strategy.
pub fn ansatz_for(cfg: &RunConfig, pm: &PreparedModel) -> Result<AnsatzSpec> {
    let n = pm.num_qubits();
    match cfg.strategy {
        Strategy::RqdNumber => Ok(AnsatzSpec::number_conserving(n, cfg.layout, cfg.timings)),
        Strategy::RqdOracle => Ok(AnsatzSpec::oracle_from_eigen(
            Arc::clone(&pm.eigen),
            n,
            cfg.timings,
        )),
        _ => Err(Error::InvalidConfig("strategy has no ansatz".into())),
    }
}

fn initial_params(cfg: &RunConfig, count: usize) -> Vec<f64> {
    if cfg.initial_jitter == 0.0 {
        return vec![0.0; count];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..count)
        .map(|_| {
            let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            (2.0 * u - 1.0) * cfg.initial_jitter
        })
        .collect()
}

/// Noisy preparation of the ansatz state from `|0…0>`.
fn prepare(
    spec: &AnsatzSpec,
    params: &[f64],
    noise: &NoiseParams,
) -> Result<(DensityMatrix, StateVector, f64)> {
    let c = build_ansatz_circuit(spec, params)?;
    let lc = schedule(&c);
    let mut rho = DensityMatrix::zero_state(spec.num_qubits);
    NoisyProgram::new(&lc)?.run(&mut rho, noise)?;
    let psi = apply_circuit(&c, &StateVector::zero_state(spec.num_qubits))?;
    Ok((rho, psi, lc.total_duration_ms()))
}

/// Duration of the inverse ansatz, which the fidelity measurement appends.
fn inverse_duration_ms(spec: &AnsatzSpec, params: &[f64]) -> Result<f64> {
    Ok(schedule(&invert(&build_ansatz_circuit(spec, params)?)?).total_duration_ms())
}

pub fn run_rqd(cfg: &RunConfig) -> Result<RqdTrajectory> {
    cfg.validate()?;
    let pm = PreparedModel::new(&cfg.model)?;
    rqd_with(cfg, &pm)
}

/// Restart loop: prepare the ansatz, take `steps_per_restart` noisy Trotter
/// steps, refit the ansatz to the result, and warm-start from the new
/// optimum. Records are emitted at restart boundaries.
fn rqd_with(cfg: &RunConfig, pm: &PreparedModel) -> Result<RqdTrajectory> {
    let spec = ansatz_for(cfg, pm)?;
    let lc = compile_trotter_step(&pm.pauli, &cfg.trotter(), &cfg.timings)?;
    let step_ms = lc.total_duration_ms();
    let program = NoisyProgram::new(&lc)?;
    let psi0 = initial_state(pm.num_qubits());

    let mut params = initial_params(cfg, spec.num_parameters());
    let (mut rho, psi, _) = prepare(&spec, &params, &cfg.noise)?;
    let mut records = vec![StepRecord {
        t: 0.0,
        imbalance: imbalance(&rho),
        fidelity_noisy: rho.fidelity_with_pure(&psi0)?,
        fidelity_pure: overlap_sq(&psi0, &psi),
        optimizer: None,
        cum_circuit_ms: 0.0,
    }];

    let mut cum_ms = 0.0;
    let mut k = 0;
    while k < cfg.num_steps {
        let steps = cfg.steps_per_restart.min(cfg.num_steps - k);
        // `rho` already holds the prepared ansatz state; its preparation
        // time is charged to this restart.
        let prep_ms = schedule(&build_ansatz_circuit(&spec, &params)?).total_duration_ms();
        for _ in 0..steps {
            program.run(&mut rho, &cfg.noise)?;
        }
        k += steps;

        let ctx = ObjectiveContext {
            stepped_state: rho,
            ansatz: spec.clone(),
            noise: cfg.noise,
            fidelity_mode: cfg.fidelity_mode,
        };
        let res = ctx.optimize(&params, &cfg.optimizer)?;
        if !res.converged {
            log::debug!(
                "restart at t={:.3} stopped after {} iterations, objective {:.3e}",
                time(cfg, k),
                res.iterations,
                res.objective_value
            );
        }
        cum_ms += prep_ms + steps as f64 * step_ms + inverse_duration_ms(&spec, &res.params)?;
        params = res.params.clone();

        let (next, psi, _) = prepare(&spec, &params, &cfg.noise)?;
        rho = next;
        let exact = exact_state(&pm.eigen, &psi0, time(cfg, k));
        records.push(StepRecord {
            t: time(cfg, k),
            imbalance: imbalance(&rho),
            fidelity_noisy: rho.fidelity_with_pure(&exact)?,
            fidelity_pure: overlap_sq(&exact, &psi),
            optimizer: Some(RestartInfo {
                objective: res.objective_value,
                iterations: res.iterations,
                converged: res.converged,
                function_evals: res.function_evals,
                params: res.params,
                trace: res.trace,
            }),
            cum_circuit_ms: cum_ms,
        });
    }
    Ok(RqdTrajectory {
        strategy: cfg.strategy,
        phi: cfg.model.phi,
        step_duration_ms: step_ms,
        records,
    })
}

/// Dispatches on `cfg.strategy`.
pub fn run(cfg: &RunConfig) -> Result<RqdTrajectory> {
    cfg.validate()?;
    let pm = PreparedModel::new(&cfg.model)?;
    run_prepared(cfg, &pm)
}

/// As [`run`], reusing a model prepared for `cfg.model`.
pub fn run_prepared(cfg: &RunConfig, pm: &PreparedModel) -> Result<RqdTrajectory> {
    cfg.validate()?;
    match cfg.strategy {
        Strategy::Exact => exact_with(cfg, pm),
        Strategy::Trotter => trotter_with(cfg, pm),
        Strategy::RqdNumber | Strategy::RqdOracle => rqd_with(cfg, pm),
    }
}

/// Pointwise mean over runs.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedTrajectory {
    pub t: Vec<f64>,
    pub imbalance: Vec<f64>,
    pub fidelity_noisy: Vec<f64>,
    pub fidelity_pure: Vec<f64>,
}

pub fn average_over_phi(runs: &[RqdTrajectory]) -> Result<AveragedTrajectory> {
    let first = runs
        .first()
        .ok_or(Error::ConfigMismatch("no runs to average"))?;
    let len = first.records.len();
    for r in runs {
        if r.records.len() != len {
            return Err(Error::ConfigMismatch("runs have different lengths"));
        }
        if r.records
            .iter()
            .zip(&first.records)
            .any(|(a, b)| (a.t - b.t).abs() > 1e-9)
        {
            return Err(Error::ConfigMismatch("runs have different time grids"));
        }
    }
    let m = runs.len() as f64;
    let mean = |f: fn(&StepRecord) -> f64| -> Vec<f64> {
        (0..len)
            .map(|i| runs.iter().map(|r| f(&r.records[i])).sum::<f64>() / m)
            .collect()
    };
    Ok(AveragedTrajectory {
        t: first.records.iter().map(|r| r.t).collect(),
        imbalance: mean(|r| r.imbalance),
        fidelity_noisy: mean(|r| r.fidelity_noisy),
        fidelity_pure: mean(|r| r.fidelity_pure),
    })
}

/// Occupied qubits of the initial state; re-exported for callers that build
/// their own preparation circuits.
pub fn initial_occupation(num_qubits: usize) -> Vec<usize> {
    initial_occupied_qubits(num_qubits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn imbalance_of_density_waves() {
        assert_eq!(imbalance(&DensityMatrix::basis_state(6, 0b101010)), -1.0);
        assert_eq!(imbalance(&DensityMatrix::basis_state(6, 0b010101)), 1.0);
        assert_eq!(imbalance(&DensityMatrix::zero_state(6)), 0.0);
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(Strategy::from_name(s.name()), Some(s));
        }
    }

    #[test]
    fn exact_conserves_particles() {
        let cfg = RunConfig::new(
            ModelParams::localized(4, 0.5),
            Strategy::Exact,
            10,
            NoiseParams::disabled(),
        );
        let tr = exact_trajectory(&cfg).unwrap();
        assert_eq!(tr.records.len(), 11);
        assert_eq!(tr.records[0].imbalance, -1.0);
    }

    #[test]
    fn averaging_rejects_mismatched_runs() {
        let a = exact_trajectory(&RunConfig::new(
            ModelParams::localized(2, 0.1),
            Strategy::Exact,
            3,
            NoiseParams::disabled(),
        ))
        .unwrap();
        let mut b = a.clone();
        b.records.pop();
        assert!(average_over_phi(&[a.clone(), b]).is_err());
        assert!(average_over_phi(&[]).is_err());
        let avg = average_over_phi(core::slice::from_ref(&a)).unwrap();
        assert_eq!(
            avg.imbalance,
            a.records.iter().map(|r| r.imbalance).collect::<Vec<_>>()
        );
    }

    #[test]
    fn jitter_is_seeded() {
        let mut cfg = RunConfig::new(
            ModelParams::localized(4, 0.5),
            Strategy::RqdNumber,
            1,
            NoiseParams::disabled(),
        );
        cfg.initial_jitter = 0.1;
        let a = initial_params(&cfg, 5);
        assert_eq!(a, initial_params(&cfg, 5));
        assert!(a.iter().all(|v| v.abs() <= 0.1));
        cfg.seed = 1;
        assert_ne!(a, initial_params(&cfg, 5));
    }
}
