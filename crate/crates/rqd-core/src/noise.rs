// SPDX-License-Identifier: Apache-2.0

//! Density-matrix simulation of a T1/T2* noisy device.
//!
//! Gates are instantaneous and perfect. After every layer each qubit evolves
//! under amplitude damping at rate `1/T1` and pure dephasing at rate
//! `κ/T2*` for the layer's duration, using the closed-form channel rather than
//! integrating the master equation.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::circuit::{gate_matrix, Gate};
use crate::linalg::{bit, ComplexMatrix, LocalOp, StateVector};
use crate::math;
use crate::schedule::LayeredCircuit;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Deviation of the trace from one above which a state is renormalized.
pub const TRACE_RENORMALIZE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub t1_ms: f64,
    pub t2s_ms: f64,
    pub enabled: bool,
    /// `κ` in the coherence decay `exp(-τ(1/(2 T1) + κ/T2*))`.
    pub dephasing_prefactor: f64,
    /// Qubits untouched by a layer still decohere for its duration.
    pub idle_decoherence: bool,
}

impl NoiseParams {
    pub fn new(t1_ms: f64, t2s_ms: f64) -> Self {
        Self {
            t1_ms,
            t2s_ms,
            enabled: true,
            dephasing_prefactor: 1.0,
            idle_decoherence: true,
        }
    }

    /// `T1 = T2* = t`.
    pub fn uniform(t_ms: f64) -> Self {
        Self::new(t_ms, t_ms)
    }

    pub fn disabled() -> Self {
        Self {
            enabled: false,
            ..Self::new(f64::INFINITY, f64::INFINITY)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.enabled {
            return Ok(());
        }
        if self.t1_ms.is_nan() || self.t1_ms <= 0.0 {
            return Err(Error::InvalidNoiseParams("T1 must be positive"));
        }
        if self.t2s_ms.is_nan() || self.t2s_ms <= 0.0 {
            return Err(Error::InvalidNoiseParams("T2* must be positive"));
        }
        if !self.dephasing_prefactor.is_finite() || self.dephasing_prefactor < 0.0 {
            return Err(Error::InvalidNoiseParams(
                "dephasing prefactor must be non-negative",
            ));
        }
        Ok(())
    }

    /// `(γ, c)`: population decay `γ = 1 - e^{-τ/T1}` and coherence factor `c`.
    fn factors(&self, tau_ms: f64) -> (f64, f64) {
        let gamma = 1.0 - math::exp(-tau_ms / self.t1_ms);
        let rate = 0.5 / self.t1_ms + self.dephasing_prefactor / self.t2s_ms;
        (gamma, math::exp(-tau_ms * rate))
    }
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self::uniform(25.0)
    }
}

/// Kraus operators of amplitude damping with decay probability `gamma`.
pub fn amplitude_damping_kraus(gamma: f64) -> [ComplexMatrix; 2] {
    let z = ZERO;
    let c = |x: f64| Complex64::new(x, 0.0);
    [
        ComplexMatrix::from_rows(&[[c(1.0), z], [z, c(math::sqrt(1.0 - gamma))]]),
        ComplexMatrix::from_rows(&[[z, c(math::sqrt(gamma))], [z, z]]),
    ]
}

/// Kraus operators of phase damping with parameter `lambda`.
pub fn phase_damping_kraus(lambda: f64) -> [ComplexMatrix; 2] {
    let z = ZERO;
    let c = |x: f64| Complex64::new(x, 0.0);
    [
        ComplexMatrix::from_rows(&[[c(1.0), z], [z, c(math::sqrt(1.0 - lambda))]]),
        ComplexMatrix::from_rows(&[[z, z], [z, c(math::sqrt(lambda))]]),
    ]
}

/// Row-major `2^N × 2^N` density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        let dim = a.len();
        let mut data = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = a[r] * a[c].conj();
            }
        }
        Self {
            num_qubits: psi.num_qubits(),
            data,
        }
    }

    pub fn basis_state(num_qubits: usize, index: usize) -> Self {
        let dim = 1usize << num_qubits;
        let mut data = vec![ZERO; dim * dim];
        data[index * dim + index] = Complex64::new(1.0, 0.0);
        Self { num_qubits, data }
    }

    pub fn zero_state(num_qubits: usize) -> Self {
        Self::basis_state(num_qubits, 0)
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Self { num_qubits, data }
    }

    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        let dim = m.rows();
        if !m.is_square() || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: dim.next_power_of_two(),
                found: m.cols(),
            });
        }
        Ok(Self {
            num_qubits: dim.trailing_zeros() as usize,
            data: m.data().to_vec(),
        })
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let dim = self.dim();
        ComplexMatrix::new(dim, dim, self.data.clone()).expect("square buffer")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim() + c]
    }

    pub fn trace(&self) -> f64 {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i].re).sum()
    }

    /// `<i|ρ|i>`
    pub fn population(&self, index: usize) -> f64 {
        self.get(index, index).re
    }

    /// `<ψ|ρ|ψ>`
    pub fn fidelity_with_pure(&self, psi: &StateVector) -> Result<f64> {
        let dim = self.dim();
        if psi.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: psi.dim(),
            });
        }
        let a = psi.amplitudes();
        let mut acc = ZERO;
        for r in 0..dim {
            if a[r] == ZERO {
                continue;
            }
            let row = &self.data[r * dim..(r + 1) * dim];
            let rho_a: Complex64 = row.iter().zip(a).map(|(x, y)| x * y).sum();
            acc += a[r].conj() * rho_a;
        }
        Ok(acc.re)
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ.
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max(math::cabs(
                    self.data[r * dim + c] - self.data[c * dim + r].conj(),
                ));
            }
        }
        worst
    }

    /// `ρ <- U ρ U†` for a gate on `targets`.
    pub fn apply_unitary(&mut self, u: &ComplexMatrix, targets: &[usize]) -> Result<()> {
        let op = LocalOp::new(u, targets, self.num_qubits)?;
        let dim = self.dim();
        op.conjugate_density(&mut self.data, dim);
        Ok(())
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        self.apply_unitary(&gate_matrix(g)?, &g.targets)
    }

    /// Divides by the trace when it has drifted beyond
    /// [`TRACE_RENORMALIZE_TOL`]; returns whether it did.
    pub fn renormalize_if_needed(&mut self) -> bool {
        let tr = self.trace();
        if (tr - 1.0).abs() <= TRACE_RENORMALIZE_TOL || tr <= 0.0 {
            return false;
        }
        log::warn!("renormalizing density matrix with trace {tr:.12}");
        let s = 1.0 / tr;
        for z in &mut self.data {
            *z *= s;
        }
        true
    }

    /// Per-qubit decay over `tau_ms` on the qubits selected by `which`.
    fn decohere_qubits(
        &mut self,
        which: impl Iterator<Item = usize>,
        tau_ms: f64,
        np: &NoiseParams,
    ) {
        if !np.enabled || tau_ms == 0.0 {
            return;
        }
        let (gamma, coh) = np.factors(tau_ms);
        let keep = 1.0 - gamma;
        let n = self.num_qubits;
        let dim = self.dim();
        let d = &mut self.data;
        for q in which {
            let m = bit(n, q);
            for r in (0..dim).filter(|r| r & m == 0) {
                let (r0, r1) = (r * dim, (r | m) * dim);
                for c in (0..dim).filter(|c| c & m == 0) {
                    let c1 = c | m;
                    let p11 = d[r1 + c1];
                    d[r0 + c] += p11 * gamma;
                    d[r1 + c1] = p11 * keep;
                    d[r0 + c1] *= coh;
                    d[r1 + c] *= coh;
                }
            }
        }
    }
}

impl DensityMatrix {
    /// Heisenberg-picture counterpart of `decohere_qubits`: for an
    /// observable `M`, `Tr[M D(ρ)] = Tr[D†(M) ρ]`.
    fn decohere_adjoint_qubits(
        &mut self,
        which: impl Iterator<Item = usize>,
        tau_ms: f64,
        np: &NoiseParams,
    ) {
        if !np.enabled || tau_ms == 0.0 {
            return;
        }
        let (gamma, coh) = np.factors(tau_ms);
        let keep = 1.0 - gamma;
        let n = self.num_qubits;
        let dim = self.dim();
        let d = &mut self.data;
        for q in which {
            let m = bit(n, q);
            for r in (0..dim).filter(|r| r & m == 0) {
                let (r0, r1) = (r * dim, (r | m) * dim);
                for c in (0..dim).filter(|c| c & m == 0) {
                    let c1 = c | m;
                    d[r1 + c1] = d[r1 + c1] * keep + d[r0 + c] * gamma;
                    d[r0 + c1] *= coh;
                    d[r1 + c] *= coh;
                }
            }
        }
    }

    /// `Tr[self · other]`, real part.
    pub(crate) fn trace_product(&self, other: &DensityMatrix) -> f64 {
        let dim = self.dim();
        let mut acc = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                let (a, b) = (self.data[r * dim + c], other.data[c * dim + r]);
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    pub(crate) fn apply_op(&mut self, op: &LocalOp) {
        let dim = self.dim();
        op.conjugate_density(&mut self.data, dim);
    }
}

/// Independent per-qubit decay of every qubit for `tau_ms`.
pub fn decohere(rho: &DensityMatrix, tau_ms: f64, np: &NoiseParams) -> Result<DensityMatrix> {
    np.validate()?;
    if tau_ms.is_nan() || tau_ms < 0.0 {
        return Err(Error::InvalidNoiseParams("duration must be non-negative"));
    }
    let mut out = rho.clone();
    out.decohere_qubits(0..rho.num_qubits, tau_ms, np);
    Ok(out)
}

/// A layered circuit with gate operators prepared for repeated simulation.
#[derive(Debug, Clone)]
pub struct NoisyProgram {
    num_qubits: usize,
    layers: Vec<PreparedLayer>,
}

#[derive(Debug, Clone)]
struct PreparedLayer {
    ops: Vec<LocalOp>,
    active: Vec<usize>,
    tau_ms: f64,
}

impl NoisyProgram {
    pub fn new(lc: &LayeredCircuit) -> Result<Self> {
        let n = lc.num_qubits();
        let layers = lc
            .layers()
            .iter()
            .map(|layer| {
                let ops = layer
                    .gates
                    .iter()
                    .map(|g| LocalOp::new(&gate_matrix(g)?, &g.targets, n))
                    .collect::<Result<_>>()?;
                let mut active: Vec<usize> = layer
                    .gates
                    .iter()
                    .flat_map(|g| g.targets.iter().copied())
                    .collect();
                active.sort_unstable();
                Ok(PreparedLayer {
                    ops,
                    active,
                    tau_ms: layer.duration_ns * 1e-6,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            num_qubits: n,
            layers,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn duration_ms(&self) -> f64 {
        self.layers.iter().map(|l| l.tau_ms).sum()
    }

    /// Runs the program on `rho` in place.
    pub fn run(&self, rho: &mut DensityMatrix, np: &NoiseParams) -> Result<()> {
        if rho.num_qubits != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: rho.num_qubits,
            });
        }
        np.validate()?;
        let dim = rho.dim();
        for layer in &self.layers {
            for op in &layer.ops {
                op.conjugate_density(&mut rho.data, dim);
            }
            if np.idle_decoherence {
                rho.decohere_qubits(0..self.num_qubits, layer.tau_ms, np);
            } else {
                rho.decohere_qubits(layer.active.iter().copied(), layer.tau_ms, np);
            }
        }
        rho.renormalize_if_needed();
        Ok(())
    }
}

impl NoisyProgram {
    fn decay(&self, rho: &mut DensityMatrix, layer: usize, np: &NoiseParams, adjoint: bool) {
        let l = &self.layers[layer];
        let all = 0..self.num_qubits;
        let active = l.active.iter().copied();
        match (np.idle_decoherence, adjoint) {
            (true, false) => rho.decohere_qubits(all, l.tau_ms, np),
            (false, false) => rho.decohere_qubits(active, l.tau_ms, np),
            (true, true) => rho.decohere_adjoint_qubits(all, l.tau_ms, np),
            (false, true) => rho.decohere_adjoint_qubits(active, l.tau_ms, np),
        }
    }

    /// For each layer, the state right after its unitaries (before decay).
    pub(crate) fn unitary_outputs(
        &self,
        rho: &DensityMatrix,
        np: &NoiseParams,
    ) -> Vec<DensityMatrix> {
        let mut out = Vec::with_capacity(self.layers.len());
        let mut cur = rho.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            for op in &layer.ops {
                cur.apply_op(op);
            }
            out.push(cur.clone());
            self.decay(&mut cur, i, np, false);
        }
        out
    }

    /// For each layer `ℓ`, the observable `W_ℓ` with
    /// `Tr[obs · final] = Tr[W_ℓ · ρ_ℓ]`, where `ρ_ℓ` is the state right
    /// after the unitaries of layer `ℓ`.
    pub(crate) fn backward_observables(
        &self,
        obs: &DensityMatrix,
        np: &NoiseParams,
    ) -> Vec<DensityMatrix> {
        let mut out = Vec::with_capacity(self.layers.len());
        let mut cur = obs.clone();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            self.decay(&mut cur, i, np, true);
            out.push(cur.clone());
            for op in &layer.ops {
                cur.apply_op(&op.adjoint());
            }
        }
        out.reverse();
        out
    }
}

/// Applies each layer's unitaries and then lets every qubit decay for the
/// layer's duration.
pub fn run_noisy_circuit(
    rho0: &DensityMatrix,
    lc: &LayeredCircuit,
    np: &NoiseParams,
) -> Result<DensityMatrix> {
    let mut rho = rho0.clone();
    NoisyProgram::new(lc)?.run(&mut rho, np)?;
    Ok(rho)
}

/// `Σ_{q ∈ qubits} Tr[ρ (I - Z_q)/2]`
pub fn expectation_diagonal(rho: &DensityMatrix, qubits: &[usize]) -> Result<f64> {
    let n = rho.num_qubits;
    if let Some(&q) = qubits.iter().find(|&&q| q >= n) {
        return Err(Error::TargetOutOfRange {
            qubit: q,
            num_qubits: n,
        });
    }
    let mut total = 0.0;
    for i in 0..rho.dim() {
        let p = rho.population(i);
        total += p * qubits.iter().filter(|&&q| i & bit(n, q) != 0).count() as f64;
    }
    Ok(total)
}
