// SPDX-License-Identifier: Apache-2.0

//! Parameterized ansatz circuits: a number-conserving brick wall of A-gates and
//! the single-parameter oracle `exp(-iθH)`. Both start from the charge density
//! wave `|1010…>` (odd sites occupied).

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::circuit::{Angle, Circuit, GateKind, GateTimings};
use crate::linalg::{ComplexMatrix, HermitianEigen};
use crate::math;
use crate::model::PauliHamiltonian;
use crate::{Error, Result};

/// Two-qubit number-conserving gate: identity on `|00>` and `|11>`,
/// `[[cos θ, e^{iφ} sin θ], [e^{-iφ} sin θ, -cos θ]]` on `{|01>, |10>}`.
pub fn a_gate_matrix(theta: f64, phi_a: f64) -> ComplexMatrix {
    let (co, si) = (math::cos(theta), math::sin(theta));
    let mut m = ComplexMatrix::identity(4);
    m[(1, 1)] = Complex64::new(co, 0.0);
    m[(1, 2)] = math::cis(phi_a) * si;
    m[(2, 1)] = math::cis(-phi_a) * si;
    m[(2, 2)] = Complex64::new(-co, 0.0);
    m
}

/// Qubits flipped to prepare the charge density wave: every even qubit
/// (odd 1-indexed site).
pub fn initial_occupied_qubits(num_qubits: usize) -> Vec<usize> {
    (0..num_qubits).step_by(2).collect()
}

/// A-gate wiring of the number-conserving ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ALayout {
    /// Alternating layers `(0,1),(2,3),…` and `(1,2),(3,4),…,(N-1,0)`,
    /// truncated after `C(N, n) - 1` gates.
    #[default]
    BrickWallV1,
}

impl ALayout {
    pub fn name(self) -> &'static str {
        match self {
            Self::BrickWallV1 => "brick-wall-v1",
        }
    }

    /// Ordered A-gate target pairs.
    pub fn pairs(self, num_qubits: usize, num_gates: usize) -> Vec<(usize, usize)> {
        match self {
            Self::BrickWallV1 => {
                let even: Vec<_> = (0..num_qubits / 2).map(|i| (2 * i, 2 * i + 1)).collect();
                let odd: Vec<_> = (0..num_qubits / 2)
                    .map(|i| (2 * i + 1, (2 * i + 2) % num_qubits))
                    .filter(|(a, b)| a != b)
                    .collect();
                let mut out = Vec::with_capacity(num_gates);
                let mut layer = 0;
                while out.len() < num_gates {
                    let src = if layer % 2 == 0 { &even } else { &odd };
                    if src.is_empty() && layer > 0 {
                        break;
                    }
                    for &p in src {
                        if out.len() == num_gates {
                            break;
                        }
                        out.push(p);
                    }
                    layer += 1;
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum AnsatzKind {
    NumberConserving { layout: ALayout, num_gates: usize },
    Oracle { generator: Arc<HermitianEigen> },
}

#[derive(Debug, Clone)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    pub num_qubits: usize,
    pub num_particles: usize,
    pub timings: GateTimings,
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

impl AnsatzSpec {
    /// Number-conserving ansatz with `C(N, n) - 1` A-gates, which matches the
    /// real dimension of the `n`-particle projective sector.
    pub fn number_conserving(num_qubits: usize, layout: ALayout, timings: GateTimings) -> Self {
        let num_particles = initial_occupied_qubits(num_qubits).len();
        let num_gates = binomial(num_qubits, num_particles).saturating_sub(1).max(1);
        Self {
            kind: AnsatzKind::NumberConserving { layout, num_gates },
            num_qubits,
            num_particles,
            timings,
        }
    }

    /// `exp(-iθH)` applied to the charge density wave.
    pub fn oracle(hamiltonian: &PauliHamiltonian, timings: GateTimings) -> Result<Self> {
        let generator = HermitianEigen::new(&hamiltonian.to_dense()?)?;
        Ok(Self::oracle_from_eigen(
            Arc::new(generator),
            hamiltonian.num_qubits,
            timings,
        ))
    }

    pub fn oracle_from_eigen(
        generator: Arc<HermitianEigen>,
        num_qubits: usize,
        timings: GateTimings,
    ) -> Self {
        Self {
            kind: AnsatzKind::Oracle { generator },
            num_qubits,
            num_particles: initial_occupied_qubits(num_qubits).len(),
            timings,
        }
    }

    pub fn num_parameters(&self) -> usize {
        match &self.kind {
            AnsatzKind::NumberConserving { num_gates, .. } => 2 * num_gates,
            AnsatzKind::Oracle { .. } => 1,
        }
    }

    /// Circuit with `Angle::Param` slots; bind it or use
    /// [`build_ansatz_circuit`].
    pub fn template(&self) -> Result<Circuit> {
        let t = &self.timings;
        let mut c = Circuit::new(self.num_qubits);
        for q in initial_occupied_qubits(self.num_qubits) {
            c.add(GateKind::X, &[q], t)?;
        }
        match &self.kind {
            AnsatzKind::NumberConserving { layout, num_gates } => {
                for (i, (a, b)) in layout
                    .pairs(self.num_qubits, *num_gates)
                    .into_iter()
                    .enumerate()
                {
                    let kind = GateKind::A {
                        theta: Angle::Param(2 * i),
                        phi: Angle::Param(2 * i + 1),
                    };
                    c.add(kind, &[a, b], t)?;
                }
            }
            AnsatzKind::Oracle { generator } => {
                let kind = GateKind::Oracle {
                    theta: Angle::Param(0),
                    generator: Arc::clone(generator),
                };
                let all: Vec<usize> = (0..self.num_qubits).collect();
                c.add(kind, &all, t)?;
            }
        }
        Ok(c)
    }
}

/// Concrete ansatz circuit `C(params)`.
pub fn build_ansatz_circuit(spec: &AnsatzSpec, params: &[f64]) -> Result<Circuit> {
    if params.len() != spec.num_parameters() {
        return Err(Error::ParameterCountMismatch {
            expected: spec.num_parameters(),
            found: params.len(),
        });
    }
    spec.template()?.bind(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::apply_circuit;
    use crate::linalg::StateVector;

    #[test]
    fn six_site_ansatz_has_38_parameters() {
        let spec = AnsatzSpec::number_conserving(6, ALayout::BrickWallV1, GateTimings::DEFAULT);
        assert_eq!(spec.num_particles, 3);
        assert_eq!(spec.num_parameters(), 38);
        assert_eq!(spec.template().unwrap().num_parameters(), 38);
    }

    #[test]
    fn brick_wall_pairs() {
        let p = ALayout::BrickWallV1.pairs(6, 19);
        assert_eq!(p.len(), 19);
        assert_eq!(&p[..6], &[(0, 1), (2, 3), (4, 5), (1, 2), (3, 4), (5, 0)]);
        assert_eq!(p[18], (0, 1));
    }

    #[test]
    fn a_gate_blocks() {
        let a = a_gate_matrix(0.7, -1.1);
        assert_eq!(a[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(a[(3, 3)], Complex64::new(1.0, 0.0));
        let zero = a_gate_matrix(0.0, 0.4);
        assert!((zero[(1, 1)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((zero[(2, 2)] + Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(zero[(1, 2)].norm() < 1e-15);
    }

    #[test]
    fn parameter_count_is_checked() {
        let spec = AnsatzSpec::number_conserving(4, ALayout::BrickWallV1, GateTimings::DEFAULT);
        assert_eq!(spec.num_parameters(), 10);
        assert_eq!(
            build_ansatz_circuit(&spec, &[0.0; 3]).unwrap_err(),
            Error::ParameterCountMismatch {
                expected: 10,
                found: 3
            }
        );
    }

    #[test]
    fn zero_parameters_give_density_wave_up_to_sign() {
        let spec = AnsatzSpec::number_conserving(6, ALayout::BrickWallV1, GateTimings::DEFAULT);
        let c = build_ansatz_circuit(&spec, &[0.0; 38]).unwrap();
        let s = apply_circuit(&c, &StateVector::zero_state(6)).unwrap();
        assert!((s.amplitudes()[0b101010].norm() - 1.0).abs() < 1e-12);
    }
}
