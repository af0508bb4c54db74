// SPDX-License-Identifier: Apache-2.0

//! First-order Trotter step circuits for Pauli Hamiltonians.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::circuit::{Angle, Circuit, GateKind, GateTimings};
use crate::model::{Pauli, PauliHamiltonian, PauliString};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TermOrder {
    /// Order of `PauliHamiltonian::strings`.
    #[default]
    AsConstructed,
    /// Stable sort by support (lexicographic), then by weight.
    SortedBySupport,
}

impl TermOrder {
    pub fn name(self) -> &'static str {
        match self {
            Self::AsConstructed => "as-constructed",
            Self::SortedBySupport => "sorted-by-support",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrotterConfig {
    pub dt: f64,
    pub term_order: TermOrder,
    /// Emit weight-2 cores as a single `RZZ` instead of `CNOT · RZ · CNOT`.
    pub use_rzz: bool,
}

impl TrotterConfig {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            term_order: TermOrder::AsConstructed,
            use_rzz: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dt.is_finite() && self.dt > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig("dt must be positive".into()))
        }
    }
}

impl Default for TrotterConfig {
    fn default() -> Self {
        Self::new(0.04)
    }
}

/// Appends `exp(-i·dt·c·P)` for one Pauli string.
pub fn append_term(
    circuit: &mut Circuit,
    term: &PauliString,
    dt: f64,
    use_rzz: bool,
    timings: &GateTimings,
) -> Result<()> {
    let support = term.support();
    if support.is_empty() {
        return Ok(());
    }
    let angle = 2.0 * term.coefficient * dt;

    let mut basis = Vec::new();
    let mut unbasis = Vec::new();
    for (&q, &p) in &term.factors {
        match p {
            Pauli::X => {
                basis.push((GateKind::H, q));
                unbasis.push((GateKind::H, q));
            }
            Pauli::Y => {
                basis.push((GateKind::Rx(Angle::Value(FRAC_PI_2)), q));
                unbasis.push((GateKind::Rx(Angle::Value(-FRAC_PI_2)), q));
            }
            Pauli::Z => {}
        }
    }

    for (k, q) in basis {
        circuit.add(k, &[q], timings)?;
    }
    if use_rzz && support.len() == 2 {
        circuit.add(GateKind::Rzz(Angle::Value(angle)), &support, timings)?;
    } else {
        for w in support.windows(2) {
            circuit.add(GateKind::Cnot, w, timings)?;
        }
        let last = support[support.len() - 1];
        circuit.add(GateKind::Rz(Angle::Value(angle)), &[last], timings)?;
        for w in support.windows(2).rev() {
            circuit.add(GateKind::Cnot, w, timings)?;
        }
    }
    for (k, q) in unbasis {
        circuit.add(k, &[q], timings)?;
    }
    Ok(())
}

/// Strings of `ph` in the order `order` prescribes.
pub fn ordered_terms(ph: &PauliHamiltonian, order: TermOrder) -> Vec<&PauliString> {
    let mut terms: Vec<&PauliString> = ph.strings.iter().collect();
    if order == TermOrder::SortedBySupport {
        terms.sort_by(|a, b| {
            a.support()
                .cmp(&b.support())
                .then(a.weight().cmp(&b.weight()))
        });
    }
    terms
}

/// `Π_j exp(-i·dt·c_j·P_j)` in the configured term order. The identity
/// component of `ph` contributes only a global phase and is dropped.
pub fn trotter_step(
    ph: &PauliHamiltonian,
    cfg: &TrotterConfig,
    timings: &GateTimings,
) -> Result<Circuit> {
    cfg.validate()?;
    if ph.strings.iter().all(|s| s.weight() == 0) {
        return Err(Error::EmptyHamiltonian);
    }
    let mut c = Circuit::new(ph.num_qubits);
    for term in ordered_terms(ph, cfg.term_order) {
        append_term(&mut c, term, cfg.dt, cfg.use_rzz, timings)?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{circuit_to_unitary, lower};
    use crate::linalg::herm_expm;
    use crate::model::{build_aubry_andre, jordan_wigner, ModelParams};

    fn ph(n: usize, strings: Vec<PauliString>) -> PauliHamiltonian {
        PauliHamiltonian {
            num_qubits: n,
            strings,
            constant_offset: 0.0,
        }
    }

    #[test]
    fn single_z_is_one_rz() {
        let h = ph(1, alloc::vec![PauliString::new(0.7, [(0, Pauli::Z)])]);
        let c = trotter_step(&h, &TrotterConfig::new(0.1), &GateTimings::DEFAULT).unwrap();
        assert_eq!(c.len(), 1);
        match c.gates()[0].kind {
            GateKind::Rz(Angle::Value(a)) => assert!((a - 0.14).abs() < 1e-15),
            ref k => panic!("unexpected {k:?}"),
        }
    }

    #[test]
    fn every_pauli_pair_is_exact() {
        let ps = [Pauli::X, Pauli::Y, Pauli::Z];
        for &p in &ps {
            for &q in &ps {
                let s = PauliString::new(-0.37, [(0, p), (2, q)]);
                let exact = herm_expm(&s.operator(3), -0.37 * 0.04).unwrap();
                for rzz in [false, true] {
                    let mut c = Circuit::new(3);
                    append_term(&mut c, &s, 0.04, rzz, &GateTimings::DEFAULT).unwrap();
                    let u = circuit_to_unitary(&c).unwrap();
                    assert!(u.max_abs_diff(&exact) < 1e-12, "{p:?}{q:?} rzz={rzz}");
                }
            }
        }
    }

    #[test]
    fn empty_hamiltonian_is_rejected() {
        let h = ph(2, alloc::vec![]);
        assert_eq!(
            trotter_step(&h, &TrotterConfig::default(), &GateTimings::DEFAULT).unwrap_err(),
            Error::EmptyHamiltonian
        );
    }

    #[test]
    fn six_site_step_lowers_to_124_gates() {
        let h = jordan_wigner(
            &build_aubry_andre(&ModelParams::localized(6, 1.93146731)),
            6,
        )
        .unwrap();
        assert_eq!(h.strings.len(), 24);
        let c = trotter_step(&h, &TrotterConfig::default(), &GateTimings::DEFAULT).unwrap();
        let low = lower(&c, &GateTimings::DEFAULT).unwrap();
        assert_eq!(low.len(), 124);
        let a = circuit_to_unitary(&c).unwrap();
        let b = circuit_to_unitary(&low).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn sorted_order_is_a_permutation() {
        let h = jordan_wigner(&build_aubry_andre(&ModelParams::localized(4, 0.3)), 4).unwrap();
        let a = ordered_terms(&h, TermOrder::AsConstructed);
        let b = ordered_terms(&h, TermOrder::SortedBySupport);
        assert_eq!(a.len(), b.len());
        assert!(b.windows(2).all(|w| w[0].support() <= w[1].support()));
    }
}
