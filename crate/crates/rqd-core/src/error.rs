// SPDX-License-Identifier: Apache-2.0

use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M^dagger| = {max_deviation:e})")]
    NotHermitian { max_deviation: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    TargetOutOfRange { qubit: usize, num_qubits: usize },
    #[error("qubit {0} targeted twice by one gate")]
    DuplicateTarget(usize),
    #[error("gate acts on {found} qubits, expected {expected}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("site {site} out of range 1..={num_sites}")]
    IndexOutOfRange { site: usize, num_sites: usize },
    #[error("{num_qubits} qubits exceeds the dense limit of {max}")]
    TooLarge { num_qubits: usize, max: usize },
    #[error("gate {gate} has an unbound parameter")]
    UnboundParameter { gate: usize },
    #[error("Hamiltonian has no non-identity terms")]
    EmptyHamiltonian,
    #[error("fermionic Hamiltonian maps to a non-Hermitian qubit operator")]
    NonHermitianTerms,
    #[error("invalid noise parameters: {0}")]
    InvalidNoiseParams(&'static str),
    #[error("expected {expected} parameters, got {found}")]
    ParameterCountMismatch { expected: usize, found: usize },
    #[error("runs cannot be averaged: {0}")]
    ConfigMismatch(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
