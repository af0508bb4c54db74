// SPDX-License-Identifier: Apache-2.0

//! Restarted quantum dynamics on a simulated noisy quantum computer.
//!
//! The crate is `no_std` (it needs `alloc`) and holds every algorithmic piece:
//! the dense linear-algebra kernel, the interacting Aubry-André model and its
//! Jordan-Wigner image, a small gate IR with a first-order Trotterizer and a
//! greedy layer scheduler, a T1/T2* density-matrix simulator, the two ansatz
//! families, an L-BFGS optimizer, and the restart driver. File formats, the
//! command-line harness and parallel sweeps live in the `rqd` crate.
//!
//! Conventions used throughout:
//! - qubit 0 is the most significant bit of a computational-basis index;
//! - lattice site `k` (1-indexed) is carried by qubit `k - 1`;
//! - simulation time is in units of `1/J`, wall-clock circuit time in ns/ms.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod ansatz;
pub mod circuit;
pub mod dynamics;
mod error;
pub mod linalg;
pub(crate) mod math;
pub mod model;
pub mod noise;
pub mod optimizer;
pub mod schedule;
pub mod trotter;

pub use error::{Error, Result};
pub use num_complex::Complex64;
