// SPDX-License-Identifier: Apache-2.0

//! Gate-level circuit IR over a fixed gate set.
//!
//! Rotation conventions: `RZ(θ) = exp(-iθZ/2)`, `RX`, `RY` likewise,
//! `RZZ(θ) = exp(-iθ Z⊗Z / 2)`. `CNOT` reads `targets[0]` as control.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::ansatz::a_gate_matrix;
use crate::linalg::{ComplexMatrix, HermitianEigen, LocalOp, StateVector};
use crate::math;
use crate::{Error, Result};

/// Largest register `circuit_to_unitary` will build.
pub const MAX_UNITARY_QUBITS: usize = 8;

/// Wall-clock gate durations.
///
/// The defaults keep a 1:3 single/two-qubit ratio and put the compiled
/// six-site Trotter step at 0.180 ms, the mean propagation-circuit length of
/// the reference hardware model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateTimings {
    pub single_qubit_ns: f64,
    pub two_qubit_ns: f64,
    pub oracle_ns: f64,
}

impl GateTimings {
    pub const DEFAULT: Self = Self {
        single_qubit_ns: 925.0,
        two_qubit_ns: 2775.0,
        oracle_ns: 26_000.0,
    };

    /// Critical path of the 3-CNOT / 4-rotation A-gate decomposition.
    pub fn a_gate_ns(&self) -> f64 {
        3.0 * self.two_qubit_ns + 4.0 * self.single_qubit_ns
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.single_qubit_ns, self.two_qubit_ns, self.oracle_ns];
        if all.iter().all(|d| d.is_finite() && *d > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "gate durations must be positive".into(),
            ))
        }
    }
}

impl Default for GateTimings {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// A gate angle: either a number or a slot in the circuit's parameter vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Value(f64),
    Param(usize),
}

impl Angle {
    pub fn value(self) -> Option<f64> {
        match self {
            Self::Value(v) => Some(v),
            Self::Param(_) => None,
        }
    }

    fn bind(self, params: &[f64]) -> Result<Self> {
        match self {
            Self::Value(_) => Ok(self),
            Self::Param(i) => {
                params
                    .get(i)
                    .map(|&v| Self::Value(v))
                    .ok_or(Error::ParameterCountMismatch {
                        expected: i + 1,
                        found: params.len(),
                    })
            }
        }
    }

    fn negate(self) -> Option<Self> {
        self.value().map(|v| Self::Value(-v))
    }
}

impl From<f64> for Angle {
    fn from(v: f64) -> Self {
        Self::Value(v)
    }
}

#[derive(Debug, Clone)]
pub enum GateKind {
    X,
    H,
    Rz(Angle),
    Rx(Angle),
    Ry(Angle),
    Cnot,
    Rzz(Angle),
    /// Number-conserving two-qubit gate; see [`a_gate_matrix`].
    A {
        theta: Angle,
        phi: Angle,
    },
    /// `exp(-iθH)` on the whole register, with `H` given by its spectrum.
    Oracle {
        theta: Angle,
        generator: Arc<HermitianEigen>,
    },
}

impl GateKind {
    /// Qubits the gate acts on; `None` for register-wide gates.
    pub fn arity(&self) -> Option<usize> {
        match self {
            Self::X | Self::H | Self::Rz(_) | Self::Rx(_) | Self::Ry(_) => Some(1),
            Self::Cnot | Self::Rzz(_) | Self::A { .. } => Some(2),
            Self::Oracle { .. } => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::X => "X",
            Self::H => "H",
            Self::Rz(_) => "RZ",
            Self::Rx(_) => "RX",
            Self::Ry(_) => "RY",
            Self::Cnot => "CNOT",
            Self::Rzz(_) => "RZZ",
            Self::A { .. } => "A",
            Self::Oracle { .. } => "ORACLE",
        }
    }

    /// Angles in declaration order, with their names.
    pub fn angles(&self) -> Vec<(&'static str, Angle)> {
        match self {
            Self::X | Self::H | Self::Cnot => vec![],
            Self::Rz(a) | Self::Rx(a) | Self::Ry(a) | Self::Rzz(a) => vec![("theta", *a)],
            Self::A { theta, phi } => vec![("theta", *theta), ("phi", *phi)],
            Self::Oracle { theta, .. } => vec![("theta", *theta)],
        }
    }

    fn map_angles(&self, mut f: impl FnMut(Angle) -> Result<Angle>) -> Result<Self> {
        Ok(match self {
            Self::X => Self::X,
            Self::H => Self::H,
            Self::Cnot => Self::Cnot,
            Self::Rz(a) => Self::Rz(f(*a)?),
            Self::Rx(a) => Self::Rx(f(*a)?),
            Self::Ry(a) => Self::Ry(f(*a)?),
            Self::Rzz(a) => Self::Rzz(f(*a)?),
            Self::A { theta, phi } => Self::A {
                theta: f(*theta)?,
                phi: f(*phi)?,
            },
            Self::Oracle { theta, generator } => Self::Oracle {
                theta: f(*theta)?,
                generator: Arc::clone(generator),
            },
        })
    }
}

#[derive(Debug, Clone)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub duration_ns: f64,
}

impl Gate {
    /// Builds a gate whose duration follows `timings`.
    pub fn new(kind: GateKind, targets: Vec<usize>, timings: &GateTimings) -> Result<Self> {
        let duration_ns = match &kind {
            GateKind::A { .. } => timings.a_gate_ns(),
            GateKind::Oracle { .. } => timings.oracle_ns,
            k if k.arity() == Some(1) => timings.single_qubit_ns,
            _ => timings.two_qubit_ns,
        };
        Self::with_duration(kind, targets, duration_ns)
    }

    pub fn with_duration(kind: GateKind, targets: Vec<usize>, duration_ns: f64) -> Result<Self> {
        let expected = match &kind {
            GateKind::Oracle { generator, .. } => generator.dim().trailing_zeros() as usize,
            k => k.arity().unwrap_or(0),
        };
        if targets.len() != expected {
            return Err(Error::ArityMismatch {
                expected,
                found: targets.len(),
            });
        }
        for (i, t) in targets.iter().enumerate() {
            if targets[..i].contains(t) {
                return Err(Error::DuplicateTarget(*t));
            }
        }
        if !(duration_ns.is_finite() && duration_ns > 0.0) {
            return Err(Error::InvalidConfig(
                "gate duration must be positive".into(),
            ));
        }
        Ok(Self {
            kind,
            targets,
            duration_ns,
        })
    }

    pub fn is_bound(&self) -> bool {
        self.kind.angles().iter().all(|(_, a)| a.value().is_some())
    }

    /// Substitutes parameter values into this gate's angles.
    pub fn bind(&self, params: &[f64]) -> Result<Self> {
        Ok(Self {
            kind: self.kind.map_angles(|a| a.bind(params))?,
            targets: self.targets.clone(),
            duration_ns: self.duration_ns,
        })
    }

    /// Inverse gate: angles negated, `X`/`H`/`CNOT`/`A` self-inverse.
    pub fn inverse(&self) -> Option<Self> {
        let kind = match &self.kind {
            GateKind::X | GateKind::H | GateKind::Cnot => self.kind.clone(),
            // A(θ, φ) is Hermitian as well as unitary.
            GateKind::A { .. } => self.kind.clone(),
            k => k
                .map_angles(|a| a.negate().ok_or(Error::UnboundParameter { gate: 0 }))
                .ok()?,
        };
        Some(Self {
            kind,
            targets: self.targets.clone(),
            duration_ns: self.duration_ns,
        })
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Unitary of a bound gate, of dimension `2^|targets|`.
pub fn gate_matrix(g: &Gate) -> Result<ComplexMatrix> {
    let unbound = Error::UnboundParameter { gate: 0 };
    let val = |a: &Angle| a.value().ok_or(unbound.clone());
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    Ok(match &g.kind {
        GateKind::X => ComplexMatrix::from_rows(&[[o, l], [l, o]]),
        GateKind::H => {
            let h = c(FRAC_1_SQRT_2, 0.0);
            ComplexMatrix::from_rows(&[[h, h], [h, -h]])
        }
        GateKind::Rz(a) => {
            let t = val(a)?;
            ComplexMatrix::from_diagonal(&[math::cis(-t / 2.0), math::cis(t / 2.0)])
        }
        GateKind::Rx(a) => {
            let t = val(a)?;
            let (co, si) = (math::cos(t / 2.0), math::sin(t / 2.0));
            ComplexMatrix::from_rows(&[[c(co, 0.0), c(0.0, -si)], [c(0.0, -si), c(co, 0.0)]])
        }
        GateKind::Ry(a) => {
            let t = val(a)?;
            let (co, si) = (math::cos(t / 2.0), math::sin(t / 2.0));
            ComplexMatrix::from_rows(&[[c(co, 0.0), c(-si, 0.0)], [c(si, 0.0), c(co, 0.0)]])
        }
        GateKind::Cnot => {
            ComplexMatrix::from_rows(&[[l, o, o, o], [o, l, o, o], [o, o, o, l], [o, o, l, o]])
        }
        GateKind::Rzz(a) => {
            let t = val(a)?;
            let (m, p) = (math::cis(-t / 2.0), math::cis(t / 2.0));
            ComplexMatrix::from_diagonal(&[m, p, p, m])
        }
        GateKind::A { theta, phi } => a_gate_matrix(val(theta)?, val(phi)?),
        GateKind::Oracle { theta, generator } => generator.propagator(val(theta)?),
    })
}

/// Parameter slot: gate index, angle name, index into the parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamSlot {
    pub gate: usize,
    pub name: &'static str,
    pub index: usize,
}

#[derive(Debug, Clone)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        if let Some(&q) = gate.targets.iter().find(|&&q| q >= self.num_qubits) {
            return Err(Error::TargetOutOfRange {
                qubit: q,
                num_qubits: self.num_qubits,
            });
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Shorthand for `push(Gate::new(kind, targets, timings)?)`.
    pub fn add(&mut self, kind: GateKind, targets: &[usize], timings: &GateTimings) -> Result<()> {
        self.push(Gate::new(kind, targets.to_vec(), timings)?)
    }

    /// Appends all gates of `other`.
    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.num_qubits != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    pub fn parameter_slots(&self) -> Vec<ParamSlot> {
        let mut slots = Vec::new();
        for (gate, g) in self.gates.iter().enumerate() {
            for (name, a) in g.kind.angles() {
                if let Angle::Param(index) = a {
                    slots.push(ParamSlot { gate, name, index });
                }
            }
        }
        slots
    }

    /// One more than the largest referenced parameter index.
    pub fn num_parameters(&self) -> usize {
        self.parameter_slots()
            .iter()
            .map(|s| s.index + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn is_bound(&self) -> bool {
        self.gates.iter().all(Gate::is_bound)
    }

    /// Substitutes parameter values, yielding a concrete circuit.
    pub fn bind(&self, params: &[f64]) -> Result<Circuit> {
        let needed = self.num_parameters();
        if params.len() != needed {
            return Err(Error::ParameterCountMismatch {
                expected: needed,
                found: params.len(),
            });
        }
        let gates = self
            .gates
            .iter()
            .map(|g| g.bind(params))
            .collect::<Result<_>>()?;
        Ok(Circuit {
            num_qubits: self.num_qubits,
            gates,
        })
    }

    fn first_unbound(&self) -> Option<usize> {
        self.gates.iter().position(|g| !g.is_bound())
    }
}

/// Reverses gate order and inverts each gate.
pub fn invert(c: &Circuit) -> Result<Circuit> {
    if let Some(gate) = c.first_unbound() {
        return Err(Error::UnboundParameter { gate });
    }
    let gates = c
        .gates
        .iter()
        .rev()
        .map(|g| g.inverse().expect("bound gate"))
        .collect();
    Ok(Circuit {
        num_qubits: c.num_qubits,
        gates,
    })
}

/// Runs a bound circuit on a state vector.
pub fn apply_circuit(c: &Circuit, state: &StateVector) -> Result<StateVector> {
    if state.num_qubits() != c.num_qubits {
        return Err(Error::DimensionMismatch {
            expected: c.num_qubits,
            found: state.num_qubits(),
        });
    }
    let mut out = state.clone();
    for (i, g) in c.gates.iter().enumerate() {
        let m = gate_matrix(g).map_err(|_| Error::UnboundParameter { gate: i })?;
        let op = LocalOp::new(&m, &g.targets, c.num_qubits)?;
        op.apply_vec(out.amplitudes_mut(), false);
    }
    Ok(out)
}

/// Dense unitary of a bound circuit (at most [`MAX_UNITARY_QUBITS`] qubits).
pub fn circuit_to_unitary(c: &Circuit) -> Result<ComplexMatrix> {
    if c.num_qubits > MAX_UNITARY_QUBITS {
        return Err(Error::TooLarge {
            num_qubits: c.num_qubits,
            max: MAX_UNITARY_QUBITS,
        });
    }
    if let Some(gate) = c.first_unbound() {
        return Err(Error::UnboundParameter { gate });
    }
    let dim = 1usize << c.num_qubits;
    // Columns of U are the images of basis states; build U^T row by row.
    let mut transposed = Vec::with_capacity(dim * dim);
    for col in 0..dim {
        let s = apply_circuit(c, &StateVector::basis_state(c.num_qubits, col))?;
        transposed.extend_from_slice(s.amplitudes());
    }
    Ok(ComplexMatrix::from_fn(dim, dim, |r, col| {
        transposed[col * dim + r]
    }))
}

/// Rewrites `RZZ` as `CNOT · RZ · CNOT` and `A` as its 3-CNOT decomposition,
/// leaving other gates untouched. Durations follow `timings`.
pub fn lower(c: &Circuit, timings: &GateTimings) -> Result<Circuit> {
    let mut out = Circuit::new(c.num_qubits);
    for (i, g) in c.gates.iter().enumerate() {
        match &g.kind {
            GateKind::Rzz(a) => {
                let (q0, q1) = (g.targets[0], g.targets[1]);
                out.add(GateKind::Cnot, &[q0, q1], timings)?;
                out.add(GateKind::Rz(*a), &[q1], timings)?;
                out.add(GateKind::Cnot, &[q0, q1], timings)?;
            }
            GateKind::A { theta, phi } => {
                let theta = theta.value().ok_or(Error::UnboundParameter { gate: i })?;
                let phi = phi.value().ok_or(Error::UnboundParameter { gate: i })?;
                for (kind, targets) in a_gate_decomposition(theta, phi, g.targets[0], g.targets[1])
                {
                    out.add(kind, &targets, timings)?;
                }
            }
            _ => out.push(g.clone())?,
        }
    }
    Ok(out)
}

/// `A(θ, φ)` on `(a, b)` as
/// `CNOT(b→a) · R(θ,φ)_b · CNOT(a→b) · R(θ,φ)†_b · CNOT(b→a)` with
/// `R(θ, φ) = RZ(φ + π) RY(θ + π/2)`; exact including global phase.
/// Returned in application order.
pub fn a_gate_decomposition(
    theta: f64,
    phi: f64,
    a: usize,
    b: usize,
) -> Vec<(GateKind, Vec<usize>)> {
    let ry = theta + FRAC_PI_2;
    let rz = phi + PI;
    vec![
        (GateKind::Cnot, vec![b, a]),
        (GateKind::Rz(Angle::Value(-rz)), vec![b]),
        (GateKind::Ry(Angle::Value(-ry)), vec![b]),
        (GateKind::Cnot, vec![a, b]),
        (GateKind::Ry(Angle::Value(ry)), vec![b]),
        (GateKind::Rz(Angle::Value(rz)), vec![b]),
        (GateKind::Cnot, vec![b, a]),
    ]
}
