// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra: matrices, state vectors, Kronecker products,
//! Hermitian eigendecomposition and local gate application.
//!
//! Qubit 0 is the most significant bit of a basis index. A `k`-qubit gate with
//! targets `[t0, t1, ..]` reads `t0` as the most significant bit of its local
//! index, so `kron(A, B)` on targets `[a, b]` applies `A` to `a` and `B` to `b`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::math;
use crate::{Error, Result};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Numerical thresholds shared by the kernel. Every check in the crate that is
/// not a caller-supplied tolerance reads from here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max |M - M^dagger| accepted by Hermitian-only routines.
    pub hermitian: f64,
    /// Pauli strings whose |coefficient| falls below this are dropped.
    pub pauli_drop: f64,
    /// |Tr rho - 1| beyond which a density matrix is renormalized (and logged).
    pub trace_renormalize: f64,
}

impl Tolerances {
    pub const DEFAULT: Self = Self {
        hermitian: 1e-10,
        pauli_drop: 1e-14,
        trace_renormalize: 1e-9,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from nested row slices. Panics on ragged input.
    pub fn from_rows<R: AsRef<[Complex64]>>(rows: &[R]) -> Self {
        let cols = rows[0].as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self::new(rows.len(), cols, data).expect("nonempty")
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = *d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| math::cabs(a - b))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| math::cabs(*z)).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    /// max |M - M^dagger|; infinite for non-square matrices.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max(math::cabs(self[(r, c)] - self[(c, r)].conj()));
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// max |U^dagger U - I|.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.rows))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics when inner dimensions differ.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let (n, m, p) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![ZERO; n * p];
        for i in 0..n {
            let out_row = &mut out[i * p..(i + 1) * p];
            for k in 0..m {
                let a = self.data[i * m + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * p..(k + 1) * p];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        ComplexMatrix {
            rows: n,
            cols: p,
            data: out,
        }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Kronecker product `a ⊗ b`, of shape `(ra·rb) × (ca·cb)`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (rb, cb) = (b.rows, b.cols);
    ComplexMatrix::from_fn(a.rows * rb, a.cols * cb, |r, c| {
        a[(r / rb, c / cb)] * b[(r % rb, c % cb)]
    })
}

/// Eigendecomposition `H = V diag(values) V^dagger` of a Hermitian matrix,
/// eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Cyclic complex Jacobi iteration. Only the upper triangle's Hermitian
    /// part is meaningful, so the caller is responsible for checking
    /// Hermiticity first (see [`HermitianEigen::new`]).
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        let dev = h.hermitian_deviation();
        if dev > Tolerances::DEFAULT.hermitian {
            return Err(Error::NotHermitian { max_deviation: dev });
        }
        Ok(jacobi_eigh(h))
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `exp(-i t H)`.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        self.spectral_map(|lambda| math::cis(-lambda * t))
    }

    /// `V f(Λ) V^dagger`.
    pub fn spectral_map(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let n = self.dim();
        let phases: Vec<Complex64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += v[(r, k)] * phases[k] * v[(c, k)].conj();
                }
                out[(r, c)] = acc;
            }
        }
        out
    }

    /// `exp(-i t H) |psi>` without forming the propagator.
    pub fn evolve(&self, psi: &[Complex64], t: f64) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(psi.len(), n);
        let v = &self.vectors;
        let mut coeffs = vec![ZERO; n];
        for (k, ck) in coeffs.iter_mut().enumerate() {
            let mut acc = ZERO;
            for r in 0..n {
                acc += v[(r, k)].conj() * psi[r];
            }
            *ck = acc * math::cis(-self.values[k] * t);
        }
        (0..n)
            .map(|r| (0..n).map(|k| v[(r, k)] * coeffs[k]).sum())
            .collect()
    }
}

fn jacobi_eigh(h: &ComplexMatrix) -> HermitianEigen {
    let n = h.rows();
    let mut m = h.clone();
    // Symmetrize so round-off in the lower triangle cannot leak in.
    for r in 0..n {
        m[(r, r)] = Complex64::new(m[(r, r)].re, 0.0);
        for c in r + 1..n {
            let avg = (m[(r, c)] + m[(c, r)].conj()) * 0.5;
            m[(r, c)] = avg;
            m[(c, r)] = avg.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if math::sqrt(off) <= 1e-16 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let r = math::cabs(apq);
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + math::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / math::sqrt(t * t + 1.0);
                let s = t * c;
                let j_pp = Complex64::new(c, 0.0);
                let j_pq = Complex64::new(s, 0.0);
                let j_qp = phase.conj() * (-s);
                let j_qq = phase.conj() * c;

                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * j_pp + mkq * j_qp;
                    m[(k, q)] = mkp * j_pq + mkq * j_qq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = j_pp.conj() * mpk + j_qp.conj() * mqk;
                    m[(q, k)] = j_pq.conj() * mpk + j_qq.conj() * mqk;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * j_pp + vkq * j_qp;
                    v[(k, q)] = vkp * j_pq + vkq * j_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    HermitianEigen { values, vectors }
}

/// `exp(-i · scale · h)` for Hermitian `h`, via eigendecomposition.
pub fn herm_expm(h: &ComplexMatrix, scale: f64) -> Result<ComplexMatrix> {
    Ok(HermitianEigen::new(h)?.propagator(scale))
}

/// Pure state of `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << num_qubits;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: amplitudes.len(),
            });
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// `|0...0>`.
    pub fn zero_state(num_qubits: usize) -> Self {
        Self::basis_state(num_qubits, 0)
    }

    pub fn basis_state(num_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[index] = ONE;
        Self {
            num_qubits,
            amplitudes,
        }
    }

    /// Basis state with qubit `q` set iff `occupied[q]`.
    pub fn from_occupations(occupied: &[bool]) -> Self {
        let n = occupied.len();
        let index = occupied
            .iter()
            .enumerate()
            .filter(|(_, &o)| o)
            .fold(0usize, |acc, (q, _)| acc | bit(n, q));
        Self::basis_state(n, index)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.amplitudes.iter().map(|a| a.norm_sqr()).sum())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Applies a local unitary in place.
    pub fn apply(&mut self, gate: &ComplexMatrix, targets: &[usize]) -> Result<()> {
        let op = LocalOp::new(gate, targets, self.num_qubits)?;
        op.apply_vec(&mut self.amplitudes, false);
        Ok(())
    }
}

/// Applies `gate_matrix` to `targets` of `state` without building the full
/// `2^N` operator.
pub fn apply_gate_to_state(
    state: &StateVector,
    gate_matrix: &ComplexMatrix,
    target_qubits: &[usize],
) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate_matrix, target_qubits)?;
    Ok(out)
}

/// `|<a|b>|^2`.
pub fn pure_state_overlap_sq(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// Bit mask of qubit `q` in an `n`-qubit basis index.
#[inline]
pub(crate) fn bit(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

/// A gate matrix bound to concrete targets of an `n`-qubit register, with its
/// nonzero pattern precomputed.
#[derive(Debug, Clone)]
pub(crate) struct LocalOp {
    offsets: Vec<usize>,
    bases: Vec<usize>,
    entries: Vec<(usize, usize, Complex64)>,
}

impl LocalOp {
    pub(crate) fn new(gate: &ComplexMatrix, targets: &[usize], n: usize) -> Result<Self> {
        let k = targets.len();
        let m = 1usize << k;
        if gate.rows() != m || gate.cols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: gate.rows(),
            });
        }
        let mut mask = 0usize;
        for &t in targets {
            if t >= n {
                return Err(Error::TargetOutOfRange {
                    qubit: t,
                    num_qubits: n,
                });
            }
            if mask & bit(n, t) != 0 {
                return Err(Error::DuplicateTarget(t));
            }
            mask |= bit(n, t);
        }
        let offsets = (0..m)
            .map(|local| {
                targets
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| local & (1 << (k - 1 - i)) != 0)
                    .fold(0, |acc, (_, &t)| acc | bit(n, t))
            })
            .collect();
        let bases = (0..1usize << n).filter(|i| i & mask == 0).collect();
        let mut entries = Vec::new();
        for r in 0..m {
            for c in 0..m {
                let u = gate[(r, c)];
                if u != ZERO {
                    entries.push((r, c, u));
                }
            }
        }
        Ok(Self {
            offsets,
            bases,
            entries,
        })
    }

    /// `v <- U v`, or `v <- conj(U) v` when `conjugate`.
    pub(crate) fn apply_vec(&self, v: &mut [Complex64], conjugate: bool) {
        let m = self.offsets.len();
        let mut small = [ZERO; 2 * SMALL];
        let mut large = Vec::new();
        let (inp, out) = if m <= SMALL {
            small.split_at_mut(SMALL)
        } else {
            large.resize(2 * m, ZERO);
            large.split_at_mut(m)
        };
        for &base in &self.bases {
            for (x, off) in inp.iter_mut().zip(&self.offsets) {
                *x = v[base + off];
            }
            out[..m].fill(ZERO);
            if conjugate {
                for &(r, c, u) in &self.entries {
                    out[r] += u.conj() * inp[c];
                }
            } else {
                for &(r, c, u) in &self.entries {
                    out[r] += u * inp[c];
                }
            }
            for (y, off) in out.iter().zip(&self.offsets) {
                v[base + off] = *y;
            }
        }
    }

    /// `rho <- U rho U^dagger` on a row-major `dim × dim` buffer, as
    /// `(U (U rho)^dagger)^dagger` so both products act on whole rows.
    pub(crate) fn conjugate_density(&self, data: &mut [Complex64], dim: usize) {
        let mut scratch = Vec::new();
        self.left_multiply(data, dim, &mut scratch);
        dagger_in_place(data, dim);
        self.left_multiply(data, dim, &mut scratch);
        dagger_in_place(data, dim);
    }

    /// `A <- U A` on a row-major `dim × dim` buffer.
    fn left_multiply(&self, data: &mut [Complex64], dim: usize, scratch: &mut Vec<Complex64>) {
        let m = self.offsets.len();
        scratch.resize(m * dim, ZERO);
        for &base in &self.bases {
            for (k, &off) in self.offsets.iter().enumerate() {
                let row = &mut data[(base + off) * dim..][..dim];
                scratch[k * dim..][..dim].copy_from_slice(row);
                row.fill(ZERO);
            }
            for &(r, c, u) in &self.entries {
                let src = &scratch[c * dim..][..dim];
                let dst = &mut data[(base + self.offsets[r]) * dim..][..dim];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += u * s;
                }
            }
        }
    }

    /// Coefficients of `Tr[W g τ g^dagger]` as a quadratic form in the
    /// entries of a gate `g` placed like `self` whose nonzeros lie in
    /// `pattern` (pairs of local row, column):
    /// `Σ_{e,f} g[e] conj(g[f]) · out[f * P + e]`.
    pub(crate) fn trace_form(
        &self,
        w: &[Complex64],
        tau: &[Complex64],
        dim: usize,
        pattern: &[(usize, usize)],
    ) -> Vec<Complex64> {
        let p = pattern.len();
        let mut out = vec![ZERO; p * p];
        for (fi, &(i, l)) in pattern.iter().enumerate() {
            for (ei, &(j, k)) in pattern.iter().enumerate() {
                let (oi, oj, ok, ol) = (
                    self.offsets[i],
                    self.offsets[j],
                    self.offsets[k],
                    self.offsets[l],
                );
                let mut acc = ZERO;
                for &a in &self.bases {
                    let wrow = &w[(a + oi) * dim..][..dim];
                    let tcol = a + ol;
                    for &b in &self.bases {
                        acc += wrow[b + oj] * tau[(b + ok) * dim + tcol];
                    }
                }
                out[fi * p + ei] = acc;
            }
        }
        out
    }

    /// The same placement with `U^dagger`.
    pub(crate) fn adjoint(&self) -> Self {
        Self {
            offsets: self.offsets.clone(),
            bases: self.bases.clone(),
            entries: self
                .entries
                .iter()
                .map(|&(r, c, u)| (c, r, u.conj()))
                .collect(),
        }
    }
}

fn dagger_in_place(data: &mut [Complex64], dim: usize) {
    for r in 0..dim {
        data[r * dim + r] = data[r * dim + r].conj();
        for c in r + 1..dim {
            let (a, b) = (data[r * dim + c], data[c * dim + r]);
            data[r * dim + c] = b.conj();
            data[c * dim + r] = a.conj();
        }
    }
}

/// Gate size up to which `LocalOp` works in stack buffers.
const SMALL: usize = 16;
