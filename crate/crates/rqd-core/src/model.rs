// SPDX-License-Identifier: Apache-2.0

//! Interacting Aubry-André chain and its Jordan-Wigner qubit Hamiltonian.
//!
//! ```text
//! H = -J Σ_k (a†_k a_{k+1} + a†_{k+1} a_k)
//!     + h Σ_k cos(2πβk + φ) a†_k a_k
//!     + U Σ_k a†_k a_k a†_{k+1} a_{k+1}
//! ```
//!
//! with `k = 1..N` and periodic wrap `N + 1 ≡ 1`. Sites are 1-indexed here and
//! carried by qubit `k - 1`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::linalg::{bit, ComplexMatrix, Tolerances};
use crate::math;
use crate::{Error, Result};

/// Largest register `pauli_to_dense` will materialize.
pub const MAX_DENSE_QUBITS: usize = 12;

/// How the disorder cosine counts sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SiteIndexing {
    /// `cos(2πβk + φ)` with `k = 1..N`.
    #[default]
    OneBased,
    /// `k = 0..N-1`; kept for sensitivity checks.
    ZeroBased,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub num_sites: usize,
    pub hopping: f64,
    pub disorder: f64,
    pub interaction: f64,
    pub beta: f64,
    pub phi: f64,
    pub indexing: SiteIndexing,
}

impl ModelParams {
    /// `J = 1`, `h = U = 4`, `β = √2`.
    pub fn localized(num_sites: usize, phi: f64) -> Self {
        Self {
            num_sites,
            hopping: 1.0,
            disorder: 4.0,
            interaction: 4.0,
            beta: core::f64::consts::SQRT_2,
            phi,
            indexing: SiteIndexing::OneBased,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_sites < 2 {
            return Err(Error::InvalidConfig("model needs at least 2 sites".into()));
        }
        if !(0.0..2.0 * PI).contains(&self.phi) {
            return Err(Error::InvalidConfig("phi must lie in [0, 2π)".into()));
        }
        let finite = [self.hopping, self.disorder, self.interaction, self.beta];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "model coefficients must be finite".into(),
            ));
        }
        Ok(())
    }

    /// On-site energy of 1-indexed site `k`.
    pub fn onsite_energy(&self, k: usize) -> f64 {
        let index = match self.indexing {
            SiteIndexing::OneBased => k as f64,
            SiteIndexing::ZeroBased => (k - 1) as f64,
        };
        self.disorder * math::cos(2.0 * PI * self.beta * index + self.phi)
    }
}

/// Fermionic ladder operator on a 1-indexed site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderOp {
    Create(usize),
    Annihilate(usize),
}

impl LadderOp {
    pub fn site(self) -> usize {
        match self {
            Self::Create(s) | Self::Annihilate(s) => s,
        }
    }
}

/// `coefficient · op_0 op_1 …` (operators applied right to left).
#[derive(Debug, Clone, PartialEq)]
pub struct FermionTerm {
    pub coefficient: f64,
    pub ops: Vec<LadderOp>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FermionHamiltonian {
    pub terms: Vec<FermionTerm>,
}

impl FermionHamiltonian {
    fn push(&mut self, coefficient: f64, ops: &[LadderOp]) {
        if coefficient != 0.0 {
            self.terms.push(FermionTerm {
                coefficient,
                ops: ops.to_vec(),
            });
        }
    }
}

/// Builds the interacting Aubry-André Hamiltonian: all hoppings first, then
/// on-site disorder, then nearest-neighbour density-density terms. Terms with
/// a zero coefficient are omitted; at `N = 2` the wrap duplicates the single
/// bond and both copies are kept.
pub fn build_aubry_andre(params: &ModelParams) -> FermionHamiltonian {
    use LadderOp::{Annihilate as A, Create as C};
    let n = params.num_sites;
    let next = |k: usize| k % n + 1;
    let mut fh = FermionHamiltonian::default();
    for k in 1..=n {
        fh.push(-params.hopping, &[C(k), A(next(k))]);
        fh.push(-params.hopping, &[C(next(k)), A(k)]);
    }
    for k in 1..=n {
        fh.push(params.onsite_energy(k), &[C(k), A(k)]);
    }
    for k in 1..=n {
        fh.push(params.interaction, &[C(k), A(k), C(next(k)), A(next(k))]);
    }
    fh
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Self::X => ComplexMatrix::from_rows(&[[o, l], [l, o]]),
            Self::Y => ComplexMatrix::from_rows(&[[o, -i], [i, o]]),
            Self::Z => ComplexMatrix::from_rows(&[[l, o], [o, -l]]),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Self::X => 'X',
            Self::Y => 'Y',
            Self::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'X' => Some(Self::X),
            'Y' => Some(Self::Y),
            'Z' => Some(Self::Z),
            _ => None,
        }
    }
}

/// Real-weighted tensor product of Paulis; qubits absent from `factors` carry
/// the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    pub coefficient: f64,
    pub factors: BTreeMap<usize, Pauli>,
}

impl PauliString {
    pub fn new(coefficient: f64, factors: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        Self {
            coefficient,
            factors: factors.into_iter().collect(),
        }
    }

    /// Qubits carrying a non-identity factor, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.factors.keys().copied().collect()
    }

    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    /// Dense operator of the bare Pauli product (coefficient excluded).
    pub fn operator(&self, num_qubits: usize) -> ComplexMatrix {
        let dim = 1usize << num_qubits;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for col in 0..dim {
            let (row, phase) = pauli_action(&self.factors, num_qubits, col);
            m[(row, col)] = phase;
        }
        m
    }
}

/// `P |col> = phase |row>`.
fn pauli_action(factors: &BTreeMap<usize, Pauli>, n: usize, col: usize) -> (usize, Complex64) {
    let mut row = col;
    let mut phase = Complex64::new(1.0, 0.0);
    for (&q, &p) in factors {
        let set = col & bit(n, q) != 0;
        match p {
            Pauli::X => row ^= bit(n, q),
            Pauli::Y => {
                row ^= bit(n, q);
                // Y|0> = i|1>, Y|1> = -i|0>
                phase *= if set {
                    Complex64::new(0.0, -1.0)
                } else {
                    Complex64::new(0.0, 1.0)
                };
            }
            Pauli::Z => {
                if set {
                    phase = -phase;
                }
            }
        }
    }
    (row, phase)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian {
    pub num_qubits: usize,
    pub strings: Vec<PauliString>,
    pub constant_offset: f64,
}

impl PauliHamiltonian {
    /// Sum of the string operators plus `offset · I`.
    pub fn to_dense(&self) -> Result<ComplexMatrix> {
        pauli_to_dense(self)
    }

    /// Total occupation `Σ_q (I - Z_q) / 2` as a qubit Hamiltonian.
    pub fn number_operator(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            strings: (0..num_qubits)
                .map(|q| PauliString::new(-0.5, [(q, Pauli::Z)]))
                .collect(),
            constant_offset: 0.5 * num_qubits as f64,
        }
    }
}

/// Densifies a Pauli Hamiltonian (at most [`MAX_DENSE_QUBITS`] qubits).
pub fn pauli_to_dense(ph: &PauliHamiltonian) -> Result<ComplexMatrix> {
    if ph.num_qubits > MAX_DENSE_QUBITS {
        return Err(Error::TooLarge {
            num_qubits: ph.num_qubits,
            max: MAX_DENSE_QUBITS,
        });
    }
    let n = ph.num_qubits;
    let dim = 1usize << n;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for s in &ph.strings {
        if let Some((&q, _)) = s.factors.iter().next_back() {
            if q >= n {
                return Err(Error::TargetOutOfRange {
                    qubit: q,
                    num_qubits: n,
                });
            }
        }
        for col in 0..dim {
            let (row, phase) = pauli_action(&s.factors, n, col);
            m[(row, col)] += phase * s.coefficient;
        }
    }
    for i in 0..dim {
        m[(i, i)] += ph.constant_offset;
    }
    Ok(m)
}

/// Pauli word as `(x, z)` bit masks over qubits: X = (1, 0), Y = (1, 1),
/// Z = (0, 1).
type Word = (u64, u64);

/// Single-qubit product table: `a · b = phase · c`.
fn mul_single(a: (bool, bool), b: (bool, bool)) -> ((bool, bool), Complex64) {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let out = (a.0 ^ b.0, a.1 ^ b.1);
    // (x, z): I=(0,0), X=(1,0), Y=(1,1), Z=(0,1)
    let phase = match (a, b) {
        ((true, false), (true, true)) => i,   // XY = iZ
        ((true, true), (true, false)) => -i,  // YX = -iZ
        ((true, true), (false, true)) => i,   // YZ = iX
        ((false, true), (true, true)) => -i,  // ZY = -iX
        ((false, true), (true, false)) => i,  // ZX = iY
        ((true, false), (false, true)) => -i, // XZ = -iY
        _ => one,
    };
    (out, phase)
}

fn mul_words(a: Word, b: Word, n: usize) -> (Word, Complex64) {
    let mut phase = Complex64::new(1.0, 0.0);
    let mut out = (0u64, 0u64);
    for q in 0..n {
        let m = 1u64 << q;
        let pa = (a.0 & m != 0, a.1 & m != 0);
        let pb = (b.0 & m != 0, b.1 & m != 0);
        let (pc, ph) = mul_single(pa, pb);
        phase *= ph;
        if pc.0 {
            out.0 |= m;
        }
        if pc.1 {
            out.1 |= m;
        }
    }
    (out, phase)
}

/// Sort key: support ascending, then letters with X < Y < Z.
fn word_key(w: Word, n: usize) -> (Vec<usize>, Vec<u8>) {
    let support = (0..n)
        .filter(|q| (w.0 | w.1) & (1 << q) != 0)
        .collect::<Vec<_>>();
    let letters = support
        .iter()
        .map(|&q| match (w.0 & (1 << q) != 0, w.1 & (1 << q) != 0) {
            (true, false) => 0,
            (true, true) => 1,
            _ => 2,
        })
        .collect();
    (support, letters)
}

/// JW image of a single ladder operator on qubit `q` as a sum of two words.
fn ladder_words(op: LadderOp, q: usize) -> [(Word, Complex64); 2] {
    let zstring: u64 = (1u64 << q) - 1;
    let xq = 1u64 << q;
    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, 0.5);
    // a = (X + iY)/2 · Z_{<q}, a† = (X - iY)/2 · Z_{<q}; the Z string acts on
    // other qubits so ordering within the word is irrelevant.
    let y_coeff = match op {
        LadderOp::Annihilate(_) => half_i,
        LadderOp::Create(_) => -half_i,
    };
    [((xq, zstring), half), ((xq, zstring | xq), y_coeff)]
}

/// Jordan-Wigner transform with `a_k ↦ (X_{k-1} + iY_{k-1})/2 · Π_{j<k-1} Z_j`.
///
/// Like strings are merged in order of first appearance; strings whose
/// |coefficient| is below the drop tolerance are removed and the identity
/// component becomes `constant_offset`.
pub fn jordan_wigner(fh: &FermionHamiltonian, num_sites: usize) -> Result<PauliHamiltonian> {
    if num_sites > 64 {
        return Err(Error::TooLarge {
            num_qubits: num_sites,
            max: 64,
        });
    }
    let tol = Tolerances::DEFAULT.pauli_drop;
    let mut order: Vec<Word> = Vec::new();
    let mut acc: BTreeMap<Word, Complex64> = BTreeMap::new();

    for term in &fh.terms {
        let mut expansion: Vec<(Word, Complex64)> =
            vec![((0, 0), Complex64::new(term.coefficient, 0.0))];
        for &op in &term.ops {
            let site = op.site();
            if site == 0 || site > num_sites {
                return Err(Error::IndexOutOfRange { site, num_sites });
            }
            let factors = ladder_words(op, site - 1);
            let mut next = Vec::with_capacity(expansion.len() * 2);
            for &(w, c) in &expansion {
                for &(fw, fc) in &factors {
                    let (prod, phase) = mul_words(w, fw, num_sites);
                    next.push((prod, c * fc * phase));
                }
            }
            expansion = next;
        }
        // Words new to this term enter the order canonically sorted, so the
        // result does not depend on the operator expansion order.
        let mut fresh = Vec::new();
        for (w, c) in expansion {
            let slot = acc.entry(w).or_insert_with(|| {
                fresh.push(w);
                Complex64::new(0.0, 0.0)
            });
            *slot += c;
        }
        fresh.sort_by_key(|&w| word_key(w, num_sites));
        order.extend(fresh);
    }

    let mut strings = Vec::new();
    let mut offset = 0.0;
    for w in order {
        let c = acc[&w];
        if math::cabs(c) < tol {
            continue;
        }
        if c.im.abs() > 1e-10 * c.re.abs().max(1.0) {
            return Err(Error::NonHermitianTerms);
        }
        if w == (0, 0) {
            offset += c.re;
            continue;
        }
        let mut factors = BTreeMap::new();
        for q in 0..num_sites {
            let m = 1u64 << q;
            let p = match (w.0 & m != 0, w.1 & m != 0) {
                (true, false) => Pauli::X,
                (true, true) => Pauli::Y,
                (false, true) => Pauli::Z,
                (false, false) => continue,
            };
            factors.insert(q, p);
        }
        strings.push(PauliString {
            coefficient: c.re,
            factors,
        });
    }
    Ok(PauliHamiltonian {
        num_qubits: num_sites,
        strings,
        constant_offset: offset,
    })
}

/// Dense `2^N × 2^N` matrix of a fermionic Hamiltonian built directly on the
/// occupation-number basis (site `k` ↔ qubit `k - 1`, sign from the number of
/// occupied sites preceding `k`). Independent of the Pauli route.
pub fn fermion_to_dense(fh: &FermionHamiltonian, num_sites: usize) -> Result<ComplexMatrix> {
    if num_sites > MAX_DENSE_QUBITS {
        return Err(Error::TooLarge {
            num_qubits: num_sites,
            max: MAX_DENSE_QUBITS,
        });
    }
    let n = num_sites;
    let dim = 1usize << n;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for term in &fh.terms {
        for col in 0..dim {
            let mut state = col;
            let mut sign = 1.0;
            let mut alive = true;
            for &op in term.ops.iter().rev() {
                let site = op.site();
                if site == 0 || site > n {
                    return Err(Error::IndexOutOfRange { site, num_sites });
                }
                let b = bit(n, site - 1);
                let occupied = state & b != 0;
                let wanted = matches!(op, LadderOp::Annihilate(_));
                if occupied != wanted {
                    alive = false;
                    break;
                }
                let preceding = (0..site - 1).filter(|&j| state & bit(n, j) != 0).count();
                if preceding % 2 == 1 {
                    sign = -sign;
                }
                state ^= b;
            }
            if alive {
                m[(state, col)] += term.coefficient * sign;
            }
        }
    }
    Ok(m)
}
