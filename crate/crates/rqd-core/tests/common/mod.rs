// SPDX-License-Identifier: Apache-2.0

//! Reference implementations used as test oracles. Each one is written from
//! the defining formula, not from the library code path it checks.

#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rqd_core::circuit::Circuit;
use rqd_core::linalg::{kron, ComplexMatrix};
use rqd_core::model::ModelParams;
use rqd_core::Complex64;

pub const C0: Complex64 = Complex64::new(0.0, 0.0);
pub const C1: Complex64 = Complex64::new(1.0, 0.0);

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_complex(r: &mut impl Rng) -> Complex64 {
    Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

pub fn random_hermitian(n: usize, r: &mut impl Rng) -> ComplexMatrix {
    let a = ComplexMatrix::from_fn(n, n, |_, _| random_complex(r));
    &a + &a.adjoint()
}

/// `A A† / Tr`, a full-rank density matrix.
pub fn random_density(n: usize, r: &mut impl Rng) -> ComplexMatrix {
    let a = ComplexMatrix::from_fn(n, n, |_, _| random_complex(r));
    let m = &a * &a.adjoint();
    let tr = m.trace();
    m.scale(tr.inv())
}

pub fn random_state(num_qubits: usize, r: &mut impl Rng) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..1usize << num_qubits)
        .map(|_| random_complex(r))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// `exp(-i·s·H)` from 40 Taylor terms, after scaling and squaring.
pub fn taylor_expm(h: &ComplexMatrix, s: f64) -> ComplexMatrix {
    let n = h.rows();
    let norm = h.frobenius_norm() * s.abs();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let a = h.scale(Complex64::new(0.0, -s / f64::from(1u32 << squarings)));
    let mut term = ComplexMatrix::identity(n);
    let mut sum = ComplexMatrix::identity(n);
    for k in 1..=40 {
        term = (&term * &a).scale(Complex64::new(1.0 / k as f64, 0.0));
        sum = &sum + &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Single-qubit operator `op` on qubit `q` of `n` (qubit 0 most significant).
pub fn embed(op: &ComplexMatrix, q: usize, n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(1);
    for k in 0..n {
        let f = if k == q {
            op.clone()
        } else {
            ComplexMatrix::identity(2)
        };
        m = kron(&m, &f);
    }
    m
}

/// Interacting Aubry-André Hamiltonian on a ring, built directly on the
/// occupation basis. A hop between sites `k < l` picks up
/// `(-1)^(occupied sites strictly between)`.
pub fn aubry_andre_oracle(p: &ModelParams) -> ComplexMatrix {
    let n = p.num_sites;
    let dim = 1usize << n;
    let occ = |s: usize, site: usize| (s >> (n - site)) & 1 == 1;
    let mut m = ComplexMatrix::zeros(dim, dim);
    let bonds: Vec<(usize, usize)> = (1..=n).map(|k| (k, k % n + 1)).collect();
    for s in 0..dim {
        let mut diag = 0.0;
        for k in 1..=n {
            if occ(s, k) {
                diag += p.onsite_energy(k);
            }
        }
        for &(a, b) in &bonds {
            if occ(s, a) && occ(s, b) {
                diag += p.interaction;
            }
        }
        m[(s, s)] += Complex64::new(diag, 0.0);
        for &(a, b) in &bonds {
            // Both directions of the bond: c†_a c_b and c†_b c_a.
            for (to, from) in [(a, b), (b, a)] {
                if occ(s, from) && !occ(s, to) {
                    let (lo, hi) = (to.min(from), to.max(from));
                    let between = (lo + 1..hi).filter(|&j| occ(s, j)).count();
                    let sign = if between % 2 == 0 { 1.0 } else { -1.0 };
                    let target = s ^ (1 << (n - from)) ^ (1 << (n - to));
                    m[(target, s)] += Complex64::new(-p.hopping * sign, 0.0);
                }
            }
        }
    }
    m
}

/// Total particle number, diagonal in the occupation basis.
pub fn number_oracle(n: usize) -> ComplexMatrix {
    let diag: Vec<Complex64> = (0..1usize << n)
        .map(|s| Complex64::new(s.count_ones() as f64, 0.0))
        .collect();
    ComplexMatrix::from_diagonal(&diag)
}

/// Right-hand side of the per-qubit master equation with no Hamiltonian:
/// amplitude damping at `1/(2 T1)` and pure dephasing at `κ/T2*`, written with
/// the annihilation operator `σ = |0⟩⟨1|`.
pub struct LindbladOracle {
    ops: Vec<(ComplexMatrix, ComplexMatrix, ComplexMatrix)>,
    rate1: f64,
    rate2: f64,
}

impl LindbladOracle {
    pub fn new(n: usize, t1: f64, t2: f64, kappa: f64) -> Self {
        let sigma = ComplexMatrix::from_rows(&[[C0, C1], [C0, C0]]);
        let ops = (0..n)
            .map(|q| {
                let s = embed(&sigma, q, n);
                let sd = s.adjoint();
                let num = &sd * &s;
                (s, sd, num)
            })
            .collect();
        Self {
            ops,
            rate1: 1.0 / (2.0 * t1),
            rate2: kappa / t2,
        }
    }

    pub fn rhs(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(rho.rows(), rho.cols());
        let two = Complex64::new(2.0, 0.0);
        for (s, sd, num) in &self.ops {
            let anti = &(num * rho) + &(rho * num);
            let jump = &(s * rho) * sd;
            let deph = &(num * rho) * num;
            let amp = (&anti - &jump.scale(two)).scale(Complex64::new(-self.rate1, 0.0));
            let dep = (&anti - &deph.scale(two)).scale(Complex64::new(-self.rate2, 0.0));
            out = &(&out + &amp) + &dep;
        }
        out
    }

    /// Classical fourth-order Runge-Kutta over `tau` in `steps` steps.
    pub fn integrate(&self, rho: &ComplexMatrix, tau: f64, steps: usize) -> ComplexMatrix {
        let h = tau / steps as f64;
        let c = |x: f64| Complex64::new(x, 0.0);
        let mut y = rho.clone();
        for _ in 0..steps {
            let k1 = self.rhs(&y);
            let k2 = self.rhs(&(&y + &k1.scale(c(h / 2.0))));
            let k3 = self.rhs(&(&y + &k2.scale(c(h / 2.0))));
            let k4 = self.rhs(&(&y + &k3.scale(c(h))));
            let incr = &(&k1 + &k2.scale(c(2.0))) + &(&k3.scale(c(2.0)) + &k4);
            y = &y + &incr.scale(c(h / 6.0));
        }
        y
    }
}

/// Earliest-feasible layer of every gate: one past the deepest earlier gate
/// that shares a qubit with it. Quadratic in the gate count on purpose.
pub fn brute_force_layers(c: &Circuit) -> Vec<usize> {
    let gates = c.gates();
    let mut layer = vec![0usize; gates.len()];
    for i in 0..gates.len() {
        for j in 0..i {
            if gates[j]
                .targets
                .iter()
                .any(|q| gates[i].targets.contains(q))
            {
                layer[i] = layer[i].max(layer[j] + 1);
            }
        }
    }
    layer
}

/// Positive semidefiniteness up to `eps`: Cholesky of `m + eps·I` succeeds.
pub fn is_positive_semidefinite(m: &ComplexMatrix, eps: f64) -> bool {
    let n = m.rows();
    let mut a: Vec<Complex64> = m.data().to_vec();
    for i in 0..n {
        a[i * n + i] += eps;
    }
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for k in 0..j {
            d -= a[j * n + k].norm_sqr();
        }
        if d <= 0.0 {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k].conj();
            }
            a[i * n + j] = s / d;
        }
    }
    true
}

/// The sixteen disorder phases of the reference circuit table.
pub const TABLE_PHIS: [f64; 16] = [
    1.93146731, 5.64240529, 1.57973617, 0.08769829, 4.42879993, 1.59366522, 1.69972758, 3.26279226,
    6.09740422, 3.34460202, 3.26276960, 4.52159699, 2.94545992, 4.71502552, 1.08255072, 4.85940981,
];
