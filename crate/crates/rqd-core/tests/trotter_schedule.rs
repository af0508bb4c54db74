// SPDX-License-Identifier: Apache-2.0

mod common;

use common::*;
use rand::Rng;
use rqd_core::circuit::{circuit_to_unitary, lower, Angle, Circuit, GateKind, GateTimings};
use rqd_core::linalg::ComplexMatrix;
use rqd_core::model::{build_aubry_andre, jordan_wigner, ModelParams, PauliHamiltonian};
use rqd_core::schedule::{layer_assignment, schedule, step_duration_ms};
use rqd_core::trotter::{append_term, trotter_step, TermOrder, TrotterConfig};
use rqd_core::Complex64;

const T: GateTimings = GateTimings::DEFAULT;

fn hamiltonian(n: usize, phi: f64) -> PauliHamiltonian {
    jordan_wigner(&build_aubry_andre(&ModelParams::localized(n, phi)), n).unwrap()
}

/// Dense sum of the non-identity strings.
fn traceless_dense(ph: &PauliHamiltonian) -> ComplexMatrix {
    let dim = 1usize << ph.num_qubits;
    ph.strings.iter().filter(|s| !s.factors.is_empty()).fold(
        ComplexMatrix::zeros(dim, dim),
        |acc, s| {
            &acc + &s
                .operator(ph.num_qubits)
                .scale(Complex64::new(s.coefficient, 0.0))
        },
    )
}

#[test]
fn every_term_circuit_is_its_exponential() {
    for n in [4, 6] {
        let ph = hamiltonian(n, TABLE_PHIS[1]);
        for s in ph.strings.iter().filter(|s| !s.factors.is_empty()) {
            let want = taylor_expm(&s.operator(n), s.coefficient * 0.04);
            for use_rzz in [true, false] {
                let mut c = Circuit::new(n);
                append_term(&mut c, s, 0.04, use_rzz, &T).unwrap();
                let u = circuit_to_unitary(&c).unwrap();
                assert!(
                    u.max_abs_diff(&want) < 1e-12,
                    "{:?} rzz={use_rzz}",
                    s.factors
                );
                let lowered = circuit_to_unitary(&lower(&c, &T).unwrap()).unwrap();
                assert!(lowered.max_abs_diff(&want) < 1e-12);
            }
        }
    }
}

#[test]
fn step_is_the_ordered_product_of_term_exponentials() {
    let n = 4;
    let ph = hamiltonian(n, TABLE_PHIS[2]);
    for order in [TermOrder::AsConstructed, TermOrder::SortedBySupport] {
        let cfg = TrotterConfig {
            dt: 0.04,
            term_order: order,
            use_rzz: true,
        };
        let u = circuit_to_unitary(&trotter_step(&ph, &cfg, &T).unwrap()).unwrap();
        let mut want = ComplexMatrix::identity(1 << n);
        for s in rqd_core::trotter::ordered_terms(&ph, order) {
            if !s.factors.is_empty() {
                want = &taylor_expm(&s.operator(n), s.coefficient * 0.04) * &want;
            }
        }
        assert!(u.max_abs_diff(&want) < 1e-12, "{order:?}");
    }
}

#[test]
fn step_error_is_second_order_in_dt() {
    let n = 6;
    let ph = hamiltonian(n, TABLE_PHIS[0]);
    let h = traceless_dense(&ph);
    let dts = [0.01, 0.02, 0.04, 0.08];
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let u = circuit_to_unitary(&trotter_step(&ph, &TrotterConfig::new(dt), &T).unwrap())
                .unwrap();
            u.max_abs_diff(&taylor_expm(&h, dt))
        })
        .collect();
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 4.0, ys.iter().sum::<f64>() / 4.0);
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope - 2.0).abs() <= 0.2, "slope {slope}, errors {errs:?}");
}

#[test]
fn localized_step_has_the_reference_size() {
    let ph = hamiltonian(6, TABLE_PHIS[0]);
    let c = trotter_step(&ph, &TrotterConfig::new(0.04), &T).unwrap();
    let lc = schedule(&lower(&c, &T).unwrap());
    assert_eq!((lc.num_gates(), lc.num_layers()), (124, 91));
    assert!((step_duration_ms(&lc) - 0.180375).abs() < 1e-12);
}

fn random_circuit(r: &mut impl Rng, n: usize, len: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for _ in 0..len {
        let a = r.gen_range(0..n);
        let mut b = r.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let theta = Angle::Value(r.gen_range(-3.0..3.0));
        match r.gen_range(0..6) {
            0 => c.add(GateKind::X, &[a], &T),
            1 => c.add(GateKind::H, &[a], &T),
            2 => c.add(GateKind::Rz(theta), &[a], &T),
            3 => c.add(GateKind::Ry(theta), &[a], &T),
            4 => c.add(GateKind::Cnot, &[a, b], &T),
            _ => c.add(GateKind::Rzz(theta), &[a, b], &T),
        }
        .unwrap();
    }
    c
}

#[test]
fn scheduler_matches_brute_force_layering() {
    let mut r = rng(5);
    for trial in 0..200 {
        let c = random_circuit(&mut r, 6, 50);
        let want = brute_force_layers(&c);
        assert_eq!(layer_assignment(&c), want, "trial {trial}");

        let lc = schedule(&c);
        assert_eq!(lc.num_layers(), want.iter().max().map_or(0, |m| m + 1));
        assert_eq!(lc.num_gates(), c.len());
        let mut total = 0.0;
        for (l, layer) in lc.layers().iter().enumerate() {
            let mut used = [false; 6];
            for g in &layer.gates {
                for &q in &g.targets {
                    assert!(!used[q], "trial {trial}: layer {l} reuses qubit {q}");
                    used[q] = true;
                }
            }
            let longest = layer
                .gates
                .iter()
                .map(|g| g.duration_ns)
                .fold(0.0, f64::max);
            assert_eq!(layer.duration_ns, longest);
            total += layer.duration_ns;
        }
        assert!((lc.total_duration_ns() - total).abs() < 1e-9);

        // Per-qubit gate order survives flattening.
        let flat = lc.flatten();
        for q in 0..6 {
            let seq = |c: &Circuit| -> Vec<String> {
                c.gates()
                    .iter()
                    .filter(|g| g.targets.contains(&q))
                    .map(|g| format!("{:?}{:?}", g.kind, g.targets))
                    .collect()
            };
            assert_eq!(seq(&flat), seq(&c));
        }
        if trial < 10 {
            let d = circuit_to_unitary(&flat)
                .unwrap()
                .max_abs_diff(&circuit_to_unitary(&c).unwrap());
            assert!(d < 1e-12);
        }
    }
}

#[test]
fn scheduler_basics() {
    let mut c = Circuit::new(4);
    for q in 0..3 {
        c.add(GateKind::X, &[q], &T).unwrap();
    }
    assert_eq!(schedule(&c).num_layers(), 1);
    let mut chain = Circuit::new(4);
    for q in 0..3 {
        chain.add(GateKind::Cnot, &[q, q + 1], &T).unwrap();
    }
    assert_eq!(schedule(&chain).num_layers(), 3);
    assert_eq!(step_duration_ms(&schedule(&Circuit::new(2))), 0.0);
}
