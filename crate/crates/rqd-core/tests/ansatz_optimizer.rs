// SPDX-License-Identifier: Apache-2.0

mod common;

use std::sync::Arc;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use rqd_core::ansatz::{a_gate_matrix, build_ansatz_circuit, ALayout, AnsatzSpec};
use rqd_core::circuit::{apply_circuit, GateTimings};
use rqd_core::dynamics::PreparedModel;
use rqd_core::linalg::StateVector;
use rqd_core::model::ModelParams;
use rqd_core::noise::{DensityMatrix, NoiseParams};
use rqd_core::optimizer::{
    minimize, numeric_gradient, FidelityMode, LbfgsConfig, ObjectiveContext,
};
use rqd_core::Complex64;

const T: GateTimings = GateTimings::DEFAULT;

/// Norm of the part of `psi` outside the `k`-particle sector.
fn sector_leak(psi: &StateVector, k: u32) -> f64 {
    psi.amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| i.count_ones() != k)
        .map(|(_, a)| a.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[test]
fn number_conserving_ansatz_stays_in_the_three_particle_sector() {
    let spec = AnsatzSpec::number_conserving(6, ALayout::BrickWallV1, T);
    assert_eq!(spec.num_parameters(), 38);
    assert_eq!(spec.num_particles, 3);
    let mut r = rng(40);
    for _ in 0..1000 {
        let params: Vec<f64> = (0..38).map(|_| r.gen_range(-10.0..10.0)).collect();
        let c = build_ansatz_circuit(&spec, &params).unwrap();
        let psi = apply_circuit(&c, &StateVector::zero_state(6)).unwrap();
        assert!(sector_leak(&psi, 3) < 1e-10);
        assert!((psi.norm() - 1.0).abs() < 1e-12);
    }
    assert!(build_ansatz_circuit(&spec, &[0.0; 37]).is_err());
}

#[test]
fn a_gate_only_mixes_the_single_excitation_block() {
    let mut r = rng(41);
    for _ in 0..50 {
        let m = a_gate_matrix(r.gen_range(-7.0..7.0), r.gen_range(-7.0..7.0));
        assert!(m.unitarity_deviation() < 1e-14);
        for (i, j) in [(0, 1), (0, 2), (0, 3), (3, 1), (3, 2)] {
            assert_eq!(m[(i, j)], C0);
            assert_eq!(m[(j, i)], C0);
        }
        assert_eq!((m[(0, 0)], m[(3, 3)]), (C1, C1));
    }
}

#[test]
fn oracle_ansatz_is_the_exact_propagator() {
    let pm = PreparedModel::new(&ModelParams::localized(6, TABLE_PHIS[3])).unwrap();
    let spec = AnsatzSpec::oracle_from_eigen(Arc::clone(&pm.eigen), 6, T);
    assert_eq!(spec.num_parameters(), 1);
    let h = pm.pauli.to_dense().unwrap();
    let cdw = StateVector::from_occupations(&[true, false, true, false, true, false]);
    for theta in [0.0, 0.04, 1.3, -2.0] {
        let c = build_ansatz_circuit(&spec, &[theta]).unwrap();
        let psi = apply_circuit(&c, &StateVector::zero_state(6)).unwrap();
        let want = taylor_expm(&h, theta).matvec(cdw.amplitudes());
        let overlap: Complex64 = want
            .iter()
            .zip(psi.amplitudes())
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-10, "theta {theta}");
    }
}

#[test]
fn gradient_of_a_quadratic() {
    let g = numeric_gradient(|x| x.iter().map(|v| v * v).sum(), &[1.0, 2.0], 1e-5);
    assert!((g[0] - 2.0).abs() < 1e-6 && (g[1] - 4.0).abs() < 1e-6);
    assert_eq!(
        numeric_gradient(|_| 3.0, &[0.5, -0.5, 1.0], 1e-5),
        vec![0.0; 3]
    );
}

#[test]
fn minimize_a_convex_quadratic() {
    let mut r = rng(42);
    for _ in 0..5 {
        let a: Vec<f64> = (0..5).map(|_| r.gen_range(-1.0..1.0)).collect();
        let res = minimize(
            |x| x.iter().zip(&a).map(|(x, a)| (x - a).powi(2)).sum(),
            &[0.0; 5],
            &LbfgsConfig::DEFAULT,
        );
        assert!(res.iterations <= 30);
        for (x, a) in res.params.iter().zip(&a) {
            assert!((x - a).abs() < 1e-8);
        }
    }
}

fn rosenbrock(x: &[f64]) -> f64 {
    (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
}

#[test]
fn minimize_rosenbrock() {
    let cfg = LbfgsConfig {
        tol: 1e-14,
        max_iter: 200,
        ..LbfgsConfig::DEFAULT
    };
    let res = minimize(rosenbrock, &[-1.2, 1.0], &cfg);
    assert!(res.iterations <= 200);
    assert!(
        (res.params[0] - 1.0).abs() < 1e-5 && (res.params[1] - 1.0).abs() < 1e-5,
        "{:?}",
        res.params
    );
    for w in res.trace.windows(2) {
        assert!(w[1].objective <= w[0].objective);
    }
}

#[test]
fn minimize_commutes_with_coordinate_permutations() {
    // Coupled and non-quadratic but well conditioned, so rounding differences
    // from the changed summation order stay at machine precision.
    let f = |x: &[f64]| {
        (x[0] - 0.3).powi(2)
            + 2.0 * (x[1] + 0.5).powi(2)
            + 0.5 * (x[2] - 1.0).powi(2)
            + 1.5 * (x[3] - 0.1).powi(2)
            + 0.1 * (x[0] * x[1] + x[2] * x[3]).powi(2)
            + 0.05 * x[1].powi(4)
    };
    let x0 = [1.0, -2.0, 0.5, 0.8];
    for perm in [[2, 0, 3, 1], [3, 2, 1, 0], [1, 0, 2, 3]] {
        let g = |y: &[f64]| {
            let mut x = [0.0; 4];
            for (k, &p) in perm.iter().enumerate() {
                x[p] = y[k];
            }
            f(&x)
        };
        let y0: Vec<f64> = perm.iter().map(|&p| x0[p]).collect();
        let a = minimize(f, &x0, &LbfgsConfig::DEFAULT);
        let b = minimize(g, &y0, &LbfgsConfig::DEFAULT);
        for (k, &p) in perm.iter().enumerate() {
            assert!((b.params[k] - a.params[p]).abs() < 1e-10, "{perm:?}");
        }
    }
}

fn oracle_context(mode: FidelityMode, noise: NoiseParams, theta: f64) -> ObjectiveContext {
    let pm = PreparedModel::new(&ModelParams::localized(6, TABLE_PHIS[0])).unwrap();
    let ansatz = AnsatzSpec::oracle_from_eigen(Arc::clone(&pm.eigen), 6, T);
    let c = build_ansatz_circuit(&ansatz, &[theta]).unwrap();
    let psi = apply_circuit(&c, &StateVector::zero_state(6)).unwrap();
    ObjectiveContext {
        stepped_state: DensityMatrix::from_pure(&psi),
        ansatz,
        noise,
        fidelity_mode: mode,
    }
}

#[test]
fn oracle_objective_converges_without_noise() {
    for mode in [
        FidelityMode::InverseCircuitNoiseless,
        FidelityMode::PureOverlap,
    ] {
        let ctx = oracle_context(mode, NoiseParams::disabled(), 0.37);
        let res = ctx.optimize(&[0.33], &LbfgsConfig::DEFAULT).unwrap();
        assert!(res.iterations <= 80);
        assert!(
            res.objective_value < 1e-12,
            "{mode:?}: {}",
            res.objective_value
        );
    }
}

#[test]
fn objective_gradient_matches_richardson_differences() {
    let ctx = oracle_context(
        FidelityMode::InverseCircuitNoisy,
        NoiseParams::uniform(25.0),
        0.5,
    );
    let f = |x: &[f64]| ctx.objective(x).unwrap();
    for x in [0.2, 0.45, 0.9] {
        let d = |h: f64| (f(&[x + h]) - f(&[x - h])) / (2.0 * h);
        let rich = (4.0 * d(5e-4) - d(1e-3)) / 3.0;
        let g = numeric_gradient(f, &[x], 1e-6)[0];
        assert!(
            (g - rich).abs() <= 1e-4 * rich.abs().max(1e-6),
            "x={x}: {g} vs {rich}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn fidelity_and_objective_stay_in_range(theta in -3.0f64..3.0, t1 in 0.5f64..100.0) {
        let ctx = oracle_context(FidelityMode::InverseCircuitNoisy, NoiseParams::uniform(t1), 0.8);
        let f = ctx.fidelity(&[theta]).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-9).contains(&f));
        let o = ctx.objective(&[theta]).unwrap();
        prop_assert!((0.0..=1.0).contains(&o));
    }
}
