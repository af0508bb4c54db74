// SPDX-License-Identifier: Apache-2.0

//! Greedy layering of circuits into parallel time slices.

use alloc::vec;
use alloc::vec::Vec;

use crate::circuit::{Circuit, Gate};
use crate::Result;

/// Gates that run concurrently; the layer lasts as long as its slowest gate.
#[derive(Debug, Clone)]
pub struct Layer {
    pub gates: Vec<Gate>,
    pub duration_ns: f64,
}

#[derive(Debug, Clone)]
pub struct LayeredCircuit {
    num_qubits: usize,
    layers: Vec<Layer>,
}

impl LayeredCircuit {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn num_gates(&self) -> usize {
        self.layers.iter().map(|l| l.gates.len()).sum()
    }

    pub fn total_duration_ns(&self) -> f64 {
        self.layers.iter().map(|l| l.duration_ns).sum()
    }

    pub fn total_duration_ms(&self) -> f64 {
        self.total_duration_ns() * 1e-6
    }

    /// Layers concatenated back into one circuit.
    pub fn flatten(&self) -> Circuit {
        let mut c = Circuit::new(self.num_qubits);
        for g in self.layers.iter().flat_map(|l| &l.gates) {
            c.push(g.clone())
                .expect("targets were validated on construction");
        }
        c
    }

    /// Sequential composition; `other`'s layers run after `self`'s.
    pub fn then(mut self, other: &LayeredCircuit) -> Self {
        self.layers.extend(other.layers.iter().cloned());
        self
    }
}

/// Layer of every gate of `c`, by the greedy rule: a gate goes to layer
/// `max(counter[q] for q in targets)`, after which those counters become
/// that layer plus one.
pub fn layer_assignment(c: &Circuit) -> Vec<usize> {
    let mut counters = vec![0usize; c.num_qubits()];
    c.gates()
        .iter()
        .map(|g| {
            let l = g.targets.iter().map(|&q| counters[q]).max().unwrap_or(0);
            for &q in &g.targets {
                counters[q] = l + 1;
            }
            l
        })
        .collect()
}

/// Greedy layering; see [`layer_assignment`].
pub fn schedule(c: &Circuit) -> LayeredCircuit {
    let mut layers: Vec<Layer> = Vec::new();
    for (g, l) in c.gates().iter().zip(layer_assignment(c)) {
        if l == layers.len() {
            layers.push(Layer {
                gates: Vec::new(),
                duration_ns: 0.0,
            });
        }
        let layer = &mut layers[l];
        layer.duration_ns = layer.duration_ns.max(g.duration_ns);
        layer.gates.push(g.clone());
    }
    LayeredCircuit {
        num_qubits: c.num_qubits(),
        layers,
    }
}

pub fn step_duration_ms(lc: &LayeredCircuit) -> f64 {
    lc.total_duration_ms()
}

/// One row of the circuit report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitReport {
    pub phi: f64,
    pub total_time_ms: f64,
    pub layers: usize,
    pub gates: usize,
}

impl CircuitReport {
    pub fn new(phi: f64, lc: &LayeredCircuit) -> Self {
        Self {
            phi,
            total_time_ms: lc.total_duration_ms(),
            layers: lc.num_layers(),
            gates: lc.num_gates(),
        }
    }
}

/// Schedules a bound circuit after checking it is concrete.
pub fn schedule_bound(c: &Circuit) -> Result<LayeredCircuit> {
    if let Some(gate) = c.gates().iter().position(|g| !g.is_bound()) {
        return Err(crate::Error::UnboundParameter { gate });
    }
    Ok(schedule(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{GateKind, GateTimings};

    const T: GateTimings = GateTimings {
        single_qubit_ns: 100.0,
        two_qubit_ns: 300.0,
        oracle_ns: 26_000.0,
    };

    #[test]
    fn disjoint_gates_share_a_layer() {
        let mut c = Circuit::new(3);
        for q in 0..3 {
            c.add(GateKind::X, &[q], &T).unwrap();
        }
        let lc = schedule(&c);
        assert_eq!(lc.num_layers(), 1);
        assert_eq!(lc.num_gates(), 3);
    }

    #[test]
    fn chain_is_sequential() {
        let mut c = Circuit::new(4);
        for q in 0..3 {
            c.add(GateKind::Cnot, &[q, q + 1], &T).unwrap();
        }
        assert_eq!(schedule(&c).num_layers(), 3);
    }

    #[test]
    fn durations() {
        assert_eq!(step_duration_ms(&schedule(&Circuit::new(2))), 0.0);
        let mut c = Circuit::new(2);
        c.add(GateKind::Cnot, &[0, 1], &T).unwrap();
        assert!((step_duration_ms(&schedule(&c)) - 3.0e-4).abs() < 1e-18);

        let mut mixed = Circuit::new(3);
        mixed.add(GateKind::X, &[0], &T).unwrap();
        mixed.add(GateKind::Cnot, &[1, 2], &T).unwrap();
        let lc = schedule(&mixed);
        assert_eq!(lc.num_layers(), 1);
        assert_eq!(lc.layers()[0].duration_ns, 300.0);
    }

    #[test]
    fn later_gate_can_fill_earlier_layer() {
        let mut c = Circuit::new(3);
        c.add(GateKind::Cnot, &[0, 1], &T).unwrap();
        c.add(GateKind::X, &[0], &T).unwrap();
        c.add(GateKind::X, &[2], &T).unwrap();
        let lc = schedule(&c);
        assert_eq!(lc.num_layers(), 2);
        assert_eq!(lc.layers()[0].gates.len(), 2);
    }
}
