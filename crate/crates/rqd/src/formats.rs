// SPDX-License-Identifier: Apache-2.0

//! On-disk formats: circuit text, Hamiltonian JSON and the CSV tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rqd_core::circuit::{Angle, Circuit, Gate, GateKind, GateTimings};
use rqd_core::dynamics::RqdTrajectory;
use rqd_core::linalg::HermitianEigen;
use rqd_core::model::{Pauli, PauliHamiltonian, PauliString};
use rqd_core::schedule::CircuitReport;
use serde::{Deserialize, Serialize};

use crate::Error;

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(
        ".{name}.{}.{}.tmp",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let result = (|| {
        use std::io::Write;
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

/// Shortest round-trip text for a number; integral values print without a
/// fractional part.
pub fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:?}")
    }
}

// ---------------------------------------------------------------------------
// Circuit text: `KIND q0[,q1...] [param...]`, one gate per line. Symbolic
// angles are written `p<index>`. A `# qubits N` header fixes the register.

fn fmt_angle(a: Angle) -> String {
    match a {
        Angle::Value(v) => format!("{v:?}"),
        Angle::Param(i) => format!("p{i}"),
    }
}

pub fn circuit_to_text(c: &Circuit) -> String {
    let mut out = format!("# qubits {}\n", c.num_qubits());
    for g in c.gates() {
        let targets: Vec<String> = g.targets.iter().map(|q| q.to_string()).collect();
        let _ = write!(out, "{} {}", g.kind.name(), targets.join(","));
        for (_, a) in g.kind.angles() {
            let _ = write!(out, " {}", fmt_angle(a));
        }
        out.push('\n');
    }
    out
}

fn parse_angle(s: &str) -> Option<Angle> {
    match s.strip_prefix('p') {
        Some(i) => i.parse().ok().map(Angle::Param),
        None => s.parse().ok().map(Angle::Value),
    }
}

/// Inverse of [`circuit_to_text`]. `ORACLE` lines need `generator`;
/// durations are recomputed from `timings`.
pub fn circuit_from_text(
    text: &str,
    timings: &GateTimings,
    generator: Option<&Arc<HermitianEigen>>,
) -> Result<Circuit, Error> {
    let mut circuit: Option<Circuit> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let bad = |what: &str| Error::Format(format!("line {}: {what}", lineno + 1));
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(n) = rest.trim().strip_prefix("qubits") {
                let n = n.trim().parse().map_err(|_| bad("bad qubit count"))?;
                circuit = Some(Circuit::new(n));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let c = circuit
            .as_mut()
            .ok_or_else(|| bad("gate before '# qubits' header"))?;
        let mut fields = line.split_whitespace();
        let kind = fields.next().expect("line is non-empty");
        let targets = fields
            .next()
            .ok_or_else(|| bad("missing targets"))?
            .split(',')
            .map(|q| q.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad("bad target list"))?;
        let angles = fields
            .map(|s| parse_angle(s).ok_or_else(|| bad("bad angle")))
            .collect::<Result<Vec<_>, _>>()?;
        let want = |n: usize| {
            if angles.len() == n {
                Ok(())
            } else {
                Err(bad(&format!("{kind} takes {n} angle(s)")))
            }
        };
        let kind = match kind {
            "X" => want(0).map(|_| GateKind::X)?,
            "H" => want(0).map(|_| GateKind::H)?,
            "CNOT" => want(0).map(|_| GateKind::Cnot)?,
            "RZ" => want(1).map(|_| GateKind::Rz(angles[0]))?,
            "RX" => want(1).map(|_| GateKind::Rx(angles[0]))?,
            "RY" => want(1).map(|_| GateKind::Ry(angles[0]))?,
            "RZZ" => want(1).map(|_| GateKind::Rzz(angles[0]))?,
            "A" => want(2).map(|_| GateKind::A {
                theta: angles[0],
                phi: angles[1],
            })?,
            "ORACLE" => {
                want(1)?;
                let generator = generator.ok_or_else(|| bad("ORACLE needs a generator"))?;
                GateKind::Oracle {
                    theta: angles[0],
                    generator: Arc::clone(generator),
                }
            }
            k => return Err(bad(&format!("unknown gate kind {k:?}"))),
        };
        let gate = Gate::new(kind, targets, timings).map_err(|e| bad(&e.to_string()))?;
        c.push(gate).map_err(|e| bad(&e.to_string()))?;
    }
    circuit.ok_or_else(|| Error::Format("missing '# qubits' header".into()))
}

// ---------------------------------------------------------------------------
// Pauli Hamiltonian JSON.

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StringDoc {
    coeff: f64,
    paulis: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HamiltonianDoc {
    num_qubits: usize,
    strings: Vec<StringDoc>,
    offset: f64,
}

pub fn hamiltonian_to_json(h: &PauliHamiltonian) -> String {
    let doc = HamiltonianDoc {
        num_qubits: h.num_qubits,
        strings: h
            .strings
            .iter()
            .map(|s| StringDoc {
                coeff: s.coefficient,
                paulis: s
                    .factors
                    .iter()
                    .map(|(q, p)| (q.to_string(), p.symbol().to_string()))
                    .collect(),
            })
            .collect(),
        offset: h.constant_offset,
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

pub fn hamiltonian_from_json(text: &str) -> Result<PauliHamiltonian, Error> {
    let doc: HamiltonianDoc =
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let mut strings = Vec::with_capacity(doc.strings.len());
    for s in doc.strings {
        let mut factors = Vec::new();
        for (q, p) in &s.paulis {
            let q: usize = q
                .parse()
                .map_err(|_| Error::Format(format!("qubit key {q:?} is not an index")))?;
            if q >= doc.num_qubits {
                return Err(Error::Format(format!("qubit {q} out of range")));
            }
            let mut chars = p.chars();
            let pauli = match (chars.next(), chars.next()) {
                (Some(c), None) => Pauli::from_symbol(c),
                _ => None,
            }
            .ok_or_else(|| Error::Format(format!("unknown Pauli {p:?}")))?;
            factors.push((q, pauli));
        }
        strings.push(PauliString::new(s.coeff, factors));
    }
    Ok(PauliHamiltonian {
        num_qubits: doc.num_qubits,
        strings,
        constant_offset: doc.offset,
    })
}

// ---------------------------------------------------------------------------
// CSV tables.

pub const TRAJECTORY_HEADER: [&str; 8] = [
    "t",
    "imbalance",
    "fidelity_noisy",
    "fidelity_pure",
    "objective",
    "iterations",
    "converged",
    "cum_circuit_ms",
];

/// One trajectory CSV row; optimizer columns are empty outside restarts.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub imbalance: f64,
    pub fidelity_noisy: f64,
    pub fidelity_pure: f64,
    pub objective: Option<f64>,
    /// Mean when the row is an average.
    pub iterations: Option<f64>,
    pub converged: Option<bool>,
    pub cum_circuit_ms: f64,
}

pub fn trajectory_rows(tr: &RqdTrajectory) -> Vec<TrajectoryRow> {
    tr.records
        .iter()
        .map(|r| TrajectoryRow {
            t: r.t,
            imbalance: r.imbalance,
            fidelity_noisy: r.fidelity_noisy,
            fidelity_pure: r.fidelity_pure,
            objective: r.optimizer.as_ref().map(|o| o.objective),
            iterations: r.optimizer.as_ref().map(|o| o.iterations as f64),
            converged: r.optimizer.as_ref().map(|o| o.converged),
            cum_circuit_ms: r.cum_circuit_ms,
        })
        .collect()
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn trajectory_csv(rows: &[TrajectoryRow]) -> Vec<u8> {
    let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
    csv_bytes(
        &TRAJECTORY_HEADER,
        rows.iter().map(|r| {
            vec![
                fmt_num(r.t),
                fmt_num(r.imbalance),
                fmt_num(r.fidelity_noisy),
                fmt_num(r.fidelity_pure),
                opt(r.objective),
                opt(r.iterations),
                r.converged.map(|c| c.to_string()).unwrap_or_default(),
                fmt_num(r.cum_circuit_ms),
            ]
        }),
    )
}

fn read_table(bytes: &[u8], header: &[&str]) -> Result<Vec<csv::StringRecord>, Error> {
    let mut r = csv::Reader::from_reader(bytes);
    let found = r
        .headers()
        .map_err(|e| Error::Format(e.to_string()))?
        .clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Format(format!(
            "expected header {}",
            header.join(",")
        )));
    }
    r.records()
        .map(|rec| rec.map_err(|e| Error::Format(e.to_string())))
        .collect()
}

fn parse_num(s: &str, col: &str) -> Result<f64, Error> {
    s.parse()
        .map_err(|_| Error::Format(format!("column {col}: {s:?} is not a number")))
}

fn parse_opt<T>(s: &str, col: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<T>, Error> {
    if s.is_empty() {
        Ok(None)
    } else {
        f(s).map(Some)
            .ok_or_else(|| Error::Format(format!("column {col}: bad value {s:?}")))
    }
}

pub fn parse_trajectory_csv(bytes: &[u8]) -> Result<Vec<TrajectoryRow>, Error> {
    let rows = read_table(bytes, &TRAJECTORY_HEADER)?;
    if rows.is_empty() {
        return Err(Error::Format("trajectory has no rows".into()));
    }
    rows.iter()
        .map(|r| {
            Ok(TrajectoryRow {
                t: parse_num(&r[0], "t")?,
                imbalance: parse_num(&r[1], "imbalance")?,
                fidelity_noisy: parse_num(&r[2], "fidelity_noisy")?,
                fidelity_pure: parse_num(&r[3], "fidelity_pure")?,
                objective: parse_opt(&r[4], "objective", |s| s.parse().ok())?,
                iterations: parse_opt(&r[5], "iterations", |s| s.parse().ok())?,
                converged: parse_opt(&r[6], "converged", |s| s.parse().ok())?,
                cum_circuit_ms: parse_num(&r[7], "cum_circuit_ms")?,
            })
        })
        .collect()
}

pub const TABLE_HEADER: [&str; 4] = ["phi", "total_time_ms", "layers", "gates"];

pub fn table_csv(rows: &[CircuitReport]) -> Vec<u8> {
    csv_bytes(
        &TABLE_HEADER,
        rows.iter().map(|r| {
            vec![
                format!("{:.8}", r.phi),
                fmt_num(r.total_time_ms),
                r.layers.to_string(),
                r.gates.to_string(),
            ]
        }),
    )
}

pub fn parse_table_csv(bytes: &[u8]) -> Result<Vec<CircuitReport>, Error> {
    read_table(bytes, &TABLE_HEADER)?
        .iter()
        .map(|r| {
            let int = |s: &str, col: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::Format(format!("column {col}: {s:?} is not a count")))
            };
            Ok(CircuitReport {
                phi: parse_num(&r[0], "phi")?,
                total_time_ms: parse_num(&r[1], "total_time_ms")?,
                layers: int(&r[2], "layers")?,
                gates: int(&r[3], "gates")?,
            })
        })
        .collect()
}

pub const DIAGNOSTICS_HEADER: [&str; 4] = ["t", "iteration", "objective", "grad_norm"];

/// Optimizer traces of every restart, stacked; `t` names the restart.
pub fn diagnostics_csv(tr: &RqdTrajectory) -> Vec<u8> {
    let rows = tr.records.iter().flat_map(|r| {
        r.optimizer.iter().flat_map(move |o| {
            o.trace.iter().map(move |it| {
                vec![
                    fmt_num(r.t),
                    it.iteration.to_string(),
                    fmt_num(it.objective),
                    fmt_num(it.grad_norm),
                ]
            })
        })
    });
    csv_bytes(&DIAGNOSTICS_HEADER, rows)
}

/// Generic numeric table with a caller-chosen header.
pub fn numeric_csv(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    csv_bytes(header, rows.iter().cloned())
}

/// File stem shared by a run's trajectory and diagnostics files.
pub fn run_stem(strategy: &str, phi: f64, t1_ms: Option<f64>) -> String {
    let t1 = t1_ms.map(fmt_num).unwrap_or_else(|| "none".into());
    format!("{strategy}_phi{phi:.8}_T{t1}")
}

/// Inverse of [`run_stem`]; `phi` comes back rounded to eight decimals.
pub fn parse_run_stem(stem: &str) -> Option<(String, f64, Option<f64>)> {
    let (head, t1) = stem.rsplit_once("_T")?;
    let (strategy, phi) = head.rsplit_once("_phi")?;
    let t1 = match t1 {
        "none" => None,
        s => Some(s.parse().ok()?),
    };
    Some((strategy.to_string(), phi.parse().ok()?, t1))
}
