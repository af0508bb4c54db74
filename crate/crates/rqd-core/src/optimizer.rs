// SPDX-License-Identifier: Apache-2.0

//! L-BFGS with central-difference gradients, and the restart objective
//! `(1 - F)^2` built on the noisy simulator.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::ansatz::{build_ansatz_circuit, AnsatzKind, AnsatzSpec};
use crate::circuit::{apply_circuit, gate_matrix, invert, GateKind};
use crate::linalg::StateVector;
use crate::linalg::{ComplexMatrix, LocalOp, ZERO};
use crate::noise::{DensityMatrix, NoiseParams, NoisyProgram};
use crate::schedule::{layer_assignment, schedule};
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsConfig {
    /// Stop once the objective or the gradient's max-norm falls to this.
    pub tol: f64,
    pub max_iter: usize,
    pub history: usize,
    /// Central-difference step.
    pub fd_step: f64,
    /// Sufficient-decrease constant of the Armijo condition.
    pub armijo: f64,
    pub backtrack: f64,
    pub max_line_search: usize,
}

impl LbfgsConfig {
    pub const DEFAULT: Self = Self {
        tol: 1e-12,
        max_iter: 80,
        history: 10,
        fd_step: 1e-6,
        armijo: 1e-4,
        backtrack: 0.5,
        max_line_search: 40,
    };

    pub fn validate(&self) -> Result<()> {
        let ok = self.tol >= 0.0
            && self.fd_step > 0.0
            && self.history > 0
            && self.armijo > 0.0
            && self.armijo < 1.0
            && self.backtrack > 0.0
            && self.backtrack < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig("invalid optimizer settings".into()))
        }
    }
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    pub iteration: usize,
    pub objective: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub params: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub function_evals: usize,
    /// Set when no step satisfying the Armijo condition was found.
    pub line_search_failed: bool,
    /// Accepted iterates, starting with `x0` as iteration 0.
    pub trace: Vec<IterRecord>,
}

/// Central differences `(f(x + h e_i) - f(x - h e_i)) / 2h`.
pub fn numeric_gradient(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Objective with a gradient.
trait Problem {
    fn value(&mut self, x: &[f64]) -> f64;
    fn gradient(&mut self, x: &[f64]) -> Vec<f64>;
    /// Objective evaluations spent so far inside `gradient`.
    fn gradient_evals(&self) -> usize;
}

struct Numeric<F> {
    f: F,
    h: f64,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Problem for Numeric<F> {
    fn value(&mut self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn gradient(&mut self, x: &[f64]) -> Vec<f64> {
        self.evals += 2 * x.len();
        numeric_gradient(&mut self.f, x, self.h)
    }

    fn gradient_evals(&self) -> usize {
        self.evals
    }
}

struct Analytic<F, G> {
    f: F,
    g: G,
    /// Objective evaluations one gradient call stands for.
    per_call: usize,
    calls: usize,
}

impl<F: FnMut(&[f64]) -> f64, G: FnMut(&[f64]) -> Vec<f64>> Problem for Analytic<F, G> {
    fn value(&mut self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn gradient(&mut self, x: &[f64]) -> Vec<f64> {
        self.calls += 1;
        (self.g)(x)
    }

    fn gradient_evals(&self) -> usize {
        self.calls * self.per_call
    }
}

/// Minimizes `f` with numerically differentiated gradients.
pub fn minimize(f: impl FnMut(&[f64]) -> f64, x0: &[f64], cfg: &LbfgsConfig) -> OptResult {
    lbfgs(
        &mut Numeric {
            f,
            h: cfg.fd_step,
            evals: 0,
        },
        x0,
        cfg,
    )
}

/// Minimizes `f` given its gradient `grad`. `function_evals` counts calls
/// of `f` only.
pub fn minimize_with_gradient(
    f: impl FnMut(&[f64]) -> f64,
    grad: impl FnMut(&[f64]) -> Vec<f64>,
    x0: &[f64],
    cfg: &LbfgsConfig,
) -> OptResult {
    lbfgs(
        &mut Analytic {
            f,
            g: grad,
            per_call: 0,
            calls: 0,
        },
        x0,
        cfg,
    )
}

fn lbfgs(p: &mut impl Problem, x0: &[f64], cfg: &LbfgsConfig) -> OptResult {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = p.value(&x);
    let mut evals = 1;
    let mut g = p.gradient(&x);
    let mut trace = vec![IterRecord {
        iteration: 0,
        objective: fx,
        grad_norm: max_norm(&g),
    }];
    let done = |fx: f64, g: &[f64]| fx <= cfg.tol || max_norm(g) <= cfg.tol;
    let mut converged = done(fx, &g);
    let mut line_search_failed = false;
    let mut iterations = 0;
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(cfg.history);

    while !converged && iterations < cfg.max_iter {
        let mut d = direction(&g, &history);
        let mut slope = dot(&g, &d);
        if slope.is_nan() || slope >= 0.0 {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut alpha = if history.is_empty() {
            (1.0 / max_norm(&d)).min(1.0)
        } else {
            1.0
        };

        let mut accepted = None;
        let mut trial = vec![0.0; n];
        for _ in 0..cfg.max_line_search {
            for i in 0..n {
                trial[i] = x[i] + alpha * d[i];
            }
            let ft = p.value(&trial);
            evals += 1;
            if ft <= fx + cfg.armijo * alpha * slope {
                accepted = Some(ft);
                break;
            }
            alpha *= cfg.backtrack;
        }
        let Some(f_new) = accepted else {
            if history.is_empty() {
                line_search_failed = true;
                break;
            }
            // Retry once along steepest descent before giving up.
            history.clear();
            continue;
        };

        let g_new = p.gradient(&trial);
        let s: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 && sy.is_finite() {
            if history.len() == cfg.history {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        x.copy_from_slice(&trial);
        fx = f_new;
        g = g_new;
        iterations += 1;
        trace.push(IterRecord {
            iteration: iterations,
            objective: fx,
            grad_norm: max_norm(&g),
        });
        converged = done(fx, &g);
    }

    OptResult {
        params: x,
        objective_value: fx,
        iterations,
        converged,
        function_evals: evals + p.gradient_evals(),
        line_search_failed,
        trace,
    }
}

/// Two-loop recursion: `-H g` for the implicit inverse Hessian.
fn direction(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in &mut q {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    for qi in &mut q {
        *qi = -*qi;
    }
    q
}

/// How the overlap between the ansatz and the stepped state is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FidelityMode {
    /// Run the inverse ansatz on the device and read the all-zero population.
    #[default]
    InverseCircuitNoisy,
    /// As above with a noise-free inverse segment.
    InverseCircuitNoiseless,
    /// `<ψ(θ)|ρ|ψ(θ)>` directly.
    PureOverlap,
}

impl FidelityMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::InverseCircuitNoisy => "inverse_circuit_noisy",
            Self::InverseCircuitNoiseless => "inverse_circuit_noiseless",
            Self::PureOverlap => "pure_overlap",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            Self::InverseCircuitNoisy,
            Self::InverseCircuitNoiseless,
            Self::PureOverlap,
        ]
        .into_iter()
        .find(|m| m.name() == s)
    }
}

/// Everything the restart objective needs; read-only during an optimization.
#[derive(Debug, Clone)]
pub struct ObjectiveContext {
    pub stepped_state: DensityMatrix,
    pub ansatz: AnsatzSpec,
    pub noise: NoiseParams,
    pub fidelity_mode: FidelityMode,
}

impl ObjectiveContext {
    /// Fidelity between the ansatz state at `params` and the stepped state.
    pub fn fidelity(&self, params: &[f64]) -> Result<f64> {
        let c = build_ansatz_circuit(&self.ansatz, params)?;
        match self.fidelity_mode {
            FidelityMode::PureOverlap => {
                let psi = apply_circuit(&c, &StateVector::zero_state(c.num_qubits()))?;
                self.stepped_state.fidelity_with_pure(&psi)
            }
            mode => {
                let noise = if mode == FidelityMode::InverseCircuitNoisy {
                    self.noise
                } else {
                    NoiseParams::disabled()
                };
                let program = NoisyProgram::new(&schedule(&invert(&c)?))?;
                let mut rho = self.stepped_state.clone();
                program.run(&mut rho, &noise)?;
                Ok(rho.population(0))
            }
        }
    }

    /// `(1 - F)^2`
    pub fn objective(&self, params: &[f64]) -> Result<f64> {
        let f = self.fidelity(params)?;
        Ok((1.0 - f) * (1.0 - f))
    }

    /// Minimizes the objective from `x0`.
    pub fn optimize(&self, x0: &[f64], cfg: &LbfgsConfig) -> Result<OptResult> {
        cfg.validate()?;
        let expected = self.ansatz.num_parameters();
        if x0.len() != expected {
            return Err(Error::ParameterCountMismatch {
                expected,
                found: x0.len(),
            });
        }
        if let Some(form) = self.spectral_form(x0)? {
            return Ok(minimize(
                |x| {
                    let f = form.fidelity(x[0]);
                    (1.0 - f) * (1.0 - f)
                },
                x0,
                cfg,
            ));
        }
        // The parameter count is fixed from here on, so evaluation cannot fail
        // for a well-formed context.
        let f = |x: &[f64]| self.objective(x).unwrap_or(f64::INFINITY);
        if self.fidelity_mode == FidelityMode::PureOverlap {
            return Ok(minimize(f, x0, cfg));
        }
        let g = |x: &[f64]| {
            self.layered_gradient(x, cfg.fd_step)
                .unwrap_or_else(|_| vec![f64::NAN; x.len()])
        };
        Ok(lbfgs(
            &mut Analytic {
                f,
                g,
                per_call: 2 * expected,
                calls: 0,
            },
            x0,
            cfg,
        ))
    }

    /// For the oracle ansatz with an inverse-circuit fidelity, the fidelity as
    /// a trigonometric sum in the single parameter; `None` otherwise. The
    /// inverse oracle runs alone in the first layer and everything after it
    /// is parameter-free, so pulling the measured projector back to that
    /// layer gives `W` with `F(θ) = Tr[W e^{iθH} ρ e^{-iθH}]`, which in the
    /// eigenbasis of `H` reads `Σ_ij ρ̃_ij W̃_ji e^{iθ(λ_i - λ_j)}`.
    pub fn spectral_form(&self, params: &[f64]) -> Result<Option<SpectralForm>> {
        let AnsatzKind::Oracle { generator } = &self.ansatz.kind else {
            return Ok(None);
        };
        let noise = match self.fidelity_mode {
            FidelityMode::InverseCircuitNoisy => self.noise,
            FidelityMode::InverseCircuitNoiseless => NoiseParams::disabled(),
            FidelityMode::PureOverlap => return Ok(None),
        };
        noise.validate()?;
        let inv = invert(&build_ansatz_circuit(&self.ansatz, params)?)?;
        let assign = layer_assignment(&inv);
        let alone = assign.iter().filter(|&&l| l == 0).count() == 1;
        if !alone || !matches!(inv.gates()[0].kind, GateKind::Oracle { .. }) {
            return Ok(None);
        }
        let program = NoisyProgram::new(&schedule(&inv))?;
        let n = inv.num_qubits();
        let w = program
            .backward_observables(&DensityMatrix::basis_state(n, 0), &noise)
            .swap_remove(0);
        let v = &generator.vectors;
        let vd = v.adjoint();
        let rho = &(&vd * &self.stepped_state.to_matrix()) * v;
        let w = &(&vd * &w.to_matrix()) * v;
        let dim = generator.dim();
        let coeffs = (0..dim * dim)
            .map(|k| rho[(k / dim, k % dim)] * w[(k % dim, k / dim)])
            .collect();
        Ok(Some(SpectralForm {
            values: generator.values.clone(),
            coeffs,
        }))
    }

    /// Central-difference gradient of the objective for the inverse-circuit
    /// modes, equal to [`numeric_gradient`] of [`Self::objective`] up to
    /// rounding. Moving one parameter changes a single gate of one layer, so
    /// each shifted fidelity is `Tr[W g' τ g'†]`, where `τ` is the state
    /// entering that layer with the layer's other gates applied and `W` is
    /// the projector onto `|0…0⟩` pulled back through the rest of the program.
    pub fn layered_gradient(&self, params: &[f64], h: f64) -> Result<Vec<f64>> {
        let noise = match self.fidelity_mode {
            FidelityMode::InverseCircuitNoisy => self.noise,
            FidelityMode::InverseCircuitNoiseless => NoiseParams::disabled(),
            FidelityMode::PureOverlap => {
                return Ok(numeric_gradient(
                    |x| self.objective(x).unwrap_or(f64::INFINITY),
                    params,
                    h,
                ))
            }
        };
        noise.validate()?;
        let template = self.ansatz.template()?;
        let bound = template.bind(params)?;
        let inv = invert(&bound)?;
        let program = NoisyProgram::new(&schedule(&inv))?;
        let n = inv.num_qubits();
        let assign = layer_assignment(&inv);
        let after = program.unitary_outputs(&self.stepped_state, &noise);
        let target = DensityMatrix::basis_state(n, 0);
        let weights = program.backward_observables(&target, &noise);

        let mut grad = vec![0.0; params.len()];
        let mut slots = template.parameter_slots();
        slots.sort_by_key(|s| s.gate);
        let mut i = 0;
        while i < slots.len() {
            let gate = slots[i].gate;
            let layer = assign[inv.len() - 1 - gate];
            let current = gate_matrix(&inv.gates()[inv.len() - 1 - gate])?;
            let current_dag = current.adjoint();
            // Shifting the gate from g to g' turns the post-layer state into
            // (g' g^dagger) ρ (g' g^dagger)^dagger.
            let relative = |x: &[f64]| -> Result<ComplexMatrix> {
                let g = template.gates()[gate]
                    .bind(x)?
                    .inverse()
                    .expect("bound gate");
                Ok(&gate_matrix(&g)? * &current_dag)
            };
            // (parameter, relative change at +h, at -h) for each slot of this gate
            let mut shifts = Vec::new();
            let mut probe = params.to_vec();
            while i < slots.len() && slots[i].gate == gate {
                let p = slots[i].index;
                probe[p] = params[p] + h;
                let up = relative(&probe)?;
                probe[p] = params[p] - h;
                let down = relative(&probe)?;
                probe[p] = params[p];
                shifts.push((p, up, down));
                i += 1;
            }
            let targets = &template.gates()[gate].targets;
            let rho = &after[layer];
            let w = &weights[layer];
            let values: Vec<(usize, f64, f64)> = if targets.len() <= 2 {
                let m = 1usize << targets.len();
                let pattern: Vec<(usize, usize)> = (0..m)
                    .flat_map(|r| (0..m).map(move |c| (r, c)))
                    .filter(|&(r, c)| {
                        shifts
                            .iter()
                            .any(|(_, u, d)| u[(r, c)] != ZERO || d[(r, c)] != ZERO)
                    })
                    .collect();
                let anchor = LocalOp::new(&ComplexMatrix::identity(m), targets, n)?;
                let form = anchor.trace_form(w.data(), rho.data(), rho.dim(), &pattern);
                let eval = |g: &ComplexMatrix| -> f64 {
                    let k = pattern.len();
                    let mut acc = 0.0;
                    for (f, &(fr, fc)) in pattern.iter().enumerate() {
                        let gf = g[(fr, fc)].conj();
                        for (e, &(er, ec)) in pattern.iter().enumerate() {
                            acc += (g[(er, ec)] * gf * form[f * k + e]).re;
                        }
                    }
                    acc
                };
                shifts
                    .iter()
                    .map(|(p, u, d)| (*p, eval(u), eval(d)))
                    .collect()
            } else {
                let dense = |m: &ComplexMatrix| -> Result<f64> {
                    let mut r = rho.clone();
                    r.apply_op(&LocalOp::new(m, targets, n)?);
                    Ok(w.trace_product(&r))
                };
                shifts
                    .iter()
                    .map(|(p, u, d)| Ok((*p, dense(u)?, dense(d)?)))
                    .collect::<Result<_>>()?
            };
            for (p, up, down) in values {
                // ((1 - up)^2 - (1 - down)^2) / 2h
                grad[p] -= (2.0 - up - down) * (up - down) / (2.0 * h);
            }
        }
        Ok(grad)
    }
}

/// `F(θ) = Re Σ_ij c_ij e^{iθ(λ_i - λ_j)}`; see
/// [`ObjectiveContext::spectral_form`].
#[derive(Debug, Clone)]
pub struct SpectralForm {
    values: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl SpectralForm {
    pub fn fidelity(&self, theta: f64) -> f64 {
        let dim = self.values.len();
        let phases: Vec<Complex64> = self
            .values
            .iter()
            .map(|&l| Complex64::from_polar(1.0, theta * l))
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, row) in self.coeffs.chunks_exact(dim).enumerate() {
            let inner: Complex64 = row.iter().zip(&phases).map(|(c, p)| c * p.conj()).sum();
            acc += phases[i] * inner;
        }
        acc.re
    }
}
