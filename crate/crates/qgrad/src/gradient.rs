//! First-order gradient estimation.
//!
//! For a PQC `f(theta) = <0|C^dagger O C|0>` with `C = D * U_n ... U_1 * P`
//! (prep `P`, gates `U_j = exp(-i theta_j/2 H_j)`, epilogue `D`), every
//! method here estimates `df/dtheta_j` from expectation values of explicit
//! circuits.  Writing `|theta>` for the state after all gates and
//! `H~_j = U_{(j+1):n} H_j U_{(j+1):n}^dagger`, the common starting point is
//!
//! ```text
//! df/dtheta_j = -Im <theta| H~_j O' |theta>,      O' = D^dagger O D.
//! ```
//!
//! * **FD** — central finite differences; a numerical reference, not a
//!   hardware method.
//! * **PSR** — parameter-shift rule.  Needs a generator with exactly two
//!   distinct eigenvalues `h1 < h2`; then with `c = (h2 - h1)/4` the
//!   derivative is `c [f(theta_j + pi/(4c)) - f(theta_j - pi/(4c))]`.
//! * **HT** — Hadamard test: one ancilla controls each generator term
//!   between the circuit halves; measure `X_anc (x) O`.
//! * **DHT** — direct Hadamard test: instead of a control, insert
//!   `exp(-/+ i pi/4 Q_k)` after gate `j` and take half the difference of
//!   plain `O` measurements.
//! * **RHT** — reversed Hadamard test: run all gates forward, control each
//!   *observable* term on the ancilla, then undo gates `j+1..n`; measure
//!   `X_anc (x) H_j`.  Cheap when `O` has more terms than `H_j`, at the
//!   price of a deeper circuit.
//! * **RDHT** — reversed direct Hadamard test: the rotation-insertion form
//!   of RHT.
//!
//! Each construction is packaged as a [`GradPlan`]: weighted measurement
//! tasks plus the distinct-circuit count a hardware run would pay.  Plans
//! evaluate exactly (statevector) or from simulated shots.

use num_complex::Complex64;

use crate::circuit::{Circuit, GateOp, Observable, Pqc, StateVector};
use crate::error::{Error, Result};
use crate::grouping::{self, GroupingCriterion, Partition};
use crate::pauli::{PauliSum, PauliWord};
use crate::rng::SplitMix64;

/// Step used by [`fd_gradient`] when no explicit epsilon is given.
pub const DEFAULT_FD_EPSILON: f64 = 1e-5;

/// A first-order gradient estimation method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradMethod {
    /// Central finite differences (numerical reference).
    Fd,
    /// Parameter-shift rule.
    Psr,
    /// Hadamard test.
    Ht,
    /// Direct Hadamard test.
    Dht,
    /// Reversed Hadamard test.
    Rht,
    /// Reversed direct Hadamard test.
    Rdht,
}

impl GradMethod {
    /// The five hardware methods (everything but FD).
    pub const HARDWARE: [GradMethod; 5] = [
        GradMethod::Psr,
        GradMethod::Ht,
        GradMethod::Dht,
        GradMethod::Rht,
        GradMethod::Rdht,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GradMethod::Fd => "fd",
            GradMethod::Psr => "psr",
            GradMethod::Ht => "ht",
            GradMethod::Dht => "dht",
            GradMethod::Rht => "rht",
            GradMethod::Rdht => "rdht",
        }
    }
}

impl std::fmt::Display for GradMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for GradMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fd" => Ok(GradMethod::Fd),
            "psr" => Ok(GradMethod::Psr),
            "ht" => Ok(GradMethod::Ht),
            "dht" => Ok(GradMethod::Dht),
            "rht" => Ok(GradMethod::Rht),
            "rdht" => Ok(GradMethod::Rdht),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

/// What a task measures at the end of its circuit.
#[derive(Clone, Debug)]
pub enum TaskObservable {
    /// A Pauli sum, measured group by group under the stored partition.
    Paulis { sum: PauliSum, partition: Partition },
    /// `prod_{q in x_qubits} X_q (x) |0..0><0..0|` on the remaining qubits.
    /// With no X qubits this is the plain zero projector.
    XProjector { x_qubits: Vec<usize> },
}

impl TaskObservable {
    fn paulis(sum: PauliSum) -> Result<Self> {
        let partition = grouping::partition(&sum, GroupingCriterion::FullCommutativity)?;
        Ok(TaskObservable::Paulis { sum, partition })
    }

    /// Distinct measurement circuits this observable costs.
    pub fn group_count(&self) -> usize {
        match self {
            TaskObservable::Paulis { partition, .. } => partition.group_count(),
            TaskObservable::XProjector { .. } => 1,
        }
    }

    /// Exact expectation in `state`.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        match self {
            TaskObservable::Paulis { sum, .. } => state.expectation(sum),
            TaskObservable::XProjector { x_qubits } => state.x_projector_expectation(x_qubits),
        }
    }

    /// Shot-sampled `(estimate, standard_error)` in `state`.
    pub fn sampled(&self, state: &StateVector, shots: usize, seed: u64) -> Result<(f64, f64)> {
        match self {
            TaskObservable::Paulis { sum, .. } => crate::circuit::sample_expectation(
                state,
                sum,
                GroupingCriterion::QubitWise,
                shots,
                seed,
            ),
            TaskObservable::XProjector { x_qubits } => {
                sample_x_projector(state, x_qubits, shots, seed)
            }
        }
    }
}

/// Shot sampling for the X-projector observable: rotate every X qubit with a
/// Hadamard, measure all qubits, score `(-1)^{x bits}` when the projected
/// qubits all read zero and 0 otherwise.
fn sample_x_projector(
    state: &StateVector,
    x_qubits: &[usize],
    shots: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let n = state.qubit_count();
    let mut rotated = state.clone();
    let mut x_mask = 0u64;
    for &q in x_qubits {
        if q >= n {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                qubits: n,
            });
        }
        x_mask |= 1 << q;
        // Hadamard as a rotation: exp(-i pi/2 (X+Z)/sqrt(2)) up to a global
        // phase, which sampling ignores.
        rotated.apply(&GateOp::GeneratorRotation {
            generator: hadamard_generator(n, q)?,
            angle: std::f64::consts::PI,
        })?;
    }
    let rest_mask = !x_mask & ((1u64 << n) - 1);
    let mut cdf = Vec::with_capacity(1 << n);
    let mut acc = 0.0;
    for b in 0..1usize << n {
        acc += rotated.amplitude(b).norm_sqr();
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = SplitMix64::substream(seed, 0);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..shots {
        let u = rng.next_f64() * total;
        let idx = cdf.partition_point(|&p| p <= u).min(cdf.len() - 1) as u64;
        let value = if idx & rest_mask == 0 {
            if (idx & x_mask).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            }
        } else {
            0.0
        };
        sum += value;
        sum_sq += value * value;
    }
    let mean = sum / shots as f64;
    let var = if shots > 1 {
        ((sum_sq - sum * sum / shots as f64) / (shots as f64 - 1.0)).max(0.0) / shots as f64
    } else {
        0.0
    };
    Ok((mean, var.sqrt()))
}

/// `(X + Z)/sqrt(2)` on one qubit — generates a Hadamard under a pi
/// rotation.
pub(crate) fn hadamard_generator(n: usize, q: usize) -> Result<PauliSum> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PauliSum::from_terms(
        n,
        [
            (s, PauliWord::single(n, q, crate::pauli::PauliLetter::X)?),
            (s, PauliWord::single(n, q, crate::pauli::PauliLetter::Z)?),
        ],
    )
}

/// One weighted measurement: run `circuit` from `|0...0>`, measure
/// `observable`, multiply by `weight`.
#[derive(Clone, Debug)]
pub struct GradTask {
    pub circuit: Circuit,
    pub observable: TaskObservable,
    pub weight: f64,
}

impl GradTask {
    fn evaluate(&self) -> Result<f64> {
        let state = self.circuit.run()?;
        Ok(self.weight * self.observable.expectation(&state)?)
    }
}

/// A gradient estimate as an explicit set of weighted measurement tasks.
#[derive(Clone, Debug)]
pub struct GradPlan {
    method: GradMethod,
    param: usize,
    tasks: Vec<GradTask>,
    distinct_circuits: usize,
}

impl GradPlan {
    pub fn method(&self) -> GradMethod {
        self.method
    }

    /// 1-based parameter index the plan differentiates.
    pub fn param(&self) -> usize {
        self.param
    }

    pub fn tasks(&self) -> &[GradTask] {
        &self.tasks
    }

    /// Number of distinct circuit executions the plan costs on hardware:
    /// one per task circuit per measurement group.
    ///
    /// For the zero-projector observable of compilation-style problems the
    /// reversed methods count the projector as a single measured unit — the
    /// task list still expands it into Pauli terms so that exact simulation
    /// has explicit circuits, but hardware measures the projector directly.
    pub fn distinct_circuit_count(&self) -> usize {
        self.distinct_circuits
    }

    /// Exact value: the weighted sum of task expectations.
    pub fn evaluate(&self) -> Result<f64> {
        let mut total = 0.0;
        for task in &self.tasks {
            total += task.evaluate()?;
        }
        Ok(total)
    }

    /// Shot-sampled `(estimate, standard_error)`.
    ///
    /// Every task gets `shots` shots on its own deterministic substream of
    /// `seed`; task errors combine in quadrature with the task weights.
    pub fn evaluate_sampled(&self, shots: usize, seed: u64) -> Result<(f64, f64)> {
        let mut total = 0.0;
        let mut variance = 0.0;
        for (ti, task) in self.tasks.iter().enumerate() {
            let state = task.circuit.run()?;
            let task_seed = SplitMix64::substream(seed, ti as u64).next_u64();
            let (est, se) = task.observable.sampled(&state, shots, task_seed)?;
            total += task.weight * est;
            variance += task.weight * task.weight * se * se;
        }
        Ok((total, variance.sqrt()))
    }
}

/// Observable terms as seen from behind the epilogue: `D^dagger O D`.
///
/// With an empty epilogue and a Pauli observable this is the observable
/// itself.  Otherwise the conjugation is carried out densely and
/// re-decomposed, which needs the register to fit the dense cap — fine for
/// the compilation problems this path exists for.
pub(crate) fn folded_observable(pqc: &Pqc) -> Result<PauliSum> {
    match (pqc.observable(), pqc.epilogue().is_empty()) {
        (Observable::Paulis(sum), true) => Ok(sum.clone()),
        (obs, _) => {
            let n = pqc.qubit_count();
            let d = crate::dense::circuit_unitary(pqc.epilogue())?;
            let o = match obs {
                Observable::Paulis(sum) => sum.to_matrix()?,
                Observable::ZeroProjector => crate::dense::projector_zero(n),
            };
            let folded = d.adjoint() * o * d;
            PauliSum::decompose(&folded)
        }
    }
}

/// Task observable for constructions that measure the PQC observable at the
/// end of the full circuit (epilogue included in-circuit), possibly after
/// extending the register by ancillas carrying X factors.
pub(crate) fn forward_observable(
    pqc: &Pqc,
    total: usize,
    x_qubits: &[usize],
) -> Result<TaskObservable> {
    match pqc.observable() {
        Observable::Paulis(sum) => {
            let mut ext = sum.extended(total)?;
            for &q in x_qubits {
                let terms = ext
                    .terms()
                    .iter()
                    .map(|(c, w)| {
                        w.with_letter(q, crate::pauli::PauliLetter::X)
                            .map(|w| (*c, w))
                    })
                    .collect::<Result<Vec<_>>>()?;
                ext = PauliSum::from_terms(total, terms)?;
            }
            TaskObservable::paulis(ext)
        }
        Observable::ZeroProjector => Ok(TaskObservable::XProjector {
            x_qubits: x_qubits.to_vec(),
        }),
    }
}

fn bound_gate_ops(pqc: &Pqc, theta: &[f64], range: std::ops::Range<usize>) -> Vec<GateOp> {
    range.map(|j| pqc.gate_op(j, theta[j])).collect()
}

/// Central finite difference `[f(theta_j + eps) - f(theta_j - eps)] / 2 eps`.
pub fn fd_gradient(pqc: &Pqc, theta: &[f64], param: usize, epsilon: f64) -> Result<f64> {
    fd_plan(pqc, theta, param, epsilon)?.evaluate()
}

/// Finite differences as an explicit two-circuit plan.
pub fn fd_plan(pqc: &Pqc, theta: &[f64], param: usize, epsilon: f64) -> Result<GradPlan> {
    pqc.check_theta(theta)?;
    pqc.check_param(param)?;
    let n = pqc.qubit_count();
    let obs = forward_observable(pqc, n, &[])?;
    let mut tasks = Vec::with_capacity(2);
    for sign in [1.0f64, -1.0] {
        let mut shifted = theta.to_vec();
        shifted[param - 1] += sign * epsilon;
        tasks.push(GradTask {
            circuit: pqc.bound_circuit(&shifted)?,
            observable: obs.clone(),
            weight: sign / (2.0 * epsilon),
        });
    }
    let distinct = tasks.iter().map(|t| t.observable.group_count()).sum();
    Ok(GradPlan {
        method: GradMethod::Fd,
        param,
        tasks,
        distinct_circuits: distinct,
    })
}

/// Shift and prefactor of the parameter-shift rule for `generator`.
///
/// Errors with [`Error::NotPsrCompatible`] unless the generator has exactly
/// two distinct eigenvalues `h1 < h2`; then the rule is
/// `df = c [f(.. + shift) - f(.. - shift)]` with `c = (h2 - h1)/4` and
/// `shift = pi / (4c)`.
pub fn psr_shift(generator: &PauliSum) -> Result<(f64, f64)> {
    let spectrum = generator.eigen_spectrum()?;
    if spectrum.len() != 2 {
        return Err(Error::NotPsrCompatible {
            distinct: spectrum.len(),
        });
    }
    let c = (spectrum[1] - spectrum[0]) / 4.0;
    Ok((std::f64::consts::PI / (4.0 * c), c))
}

/// Parameter-shift-rule plan for parameter `param`.
pub fn psr_plan(pqc: &Pqc, theta: &[f64], param: usize) -> Result<GradPlan> {
    pqc.check_theta(theta)?;
    pqc.check_param(param)?;
    let (shift, c) = psr_shift(pqc.gates()[param - 1].generator())?;
    let obs = forward_observable(pqc, pqc.qubit_count(), &[])?;
    let mut tasks = Vec::with_capacity(2);
    for sign in [1.0f64, -1.0] {
        let mut shifted = theta.to_vec();
        shifted[param - 1] += sign * shift;
        tasks.push(GradTask {
            circuit: pqc.bound_circuit(&shifted)?,
            observable: obs.clone(),
            weight: sign * c,
        });
    }
    let distinct = tasks.iter().map(|t| t.observable.group_count()).sum();
    Ok(GradPlan {
        method: GradMethod::Psr,
        param,
        tasks,
        distinct_circuits: distinct,
    })
}

pub fn psr_gradient(pqc: &Pqc, theta: &[f64], param: usize) -> Result<f64> {
    psr_plan(pqc, theta, param)?.evaluate()
}

/// Hadamard-test plan: one ancilla-controlled circuit per non-identity
/// generator term, measuring `X_anc (x) O`.
pub fn ht_plan(pqc: &Pqc, theta: &[f64], param: usize) -> Result<GradPlan> {
    pqc.check_theta(theta)?;
    pqc.check_param(param)?;
    let n_qubits = pqc.qubit_count();
    let anc = n_qubits;
    let total = n_qubits + 1;
    let j = param;
    let obs = forward_observable(pqc, total, &[anc])?;
    let prep = pqc.input_prep().extended(total)?;
    let epilogue = pqc.epilogue().extended(total)?;
    let generator = pqc.gates()[j - 1].generator().clone();
    let mut tasks = Vec::new();
    for (beta, q) in generator.non_identity_terms() {
        let mut ops = vec![GateOp::AncillaPrep {
            qubit: anc,
            plus_i: false,
        }];
        ops.extend_from_slice(prep.ops());
        for op in bound_gate_ops(pqc, theta, 0..j) {
            ops.push(op.extended(total)?);
        }
        ops.push(GateOp::ControlledPauli {
            control: anc,
            value: true,
            word: q.extended(total)?,
        });
        for op in bound_gate_ops(pqc, theta, j..pqc.param_count()) {
            ops.push(op.extended(total)?);
        }
        ops.extend_from_slice(epilogue.ops());
        tasks.push(GradTask {
            circuit: Circuit::new(total, ops)?,
            observable: obs.clone(),
            weight: *beta,
        });
    }
    let distinct = tasks.iter().map(|t| t.observable.group_count()).sum();
    Ok(GradPlan {
        method: GradMethod::Ht,
        param,
        tasks,
        distinct_circuits: distinct,
    })
}

pub fn ht_gradient(pqc: &Pqc, theta: &[f64], param: usize) -> Result<f64> {
    ht_plan(pqc, theta, param)?.evaluate()
}

/// Direct-Hadamard-test plan: for each non-identity generator term `Q_k`,
/// insert `exp(-+ i pi/4 Q_k)` after gate `j` and measure `O` plain; the
/// derivative is `-1/2 sum_k beta_k (<O>_+ - <O>_-)`.
pub fn dht_plan(pqc: &Pqc, theta: &[f64], param: usize) -> Result<GradPlan> {
    pqc.check_theta(theta)?;
    pqc.check_param(param)?;
    let n_qubits = pqc.qubit_count();
    let j = param;
    let obs = forward_observable(pqc, n_qubits, &[])?;
    let generator = pqc.gates()[j - 1].generator().clone();
    let mut tasks = Vec::new();
    for (beta, q) in generator.non_identity_terms() {
        for sign in [1.0f64, -1.0] {
            let mut ops = pqc.input_prep().ops().to_vec();
            ops.extend(bound_gate_ops(pqc, theta, 0..j));
            // exp(+ sign i pi/4 Q) is a Pauli rotation by angle -sign pi/2.
            ops.push(GateOp::PauliRotation {
                word: *q,
                angle: -sign * std::f64::consts::FRAC_PI_2,
            });
            ops.extend(bound_gate_ops(pqc, theta, j..pqc.param_count()));
            ops.extend_from_slice(pqc.epilogue().ops());
            tasks.push(GradTask {
                circuit: Circuit::new(n_qubits, ops)?,
                observable: obs.clone(),
                weight: -0.5 * sign * beta,
            });
        }
    }
    let distinct = tasks.iter().map(|t| t.observable.group_count()).sum();
    Ok(GradPlan {
        method: GradMethod::Dht,
        param,
        tasks,
        distinct_circuits: distinct,
    })
}

pub fn dht_gradient(pqc: &Pqc, theta: &[f64], param: usize) -> Result<f64> {
    dht_plan(pqc, theta, param)?.evaluate()
}

/// Reversed-Hadamard-test plan: run all gates, control each non-identity
/// *observable* term on a `(|0> + i|1>)/sqrt(2)` ancilla, undo gates
/// `j+1..n`, and measure `X_anc (x) H_j`.
pub fn rht_plan(pqc: &Pqc, theta: &[f64], param: usize) -> Result<GradPlan> {
    pqc.check_theta(theta)?;
    pqc.check_param(param)?;
    let n_qubits = pqc.qubit_count();
    let anc = n_qubits;
    let total = n_qubits + 1;
    let j = param;
    let folded = folded_observable(pqc)?;
    let prep = pqc.input_prep().extended(total)?;
    // Measured operator: X on the ancilla times the generator.
    let measured = {
        let mut terms = Vec::new();
        for (c, w) in pqc.gates()[j - 1].generator().terms() {
            terms.push((
                *c,
                w.extended(total)?
                    .with_letter(anc, crate::pauli::PauliLetter::X)?,
            ));
        }
        TaskObservable::paulis(PauliSum::from_terms(total, terms)?)?
    };
    let mut tasks = Vec::new();
    for (alpha, p) in folded.non_identity_terms() {
        let mut ops = vec![GateOp::AncillaPrep {
            qubit: anc,
            plus_i: true,
        }];
        ops.extend_from_slice(prep.ops());
        for op in bound_gate_ops(pqc, theta, 0..pqc.param_count()) {
            ops.push(op.extended(total)?);
        }
        ops.push(GateOp::ControlledPauli {
            control: anc,
            value: true,
            word: p.extended(total)?,
        });
        let mut segment = Vec::new();
        for op in bound_gate_ops(pqc, theta, j..pqc.param_count()) {
            segment.push(op.extended(total)?);
        }
        if !segment.is_empty() {
            ops.push(GateOp::InverseSegment(segment));
        }
        tasks.push(GradTask {
            circuit: Circuit::new(total, ops)?,
            observable: measured.clone(),
            weight: *alpha,
        });
    }
    let observable_units = match pqc.observable() {
        // A projector is one measured unit on hardware even though the task
        // list expands it term by term.
        Observable::ZeroProjector => 1,
        Observable::Paulis(_) => folded.non_identity_count(),
    };
    let distinct = observable_units * measured.group_count();
    Ok(GradPlan {
        method: GradMethod::Rht,
        param,
        tasks,
        distinct_circuits: distinct,
    })
}

pub fn rht_gradient(pqc: &Pqc, theta: &[f64], param: usize) -> Result<f64> {
    rht_plan(pqc, theta, param)?.evaluate()
}

/// Reversed-direct-Hadamard-test plan: run all gates, insert
/// `exp(+- i pi/4 P_l)` for each non-identity observable term, undo gates
/// `j+1..n`, measure `H_j` plain; the derivative is
/// `1/2 sum_l alpha_l (<H_j>_+ - <H_j>_-)`.
pub fn rdht_plan(pqc: &Pqc, theta: &[f64], param: usize) -> Result<GradPlan> {
    pqc.check_theta(theta)?;
    pqc.check_param(param)?;
    let n_qubits = pqc.qubit_count();
    let j = param;
    let folded = folded_observable(pqc)?;
    let measured = TaskObservable::paulis(pqc.gates()[j - 1].generator().clone())?;
    let mut tasks = Vec::new();
    for (alpha, p) in folded.non_identity_terms() {
        for sign in [1.0f64, -1.0] {
            let mut ops = pqc.input_prep().ops().to_vec();
            ops.extend(bound_gate_ops(pqc, theta, 0..pqc.param_count()));
            ops.push(GateOp::PauliRotation {
                word: *p,
                angle: -sign * std::f64::consts::FRAC_PI_2,
            });
            let segment = bound_gate_ops(pqc, theta, j..pqc.param_count());
            if !segment.is_empty() {
                ops.push(GateOp::InverseSegment(segment));
            }
            tasks.push(GradTask {
                circuit: Circuit::new(n_qubits, ops)?,
                observable: measured.clone(),
                weight: 0.5 * sign * alpha,
            });
        }
    }
    let observable_units = match pqc.observable() {
        Observable::ZeroProjector => 1,
        Observable::Paulis(_) => folded.non_identity_count(),
    };
    let distinct = 2 * observable_units * measured.group_count();
    Ok(GradPlan {
        method: GradMethod::Rdht,
        param,
        tasks,
        distinct_circuits: distinct,
    })
}

pub fn rdht_gradient(pqc: &Pqc, theta: &[f64], param: usize) -> Result<f64> {
    rdht_plan(pqc, theta, param)?.evaluate()
}

/// Builds the plan for `method`; FD uses [`DEFAULT_FD_EPSILON`].
pub fn build_plan(pqc: &Pqc, theta: &[f64], param: usize, method: GradMethod) -> Result<GradPlan> {
    match method {
        GradMethod::Fd => fd_plan(pqc, theta, param, DEFAULT_FD_EPSILON),
        GradMethod::Psr => psr_plan(pqc, theta, param),
        GradMethod::Ht => ht_plan(pqc, theta, param),
        GradMethod::Dht => dht_plan(pqc, theta, param),
        GradMethod::Rht => rht_plan(pqc, theta, param),
        GradMethod::Rdht => rdht_plan(pqc, theta, param),
    }
}

/// Generalised Hadamard test for `Im <psi| G_1 G_2 ... G_m |psi>` with
/// Hermitian Pauli-sum factors `G_t` and `|psi>` prepared by `prep`.
///
/// `measured` (1-based) picks the factor read out directly; factors before
/// it are applied controlled on the ancilla being 0 (in ascending order),
/// factors after it controlled on 1 (in descending order).  Multi-term
/// factors other than the measured one are expanded term by term, identity
/// terms included (a controlled identity is simply no gate).
pub fn flexible_ht(prep: &Circuit, factors: &[PauliSum], measured: usize) -> Result<f64> {
    if measured == 0 || measured > factors.len() {
        return Err(Error::IndexOutOfRange {
            index: measured,
            count: factors.len(),
        });
    }
    let n = prep.qubit_count();
    for f in factors {
        if f.qubit_count() != n {
            return Err(Error::LengthMismatch {
                left: f.qubit_count(),
                right: n,
            });
        }
    }
    let anc = n;
    let total = n + 1;
    let prep_ext = prep.extended(total)?;
    let m = factors.len();
    let i = measured;
    // Measured factor, with the ancilla X attached.
    let measured_sum = {
        let mut terms = Vec::new();
        for (c, w) in factors[i - 1].terms() {
            terms.push((
                *c,
                w.extended(total)?
                    .with_letter(anc, crate::pauli::PauliLetter::X)?,
            ));
        }
        PauliSum::from_terms(total, terms)?
    };
    // Cross product over the other factors' terms.
    let others: Vec<usize> = (1..=m).filter(|&t| t != i).collect();
    let mut assignments: Vec<(f64, Vec<(usize, PauliWord)>)> = vec![(1.0, vec![])];
    for &t in &others {
        let mut next = Vec::new();
        for (weight, picks) in &assignments {
            for (c, w) in factors[t - 1].terms() {
                let mut picks = picks.clone();
                picks.push((t, *w));
                next.push((weight * c, picks));
            }
        }
        assignments = next;
    }
    let mut value = 0.0;
    for (weight, picks) in assignments {
        let mut ops = vec![GateOp::AncillaPrep {
            qubit: anc,
            plus_i: false,
        }];
        ops.extend_from_slice(prep_ext.ops());
        // Factors before the measured one, ascending, controlled on 0.
        for t in 1..i {
            if let Some((_, w)) = picks.iter().find(|(pt, _)| *pt == t) {
                if !w.is_identity() {
                    ops.push(GateOp::ControlledPauli {
                        control: anc,
                        value: false,
                        word: w.extended(total)?,
                    });
                }
            }
        }
        // Factors after it, descending, controlled on 1.
        for t in (i + 1..=m).rev() {
            if let Some((_, w)) = picks.iter().find(|(pt, _)| *pt == t) {
                if !w.is_identity() {
                    ops.push(GateOp::ControlledPauli {
                        control: anc,
                        value: true,
                        word: w.extended(total)?,
                    });
                }
            }
        }
        let circuit = Circuit::new(total, ops)?;
        let state = circuit.run()?;
        value += weight * state.expectation(&measured_sum)?;
    }
    Ok(value)
}

/// Exact value and full gradient in one reverse sweep.
///
/// Runs the circuit once, then peels gates off the back: with
/// `a = U_{(j+1):n}^dagger |theta>` and `b = U_{(j+1):n}^dagger O' |theta>`,
/// the derivative for gate `j` is `-Im <a| H_j |b>`.  This is the same
/// quantity every estimation method above computes, obtained without
/// building any extra circuits — the reference for training loops and
/// method-agreement tests.
pub fn exact_gradient(pqc: &Pqc, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
    pqc.check_theta(theta)?;
    let full = pqc.output_state(theta)?;
    let value = pqc.observable().expectation(&full)?;
    // chi = O |psi> at the measurement point.
    let mut b = match pqc.observable() {
        Observable::Paulis(sum) => full.applied_sum(sum)?,
        Observable::ZeroProjector => {
            let mut amps = vec![Complex64::new(0.0, 0.0); full.amplitudes().len()];
            amps[0] = full.amplitude(0);
            StateVector::from_amplitudes(pqc.qubit_count(), amps)?
        }
    };
    let mut a = full;
    // Undo the epilogue on both states.
    for op in pqc.epilogue().ops().iter().rev() {
        a.apply_inverse(op)?;
        b.apply_inverse(op)?;
    }
    let mut grads = vec![0.0; pqc.param_count()];
    for j in (0..pqc.param_count()).rev() {
        let hb = b.applied_sum(pqc.gates()[j].generator())?;
        grads[j] = -a.inner(&hb)?.im;
        let op = pqc.gate_op(j, theta[j]);
        a.apply_inverse(&op)?;
        b.apply_inverse(&op)?;
    }
    Ok((value, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Observable, PqcGate};

    /// One-qubit RX circuit measuring Z: f = cos(theta), df = -sin(theta).
    fn rx_pqc() -> Pqc {
        Pqc::new(
            1,
            vec![PqcGate::new(
                "t",
                PauliSum::parse_terms(1, &[(1.0, "X")]).unwrap(),
            )],
            Observable::Paulis(PauliSum::parse_terms(1, &[(1.0, "Z")]).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn every_method_matches_minus_sine_on_rx() {
        let pqc = rx_pqc();
        let theta = [0.731f64];
        let want = -theta[0].sin();
        for method in [
            GradMethod::Psr,
            GradMethod::Ht,
            GradMethod::Dht,
            GradMethod::Rht,
            GradMethod::Rdht,
        ] {
            let got = build_plan(&pqc, &theta, 1, method)
                .unwrap()
                .evaluate()
                .unwrap();
            assert!(
                (got - want).abs() < 1e-10,
                "{method}: got {got}, want {want}"
            );
        }
        let fd = fd_gradient(&pqc, &theta, 1, 1e-5).unwrap();
        assert!((fd - want).abs() < 1e-6);
    }

    /// Two-parameter, two-qubit circuit with a multi-term generator and a
    /// multi-term observable; all methods must agree with the exact sweep.
    fn richer_pqc() -> Pqc {
        let g1 = PauliSum::parse_terms(2, &[(0.8, "ZZ"), (0.5, "XI")]).unwrap();
        let g2 = PauliSum::parse_terms(2, &[(1.0, "IX"), (1.0, "XI")]).unwrap();
        let obs = PauliSum::parse_terms(2, &[(0.7, "ZI"), (-0.4, "XX"), (0.9, "IZ"), (0.2, "YY")])
            .unwrap();
        let prep = Circuit::new(
            2,
            vec![GateOp::PauliRotation {
                word: "YI".parse().unwrap(),
                angle: 0.4,
            }],
        )
        .unwrap();
        Pqc::new(
            2,
            vec![PqcGate::new("a", g1), PqcGate::new("b", g2)],
            Observable::Paulis(obs),
        )
        .unwrap()
        .with_input_prep(prep)
        .unwrap()
    }

    #[test]
    fn methods_agree_on_a_richer_circuit() {
        let pqc = richer_pqc();
        let theta = [0.37, -1.1];
        let (_, exact) = exact_gradient(&pqc, &theta).unwrap();
        for param in 1..=2 {
            let want = exact[param - 1];
            let fd = fd_gradient(&pqc, &theta, param, 1e-5).unwrap();
            assert!((fd - want).abs() < 1e-6, "fd param {param}");
            for method in [
                GradMethod::Ht,
                GradMethod::Dht,
                GradMethod::Rht,
                GradMethod::Rdht,
            ] {
                let got = build_plan(&pqc, &theta, param, method)
                    .unwrap()
                    .evaluate()
                    .unwrap();
                assert!(
                    (got - want).abs() < 1e-10,
                    "{method} param {param}: got {got}, want {want}"
                );
            }
        }
        // Parameter 2's generator (IX + XI) has spectrum {-2, 0, 2}: PSR
        // must refuse.
        assert!(matches!(
            psr_plan(&pqc, &theta, 2),
            Err(Error::NotPsrCompatible { distinct: 3 })
        ));
        // Parameter 1's generator 0.8 ZZ + 0.5 XI has anticommuting terms,
        // hence spectrum +-sqrt(0.89): two levels, so PSR applies and must
        // agree as well.
        let got = psr_gradient(&pqc, &theta, 1).unwrap();
        assert!((got - exact[0]).abs() < 1e-10, "psr: {got} vs {}", exact[0]);
    }

    #[test]
    fn psr_handles_scaled_two_level_generators() {
        // Generator (X+Z)/sqrt(2) has eigenvalues +-1, so c = 1/2 and the
        // shift is pi/2... with the scaling folded in.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let gen = PauliSum::parse_terms(1, &[(s, "X"), (s, "Z")]).unwrap();
        let (shift, c) = psr_shift(&gen).unwrap();
        assert!((c - 0.5).abs() < 1e-10);
        assert!((shift - std::f64::consts::FRAC_PI_2).abs() < 1e-9);

        let pqc = Pqc::new(
            1,
            vec![PqcGate::new("t", gen)],
            Observable::Paulis(PauliSum::parse_terms(1, &[(1.0, "Z")]).unwrap()),
        )
        .unwrap();
        let theta = [0.913];
        let want = fd_gradient(&pqc, &theta, 1, 1e-5).unwrap();
        let got = psr_gradient(&pqc, &theta, 1).unwrap();
        assert!((got - want).abs() < 1e-6);
        // And a doubled generator: eigenvalues +-2, c = 1, shift pi/4.
        let gen2 = PauliSum::parse_terms(1, &[(2.0, "X")]).unwrap();
        let (shift2, c2) = psr_shift(&gen2).unwrap();
        assert!((c2 - 1.0).abs() < 1e-10);
        assert!((shift2 - std::f64::consts::FRAC_PI_4).abs() < 1e-10);
    }

    #[test]
    fn plan_counts_follow_term_and_group_numbers() {
        let pqc = richer_pqc();
        let theta = [0.0, 0.0];
        // Observable groups under full commutativity:
        // terms sorted: IZ(0.9), ZI(0.7), XX(-0.4), YY(0.2) by |coeff|:
        // IZ joins ZI, XX and YY all commute with each other and with
        // ZI/IZ... pairwise: ZI vs XX anticommute.
        let ncm = grouping::group_count(
            match pqc.observable() {
                Observable::Paulis(s) => s,
                _ => unreachable!(),
            },
            GroupingCriterion::FullCommutativity,
        )
        .unwrap();
        let gen_terms = 2; // both gates have two non-identity terms
        for param in 1..=2 {
            // Gate 1's terms (ZZ, XI) anticommute: two groups.  Gate 2's
            // (IX, XI) commute: one group.
            let gen_groups = if param == 1 { 2 } else { 1 };
            let ht = ht_plan(&pqc, &theta, param).unwrap();
            assert_eq!(ht.distinct_circuit_count(), gen_terms * ncm);
            assert_eq!(ht.tasks().len(), gen_terms);
            let dht = dht_plan(&pqc, &theta, param).unwrap();
            assert_eq!(dht.distinct_circuit_count(), 2 * gen_terms * ncm);
            let rht = rht_plan(&pqc, &theta, param).unwrap();
            assert_eq!(rht.distinct_circuit_count(), 4 * gen_groups);
            assert_eq!(rht.tasks().len(), 4);
            let rdht = rdht_plan(&pqc, &theta, param).unwrap();
            assert_eq!(rdht.distinct_circuit_count(), 2 * 4 * gen_groups);
        }
    }

    #[test]
    fn ht_ancilla_and_depth_shape() {
        let pqc = richer_pqc();
        let theta = [0.1, 0.2];
        let plan = ht_plan(&pqc, &theta, 1).unwrap();
        for task in plan.tasks() {
            assert_eq!(task.circuit.qubit_count(), 3);
        }
        let plan = dht_plan(&pqc, &theta, 1).unwrap();
        for task in plan.tasks() {
            assert_eq!(task.circuit.qubit_count(), 2);
        }
    }

    #[test]
    fn flexible_ht_reproduces_a_known_imaginary_part() {
        // <0| X Y |0> = i <0|Z|0> = i, so Im = 1.
        let prep = Circuit::empty(1);
        let x = PauliSum::parse_terms(1, &[(1.0, "X")]).unwrap();
        let y = PauliSum::parse_terms(1, &[(1.0, "Y")]).unwrap();
        let got = flexible_ht(&prep, &[x.clone(), y.clone()], 2).unwrap();
        assert!((got - 1.0).abs() < 1e-10, "got {got}");
        // Reversing the order conjugates the product: Im <0|YX|0> = -1.
        let got = flexible_ht(&prep, &[y, x], 2).unwrap();
        assert!((got + 1.0).abs() < 1e-10, "got {got}");
    }

    #[test]
    fn flexible_ht_matches_dense_products_with_sums() {
        // Three factors with multi-term sums, random prep; compare against
        // the dense product.
        let prep = Circuit::new(
            2,
            vec![
                GateOp::PauliRotation {
                    word: "XI".parse().unwrap(),
                    angle: 0.7,
                },
                GateOp::PauliRotation {
                    word: "ZY".parse().unwrap(),
                    angle: -1.2,
                },
            ],
        )
        .unwrap();
        let f1 = PauliSum::parse_terms(2, &[(0.8, "XI"), (0.3, "ZZ"), (0.1, "II")]).unwrap();
        let f2 = PauliSum::parse_terms(2, &[(1.0, "YI"), (-0.5, "IZ")]).unwrap();
        let f3 = PauliSum::parse_terms(2, &[(0.6, "ZI"), (0.4, "XX")]).unwrap();
        let factors = [f1.clone(), f2.clone(), f3.clone()];
        let state = prep.run().unwrap();
        // Dense product via matrices.
        let m = f1.to_matrix().unwrap() * f2.to_matrix().unwrap() * f3.to_matrix().unwrap();
        let amps = nalgebra::DMatrix::from_column_slice(4, 1, state.amplitudes());
        let want = (amps.adjoint() * m * &amps)[(0, 0)].im;
        for measured in 1..=3 {
            let got = flexible_ht(&prep, &factors, measured).unwrap();
            assert!(
                (got - want).abs() < 1e-10,
                "measured={measured}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn flexible_ht_checks_the_measured_index() {
        let prep = Circuit::empty(1);
        let x = PauliSum::parse_terms(1, &[(1.0, "X")]).unwrap();
        assert!(matches!(
            flexible_ht(&prep, std::slice::from_ref(&x), 0),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            flexible_ht(&prep, &[x], 2),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn exact_gradient_matches_fd_with_prep_and_epilogue() {
        // Include an epilogue so the sweep's unwind path is exercised.
        let epilogue = Circuit::new(
            2,
            vec![GateOp::PauliRotation {
                word: "XZ".parse().unwrap(),
                angle: 0.9,
            }],
        )
        .unwrap();
        let pqc = richer_pqc().with_epilogue(epilogue).unwrap();
        let theta = [0.61, -0.23];
        let (value, grads) = exact_gradient(&pqc, &theta).unwrap();
        assert!((value - pqc.eval(&theta).unwrap()).abs() < 1e-12);
        for param in 1..=2 {
            let fd = fd_gradient(&pqc, &theta, param, 1e-5).unwrap();
            assert!(
                (grads[param - 1] - fd).abs() < 1e-6,
                "param {param}: sweep {} vs fd {fd}",
                grads[param - 1]
            );
        }
    }

    #[test]
    fn methods_agree_with_a_nonempty_epilogue() {
        let epilogue = Circuit::new(
            2,
            vec![
                GateOp::PauliRotation {
                    word: "XI".parse().unwrap(),
                    angle: std::f64::consts::FRAC_PI_2,
                },
                GateOp::ControlledPauli {
                    control: 0,
                    value: true,
                    word: "IX".parse().unwrap(),
                },
            ],
        )
        .unwrap();
        let pqc = richer_pqc().with_epilogue(epilogue).unwrap();
        let theta = [0.45, 0.82];
        let (_, exact) = exact_gradient(&pqc, &theta).unwrap();
        for param in 1..=2 {
            for method in [
                GradMethod::Ht,
                GradMethod::Dht,
                GradMethod::Rht,
                GradMethod::Rdht,
            ] {
                let got = build_plan(&pqc, &theta, param, method)
                    .unwrap()
                    .evaluate()
                    .unwrap();
                assert!(
                    (got - exact[param - 1]).abs() < 1e-10,
                    "{method} param {param}"
                );
            }
        }
    }

    #[test]
    fn zero_projector_observable_works_across_methods() {
        // 2-qubit circuit measuring |00><00| with a small epilogue.
        let epilogue = Circuit::new(
            2,
            vec![GateOp::ControlledPauli {
                control: 0,
                value: true,
                word: "IX".parse().unwrap(),
            }],
        )
        .unwrap();
        let g1 = PauliSum::parse_terms(2, &[(1.0, "XI")]).unwrap();
        let g2 = PauliSum::parse_terms(2, &[(1.0, "ZZ")]).unwrap();
        let pqc = Pqc::new(
            2,
            vec![PqcGate::new("a", g1), PqcGate::new("b", g2)],
            Observable::ZeroProjector,
        )
        .unwrap()
        .with_epilogue(epilogue)
        .unwrap();
        let theta = [0.77, -0.41];
        let (_, exact) = exact_gradient(&pqc, &theta).unwrap();
        for param in 1..=2 {
            let fd = fd_gradient(&pqc, &theta, param, 1e-5).unwrap();
            assert!((fd - exact[param - 1]).abs() < 1e-6);
            for method in [
                GradMethod::Ht,
                GradMethod::Dht,
                GradMethod::Rht,
                GradMethod::Rdht,
            ] {
                let got = build_plan(&pqc, &theta, param, method)
                    .unwrap()
                    .evaluate()
                    .unwrap();
                assert!(
                    (got - exact[param - 1]).abs() < 1e-10,
                    "{method} param {param}: got {got}, want {}",
                    exact[param - 1]
                );
            }
        }
        // Projector counting convention: reversed methods count the
        // projector as one unit.
        let rht = rht_plan(&pqc, &theta, 1).unwrap();
        assert_eq!(rht.distinct_circuit_count(), 1);
        let rdht = rdht_plan(&pqc, &theta, 1).unwrap();
        assert_eq!(rdht.distinct_circuit_count(), 2);
        // …while the forward methods see one projector measurement unit per
        // circuit.
        let ht = ht_plan(&pqc, &theta, 1).unwrap();
        assert_eq!(ht.distinct_circuit_count(), 1);
        let psr = psr_plan(&pqc, &theta, 1).unwrap();
        assert_eq!(psr.distinct_circuit_count(), 2);
    }

    #[test]
    fn identity_generator_terms_are_skipped_but_correct() {
        // Generator with an identity term: the derivative is unaffected by
        // it (identity commutes with everything), and plans must not emit a
        // task for it.
        let gen = PauliSum::parse_terms(1, &[(1.0, "X"), (0.7, "I")]).unwrap();
        let pqc = Pqc::new(
            1,
            vec![PqcGate::new("t", gen)],
            Observable::Paulis(PauliSum::parse_terms(1, &[(1.0, "Z")]).unwrap()),
        )
        .unwrap();
        let theta = [0.52f64];
        let want = -theta[0].sin();
        for method in [GradMethod::Ht, GradMethod::Dht] {
            let plan = build_plan(&pqc, &theta, 1, method).unwrap();
            let per_term = match method {
                GradMethod::Ht => 1,
                _ => 2,
            };
            assert_eq!(plan.tasks().len(), per_term);
            assert!((plan.evaluate().unwrap() - want).abs() < 1e-10);
        }
        let fd = fd_gradient(&pqc, &theta, 1, 1e-5).unwrap();
        assert!((fd - want).abs() < 1e-6);
    }

    #[test]
    fn sampled_evaluation_tracks_the_exact_value() {
        let pqc = rx_pqc();
        let theta = [0.9f64];
        let want = -theta[0].sin();
        for method in [GradMethod::Psr, GradMethod::Dht] {
            let plan = build_plan(&pqc, &theta, 1, method).unwrap();
            let (est, se) = plan.evaluate_sampled(100_000, 7).unwrap();
            assert!(se > 0.0 && se < 0.02, "{method}: se {se}");
            assert!(
                (est - want).abs() < 4.0 * se + 1e-9,
                "{method}: est {est} want {want} se {se}"
            );
        }
    }
}
