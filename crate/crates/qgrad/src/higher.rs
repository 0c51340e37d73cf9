//! Higher-order partial derivatives.
//!
//! With `H~_j = U_{(j+1):n} H_j U_{(j+1):n}^dagger` and sorted gate indices
//! `j_1 <= ... <= j_k`, the k-th-order partial derivative of the cost is a
//! nested commutator expectation:
//!
//! ```text
//! d^k f / (dtheta_{j_1} ... dtheta_{j_k})
//!     = (i/2)^k <theta| [H~_{j_1}, [ ... [H~_{j_k}, O] ... ]] |theta>
//! ```
//!
//! Three ways to get it:
//!
//! * [`nested_commutator_oracle`] — evaluate the formula with dense
//!   matrices (reference).
//! * [`kfold_ht`] — one circuit family: k ancillas, each controlling one
//!   generator term inserted after its gate, measured against
//!   `X^(x)k (x) O`.  Single-word generators need exactly one distinct
//!   circuit regardless of k.
//! * [`dht_korder`] — ancilla-free: for every sign pattern
//!   `s in {+-1}^k`, insert `exp(s_t i pi/4 Q)` after gate `j_t` and
//!   combine the `2^k` plain measurements with weights
//!   `(-1/2)^k prod_t s_t`.
//!
//! [`fd_korder`] (nested central differences) is the numerical yardstick.

use crate::circuit::{Circuit, GateOp, Observable, Pqc};
use crate::error::{Error, Result};
use crate::gradient::GradTask;
use crate::pauli::{PauliSum, PauliWord};
use crate::rng::SplitMix64;

/// Sorted multi-index `j_1 <= ... <= j_k` of 1-based gate positions.
///
/// Mixed partial derivatives are symmetric, so construction sorts; repeats
/// express repeated differentiation along the same parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivativeIndex {
    indices: Vec<usize>,
}

impl DerivativeIndex {
    pub fn new(indices: &[usize], param_count: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyIndexList);
        }
        for &j in indices {
            if j == 0 || j > param_count {
                return Err(Error::ParamOutOfRange {
                    param: j,
                    count: param_count,
                });
            }
        }
        let mut indices = indices.to_vec();
        indices.sort_unstable();
        Ok(Self { indices })
    }

    pub fn order(&self) -> usize {
        self.indices.len()
    }

    /// Sorted 1-based gate positions.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

/// Methods with a row in the k-th-order resource table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KOrderMethod {
    /// Parameter-shift rule applied recursively: `2^k` shifted evaluations.
    Psr,
    /// Hadamard-test family: `2^(k-1)` product-expectation circuits.
    Ht,
    /// Direct (insertion) variant: `2^k` sign-pattern circuits.
    Dht,
    /// k-fold Hadamard test: one circuit family.
    KfoldHt,
}

impl KOrderMethod {
    pub fn name(self) -> &'static str {
        match self {
            KOrderMethod::Psr => "psr",
            KOrderMethod::Ht => "ht",
            KOrderMethod::Dht => "dht",
            KOrderMethod::KfoldHt => "kfold",
        }
    }
}

impl std::fmt::Display for KOrderMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for KOrderMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "psr" => Ok(KOrderMethod::Psr),
            "ht" => Ok(KOrderMethod::Ht),
            "dht" => Ok(KOrderMethod::Dht),
            "kfold" | "kfold_ht" | "kfoldht" => Ok(KOrderMethod::KfoldHt),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

/// Qubit and logical-depth cost of a k-th-order estimate on an N-qubit,
/// n-gate PQC: PSR `(N, n)`, HT `(N+1, n+k)`, DHT `(N, n+k)`, k-fold
/// `(N+k, n+k)`.
pub fn korder_qubits_depth(
    method: KOrderMethod,
    k: usize,
    qubits: usize,
    gates: usize,
) -> (usize, usize) {
    match method {
        KOrderMethod::Psr => (qubits, gates),
        KOrderMethod::Ht => (qubits + 1, gates + k),
        KOrderMethod::Dht => (qubits, gates + k),
        KOrderMethod::KfoldHt => (qubits + k, gates + k),
    }
}

/// A k-th-order derivative estimate as weighted measurement tasks.
#[derive(Clone, Debug)]
pub struct KOrderPlan {
    method: KOrderMethod,
    indices: DerivativeIndex,
    tasks: Vec<GradTask>,
    distinct_circuits: usize,
    qubits: usize,
    depth: usize,
}

impl KOrderPlan {
    pub fn method(&self) -> KOrderMethod {
        self.method
    }

    pub fn indices(&self) -> &DerivativeIndex {
        &self.indices
    }

    pub fn tasks(&self) -> &[GradTask] {
        &self.tasks
    }

    pub fn distinct_circuit_count(&self) -> usize {
        self.distinct_circuits
    }

    /// Register width of the estimation circuits.
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    /// Logical depth in parameterized-gate layers.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn evaluate(&self) -> Result<f64> {
        let mut total = 0.0;
        for task in &self.tasks {
            let state = task.circuit.run()?;
            total += task.weight * task.observable.expectation(&state)?;
        }
        Ok(total)
    }

    /// Shot-sampled `(estimate, standard_error)`; one substream of `seed`
    /// per task.
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

/// Dense evaluation of the nested-commutator formula (the reference all
/// circuit constructions are tested against).
pub fn nested_commutator_oracle(pqc: &Pqc, theta: &[f64], indices: &[usize]) -> Result<f64> {
    pqc.check_theta(theta)?;
    let idx = DerivativeIndex::new(indices, pqc.param_count())?;
    let n = pqc.qubit_count();
    let dim = 1usize << n;
    // |theta>: prep plus all gates, no epilogue (the epilogue is folded
    // into the observable below).
    let mut pre_epilogue = pqc.input_prep().ops().to_vec();
    for (j, &t) in theta.iter().enumerate() {
        pre_epilogue.push(pqc.gate_op(j, t));
    }
    let state = Circuit::new(n, pre_epilogue)?.run()?;
    let psi = nalgebra::DVector::from_column_slice(state.amplitudes());
    // O' = D^dagger O D.
    let d = crate::dense::circuit_unitary(pqc.epilogue())?;
    let o = match pqc.observable() {
        Observable::Paulis(sum) => sum.to_matrix()?,
        Observable::ZeroProjector => crate::dense::projector_zero(n),
    };
    let mut m = d.adjoint() * o * d;
    // Conjugated generators H~_j, cached per distinct index.
    let mut conjugated: std::collections::HashMap<
        usize,
        nalgebra::DMatrix<num_complex::Complex64>,
    > = std::collections::HashMap::new();
    for &j in idx.indices() {
        if let std::collections::hash_map::Entry::Vacant(e) = conjugated.entry(j) {
            let mut right = nalgebra::DMatrix::identity(dim, dim);
            for (g, &t) in theta.iter().enumerate().skip(j) {
                right = crate::dense::op_unitary(&pqc.gate_op(g, t), n)? * right;
            }
            let h = pqc.gates()[j - 1].generator().to_matrix()?;
            e.insert(&right * h * right.adjoint());
        }
    }
    // Innermost commutator uses the largest index.
    for &j in idx.indices().iter().rev() {
        let h = &conjugated[&j];
        m = h * &m - &m * h;
    }
    let inner = (psi.adjoint() * &m * &psi)[(0, 0)];
    let prefactor = num_complex::Complex64::new(0.0, 0.5).powu(idx.order() as u32);
    Ok((prefactor * inner).re)
}

/// Nested central differences: the order-k stencil applies
/// `[g(.+eps) - g(.-eps)]/(2 eps)` recursively, `2^k` evaluations total.
pub fn fd_korder(pqc: &Pqc, theta: &[f64], indices: &[usize], epsilon: f64) -> Result<f64> {
    pqc.check_theta(theta)?;
    let idx = DerivativeIndex::new(indices, pqc.param_count())?;
    let mut work = theta.to_vec();
    fd_recurse(pqc, &mut work, idx.indices(), epsilon)
}

fn fd_recurse(pqc: &Pqc, theta: &mut Vec<f64>, indices: &[usize], eps: f64) -> Result<f64> {
    match indices.split_last() {
        None => pqc.eval(theta),
        Some((&j, rest)) => {
            theta[j - 1] += eps;
            let plus = fd_recurse(pqc, theta, rest, eps)?;
            theta[j - 1] -= 2.0 * eps;
            let minus = fd_recurse(pqc, theta, rest, eps)?;
            theta[j - 1] += eps;
            Ok((plus - minus) / (2.0 * eps))
        }
    }
}

/// The k-fold Hadamard test: one circuit per combination of generator
/// terms, measuring `X^(x)k (x) O` over k ancillas.
///
/// Ancilla `t` (prepared to `(|0> - i|1>)/sqrt(2)`) controls a term of
/// `H_{j_t}`, inserted right after gate `j_t`; identity terms contribute
/// nothing and are skipped.  The weighted sum of expectations is the
/// k-th-order derivative — no prefactor.
pub fn kfold_ht(pqc: &Pqc, theta: &[f64], indices: &[usize]) -> Result<KOrderPlan> {
    pqc.check_theta(theta)?;
    let idx = DerivativeIndex::new(indices, pqc.param_count())?;
    let k = idx.order();
    let n_qubits = pqc.qubit_count();
    let total = n_qubits + k;
    let ancillas: Vec<usize> = (n_qubits..total).collect();
    let obs = crate::gradient::forward_observable(pqc, total, &ancillas)?;
    let prep = pqc.input_prep().extended(total)?;
    let epilogue = pqc.epilogue().extended(total)?;
    let combos = term_cross_product(pqc, idx.indices())?;
    let mut tasks = Vec::with_capacity(combos.len());
    for (weight, picks) in combos {
        let mut ops: Vec<GateOp> = ancillas
            .iter()
            .map(|&q| GateOp::AncillaPrep {
                qubit: q,
                plus_i: false,
            })
            .collect();
        ops.extend_from_slice(prep.ops());
        for g in 1..=pqc.param_count() {
            ops.push(pqc.gate_op(g - 1, theta[g - 1]).extended(total)?);
            for (t, &j) in idx.indices().iter().enumerate() {
                if j == g {
                    ops.push(GateOp::ControlledPauli {
                        control: ancillas[t],
                        value: true,
                        word: picks[t].extended(total)?,
                    });
                }
            }
        }
        ops.extend_from_slice(epilogue.ops());
        tasks.push(GradTask {
            circuit: Circuit::new(total, ops)?,
            observable: obs.clone(),
            weight,
        });
    }
    let distinct = tasks.iter().map(|t| t.observable.group_count()).sum();
    let (qubits, depth) =
        korder_qubits_depth(KOrderMethod::KfoldHt, k, n_qubits, pqc.param_count());
    Ok(KOrderPlan {
        method: KOrderMethod::KfoldHt,
        indices: idx,
        tasks,
        distinct_circuits: distinct,
        qubits,
        depth,
    })
}

/// The `2^k`-circuit insertion variant: for every sign pattern
/// `s in {+-1}^k`, insert `exp(s_t i pi/4 Q_t)` (a Pauli rotation by
/// `-s_t pi/2`) after gate `j_t` and measure `O` plain; weights are
/// `(-1/2)^k (prod_t s_t) (prod_t beta_t)`.
pub fn dht_korder(pqc: &Pqc, theta: &[f64], indices: &[usize]) -> Result<KOrderPlan> {
    pqc.check_theta(theta)?;
    let idx = DerivativeIndex::new(indices, pqc.param_count())?;
    let k = idx.order();
    let n_qubits = pqc.qubit_count();
    let obs = crate::gradient::forward_observable(pqc, n_qubits, &[])?;
    let combos = term_cross_product(pqc, idx.indices())?;
    let base = (-0.5f64).powi(k as i32);
    let mut tasks = Vec::with_capacity(combos.len() << k);
    for (beta, picks) in &combos {
        for pattern in 0..1u32 << k {
            let signs: Vec<f64> = (0..k)
                .map(|t| if pattern >> t & 1 == 0 { 1.0 } else { -1.0 })
                .collect();
            let mut ops = pqc.input_prep().ops().to_vec();
            for g in 1..=pqc.param_count() {
                ops.push(pqc.gate_op(g - 1, theta[g - 1]));
                for (t, &j) in idx.indices().iter().enumerate() {
                    if j == g {
                        ops.push(GateOp::PauliRotation {
                            word: picks[t],
                            angle: -signs[t] * std::f64::consts::FRAC_PI_2,
                        });
                    }
                }
            }
            ops.extend_from_slice(pqc.epilogue().ops());
            let sign_product: f64 = signs.iter().product();
            tasks.push(GradTask {
                circuit: Circuit::new(n_qubits, ops)?,
                observable: obs.clone(),
                weight: base * sign_product * beta,
            });
        }
    }
    let distinct = tasks.iter().map(|t| t.observable.group_count()).sum();
    let (qubits, depth) = korder_qubits_depth(KOrderMethod::Dht, k, n_qubits, pqc.param_count());
    Ok(KOrderPlan {
        method: KOrderMethod::Dht,
        indices: idx,
        tasks,
        distinct_circuits: distinct,
        qubits,
        depth,
    })
}

/// Cross product of the non-identity generator terms at each derivative
/// position: `(product of coefficients, one word per position)`.
fn term_cross_product(pqc: &Pqc, indices: &[usize]) -> Result<Vec<(f64, Vec<PauliWord>)>> {
    let mut combos: Vec<(f64, Vec<PauliWord>)> = vec![(1.0, Vec::new())];
    for &j in indices {
        let generator: &PauliSum = pqc.gates()[j - 1].generator();
        let mut next = Vec::new();
        for (weight, picks) in &combos {
            for (beta, q) in generator.non_identity_terms() {
                let mut picks = picks.clone();
                picks.push(*q);
                next.push((weight * beta, picks));
            }
        }
        combos = next;
    }
    Ok(combos)
}
