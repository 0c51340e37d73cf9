//! Gate-level circuit representation, a statevector simulator, and the
//! parameterised-circuit (PQC) container.
//!
//! The gate alphabet is deliberately small — exactly what the gradient
//! constructions emit:
//!
//! * [`GateOp::PauliRotation`]: `exp(-i angle/2 * W)` for a Pauli word `W`;
//! * [`GateOp::GeneratorRotation`]: `exp(-i angle/2 * H)` for a Pauli sum
//!   `H` (one PQC gate with its parameter bound);
//! * [`GateOp::ControlledPauli`]: applies a Pauli word on the branch where
//!   a control qubit is 0 or 1;
//! * [`GateOp::AncillaPrep`]: takes an ancilla from `|0>` to
//!   `(|0> +/- i|1>)/sqrt(2)`;
//! * [`GateOp::InverseSegment`]: the adjoint of a gate sequence, used by
//!   constructions that "run the circuit backwards".
//!
//! Statevector indices put qubit `q` in bit `q`, so qubit 0 — the leftmost
//! letter of a Pauli string — is the least-significant index bit.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouping::{self, GroupingCriterion};
use crate::pauli::{PauliLetter, PauliSum, PauliWord, MATRIX_QUBIT_CAP};
use crate::rng::SplitMix64;

/// Statevector simulation refuses registers larger than this.
pub const SIM_QUBIT_CAP: usize = 14;

/// One primitive circuit operation.
#[derive(Clone, Debug, PartialEq)]
pub enum GateOp {
    /// `exp(-i angle/2 * word)`.
    PauliRotation { word: PauliWord, angle: f64 },
    /// `exp(-i angle/2 * generator)` for a Hermitian Pauli-sum generator.
    GeneratorRotation { generator: PauliSum, angle: f64 },
    /// Applies `word` when qubit `control` is in state `value`.
    /// `word` must be identity on the control qubit.
    ControlledPauli {
        control: usize,
        value: bool,
        word: PauliWord,
    },
    /// Maps `|0>` on `qubit` to `(|0> + i|1>)/sqrt(2)` when `plus_i`, else
    /// to `(|0> - i|1>)/sqrt(2)`.
    AncillaPrep { qubit: usize, plus_i: bool },
    /// Adjoint of the contained sequence (which is given in forward order).
    InverseSegment(Vec<GateOp>),
}

impl GateOp {
    /// Checks qubit bounds and the control-overlap rule against a register
    /// of `qubits` qubits.
    pub fn validate(&self, qubits: usize) -> Result<()> {
        match self {
            GateOp::PauliRotation { word, .. } => check_word(word, qubits),
            GateOp::GeneratorRotation { generator, .. } => {
                if generator.qubit_count() != qubits {
                    return Err(Error::LengthMismatch {
                        left: generator.qubit_count(),
                        right: qubits,
                    });
                }
                Ok(())
            }
            GateOp::ControlledPauli {
                control,
                value: _,
                word,
            } => {
                check_word(word, qubits)?;
                if *control >= qubits {
                    return Err(Error::QubitOutOfRange {
                        qubit: *control,
                        qubits,
                    });
                }
                if word.letter(*control)? != PauliLetter::I {
                    return Err(Error::ControlOverlap { qubit: *control });
                }
                Ok(())
            }
            GateOp::AncillaPrep { qubit, .. } => {
                if *qubit >= qubits {
                    Err(Error::QubitOutOfRange {
                        qubit: *qubit,
                        qubits,
                    })
                } else {
                    Ok(())
                }
            }
            GateOp::InverseSegment(ops) => {
                for op in ops {
                    op.validate(qubits)?;
                }
                Ok(())
            }
        }
    }

    /// Same operation on a register widened to `new_n` qubits (identity on
    /// the added qubits).
    pub fn extended(&self, new_n: usize) -> Result<GateOp> {
        Ok(match self {
            GateOp::PauliRotation { word, angle } => GateOp::PauliRotation {
                word: word.extended(new_n)?,
                angle: *angle,
            },
            GateOp::GeneratorRotation { generator, angle } => GateOp::GeneratorRotation {
                generator: generator.extended(new_n)?,
                angle: *angle,
            },
            GateOp::ControlledPauli {
                control,
                value,
                word,
            } => GateOp::ControlledPauli {
                control: *control,
                value: *value,
                word: word.extended(new_n)?,
            },
            GateOp::AncillaPrep { qubit, plus_i } => GateOp::AncillaPrep {
                qubit: *qubit,
                plus_i: *plus_i,
            },
            GateOp::InverseSegment(ops) => GateOp::InverseSegment(
                ops.iter()
                    .map(|op| op.extended(new_n))
                    .collect::<Result<Vec<_>>>()?,
            ),
        })
    }
}

fn check_word(word: &PauliWord, qubits: usize) -> Result<()> {
    if word.qubit_count() != qubits {
        Err(Error::LengthMismatch {
            left: word.qubit_count(),
            right: qubits,
        })
    } else {
        Ok(())
    }
}

/// A fixed-size register with an ordered list of operations.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    qubits: usize,
    ops: Vec<GateOp>,
}

impl Circuit {
    /// Empty circuit on `qubits` qubits.
    pub fn empty(qubits: usize) -> Self {
        Self {
            qubits,
            ops: vec![],
        }
    }

    /// Circuit from validated operations.
    pub fn new(qubits: usize, ops: Vec<GateOp>) -> Result<Self> {
        for op in &ops {
            op.validate(qubits)?;
        }
        Ok(Self { qubits, ops })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Appends a validated operation.
    pub fn push(&mut self, op: GateOp) -> Result<()> {
        op.validate(self.qubits)?;
        self.ops.push(op);
        Ok(())
    }

    /// Same circuit on a register widened to `new_n` qubits.
    pub fn extended(&self, new_n: usize) -> Result<Circuit> {
        if new_n < self.qubits {
            return Err(Error::LengthMismatch {
                left: self.qubits,
                right: new_n,
            });
        }
        Ok(Circuit {
            qubits: new_n,
            ops: self
                .ops
                .iter()
                .map(|op| op.extended(new_n))
                .collect::<Result<Vec<_>>>()?,
        })
    }

    /// Runs the circuit on `|0...0>`.
    pub fn run(&self) -> Result<StateVector> {
        let mut state = StateVector::zero_state(self.qubits)?;
        for op in &self.ops {
            state.apply(op)?;
        }
        Ok(state)
    }
}

/// Dense complex statevector on up to [`SIM_QUBIT_CAP`] qubits.
#[derive(Clone, Debug)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `n` qubits.
    pub fn zero_state(n: usize) -> Result<Self> {
        if n == 0 || n > SIM_QUBIT_CAP {
            return Err(Error::TooManyQubits {
                qubits: n,
                cap: SIM_QUBIT_CAP,
                context: "statevector simulation",
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Wraps a raw amplitude vector (not necessarily normalised — useful
    /// for operator-applied states).
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n == 0 || n > SIM_QUBIT_CAP {
            return Err(Error::TooManyQubits {
                qubits: n,
                cap: SIM_QUBIT_CAP,
                context: "statevector simulation",
            });
        }
        if amps.len() != 1 << n {
            return Err(Error::LengthMismatch {
                left: amps.len(),
                right: 1 << n,
            });
        }
        Ok(Self { n, amps })
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    /// Amplitude of computational basis state `b` (bit `q` = qubit `q`).
    pub fn amplitude(&self, b: usize) -> Complex64 {
        self.amps[b]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Applies one operation in place.
    pub fn apply(&mut self, op: &GateOp) -> Result<()> {
        self.apply_with(op, false)
    }

    /// Applies the adjoint of one operation in place.
    pub fn apply_inverse(&mut self, op: &GateOp) -> Result<()> {
        self.apply_with(op, true)
    }

    fn apply_with(&mut self, op: &GateOp, inverse: bool) -> Result<()> {
        op.validate(self.n)?;
        match op {
            GateOp::PauliRotation { word, angle } => {
                let a = if inverse { -angle } else { *angle };
                self.rotate_word(word, a);
            }
            GateOp::GeneratorRotation { generator, angle } => {
                let a = if inverse { -angle } else { *angle };
                self.rotate_generator(generator, a)?;
            }
            GateOp::ControlledPauli {
                control,
                value,
                word,
            } => {
                // Pauli words are Hermitian and square to identity, so the
                // controlled gate is its own inverse.
                self.controlled_word(*control, *value, word);
            }
            GateOp::AncillaPrep { qubit, plus_i } => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let si = Complex64::new(0.0, if *plus_i { s } else { -s });
                let sr = Complex64::new(s, 0.0);
                // Forward: [[s, s], [si, -si]]; inverse is the adjoint.
                let m = if inverse {
                    [sr, -si, sr, si]
                } else {
                    [sr, sr, si, -si]
                };
                self.apply_one_qubit(*qubit, &m);
            }
            GateOp::InverseSegment(ops) => {
                if inverse {
                    for inner in ops {
                        self.apply_with(inner, false)?;
                    }
                } else {
                    for inner in ops.iter().rev() {
                        self.apply_with(inner, true)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn rotate_word(&mut self, word: &PauliWord, angle: f64) {
        let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
        if word.is_identity() {
            let phase = Complex64::new(c, -s);
            for a in &mut self.amps {
                *a *= phase;
            }
            return;
        }
        let x = word.x_mask();
        if x == 0 {
            // Diagonal word: phase_at(b) is +/-1.
            for b in 0..self.amps.len() {
                let w = word.phase_at(b as u64).re;
                self.amps[b] *= Complex64::new(c, -s * w);
            }
            return;
        }
        let pivot = x & x.wrapping_neg();
        for b in 0..self.amps.len() as u64 {
            if b & pivot != 0 {
                continue;
            }
            let p = b ^ x;
            let phi_b = word.phase_at(b);
            let phi_p = word.phase_at(p);
            let ab = self.amps[b as usize];
            let ap = self.amps[p as usize];
            let is = Complex64::new(0.0, s);
            self.amps[b as usize] = ab * c - is * phi_p * ap;
            self.amps[p as usize] = ap * c - is * phi_b * ab;
        }
    }

    fn rotate_generator(&mut self, generator: &PauliSum, angle: f64) -> Result<()> {
        if generator.pairwise_commuting()? {
            // exp(-i a/2 sum_t c_t W_t) factors into per-term rotations.
            for (c, w) in generator.terms() {
                self.rotate_word(w, c * angle);
            }
            return Ok(());
        }
        let (restricted, support) = generator.restricted_to_support()?;
        if support.len() > MATRIX_QUBIT_CAP {
            return Err(Error::TooManyQubits {
                qubits: support.len(),
                cap: MATRIX_QUBIT_CAP,
                context: "non-commuting generator rotation",
            });
        }
        let h = restricted.to_matrix()?;
        let u = crate::dense::expm(&(h * Complex64::new(0.0, -angle / 2.0)));
        self.apply_dense(&u, &support);
        Ok(())
    }

    fn controlled_word(&mut self, control: usize, value: bool, word: &PauliWord) {
        let x = word.x_mask();
        if x == 0 {
            for b in 0..self.amps.len() as u64 {
                if (b >> control & 1 == 1) == value {
                    self.amps[b as usize] *= word.phase_at(b);
                }
            }
            return;
        }
        let pivot = x & x.wrapping_neg();
        for b in 0..self.amps.len() as u64 {
            if b & pivot != 0 {
                continue;
            }
            // The control qubit is identity in `word`, so both pair members
            // share its value.
            if (b >> control & 1 == 1) != value {
                continue;
            }
            let p = b ^ x;
            let phi_b = word.phase_at(b);
            let phi_p = word.phase_at(p);
            let ab = self.amps[b as usize];
            let ap = self.amps[p as usize];
            self.amps[b as usize] = phi_p * ap;
            self.amps[p as usize] = phi_b * ab;
        }
    }

    fn apply_one_qubit(&mut self, qubit: usize, m: &[Complex64; 4]) {
        let bit = 1u64 << qubit;
        for b in 0..self.amps.len() as u64 {
            if b & bit != 0 {
                continue;
            }
            let p = b | bit;
            let a0 = self.amps[b as usize];
            let a1 = self.amps[p as usize];
            self.amps[b as usize] = m[0] * a0 + m[1] * a1;
            self.amps[p as usize] = m[2] * a0 + m[3] * a1;
        }
    }

    fn apply_dense(&mut self, u: &DMatrix<Complex64>, support: &[usize]) {
        let k = support.len();
        let dim = self.amps.len();
        let mut support_mask = 0u64;
        for &q in support {
            support_mask |= 1 << q;
        }
        let mut new_amps = vec![Complex64::new(0.0, 0.0); dim];
        for b in 0..dim as u64 {
            let mut loc = 0usize;
            for (i, &q) in support.iter().enumerate() {
                loc |= ((b >> q & 1) as usize) << i;
            }
            let base = b & !support_mask;
            let amp = self.amps[b as usize];
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            for locp in 0..1usize << k {
                let v = u[(locp, loc)];
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                let mut bp = base;
                for (i, &q) in support.iter().enumerate() {
                    bp |= ((locp >> i & 1) as u64) << q;
                }
                new_amps[bp as usize] += v * amp;
            }
        }
        self.amps = new_amps;
    }

    /// `<psi| sum |psi>`.
    pub fn expectation(&self, sum: &PauliSum) -> Result<f64> {
        if sum.qubit_count() != self.n {
            return Err(Error::LengthMismatch {
                left: sum.qubit_count(),
                right: self.n,
            });
        }
        let mut total = 0.0;
        for (c, w) in sum.terms() {
            let x = w.x_mask();
            let mut val = Complex64::new(0.0, 0.0);
            for b in 0..self.amps.len() as u64 {
                val += self.amps[(b ^ x) as usize].conj() * w.phase_at(b) * self.amps[b as usize];
            }
            total += c * val.re;
        }
        Ok(total)
    }

    /// New state `sum |psi>`.
    pub fn applied_sum(&self, sum: &PauliSum) -> Result<StateVector> {
        if sum.qubit_count() != self.n {
            return Err(Error::LengthMismatch {
                left: sum.qubit_count(),
                right: self.n,
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (c, w) in sum.terms() {
            let x = w.x_mask();
            for b in 0..self.amps.len() as u64 {
                out[(b ^ x) as usize] += w.phase_at(b) * self.amps[b as usize] * *c;
            }
        }
        Ok(StateVector {
            n: self.n,
            amps: out,
        })
    }

    /// Probability of the all-zeros outcome.
    pub fn probability_zero(&self) -> f64 {
        self.amps[0].norm_sqr()
    }

    /// `< prod_{q in x_qubits} X_q (x) |0..0><0..0|_rest >`, the expectation
    /// measured by ancilla-test constructions that project every
    /// non-ancilla qubit onto zero.  An empty `x_qubits` list is the plain
    /// zero projector.
    pub fn x_projector_expectation(&self, x_qubits: &[usize]) -> Result<f64> {
        let mut x_mask = 0u64;
        for &q in x_qubits {
            if q >= self.n {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    qubits: self.n,
                });
            }
            x_mask |= 1 << q;
        }
        if x_mask == 0 {
            return Ok(self.probability_zero());
        }
        // Indices with all non-x bits zero; the X product flips the x bits.
        let mut val = Complex64::new(0.0, 0.0);
        let k = x_mask.count_ones();
        let bits: Vec<u64> = (0..64u64).filter(|q| x_mask >> q & 1 == 1).collect();
        for a in 0..1u64 << k {
            let mut idx = 0u64;
            for (i, &q) in bits.iter().enumerate() {
                idx |= (a >> i & 1) << q;
            }
            let flipped = idx ^ x_mask;
            val += self.amps[flipped as usize].conj() * self.amps[idx as usize];
        }
        Ok(val.re)
    }
}

/// Measured operator of a PQC.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    /// Hermitian Pauli sum measured term by term (or group by group).
    Paulis(PauliSum),
    /// Projector onto `|0...0>`; the expectation is the all-zeros
    /// probability.  Used by compilation-style cost functions.
    ZeroProjector,
}

impl Observable {
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        match self {
            Observable::Paulis(sum) => state.expectation(sum),
            Observable::ZeroProjector => Ok(state.probability_zero()),
        }
    }
}

/// One parameterised gate `exp(-i theta/2 * generator)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PqcGate {
    name: String,
    generator: PauliSum,
}

impl PqcGate {
    pub fn new(name: impl Into<String>, generator: PauliSum) -> Self {
        Self {
            name: name.into(),
            generator,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generator(&self) -> &PauliSum {
        &self.generator
    }
}

/// A parameterised quantum circuit: fixed input preparation, a chain of
/// parameterised gates, an optional fixed epilogue, and a measured
/// observable.
///
/// The circuit computes `f(theta) = <0| C(theta)^dagger O C(theta) |0>`
/// with `C = epilogue * gate_n(theta_n) * ... * gate_1(theta_1) * prep`.
/// Parameters are indexed 1-based in the public API, matching the order in
/// which the gates are applied.
#[derive(Clone, Debug, PartialEq)]
pub struct Pqc {
    qubits: usize,
    input_prep: Circuit,
    gates: Vec<PqcGate>,
    epilogue: Circuit,
    observable: Observable,
}

impl Pqc {
    pub fn new(qubits: usize, gates: Vec<PqcGate>, observable: Observable) -> Result<Self> {
        for g in &gates {
            if g.generator.qubit_count() != qubits {
                return Err(Error::LengthMismatch {
                    left: g.generator.qubit_count(),
                    right: qubits,
                });
            }
        }
        if let Observable::Paulis(sum) = &observable {
            if sum.qubit_count() != qubits {
                return Err(Error::LengthMismatch {
                    left: sum.qubit_count(),
                    right: qubits,
                });
            }
        }
        Ok(Self {
            qubits,
            input_prep: Circuit::empty(qubits),
            gates,
            epilogue: Circuit::empty(qubits),
            observable,
        })
    }

    /// Adds a fixed state-preparation circuit applied before the
    /// parameterised gates.
    pub fn with_input_prep(mut self, prep: Circuit) -> Result<Self> {
        if prep.qubit_count() != self.qubits {
            return Err(Error::LengthMismatch {
                left: prep.qubit_count(),
                right: self.qubits,
            });
        }
        self.input_prep = prep;
        Ok(self)
    }

    /// Adds a fixed circuit applied after the parameterised gates, before
    /// measurement.
    pub fn with_epilogue(mut self, epilogue: Circuit) -> Result<Self> {
        if epilogue.qubit_count() != self.qubits {
            return Err(Error::LengthMismatch {
                left: epilogue.qubit_count(),
                right: self.qubits,
            });
        }
        self.epilogue = epilogue;
        Ok(self)
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn param_count(&self) -> usize {
        self.gates.len()
    }

    pub fn gates(&self) -> &[PqcGate] {
        &self.gates
    }

    pub fn input_prep(&self) -> &Circuit {
        &self.input_prep
    }

    pub fn epilogue(&self) -> &Circuit {
        &self.epilogue
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    /// Errors unless `theta` has one entry per gate.
    pub fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.gates.len() {
            return Err(Error::ThetaLength {
                expected: self.gates.len(),
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// Errors unless `param` is a valid 1-based parameter index.
    pub fn check_param(&self, param: usize) -> Result<()> {
        if param == 0 || param > self.gates.len() {
            return Err(Error::ParamOutOfRange {
                param,
                count: self.gates.len(),
            });
        }
        Ok(())
    }

    /// The bound operation for gate `j` (0-based) at angle `theta_j`.
    pub fn gate_op(&self, j: usize, theta_j: f64) -> GateOp {
        GateOp::GeneratorRotation {
            generator: self.gates[j].generator.clone(),
            angle: theta_j,
        }
    }

    /// Full bound circuit: prep, parameterised gates, epilogue.
    pub fn bound_circuit(&self, theta: &[f64]) -> Result<Circuit> {
        self.check_theta(theta)?;
        let mut ops = self.input_prep.ops().to_vec();
        for (j, t) in theta.iter().enumerate() {
            ops.push(self.gate_op(j, *t));
        }
        ops.extend_from_slice(self.epilogue.ops());
        Circuit::new(self.qubits, ops)
    }

    /// Output state of the bound circuit on `|0...0>`.
    pub fn output_state(&self, theta: &[f64]) -> Result<StateVector> {
        self.bound_circuit(theta)?.run()
    }

    /// `f(theta)`: expectation of the observable in the output state.
    pub fn eval(&self, theta: &[f64]) -> Result<f64> {
        let state = self.output_state(theta)?;
        self.observable.expectation(&state)
    }

    /// Parses the JSON interchange format.
    ///
    /// ```json
    /// {
    ///   "qubits": 2,
    ///   "input_prep": [ {"type": "pauli_rotation", "word": "XI", "angle": 1.0} ],
    ///   "gates": [ {"param": "theta_1", "generator": [[1.0, "ZZ"]]} ],
    ///   "epilogue": [],
    ///   "observable": [[1.0, "ZI"], [0.5, "IX"]]
    /// }
    /// ```
    ///
    /// `input_prep` and `epilogue` are optional.  Pauli strings list qubit 0
    /// first.
    pub fn from_json_str(json: &str) -> Result<Self> {
        let doc: PqcDoc = serde_json::from_str(json)?;
        doc.into_pqc()
    }

    /// Reads [`Self::from_json_str`] from a file.
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    /// Serialises to the JSON interchange format.  Only Pauli-sum
    /// observables are representable.
    pub fn to_json_string(&self) -> Result<String> {
        let doc = PqcDoc::from_pqc(self)?;
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

// --- JSON interchange ----------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PqcDoc {
    qubits: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    input_prep: Vec<OpDoc>,
    gates: Vec<GateDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    epilogue: Vec<OpDoc>,
    observable: Vec<(f64, String)>,
}

#[derive(Serialize, Deserialize)]
struct GateDoc {
    param: String,
    generator: Vec<(f64, String)>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum OpDoc {
    PauliRotation {
        word: String,
        angle: f64,
    },
    GeneratorRotation {
        generator: Vec<(f64, String)>,
        angle: f64,
    },
    ControlledPauli {
        control: usize,
        value: u8,
        word: String,
    },
    AncillaPrep {
        qubit: usize,
        phase: String,
    },
    InverseSegment {
        ops: Vec<OpDoc>,
    },
}

fn parse_sum(n: usize, pairs: &[(f64, String)]) -> Result<PauliSum> {
    let mut terms = Vec::with_capacity(pairs.len());
    for (c, s) in pairs {
        terms.push((*c, s.parse::<PauliWord>()?));
    }
    PauliSum::from_terms(n, terms)
}

fn sum_to_pairs(sum: &PauliSum) -> Vec<(f64, String)> {
    sum.terms()
        .iter()
        .map(|(c, w)| (*c, w.to_string()))
        .collect()
}

impl OpDoc {
    fn into_op(self, qubits: usize) -> Result<GateOp> {
        Ok(match self {
            OpDoc::PauliRotation { word, angle } => GateOp::PauliRotation {
                word: word.parse::<PauliWord>()?.extended(qubits)?,
                angle,
            },
            OpDoc::GeneratorRotation { generator, angle } => GateOp::GeneratorRotation {
                generator: parse_sum(qubits, &generator)?,
                angle,
            },
            OpDoc::ControlledPauli {
                control,
                value,
                word,
            } => GateOp::ControlledPauli {
                control,
                value: value != 0,
                word: word.parse::<PauliWord>()?.extended(qubits)?,
            },
            OpDoc::AncillaPrep { qubit, phase } => {
                let plus_i = match phase.as_str() {
                    "+i" | "i" => true,
                    "-i" => false,
                    other => return Err(Error::WordParse(other.to_string())),
                };
                GateOp::AncillaPrep { qubit, plus_i }
            }
            OpDoc::InverseSegment { ops } => GateOp::InverseSegment(
                ops.into_iter()
                    .map(|op| op.into_op(qubits))
                    .collect::<Result<Vec<_>>>()?,
            ),
        })
    }

    fn from_op(op: &GateOp) -> OpDoc {
        match op {
            GateOp::PauliRotation { word, angle } => OpDoc::PauliRotation {
                word: word.to_string(),
                angle: *angle,
            },
            GateOp::GeneratorRotation { generator, angle } => OpDoc::GeneratorRotation {
                generator: sum_to_pairs(generator),
                angle: *angle,
            },
            GateOp::ControlledPauli {
                control,
                value,
                word,
            } => OpDoc::ControlledPauli {
                control: *control,
                value: u8::from(*value),
                word: word.to_string(),
            },
            GateOp::AncillaPrep { qubit, plus_i } => OpDoc::AncillaPrep {
                qubit: *qubit,
                phase: if *plus_i { "+i" } else { "-i" }.to_string(),
            },
            GateOp::InverseSegment(ops) => OpDoc::InverseSegment {
                ops: ops.iter().map(OpDoc::from_op).collect(),
            },
        }
    }
}

impl PqcDoc {
    fn into_pqc(self) -> Result<Pqc> {
        let qubits = self.qubits;
        let mut gates = Vec::with_capacity(self.gates.len());
        for g in self.gates {
            gates.push(PqcGate::new(g.param, parse_sum(qubits, &g.generator)?));
        }
        let observable = Observable::Paulis(parse_sum(qubits, &self.observable)?);
        let mut pqc = Pqc::new(qubits, gates, observable)?;
        if !self.input_prep.is_empty() {
            let ops = self
                .input_prep
                .into_iter()
                .map(|op| op.into_op(qubits))
                .collect::<Result<Vec<_>>>()?;
            pqc = pqc.with_input_prep(Circuit::new(qubits, ops)?)?;
        }
        if !self.epilogue.is_empty() {
            let ops = self
                .epilogue
                .into_iter()
                .map(|op| op.into_op(qubits))
                .collect::<Result<Vec<_>>>()?;
            pqc = pqc.with_epilogue(Circuit::new(qubits, ops)?)?;
        }
        Ok(pqc)
    }

    fn from_pqc(pqc: &Pqc) -> Result<PqcDoc> {
        let observable = match pqc.observable() {
            Observable::Paulis(sum) => sum_to_pairs(sum),
            Observable::ZeroProjector => {
                return Err(Error::Unsupported(
                    "the zero projector observable has no JSON form",
                ))
            }
        };
        Ok(PqcDoc {
            qubits: pqc.qubit_count(),
            input_prep: pqc.input_prep().ops().iter().map(OpDoc::from_op).collect(),
            gates: pqc
                .gates()
                .iter()
                .map(|g| GateDoc {
                    param: g.name().to_string(),
                    generator: sum_to_pairs(g.generator()),
                })
                .collect(),
            epilogue: pqc.epilogue().ops().iter().map(OpDoc::from_op).collect(),
            observable,
        })
    }
}

// --- Shot sampling --------------------------------------------------------

/// Estimates `<state| observable |state>` from simulated measurement shots.
///
/// The observable is split into simultaneously measurable groups under
/// `criterion`, which must be [`GroupingCriterion::QubitWise`] — only
/// qubit-wise groups admit a common single-qubit basis rotation.  Each group
/// receives `shots` samples from its own deterministic substream of `seed`.
///
/// Returns `(estimate, standard_error)`.
pub fn sample_expectation(
    state: &StateVector,
    observable: &PauliSum,
    criterion: GroupingCriterion,
    shots: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if criterion != GroupingCriterion::QubitWise {
        return Err(Error::NotQubitWise);
    }
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    if observable.qubit_count() != state.qubit_count() {
        return Err(Error::LengthMismatch {
            left: observable.qubit_count(),
            right: state.qubit_count(),
        });
    }
    let partition = grouping::partition(observable, criterion)?;
    let n = state.qubit_count();
    let mut estimate = 0.0;
    let mut variance = 0.0;
    for (gi, group) in partition.groups().iter().enumerate() {
        // Common measurement basis for the group, qubit by qubit.
        let mut rotated = state.clone();
        for q in 0..n {
            let mut basis = PauliLetter::I;
            for &ti in group {
                let l = observable.terms()[ti].1.letter(q)?;
                if l != PauliLetter::I {
                    basis = l;
                    break;
                }
            }
            let s = std::f64::consts::FRAC_1_SQRT_2;
            match basis {
                PauliLetter::X => {
                    // Hadamard: X -> Z.
                    let h = [
                        Complex64::new(s, 0.0),
                        Complex64::new(s, 0.0),
                        Complex64::new(s, 0.0),
                        Complex64::new(-s, 0.0),
                    ];
                    rotated.apply_one_qubit(q, &h);
                }
                PauliLetter::Y => {
                    // S^dagger then Hadamard: Y -> Z.
                    let sdg = [
                        Complex64::new(1.0, 0.0),
                        Complex64::new(0.0, 0.0),
                        Complex64::new(0.0, 0.0),
                        Complex64::new(0.0, -1.0),
                    ];
                    rotated.apply_one_qubit(q, &sdg);
                    let h = [
                        Complex64::new(s, 0.0),
                        Complex64::new(s, 0.0),
                        Complex64::new(s, 0.0),
                        Complex64::new(-s, 0.0),
                    ];
                    rotated.apply_one_qubit(q, &h);
                }
                _ => {}
            }
        }
        // Cumulative distribution over basis states.
        let mut cdf = Vec::with_capacity(rotated.amps.len());
        let mut acc = 0.0;
        for a in &rotated.amps {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        let total = acc;
        let mut rng = SplitMix64::substream(seed, gi as u64);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..shots {
            let u = rng.next_f64() * total;
            let idx = cdf.partition_point(|&p| p <= u).min(rotated.amps.len() - 1);
            let bits = idx as u64;
            let mut value = 0.0;
            for &ti in group {
                let (c, w) = &observable.terms()[ti];
                let sign = if (bits & w.support_mask()).count_ones() % 2 == 1 {
                    -1.0
                } else {
                    1.0
                };
                value += c * sign;
            }
            sum += value;
            sum_sq += value * value;
        }
        let mean = sum / shots as f64;
        estimate += mean;
        if shots > 1 {
            let var = (sum_sq - sum * sum / shots as f64) / (shots as f64 - 1.0);
            variance += var.max(0.0) / shots as f64;
        }
    }
    Ok((estimate, variance.sqrt()))
}
