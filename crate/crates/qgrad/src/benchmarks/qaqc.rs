//! Circuit compilation as a variational problem.
//!
//! Given a target unitary `U` on `N` qubits, find ansatz angles `mu` so
//! that the ansatz matches `U` up to global phase.  The figure of merit
//! comes from the two-register overlap test on `2N` qubits:
//!
//! 1. prepare `N` maximally-entangled pairs `(A_i, B_i)`,
//! 2. run `U` on register A and the ansatz on register B,
//! 3. undo the pair preparation and measure the all-zeros projector.
//!
//! The success probability is `f = |Tr(U W^T)|^2 / d^2` for ansatz
//! matrix `W`, so the compilation cost is `C = 1 - f`, zero exactly at a
//! phase-perfect compilation.  Because the B register enters through
//! `W^T`, an ansatz `prod_l exp(-i mu_l G_l / 2)` with real generator
//! matrices compiles the target angles `theta*` at `mu = -theta*`.
//!
//! The ansatz alternates ring `ZZ` layers with transverse-field `X`
//! layers (an Ising evolution ansatz); targets include a small Fourier
//! transform, a doubly-controlled NOT, a W-state preparator, and a
//! random instance of the ansatz itself.

use crate::circuit::{Circuit, GateOp, Observable, Pqc, PqcGate};
use crate::error::{Error, Result};
use crate::pauli::{PauliLetter, PauliSum, PauliWord};
use crate::rng::SplitMix64;

/// Hadamard as a rotation: `pi` about `(X + Z)/sqrt(2)` (global phase
/// `-i`, which the overlap test cannot see).
pub fn hadamard_op(n: usize, q: usize) -> Result<GateOp> {
    Ok(GateOp::GeneratorRotation {
        generator: crate::gradient::hadamard_generator(n, q)?,
        angle: std::f64::consts::PI,
    })
}

/// CNOT as a controlled Pauli word.
pub fn cnot_op(n: usize, control: usize, target: usize) -> Result<GateOp> {
    Ok(GateOp::ControlledPauli {
        control,
        value: true,
        word: PauliWord::single(n, target, PauliLetter::X)?,
    })
}

/// `diag(1, 1, 1, e^{i lambda})` on (control, target), phase-exact:
/// rotation by `-lambda/2` about `II - Z_c - Z_t + Z_c Z_t`.
pub fn controlled_phase_op(n: usize, control: usize, target: usize, lambda: f64) -> Result<GateOp> {
    let zc = PauliWord::single(n, control, PauliLetter::Z)?;
    let zt = PauliWord::single(n, target, PauliLetter::Z)?;
    let zz = zc.with_letter(target, PauliLetter::Z)?;
    let generator = PauliSum::from_terms(
        n,
        [
            (1.0, PauliWord::identity(n)?),
            (-1.0, zc),
            (-1.0, zt),
            (1.0, zz),
        ],
    )?;
    Ok(GateOp::GeneratorRotation {
        generator,
        angle: -lambda / 2.0,
    })
}

/// Projector-exponential generator `(I +- Z_a)(I +- Z_b)(I - X_t) / 8`,
/// whose `-2 pi` rotation is a doubly-controlled X (phase-exact).
fn double_controlled_x_generator(
    n: usize,
    controls: [(usize, bool); 2],
    target: usize,
) -> Result<PauliSum> {
    let mut terms: Vec<(f64, PauliWord)> = vec![(1.0, PauliWord::identity(n)?)];
    for (q, active_on_one) in controls {
        // (I - Z)/1 selects |1>, (I + Z)/1 selects |0>; the 1/2 factors
        // are collected at the end.
        let sign = if active_on_one { -1.0 } else { 1.0 };
        let mut next = Vec::with_capacity(terms.len() * 2);
        for (c, w) in &terms {
            next.push((*c, *w));
            next.push((c * sign, w.with_letter(q, PauliLetter::Z)?));
        }
        terms = next;
    }
    let mut next = Vec::with_capacity(terms.len() * 2);
    for (c, w) in &terms {
        next.push((*c, *w));
        next.push((-c, w.with_letter(target, PauliLetter::X)?));
    }
    PauliSum::from_terms(n, next).map(|s| s.scale(1.0 / 8.0))
}

/// Toffoli on 3 qubits (controls 0, 1; target 2).
pub fn toffoli() -> Result<Circuit> {
    let generator = double_controlled_x_generator(3, [(0, true), (1, true)], 2)?;
    Circuit::new(
        3,
        vec![GateOp::GeneratorRotation {
            generator,
            angle: -2.0 * std::f64::consts::PI,
        }],
    )
}

/// 3-qubit Fourier transform, wire 0 as the most significant digit,
/// including the final wire swap.
pub fn qft3() -> Result<Circuit> {
    use std::f64::consts::FRAC_PI_2;
    let ops = vec![
        hadamard_op(3, 0)?,
        controlled_phase_op(3, 1, 0, FRAC_PI_2)?,
        controlled_phase_op(3, 2, 0, FRAC_PI_2 / 2.0)?,
        hadamard_op(3, 1)?,
        controlled_phase_op(3, 2, 1, FRAC_PI_2)?,
        hadamard_op(3, 2)?,
        // Swap wires 0 and 2.
        cnot_op(3, 0, 2)?,
        cnot_op(3, 2, 0)?,
        cnot_op(3, 0, 2)?,
    ];
    Circuit::new(3, ops)
}

/// Prepares `(|100> + |010> + |001>)/sqrt(3)` from `|000>`, exactly (no
/// stray phases): a Y rotation, an anti-controlled Y rotation, and a
/// doubly-anti-controlled X.
pub fn wstate() -> Result<Circuit> {
    let angle0 = 2.0 * (1.0 / 3.0f64.sqrt()).asin();
    let ry0 = GateOp::PauliRotation {
        word: PauliWord::single(3, 0, PauliLetter::Y)?,
        angle: angle0,
    };
    // On the qubit-0 = |0> branch, rotate qubit 1 by pi/2 about Y.
    let cry = GateOp::GeneratorRotation {
        generator: PauliSum::from_terms(
            3,
            [
                (0.5, PauliWord::single(3, 1, PauliLetter::Y)?),
                (
                    0.5,
                    PauliWord::single(3, 0, PauliLetter::Z)?.with_letter(1, PauliLetter::Y)?,
                ),
            ],
        )?,
        angle: std::f64::consts::FRAC_PI_2,
    };
    let ccx = GateOp::GeneratorRotation {
        generator: double_controlled_x_generator(3, [(0, false), (1, false)], 2)?,
        angle: -2.0 * std::f64::consts::PI,
    };
    Circuit::new(3, vec![ry0, cry, ccx])
}

/// Nearest-neighbour coupling layout of the Ising ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Topology {
    /// Couplings `(i, i+1 mod n)`: `n` ZZ terms per coupling layer.
    Ring,
    /// Open chain `(i, i+1)`: `n - 1` ZZ terms per coupling layer.
    Line,
}

impl Topology {
    fn coupling_graph(self, n: usize) -> Result<crate::benchmarks::qaoa::Graph> {
        match self {
            Topology::Ring => crate::benchmarks::qaoa::Graph::ring(n),
            Topology::Line => crate::benchmarks::qaoa::Graph::line(n),
        }
    }
}

impl std::fmt::Display for Topology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Topology::Ring => "ring",
            Topology::Line => "line",
        })
    }
}

impl std::str::FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ring" => Ok(Topology::Ring),
            "line" => Ok(Topology::Line),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

/// One ansatz layer pair on `n` qubits: the nearest-neighbour Ising
/// coupling `sum Z_i Z_j` on the topology's edges and the transverse
/// field `sum_i X_i`.
pub fn ansatz_generators(n: usize, layers: usize, topology: Topology) -> Result<Vec<PqcGate>> {
    if layers == 0 {
        return Err(Error::NonPositiveCount { name: "layers" });
    }
    let coupling = crate::benchmarks::qaoa::cut_generator(&topology.coupling_graph(n)?)?;
    let field = crate::benchmarks::qaoa::mixer_generator(n)?;
    let mut gates = Vec::with_capacity(2 * layers);
    for l in 1..=layers {
        gates.push(PqcGate::new(format!("zz_{l}"), coupling.clone()));
        gates.push(PqcGate::new(format!("x_{l}"), field.clone()));
    }
    Ok(gates)
}

/// The ring ansatz itself at seeded angles — a target the ansatz can
/// compile exactly (at the negated angles).
pub fn ising_target(n: usize, layers: usize, seed: u64) -> Result<(Circuit, Vec<f64>)> {
    let gates = ansatz_generators(n, layers, Topology::Ring)?;
    let mut rng = SplitMix64::substream(seed, 7);
    let theta: Vec<f64> = (0..gates.len()).map(|_| rng.next_in(-0.6, 0.6)).collect();
    let ops = gates
        .iter()
        .zip(&theta)
        .map(|(g, t)| GateOp::GeneratorRotation {
            generator: g.generator().clone(),
            angle: *t,
        })
        .collect();
    Ok((Circuit::new(n, ops)?, theta))
}

/// The `2N`-qubit overlap-test PQC for compiling `target` with the
/// `layers`-layer Ising ansatz.  Register A is qubits `0..N` and runs the
/// target inside the input prep; register B is qubits `N..2N` and carries
/// the parameterized gates.  The observable is the all-zeros projector;
/// `cost = 1 - f`.
pub fn hst_pqc(target: &Circuit, layers: usize, topology: Topology) -> Result<Pqc> {
    let n = target.qubit_count();
    let total = 2 * n;
    let mut prep_ops = Vec::new();
    for i in 0..n {
        prep_ops.push(hadamard_op(total, i)?);
        prep_ops.push(cnot_op(total, i, n + i)?);
    }
    for op in target.ops() {
        prep_ops.push(op.extended(total)?);
    }
    let mapping: Vec<usize> = (n..total).collect();
    let gates = ansatz_generators(n, layers, topology)?
        .into_iter()
        .map(|g| {
            Ok(PqcGate::new(
                g.name().to_string(),
                g.generator().map_qubits(&mapping, total)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut epilogue_ops = Vec::new();
    for i in 0..n {
        epilogue_ops.push(cnot_op(total, i, n + i)?);
        epilogue_ops.push(hadamard_op(total, i)?);
    }
    Pqc::new(total, gates, Observable::ZeroProjector)?
        .with_input_prep(Circuit::new(total, prep_ops)?)?
        .with_epilogue(Circuit::new(total, epilogue_ops)?)
}

/// Compilation cost at `theta`: `1 - f(theta)`.
pub fn hst_cost(pqc: &Pqc, theta: &[f64]) -> Result<f64> {
    Ok(1.0 - pqc.eval(theta)?)
}

/// Dense reference for the overlap: `1 - |Tr(U W^T)|^2 / d^2`, with `W`
/// the ansatz matrix on `N` qubits at `theta`.
pub fn hst_cost_dense(
    target: &Circuit,
    layers: usize,
    topology: Topology,
    theta: &[f64],
) -> Result<f64> {
    let n = target.qubit_count();
    let gates = ansatz_generators(n, layers, topology)?;
    if theta.len() != gates.len() {
        return Err(Error::ThetaLength {
            expected: gates.len(),
            got: theta.len(),
        });
    }
    let ops: Vec<GateOp> = gates
        .iter()
        .zip(theta)
        .map(|(g, t)| GateOp::GeneratorRotation {
            generator: g.generator().clone(),
            angle: *t,
        })
        .collect();
    let w = crate::dense::circuit_unitary(&Circuit::new(n, ops)?)?;
    let u = crate::dense::circuit_unitary(target)?;
    let d = (1usize << n) as f64;
    let overlap = (u * w.transpose()).trace();
    Ok(1.0 - (overlap.norm() / d).powi(2))
}
