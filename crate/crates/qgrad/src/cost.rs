//! Static resource estimates: circuit counts, register shapes, a CNOT-level
//! lowering, and error-free-rate (EFR) estimates under a per-gate error
//! table.
//!
//! Counting conventions, writing `N(A)` for the number of non-identity
//! Pauli terms in `A` and `Ncm(A)` for the number of mutually-commuting
//! groups they split into (a zero-state projector observable counts as
//! `N = Ncm = 1`):
//!
//! | method | distinct circuits      | qubits | logical depth |
//! |--------|------------------------|--------|---------------|
//! | PSR    | `2 N(H) Ncm(O)`        | `N`    | `n`           |
//! | HT     | `N(H) Ncm(O)`          | `N+1`  | `n+1`         |
//! | DHT    | `2 N(H) Ncm(O)`        | `N`    | `n+1`         |
//! | RHT    | `Ncm(H) N(O)`          | `N+1`  | `2n-j+1`      |
//! | RDHT   | `2 Ncm(H) N(O)`        | `N`    | `2n-j+1`      |
//!
//! The PSR row is the count *after decomposing* a multi-term generator
//! into single-term gates, each shifted separately; its circuits are then
//! gate-for-gate the insertion (DHT) circuits, which is also how
//! [`cost_report`] prices the PSR row for CNOTs and EFR.
//!
//! The lowering is a standard-recipe gate estimate, not a compiler:
//!
//! * rotation about a weight-`w >= 2` Pauli word: a CNOT ladder and one
//!   Z rotation, `2(w-1)` CNOTs + 1 one-qubit gate, plus 2 one-qubit
//!   basis changes per X/Y letter; weight 1 is a single one-qubit gate;
//! * a rotation generated by a Pauli sum: each non-identity term lowered
//!   as its own word rotation (exact for commuting terms, a
//!   term-by-term estimate otherwise);
//! * controlled Pauli word of weight `w`: `w` CNOTs, plus 2 one-qubit
//!   gates per Y/Z letter (a controlled X *is* a CNOT);
//! * ancilla preparation: 3 one-qubit gates;
//! * inverted segments count like the segment itself.
//!
//! EFR composes per-gate error probabilities: `1 - prod_i (1 - p_i)` over
//! the lowered gate list.

use crate::circuit::{Circuit, GateOp, Observable, Pqc};
use crate::error::{Error, Result};
use crate::gradient::{build_plan, GradMethod};
use crate::grouping::{group_count, GroupingCriterion};
use crate::pauli::{PauliLetter, PauliSum, PauliWord};
use serde::{Deserialize, Serialize};

/// Number of distinct circuits a method needs for one partial derivative,
/// from the term/group counts of the generator (`n_h`, `ncm_h`) and the
/// observable (`n_o`, `ncm_o`).  All four counts must be at least 1.
pub fn first_order_count(
    method: GradMethod,
    n_h: usize,
    ncm_h: usize,
    n_o: usize,
    ncm_o: usize,
) -> Result<usize> {
    for (name, value) in [
        ("n_h", n_h),
        ("ncm_h", ncm_h),
        ("n_o", n_o),
        ("ncm_o", ncm_o),
    ] {
        if value == 0 {
            return Err(Error::NonPositiveCount { name });
        }
    }
    match method {
        GradMethod::Fd => Err(Error::Unsupported(
            "finite differences are a numerical check, not a costed hardware method",
        )),
        GradMethod::Psr => Ok(2 * n_h * ncm_o),
        GradMethod::Ht => Ok(n_h * ncm_o),
        GradMethod::Dht => Ok(2 * n_h * ncm_o),
        GradMethod::Rht => Ok(ncm_h * n_o),
        GradMethod::Rdht => Ok(2 * ncm_h * n_o),
    }
}

/// `(qubits, logical depth)` of the estimation circuits for the `j`-th
/// (1-based) of `n` gates on an `N`-qubit register.
///
/// Depth is counted in parameterized-gate layers; the reversed methods pay
/// for uncomputation, hence the `j` dependence.
pub fn first_order_shape(
    method: GradMethod,
    qubits: usize,
    gates: usize,
    param: usize,
) -> Result<(usize, usize)> {
    if param == 0 || param > gates {
        return Err(Error::ParamOutOfRange {
            param,
            count: gates,
        });
    }
    match method {
        GradMethod::Fd => Err(Error::Unsupported(
            "finite differences are a numerical check, not a costed hardware method",
        )),
        GradMethod::Psr => Ok((qubits, gates)),
        GradMethod::Ht => Ok((qubits + 1, gates + 1)),
        GradMethod::Dht => Ok((qubits, gates + 1)),
        GradMethod::Rht => Ok((qubits + 1, 2 * gates - param + 1)),
        GradMethod::Rdht => Ok((qubits, 2 * gates - param + 1)),
    }
}

/// A gate in the lowered (CNOT + one-qubit) picture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LoweredGate {
    Cnot,
    OneQubit,
    Measure,
}

fn x_or_y_letters(word: &PauliWord) -> Result<usize> {
    let mut count = 0;
    for q in 0..word.qubit_count() {
        if matches!(word.letter(q)?, PauliLetter::X | PauliLetter::Y) {
            count += 1;
        }
    }
    Ok(count)
}

fn y_or_z_letters(word: &PauliWord) -> Result<usize> {
    let mut count = 0;
    for q in 0..word.qubit_count() {
        if matches!(word.letter(q)?, PauliLetter::Y | PauliLetter::Z) {
            count += 1;
        }
    }
    Ok(count)
}

fn push_n(out: &mut Vec<LoweredGate>, gate: LoweredGate, n: usize) {
    out.extend(std::iter::repeat_n(gate, n));
}

fn lower_word_rotation(word: &PauliWord, out: &mut Vec<LoweredGate>) -> Result<()> {
    let w = word.weight();
    match w {
        0 => {}
        1 => out.push(LoweredGate::OneQubit),
        _ => {
            push_n(out, LoweredGate::OneQubit, 2 * x_or_y_letters(word)?);
            push_n(out, LoweredGate::Cnot, 2 * (w - 1));
            out.push(LoweredGate::OneQubit);
        }
    }
    Ok(())
}

fn lower_op(op: &GateOp, out: &mut Vec<LoweredGate>) -> Result<()> {
    match op {
        GateOp::PauliRotation { word, .. } => lower_word_rotation(word, out)?,
        GateOp::GeneratorRotation { generator, .. } => {
            for (_, word) in generator.non_identity_terms() {
                lower_word_rotation(word, out)?;
            }
        }
        GateOp::ControlledPauli { word, .. } => {
            push_n(out, LoweredGate::Cnot, word.weight());
            push_n(out, LoweredGate::OneQubit, 2 * y_or_z_letters(word)?);
        }
        GateOp::AncillaPrep { .. } => push_n(out, LoweredGate::OneQubit, 3),
        GateOp::InverseSegment(ops) => {
            for inner in ops {
                lower_op(inner, out)?;
            }
        }
    }
    Ok(())
}

/// Lower a circuit to its CNOT + one-qubit gate estimate.
pub fn lower(circuit: &Circuit) -> Result<Vec<LoweredGate>> {
    let mut out = Vec::new();
    for op in circuit.ops() {
        lower_op(op, &mut out)?;
    }
    Ok(out)
}

/// CNOT count of the lowered circuit.
pub fn lower_and_count_cnots(circuit: &Circuit) -> Result<usize> {
    Ok(lower(circuit)?
        .iter()
        .filter(|g| matches!(g, LoweredGate::Cnot))
        .count())
}

/// Per-gate error probabilities.  All values live in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub cnot: f64,
    #[serde(rename = "1q")]
    pub one_qubit: f64,
    pub measure: f64,
}

/// Representative error rates for a near-term device.
pub const DEFAULT_ERROR_TABLE: ErrorTable = ErrorTable {
    cnot: 0.01,
    one_qubit: 0.001,
    measure: 0.01,
};

impl Default for ErrorTable {
    fn default() -> Self {
        DEFAULT_ERROR_TABLE
    }
}

impl ErrorTable {
    pub fn validate(&self) -> Result<()> {
        for value in [self.cnot, self.one_qubit, self.measure] {
            if !(0.0..1.0).contains(&value) {
                return Err(Error::ProbabilityRange { value });
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let table: ErrorTable = serde_json::from_str(s)?;
        table.validate()?;
        Ok(table)
    }

    pub fn from_json_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    fn probability(&self, gate: LoweredGate) -> f64 {
        match gate {
            LoweredGate::Cnot => self.cnot,
            LoweredGate::OneQubit => self.one_qubit,
            LoweredGate::Measure => self.measure,
        }
    }
}

/// Probability that at least one gate in the list fails:
/// `1 - prod_i (1 - p_i)`.
pub fn efr_of_gates(gates: &[LoweredGate], table: &ErrorTable) -> f64 {
    let survive: f64 = gates.iter().map(|&g| 1.0 - table.probability(g)).product();
    1.0 - survive
}

/// EFR of a circuit under the table, over its lowered gate list.
pub fn efr(circuit: &Circuit, table: &ErrorTable) -> Result<f64> {
    table.validate()?;
    Ok(efr_of_gates(&lower(circuit)?, table))
}

/// Resource estimate for one method on one partial derivative.
#[derive(Clone, Debug, Serialize)]
pub struct CostReport {
    pub method: GradMethod,
    /// Distinct measurement circuits per gradient component.
    pub distinct_circuits: usize,
    pub qubits: usize,
    /// Logical depth in parameterized-gate layers.
    pub depth: usize,
    /// Mean CNOT count over the method's circuits, rounded.
    pub cnot_count: usize,
    /// Mean error-free-rate-complement over the method's circuits.
    pub efr: f64,
}

/// Term/group counts `(N, Ncm)` of a Pauli sum's non-identity part.
fn sum_counts(sum: &PauliSum) -> Result<(usize, usize)> {
    let non_identity = PauliSum::from_terms(
        sum.qubit_count(),
        sum.non_identity_terms().cloned().collect::<Vec<_>>(),
    )?;
    Ok((
        non_identity.non_identity_count(),
        group_count(&non_identity, GroupingCriterion::FullCommutativity)?,
    ))
}

/// Counts feeding the circuit-count formulas for gate `param` (1-based):
/// `(N(H), Ncm(H), N(O), Ncm(O))`.  A zero-state projector observable
/// counts as a single group.
pub fn pqc_counts(pqc: &Pqc, param: usize) -> Result<(usize, usize, usize, usize)> {
    pqc.check_param(param)?;
    let (n_h, ncm_h) = sum_counts(pqc.gates()[param - 1].generator())?;
    let (n_o, ncm_o) = match pqc.observable() {
        Observable::ZeroProjector => (1, 1),
        Observable::Paulis(_) => sum_counts(&crate::gradient::folded_observable(pqc)?)?,
    };
    Ok((n_h, ncm_h, n_o, ncm_o))
}

/// Full static cost of estimating `d f / d theta_param` with `method`.
///
/// Counts and shapes come from the tables above; CNOTs and EFR average
/// over the circuits the method actually runs at `theta`.  The PSR row is
/// priced on its decomposed form (see the module docs), so it exists even
/// when the joint generator spectrum rules direct shifting out.
pub fn cost_report(
    pqc: &Pqc,
    theta: &[f64],
    param: usize,
    method: GradMethod,
    table: &ErrorTable,
) -> Result<CostReport> {
    pqc.check_theta(theta)?;
    pqc.check_param(param)?;
    table.validate()?;
    let (n_h, ncm_h, n_o, ncm_o) = pqc_counts(pqc, param)?;
    let distinct = first_order_count(method, n_h, ncm_h, n_o, ncm_o)?;
    let (qubits, depth) = first_order_shape(method, pqc.qubit_count(), pqc.param_count(), param)?;
    // PSR's decomposed circuits are the insertion circuits.
    let plan_method = match method {
        GradMethod::Psr => GradMethod::Dht,
        m => m,
    };
    let plan = build_plan(pqc, theta, param, plan_method)?;
    let mut cnots = 0.0;
    let mut efr_sum = 0.0;
    let mut circuits = 0usize;
    for task in plan.tasks() {
        cnots += lower_and_count_cnots(&task.circuit)? as f64;
        efr_sum += efr(&task.circuit, table)?;
        circuits += 1;
    }
    let (cnot_count, mean_efr) = if circuits == 0 {
        (0, 0.0)
    } else {
        (
            (cnots / circuits as f64).round() as usize,
            efr_sum / circuits as f64,
        )
    };
    Ok(CostReport {
        method,
        distinct_circuits: distinct,
        qubits,
        depth,
        cnot_count,
        efr: mean_efr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::PqcGate;

    fn word(s: &str) -> PauliWord {
        s.parse().unwrap()
    }

    #[test]
    fn count_formulas() {
        use GradMethod::*;
        assert_eq!(first_order_count(Ht, 3, 1, 1, 2).unwrap(), 6);
        assert_eq!(first_order_count(Psr, 3, 1, 1, 2).unwrap(), 12);
        assert_eq!(first_order_count(Dht, 3, 1, 1, 2).unwrap(), 12);
        assert_eq!(first_order_count(Rht, 1, 2, 5, 1).unwrap(), 10);
        assert_eq!(first_order_count(Rdht, 1, 2, 5, 1).unwrap(), 20);
        // The Hadamard test halves both shifted-evaluation counts.
        for (n_h, ncm_o) in [(1, 1), (4, 3), (16, 2)] {
            let ht = first_order_count(Ht, n_h, 1, 1, ncm_o).unwrap();
            assert_eq!(first_order_count(Psr, n_h, 1, 1, ncm_o).unwrap(), 2 * ht);
            assert_eq!(first_order_count(Dht, n_h, 1, 1, ncm_o).unwrap(), 2 * ht);
        }
        assert!(matches!(
            first_order_count(Ht, 0, 1, 1, 1),
            Err(Error::NonPositiveCount { name: "n_h" })
        ));
        assert!(matches!(
            first_order_count(Ht, 1, 1, 1, 0),
            Err(Error::NonPositiveCount { name: "ncm_o" })
        ));
        assert!(matches!(
            first_order_count(Fd, 1, 1, 1, 1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn shape_formulas() {
        use GradMethod::*;
        assert_eq!(first_order_shape(Psr, 4, 3, 2).unwrap(), (4, 3));
        assert_eq!(first_order_shape(Ht, 4, 3, 2).unwrap(), (5, 4));
        assert_eq!(first_order_shape(Dht, 4, 3, 2).unwrap(), (4, 4));
        assert_eq!(first_order_shape(Rht, 3, 4, 2).unwrap(), (4, 7));
        assert_eq!(first_order_shape(Rdht, 3, 4, 2).unwrap(), (3, 7));
        // Reversed methods get cheaper for later gates.
        assert_eq!(first_order_shape(Rht, 3, 4, 4).unwrap(), (4, 5));
        assert!(matches!(
            first_order_shape(Psr, 4, 3, 0),
            Err(Error::ParamOutOfRange { .. })
        ));
        assert!(matches!(
            first_order_shape(Psr, 4, 3, 4),
            Err(Error::ParamOutOfRange { .. })
        ));
        assert!(matches!(
            first_order_shape(Fd, 4, 3, 1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn word_rotation_lowering() {
        let zz = Circuit::new(
            2,
            vec![GateOp::PauliRotation {
                word: word("ZZ"),
                angle: 0.3,
            }],
        )
        .unwrap();
        assert_eq!(lower_and_count_cnots(&zz).unwrap(), 2);
        let gates = lower(&zz).unwrap();
        assert_eq!(
            gates
                .iter()
                .filter(|g| **g == LoweredGate::OneQubit)
                .count(),
            1
        );
        // XY: 2 CNOTs, 1 Z rotation, 2 basis changes per non-Z letter.
        let xy = Circuit::new(
            2,
            vec![GateOp::PauliRotation {
                word: word("XY"),
                angle: 0.3,
            }],
        )
        .unwrap();
        let gates = lower(&xy).unwrap();
        assert_eq!(gates.iter().filter(|g| **g == LoweredGate::Cnot).count(), 2);
        assert_eq!(
            gates
                .iter()
                .filter(|g| **g == LoweredGate::OneQubit)
                .count(),
            5
        );
        // Weight 1 is a bare one-qubit rotation; identity is free.
        let x = Circuit::new(
            1,
            vec![GateOp::PauliRotation {
                word: word("X"),
                angle: 0.3,
            }],
        )
        .unwrap();
        assert_eq!(lower(&x).unwrap(), vec![LoweredGate::OneQubit]);
        let id = Circuit::new(
            1,
            vec![GateOp::PauliRotation {
                word: word("I"),
                angle: 0.3,
            }],
        )
        .unwrap();
        assert!(lower(&id).unwrap().is_empty());
    }

    #[test]
    fn controlled_word_lowering() {
        // Controlled X^4: four CNOTs, nothing else.
        let cxxxx = Circuit::new(
            5,
            vec![GateOp::ControlledPauli {
                control: 4,
                value: true,
                word: word("XXXXI"),
            }],
        )
        .unwrap();
        let gates = lower(&cxxxx).unwrap();
        assert_eq!(gates.len(), 4);
        assert!(gates.iter().all(|g| *g == LoweredGate::Cnot));
        // Z and Y letters are CNOTs conjugated by one-qubit gates.
        let czy = Circuit::new(
            3,
            vec![GateOp::ControlledPauli {
                control: 2,
                value: true,
                word: word("ZYI"),
            }],
        )
        .unwrap();
        let gates = lower(&czy).unwrap();
        assert_eq!(gates.iter().filter(|g| **g == LoweredGate::Cnot).count(), 2);
        assert_eq!(
            gates
                .iter()
                .filter(|g| **g == LoweredGate::OneQubit)
                .count(),
            4
        );
    }

    #[test]
    fn prep_generator_and_inverse_lowering() {
        let ops = vec![
            GateOp::AncillaPrep {
                qubit: 0,
                plus_i: false,
            },
            GateOp::GeneratorRotation {
                generator: PauliSum::parse_terms(2, &[(0.5, "XX"), (0.25, "ZI"), (1.0, "II")])
                    .unwrap(),
                angle: 0.7,
            },
        ];
        let circuit = Circuit::new(2, ops.clone()).unwrap();
        let gates = lower(&circuit).unwrap();
        // Prep: 3 one-qubit.  XX: 4 basis changes + 2 CNOTs + 1 rotation.
        // ZI: 1 one-qubit.  II: skipped.
        assert_eq!(gates.iter().filter(|g| **g == LoweredGate::Cnot).count(), 2);
        assert_eq!(
            gates
                .iter()
                .filter(|g| **g == LoweredGate::OneQubit)
                .count(),
            3 + 5 + 1
        );
        let inverse = Circuit::new(2, vec![GateOp::InverseSegment(ops)]).unwrap();
        assert_eq!(lower(&inverse).unwrap().len(), gates.len());
    }

    #[test]
    fn efr_composes_gate_survival() {
        let table = ErrorTable {
            cnot: 0.01,
            one_qubit: 0.02,
            measure: 0.05,
        };
        assert_eq!(efr_of_gates(&[], &table), 0.0);
        assert!((efr_of_gates(&[LoweredGate::Cnot], &table) - 0.01).abs() < 1e-15);
        let two = efr_of_gates(&[LoweredGate::Cnot, LoweredGate::OneQubit], &table);
        assert!((two - 0.0298).abs() < 1e-12);
        let with_measure = efr_of_gates(&[LoweredGate::Measure], &table);
        assert!((with_measure - 0.05).abs() < 1e-15);
        let empty = Circuit::empty(1);
        assert_eq!(efr(&empty, &table).unwrap(), 0.0);
    }

    #[test]
    fn error_table_parsing_and_validation() {
        let table =
            ErrorTable::from_json_str(r#"{"cnot": 0.02, "1q": 0.002, "measure": 0.03}"#).unwrap();
        assert_eq!(table.cnot, 0.02);
        assert_eq!(table.one_qubit, 0.002);
        assert_eq!(table.measure, 0.03);
        assert_eq!(ErrorTable::default(), DEFAULT_ERROR_TABLE);
        assert!(ErrorTable {
            cnot: 1.0,
            ..DEFAULT_ERROR_TABLE
        }
        .validate()
        .is_err());
        assert!(ErrorTable {
            one_qubit: -0.1,
            ..DEFAULT_ERROR_TABLE
        }
        .validate()
        .is_err());
        let round_trip = serde_json::to_string(&DEFAULT_ERROR_TABLE).unwrap();
        assert!(round_trip.contains("\"1q\""));
    }

    #[test]
    fn reports_match_plan_counts() {
        // Generator: 3 terms, 2 commuting groups.  Observable: 2 terms in
        // a single group.
        let generator =
            PauliSum::parse_terms(2, &[(1.0, "ZZ"), (0.5, "XX"), (0.25, "ZX")]).unwrap();
        let obs = PauliSum::parse_terms(2, &[(0.7, "ZI"), (0.3, "IZ")]).unwrap();
        let pqc = Pqc::new(
            2,
            vec![
                PqcGate::new("mix", generator),
                PqcGate::new("x", PauliSum::parse_terms(2, &[(1.0, "XI")]).unwrap()),
            ],
            Observable::Paulis(obs),
        )
        .unwrap();
        let theta = [0.4, 0.9];
        let (n_h, ncm_h, n_o, ncm_o) = pqc_counts(&pqc, 1).unwrap();
        assert_eq!((n_h, ncm_h, n_o, ncm_o), (3, 2, 2, 1));
        let table = ErrorTable::default();
        for method in [
            GradMethod::Ht,
            GradMethod::Dht,
            GradMethod::Rht,
            GradMethod::Rdht,
        ] {
            let report = cost_report(&pqc, &theta, 1, method, &table).unwrap();
            let plan = build_plan(&pqc, &theta, 1, method).unwrap();
            assert_eq!(
                report.distinct_circuits,
                plan.distinct_circuit_count(),
                "{method}"
            );
            assert!(report.efr > 0.0 && report.efr < 1.0, "{method}");
        }
        // PSR prices its decomposed form: same count and circuits as DHT.
        let psr = cost_report(&pqc, &theta, 1, GradMethod::Psr, &table).unwrap();
        let dht = cost_report(&pqc, &theta, 1, GradMethod::Dht, &table).unwrap();
        assert_eq!(psr.distinct_circuits, 2 * n_h * ncm_o);
        assert_eq!(psr.cnot_count, dht.cnot_count);
        assert!((psr.efr - dht.efr).abs() < 1e-15);
        assert_eq!((psr.qubits, psr.depth), (2, 2));
        // Ancilla methods pay one extra qubit; reversed methods pay depth.
        let ht = cost_report(&pqc, &theta, 1, GradMethod::Ht, &table).unwrap();
        assert_eq!((ht.qubits, ht.depth), (3, 3));
        let rht = cost_report(&pqc, &theta, 1, GradMethod::Rht, &table).unwrap();
        assert_eq!((rht.qubits, rht.depth), (3, 4));
        // The ancilla-free insertion circuit beats the controlled one on
        // EFR for any positive table.
        assert!(dht.efr < ht.efr);
    }

    #[test]
    fn deeper_words_cost_more_cnots() {
        let pqc = Pqc::new(
            3,
            vec![PqcGate::new(
                "g",
                PauliSum::parse_terms(3, &[(1.0, "ZZZ")]).unwrap(),
            )],
            Observable::Paulis(PauliSum::parse_terms(3, &[(1.0, "ZII")]).unwrap()),
        )
        .unwrap();
        let dht = cost_report(&pqc, &[0.2], 1, GradMethod::Dht, &ErrorTable::default()).unwrap();
        // Lowered gate: generator ZZZ (4 CNOTs) + inserted weight-3
        // rotation (4 CNOTs).
        assert_eq!(dht.cnot_count, 8);
    }
}
