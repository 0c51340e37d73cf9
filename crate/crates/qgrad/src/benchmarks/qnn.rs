//! A small quantum classifier on four qubits.
//!
//! Features enter as Y-rotation angles, one per qubit.  Three
//! parameterized gates follow, chosen to exercise very different
//! gradient-method trade-offs:
//!
//! 1. the entangler `XXXX` — one Pauli word, two-level, shiftable;
//! 2. a random diagonal coupling: all sixteen `{I, Z}`-words with
//!    seeded uniform coefficients — many terms (one commuting group),
//!    generic spectrum, not directly shiftable;
//! 3. a uniform transverse cluster: all sixteen `{I, X}`-words — many
//!    terms, but the sum factors as `(I + X)^(x)4`, so its spectrum is
//!    `{0, 16}` and the shift rule applies directly.
//!
//! The readout is the ring correlator `sum_i Z_i Z_{i+1}`; labels are
//! `-1`/`+1` and training minimizes the mean squared error.  The data is
//! the two linearly separable species of the classic iris table,
//! min-max scaled to `[0, pi]`.

use crate::circuit::{Circuit, GateOp, Observable, Pqc, PqcGate};
use crate::error::{Error, Result};
use crate::pauli::{PauliLetter, PauliSum, PauliWord};
use crate::rng::SplitMix64;

pub const QNN_QUBITS: usize = 4;

/// Seed for the diagonal coupling's coefficients.
pub const QNN_COEFF_SEED: u64 = 42;

fn mask_word(mask: usize, letter: PauliLetter) -> Result<PauliWord> {
    let mut word = PauliWord::identity(QNN_QUBITS)?;
    for q in 0..QNN_QUBITS {
        if mask >> q & 1 == 1 {
            word = word.with_letter(q, letter)?;
        }
    }
    Ok(word)
}

/// The three ansatz gates (see the module docs).
pub fn qnn_gates() -> Result<Vec<PqcGate>> {
    let entangler = PauliSum::single(1.0, "XXXX".parse()?)?;
    let mut rng = SplitMix64::new(QNN_COEFF_SEED);
    let diagonal = PauliSum::from_terms(
        QNN_QUBITS,
        (0..1 << QNN_QUBITS)
            .map(|mask| Ok((rng.next_in(-1.0, 1.0), mask_word(mask, PauliLetter::Z)?)))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let cluster = PauliSum::from_terms(
        QNN_QUBITS,
        (0..1 << QNN_QUBITS)
            .map(|mask| Ok((1.0, mask_word(mask, PauliLetter::X)?)))
            .collect::<Result<Vec<_>>>()?,
    )?;
    Ok(vec![
        PqcGate::new("entangler", entangler),
        PqcGate::new("diagonal", diagonal),
        PqcGate::new("cluster", cluster),
    ])
}

/// Ring correlator `Z0 Z1 + Z1 Z2 + Z2 Z3 + Z3 Z0`.
pub fn qnn_observable() -> Result<PauliSum> {
    let terms = (0..QNN_QUBITS)
        .map(|i| {
            let j = (i + 1) % QNN_QUBITS;
            Ok((
                1.0,
                PauliWord::single(QNN_QUBITS, i, PauliLetter::Z)?.with_letter(j, PauliLetter::Z)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    PauliSum::from_terms(QNN_QUBITS, terms)
}

/// The classifier PQC for one feature vector: `RY(x_i)` per qubit, then
/// the three ansatz gates.
pub fn qnn_pqc(features: &[f64; QNN_QUBITS]) -> Result<Pqc> {
    let prep_ops = features
        .iter()
        .enumerate()
        .map(|(q, &x)| {
            Ok(GateOp::PauliRotation {
                word: PauliWord::single(QNN_QUBITS, q, PauliLetter::Y)?,
                angle: x,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Pqc::new(
        QNN_QUBITS,
        qnn_gates()?,
        Observable::Paulis(qnn_observable()?),
    )?
    .with_input_prep(Circuit::new(QNN_QUBITS, prep_ops)?)
}

/// One labeled flower: scaled features and a `-1`/`+1` label.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IrisSample {
    pub features: [f64; QNN_QUBITS],
    pub label: f64,
}

fn class_label(species: &str) -> Result<Option<f64>> {
    let name = species.trim().trim_start_matches("Iris-");
    match name {
        "setosa" => Ok(Some(-1.0)),
        "versicolor" => Ok(Some(1.0)),
        "virginica" => Ok(None),
        other => Err(Error::UnknownClass {
            class: other.to_string(),
        }),
    }
}

/// Parse the iris CSV (`sepal_length,sepal_width,petal_length,
/// petal_width,species`), keep the two separable species (setosa `-1`,
/// versicolor `+1`), and min-max scale each feature to `[0, pi]` over
/// the kept rows.
pub fn parse_iris(text: &str) -> Result<Vec<IrisSample>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // 1-based, after the header
        let record = record?;
        if record.len() != QNN_QUBITS + 1 {
            return Err(Error::DataFormat {
                row,
                msg: format!("expected 5 fields, got {}", record.len()),
            });
        }
        let mut features = [0.0; QNN_QUBITS];
        for (k, feature) in features.iter_mut().enumerate() {
            *feature = record[k].trim().parse().map_err(|_| Error::DataFormat {
                row,
                msg: format!("bad number {:?}", &record[k]),
            })?;
        }
        if let Some(label) = class_label(&record[QNN_QUBITS])? {
            samples.push(IrisSample { features, label });
        }
    }
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for k in 0..QNN_QUBITS {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for s in &samples {
            lo = lo.min(s.features[k]);
            hi = hi.max(s.features[k]);
        }
        let span = hi - lo;
        for s in &mut samples {
            s.features[k] = if span > 1e-12 {
                std::f64::consts::PI * (s.features[k] - lo) / span
            } else {
                0.0
            };
        }
    }
    Ok(samples)
}

/// Read an iris CSV file (see [`parse_iris`]).
pub fn load_iris(path: impl AsRef<std::path::Path>) -> Result<Vec<IrisSample>> {
    parse_iris(&std::fs::read_to_string(path)?)
}

/// The bundled copy of the iris table.
pub fn embedded_iris() -> Result<Vec<IrisSample>> {
    parse_iris(include_str!("../../data/iris.csv"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::pqc_counts;
    use crate::gradient::psr_shift;

    #[test]
    fn gate_structure_and_spectra() {
        let gates = qnn_gates().unwrap();
        assert_eq!(gates.len(), 3);
        // Entangler: one word.  Diagonal and cluster: 15 non-identity
        // terms each, all in one commuting group.
        assert_eq!(gates[0].generator().non_identity_count(), 1);
        assert_eq!(gates[1].generator().non_identity_count(), 15);
        assert_eq!(gates[2].generator().non_identity_count(), 15);
        assert!(psr_shift(gates[0].generator()).is_ok());
        assert!(psr_shift(gates[1].generator()).is_err());
        // (I + X)^(x)4 has spectrum {0, 16}: directly shiftable with a
        // tiny shift.
        let (shift, c) = psr_shift(gates[2].generator()).unwrap();
        assert!((c - 4.0).abs() < 1e-9);
        assert!((shift - std::f64::consts::PI / 16.0).abs() < 1e-9);
    }

    #[test]
    fn classifier_counts() {
        let pqc = qnn_pqc(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(pqc_counts(&pqc, 1).unwrap(), (1, 1, 4, 1));
        assert_eq!(pqc_counts(&pqc, 2).unwrap(), (15, 1, 4, 1));
        assert_eq!(pqc_counts(&pqc, 3).unwrap(), (15, 1, 4, 1));
    }

    #[test]
    fn coefficients_are_reproducible() {
        let a = qnn_gates().unwrap();
        let b = qnn_gates().unwrap();
        assert_eq!(
            a[1].generator().terms().len(),
            b[1].generator().terms().len()
        );
        for ((ca, wa), (cb, wb)) in a[1]
            .generator()
            .terms()
            .iter()
            .zip(b[1].generator().terms())
        {
            assert_eq!(ca, cb);
            assert_eq!(wa, wb);
            assert!(ca.abs() <= 1.0);
        }
    }

    #[test]
    fn iris_loads_scaled_and_balanced() {
        let samples = embedded_iris().unwrap();
        assert_eq!(samples.len(), 100);
        let negatives = samples.iter().filter(|s| s.label < 0.0).count();
        assert_eq!(negatives, 50);
        for s in &samples {
            for &x in &s.features {
                assert!((0.0..=std::f64::consts::PI).contains(&x));
            }
        }
        // Scaling hits both endpoints for every feature.
        for k in 0..QNN_QUBITS {
            let lo = samples
                .iter()
                .map(|s| s.features[k])
                .fold(f64::INFINITY, f64::min);
            let hi = samples
                .iter()
                .map(|s| s.features[k])
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(lo.abs() < 1e-12);
            assert!((hi - std::f64::consts::PI).abs() < 1e-12);
        }
    }

    #[test]
    fn iris_parser_rejects_garbage() {
        assert!(matches!(
            parse_iris("a,b,c,d,e\n1,2,3,x,setosa\n"),
            Err(Error::DataFormat { row: 2, .. })
        ));
        assert!(matches!(
            parse_iris("a,b,c,d,e\n1,2,3,4,daffodil\n"),
            Err(Error::UnknownClass { .. })
        ));
        assert!(matches!(
            parse_iris("a,b,c,d,e\n1,2,3,4,virginica\n"),
            Err(Error::EmptyDataset)
        ));
    }
}
