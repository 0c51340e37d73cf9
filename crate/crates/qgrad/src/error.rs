//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when building or evaluating circuits.
#[derive(Debug, Error)]
pub enum Error {
    #[error("pauli operators act on {left} and {right} qubits; they must match")]
    LengthMismatch { left: usize, right: usize },

    #[error("qubit index {qubit} out of range for {qubits} qubit(s)")]
    QubitOutOfRange { qubit: usize, qubits: usize },

    #[error("cannot parse pauli word {0:?}: expected a string of I, X, Y, Z")]
    WordParse(String),

    #[error("{context} supports at most {cap} qubits, got {qubits}")]
    TooManyQubits {
        qubits: usize,
        cap: usize,
        context: &'static str,
    },

    #[error("expected a square 2^n x 2^n matrix, got {rows} x {cols}")]
    MatrixShape { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (residue {residue:.3e})")]
    NonHermitian { residue: f64 },

    #[error("parameter vector has length {got}, circuit has {expected} gate(s)")]
    ThetaLength { expected: usize, got: usize },

    #[error("parameter index {param} out of range 1..={count}")]
    ParamOutOfRange { param: usize, count: usize },

    #[error("index {index} out of range 1..={count}")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("generator has {distinct} distinct eigenvalues; the shift rule needs exactly 2")]
    NotPsrCompatible { distinct: usize },

    #[error("controlled word must be identity on its control qubit {qubit}")]
    ControlOverlap { qubit: usize },

    #[error("derivative order must be at least 1")]
    EmptyIndexList,

    #[error("sampling requires a qubit-wise measurable grouping")]
    NotQubitWise,

    #[error("shot count must be positive")]
    ZeroShots,

    #[error("error rate {value} outside [0, 1]")]
    ProbabilityRange { value: f64 },

    #[error("count argument {name} must be at least 1")]
    NonPositiveCount { name: &'static str },

    #[error("unknown method {0:?}")]
    UnknownMethod(String),

    #[error("graph line {line}: cannot parse {content:?} as `u v` integer pair")]
    GraphFormat { line: usize, content: String },

    #[error("data row {row}: {msg}")]
    DataFormat { row: usize, msg: String },

    #[error("class {class:?} matches no rows in the data file")]
    UnknownClass { class: String },

    #[error("dataset is empty after filtering")]
    EmptyDataset,

    #[error("commuting fraction {value} outside [0, 1]")]
    BadFraction { value: f64 },

    #[error("the ratio sweep needs at least 4 qubits, got {n}")]
    SweepTooSmall { n: usize },

    #[error("{0}")]
    Unsupported(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
