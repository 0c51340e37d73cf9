//! Construction, costing, simulation, and selection of gradient-estimation
//! circuits for parameterised quantum circuits (PQCs).
//!
//! A PQC is a chain of gates `exp(-i theta_j/2 * H_j)` with Hermitian
//! Pauli-sum generators `H_j`, measured against an observable `O`; the
//! library answers three questions about its cost function
//! `f(theta) = <0|C(theta)^dagger O C(theta)|0>`:
//!
//! * **How do you estimate `df/dtheta_j` on hardware?**  Five first-order
//!   constructions are provided — the parameter-shift rule and four
//!   ancilla- or rotation-based tests — plus finite differences as a
//!   numerical reference, and two constructions for arbitrary `k`-th
//!   derivatives.  Every construction yields explicit circuits and
//!   measured operators, and all of them are simulated exactly.
//! * **What does each estimate cost?**  Distinct-circuit counts, qubit and
//!   depth shapes, a CNOT-lowering rule, and an error-fidelity estimate
//!   from per-gate error rates.
//! * **Which method should each parameter use?**  A per-parameter selector
//!   picks the cheapest feasible method under a chosen metric.
//!
//! Three model problems (combinatorial optimisation, circuit compilation,
//! and a small classifier) exercise the whole stack end to end.

pub mod benchmarks;
pub mod circuit;
pub mod cost;
pub mod dense;
pub mod error;
pub mod gradient;
pub mod grouping;
pub mod higher;
pub mod pauli;
pub mod qad;
pub mod rng;

pub use circuit::{sample_expectation, Circuit, GateOp, Observable, Pqc, PqcGate, StateVector};
pub use cost::{
    cost_report, efr, efr_of_gates, first_order_count, first_order_shape, lower,
    lower_and_count_cnots, pqc_counts, CostReport, ErrorTable, LoweredGate, DEFAULT_ERROR_TABLE,
};
pub use error::{Error, Result};
pub use gradient::{
    build_plan, exact_gradient, fd_gradient, flexible_ht, psr_shift, GradMethod, GradPlan,
    GradTask, TaskObservable,
};
pub use grouping::{group_count, measure_groups, partition, GroupingCriterion, Partition};
pub use higher::{
    dht_korder, fd_korder, kfold_ht, korder_qubits_depth, nested_commutator_oracle,
    DerivativeIndex, KOrderMethod, KOrderPlan,
};
pub use pauli::{PauliLetter, PauliSum, PauliWord, Phase};
pub use qad::{
    build_gradient, feasible_methods, select, MethodAssignment, MethodCandidate, Metric,
    ParamChoice, QadGradient,
};
