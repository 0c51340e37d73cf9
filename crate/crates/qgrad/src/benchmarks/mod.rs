//! Benchmark problems exercising the gradient machinery end to end:
//! MaxCut optimization, variational circuit compilation, and a small
//! iris classifier, plus a commutation-structure sweep of the
//! direct/reversed count ratio.

pub mod qaoa;
pub mod qaqc;
pub mod qnn;
pub mod sweep;
pub mod train;

pub use qaoa::{cut_generator, maxcut_pqc, mixer_generator, parse_graph, read_graph, Graph};
pub use qaqc::{
    ansatz_generators, hst_cost, hst_cost_dense, hst_pqc, ising_target, qft3, toffoli, wstate,
    Topology,
};
pub use qnn::{
    embedded_iris, load_iris, parse_iris, qnn_gates, qnn_observable, qnn_pqc, IrisSample,
};
pub use sweep::{ratio_sweep, swept_sum, RatioSweep, DEFAULT_SWEEP_GRID};
pub use train::{
    init_theta, selection_budget, train_qaoa, train_qaqc, train_qnn, Selection, TrainConfig,
    TrainRecord, TrainResult,
};
