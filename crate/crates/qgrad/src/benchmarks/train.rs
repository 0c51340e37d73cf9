//! Plain gradient-descent training loops for the three benchmarks, with
//! per-iteration circuit accounting.
//!
//! Gradients are evaluated with the exact adjoint sweep — every hardware
//! method agrees with it to near machine precision, so the training
//! trajectory is method-independent; what the method *selection* changes
//! is the circuit budget, which is what the records track.  Counts are
//! quoted per gradient evaluation; for the classifier that means per
//! training sample.

use crate::benchmarks::qaoa::{maxcut_pqc, Graph};
use crate::benchmarks::qaqc::{hst_cost, hst_pqc, Topology};
use crate::benchmarks::qnn::{qnn_pqc, IrisSample};
use crate::circuit::{Circuit, Pqc};
use crate::cost::{first_order_count, pqc_counts, ErrorTable};
use crate::error::Result;
use crate::gradient::{exact_gradient, GradMethod};
use crate::qad::{select, MethodAssignment, Metric};
use crate::rng::SplitMix64;
use serde::Serialize;

/// How each parameter's gradient method is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selection {
    /// One method for every parameter, counted on its decomposed form.
    Fixed(GradMethod),
    /// Per-parameter argmin under the metric.
    Qad(Metric),
}

impl std::fmt::Display for Selection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Selection::Fixed(m) => write!(f, "{m}"),
            Selection::Qad(metric) => write!(f, "qad-{metric}"),
        }
    }
}

impl std::str::FromStr for Selection {
    type Err = crate::error::Error;

    /// A method name (`psr`, `ht`, ...) picks that method for every
    /// parameter; `qad-<metric>` (or `qad:<metric>`) selects per
    /// parameter under the metric, and bare `qad` means `qad-count`.
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("qad") {
            return Ok(Selection::Qad(Metric::CircuitCount));
        }
        if let Some(metric) = s.strip_prefix("qad-").or_else(|| s.strip_prefix("qad:")) {
            return Ok(Selection::Qad(metric.parse()?));
        }
        Ok(Selection::Fixed(s.parse()?))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TrainConfig {
    pub selection: Selection,
    pub steps: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

/// One row of a training trace.  `distinct_circuits` is the per-gradient
/// circuit budget of the selection (constant along the run).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TrainRecord {
    pub iteration: usize,
    pub loss: f64,
    pub distinct_circuits: usize,
}

#[derive(Clone, Debug)]
pub struct TrainResult {
    /// Loss before training (iteration 0) and after each step.
    pub records: Vec<TrainRecord>,
    pub theta: Vec<f64>,
    pub circuits_per_iteration: usize,
    /// Present when the selection was QAD.
    pub assignment: Option<MethodAssignment>,
}

impl TrainResult {
    pub fn final_loss(&self) -> f64 {
        self.records.last().map(|r| r.loss).unwrap_or(f64::NAN)
    }
}

/// Uniform start in `(-0.1, 0.1)`, deterministic in the seed.
pub fn init_theta(params: usize, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::substream(seed, 0);
    (0..params).map(|_| rng.next_in(-0.1, 0.1)).collect()
}

/// Per-gradient distinct-circuit budget of a selection on `pqc`, plus
/// the QAD assignment when one was made.
pub fn selection_budget(
    pqc: &Pqc,
    theta: &[f64],
    selection: Selection,
    table: &ErrorTable,
) -> Result<(usize, Option<MethodAssignment>)> {
    match selection {
        Selection::Fixed(method) => {
            let mut total = 0;
            for param in 1..=pqc.param_count() {
                let (n_h, ncm_h, n_o, ncm_o) = pqc_counts(pqc, param)?;
                total += first_order_count(method, n_h, ncm_h, n_o, ncm_o)?;
            }
            Ok((total, None))
        }
        Selection::Qad(metric) => {
            let assignment = select(pqc, theta, metric, table)?;
            Ok((assignment.total_distinct_circuits(), Some(assignment)))
        }
    }
}

/// Descends `loss = sign * f(theta) + offset` on a single PQC.
fn descend(pqc: &Pqc, config: &TrainConfig, sign: f64, offset: f64) -> Result<TrainResult> {
    let mut theta = init_theta(pqc.param_count(), config.seed);
    let table = ErrorTable::default();
    let (budget, assignment) = selection_budget(pqc, &theta, config.selection, &table)?;
    let loss_at = |t: &[f64]| -> Result<f64> { Ok(sign * pqc.eval(t)? + offset) };
    let mut records = Vec::with_capacity(config.steps + 1);
    records.push(TrainRecord {
        iteration: 0,
        loss: loss_at(&theta)?,
        distinct_circuits: budget,
    });
    for iteration in 1..=config.steps {
        let (_, grad) = exact_gradient(pqc, &theta)?;
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= config.learning_rate * sign * g;
        }
        records.push(TrainRecord {
            iteration,
            loss: loss_at(&theta)?,
            distinct_circuits: budget,
        });
    }
    Ok(TrainResult {
        records,
        theta,
        circuits_per_iteration: budget,
        assignment,
    })
}

/// Minimize the cut expectation `f = sum <Z_u Z_v>` on the MaxCut PQC.
pub fn train_qaoa(graph: &Graph, layers: usize, config: &TrainConfig) -> Result<TrainResult> {
    descend(&maxcut_pqc(graph, layers)?, config, 1.0, 0.0)
}

/// Minimize the compilation cost `1 - f` of the overlap test.
pub fn train_qaqc(
    target: &Circuit,
    layers: usize,
    topology: Topology,
    config: &TrainConfig,
) -> Result<TrainResult> {
    let pqc = hst_pqc(target, layers, topology)?;
    let result = descend(&pqc, config, -1.0, 1.0)?;
    debug_assert!((hst_cost(&pqc, &result.theta)? - result.final_loss()).abs() < 1e-12);
    Ok(result)
}

/// Minimize the mean squared error of the classifier over `samples`.
/// The circuit budget is per sample.
pub fn train_qnn(samples: &[IrisSample], config: &TrainConfig) -> Result<TrainResult> {
    let pqcs = samples
        .iter()
        .map(|s| qnn_pqc(&s.features))
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<f64> = samples.iter().map(|s| s.label).collect();
    let params = pqcs.first().map(|p| p.param_count()).unwrap_or(0);
    let mut theta = init_theta(params, config.seed);
    let table = ErrorTable::default();
    let (budget, assignment) = selection_budget(&pqcs[0], &theta, config.selection, &table)?;
    let m = pqcs.len() as f64;
    let mse = |t: &[f64]| -> Result<f64> {
        let mut total = 0.0;
        for (pqc, y) in pqcs.iter().zip(&labels) {
            let f = pqc.eval(t)?;
            total += (f - y) * (f - y);
        }
        Ok(total / m)
    };
    let mut records = Vec::with_capacity(config.steps + 1);
    records.push(TrainRecord {
        iteration: 0,
        loss: mse(&theta)?,
        distinct_circuits: budget,
    });
    for iteration in 1..=config.steps {
        let mut grad = vec![0.0; params];
        for (pqc, y) in pqcs.iter().zip(&labels) {
            let (f, g) = exact_gradient(pqc, &theta)?;
            let residual = 2.0 * (f - y) / m;
            for (total, gj) in grad.iter_mut().zip(&g) {
                *total += residual * gj;
            }
        }
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= config.learning_rate * g;
        }
        records.push(TrainRecord {
            iteration,
            loss: mse(&theta)?,
            distinct_circuits: budget,
        });
    }
    Ok(TrainResult {
        records,
        theta,
        circuits_per_iteration: budget,
        assignment,
    })
}
