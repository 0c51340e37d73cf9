//! Quantum automatic differentiation: pick the cheapest gradient method
//! *per parameter* instead of using one method for the whole circuit.
//!
//! For each gate the selector prices every hardware method — the shift
//! rule, both Hadamard-test variants, and both reversed variants — under a
//! metric (distinct circuits or mean EFR) and keeps the argmin.  Gates
//! whose generator has more than two eigenvalues cannot be shifted
//! directly; there the PSR candidate is priced on its decomposed form
//! (one shifted pair per generator term, realized as insertion circuits)
//! and flagged [`MethodCandidate::via_decomposition`].
//!
//! Ties break toward the earlier row in the order PSR, HT, DHT, RHT,
//! RDHT.

use crate::circuit::Pqc;
use crate::cost::{efr, first_order_count, pqc_counts, ErrorTable};
use crate::error::{Error, Result};
use crate::gradient::{build_plan, psr_shift, GradMethod, GradPlan};
use serde::Serialize;

/// What the selector minimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Distinct measurement circuits per gradient component.
    #[serde(rename = "count")]
    CircuitCount,
    /// Mean probability that a circuit run contains at least one faulty
    /// gate, under an [`ErrorTable`].
    Efr,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::CircuitCount => "count",
            Metric::Efr => "efr",
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "count" | "circuits" | "circuit_count" => Ok(Metric::CircuitCount),
            "efr" => Ok(Metric::Efr),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

/// Methods that can estimate `d f / d theta_param` as stated, without
/// decomposition: the Hadamard-test family always qualifies, direct
/// shifting only for two-level generator spectra.
pub fn feasible_methods(pqc: &Pqc, param: usize) -> Result<Vec<GradMethod>> {
    pqc.check_param(param)?;
    let mut methods = Vec::with_capacity(5);
    if psr_shift(pqc.gates()[param - 1].generator()).is_ok() {
        methods.push(GradMethod::Psr);
    }
    methods.extend([
        GradMethod::Ht,
        GradMethod::Dht,
        GradMethod::Rht,
        GradMethod::Rdht,
    ]);
    Ok(methods)
}

/// One priced method for one parameter.
#[derive(Clone, Debug, Serialize)]
pub struct MethodCandidate {
    pub method: GradMethod,
    pub distinct_circuits: usize,
    /// Mean EFR over the method's circuits.
    pub efr: f64,
    /// True when this is PSR priced on its decomposed form.
    pub via_decomposition: bool,
}

/// The selector's verdict for one parameter, with the full price list it
/// chose from.
#[derive(Clone, Debug, Serialize)]
pub struct ParamChoice {
    pub param: usize,
    pub chosen: GradMethod,
    pub via_decomposition: bool,
    pub candidates: Vec<MethodCandidate>,
}

/// A per-parameter method assignment.
#[derive(Clone, Debug, Serialize)]
pub struct MethodAssignment {
    pub metric: Metric,
    pub choices: Vec<ParamChoice>,
}

impl MethodAssignment {
    /// Distinct circuits for one full gradient under this assignment.
    pub fn total_distinct_circuits(&self) -> usize {
        self.choices
            .iter()
            .map(|c| {
                c.candidates
                    .iter()
                    .find(|cand| {
                        cand.method == c.chosen && cand.via_decomposition == c.via_decomposition
                    })
                    .map(|cand| cand.distinct_circuits)
                    .unwrap_or(0)
            })
            .sum()
    }

    /// The chosen method per parameter, in parameter order.
    pub fn methods(&self) -> Vec<GradMethod> {
        self.choices.iter().map(|c| c.chosen).collect()
    }
}

fn mean_plan_efr(plan: &GradPlan, table: &ErrorTable) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for task in plan.tasks() {
        total += efr(&task.circuit, table)?;
        count += 1;
    }
    Ok(if count == 0 {
        0.0
    } else {
        total / count as f64
    })
}

fn candidate(
    pqc: &Pqc,
    theta: &[f64],
    param: usize,
    method: GradMethod,
    table: &ErrorTable,
) -> Result<MethodCandidate> {
    if method == GradMethod::Psr {
        let generator = pqc.gates()[param - 1].generator();
        if psr_shift(generator).is_ok() {
            let plan = build_plan(pqc, theta, param, GradMethod::Psr)?;
            return Ok(MethodCandidate {
                method,
                distinct_circuits: plan.distinct_circuit_count(),
                efr: mean_plan_efr(&plan, table)?,
                via_decomposition: false,
            });
        }
        // Shift each generator term separately; the resulting circuit
        // pairs are the insertion circuits.
        let (n_h, ncm_h, n_o, ncm_o) = pqc_counts(pqc, param)?;
        let plan = build_plan(pqc, theta, param, GradMethod::Dht)?;
        return Ok(MethodCandidate {
            method,
            distinct_circuits: first_order_count(GradMethod::Psr, n_h, ncm_h, n_o, ncm_o)?,
            efr: mean_plan_efr(&plan, table)?,
            via_decomposition: true,
        });
    }
    let plan = build_plan(pqc, theta, param, method)?;
    Ok(MethodCandidate {
        method,
        distinct_circuits: plan.distinct_circuit_count(),
        efr: mean_plan_efr(&plan, table)?,
        via_decomposition: false,
    })
}

/// Price every hardware method for every parameter at `theta` and keep
/// the per-parameter argmin under `metric`.
pub fn select(
    pqc: &Pqc,
    theta: &[f64],
    metric: Metric,
    table: &ErrorTable,
) -> Result<MethodAssignment> {
    pqc.check_theta(theta)?;
    table.validate()?;
    let mut choices = Vec::with_capacity(pqc.param_count());
    for param in 1..=pqc.param_count() {
        let candidates: Vec<MethodCandidate> = GradMethod::HARDWARE
            .iter()
            .map(|&m| candidate(pqc, theta, param, m, table))
            .collect::<Result<_>>()?;
        // First strict minimum wins: HARDWARE order is the tie-break order.
        let mut best = 0;
        for i in 1..candidates.len() {
            let better = match metric {
                Metric::CircuitCount => {
                    candidates[i].distinct_circuits < candidates[best].distinct_circuits
                }
                Metric::Efr => candidates[i].efr < candidates[best].efr,
            };
            if better {
                best = i;
            }
        }
        choices.push(ParamChoice {
            param,
            chosen: candidates[best].method,
            via_decomposition: candidates[best].via_decomposition,
            candidates,
        });
    }
    Ok(MethodAssignment { metric, choices })
}

/// A gradient evaluator wired to a fixed per-parameter method assignment.
pub struct QadGradient<'a> {
    pqc: &'a Pqc,
    assignment: MethodAssignment,
}

impl<'a> QadGradient<'a> {
    /// The gradient at `theta`, each component via its assigned method.
    pub fn evaluate(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.pqc.check_theta(theta)?;
        let mut grad = Vec::with_capacity(self.assignment.choices.len());
        for choice in &self.assignment.choices {
            // Decomposed shifting evaluates through the numerically
            // identical insertion circuits.
            let method = if choice.via_decomposition {
                GradMethod::Dht
            } else {
                choice.chosen
            };
            grad.push(build_plan(self.pqc, theta, choice.param, method)?.evaluate()?);
        }
        Ok(grad)
    }

    /// Distinct circuits per gradient evaluation.
    pub fn circuits_per_iteration(&self) -> usize {
        self.assignment.total_distinct_circuits()
    }

    pub fn assignment(&self) -> &MethodAssignment {
        &self.assignment
    }
}

/// Bind an assignment to its circuit as a reusable gradient evaluator.
pub fn build_gradient<'a>(pqc: &'a Pqc, assignment: MethodAssignment) -> QadGradient<'a> {
    QadGradient { pqc, assignment }
}
