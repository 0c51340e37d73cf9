//! How the direct/reversed circuit-count ratio responds to commutation
//! structure.
//!
//! The insertion method scales with the observable's group count, its
//! reversed twin with the generator's.  To map the trade-off, this sweep
//! builds four-term Pauli sums whose commuting fraction is tunable: a
//! fraction `g` of the maximum possible grouping merges the four terms
//! into `G = 4 - floor(3 g)` commuting groups (so `g = 1` is fully
//! commuting, `G = 1`; `g = 0.25` keeps all four terms separate).  Using
//! one swept sum as every gate's generator and another as the
//! observable, the count ratio DHT : RDHT is exactly
//! `G_observable / G_generator` — independent of term count, equal to 1
//! on the diagonal, and monotone along rows and columns.
//!
//! Construction: five mutually anticommuting two-qubit words (`XI`, `YI`,
//! `ZX`, `ZY`, `ZZ`) seed up to five groups; terms in the same group
//! share a family word and differ by diagonal (`I`/`Z`) tails on the
//! remaining qubits, which never disturb the family's commutation
//! pattern.  Four distinct tails require at least two tail qubits, hence
//! `n >= 4`.

use crate::cost::first_order_count;
use crate::error::{Error, Result};
use crate::gradient::GradMethod;
use crate::grouping::{group_count, GroupingCriterion};
use crate::pauli::{PauliLetter, PauliSum, PauliWord};
use serde::Serialize;

/// Terms in every swept sum.
pub const SWEEP_TERMS: usize = 4;

/// The default commuting-fraction grid.
pub const DEFAULT_SWEEP_GRID: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

const FAMILIES: [[PauliLetter; 2]; 5] = [
    [PauliLetter::X, PauliLetter::I],
    [PauliLetter::Y, PauliLetter::I],
    [PauliLetter::Z, PauliLetter::X],
    [PauliLetter::Z, PauliLetter::Y],
    [PauliLetter::Z, PauliLetter::Z],
];

/// Commuting groups hit by fraction `g`: `4 - floor(3 g)`.
fn groups_for_fraction(g: f64) -> Result<usize> {
    if !(g > 0.0 && g <= 1.0) || !g.is_finite() {
        return Err(Error::BadFraction { value: g });
    }
    Ok(SWEEP_TERMS - (g * (SWEEP_TERMS - 1) as f64).floor() as usize)
}

/// A four-term sum on `n` qubits splitting into exactly
/// `groups_for_fraction(g)` commuting groups.
pub fn swept_sum(n: usize, g: f64) -> Result<PauliSum> {
    if n < 4 {
        return Err(Error::SweepTooSmall { n });
    }
    let groups = groups_for_fraction(g)?;
    let mut terms = Vec::with_capacity(SWEEP_TERMS);
    for t in 0..SWEEP_TERMS {
        let family = FAMILIES[t % groups];
        let tail = t / groups;
        let mut word = PauliWord::identity(n)?
            .with_letter(0, family[0])?
            .with_letter(1, family[1])?;
        for b in 0..n - 2 {
            if tail >> b & 1 == 1 {
                word = word.with_letter(2 + b, PauliLetter::Z)?;
            }
        }
        terms.push((1.0, word));
    }
    PauliSum::from_terms(n, terms)
}

/// The sweep output: `ratios[i][j]` is the DHT : RDHT distinct-circuit
/// ratio with generator fraction `grid[i]` and observable fraction
/// `grid[j]`.
#[derive(Clone, Debug, Serialize)]
pub struct RatioSweep {
    pub grid: Vec<f64>,
    /// Commuting groups per grid fraction.
    pub groups: Vec<usize>,
    pub ratios: Vec<Vec<f64>>,
}

/// Sweep the grid on `n`-qubit sums.  Fractions must lie in `(0, 1]`;
/// `n >= 4`.
pub fn ratio_sweep(n: usize, grid: &[f64]) -> Result<RatioSweep> {
    if grid.is_empty() {
        return Err(Error::EmptyIndexList);
    }
    let sums = grid
        .iter()
        .map(|&g| swept_sum(n, g))
        .collect::<Result<Vec<_>>>()?;
    let groups = sums
        .iter()
        .map(|s| group_count(s, GroupingCriterion::FullCommutativity))
        .collect::<Result<Vec<_>>>()?;
    let mut ratios = Vec::with_capacity(grid.len());
    for (generator, &ncm_h) in sums.iter().zip(&groups) {
        let n_h = generator.non_identity_count();
        let mut row = Vec::with_capacity(grid.len());
        for (observable, &ncm_o) in sums.iter().zip(&groups) {
            let n_o = observable.non_identity_count();
            let dht = first_order_count(GradMethod::Dht, n_h, ncm_h, n_o, ncm_o)?;
            let rdht = first_order_count(GradMethod::Rdht, n_h, ncm_h, n_o, ncm_o)?;
            row.push(dht as f64 / rdht as f64);
        }
        ratios.push(row);
    }
    Ok(RatioSweep {
        grid: grid.to_vec(),
        groups,
        ratios,
    })
}
