//! Joint quasiprobability tables over (eigenvalue of A, outcome m) and
//! negativity detection.
//!
//! The table entries are the real (symmetrized Kirkwood-Dirac) values
//! q(a, m) = Re <psi|E_m P_a|psi>, with P_a the spectral projector of the
//! degeneracy cluster a. Marginals recover the outcome probabilities and the
//! eigenvalue distribution; entries may be negative, which is exactly what
//! blocks a classical joint-distribution reading of the optimal values.

use crate::error::{Error, Result};
use crate::error_analysis::{ValueAssignment, ZERO_PROB_TOL};
use crate::hilbert::{eigensystem, C64, Ket, Observable};
use crate::measurement::Povm;

/// Entries above this (in the negative direction) still count as classical.
pub const CLASSICAL_TOL: f64 = 1e-10;

/// One eigenvalue row: cluster value and its projector rank.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenRow {
    pub value: f64,
    pub rank: usize,
}

/// Real joint quasiprobability table; `entries[r][c]` pairs row `r` (eigenvalue
/// cluster) with column `c` (outcome label). The full complex table is kept
/// alongside for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct JointQuasiprobTable {
    pub rows: Vec<EigenRow>,
    pub cols: Vec<String>,
    pub entries: Vec<Vec<f64>>,
    pub complex_entries: Vec<Vec<C64>>,
}

impl JointQuasiprobTable {
    /// Column marginal Sum_a q(a, m) = P(m).
    pub fn column_marginal(&self, c: usize) -> f64 {
        self.entries.iter().map(|row| row[c]).sum()
    }

    /// Row marginal Sum_m q(a, m) = <psi|P_a|psi>.
    pub fn row_marginal(&self, r: usize) -> f64 {
        self.entries[r].iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().flatten().sum()
    }
}

/// Build the joint quasiprobability table for (psi, povm, obs). Degenerate
/// eigenvalues are merged into clusters so the rows are gauge-invariant.
pub fn joint_quasiprob(psi: &Ket, povm: &Povm, obs: &Observable) -> Result<JointQuasiprobTable> {
    if psi.dim() != povm.dim() {
        return Err(Error::DimensionMismatch { expected: povm.dim(), got: psi.dim() });
    }
    if obs.dim() != povm.dim() {
        return Err(Error::DimensionMismatch { expected: povm.dim(), got: obs.dim() });
    }
    let eig = eigensystem(obs);
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut complex_entries = Vec::new();
    for cluster in eig.clusters() {
        let proj_psi = eig.projector(cluster) * psi.amps();
        let mut row = Vec::with_capacity(povm.elements().len());
        let mut crow = Vec::with_capacity(povm.elements().len());
        for e in povm.elements() {
            let q: C64 = psi.amps().dotc(&(e.matrix() * &proj_psi));
            crow.push(q);
            row.push(q.re);
        }
        rows.push(EigenRow { value: cluster.value, rank: cluster.indices.len() });
        entries.push(row);
        complex_entries.push(crow);
    }
    Ok(JointQuasiprobTable { rows, cols: povm.labels(), entries, complex_entries })
}

/// Negativity summary of a table.
#[derive(Debug, Clone, PartialEq)]
pub struct Negativity {
    pub min_entry: f64,
    /// Sum of max(0, -q) over all entries.
    pub negative_mass: f64,
    /// True iff min_entry >= -1e-10.
    pub classical_representable: bool,
}

pub fn negativity(table: &JointQuasiprobTable) -> Negativity {
    let min_entry = table.entries.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let negative_mass: f64 = table.entries.iter().flatten().map(|&q| (-q).max(0.0)).sum();
    Negativity { min_entry, negative_mass, classical_representable: min_entry >= -CLASSICAL_TOL }
}

/// Conditional-mean estimate A_opt(m) = Sum_a a q(a, m) / P(m) from the table;
/// equals the closed-form optimal assignment. Outcomes with P(m) < 1e-12 are
/// marked undefined.
pub fn estimate_from_quasiprob(table: &JointQuasiprobTable) -> ValueAssignment {
    let mut pairs = Vec::with_capacity(table.cols.len());
    for (c, label) in table.cols.iter().enumerate() {
        let p = table.column_marginal(c);
        if p < ZERO_PROB_TOL {
            pairs.push((label.clone(), None));
        } else {
            let mean: f64 = table
                .rows
                .iter()
                .zip(&table.entries)
                .map(|(row, entry)| row.value * entry[c])
                .sum();
            pairs.push((label.clone(), Some(mean / p)));
        }
    }
    ValueAssignment::from_pairs(pairs)
}
