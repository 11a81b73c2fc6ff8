//! Quantitative measurement error for arbitrary value assignments, the
//! error-minimizing assignment (real weak value), and an independent
//! brute-force optimizer used as an oracle in the test suite.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hilbert::{eigensystem, Ket, Observable};
use crate::measurement::Povm;

/// Outcomes with probability below this are treated as unreachable: their
/// assigned value may be left undefined and their error contribution is 0.
pub const ZERO_PROB_TOL: f64 = 1e-12;

/// A scale attached to measurement outcomes: label -> assigned real value.
/// `None` marks an outcome whose value is deliberately undefined, which is
/// only legal where the outcome probability vanishes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValueAssignment {
    values: BTreeMap<String, Option<f64>>,
}

impl ValueAssignment {
    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, Option<f64>)>,
        S: Into<String>,
    {
        Self { values: pairs.into_iter().map(|(l, v)| (l.into(), v)).collect() }
    }

    pub fn from_values<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        Self::from_pairs(pairs.into_iter().map(|(l, v)| (l, Some(v))))
    }

    pub fn get(&self, label: &str) -> Result<Option<f64>> {
        self.values
            .get(label)
            .copied()
            .ok_or_else(|| Error::MissingAssignment { label: label.to_string() })
    }

    /// The value for `label`, erroring if it is absent or undefined.
    pub fn defined(&self, label: &str) -> Result<f64> {
        match self.get(label)? {
            Some(v) => Ok(v),
            None => Err(Error::UndefinedAssignment { label: label.to_string(), probability: f64::NAN }),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Option<f64>)> {
        self.values.iter().map(|(l, v)| (l.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-outcome row of an [`ErrorReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeError {
    pub label: String,
    pub probability: f64,
    /// The evaluated assignment value; `None` for unreachable outcomes.
    pub assigned: Option<f64>,
    /// eps^2_m for the evaluated assignment.
    pub error_sq: f64,
    /// Error-minimizing value for this outcome.
    pub optimal: Option<f64>,
    /// eps^2_m at the optimum.
    pub min_error_sq: f64,
}

/// Per-outcome and total squared errors, alongside the optimal assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub outcomes: Vec<OutcomeError>,
    pub total_error_sq: f64,
    pub min_total_error_sq: f64,
}

struct OutcomeMoments {
    label: String,
    /// <psi|E_m|psi>
    p: f64,
    /// Re <psi|E_m A|psi>
    c: f64,
    /// <psi|A E_m A|psi>
    q: f64,
}

fn moments(psi: &Ket, povm: &Povm, obs: &Observable) -> Result<Vec<OutcomeMoments>> {
    if psi.dim() != povm.dim() {
        return Err(Error::DimensionMismatch { expected: povm.dim(), got: psi.dim() });
    }
    let a_psi = obs.apply(psi)?;
    let mut out = Vec::with_capacity(povm.elements().len());
    for e in povm.elements() {
        let e_psi = e.matrix() * psi.amps();
        let e_a_psi = e.matrix() * &a_psi;
        out.push(OutcomeMoments {
            label: e.label().to_string(),
            p: psi.amps().dotc(&e_psi).re,
            c: psi.amps().dotc(&e_a_psi).re,
            q: a_psi.dotc(&e_a_psi).re,
        });
    }
    Ok(out)
}

fn clamp_err(x: f64) -> f64 {
    // quadratic forms may dip below 0 by float noise
    if x < 0.0 {
        debug_assert!(x > -1e-10, "error term {x} below tolerance");
        0.0
    } else {
        x
    }
}

/// eps^2_m as a function of the assigned value, from the cached moments:
/// <psi|(v - A) E_m (v - A)|psi> = v^2 p - 2 v c + q.
fn error_at(m: &OutcomeMoments, v: f64) -> f64 {
    clamp_err(v * v * m.p - 2.0 * v * m.c + m.q)
}

fn optimal_for(m: &OutcomeMoments) -> (Option<f64>, f64) {
    if m.p < ZERO_PROB_TOL {
        (None, 0.0)
    } else {
        let v = m.c / m.p;
        (Some(v), clamp_err(m.q - m.p * v * v))
    }
}

/// Evaluate the squared-error report for a caller-supplied assignment.
/// eps^2_m = <psi|(A~_m - A) E_m (A~_m - A)|psi>, totals summed over outcomes.
pub fn ozawa_error(
    psi: &Ket,
    povm: &Povm,
    obs: &Observable,
    assign: &ValueAssignment,
) -> Result<ErrorReport> {
    let ms = moments(psi, povm, obs)?;
    let mut outcomes = Vec::with_capacity(ms.len());
    let mut total = 0.0;
    let mut min_total = 0.0;
    for m in &ms {
        let assigned = assign.get(&m.label)?;
        let error_sq = match assigned {
            Some(v) => error_at(m, v),
            None => {
                if m.p >= ZERO_PROB_TOL {
                    return Err(Error::UndefinedAssignment {
                        label: m.label.clone(),
                        probability: m.p,
                    });
                }
                0.0
            }
        };
        let (optimal, min_error_sq) = optimal_for(m);
        total += error_sq;
        min_total += min_error_sq;
        outcomes.push(OutcomeError {
            label: m.label.clone(),
            probability: m.p.clamp(0.0, 1.0),
            assigned,
            error_sq,
            optimal,
            min_error_sq,
        });
    }
    Ok(ErrorReport { outcomes, total_error_sq: total, min_total_error_sq: min_total })
}

/// Error-minimizing assignment A_opt(m) = Re[<psi|E_m A|psi> / <psi|E_m|psi>]
/// (the real part of the weak value), with the corresponding report.
/// Unreachable outcomes are marked undefined.
pub fn optimal_assignment(
    psi: &Ket,
    povm: &Povm,
    obs: &Observable,
) -> Result<(ValueAssignment, ErrorReport)> {
    let ms = moments(psi, povm, obs)?;
    let mut outcomes = Vec::with_capacity(ms.len());
    let mut pairs = Vec::with_capacity(ms.len());
    let mut min_total = 0.0;
    for m in &ms {
        let (optimal, min_error_sq) = optimal_for(m);
        min_total += min_error_sq;
        pairs.push((m.label.clone(), optimal));
        outcomes.push(OutcomeError {
            label: m.label.clone(),
            probability: m.p.clamp(0.0, 1.0),
            assigned: optimal,
            error_sq: min_error_sq,
            optimal,
            min_error_sq,
        });
    }
    let report =
        ErrorReport { outcomes, total_error_sq: min_total, min_total_error_sq: min_total };
    Ok((ValueAssignment::from_pairs(pairs), report))
}

/// Independent optimizer: per-outcome ternary search of the squared error
/// over [a_min - span, a_max + span], span = a_max - a_min + 1, to interval
/// width 1e-8. The per-outcome functional is an exact quadratic in the
/// assigned value, hence unimodal.
pub fn brute_force_assignment(
    psi: &Ket,
    povm: &Povm,
    obs: &Observable,
) -> Result<ValueAssignment> {
    let ms = moments(psi, povm, obs)?;
    let eig = eigensystem(obs);
    let (a_min, a_max) = (eig.min_eigenvalue(), eig.max_eigenvalue());
    let span = a_max - a_min + 1.0;
    let mut pairs = Vec::with_capacity(ms.len());
    for m in &ms {
        if m.p < ZERO_PROB_TOL {
            pairs.push((m.label.clone(), None));
            continue;
        }
        let mut lo = a_min - span;
        let mut hi = a_max + span;
        // For anomalous outcomes the minimum can sit far outside the spectrum;
        // widen the bracket until the error grows toward both endpoints.
        loop {
            let w = (hi - lo) * 1e-3;
            let grow = hi - lo;
            let mut bracketed = true;
            if error_at(m, lo) <= error_at(m, lo + w) {
                lo -= grow;
                bracketed = false;
            }
            if error_at(m, hi) <= error_at(m, hi - w) {
                hi += grow;
                bracketed = false;
            }
            if bracketed {
                break;
            }
        }
        while hi - lo > 1e-8 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if error_at(m, m1) < error_at(m, m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        pairs.push((m.label.clone(), Some((lo + hi) / 2.0)));
    }
    Ok(ValueAssignment::from_pairs(pairs))
}
