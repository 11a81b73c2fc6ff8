//! Reproducible Monte Carlo sampling of measurement outcomes.
//!
//! Generator contract (part of the external interface): trial `i` draws the
//! 64-bit word at position `2 i` of the ChaCha8 stream keyed by the seed,
//! maps it to `u in [0, 1)` by dividing by 2^64, and picks the first outcome
//! whose cumulative probability (in POVM element order) exceeds `u`. Because
//! every trial addresses the stream by counter, the counts are bit-identical
//! across platforms and independent of how trials are chunked.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::hilbert::Ket;
use crate::measurement::{outcome_probabilities, Povm};

/// Per-label tally with its 3-sigma binomial check.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeCount {
    pub label: String,
    pub probability: f64,
    pub count: u64,
    pub frequency: f64,
    /// |frequency - p| <= 3 sqrt(p (1 - p) / n)
    pub within_3_sigma: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    pub n: u64,
    pub seed: u64,
    pub counts: Vec<OutcomeCount>,
}

fn draw(rng: &mut ChaCha8Rng, trial: u64, cumulative: &[f64]) -> usize {
    rng.set_word_pos(trial as u128 * 2);
    let u = rng.next_u64() as f64 / 2f64.powi(64);
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

fn tally(povm: &Povm, psi: &Ket, trials: std::ops::Range<u64>, seed: u64) -> Result<Vec<u64>> {
    let probs = outcome_probabilities(povm, psi)?;
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for (_, p) in &probs {
        acc += p;
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    for i in trials {
        counts[draw(&mut rng, i, &cumulative)] += 1;
    }
    Ok(counts)
}

/// Draw `n` i.i.d. outcomes from the Born distribution of (povm, psi).
pub fn sample_outcomes(povm: &Povm, psi: &Ket, n: u64, seed: u64) -> Result<SampleReport> {
    assert!(n >= 1, "n must be positive");
    let counts = tally(povm, psi, 0..n, seed)?;
    build_report(povm, psi, n, seed, counts)
}

/// Same draws as [`sample_outcomes`], split over `n_chunks` disjoint trial
/// ranges. Counter addressing makes the result identical to a single pass.
pub fn sample_outcomes_chunked(
    povm: &Povm,
    psi: &Ket,
    n: u64,
    seed: u64,
    n_chunks: u64,
) -> Result<SampleReport> {
    assert!(n >= 1 && n_chunks >= 1);
    let chunk = n.div_ceil(n_chunks);
    let mut total = vec![0u64; povm.elements().len()];
    let mut start = 0;
    while start < n {
        let end = (start + chunk).min(n);
        for (t, c) in total.iter_mut().zip(tally(povm, psi, start..end, seed)?) {
            *t += c;
        }
        start = end;
    }
    build_report(povm, psi, n, seed, total)
}

fn build_report(
    povm: &Povm,
    psi: &Ket,
    n: u64,
    seed: u64,
    counts: Vec<u64>,
) -> Result<SampleReport> {
    let probs = outcome_probabilities(povm, psi)?;
    let rows = probs
        .into_iter()
        .zip(counts)
        .map(|((label, p), count)| {
            let frequency = count as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            OutcomeCount {
                label,
                probability: p,
                count,
                frequency,
                within_3_sigma: (frequency - p).abs() <= 3.0 * sigma,
            }
        })
        .collect();
    Ok(SampleReport { n, seed, counts: rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Ket;
    use crate::measurement::{basis_to_povm, x_basis, z_basis};

    fn theta_state() -> Ket {
        let t = std::f64::consts::PI / 8.0;
        Ket::from_reals(&[t.cos(), t.sin()]).unwrap()
    }

    #[test]
    fn degenerate_distribution() {
        let povm = basis_to_povm(&z_basis(2));
        let r = sample_outcomes(&povm, &Ket::basis_state(2, 0), 1000, 7).unwrap();
        assert_eq!(r.counts[0].count, 1000);
        assert_eq!(r.counts[1].count, 0);
    }

    #[test]
    fn frequencies_near_exact_probability() {
        let povm = basis_to_povm(&x_basis());
        let r = sample_outcomes(&povm, &theta_state(), 100_000, 42).unwrap();
        let p: f64 = 0.8535533905932737;
        let bound = 3.0 * (p * (1.0 - p) / 1e5).sqrt();
        assert!((r.counts[0].frequency - p).abs() < bound);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let povm = basis_to_povm(&x_basis());
        let a = sample_outcomes(&povm, &theta_state(), 10_000, 123).unwrap();
        let b = sample_outcomes(&povm, &theta_state(), 10_000, 123).unwrap();
        assert_eq!(a, b);
        let c = sample_outcomes(&povm, &theta_state(), 10_000, 124).unwrap();
        assert_ne!(a.counts[0].count, c.counts[0].count);
    }

    #[test]
    fn chunking_does_not_change_counts() {
        let povm = basis_to_povm(&x_basis());
        let whole = sample_outcomes(&povm, &theta_state(), 10_001, 9).unwrap();
        for chunks in [2, 3, 7] {
            let split = sample_outcomes_chunked(&povm, &theta_state(), 10_001, 9, chunks).unwrap();
            assert_eq!(whole, split);
        }
    }

    #[test]
    fn counts_sum_to_n() {
        let povm = basis_to_povm(&x_basis());
        let r = sample_outcomes(&povm, &theta_state(), 999, 5).unwrap();
        assert_eq!(r.counts.iter().map(|c| c.count).sum::<u64>(), 999);
    }
}
