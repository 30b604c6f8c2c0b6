//! Empirical checks of the fairness-transfer bounds.
//!
//! Two results are checked on finite samples:
//!
//! * a model that is `α`-fair with respect to perturbed groups `Ã` is
//!   `α′`-fair with respect to the true groups `A`, with
//!   `α′ = ηB / min_a min{P(Ã=a), P(A=a)} + α` and `η` bounding
//!   `|P(Ã=a | x, y) − P(A=a | x, y)|`;
//! * a noisy vote over teacher outputs `Z = (teacher predictions, Y)` is
//!   `ηB`-fair when `η` bounds the total variation between `Z` and `Z | A=a`.
//!
//! `B` bounds the range of the fairness function and is 1 for every built-in
//! notion.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::fairness::{self, FairnessError, Notion};
use crate::matrix::Matrix;
use crate::model::{self, MlpParams, ModelError};
use crate::privacy::{count_votes, noisy_argmax, PrivacyError};
use crate::rng::seeded;

/// Range bound of the built-in fairness functions.
pub const DEFAULT_B: f64 = 1.0;
/// Slack on `holds` comparisons for sampling error.
pub const TOLERANCE: f64 = 0.02;
/// Upper limit on strata built by quantile binning.
pub const MAX_STRATA: usize = 64;
/// Minimum rows per group for the vote-fairness check.
pub const MIN_GROUP_SAMPLES: usize = 100;

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("empty input")]
    EmptyInput,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("bound denominator must be > 0, got {0}")]
    ZeroDenominator(f64),
    #[error("bound undefined: min group probability {min_prob} does not exceed eta {eta}")]
    Infeasible { min_prob: f64, eta: f64 },
    #[error("group {group} has {count} samples, need at least {needed}")]
    TooFewSamples { group: usize, count: usize, needed: usize },
    #[error("group value {value} outside [0, {m})")]
    GroupOutOfRange { value: usize, m: usize },
    #[error(transparent)]
    Fairness(#[from] FairnessError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Privacy(#[from] PrivacyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Perturbed-group transfer.
    GroupTransfer,
    /// Noisy-vote total-variation bound.
    VoteTransfer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub measured: f64,
    pub bound: f64,
    pub eta: f64,
    pub b: f64,
    pub alpha: f64,
    /// Denominator of the group-transfer bound; absent for the vote bound.
    pub min_prob: Option<f64>,
    pub tolerance: f64,
    pub holds: bool,
}

impl BoundReport {
    fn new(kind: BoundKind, measured: f64, bound: f64, eta: f64, b: f64, alpha: f64, min_prob: Option<f64>) -> Self {
        Self {
            kind,
            measured,
            bound,
            eta,
            b,
            alpha,
            min_prob,
            tolerance: TOLERANCE,
            holds: measured <= bound + TOLERANCE,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report fields are serializable")
    }
}

/// `max_{stratum, a} |freq(Ã=a | stratum) − freq(A=a | stratum)|`.
///
/// Strata are arbitrary ids; only ids that occur are considered, so no
/// stratum is empty.
pub fn estimate_eta_conditional(
    a: &[usize],
    a_tilde: &[usize],
    strata: &[usize],
    m: usize,
) -> Result<f64, TheoryError> {
    if a.len() != a_tilde.len() {
        return Err(TheoryError::LengthMismatch(a.len(), a_tilde.len()));
    }
    if a.len() != strata.len() {
        return Err(TheoryError::LengthMismatch(a.len(), strata.len()));
    }
    if a.is_empty() {
        return Err(TheoryError::EmptyInput);
    }
    // per stratum: (size, signed count difference per group)
    let mut cells: HashMap<usize, (usize, Vec<i64>)> = HashMap::new();
    for ((&g, &gt), &s) in a.iter().zip(a_tilde).zip(strata) {
        for v in [g, gt] {
            if v >= m {
                return Err(TheoryError::GroupOutOfRange { value: v, m });
            }
        }
        let cell = cells.entry(s).or_insert_with(|| (0, vec![0; m]));
        cell.0 += 1;
        cell.1[gt] += 1;
        cell.1[g] -= 1;
    }
    let eta = cells
        .values()
        .flat_map(|(n, diff)| diff.iter().map(move |&d| (d.abs() as f64) / *n as f64))
        .fold(0.0, f64::max);
    Ok(eta)
}

/// `ηB / min_prob_joint + α`.
pub fn bound_alpha_prime(eta: f64, b: f64, min_prob_joint: f64, alpha: f64) -> Result<f64, TheoryError> {
    if !(min_prob_joint > 0.0) {
        return Err(TheoryError::ZeroDenominator(min_prob_joint));
    }
    Ok(eta * b / min_prob_joint + alpha)
}

/// `ηB / (min_prob_a − η) + α`, defined when `min_prob_a > η`.
pub fn bound_alpha_prime_variant(eta: f64, b: f64, min_prob_a: f64, alpha: f64) -> Result<f64, TheoryError> {
    if !(min_prob_a > eta) {
        return Err(TheoryError::Infeasible {
            min_prob: min_prob_a,
            eta,
        });
    }
    Ok(eta * b / (min_prob_a - eta) + alpha)
}

fn group_frequencies(groups: &[usize], m: usize) -> Result<Vec<f64>, TheoryError> {
    let mut counts = vec![0usize; m];
    for &g in groups {
        if g >= m {
            return Err(TheoryError::GroupOutOfRange { value: g, m });
        }
        counts[g] += 1;
    }
    let n = groups.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / n).collect())
}

/// Group-transfer check for a trained model on `data`, whose group column
/// holds the true groups; `a_tilde` holds the perturbed groups of the same
/// rows.
///
/// `α` is the model's measured violation against `Ã`, the measured value is
/// its violation against `A`.
pub fn verify_thm1(
    params: &MlpParams,
    data: &Dataset,
    a_tilde: &[usize],
    strata: &[usize],
    notion: Notion,
    b: f64,
) -> Result<BoundReport, TheoryError> {
    let m = data.group_count();
    let probs = model::forward(params, data.features())?;
    let comps = fairness::fairness_components(&probs, data.labels(), notion)?;
    let measured = fairness::violation_of_components(&comps, data.groups(), m)?;
    let alpha = fairness::violation_of_components(&comps, a_tilde, m)?;
    let eta = estimate_eta_conditional(data.groups(), a_tilde, strata, m)?;
    let p_true = group_frequencies(data.groups(), m)?;
    let p_tilde = group_frequencies(a_tilde, m)?;
    let min_prob = p_true.iter().chain(&p_tilde).copied().fold(f64::INFINITY, f64::min);
    let bound = bound_alpha_prime(eta, b, min_prob, alpha)?;
    Ok(BoundReport::new(
        BoundKind::GroupTransfer,
        measured,
        bound,
        eta,
        b,
        alpha,
        Some(min_prob),
    ))
}

/// Exact total variation between two empirical distributions over discrete
/// cells: half the L1 distance of their frequency vectors.
pub fn estimate_tv<T: Hash + Eq>(z: &[T], z_other: &[T]) -> Result<f64, TheoryError> {
    if z.is_empty() || z_other.is_empty() {
        return Err(TheoryError::EmptyInput);
    }
    let mut freq: HashMap<&T, (f64, f64)> = HashMap::new();
    let (wa, wb) = (1.0 / z.len() as f64, 1.0 / z_other.len() as f64);
    for x in z {
        freq.entry(x).or_default().0 += wa;
    }
    for x in z_other {
        freq.entry(x).or_default().1 += wb;
    }
    let l1: f64 = freq.values().map(|(p, q)| (p - q).abs()).sum();
    Ok((0.5 * l1).min(1.0))
}

/// Vote-transfer check. `teacher_preds[k][i]` is teacher `k`'s predicted
/// label for row `i` of `data`; votes are aggregated by noisy argmax once per
/// seed.
///
/// The measured value is the hard violation of the vote outputs against the
/// true groups, with each row's fairness components averaged over the seeds.
/// The bound is `B · max_a TV(Z, Z | A=a)` with `Z = (teacher predictions, Y)`.
pub fn verify_thm2(
    teacher_preds: &[Vec<usize>],
    data: &Dataset,
    sigma: f64,
    seeds: &[u64],
    notion: Notion,
    b: f64,
) -> Result<BoundReport, TheoryError> {
    if teacher_preds.is_empty() || seeds.is_empty() {
        return Err(TheoryError::EmptyInput);
    }
    let n = data.len();
    if let Some(p) = teacher_preds.iter().find(|p| p.len() != n) {
        return Err(TheoryError::LengthMismatch(p.len(), n));
    }
    let m = data.group_count();
    for (group, &count) in data.group_sizes().iter().enumerate() {
        if count < MIN_GROUP_SAMPLES {
            return Err(TheoryError::TooFewSamples {
                group,
                count,
                needed: MIN_GROUP_SAMPLES,
            });
        }
    }

    let classes = data.label_count();
    let tuples: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut t: Vec<usize> = teacher_preds.iter().map(|p| p[i]).collect();
            t.push(data.labels()[i]);
            t
        })
        .collect();
    let mut eta: f64 = 0.0;
    for a in 0..m {
        let part: Vec<Vec<usize>> = tuples
            .iter()
            .zip(data.groups())
            .filter(|(_, &g)| g == a)
            .map(|(t, _)| t.clone())
            .collect();
        eta = eta.max(estimate_tv(&tuples, &part)?);
    }

    let counts = (0..n)
        .map(|i| count_votes(&tuples[i][..teacher_preds.len()], classes))
        .collect::<Result<Vec<_>, _>>()?;
    let mut mean_comps: Option<Matrix> = None;
    for &seed in seeds {
        let mut rng = seeded(seed);
        let votes: Vec<usize> = counts.iter().map(|c| noisy_argmax(c, sigma, &mut rng)).collect();
        let comps = fairness::components_of_predictions(&votes, data.labels(), notion)?;
        match &mut mean_comps {
            None => mean_comps = Some(comps),
            Some(acc) => {
                for r in 0..n {
                    for (x, y) in acc.row_mut(r).iter_mut().zip(comps.row(r)) {
                        *x += y;
                    }
                }
            }
        }
    }
    let mut mean = mean_comps.expect("seeds are nonempty");
    let scale = 1.0 / seeds.len() as f64;
    for r in 0..n {
        mean.row_mut(r).iter_mut().for_each(|v| *v *= scale);
    }
    let measured = fairness::violation_of_components(&mean, data.groups(), m)?;
    Ok(BoundReport::new(BoundKind::VoteTransfer, measured, eta * b, eta, b, 0.0, None))
}

// ---------------------------------------------------------------------------
// Strata

/// Relabels arbitrary keys to dense ids `0..k` in order of first occurrence.
fn compact<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut ids: BTreeMap<K, usize> = BTreeMap::new();
    let mut next = 0;
    keys.iter()
        .map(|k| {
            *ids.entry(k.clone()).or_insert_with(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

/// Strata from known cluster ids crossed with labels.
pub fn cluster_strata(clusters: &[usize], labels: &[usize]) -> Result<Vec<usize>, TheoryError> {
    if clusters.len() != labels.len() {
        return Err(TheoryError::LengthMismatch(clusters.len(), labels.len()));
    }
    let keys: Vec<(usize, usize)> = clusters.iter().copied().zip(labels.iter().copied()).collect();
    Ok(compact(&keys))
}

/// Strata from a median split of the leading features crossed with labels,
/// using as many features as fit within [`MAX_STRATA`] cells.
pub fn quantile_strata(features: &Matrix, labels: &[usize], classes: usize) -> Result<Vec<usize>, TheoryError> {
    if features.rows() != labels.len() {
        return Err(TheoryError::LengthMismatch(features.rows(), labels.len()));
    }
    let mut bits = 0;
    while bits < features.cols() && (classes.max(1) << (bits + 1)) <= MAX_STRATA {
        bits += 1;
    }
    let medians: Vec<f64> = (0..bits)
        .map(|j| {
            let mut col = features.column(j);
            col.sort_by(f64::total_cmp);
            col[col.len() / 2]
        })
        .collect();
    let keys: Vec<(usize, usize)> = features
        .iter_rows()
        .zip(labels)
        .map(|(row, &y)| {
            let cell = medians
                .iter()
                .enumerate()
                .fold(0usize, |acc, (j, &med)| acc | (usize::from(row[j] >= med) << j));
            (cell, y)
        })
        .collect();
    Ok(compact(&keys))
}

/// Cluster strata when the dataset carries cluster ids, quantile strata
/// otherwise.
pub fn strata_for(data: &Dataset) -> Result<Vec<usize>, TheoryError> {
    match data.clusters() {
        Some(c) => cluster_strata(c, data.labels()),
        None => quantile_strata(data.features(), data.labels(), data.label_count()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_of_identity_is_zero() {
        let a = [0, 1, 1, 0, 2];
        assert_eq!(estimate_eta_conditional(&a, &a, &[0, 0, 1, 1, 1], 3).unwrap(), 0.0);
    }

    #[test]
    fn eta_hand_computed() {
        // stratum 0: A = [0, 0], Ã = [0, 1] -> |1/2 - 1| = 0.5 for a = 0
        // stratum 1: A = [1, 1, 1, 1], Ã = [1, 1, 1, 0] -> 0.25
        let a = [0, 0, 1, 1, 1, 1];
        let at = [0, 1, 1, 1, 1, 0];
        let eta = estimate_eta_conditional(&a, &at, &[0, 0, 1, 1, 1, 1], 2).unwrap();
        assert!((eta - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eta_errors() {
        assert!(matches!(estimate_eta_conditional(&[], &[], &[], 2), Err(TheoryError::EmptyInput)));
        assert!(estimate_eta_conditional(&[0], &[0, 1], &[0], 2).is_err());
        assert!(estimate_eta_conditional(&[0], &[3], &[0], 2).is_err());
    }

    #[test]
    fn bound_values() {
        assert_eq!(bound_alpha_prime(0.0, 1.0, 0.3, 0.07).unwrap(), 0.07);
        assert!((bound_alpha_prime(0.1, 1.0, 0.4, 0.05).unwrap() - 0.30).abs() < 1e-12);
        assert_eq!(bound_alpha_prime(0.3, 0.0, 0.3, 0.1).unwrap(), 0.1);
        assert!(bound_alpha_prime(0.1, 1.0, 0.0, 0.0).is_err());
        assert!((bound_alpha_prime_variant(0.1, 1.0, 0.5, 0.05).unwrap() - 0.30).abs() < 1e-12);
        assert_eq!(bound_alpha_prime_variant(0.0, 1.0, 0.5, 0.2).unwrap(), 0.2);
        assert!(matches!(
            bound_alpha_prime_variant(0.5, 1.0, 0.5, 0.0),
            Err(TheoryError::Infeasible { .. })
        ));
    }

    #[test]
    fn tv_examples() {
        assert_eq!(estimate_tv(&[1, 2, 2, 3], &[2, 3, 1, 2]).unwrap(), 0.0);
        assert_eq!(estimate_tv(&[0, 0], &[1, 2]).unwrap(), 1.0);
        let tv = estimate_tv(&[0, 1], &[0, 0, 0, 1]).unwrap();
        assert!((tv - 0.25).abs() < 1e-15);
        assert!(matches!(estimate_tv::<u8>(&[], &[1]), Err(TheoryError::EmptyInput)));
    }

    #[test]
    fn cluster_strata_are_dense() {
        let s = cluster_strata(&[5, 5, 9, 9], &[0, 1, 0, 0]).unwrap();
        assert_eq!(s, vec![0, 1, 2, 2]);
    }

    #[test]
    fn quantile_strata_respect_cap() {
        let rows: Vec<Vec<f64>> = (0..200).map(|i| (0..10).map(|j| ((i * (j + 3)) % 17) as f64).collect()).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<usize> = (0..200).map(|i| i % 2).collect();
        let s = quantile_strata(&x, &y, 2).unwrap();
        let distinct: std::collections::HashSet<_> = s.iter().collect();
        assert!(distinct.len() <= MAX_STRATA);
        assert!(distinct.len() > 2);
    }

    #[test]
    fn report_holds_flag() {
        let r = BoundReport::new(BoundKind::GroupTransfer, 0.31, 0.3, 0.1, 1.0, 0.05, Some(0.4));
        assert!(r.holds);
        let r = BoundReport::new(BoundKind::GroupTransfer, 0.33, 0.3, 0.1, 1.0, 0.05, Some(0.4));
        assert!(!r.holds);
        let line = r.to_json_line();
        assert!(line.contains("\"kind\":\"group_transfer\""));
        assert!(!line.contains('\n'));
    }
}
