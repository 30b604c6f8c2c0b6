//! Private release of group attributes and labels: vote counting, the
//! Gaussian noisy-argmax mechanism, Rényi-DP accounting, noise calibration and
//! randomized response.
//!
//! Each noisy-argmax query over a vote-count vector of L2 sensitivity √2
//! satisfies `(γ, γ/σ²)`-RDP for every `γ ≥ 1`. `s` queries compose to
//! `(γ, sγ/σ²)`-RDP, which converts to `(sγ/σ² + ln(1/δ)/(γ−1), δ)`-DP; the
//! accountant reports the minimum over real `γ > 1`.

use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::Rng;

#[derive(Debug, Error)]
pub enum PrivacyError {
    #[error("prediction {value} outside the domain [0, {domain})")]
    OutOfRange { value: usize, domain: usize },
    #[error("vote counts must not be empty")]
    EmptyCounts,
    #[error("sigma must be finite and >= 0, got {0}")]
    InvalidSigma(f64),
    #[error("delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("RDP order must be >= 1, got {0}")]
    InvalidOrder(f64),
    #[error("epsilon must be > 0, got {0}")]
    InvalidEpsilon(f64),
    #[error("randomized response needs at least 2 categories, got {0}")]
    TooFewCategories(usize),
    #[error("cannot calibrate noise for zero queries")]
    NoQueries,
    #[error("sensitivity probe: {0}")]
    Probe(String),
}

/// Per-candidate vote counts of a teacher ensemble at one query point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteCounts {
    counts: Vec<usize>,
}

impl VoteCounts {
    pub fn from_counts(counts: Vec<usize>) -> Result<Self, PrivacyError> {
        if counts.is_empty() {
            return Err(PrivacyError::EmptyCounts);
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn domain(&self) -> usize {
        self.counts.len()
    }

    /// Number of voters.
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Plain argmax, ties to the lowest index.
    pub fn plurality(&self) -> usize {
        let mut best = 0;
        for (j, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = j;
            }
        }
        best
    }

    pub fn l2_distance(&self, other: &VoteCounts) -> f64 {
        self.counts
            .iter()
            .zip(&other.counts)
            .map(|(&a, &b)| {
                let d = a as f64 - b as f64;
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

pub fn count_votes(predictions: &[usize], domain: usize) -> Result<VoteCounts, PrivacyError> {
    if domain == 0 {
        return Err(PrivacyError::EmptyCounts);
    }
    let mut counts = vec![0usize; domain];
    for &p in predictions {
        if p >= domain {
            return Err(PrivacyError::OutOfRange { value: p, domain });
        }
        counts[p] += 1;
    }
    Ok(VoteCounts { counts })
}

/// Index of the largest count after adding independent `N(0, σ²)` noise to
/// each. At `σ = 0` this is [`VoteCounts::plurality`].
pub fn noisy_argmax<R: rand::Rng + ?Sized>(counts: &VoteCounts, sigma: f64, rng: &mut R) -> usize {
    if sigma == 0.0 {
        return counts.plurality();
    }
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (j, &c) in counts.counts.iter().enumerate() {
        let z: f64 = rng.sample(StandardNormal);
        let v = c as f64 + sigma * z;
        if v > best_value {
            best = j;
            best_value = v;
        }
    }
    best
}

/// Largest L2 change of any query point's vote counts over every single-row
/// change of the group column.
///
/// `shard_of[i]` names the teacher that trained on row `i`; flipping row `i`
/// only retrains that teacher. `predict(k, groups)` returns teacher `k`'s
/// predictions at every query point after training on its shard with the
/// given group column, each in `[0, domain)`.
pub fn sensitivity_probe<F, E>(
    groups: &[usize],
    m: usize,
    shard_of: &[usize],
    teachers: usize,
    domain: usize,
    mut predict: F,
) -> Result<f64, PrivacyError>
where
    F: FnMut(usize, &[usize]) -> Result<Vec<usize>, E>,
    E: std::fmt::Display,
{
    if groups.len() != shard_of.len() {
        return Err(PrivacyError::Probe(format!(
            "{} groups but {} shard assignments",
            groups.len(),
            shard_of.len()
        )));
    }
    let run = |predict: &mut F, k: usize, g: &[usize]| -> Result<Vec<usize>, PrivacyError> {
        let out = predict(k, g).map_err(|e| PrivacyError::Probe(e.to_string()))?;
        match out.iter().find(|&&p| p >= domain) {
            Some(&value) => Err(PrivacyError::OutOfRange { value, domain }),
            None => Ok(out),
        }
    };

    let mut base = Vec::with_capacity(teachers);
    for k in 0..teachers {
        base.push(run(&mut predict, k, groups)?);
    }
    let queries = base.first().map_or(0, Vec::len);
    if base.iter().any(|p| p.len() != queries) {
        return Err(PrivacyError::Probe("teachers disagree on the number of query points".into()));
    }
    let base_counts: Vec<VoteCounts> = (0..queries)
        .map(|q| count_votes(&base.iter().map(|p| p[q]).collect::<Vec<_>>(), domain))
        .collect::<Result<_, _>>()?;

    let mut flipped = groups.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..groups.len() {
        let k = shard_of[i];
        if k >= teachers {
            return Err(PrivacyError::Probe(format!("row {i} assigned to missing teacher {k}")));
        }
        for a in (0..m).filter(|&a| a != groups[i]) {
            flipped[i] = a;
            let preds = run(&mut predict, k, &flipped)?;
            if preds.len() != queries {
                return Err(PrivacyError::Probe("query count changed after a flip".into()));
            }
            for (q, before) in base_counts.iter().enumerate() {
                let mut after = before.counts.clone();
                after[base[k][q]] -= 1;
                after[preds[q]] += 1;
                worst = worst.max(before.l2_distance(&VoteCounts { counts: after }));
            }
        }
        flipped[i] = groups[i];
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Accounting

/// RDP of a single Gaussian noisy-argmax query at order `gamma`.
pub fn rdp_epsilon(sigma: f64, gamma: f64) -> Result<f64, PrivacyError> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(PrivacyError::InvalidSigma(sigma));
    }
    if !(gamma >= 1.0) {
        return Err(PrivacyError::InvalidOrder(gamma));
    }
    Ok(gamma / (sigma * sigma))
}

/// RDP of `s` composed queries at order `gamma`.
pub fn compose(sigma: f64, s: usize, gamma: f64) -> f64 {
    s as f64 * gamma / (sigma * sigma)
}

/// `(ε, δ)`-DP objective as a function of the RDP order.
pub fn dp_objective(sigma: f64, s: usize, delta: f64, gamma: f64) -> f64 {
    compose(sigma, s, gamma) + (1.0 / delta).ln() / (gamma - 1.0)
}

/// Immutable privacy ledger of `queries` Gaussian noisy-argmax releases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdpAccount {
    sigma: f64,
    queries: usize,
    delta: f64,
}

/// Result of converting an [`RdpAccount`] to `(ε, δ)`-DP. `gamma_star` is
/// `None` when no order is optimal (no queries, or no noise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpGuarantee {
    pub epsilon: f64,
    pub gamma_star: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccountReport {
    pub sigma: f64,
    pub s: usize,
    pub delta: f64,
    pub gamma_star: Option<f64>,
    /// `None` stands for an unbounded loss (no noise).
    pub epsilon: Option<f64>,
}

impl RdpAccount {
    /// `sigma = 0` is accepted as a non-private debug setting whose reported
    /// epsilon is infinite.
    pub fn new(sigma: f64, queries: usize, delta: f64) -> Result<Self, PrivacyError> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(PrivacyError::InvalidSigma(sigma));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(PrivacyError::InvalidDelta(delta));
        }
        Ok(Self { sigma, queries, delta })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// A new account with `n` more queries charged.
    pub fn charge(&self, n: usize) -> Self {
        Self {
            queries: self.queries + n,
            ..*self
        }
    }

    pub fn to_dp(&self) -> DpGuarantee {
        to_dp(self)
    }

    pub fn report(&self) -> AccountReport {
        let g = self.to_dp();
        AccountReport {
            sigma: self.sigma,
            s: self.queries,
            delta: self.delta,
            gamma_star: g.gamma_star,
            epsilon: g.epsilon.is_finite().then_some(g.epsilon),
        }
    }
}

/// Minimizes `sγ/σ² + ln(1/δ)/(γ−1)` over `γ > 1`; the optimum is
/// `γ* = 1 + σ √(ln(1/δ)/s)`.
pub fn to_dp(account: &RdpAccount) -> DpGuarantee {
    let RdpAccount { sigma, queries, delta } = *account;
    if queries == 0 {
        return DpGuarantee {
            epsilon: 0.0,
            gamma_star: None,
        };
    }
    if sigma == 0.0 {
        return DpGuarantee {
            epsilon: f64::INFINITY,
            gamma_star: None,
        };
    }
    let log_inv_delta = (1.0 / delta).ln();
    let gamma = 1.0 + sigma * (log_inv_delta / queries as f64).sqrt();
    DpGuarantee {
        epsilon: dp_objective(sigma, queries, delta, gamma),
        gamma_star: Some(gamma),
    }
}

/// Smallest `σ` (to within 1e-6) whose `s`-query guarantee is at most
/// `target_epsilon`.
pub fn calibrate_sigma(s: usize, delta: f64, target_epsilon: f64) -> Result<f64, PrivacyError> {
    if !(target_epsilon > 0.0 && target_epsilon.is_finite()) {
        return Err(PrivacyError::InvalidEpsilon(target_epsilon));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(PrivacyError::InvalidDelta(delta));
    }
    if s == 0 {
        return Err(PrivacyError::NoQueries);
    }
    let eps_at = |sigma: f64| to_dp(&RdpAccount { sigma, queries: s, delta }).epsilon;
    let mut hi = 1.0;
    while eps_at(hi) > target_epsilon {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if eps_at(mid) > target_epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Answers noisy-argmax queries over a fixed set of vote counts, releasing
/// each answer at most once. Repeated reads return the cached answer and
/// cost nothing.
#[derive(Debug)]
pub struct VoteOracle {
    counts: Vec<VoteCounts>,
    answers: Vec<Option<usize>>,
    sigma: f64,
    rng: Rng,
    queries: usize,
}

impl VoteOracle {
    pub fn new(counts: Vec<VoteCounts>, sigma: f64, rng: Rng) -> Result<Self, PrivacyError> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(PrivacyError::InvalidSigma(sigma));
        }
        let answers = vec![None; counts.len()];
        Ok(Self {
            counts,
            answers,
            sigma,
            rng,
            queries: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn answer(&mut self, i: usize) -> usize {
        if let Some(a) = self.answers[i] {
            return a;
        }
        let a = noisy_argmax(&self.counts[i], self.sigma, &mut self.rng);
        self.answers[i] = Some(a);
        self.queries += 1;
        a
    }

    /// Answers for every query point, in order.
    pub fn answer_all(&mut self) -> Vec<usize> {
        (0..self.len()).map(|i| self.answer(i)).collect()
    }

    /// Distinct query points released so far.
    pub fn queries(&self) -> usize {
        self.queries
    }

    pub fn account(&self, delta: f64) -> Result<RdpAccount, PrivacyError> {
        RdpAccount::new(self.sigma, self.queries, delta)
    }
}

// ---------------------------------------------------------------------------
// Randomized response

/// Probability that randomized response reports the true category.
pub fn rr_keep_probability(epsilon: f64, m: usize) -> f64 {
    if epsilon.is_infinite() {
        return 1.0;
    }
    let e = epsilon.exp();
    e / (e + (m as f64 - 1.0))
}

/// Probability that randomized response reports a different category.
pub fn rr_eta(epsilon: f64, m: usize) -> f64 {
    if epsilon.is_infinite() {
        return 0.0;
    }
    let k = m as f64 - 1.0;
    k / (epsilon.exp() + k)
}

/// `matrix[a][b] = P(report b | true a)`.
pub fn rr_transition_matrix(epsilon: f64, m: usize) -> Vec<Vec<f64>> {
    let keep = rr_keep_probability(epsilon, m);
    let other = if m > 1 { (1.0 - keep) / (m as f64 - 1.0) } else { 0.0 };
    (0..m)
        .map(|a| (0..m).map(|b| if a == b { keep } else { other }).collect())
        .collect()
}

/// Keeps `a` with probability `e^ε/(e^ε+m−1)`, otherwise reports one of the
/// other `m − 1` categories uniformly.
pub fn randomized_response<R: rand::Rng + ?Sized>(
    a: usize,
    epsilon: f64,
    m: usize,
    rng: &mut R,
) -> Result<usize, PrivacyError> {
    if m < 2 {
        return Err(PrivacyError::TooFewCategories(m));
    }
    if a >= m {
        return Err(PrivacyError::OutOfRange { value: a, domain: m });
    }
    if !(epsilon >= 0.0) {
        return Err(PrivacyError::InvalidEpsilon(epsilon));
    }
    if rng.random::<f64>() < rr_keep_probability(epsilon, m) {
        return Ok(a);
    }
    let b = rng.random_range(0..m - 1);
    Ok(if b >= a { b + 1 } else { b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn counting() {
        assert_eq!(count_votes(&[0, 1, 1, 0, 1], 2).unwrap().counts(), &[2, 3]);
        assert_eq!(count_votes(&[2], 3).unwrap().counts(), &[0, 0, 1]);
        assert_eq!(count_votes(&[1; 7], 3).unwrap().counts(), &[0, 7, 0]);
        assert!(matches!(
            count_votes(&[0, 2], 2),
            Err(PrivacyError::OutOfRange { value: 2, domain: 2 })
        ));
    }

    #[test]
    fn noiseless_argmax() {
        let mut rng = seeded(0);
        let c = VoteCounts::from_counts(vec![5, 3, 2]).unwrap();
        assert_eq!(noisy_argmax(&c, 0.0, &mut rng), 0);
        let c = VoteCounts::from_counts(vec![4, 4]).unwrap();
        assert_eq!(noisy_argmax(&c, 0.0, &mut rng), 0);
        let c = VoteCounts::from_counts(vec![1, 4, 4]).unwrap();
        assert_eq!(noisy_argmax(&c, 0.0, &mut rng), 1);
    }

    #[test]
    fn large_margin_survives_noise() {
        let mut rng = seeded(1);
        let c = VoteCounts::from_counts(vec![300, 0]).unwrap();
        let hits = (0..100_000).filter(|_| noisy_argmax(&c, 10.0, &mut rng) == 0).count();
        assert!(hits as f64 / 1e5 >= 0.999);
    }

    #[test]
    fn rdp_values() {
        assert_eq!(rdp_epsilon(1.0, 2.0).unwrap(), 2.0);
        assert!((rdp_epsilon(10.0, 5.0).unwrap() - 0.05).abs() < 1e-15);
        assert_eq!(rdp_epsilon(4.0, 1.0).unwrap(), 1.0 / 16.0);
        assert!(rdp_epsilon(1.0, 0.5).is_err());
        assert!(rdp_epsilon(0.0, 2.0).is_err());
    }

    #[test]
    fn composition() {
        assert_eq!(compose(3.0, 0, 7.0), 0.0);
        assert!((compose(100.0, 200, 22.0) - 0.44).abs() < 1e-12);
        assert!((compose(2.0, 2, 3.0) - 2.0 * compose(2.0, 1, 3.0)).abs() < 1e-15);
    }

    #[test]
    fn reference_account() {
        let g = RdpAccount::new(100.0, 200, 1e-4).unwrap().to_dp();
        assert!((g.epsilon - 0.8784).abs() < 1e-3, "{}", g.epsilon);
        assert!((g.gamma_star.unwrap() - 22.46).abs() < 0.01);
    }

    #[test]
    fn degenerate_accounts() {
        let g = RdpAccount::new(10.0, 0, 1e-5).unwrap().to_dp();
        assert_eq!(g.epsilon, 0.0);
        assert!(g.gamma_star.is_none());
        let g = RdpAccount::new(0.0, 10, 1e-5).unwrap().to_dp();
        assert!(g.epsilon.is_infinite());
        let r = RdpAccount::new(0.0, 10, 1e-5).unwrap().report();
        assert_eq!(r.epsilon, None);
        assert!(RdpAccount::new(1.0, 1, 1.0).is_err());
        assert!(RdpAccount::new(-1.0, 1, 0.5).is_err());
    }

    #[test]
    fn charging_is_pure() {
        let a = RdpAccount::new(50.0, 10, 1e-4).unwrap();
        let b = a.charge(10);
        assert_eq!(a.queries(), 10);
        assert_eq!(b.queries(), 20);
        assert!(b.to_dp().epsilon > a.to_dp().epsilon);
    }

    #[test]
    fn report_json_fields() {
        let r = RdpAccount::new(100.0, 200, 1e-4).unwrap().report();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["sigma", "s", "delta", "gamma_star", "epsilon"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn calibration_inverts_reference() {
        let sigma = calibrate_sigma(200, 1e-4, 0.8784).unwrap();
        assert!((sigma - 100.0).abs() < 0.5, "{sigma}");
        let eps = RdpAccount::new(sigma, 200, 1e-4).unwrap().to_dp().epsilon;
        assert!(eps <= 0.8784 && 0.8784 - eps < 1e-4);
        assert!(calibrate_sigma(200, 1e-4, 2.0).unwrap() < sigma);
        assert!(calibrate_sigma(0, 1e-4, 1.0).is_err());
        assert!(calibrate_sigma(10, 1e-4, 0.0).is_err());
    }

    #[test]
    fn oracle_caches_answers() {
        let counts = vec![VoteCounts::from_counts(vec![3, 2]).unwrap(); 5];
        let mut oracle = VoteOracle::new(counts, 1.0, seeded(3)).unwrap();
        let first = oracle.answer_all();
        for _ in 0..10 {
            assert_eq!(oracle.answer_all(), first);
        }
        assert_eq!(oracle.queries(), 5);
        assert_eq!(oracle.account(1e-4).unwrap().queries(), 5);
    }

    #[test]
    fn rr_formulas() {
        assert_eq!(rr_eta(0.0, 2), 0.5);
        assert!((rr_eta(3f64.ln(), 3) - 0.4).abs() < 1e-15);
        assert_eq!(rr_eta(f64::INFINITY, 4), 0.0);
        assert!((rr_keep_probability(3f64.ln(), 2) - 0.75).abs() < 1e-15);
        for row in rr_transition_matrix(0.7, 4) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rr_limits_and_errors() {
        let mut rng = seeded(5);
        for a in 0..3 {
            assert_eq!(randomized_response(a, f64::INFINITY, 3, &mut rng).unwrap(), a);
        }
        assert!(randomized_response(0, 1.0, 1, &mut rng).is_err());
        assert!(randomized_response(2, 1.0, 2, &mut rng).is_err());
        assert!(randomized_response(0, -1.0, 2, &mut rng).is_err());
    }

    #[test]
    fn probe_single_teacher_flip() {
        // teacher 0 predicts the majority group of its shard, teacher 1 is fixed
        let groups = [0, 0, 1, 1, 1];
        let shard_of = [0, 0, 0, 1, 1];
        let d = sensitivity_probe(&groups, 2, &shard_of, 2, 2, |k, g: &[usize]| {
            if k == 1 {
                return Ok::<_, String>(vec![0]);
            }
            let ones = g[..3].iter().filter(|&&a| a == 1).count();
            Ok(vec![usize::from(ones >= 2)])
        })
        .unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn probe_constant_teachers() {
        let d = sensitivity_probe(&[0, 1, 0], 2, &[0, 1, 2], 3, 2, |_, _: &[usize]| Ok::<_, String>(vec![1, 0])).unwrap();
        assert_eq!(d, 0.0);
    }
}
