//! End-to-end pipelines: the fair-student and fair-teachers ensembles, the
//! randomized-response baseline and the non-private references.
//!
//! Every pipeline is deterministic given `PipelineConfig::seed`; stage seeds
//! are derived from it with [`derive_seed`] and the tags in
//! [`crate::rng::stream`].

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{self, DataError, Dataset, StudentPool};
use crate::fairness::{self, FairnessError, FairnessSpec, Notion};
use crate::matrix::Matrix;
use crate::model::{self, MlpParams, ModelError, TrainConfig};
use crate::privacy::{
    self, calibrate_sigma, count_votes, randomized_response, AccountReport, PrivacyError, RdpAccount, VoteCounts,
    VoteOracle,
};
use crate::rng::{derive_seed, seeded, stream};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid pipeline config: {0}")]
    InvalidConfig(String),
    #[error("student pool overlaps the teachers' training data")]
    PoolOverlap,
    #[error("teacher {shard}: {source}")]
    Teacher { shard: usize, source: FairnessError },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fairness(#[from] FairnessError),
    #[error(transparent)]
    Privacy(#[from] PrivacyError),
}

/// What the teachers predict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpace {
    Groups,
    Labels,
}

#[derive(Debug, Clone)]
pub struct TeacherEnsemble {
    teachers: Vec<MlpParams>,
    target_space: TargetSpace,
    fairness: Option<FairnessSpec>,
    /// Row ids of each teacher's shard.
    shard_ids: Vec<Vec<usize>>,
}

impl TeacherEnsemble {
    pub fn len(&self) -> usize {
        self.teachers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.teachers.is_empty()
    }

    pub fn teachers(&self) -> &[MlpParams] {
        &self.teachers
    }

    pub fn target_space(&self) -> TargetSpace {
        self.target_space
    }

    pub fn fairness(&self) -> Option<&FairnessSpec> {
        self.fairness.as_ref()
    }

    pub fn shard_ids(&self) -> &[Vec<usize>] {
        &self.shard_ids
    }

    /// Size of the vote domain.
    pub fn domain(&self) -> usize {
        self.teachers[0].architecture().outputs
    }

    /// `out[k][i]` is teacher `k`'s prediction for row `i` of `x`.
    pub fn predictions(&self, x: &Matrix) -> Result<Vec<Vec<usize>>, PipelineError> {
        self.teachers
            .par_iter()
            .map(|t| model::predict(t, x).map_err(PipelineError::from))
            .collect()
    }

    /// Vote counts at every row of `x`.
    pub fn vote_counts(&self, x: &Matrix) -> Result<Vec<VoteCounts>, PipelineError> {
        let preds = self.predictions(x)?;
        let domain = self.domain();
        (0..x.rows())
            .map(|i| {
                let votes: Vec<usize> = preds.iter().map(|p| p[i]).collect();
                count_votes(&votes, domain).map_err(PipelineError::from)
            })
            .collect()
    }
}

fn teacher_config(config: &TrainConfig, seed: u64, k: usize, rows: usize) -> TrainConfig {
    config
        .with_seed(derive_seed(seed, stream::TEACHER_BASE + k as u64))
        .fitted_to(rows)
}

fn check_shards(shards: &[Dataset]) -> Result<(), PipelineError> {
    if shards.is_empty() {
        return Err(PipelineError::InvalidConfig("need at least one teacher".into()));
    }
    if let Some(k) = shards.iter().position(Dataset::is_empty) {
        return Err(PipelineError::InvalidConfig(format!("shard {k} is empty")));
    }
    Ok(())
}

/// Plain classifiers `X -> A`, one per shard, trained in parallel. Teacher
/// `k` is seeded with `derive_seed(seed, TEACHER_BASE + k)`.
pub fn train_teachers_groups(
    shards: &[Dataset],
    config: &TrainConfig,
    seed: u64,
) -> Result<TeacherEnsemble, PipelineError> {
    check_shards(shards)?;
    let teachers = shards
        .par_iter()
        .enumerate()
        .map(|(k, shard)| {
            let cfg = teacher_config(config, seed, k, shard.len());
            model::train_erm(&shard.groups_as_labels(), &cfg).map_err(PipelineError::from)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TeacherEnsemble {
        teachers,
        target_space: TargetSpace::Groups,
        fairness: None,
        shard_ids: shards.iter().map(|s| s.row_ids().to_vec()).collect(),
    })
}

/// Fairness-constrained classifiers `X -> Y`, one per shard, trained in
/// parallel. Every shard must contain every group.
pub fn train_teachers_fair(
    shards: &[Dataset],
    spec: &FairnessSpec,
    config: &TrainConfig,
    seed: u64,
) -> Result<TeacherEnsemble, PipelineError> {
    check_shards(shards)?;
    let teachers = shards
        .par_iter()
        .enumerate()
        .map(|(k, shard)| {
            let cfg = teacher_config(config, seed, k, shard.len());
            fairness::train_fair(shard, spec, &cfg, None, 0.0)
                .map_err(|source| PipelineError::Teacher { shard: k, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TeacherEnsemble {
        teachers,
        target_space: TargetSpace::Labels,
        fairness: Some(spec.clone()),
        shard_ids: shards.iter().map(|s| s.row_ids().to_vec()).collect(),
    })
}

// ---------------------------------------------------------------------------
// Configuration and reports

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SfS,
    SfT,
    BaselineM,
    NonprivateFair,
    NonprivateErm,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::SfS,
        Method::SfT,
        Method::BaselineM,
        Method::NonprivateFair,
        Method::NonprivateErm,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::SfS => "sf_s",
            Method::SfT => "sf_t",
            Method::BaselineM => "baseline_m",
            Method::NonprivateFair => "nonprivate_fair",
            Method::NonprivateErm => "nonprivate_erm",
        }
    }

    /// Whether the method spends privacy budget.
    pub fn is_private(&self) -> bool {
        matches!(self, Method::SfS | Method::SfT | Method::BaselineM)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| PipelineError::InvalidConfig(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Number of teachers.
    pub teachers: usize,
    /// Student pool size, which is also the number of charged queries.
    pub pool_size: usize,
    /// Weight of the proximal term anchoring the student to its
    /// unconstrained counterpart.
    pub lambda: f64,
    pub fairness: FairnessSpec,
    /// Noise scale; exactly one of `sigma` and `target_epsilon` is set.
    pub sigma: Option<f64>,
    pub target_epsilon: Option<f64>,
    pub delta: f64,
    /// Student and reference training.
    pub train: TrainConfig,
    /// Teacher training; the batch size is capped at the shard size.
    pub teacher_train: TrainConfig,
    pub seed: u64,
    /// Fair-teachers pipeline only: never read pool labels (forces
    /// `lambda = 0`).
    pub label_protection: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            teachers: 50,
            pool_size: 200,
            lambda: 1e-3,
            fairness: FairnessSpec::new(Notion::DemographicParity, 0.0),
            sigma: None,
            target_epsilon: Some(1.0),
            delta: 1e-4,
            train: TrainConfig::default(),
            teacher_train: TrainConfig::default(),
            seed: 0,
            label_protection: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |msg: String| Err(PipelineError::InvalidConfig(msg));
        if self.teachers == 0 {
            return bad("teachers must be >= 1".into());
        }
        if self.pool_size == 0 {
            return bad("pool_size must be >= 1".into());
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be >= 0, got {}", self.lambda));
        }
        match (self.sigma, self.target_epsilon) {
            (Some(_), Some(_)) => return bad("set only one of sigma and target_epsilon".into()),
            (None, None) => return bad("set one of sigma and target_epsilon".into()),
            (Some(s), None) if !(s >= 0.0 && s.is_finite()) => return bad(format!("sigma must be >= 0, got {s}")),
            (None, Some(e)) if !(e > 0.0) => return bad(format!("target_epsilon must be > 0, got {e}")),
            _ => {}
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        self.fairness.validate()?;
        self.train.validate()?;
        self.teacher_train.validate()?;
        Ok(())
    }

    /// Noise scale of the vote, calibrated for `pool_size` queries when a
    /// target epsilon is configured. An infinite target means no noise.
    pub fn resolve_sigma(&self) -> Result<f64, PipelineError> {
        match (self.sigma, self.target_epsilon) {
            (Some(s), None) => Ok(s),
            (None, Some(e)) if e.is_infinite() => Ok(0.0),
            (None, Some(e)) => Ok(calibrate_sigma(self.pool_size, self.delta, e)?),
            _ => Err(PipelineError::InvalidConfig(
                "set exactly one of sigma and target_epsilon".into(),
            )),
        }
    }

    fn stage_seed(&self, tag: u64) -> u64 {
        derive_seed(self.seed, tag)
    }
}

/// One result row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: Method,
    /// Privacy loss; infinite for the non-private methods and for `sigma = 0`.
    pub epsilon: f64,
    pub accuracy: f64,
    /// Hard violation against the true groups of the test data.
    pub xi: f64,
    /// Largest group-vs-population score distance; set for `gdp` notions.
    pub wasserstein: Option<f64>,
    pub seed: u64,
    pub wall_ms: u128,
    pub notion: Notion,
    /// Agreement of the released attribute (noisy group or label) with the
    /// true one over the rows it was released for.
    pub release_accuracy: Option<f64>,
    pub account: Option<AccountReport>,
}

struct Evaluation {
    accuracy: f64,
    xi: f64,
    wasserstein: Option<f64>,
}

fn evaluate(params: &MlpParams, test: &Dataset, notion: Notion) -> Result<Evaluation, PipelineError> {
    let accuracy = model::accuracy(params, test)?;
    let xi = fairness::violation_xi(test, params, notion)?;
    let wasserstein = match notion {
        Notion::GeneralizedDp { .. } => Some(fairness::max_group_wasserstein(test, params)?),
        _ => None,
    };
    Ok(Evaluation {
        accuracy,
        xi,
        wasserstein,
    })
}

fn agreement(a: &[usize], b: &[usize]) -> f64 {
    let hits = a.iter().zip(b).filter(|(x, y)| x == y).count();
    hits as f64 / a.len().max(1) as f64
}

fn check_inputs(train: &Dataset, pool: &StudentPool, config: &PipelineConfig) -> Result<(), PipelineError> {
    config.validate()?;
    if !pool.is_disjoint_from(train) {
        return Err(PipelineError::PoolOverlap);
    }
    if pool.len() != config.pool_size {
        return Err(PipelineError::InvalidConfig(format!(
            "pool holds {} rows but pool_size is {}",
            pool.len(),
            config.pool_size
        )));
    }
    Ok(())
}

/// Releases one noisy answer per pool row and returns them with the account.
fn release_votes(
    ensemble: &TeacherEnsemble,
    pool: &StudentPool,
    sigma: f64,
    config: &PipelineConfig,
) -> Result<(Vec<usize>, RdpAccount), PipelineError> {
    let counts = ensemble.vote_counts(pool.features())?;
    let mut oracle = VoteOracle::new(counts, sigma, seeded(config.stage_seed(stream::VOTE_NOISE)))?;
    let answers = oracle.answer_all();
    let account = oracle.account(config.delta)?;
    Ok((answers, account))
}

/// Fair-student pipeline: group-predicting teachers release noisy group
/// votes for the pool, and a fairness-constrained student is trained on the
/// pool against those votes.
pub fn run_sf_s(
    train: &Dataset,
    pool: &StudentPool,
    test: &Dataset,
    config: &PipelineConfig,
) -> Result<RunReport, PipelineError> {
    let start = Instant::now();
    check_inputs(train, pool, config)?;
    let sigma = config.resolve_sigma()?;

    let shards = data::shard_teachers(train, config.teachers, config.stage_seed(stream::SHARD), 0)?;
    let ensemble = train_teachers_groups(&shards, &config.teacher_train, config.seed)?;
    let (noisy_groups, account) = release_votes(&ensemble, pool, sigma, config)?;

    let student_cfg = config.train.with_seed(config.stage_seed(stream::STUDENT));
    let anchor_set = pool.to_training_set(None, None)?;
    let theta_star = model::train_erm(&anchor_set, &student_cfg.fitted_to(pool.len()))?;
    let student_set = pool.to_training_set(Some(noisy_groups.clone()), None)?;
    let student = fairness::train_fair(
        &student_set,
        &config.fairness,
        &student_cfg.fitted_to(pool.len()),
        Some(&theta_star),
        config.lambda,
    )?;

    let eval = evaluate(&student, test, config.fairness.notion)?;
    Ok(RunReport {
        method: Method::SfS,
        epsilon: account.to_dp().epsilon,
        accuracy: eval.accuracy,
        xi: eval.xi,
        wasserstein: eval.wasserstein,
        seed: config.seed,
        wall_ms: start.elapsed().as_millis(),
        notion: config.fairness.notion,
        release_accuracy: Some(agreement(&noisy_groups, pool.evaluation_groups())),
        account: Some(account.report()),
    })
}

/// Fair-teachers pipeline: fairness-constrained teachers release noisy label
/// votes for the pool, and a plain student (anchored to an unconstrained
/// model unless labels are protected) learns from those votes.
pub fn run_sf_t(
    train: &Dataset,
    pool: &StudentPool,
    test: &Dataset,
    config: &PipelineConfig,
) -> Result<RunReport, PipelineError> {
    let start = Instant::now();
    check_inputs(train, pool, config)?;
    let sigma = config.resolve_sigma()?;

    let shards = data::shard_teachers(train, config.teachers, config.stage_seed(stream::SHARD), 1)?;
    let ensemble = train_teachers_fair(&shards, &config.fairness, &config.teacher_train, config.seed)?;
    let protected;
    let pool = if config.label_protection {
        protected = pool.hide_labels();
        &protected
    } else {
        pool
    };
    let (noisy_labels, account) = release_votes(&ensemble, pool, sigma, config)?;

    let student_cfg = config
        .train
        .with_seed(config.stage_seed(stream::STUDENT))
        .fitted_to(pool.len());
    let student_set = pool.to_training_set(None, Some(noisy_labels.clone()))?;
    let student = if config.label_protection || config.lambda == 0.0 {
        model::train_erm(&student_set, &student_cfg)?
    } else {
        let theta_star = model::train_erm(&pool.to_training_set(None, None)?, &student_cfg)?;
        model::train_proximal(&student_set, None, &theta_star, config.lambda, &student_cfg)?
    };

    let eval = evaluate(&student, test, config.fairness.notion)?;
    let release_accuracy = pool.labels().ok().map(|y| agreement(&noisy_labels, y));
    Ok(RunReport {
        method: Method::SfT,
        epsilon: account.to_dp().epsilon,
        accuracy: eval.accuracy,
        xi: eval.xi,
        wasserstein: eval.wasserstein,
        seed: config.seed,
        wall_ms: start.elapsed().as_millis(),
        notion: config.fairness.notion,
        release_accuracy,
        account: Some(account.report()),
    })
}

/// Randomized-response baseline: every training group is perturbed with the
/// full budget, then a fair model is trained on the perturbed groups.
pub fn run_baseline_m(train: &Dataset, test: &Dataset, config: &PipelineConfig) -> Result<RunReport, PipelineError> {
    let start = Instant::now();
    config.validate()?;
    let epsilon = config.target_epsilon.ok_or_else(|| {
        PipelineError::InvalidConfig("the randomized-response baseline needs target_epsilon".into())
    })?;
    let m = train.group_count();
    let mut rng = seeded(config.stage_seed(stream::RESPONSE));
    let perturbed = train
        .groups()
        .iter()
        .map(|&a| randomized_response(a, epsilon, m, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    let release_accuracy = agreement(&perturbed, train.groups());
    let noisy = train.with_groups(perturbed)?;
    let cfg = config.train.with_seed(config.stage_seed(stream::STUDENT));
    let params = fairness::train_fair(&noisy, &config.fairness, &cfg, None, 0.0)?;
    let eval = evaluate(&params, test, config.fairness.notion)?;
    Ok(RunReport {
        method: Method::BaselineM,
        epsilon,
        accuracy: eval.accuracy,
        xi: eval.xi,
        wasserstein: eval.wasserstein,
        seed: config.seed,
        wall_ms: start.elapsed().as_millis(),
        notion: config.fairness.notion,
        release_accuracy: Some(release_accuracy),
        account: None,
    })
}

/// Fair model trained on the true groups of the full training split.
pub fn run_nonprivate_fair(train: &Dataset, test: &Dataset, config: &PipelineConfig) -> Result<RunReport, PipelineError> {
    let start = Instant::now();
    config.validate()?;
    let cfg = config.train.with_seed(config.stage_seed(stream::REFERENCE));
    let params = fairness::train_fair(train, &config.fairness, &cfg, None, 0.0)?;
    reference_report(Method::NonprivateFair, &params, test, config, start)
}

/// Unconstrained model trained on the full training split.
pub fn run_nonprivate_erm(train: &Dataset, test: &Dataset, config: &PipelineConfig) -> Result<RunReport, PipelineError> {
    let start = Instant::now();
    config.validate()?;
    let cfg = config.train.with_seed(config.stage_seed(stream::REFERENCE));
    let params = model::train_erm(train, &cfg)?;
    reference_report(Method::NonprivateErm, &params, test, config, start)
}

fn reference_report(
    method: Method,
    params: &MlpParams,
    test: &Dataset,
    config: &PipelineConfig,
    start: Instant,
) -> Result<RunReport, PipelineError> {
    let eval = evaluate(params, test, config.fairness.notion)?;
    Ok(RunReport {
        method,
        epsilon: f64::INFINITY,
        accuracy: eval.accuracy,
        xi: eval.xi,
        wasserstein: eval.wasserstein,
        seed: config.seed,
        wall_ms: start.elapsed().as_millis(),
        notion: config.fairness.notion,
        release_accuracy: None,
        account: None,
    })
}

/// Runs `method` on one train/pool/test split. The pool is ignored by the
/// methods that do not use it.
pub fn run_method(
    method: Method,
    train: &Dataset,
    pool: &StudentPool,
    test: &Dataset,
    config: &PipelineConfig,
) -> Result<RunReport, PipelineError> {
    match method {
        Method::SfS => run_sf_s(train, pool, test, config),
        Method::SfT => run_sf_t(train, pool, test, config),
        Method::BaselineM => run_baseline_m(train, test, config),
        Method::NonprivateFair => run_nonprivate_fair(train, test, config),
        Method::NonprivateErm => run_nonprivate_erm(train, test, config),
    }
}

// ---------------------------------------------------------------------------
// Studies

/// Mean agreement `P(Ã = A)` of noisy group votes with the true pool groups,
/// for each ensemble size in `ks`, averaged over `seeds`. Each seed reshards
/// `train`, retrains the teachers and redraws the vote noise.
pub fn ensemble_attribute_accuracy(
    train: &Dataset,
    pool: &StudentPool,
    ks: &[usize],
    sigma: f64,
    seeds: &[u64],
    teacher_train: &TrainConfig,
) -> Result<Vec<(usize, f64)>, PipelineError> {
    if seeds.is_empty() {
        return Err(PipelineError::InvalidConfig("need at least one seed".into()));
    }
    let truth = pool.evaluation_groups();
    let mut out = Vec::with_capacity(ks.len());
    for &k in ks {
        let mut total = 0.0;
        for &seed in seeds {
            let shards = data::shard_teachers(train, k, derive_seed(seed, stream::SHARD), 0)?;
            let ensemble = train_teachers_groups(&shards, teacher_train, seed)?;
            let counts = ensemble.vote_counts(pool.features())?;
            let mut oracle = VoteOracle::new(counts, sigma, seeded(derive_seed(seed, stream::VOTE_NOISE)))?;
            total += agreement(&oracle.answer_all(), truth);
        }
        out.push((k, total / seeds.len() as f64));
    }
    Ok(out)
}

/// Largest change of any query point's vote counts over every single-row
/// change of `train`'s group column.
///
/// `train` is split into `teachers` shards (each holding at least two rows
/// of every group for label-predicting teachers, so that one change never
/// empties a group). Each probed change retrains only the teacher whose shard
/// holds the changed row.
pub fn ensemble_sensitivity(
    train: &Dataset,
    queries: &Matrix,
    teachers: usize,
    target: TargetSpace,
    spec: &FairnessSpec,
    config: &TrainConfig,
    seed: u64,
) -> Result<f64, PipelineError> {
    let min_per_group = match target {
        TargetSpace::Groups => 0,
        TargetSpace::Labels => 2,
    };
    let shards = data::shard_teachers(train, teachers, derive_seed(seed, stream::SHARD), min_per_group)?;
    let position: HashMap<usize, usize> = train.row_ids().iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let members: Vec<Vec<usize>> = shards
        .iter()
        .map(|s| s.row_ids().iter().map(|id| position[id]).collect())
        .collect();
    let mut shard_of = vec![0; train.len()];
    for (k, rows) in members.iter().enumerate() {
        for &i in rows {
            shard_of[i] = k;
        }
    }
    let domain = match target {
        TargetSpace::Groups => train.group_count(),
        TargetSpace::Labels => train.label_count(),
    };
    let predict = |k: usize, groups: &[usize]| -> Result<Vec<usize>, PipelineError> {
        let shard = train.with_groups(groups.to_vec())?.subset(&members[k]);
        let cfg = teacher_config(config, seed, k, shard.len());
        let params = match target {
            TargetSpace::Groups => model::train_erm(&shard.groups_as_labels(), &cfg)?,
            TargetSpace::Labels => fairness::train_fair(&shard, spec, &cfg, None, 0.0)?,
        };
        Ok(model::predict(&params, queries)?)
    };
    Ok(privacy::sensitivity_probe(
        train.groups(),
        train.group_count(),
        &shard_of,
        teachers,
        domain,
        predict,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.as_str()));
        }
        assert!("pate".parse::<Method>().is_err());
    }

    #[test]
    fn config_requires_exactly_one_noise_setting() {
        let mut c = PipelineConfig::default();
        assert!(c.validate().is_ok());
        c.sigma = Some(10.0);
        assert!(c.validate().is_err());
        c.target_epsilon = None;
        assert!(c.validate().is_ok());
        c.sigma = None;
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_rejects_bad_values() {
        let c = PipelineConfig {
            lambda: -1.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = PipelineConfig {
            pool_size: 0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = PipelineConfig {
            delta: 1.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn weaker_privacy_never_adds_noise() {
        let sigma_at = |e: f64| {
            PipelineConfig {
                target_epsilon: Some(e),
                ..Default::default()
            }
            .resolve_sigma()
            .unwrap()
        };
        let mut last = f64::INFINITY;
        for e in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let s = sigma_at(e);
            assert!(s <= last);
            last = s;
        }
        assert_eq!(sigma_at(f64::INFINITY), 0.0);
    }
}
