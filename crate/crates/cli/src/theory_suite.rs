//! Seeded trials of the group-transfer and vote-transfer bounds.

use rayon::prelude::*;
use serde::Serialize;
use sfpate::data::{self, Dataset, SplitSpec, SynthParams};
use sfpate::fairness::{self, FairnessSpec};
use sfpate::pate;
use sfpate::privacy::randomized_response;
use sfpate::rng::{derive_seed, seeded, stream};
use sfpate::theory::{self, BoundKind, BoundReport};

use crate::config::{ExperimentConfig, TheoryConfig};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub groups: usize,
    /// Randomized-response budget of a group-transfer trial.
    pub rr_epsilon: Option<f64>,
    /// Vote noise of a vote-transfer trial.
    pub sigma: Option<f64>,
    #[serde(flatten)]
    pub report: BoundReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub summary: BoundKind,
    pub trials: usize,
    pub holds: usize,
    pub holds_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryOutcome {
    pub trials: Vec<TrialRecord>,
    pub summaries: Vec<SuiteSummary>,
}

impl TheoryOutcome {
    /// Trial records followed by one summary line per suite.
    pub fn json_lines(&self) -> String {
        let mut out = String::new();
        for t in &self.trials {
            out.push_str(&serde_json::to_string(t).expect("records are serializable"));
            out.push('\n');
        }
        for s in &self.summaries {
            out.push_str(&serde_json::to_string(s).expect("summaries are serializable"));
            out.push('\n');
        }
        out
    }

    pub fn summary(&self, kind: BoundKind) -> Option<&SuiteSummary> {
        self.summaries.iter().find(|s| s.summary == kind)
    }
}

fn standardized_split(data: &Dataset, seed: u64) -> Result<(Dataset, Dataset), CliError> {
    let (train, _eval, test) = data::split(data, &SplitSpec::standard(seed))?;
    let (train, stats) = data::standardize(&train, None)?;
    let (test, _) = data::standardize(&test, Some(&stats))?;
    Ok((train, test))
}

/// Trains a fair model on randomized-response groups and checks the
/// group-transfer bound on the test rows, whose groups are perturbed with
/// the same mechanism.
pub fn group_transfer_trial(t: &TheoryConfig, seed: u64, rr_epsilon: f64, m: usize) -> Result<BoundReport, CliError> {
    let params = SynthParams {
        m,
        ..t.data.params(seed)
    };
    let (train, test) = standardized_split(&data::synth_biased(&params)?, seed)?;
    let mut rng = seeded(derive_seed(seed, stream::RESPONSE));
    let mut perturb = |d: &Dataset| -> Result<Vec<usize>, CliError> {
        d.groups()
            .iter()
            .map(|&a| randomized_response(a, rr_epsilon, m, &mut rng).map_err(CliError::from))
            .collect()
    };
    let noisy_train = train.with_groups(perturb(&train)?)?;
    let noisy_test = perturb(&test)?;
    let spec = FairnessSpec::new(t.notion, 0.0);
    let cfg = t.train.with_seed(derive_seed(seed, stream::STUDENT));
    let model = fairness::train_fair(&noisy_train, &spec, &cfg, None, 0.0)?;
    let strata = theory::strata_for(&test)?;
    Ok(theory::verify_thm1(&model, &test, &noisy_test, &strata, t.notion, t.b)?)
}

/// Trains fair label teachers and checks the vote-transfer bound on the
/// test rows.
pub fn vote_transfer_trial(t: &TheoryConfig, seed: u64, sigma: f64) -> Result<BoundReport, CliError> {
    let (train, test) = standardized_split(&data::synth_biased(&t.data.params(seed))?, seed)?;
    let shards = data::shard_teachers(&train, t.teachers, derive_seed(seed, stream::SHARD), 1)?;
    let spec = FairnessSpec::new(t.notion, 0.0);
    let ensemble = pate::train_teachers_fair(&shards, &spec, &t.train, seed)?;
    let preds = ensemble.predictions(test.features())?;
    let noise = derive_seed(seed, stream::VOTE_NOISE);
    let draws: Vec<u64> = (0..t.vote_draws as u64).map(|j| derive_seed(noise, j)).collect();
    Ok(theory::verify_thm2(&preds, &test, sigma, &draws, t.notion, t.b)?)
}

fn summarize(kind: BoundKind, trials: &[TrialRecord]) -> SuiteSummary {
    let of_kind: Vec<&TrialRecord> = trials.iter().filter(|t| t.report.kind == kind).collect();
    let holds = of_kind.iter().filter(|t| t.report.holds).count();
    SuiteSummary {
        summary: kind,
        trials: of_kind.len(),
        holds,
        holds_rate: if of_kind.is_empty() {
            0.0
        } else {
            holds as f64 / of_kind.len() as f64
        },
    }
}

/// One group-transfer and one vote-transfer trial per configured seed.
///
/// Trial `i` takes entry `i mod len` of the `(rr_epsilon, groups)` grid and
/// of the `vote_sigmas` list.
pub fn run_theory(config: &ExperimentConfig) -> Result<TheoryOutcome, CliError> {
    config.validate()?;
    let t = &config.theory;
    let grid: Vec<(f64, usize)> = t
        .rr_epsilons
        .iter()
        .flat_map(|&e| t.groups.iter().map(move |&m| (e, m)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start workers: {e}")))?;
    let jobs: Vec<(usize, BoundKind)> = (0..config.seeds.len())
        .flat_map(|i| [(i, BoundKind::GroupTransfer), (i, BoundKind::VoteTransfer)])
        .collect();
    let trials: Vec<TrialRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, kind)| {
                let seed = config.seeds[i];
                match kind {
                    BoundKind::GroupTransfer => {
                        let (e, m) = grid[i % grid.len()];
                        Ok(TrialRecord {
                            trial: i,
                            seed,
                            groups: m,
                            rr_epsilon: Some(e),
                            sigma: None,
                            report: group_transfer_trial(t, seed, e, m)?,
                        })
                    }
                    BoundKind::VoteTransfer => {
                        let sigma = t.vote_sigmas[i % t.vote_sigmas.len()];
                        Ok(TrialRecord {
                            trial: i,
                            seed,
                            groups: t.data.m,
                            rr_epsilon: None,
                            sigma: Some(sigma),
                            report: vote_transfer_trial(t, seed, sigma)?,
                        })
                    }
                }
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let mut trials = trials;
    trials.sort_by_key(|r| (r.report.kind != BoundKind::GroupTransfer, r.trial));
    let summaries = vec![
        summarize(BoundKind::GroupTransfer, &trials),
        summarize(BoundKind::VoteTransfer, &trials),
    ];
    Ok(TheoryOutcome { trials, summaries })
}
