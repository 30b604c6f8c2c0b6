//! Group fairness: the fairness functions `h`, the violation `xi`, their
//! differentiable surrogates, a Lagrangian-dual constrained trainer and
//! Wasserstein evaluation of score distributions.
//!
//! The violation of a model on a dataset is
//!
//! ```text
//! xi = max_a max_j | mean(h_j | A = a) - mean(h_j) |
//! ```
//!
//! where `h` has `c` components (one for demographic and accuracy parity,
//! two for equalized odds, `H` for generalized demographic parity).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::matrix::Matrix;
use crate::model::{self, argmax, BatchPenalty, MlpParams, ModelError, Proximal, TrainConfig, PROB_FLOOR};

#[derive(Debug, Error)]
pub enum FairnessError {
    #[error("notion `{notion}` needs binary labels, found {classes} classes")]
    NeedsBinaryLabels { notion: Notion, classes: usize },
    #[error("group {0} has no rows")]
    EmptyGroup(usize),
    #[error("cannot parse fairness notion `{0}` (expected dp, eo, ap or gdp:<H>)")]
    UnknownNotion(String),
    #[error("invalid fairness spec: {0}")]
    InvalidSpec(String),
    #[error("empty score sample")]
    EmptyInput,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Fairness notion, selected in configs by `dp`, `eo`, `ap` or `gdp:<H>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Notion {
    DemographicParity,
    EqualizedOdds,
    AccuracyParity,
    /// Matches the first `moments` moments of the class-1 score.
    GeneralizedDp { moments: usize },
}

impl Notion {
    /// Number of components of the fairness function.
    pub fn components(&self) -> usize {
        match self {
            Self::DemographicParity | Self::AccuracyParity => 1,
            Self::EqualizedOdds => 2,
            Self::GeneralizedDp { moments } => *moments,
        }
    }

    pub fn needs_binary(&self) -> bool {
        !matches!(self, Self::AccuracyParity)
    }

    fn check_classes(&self, classes: usize) -> Result<(), FairnessError> {
        if self.needs_binary() && classes != 2 {
            return Err(FairnessError::NeedsBinaryLabels {
                notion: *self,
                classes,
            });
        }
        Ok(())
    }
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DemographicParity => f.write_str("dp"),
            Self::EqualizedOdds => f.write_str("eo"),
            Self::AccuracyParity => f.write_str("ap"),
            Self::GeneralizedDp { moments } => write!(f, "gdp:{moments}"),
        }
    }
}

impl FromStr for Notion {
    type Err = FairnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "dp" => Ok(Self::DemographicParity),
            "eo" => Ok(Self::EqualizedOdds),
            "ap" => Ok(Self::AccuracyParity),
            other => other
                .strip_prefix("gdp:")
                .and_then(|h| h.parse::<usize>().ok())
                .filter(|&h| h >= 1)
                .map(|moments| Self::GeneralizedDp { moments })
                .ok_or_else(|| FairnessError::UnknownNotion(s.to_string())),
        }
    }
}

impl TryFrom<String> for Notion {
    type Error = FairnessError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Notion> for String {
    fn from(n: Notion) -> Self {
        n.to_string()
    }
}

fn default_step() -> f64 {
    1.0
}

/// When the multipliers take a dual ascent step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualSchedule {
    /// After every minibatch, on the running gap estimate, with the step
    /// scaled by the batch's share of the data.
    #[default]
    PerBatch,
    /// After every epoch, on the gaps accumulated over the epoch.
    PerEpoch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessSpec {
    pub notion: Notion,
    /// Allowed violation.
    #[serde(default)]
    pub alpha: f64,
    /// Dual ascent step size for the multipliers, per pass over the data.
    #[serde(default = "default_step")]
    pub multiplier_step: f64,
    #[serde(default)]
    pub schedule: DualSchedule,
}

impl FairnessSpec {
    pub fn new(notion: Notion, alpha: f64) -> Self {
        Self {
            notion,
            alpha,
            multiplier_step: default_step(),
            schedule: DualSchedule::default(),
        }
    }

    pub fn validate(&self) -> Result<(), FairnessError> {
        if !(self.alpha >= 0.0) {
            return Err(FairnessError::InvalidSpec(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.multiplier_step > 0.0 && self.multiplier_step.is_finite()) {
            return Err(FairnessError::InvalidSpec(format!(
                "multiplier_step must be > 0, got {}",
                self.multiplier_step
            )));
        }
        if let Notion::GeneralizedDp { moments: 0 } = self.notion {
            return Err(FairnessError::InvalidSpec("gdp needs at least one moment".into()));
        }
        Ok(())
    }
}

/// One nonnegative multiplier per `(group, component)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    groups: usize,
    components: usize,
    values: Vec<f64>,
}

impl Multipliers {
    pub fn zeros(groups: usize, components: usize) -> Self {
        Self {
            groups,
            components,
            values: vec![0.0; groups * components],
        }
    }

    pub fn get(&self, group: usize, component: usize) -> f64 {
        self.values[group * self.components + component]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn ascend(&mut self, group: usize, component: usize, step: f64, violation: f64) {
        let v = &mut self.values[group * self.components + component];
        *v = (*v + step * violation).max(0.0);
    }
}

// ---------------------------------------------------------------------------
// Fairness functions

/// Hard fairness components of predicted classes.
pub fn components_of_predictions(
    preds: &[usize],
    labels: &[usize],
    notion: Notion,
) -> Result<Matrix, FairnessError> {
    if preds.len() != labels.len() {
        return Err(FairnessError::LengthMismatch(preds.len(), labels.len()));
    }
    let c = notion.components();
    let mut out = Matrix::zeros(preds.len(), c);
    for (i, (&p, &y)) in preds.iter().zip(labels).enumerate() {
        let row = out.row_mut(i);
        let positive = if p == 1 { 1.0 } else { 0.0 };
        match notion {
            Notion::DemographicParity => row[0] = positive,
            Notion::EqualizedOdds => {
                if y < 2 {
                    row[y] = positive;
                }
            }
            Notion::AccuracyParity => row[0] = if p != y { 1.0 } else { 0.0 },
            // an indicator raised to any power is itself
            Notion::GeneralizedDp { .. } => row.iter_mut().for_each(|v| *v = positive),
        }
    }
    Ok(out)
}

/// Hard (indicator) fairness components of probability rows, using argmax
/// predictions.
pub fn fairness_components(probs: &Matrix, labels: &[usize], notion: Notion) -> Result<Matrix, FairnessError> {
    notion.check_classes(probs.cols())?;
    let preds: Vec<usize> = probs.iter_rows().map(argmax).collect();
    components_of_predictions(&preds, labels, notion)
}

/// Differentiable stand-ins for the fairness components: the class-1
/// probability (masked by label for equalized odds, raised to powers for
/// generalized parity) or the per-row cross-entropy for accuracy parity.
pub fn surrogate_components(probs: &Matrix, labels: &[usize], notion: Notion) -> Result<Matrix, FairnessError> {
    notion.check_classes(probs.cols())?;
    if probs.rows() != labels.len() {
        return Err(FairnessError::LengthMismatch(probs.rows(), labels.len()));
    }
    let c = notion.components();
    let mut out = Matrix::zeros(probs.rows(), c);
    for (i, (row, &y)) in probs.iter_rows().zip(labels).enumerate() {
        let dst = out.row_mut(i);
        for (j, v) in dst.iter_mut().enumerate() {
            *v = surrogate_value(notion, row, y, j);
        }
    }
    Ok(out)
}

fn surrogate_value(notion: Notion, probs: &[f64], y: usize, j: usize) -> f64 {
    match notion {
        Notion::DemographicParity => probs[1],
        Notion::EqualizedOdds => {
            if y == j {
                probs[1]
            } else {
                0.0
            }
        }
        Notion::AccuracyParity => -probs[y].max(PROB_FLOOR).ln(),
        Notion::GeneralizedDp { .. } => probs[1].powi(j as i32 + 1),
    }
}

/// Adds `coef * d surrogate_j / d logits` to `out`.
fn add_surrogate_logit_grad(notion: Notion, probs: &[f64], y: usize, j: usize, coef: f64, out: &mut [f64]) {
    match notion {
        Notion::AccuracyParity => {
            for (k, o) in out.iter_mut().enumerate() {
                let onehot = if k == y { 1.0 } else { 0.0 };
                *o += coef * (probs[k] - onehot);
            }
        }
        _ => {
            let p1 = probs[1];
            let dsdp1 = match notion {
                Notion::GeneralizedDp { .. } => (j as f64 + 1.0) * p1.powi(j as i32),
                _ => 1.0,
            };
            for (k, o) in out.iter_mut().enumerate() {
                let delta = if k == 1 { 1.0 } else { 0.0 };
                *o += coef * dsdp1 * p1 * (delta - probs[k]);
            }
        }
    }
}

/// Statistic whose gap drives the multipliers and the direction of the
/// surrogate gradient: the hard indicator where one exists, the surrogate
/// itself for moment matching.
fn tracked_value(notion: Notion, probs: &[f64], y: usize, j: usize) -> f64 {
    let pred = argmax(probs);
    match notion {
        Notion::DemographicParity | Notion::EqualizedOdds => f64::from(u8::from(pred == 1)),
        Notion::AccuracyParity => f64::from(u8::from(pred != y)),
        Notion::GeneralizedDp { .. } => surrogate_value(notion, probs, y, j),
    }
}

/// Conditioning weight of row `i` in component `j`'s group means: equalized
/// odds compares rates within each label value.
fn surrogate_weight(notion: Notion, y: usize, j: usize) -> f64 {
    match notion {
        Notion::EqualizedOdds => {
            if y == j {
                1.0
            } else {
                0.0
            }
        }
        _ => 1.0,
    }
}

/// `max_a max_j |mean_a(h_j) - mean(h_j)|` for precomputed components.
pub fn violation_of_components(components: &Matrix, groups: &[usize], m: usize) -> Result<f64, FairnessError> {
    if components.rows() != groups.len() {
        return Err(FairnessError::LengthMismatch(components.rows(), groups.len()));
    }
    let c = components.cols();
    let mut sums = vec![0.0; m * c];
    let mut counts = vec![0usize; m];
    let mut total = vec![0.0; c];
    for (row, &g) in components.iter_rows().zip(groups) {
        counts[g] += 1;
        for j in 0..c {
            sums[g * c + j] += row[j];
            total[j] += row[j];
        }
    }
    if let Some(a) = counts.iter().position(|&k| k == 0) {
        return Err(FairnessError::EmptyGroup(a));
    }
    let n = groups.len() as f64;
    let mut xi: f64 = 0.0;
    for a in 0..m {
        for j in 0..c {
            let gap = sums[a * c + j] / counts[a] as f64 - total[j] / n;
            xi = xi.max(gap.abs());
        }
    }
    Ok(xi)
}

/// Hard violation of predicted classes against a group column.
pub fn violation_of_predictions(
    preds: &[usize],
    labels: &[usize],
    groups: &[usize],
    m: usize,
    notion: Notion,
) -> Result<f64, FairnessError> {
    let comps = components_of_predictions(preds, labels, notion)?;
    violation_of_components(&comps, groups, m)
}

/// Hard violation `xi` of `params` on `data`.
pub fn violation_xi(data: &Dataset, params: &MlpParams, notion: Notion) -> Result<f64, FairnessError> {
    let probs = model::forward(params, data.features())?;
    let comps = fairness_components(&probs, data.labels(), notion)?;
    violation_of_components(&comps, data.groups(), data.group_count())
}

// ---------------------------------------------------------------------------
// Lagrangian-dual trainer

/// Decay of the running gap estimate, per minibatch.
const GAP_DECAY: f64 = 0.95;

/// Running group and population sums of one surrogate statistic.
#[derive(Debug, Clone)]
struct GapStats {
    group_sum: Vec<f64>,
    group_weight: Vec<f64>,
    sum: Vec<f64>,
    weight: Vec<f64>,
    components: usize,
}

impl GapStats {
    fn new(m: usize, c: usize) -> Self {
        Self {
            group_sum: vec![0.0; m * c],
            group_weight: vec![0.0; m * c],
            sum: vec![0.0; c],
            weight: vec![0.0; c],
            components: c,
        }
    }

    fn scale(&mut self, factor: f64) {
        for v in self
            .group_sum
            .iter_mut()
            .chain(&mut self.group_weight)
            .chain(&mut self.sum)
            .chain(&mut self.weight)
        {
            *v *= factor;
        }
    }

    fn add(&mut self, other: &GapStats) {
        let pairs = [
            (&mut self.group_sum, &other.group_sum),
            (&mut self.group_weight, &other.group_weight),
            (&mut self.sum, &other.sum),
            (&mut self.weight, &other.weight),
        ];
        for (dst, src) in pairs {
            dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
        }
    }

    /// Group mean minus population mean, when both are defined.
    fn gap(&self, a: usize, j: usize) -> Option<f64> {
        let k = a * self.components + j;
        (self.group_weight[k] > 0.0 && self.weight[j] > 0.0)
            .then(|| self.group_sum[k] / self.group_weight[k] - self.sum[j] / self.weight[j])
    }
}

/// Lagrangian term `sum_{a,j} mu_{a,j} * max(0, |gap_{a,j}| - alpha)` on
/// the surrogate gaps.
///
/// The gap of the hard fairness function (see [`tracked_value`]) is tracked
/// by a running estimate over recent minibatches and drives the multipliers.
/// Each batch contributes the gradient of `mu * sign(gap) * surrogate_gap`,
/// where `surrogate_gap` is measured on the batch, so the penalty neither
/// needs a differentiable hard gap nor rewards shrinking the sampling noise of
/// small batches.
struct DualPenalty<'a> {
    groups: &'a [usize],
    labels: &'a [usize],
    m: usize,
    notion: Notion,
    alpha: f64,
    step: f64,
    schedule: DualSchedule,
    multipliers: Multipliers,
    running: GapStats,
    epoch: GapStats,
    batch: GapStats,
    coef: Vec<f64>,
}

impl<'a> DualPenalty<'a> {
    fn new(groups: &'a [usize], labels: &'a [usize], m: usize, spec: &FairnessSpec) -> Self {
        let c = spec.notion.components();
        Self {
            groups,
            labels,
            m,
            notion: spec.notion,
            alpha: spec.alpha,
            step: spec.multiplier_step,
            schedule: spec.schedule,
            multipliers: Multipliers::zeros(m, c),
            running: GapStats::new(m, c),
            epoch: GapStats::new(m, c),
            batch: GapStats::new(m, c),
            coef: vec![0.0; m * c],
        }
    }

    fn ascend_on(&mut self, stats_are_epoch: bool, step: f64) {
        let c = self.notion.components();
        for a in 0..self.m {
            for j in 0..c {
                let stats = if stats_are_epoch { &self.epoch } else { &self.running };
                if let Some(gap) = stats.gap(a, j) {
                    self.multipliers.ascend(a, j, step, gap.abs() - self.alpha);
                }
            }
        }
    }
}

impl BatchPenalty for DualPenalty<'_> {
    fn apply(&mut self, batch: &[usize], probs: &[f64], classes: usize, dlogits: &mut [f64]) -> f64 {
        let c = self.notion.components();
        let m = self.m;
        self.batch.scale(0.0);
        for (r, &i) in batch.iter().enumerate() {
            let p = &probs[r * classes..(r + 1) * classes];
            let (a, y) = (self.groups[i], self.labels[i]);
            for j in 0..c {
                let w = surrogate_weight(self.notion, y, j);
                if w == 0.0 {
                    continue;
                }
                let s = tracked_value(self.notion, p, y, j);
                let b = &mut self.batch;
                b.group_sum[a * c + j] += w * s;
                b.group_weight[a * c + j] += w;
                b.sum[j] += w * s;
                b.weight[j] += w;
            }
        }
        self.running.scale(GAP_DECAY);
        self.running.add(&self.batch);
        self.epoch.add(&self.batch);

        // Row i of group `own` moves gap_batch(a, j) by
        //   w_ij * (1{own = a} / W_aj - 1 / W_j) * d s_ij.
        let mut value = 0.0;
        let mut active = false;
        for a in 0..m {
            for j in 0..c {
                let k = a * c + j;
                self.coef[k] = 0.0;
                let mu = self.multipliers.get(a, j);
                let Some(gap) = self.running.gap(a, j) else { continue };
                if mu <= 0.0 || gap.abs() <= self.alpha || self.batch.gap(a, j).is_none() {
                    continue;
                }
                value += mu * (gap.abs() - self.alpha);
                self.coef[k] = mu * gap.signum();
                active = true;
            }
        }
        if active {
            for (r, &i) in batch.iter().enumerate() {
                let p = &probs[r * classes..(r + 1) * classes];
                let (own, y) = (self.groups[i], self.labels[i]);
                let out = &mut dlogits[r * classes..(r + 1) * classes];
                for j in 0..c {
                    let w = surrogate_weight(self.notion, y, j);
                    if w == 0.0 {
                        continue;
                    }
                    let mut coef = 0.0;
                    for a in 0..m {
                        let k = a * c + j;
                        if self.coef[k] == 0.0 {
                            continue;
                        }
                        if a == own {
                            coef += self.coef[k] / self.batch.group_weight[k];
                        }
                        coef -= self.coef[k] / self.batch.weight[j];
                    }
                    if coef != 0.0 {
                        add_surrogate_logit_grad(self.notion, p, y, j, w * coef, out);
                    }
                }
            }
        }
        if self.schedule == DualSchedule::PerBatch {
            let share = batch.len() as f64 / self.groups.len() as f64;
            self.ascend_on(false, self.step * share);
        }
        value
    }

    fn end_epoch(&mut self) {
        if self.schedule == DualSchedule::PerEpoch {
            self.ascend_on(true, self.step);
        }
        self.epoch.scale(0.0);
    }
}

/// Fairness-constrained training with the Lagrangian dual method; returns the
/// final parameters together with the final multipliers.
///
/// The primal objective is mean cross-entropy, plus `lambda * ||theta -
/// theta_star||^2` when an anchor is given, plus the multiplier-weighted
/// hinge on surrogate gaps. The group column of `data` is the one the
/// constraint is enforced against.
pub fn train_fair_with_multipliers(
    data: &Dataset,
    spec: &FairnessSpec,
    config: &TrainConfig,
    theta_star: Option<&MlpParams>,
    lambda: f64,
) -> Result<(MlpParams, Multipliers), FairnessError> {
    spec.validate()?;
    spec.notion.check_classes(data.label_count())?;
    if let Some(a) = data.group_sizes().iter().position(|&k| k == 0) {
        return Err(FairnessError::EmptyGroup(a));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(FairnessError::InvalidSpec(format!("lambda must be >= 0, got {lambda}")));
    }
    let mut penalty = DualPenalty::new(data.groups(), data.labels(), data.group_count(), spec);
    let proximal = theta_star.map(|anchor| Proximal { anchor, lambda });
    let params = model::fit(
        data.features(),
        data.labels(),
        data.label_count(),
        config,
        proximal,
        Some(&mut penalty),
    )?;
    Ok((params, penalty.multipliers))
}

/// [`train_fair_with_multipliers`] without the multipliers.
pub fn train_fair(
    data: &Dataset,
    spec: &FairnessSpec,
    config: &TrainConfig,
    theta_star: Option<&MlpParams>,
    lambda: f64,
) -> Result<MlpParams, FairnessError> {
    train_fair_with_multipliers(data, spec, config, theta_star, lambda).map(|(p, _)| p)
}

// ---------------------------------------------------------------------------
// Wasserstein evaluation

/// 1-Wasserstein distance between two empirical distributions on the line,
/// integrating the gap between their piecewise-constant quantile functions.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> Result<f64, FairnessError> {
    if a.is_empty() || b.is_empty() {
        return Err(FairnessError::EmptyInput);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    if a.len() == b.len() {
        let s: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
        return Ok(s / a.len() as f64);
    }
    // Walk the merged breakpoints i/na and j/nb of the two quantile functions.
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut t = 0.0;
    let mut total = 0.0;
    while i < na && j < nb {
        let next_a = (i + 1) as f64 / na as f64;
        let next_b = (j + 1) as f64 / nb as f64;
        let next = next_a.min(next_b);
        total += (next - t) * (a[i] - b[j]).abs();
        t = next;
        // compare in integers so that equal breakpoints advance together
        let (ka, kb) = ((i + 1) * nb, (j + 1) * na);
        if ka <= kb {
            i += 1;
        }
        if kb <= ka {
            j += 1;
        }
    }
    Ok(total)
}

/// `max_a W1(scores | A = a, scores)` for per-row scores and groups.
pub fn max_group_wasserstein_scores(scores: &[f64], groups: &[usize], m: usize) -> Result<f64, FairnessError> {
    if scores.len() != groups.len() {
        return Err(FairnessError::LengthMismatch(scores.len(), groups.len()));
    }
    let mut worst: f64 = 0.0;
    for a in 0..m {
        let part: Vec<f64> = scores
            .iter()
            .zip(groups)
            .filter(|(_, &g)| g == a)
            .map(|(&s, _)| s)
            .collect();
        if part.is_empty() {
            return Err(FairnessError::EmptyGroup(a));
        }
        worst = worst.max(wasserstein_1d(&part, scores)?);
    }
    Ok(worst)
}

/// Largest Wasserstein distance between a group's class-1 score distribution
/// and the population's.
pub fn max_group_wasserstein(data: &Dataset, params: &MlpParams) -> Result<f64, FairnessError> {
    let probs = model::forward(params, data.features())?;
    if probs.cols() != 2 {
        return Err(FairnessError::NeedsBinaryLabels {
            notion: Notion::GeneralizedDp { moments: 1 },
            classes: probs.cols(),
        });
    }
    let scores = probs.column(1);
    max_group_wasserstein_scores(&scores, data.groups(), data.group_count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probs(rows: &[[f64; 2]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn notion_keys_round_trip() {
        for key in ["dp", "eo", "ap", "gdp:2", "gdp:5"] {
            let n: Notion = key.parse().unwrap();
            assert_eq!(n.to_string(), key);
        }
        assert!("gdp:0".parse::<Notion>().is_err());
        assert!("gdp".parse::<Notion>().is_err());
        assert!("parity".parse::<Notion>().is_err());
        let json = serde_json::to_string(&Notion::GeneralizedDp { moments: 2 }).unwrap();
        assert_eq!(json, "\"gdp:2\"");
    }

    #[test]
    fn dp_components() {
        let c = components_of_predictions(&[1, 0, 1], &[0, 0, 0], Notion::DemographicParity).unwrap();
        assert_eq!(c.as_slice(), &[1.0, 0.0, 1.0]);
    }

    #[test]
    fn eo_components() {
        let c = components_of_predictions(&[1, 1, 0], &[0, 1, 1], Notion::EqualizedOdds).unwrap();
        assert_eq!(c.row(0), &[1.0, 0.0]);
        assert_eq!(c.row(1), &[0.0, 1.0]);
        assert_eq!(c.row(2), &[0.0, 0.0]);
    }

    #[test]
    fn ap_components() {
        let c = components_of_predictions(&[1, 1], &[1, 0], Notion::AccuracyParity).unwrap();
        assert_eq!(c.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn binary_notions_reject_multiclass() {
        let p = Matrix::from_rows(&[[0.2, 0.3, 0.5]]).unwrap();
        assert!(matches!(
            fairness_components(&p, &[0], Notion::DemographicParity),
            Err(FairnessError::NeedsBinaryLabels { .. })
        ));
        assert!(fairness_components(&p, &[0], Notion::AccuracyParity).is_ok());
    }

    #[test]
    fn argmax_ties_resolve_to_class_zero() {
        let c = fairness_components(&probs(&[[0.5, 0.5]]), &[0], Notion::DemographicParity).unwrap();
        assert_eq!(c.as_slice(), &[0.0]);
    }

    #[test]
    fn hand_computed_violation() {
        let xi = violation_of_predictions(&[1, 0, 1, 1], &[0; 4], &[0, 0, 1, 1], 2, Notion::DemographicParity).unwrap();
        assert!((xi - 0.25).abs() < 1e-15);
    }

    #[test]
    fn group_independent_predictions_are_fair() {
        let xi = violation_of_predictions(&[1, 0, 1, 0], &[0; 4], &[0, 0, 1, 1], 2, Notion::DemographicParity).unwrap();
        assert_eq!(xi, 0.0);
    }

    #[test]
    fn single_group_is_fair() {
        let comps = components_of_predictions(&[1, 0, 1], &[0; 3], Notion::DemographicParity).unwrap();
        assert_eq!(violation_of_components(&comps, &[0, 0, 0], 1).unwrap(), 0.0);
    }

    #[test]
    fn empty_group_is_an_error() {
        let comps = components_of_predictions(&[1, 0], &[0; 2], Notion::DemographicParity).unwrap();
        assert!(matches!(
            violation_of_components(&comps, &[0, 0], 2),
            Err(FairnessError::EmptyGroup(1))
        ));
    }

    #[test]
    fn surrogate_values() {
        let dp = surrogate_components(&probs(&[[0.1, 0.9], [0.9, 0.1]]), &[0, 0], Notion::DemographicParity).unwrap();
        assert_eq!(dp.as_slice(), &[0.9, 0.1]);
        let ap = surrogate_components(&probs(&[[1.0, 0.0], [0.0, 1.0]]), &[0, 1], Notion::AccuracyParity).unwrap();
        assert!(ap.as_slice().iter().all(|v| v.abs() < 1e-12));
        let gdp =
            surrogate_components(&probs(&[[0.5, 0.5]]), &[0], Notion::GeneralizedDp { moments: 2 }).unwrap();
        assert_eq!(gdp.as_slice(), &[0.5, 0.25]);
        let eo = surrogate_components(&probs(&[[0.3, 0.7]]), &[1], Notion::EqualizedOdds).unwrap();
        assert_eq!(eo.as_slice(), &[0.0, 0.7]);
    }

    #[test]
    fn gdp_one_moment_equals_dp_surrogate() {
        let p = probs(&[[0.2, 0.8], [0.65, 0.35], [0.5, 0.5]]);
        let a = surrogate_components(&p, &[0, 1, 0], Notion::GeneralizedDp { moments: 1 }).unwrap();
        let b = surrogate_components(&p, &[0, 1, 0], Notion::DemographicParity).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn surrogate_gradient_matches_finite_differences() {
        // central differences of s(softmax(z)) w.r.t. the logits
        let z = [0.3, -0.4];
        let softmax = |z: &[f64]| {
            let e: Vec<f64> = z.iter().map(|v| v.exp()).collect();
            let s: f64 = e.iter().sum();
            e.iter().map(|v| v / s).collect::<Vec<_>>()
        };
        for notion in [
            Notion::DemographicParity,
            Notion::AccuracyParity,
            Notion::GeneralizedDp { moments: 3 },
            Notion::EqualizedOdds,
        ] {
            for j in 0..notion.components() {
                let y = 1;
                // the trainer scales each gradient by the conditioning weight
                let w = surrogate_weight(notion, y, j);
                let mut analytic = vec![0.0; 2];
                add_surrogate_logit_grad(notion, &softmax(&z), y, j, w, &mut analytic);
                for k in 0..2 {
                    let h = 1e-6;
                    let mut zp = z;
                    zp[k] += h;
                    let mut zm = z;
                    zm[k] -= h;
                    let fd = (surrogate_value(notion, &softmax(&zp), y, j)
                        - surrogate_value(notion, &softmax(&zm), y, j))
                        / (2.0 * h);
                    assert!((analytic[k] - fd).abs() < 1e-8, "{notion} j={j} k={k}");
                }
            }
        }
    }

    #[test]
    fn wasserstein_examples() {
        assert_eq!(wasserstein_1d(&[0.3, 0.1, 0.2], &[0.2, 0.3, 0.1]).unwrap(), 0.0);
        assert!((wasserstein_1d(&[0.0, 1.0], &[1.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((wasserstein_1d(&[0.0], &[-2.5]).unwrap() - 2.5).abs() < 1e-15);
        assert!(matches!(wasserstein_1d(&[], &[1.0]), Err(FairnessError::EmptyInput)));
    }

    #[test]
    fn wasserstein_unequal_lengths() {
        // {0, 1} vs {0, 0.5, 1}: quantiles differ by 0.5 on (1/3, 1/2) and
        // by 0.5 on (1/2, 2/3) -> 0.5 * 1/3
        let w = wasserstein_1d(&[0.0, 1.0], &[0.0, 0.5, 1.0]).unwrap();
        assert!((w - 1.0 / 6.0).abs() < 1e-12);
        // duplicating a sample set leaves the distribution unchanged
        let w = wasserstein_1d(&[0.1, 0.7, 0.4], &[0.1, 0.7, 0.4, 0.1, 0.7, 0.4]).unwrap();
        assert!(w.abs() < 1e-12);
    }

    #[test]
    fn group_wasserstein_examples() {
        assert_eq!(
            max_group_wasserstein_scores(&[0.2, 0.8, 0.2, 0.8], &[0, 0, 1, 1], 2).unwrap(),
            0.0
        );
        // group 0 = {0, 0}, population = {0, 0, 1, 1}: half the mass moves by 1
        let w = max_group_wasserstein_scores(&[0.0, 0.0, 1.0, 1.0], &[0, 0, 1, 1], 2).unwrap();
        assert!((w - 0.5).abs() < 1e-15);
        assert_eq!(max_group_wasserstein_scores(&[0.3, 0.9], &[0, 0], 1).unwrap(), 0.0);
    }

    #[test]
    fn spec_validation() {
        assert!(FairnessSpec::new(Notion::DemographicParity, -0.1).validate().is_err());
        let mut s = FairnessSpec::new(Notion::DemographicParity, 0.0);
        s.multiplier_step = 0.0;
        assert!(s.validate().is_err());
    }
}
