//! Experiment configuration, read from TOML.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sfpate::data::{self, CsvSchema, Dataset, SynthParams};
use sfpate::fairness::{FairnessSpec, Notion};
use sfpate::model::TrainConfig;
use sfpate::pate::{Method, PipelineConfig};
use sfpate::theory::DEFAULT_B;

use crate::CliError;

/// Synthetic data parameters. Without an explicit `seed` the data are
/// regenerated from each run seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSource {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub gap: f64,
    pub noise: f64,
    pub seed: Option<u64>,
}

impl Default for SynthSource {
    fn default() -> Self {
        let p = SynthParams::default();
        Self {
            n: p.n,
            d: p.d,
            m: p.m,
            gap: p.gap,
            noise: p.noise,
            seed: None,
        }
    }
}

impl SynthSource {
    pub fn params(&self, run_seed: u64) -> SynthParams {
        SynthParams {
            n: self.n,
            d: self.d,
            m: self.m,
            gap: self.gap,
            noise: self.noise,
            seed: self.seed.unwrap_or(run_seed),
        }
    }
}

/// Where the rows come from; `kind` defaults to `synthetic`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Synthetic(SynthSource),
    Csv { path: PathBuf, schema: CsvSchema },
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Synthetic(SynthSource::default())
    }
}

impl DatasetSource {
    pub fn load(&self, run_seed: u64) -> Result<Dataset, CliError> {
        Ok(match self {
            DatasetSource::Synthetic(s) => data::synth_biased(&s.params(run_seed))?,
            DatasetSource::Csv { path, schema } => data::load_csv(path, schema)?,
        })
    }
}

/// Settings of the bound-verification suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoryConfig {
    /// Data for every trial; the group count is overridden by `groups`.
    pub data: SynthSource,
    /// Randomized-response budgets of the group-transfer trials.
    pub rr_epsilons: Vec<f64>,
    /// Group counts of the group-transfer trials.
    pub groups: Vec<usize>,
    /// Ensemble size of the vote-transfer trials.
    pub teachers: usize,
    /// Vote noise scales of the vote-transfer trials.
    pub vote_sigmas: Vec<f64>,
    /// Noise draws averaged per vote-transfer trial.
    pub vote_draws: usize,
    pub notion: Notion,
    pub b: f64,
    pub train: TrainConfig,
}

impl Default for TheoryConfig {
    fn default() -> Self {
        Self {
            data: SynthSource::default(),
            rr_epsilons: vec![3f64.ln(), 1.0, 2.0],
            groups: vec![2, 3],
            teachers: 5,
            vote_sigmas: vec![0.0, 1.0, 4.0],
            vote_draws: 20,
            notion: Notion::DemographicParity,
            b: DEFAULT_B,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub methods: Vec<Method>,
    /// Privacy budgets of the sweep, strictly increasing.
    pub epsilons: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Number of teachers.
    pub teachers: usize,
    /// Student pool size.
    pub pool_size: usize,
    pub lambda: f64,
    pub delta: f64,
    pub fairness: FairnessSpec,
    pub train: TrainConfig,
    pub teacher_train: TrainConfig,
    pub label_protection: bool,
    /// Concurrent sweep cells; 0 uses every core.
    pub workers: usize,
    pub output: PathBuf,
    pub theory: TheoryConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let p = PipelineConfig::default();
        Self {
            dataset: DatasetSource::default(),
            methods: vec![Method::SfS, Method::SfT],
            epsilons: vec![1.0],
            seeds: vec![0],
            teachers: p.teachers,
            pool_size: p.pool_size,
            lambda: p.lambda,
            delta: p.delta,
            fairness: p.fairness,
            train: p.train,
            teacher_train: p.teacher_train,
            label_protection: p.label_protection,
            workers: 0,
            output: PathBuf::from("results.csv"),
            theory: TheoryConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parses TOML text and applies `key.path=value` overrides before
    /// deserializing. Override values are read as TOML, falling back to a
    /// bare string.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut table: toml::Table = text.parse().map_err(|e| CliError::Config(format!("{e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        if let Some(toml::Value::Table(d)) = table.get_mut("dataset") {
            d.entry("kind").or_insert_with(|| "synthetic".into());
        }
        let config: Self = table.try_into().map_err(|e| CliError::Config(format!("{e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, overrides)
    }

    /// Pipeline settings for one run.
    pub fn pipeline(&self, seed: u64, epsilon: f64) -> PipelineConfig {
        PipelineConfig {
            teachers: self.teachers,
            pool_size: self.pool_size,
            lambda: self.lambda,
            fairness: self.fairness.clone(),
            sigma: None,
            target_epsilon: Some(epsilon),
            delta: self.delta,
            train: self.train.clone(),
            teacher_train: self.teacher_train.clone(),
            seed,
            label_protection: self.label_protection,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        if self.methods.iter().collect::<HashSet<_>>().len() != self.methods.len() {
            return bad("methods must not repeat".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        if self.seeds.iter().collect::<HashSet<_>>().len() != self.seeds.len() {
            return bad("seeds must not repeat".into());
        }
        if self.epsilons.is_empty() {
            return bad("epsilons must not be empty".into());
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0)) {
            return bad(format!("epsilons must be > 0, got {e}"));
        }
        if self.epsilons.windows(2).any(|w| w[0] >= w[1]) {
            return bad("epsilons must be strictly increasing".into());
        }
        self.pipeline(self.seeds[0], self.epsilons[0])
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let t = &self.theory;
        if t.rr_epsilons.is_empty() || t.groups.is_empty() || t.vote_sigmas.is_empty() {
            return bad("theory grids must not be empty".into());
        }
        if t.rr_epsilons.iter().any(|e| !(*e >= 0.0)) {
            return bad("theory.rr_epsilons must be >= 0".into());
        }
        if t.groups.iter().any(|&m| m < 2) {
            return bad("theory.groups must be >= 2".into());
        }
        if t.vote_sigmas.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return bad("theory.vote_sigmas must be finite and >= 0".into());
        }
        if t.teachers == 0 || t.vote_draws == 0 {
            return bad("theory.teachers and theory.vote_draws must be >= 1".into());
        }
        if !(t.b >= 0.0 && t.b.is_finite()) {
            return bad(format!("theory.b must be >= 0, got {}", t.b));
        }
        t.train.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Sets `a.b.c=value` inside `table`, creating intermediate tables.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{spec}` is not of the form key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("bad override key `{key}`")));
    }
    let (last, path) = parts.split_last().expect("split yields at least one part");
    let mut node = table;
    for p in path {
        let entry = node
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override key `{key}`: `{p}` is not a table")))?;
    }
    node.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_defaults() {
        let c = ExperimentConfig::from_toml("", &[]).unwrap();
        assert_eq!(c, ExperimentConfig::default());
    }

    #[test]
    fn parses_full_config() {
        let text = r#"
            methods = ["sf_s", "baseline_m"]
            epsilons = [0.5, 1.0, 2.0]
            seeds = [1, 2]
            teachers = 20
            output = "out.csv"
            [dataset]
            kind = "synthetic"
            n = 1000
            gap = 2.0
            [fairness]
            notion = "eo"
            alpha = 0.05
            [train]
            epochs = 10
        "#;
        let c = ExperimentConfig::from_toml(text, &[]).unwrap();
        assert_eq!(c.methods, vec![Method::SfS, Method::BaselineM]);
        assert_eq!(c.teachers, 20);
        assert_eq!(c.fairness.notion, Notion::EqualizedOdds);
        assert_eq!(c.train.epochs, 10);
        assert_eq!(c.train.batch_size, 32);
        match c.dataset {
            DatasetSource::Synthetic(s) => {
                assert_eq!(s.n, 1000);
                assert_eq!(s.m, 2);
                assert_eq!(s.seed, None);
            }
            other => panic!("unexpected source {other:?}"),
        }
    }

    #[test]
    fn overrides_win() {
        let c = ExperimentConfig::from_toml(
            "teachers = 20\n[train]\nepochs = 10\n",
            &[
                "teachers=7".into(),
                "train.epochs=3".into(),
                "dataset.n=300".into(),
                "methods=[\"sf_t\"]".into(),
                "output=run.csv".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.teachers, 7);
        assert_eq!(c.train.epochs, 3);
        assert_eq!(c.methods, vec![Method::SfT]);
        assert_eq!(c.output, PathBuf::from("run.csv"));
        match c.dataset {
            DatasetSource::Synthetic(s) => assert_eq!(s.n, 300),
            other => panic!("unexpected source {other:?}"),
        }
    }

    #[test]
    fn rejects_invalid_grids() {
        for text in [
            "epsilons = [0.0, 1.0]",
            "epsilons = [2.0, 1.0]",
            "epsilons = [1.0, 1.0]",
            "epsilons = []",
            "seeds = []",
            "methods = []",
            "teachers = 0",
            "delta = 1.5",
            "unknown_key = 1",
            "methods = [\"pate\"]",
        ] {
            let err = ExperimentConfig::from_toml(text, &[]).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}: {err}");
        }
    }

    #[test]
    fn malformed_override_is_config_error() {
        assert_eq!(ExperimentConfig::from_toml("", &["teachers".into()]).unwrap_err().exit_code(), 2);
        assert_eq!(
            ExperimentConfig::from_toml("teachers = 3", &["teachers.x=1".into()])
                .unwrap_err()
                .exit_code(),
            2
        );
    }
}
