//! Datasets of `(features, group, label)` rows and the operations that carve
//! them up: CSV ingestion, standardization, train/eval/test splitting,
//! teacher sharding, student-pool construction and a synthetic generator
//! with a controllable group bias.

use std::collections::HashSet;
use std::fs::File;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::rng::seeded;

/// Smallest standard deviation used when scaling a feature.
pub const STD_FLOOR: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("column lengths disagree: {features} feature rows, {groups} groups, {labels} labels")]
    Shape {
        features: usize,
        groups: usize,
        labels: usize,
    },
    #[error("group value {value} at row {row} is outside [0, {count})")]
    GroupOutOfRange {
        row: usize,
        value: usize,
        count: usize,
    },
    #[error("label value {value} at row {row} is outside [0, {count})")]
    LabelOutOfRange {
        row: usize,
        value: usize,
        count: usize,
    },
    #[error("at least two {what} are required, got {count}")]
    TooFewCategories { what: &'static str, count: usize },
    #[error("file not found: {0}")]
    MissingFile(PathBuf),
    #[error("file is empty: {0}")]
    EmptyFile(PathBuf),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("column `{0}` is not present in the header")]
    MissingColumn(String),
    #[error("line {line}: value `{value}` is not a declared category of column `{column}`")]
    UnknownCategory {
        column: String,
        value: String,
        line: u64,
    },
    #[error("line {line}: value `{value}` in numeric column `{column}` is not a number")]
    NonNumeric {
        column: String,
        value: String,
        line: u64,
    },
    #[error("feature dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0}")]
    InvalidSplit(String),
    #[error("dataset has {n} rows, need at least {needed}")]
    TooSmall { n: usize, needed: usize },
    #[error("group {group} has {available} rows; {shards} shards with {per_shard} each need {}", shards * per_shard)]
    InfeasibleShards {
        group: usize,
        available: usize,
        shards: usize,
        per_shard: usize,
    },
    #[error("student pool must contain at least one row")]
    EmptyPool,
    #[error("requested {requested} pool rows from a source of {available}")]
    PoolTooLarge { requested: usize, available: usize },
    #[error("the {0} column of this pool is hidden")]
    HiddenAttribute(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Rows of `(X, A, Y)`.
///
/// `row_ids` record provenance: the index of each row in the dataset it was
/// originally built from. Subsets keep their parent's ids, which lets callers
/// check that two derived datasets are disjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    groups: Vec<usize>,
    labels: Vec<usize>,
    group_count: usize,
    label_count: usize,
    row_ids: Vec<usize>,
    clusters: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(
        features: Matrix,
        groups: Vec<usize>,
        labels: Vec<usize>,
        group_count: usize,
        label_count: usize,
    ) -> Result<Self, DataError> {
        if group_count < 2 {
            return Err(DataError::TooFewCategories {
                what: "groups",
                count: group_count,
            });
        }
        if label_count < 2 {
            return Err(DataError::TooFewCategories {
                what: "labels",
                count: label_count,
            });
        }
        if features.rows() != groups.len() || groups.len() != labels.len() {
            return Err(DataError::Shape {
                features: features.rows(),
                groups: groups.len(),
                labels: labels.len(),
            });
        }
        check_range(&groups, group_count).map_err(|(row, value)| DataError::GroupOutOfRange {
            row,
            value,
            count: group_count,
        })?;
        check_range(&labels, label_count).map_err(|(row, value)| DataError::LabelOutOfRange {
            row,
            value,
            count: label_count,
        })?;
        let row_ids = (0..groups.len()).collect();
        Ok(Self {
            features,
            groups,
            labels,
            group_count,
            label_count,
            row_ids,
            clusters: None,
        })
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn groups(&self) -> &[usize] {
        &self.groups
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn group_count(&self) -> usize {
        self.group_count
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    /// Latent cluster of each row, when the generator knows it.
    pub fn clusters(&self) -> Option<&[usize]> {
        self.clusters.as_deref()
    }

    /// Number of rows in each group.
    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.group_count];
        for &g in &self.groups {
            sizes[g] += 1;
        }
        sizes
    }

    /// The listed rows, in the given order. Provenance ids are carried over.
    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(idx),
            groups: idx.iter().map(|&i| self.groups[i]).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            group_count: self.group_count,
            label_count: self.label_count,
            row_ids: idx.iter().map(|&i| self.row_ids[i]).collect(),
            clusters: self
                .clusters
                .as_ref()
                .map(|c| idx.iter().map(|&i| c[i]).collect()),
        }
    }

    /// Same rows with the group column replaced.
    pub fn with_groups(&self, groups: Vec<usize>) -> Result<Self, DataError> {
        if groups.len() != self.len() {
            return Err(DataError::Shape {
                features: self.len(),
                groups: groups.len(),
                labels: self.len(),
            });
        }
        check_range(&groups, self.group_count).map_err(|(row, value)| {
            DataError::GroupOutOfRange {
                row,
                value,
                count: self.group_count,
            }
        })?;
        Ok(Self {
            groups,
            ..self.clone()
        })
    }

    /// Same rows with the label column replaced.
    pub fn with_labels(&self, labels: Vec<usize>, label_count: usize) -> Result<Self, DataError> {
        if label_count < 2 {
            return Err(DataError::TooFewCategories {
                what: "labels",
                count: label_count,
            });
        }
        if labels.len() != self.len() {
            return Err(DataError::Shape {
                features: self.len(),
                groups: self.len(),
                labels: labels.len(),
            });
        }
        check_range(&labels, label_count).map_err(|(row, value)| DataError::LabelOutOfRange {
            row,
            value,
            count: label_count,
        })?;
        Ok(Self {
            labels,
            label_count,
            ..self.clone()
        })
    }

    /// A copy whose label column is the group column, for training models
    /// that predict the group attribute.
    pub fn groups_as_labels(&self) -> Self {
        Self {
            labels: self.groups.clone(),
            label_count: self.group_count,
            ..self.clone()
        }
    }

    fn with_features(&self, features: Matrix) -> Self {
        Self {
            features,
            ..self.clone()
        }
    }

    /// Rows whose provenance id is not in `exclude`.
    pub fn without_ids(&self, exclude: &HashSet<usize>) -> Self {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| !exclude.contains(&self.row_ids[i]))
            .collect();
        self.subset(&keep)
    }

    /// `true` when no provenance id appears in both datasets.
    pub fn is_disjoint_from(&self, other: &Dataset) -> bool {
        let ids: HashSet<usize> = self.row_ids.iter().copied().collect();
        other.row_ids.iter().all(|i| !ids.contains(i))
    }
}

fn check_range(values: &[usize], count: usize) -> Result<(), (usize, usize)> {
    match values.iter().position(|&v| v >= count) {
        Some(row) => Err((row, values[row])),
        None => Ok(()),
    }
}

/// Unlabeled-by-group data used to train the student.
///
/// The group column is never handed out through the public API; pipelines
/// see it only through the privacy mechanisms, and the evaluation code in
/// this crate reads it through [`StudentPool::evaluation_groups`]. Labels can
/// be hidden as well for the label-protection mode of the fair-teachers
/// pipeline.
#[derive(Debug, Clone)]
pub struct StudentPool {
    data: Dataset,
    labels_hidden: bool,
}

impl StudentPool {
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn features(&self) -> &Matrix {
        self.data.features()
    }

    pub fn label_count(&self) -> usize {
        self.data.label_count()
    }

    pub fn group_count(&self) -> usize {
        self.data.group_count()
    }

    pub fn row_ids(&self) -> &[usize] {
        self.data.row_ids()
    }

    /// Always fails: the pool's group attribute is private.
    pub fn groups(&self) -> Result<&[usize], DataError> {
        Err(DataError::HiddenAttribute("group"))
    }

    pub fn labels(&self) -> Result<&[usize], DataError> {
        if self.labels_hidden {
            Err(DataError::HiddenAttribute("label"))
        } else {
            Ok(self.data.labels())
        }
    }

    pub fn labels_hidden(&self) -> bool {
        self.labels_hidden
    }

    /// Copy of this pool with the label column hidden as well.
    pub fn hide_labels(&self) -> Self {
        Self {
            data: self.data.clone(),
            labels_hidden: true,
        }
    }

    /// Pool rows with `labels` and `groups` substituted (typically noisy
    /// votes), as a regular training dataset.
    pub fn to_training_set(
        &self,
        groups: Option<Vec<usize>>,
        labels: Option<Vec<usize>>,
    ) -> Result<Dataset, DataError> {
        let mut out = self.data.clone();
        // The true columns must not leak into the training set.
        if groups.is_none() {
            out.groups = vec![0; out.len()];
        }
        if let Some(g) = groups {
            out = out.with_groups(g)?;
        }
        match labels {
            Some(l) => out = out.with_labels(l, self.data.label_count)?,
            None if self.labels_hidden => return Err(DataError::HiddenAttribute("label")),
            None => {}
        }
        out.clusters = None;
        Ok(out)
    }

    /// True group column, reserved for evaluation code inside this crate.
    pub(crate) fn evaluation_groups(&self) -> &[usize] {
        self.data.groups()
    }

    pub(crate) fn is_disjoint_from(&self, other: &Dataset) -> bool {
        self.data.is_disjoint_from(other)
    }
}

// ---------------------------------------------------------------------------
// CSV ingestion

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalColumn {
    pub name: String,
    pub categories: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureColumn {
    Numeric { name: String },
    Categorical { name: String, categories: Vec<String> },
}

impl FeatureColumn {
    fn name(&self) -> &str {
        match self {
            Self::Numeric { name } | Self::Categorical { name, .. } => name,
        }
    }
}

/// Column roles of a CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub group: CategoricalColumn,
    pub label: CategoricalColumn,
    pub features: Vec<FeatureColumn>,
}

fn category_index(col: &str, cats: &[String], value: &str, line: u64) -> Result<usize, DataError> {
    cats.iter()
        .position(|c| c == value)
        .ok_or_else(|| DataError::UnknownCategory {
            column: col.to_string(),
            value: value.to_string(),
            line,
        })
}

/// Reads a headed CSV file. Categorical features are one-hot encoded in
/// declared category order; group and label values are coded by their
/// position in the declared category lists.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(DataError::MissingFile(path.to_path_buf()));
    }
    if schema.features.is_empty() {
        return Err(DataError::InvalidParameter(
            "schema needs at least one feature column".into(),
        ));
    }
    let file = File::open(path)?;
    if file.metadata()?.len() == 0 {
        return Err(DataError::EmptyFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header = reader.headers()?.clone();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let group_col = find(&schema.group.name)?;
    let label_col = find(&schema.label.name)?;
    let feature_cols = schema
        .features
        .iter()
        .map(|f| find(f.name()))
        .collect::<Result<Vec<_>, _>>()?;
    let width: usize = schema
        .features
        .iter()
        .map(|f| match f {
            FeatureColumn::Numeric { .. } => 1,
            FeatureColumn::Categorical { categories, .. } => categories.len(),
        })
        .sum();

    let mut values = Vec::new();
    let mut groups = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        groups.push(category_index(
            &schema.group.name,
            &schema.group.categories,
            &record[group_col],
            line,
        )?);
        labels.push(category_index(
            &schema.label.name,
            &schema.label.categories,
            &record[label_col],
            line,
        )?);
        for (spec, &col) in schema.features.iter().zip(&feature_cols) {
            let raw = &record[col];
            match spec {
                FeatureColumn::Numeric { name } => {
                    let v: f64 = raw.parse().map_err(|_| DataError::NonNumeric {
                        column: name.clone(),
                        value: raw.to_string(),
                        line,
                    })?;
                    values.push(v);
                }
                FeatureColumn::Categorical { name, categories } => {
                    let hot = category_index(name, categories, raw, line)?;
                    values.extend((0..categories.len()).map(|k| if k == hot { 1.0 } else { 0.0 }));
                }
            }
        }
    }
    if groups.is_empty() {
        return Err(DataError::EmptyFile(path.to_path_buf()));
    }
    let features = Matrix::from_vec(groups.len(), width, values)
        .expect("every record contributes exactly `width` values");
    Dataset::new(
        features,
        groups,
        labels,
        schema.group.categories.len(),
        schema.label.categories.len(),
    )
}

/// Writes a dataset with numeric features `x0..x{d-1}`, a `group` column and
/// a `label` column, all integer coded.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<(), DataError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..data.dim()).map(|j| format!("x{j}")).collect();
    header.push("group".into());
    header.push("label".into());
    w.write_record(&header)?;
    for i in 0..data.len() {
        let mut rec: Vec<String> = data.features().row(i).iter().map(|v| v.to_string()).collect();
        rec.push(data.groups()[i].to_string());
        rec.push(data.labels()[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Schema matching the files produced by [`write_csv`].
pub fn integer_coded_schema(dim: usize, group_count: usize, label_count: usize) -> CsvSchema {
    let cats = |k: usize| (0..k).map(|v| v.to_string()).collect();
    CsvSchema {
        group: CategoricalColumn {
            name: "group".into(),
            categories: cats(group_count),
        },
        label: CategoricalColumn {
            name: "label".into(),
            categories: cats(label_count),
        },
        features: (0..dim)
            .map(|j| FeatureColumn::Numeric {
                name: format!("x{j}"),
            })
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Standardization

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizeStats {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl StandardizeStats {
    /// Per-feature mean and population standard deviation, floored at
    /// [`STD_FLOOR`].
    pub fn fit(features: &Matrix) -> Self {
        let n = features.rows();
        let d = features.cols();
        let mut means = vec![0.0; d];
        let mut stds = vec![STD_FLOOR; d];
        if n == 0 {
            return Self { means, stds };
        }
        for j in 0..d {
            let col = features.column(j);
            let first = col[0];
            if col.iter().all(|&v| v == first) {
                means[j] = first;
                continue;
            }
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            means[j] = mean;
            stds[j] = var.sqrt().max(STD_FLOOR);
        }
        Self { means, stds }
    }

    pub fn apply(&self, features: &Matrix) -> Result<Matrix, DataError> {
        if features.cols() != self.means.len() {
            return Err(DataError::DimensionMismatch {
                expected: self.means.len(),
                found: features.cols(),
            });
        }
        let mut out = features.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                // features that were constant when fitted carry no signal
                *v = if self.stds[j] <= STD_FLOOR {
                    0.0
                } else {
                    (*v - self.means[j]) / self.stds[j]
                };
            }
        }
        Ok(out)
    }
}

/// Scales features to zero mean and unit variance. With `stats == None`
/// the statistics are fitted on `data` first; otherwise they are only applied.
pub fn standardize(
    data: &Dataset,
    stats: Option<&StandardizeStats>,
) -> Result<(Dataset, StandardizeStats), DataError> {
    let stats = match stats {
        Some(s) => s.clone(),
        None => StandardizeStats::fit(data.features()),
    };
    let scaled = stats.apply(data.features())?;
    Ok((data.with_features(scaled), stats))
}

// ---------------------------------------------------------------------------
// Splitting

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    pub eval: f64,
    pub test: f64,
    pub seed: u64,
    /// Permit parts that receive no rows.
    #[serde(default)]
    pub allow_empty: bool,
}

impl SplitSpec {
    /// 70/5/25 train/eval/test.
    pub fn standard(seed: u64) -> Self {
        Self {
            train: 0.7,
            eval: 0.05,
            test: 0.25,
            seed,
            allow_empty: false,
        }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let fr = [self.train, self.eval, self.test];
        if fr.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(DataError::InvalidSplit(format!(
                "fractions must be nonnegative, got {fr:?}"
            )));
        }
        if (fr.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(DataError::InvalidSplit(format!(
                "fractions must sum to 1, got {fr:?}"
            )));
        }
        Ok(())
    }

    /// Part sizes by largest remainder; ties go to the earlier part.
    pub fn sizes(&self, n: usize) -> [usize; 3] {
        let fr = [self.train, self.eval, self.test];
        let raw: Vec<f64> = fr.iter().map(|f| f * n as f64).collect();
        let mut sizes = [0usize; 3];
        for (s, r) in sizes.iter_mut().zip(&raw) {
            *s = r.floor() as usize;
        }
        let assigned: usize = sizes.iter().sum();
        let mut order = [0usize, 1, 2];
        // stable sort keeps train before eval before test on equal remainders
        order.sort_by(|&a, &b| {
            let ra = raw[a] - raw[a].floor();
            let rb = raw[b] - raw[b].floor();
            rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal)
        });
        for &k in order.iter().take(n.saturating_sub(assigned)) {
            sizes[k] += 1;
        }
        sizes
    }
}

/// Shuffles and partitions into train, eval and test.
pub fn split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset), DataError> {
    spec.validate()?;
    let n = data.len();
    if n < 10 {
        return Err(DataError::TooSmall { n, needed: 10 });
    }
    let sizes = spec.sizes(n);
    if !spec.allow_empty && sizes.contains(&0) {
        return Err(DataError::InvalidSplit(format!(
            "{n} rows give part sizes {sizes:?}; every part needs at least one row"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seeded(spec.seed));
    let (a, rest) = idx.split_at(sizes[0]);
    let (b, c) = rest.split_at(sizes[1]);
    Ok((data.subset(a), data.subset(b), data.subset(c)))
}

/// Partitions `train` into `k` disjoint shards whose sizes differ by at most
/// one.
///
/// With `min_per_group == 0` rows are shuffled and chunked. Otherwise rows
/// are dealt round-robin group by group, so that every shard holds at least
/// `min_per_group` rows of every group.
pub fn shard_teachers(
    train: &Dataset,
    k: usize,
    seed: u64,
    min_per_group: usize,
) -> Result<Vec<Dataset>, DataError> {
    if k == 0 {
        return Err(DataError::InvalidParameter("need at least one shard".into()));
    }
    let n = train.len();
    if n < k {
        return Err(DataError::TooSmall { n, needed: k });
    }
    let mut rng = seeded(seed);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::with_capacity(n / k + 1); k];
    if min_per_group == 0 {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let base = n / k;
        let extra = n % k;
        let mut start = 0;
        for (s, bucket) in buckets.iter_mut().enumerate() {
            let len = base + usize::from(s < extra);
            bucket.extend_from_slice(&idx[start..start + len]);
            start += len;
        }
    } else {
        let mut by_group: Vec<Vec<usize>> = vec![Vec::new(); train.group_count()];
        for (i, &g) in train.groups().iter().enumerate() {
            by_group[g].push(i);
        }
        for (g, rows) in by_group.iter().enumerate() {
            if rows.len() < k * min_per_group {
                return Err(DataError::InfeasibleShards {
                    group: g,
                    available: rows.len(),
                    shards: k,
                    per_shard: min_per_group,
                });
            }
        }
        let mut dealt = 0usize;
        for rows in by_group.iter_mut() {
            rows.shuffle(&mut rng);
            for &i in rows.iter() {
                buckets[dealt % k].push(i);
                dealt += 1;
            }
        }
    }
    Ok(buckets.iter().map(|b| train.subset(b)).collect())
}

/// Samples `s` rows without replacement and returns them as a pool together
/// with the remaining rows of `source`.
pub fn split_pool(source: &Dataset, s: usize, seed: u64) -> Result<(StudentPool, Dataset), DataError> {
    if s == 0 {
        return Err(DataError::EmptyPool);
    }
    if s > source.len() {
        return Err(DataError::PoolTooLarge {
            requested: s,
            available: source.len(),
        });
    }
    let mut idx: Vec<usize> = (0..source.len()).collect();
    idx.shuffle(&mut seeded(seed));
    let (picked, rest) = idx.split_at(s);
    let mut rest = rest.to_vec();
    rest.sort_unstable();
    let pool = StudentPool {
        data: source.subset(picked),
        labels_hidden: false,
    };
    Ok((pool, source.subset(&rest)))
}

/// Samples a student pool of `s` rows whose group attribute is hidden.
pub fn make_student_pool(source: &Dataset, s: usize, seed: u64) -> Result<StudentPool, DataError> {
    split_pool(source, s, seed).map(|(pool, _)| pool)
}

// ---------------------------------------------------------------------------
// Synthetic generator

/// Standard deviation of the label score carried by the non-group features.
pub const SYNTH_SCORE_SCALE: f64 = 2.0;
/// Distance between the first and last group centers on feature 0.
pub const SYNTH_GROUP_SPREAD: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    /// Shift of the label score between the first and last group.
    pub gap: f64,
    /// Standard deviation of the label noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            n: 5000,
            d: 6,
            m: 2,
            gap: 3.0,
            noise: 2.0,
            seed: 0,
        }
    }
}

/// Centered position of group `a` in `[-0.5, 0.5]`.
pub fn synth_group_offset(a: usize, m: usize) -> f64 {
    a as f64 / (m - 1) as f64 - 0.5
}

/// Noise-free label score of a synthetic row: the linear score of features
/// `1..d` plus the group shift.
pub fn synth_clean_score(row: &[f64], group: usize, m: usize, gap: f64) -> f64 {
    let w = SYNTH_SCORE_SCALE / ((row.len() - 1) as f64).sqrt();
    w * row[1..].iter().sum::<f64>() + gap * synth_group_offset(group, m)
}

/// Group-conditional Gaussian clusters with a group-dependent label rate.
///
/// Groups are balanced (`i mod m`, shuffled). Feature 0 is centered at
/// `SYNTH_GROUP_SPREAD * offset(a)` with unit noise, so it reveals the group;
/// features `1..d` are standard normal and independent of the group. The
/// label is `1` when `clean_score + noise * N(0, 1) > 0`, so at `gap == 0`
/// labels are independent of the group.
pub fn synth_biased(p: &SynthParams) -> Result<Dataset, DataError> {
    if p.m < 2 {
        return Err(DataError::TooFewCategories {
            what: "groups",
            count: p.m,
        });
    }
    if p.d < 2 {
        return Err(DataError::InvalidParameter(format!("need d >= 2, got {}", p.d)));
    }
    if p.n < 4 * p.m {
        return Err(DataError::TooSmall {
            n: p.n,
            needed: 4 * p.m,
        });
    }
    if !(p.gap >= 0.0 && p.gap.is_finite()) || !(p.noise >= 0.0 && p.noise.is_finite()) {
        return Err(DataError::InvalidParameter(format!(
            "gap and noise must be finite and nonnegative, got {} and {}",
            p.gap, p.noise
        )));
    }
    let mut rng = seeded(p.seed);
    let mut groups: Vec<usize> = (0..p.n).map(|i| i % p.m).collect();
    groups.shuffle(&mut rng);
    let mut values = Vec::with_capacity(p.n * p.d);
    let mut labels = Vec::with_capacity(p.n);
    for &a in &groups {
        let start = values.len();
        let center = SYNTH_GROUP_SPREAD * synth_group_offset(a, p.m);
        values.push(center + rng.sample::<f64, _>(StandardNormal));
        for _ in 1..p.d {
            values.push(rng.sample::<f64, _>(StandardNormal));
        }
        let score = synth_clean_score(&values[start..], a, p.m, p.gap)
            + p.noise * rng.sample::<f64, _>(StandardNormal);
        labels.push(usize::from(score > 0.0));
    }
    let features = Matrix::from_vec(p.n, p.d, values).expect("n * d values");
    let mut data = Dataset::new(features, groups.clone(), labels, p.m, 2)?;
    data.clusters = Some(groups);
    Ok(data)
}
