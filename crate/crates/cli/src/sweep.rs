//! Privacy sweeps: every `(method, ε, seed)` cell plus the non-private
//! references of each seed, one CSV row per run.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::PathBuf;
use std::sync::mpsc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sfpate::data::{self, Dataset, SplitSpec, StudentPool};
use sfpate::pate::{self, Method, RunReport};

use crate::config::{DatasetSource, ExperimentConfig};
use crate::CliError;

pub const COLUMNS: [&str; 7] = ["method", "epsilon", "accuracy", "xi", "wasserstein", "seed", "wall_ms"];

/// Prefix of the line appended when a sweep stops on an error. Readers
/// treat it as a comment.
pub const PARTIAL_MARKER: &str = "#partial";

/// Methods run once per seed, whatever the method list says.
pub const REFERENCES: [Method; 2] = [Method::NonprivateFair, Method::NonprivateErm];

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: Method,
    pub epsilon: f64,
    pub accuracy: f64,
    pub xi: f64,
    pub wasserstein: Option<f64>,
    pub seed: u64,
    pub wall_ms: u64,
}

impl ReportRow {
    /// Row of `r` under its grid budget `epsilon`; the accountant's own
    /// value sits at or below it.
    pub fn new(r: &RunReport, epsilon: f64) -> Self {
        Self {
            method: r.method,
            epsilon,
            accuracy: r.accuracy,
            xi: r.xi,
            wasserstein: r.wasserstein,
            seed: r.seed,
            wall_ms: u64::try_from(r.wall_ms).unwrap_or(u64::MAX),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub method: Method,
    /// Infinite for the references.
    pub epsilon: f64,
    pub seed: u64,
}

/// Cells in output order: per seed, the references first, then the private
/// methods for each ε in grid order.
pub fn plan(config: &ExperimentConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &seed in &config.seeds {
        for method in REFERENCES {
            cells.push(Cell {
                method,
                epsilon: f64::INFINITY,
                seed,
            });
        }
        for &epsilon in &config.epsilons {
            for &method in config.methods.iter().filter(|m| m.is_private()) {
                cells.push(Cell { method, epsilon, seed });
            }
        }
    }
    cells
}

/// Standardized train/test split of one seed, with the student pool carved
/// out of the training part.
#[derive(Debug, Clone)]
pub struct PreparedSplit {
    pub train: Dataset,
    /// `train` without the pool rows; the teachers' data.
    pub rest: Dataset,
    pub pool: StudentPool,
    pub test: Dataset,
}

impl PreparedSplit {
    pub fn new(source: &DatasetSource, pool_size: usize, seed: u64) -> Result<Self, CliError> {
        let all = source.load(seed)?;
        let (train, _eval, test) = data::split(&all, &SplitSpec::standard(seed))?;
        let (train, stats) = data::standardize(&train, None)?;
        let (test, _) = data::standardize(&test, Some(&stats))?;
        let (pool, rest) = data::split_pool(&train, pool_size, seed)?;
        Ok(Self { train, rest, pool, test })
    }
}

pub fn run_cell(config: &ExperimentConfig, split: &PreparedSplit, cell: &Cell) -> Result<RunReport, CliError> {
    let pipeline = config.pipeline(cell.seed, cell.epsilon);
    let train = match cell.method {
        Method::SfS | Method::SfT => &split.rest,
        _ => &split.train,
    };
    Ok(pate::run_method(cell.method, train, &split.pool, &split.test, &pipeline)?)
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub reports: Vec<RunReport>,
    pub path: PathBuf,
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))
}

/// Appends the marker as a single unquoted field.
fn write_marker<W: std::io::Write>(
    writer: &mut csv::Writer<W>,
    written: usize,
    total: usize,
    error: &CliError,
) -> Result<(), CliError> {
    let reason: String = error
        .to_string()
        .chars()
        .map(|c| if matches!(c, ',' | '"' | '\n' | '\r') { ' ' } else { c })
        .collect();
    writer.write_record([format!("{PARTIAL_MARKER} {written} of {total} rows written: {reason}")])?;
    writer.flush()?;
    Ok(())
}

/// Runs every cell of the sweep and writes the rows to `config.output` in
/// plan order. Cells run concurrently on `config.workers` threads while a
/// single writer appends the finished rows.
///
/// On the first failing cell the remaining cells are abandoned, the rows
/// finished so far are kept, a [`PARTIAL_MARKER`] line is appended and the
/// error is returned.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutcome, CliError> {
    config.validate()?;
    let pool = thread_pool(config.workers)?;
    let cells = plan(config);
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_writer(File::create(&config.output)?);
    writer.write_record(COLUMNS)?;
    writer.flush()?;

    let splits: Result<Vec<PreparedSplit>, CliError> = pool.install(|| {
        config
            .seeds
            .par_iter()
            .map(|&seed| PreparedSplit::new(&config.dataset, config.pool_size, seed))
            .collect()
    });
    let splits = match splits {
        Ok(s) => s,
        Err(e) => {
            write_marker(&mut writer, 0, cells.len(), &e)?;
            return Err(e);
        }
    };
    let split_of: BTreeMap<u64, &PreparedSplit> = config.seeds.iter().copied().zip(&splits).collect();

    let (tx, rx) = mpsc::channel::<(usize, Result<RunReport, CliError>)>();
    let total = cells.len();
    let (reports, failure) = std::thread::scope(|scope| {
        let cells = &cells;
        let sink = scope.spawn(move || -> Result<(Vec<RunReport>, Option<CliError>), CliError> {
            let mut pending = BTreeMap::new();
            let mut written = Vec::with_capacity(total);
            let mut failure = None;
            for (i, result) in rx {
                match result {
                    Ok(report) => {
                        pending.insert(i, report);
                    }
                    Err(e) => {
                        failure.get_or_insert(e);
                    }
                }
                while let Some(report) = pending.remove(&written.len()) {
                    writer.serialize(ReportRow::new(&report, cells[written.len()].epsilon))?;
                    written.push(report);
                }
                writer.flush()?;
            }
            if let Some(e) = &failure {
                write_marker(&mut writer, written.len(), total, e)?;
            }
            writer.flush()?;
            Ok((written, failure))
        });
        // Errors travel through the channel; the closure's own result only
        // stops the remaining cells.
        let _ = pool.install(|| {
            cells.par_iter().enumerate().try_for_each_with(tx, |tx, (i, cell)| {
                let result = run_cell(config, split_of[&cell.seed], cell);
                let failed = result.is_err();
                let _ = tx.send((i, result));
                if failed {
                    Err(())
                } else {
                    Ok(())
                }
            })
        });
        sink.join().expect("csv writer thread panicked")
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(SweepOutcome {
            reports,
            path: config.output.clone(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_counts_cells_and_references() {
        let config = ExperimentConfig {
            methods: vec![Method::SfS, Method::BaselineM],
            epsilons: vec![0.5, 1.0, 2.0],
            seeds: vec![0, 1, 2, 3, 4],
            ..Default::default()
        };
        let cells = plan(&config);
        assert_eq!(cells.len(), 30 + 10);
        assert_eq!(cells.iter().filter(|c| c.epsilon.is_infinite()).count(), 10);
        assert_eq!(cells[0].method, Method::NonprivateFair);
        assert_eq!(cells[2], Cell { method: Method::SfS, epsilon: 0.5, seed: 0 });
    }

    #[test]
    fn listed_references_are_not_duplicated() {
        let config = ExperimentConfig {
            methods: vec![Method::NonprivateErm, Method::SfT],
            epsilons: vec![1.0, 2.0],
            seeds: vec![7],
            ..Default::default()
        };
        let methods: Vec<Method> = plan(&config).iter().map(|c| c.method).collect();
        assert_eq!(
            methods,
            vec![Method::NonprivateFair, Method::NonprivateErm, Method::SfT, Method::SfT]
        );
    }
}
