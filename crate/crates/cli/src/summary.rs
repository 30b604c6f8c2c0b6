//! Per `(method, ε)` means and standard deviations of a sweep CSV.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sfpate::pate::Method;

use crate::sweep::{ReportRow, COLUMNS};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub epsilon: f64,
    pub runs: usize,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub xi_mean: f64,
    pub xi_std: f64,
    pub wasserstein_mean: Option<f64>,
    pub wasserstein_std: Option<f64>,
}

/// Mean and sample standard deviation; the deviation of a single value is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Reads the rows of a sweep CSV, skipping marker lines.
pub fn read_reports(path: &Path) -> Result<Vec<ReportRow>, CliError> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let header = reader.headers().map_err(|e| CliError::Malformed(e.to_string()))?;
    if header.iter().ne(COLUMNS) {
        return Err(CliError::Malformed(format!(
            "expected header `{}`, found `{}`",
            COLUMNS.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    reader
        .deserialize()
        .map(|r| r.map_err(|e| CliError::Malformed(e.to_string())))
        .collect()
}

/// Groups by `(method, ε)`, ordered by method and then ε.
pub fn summarize_rows(rows: &[ReportRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Method, f64)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|&(m, e)| m == r.method && e.total_cmp(&r.epsilon).is_eq()) {
            keys.push((r.method, r.epsilon));
        }
    }
    keys.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    keys.into_iter()
        .map(|(method, epsilon)| {
            let group: Vec<&ReportRow> = rows
                .iter()
                .filter(|r| r.method == method && r.epsilon.total_cmp(&epsilon).is_eq())
                .collect();
            let pick = |f: fn(&ReportRow) -> f64| group.iter().map(|r| f(r)).collect::<Vec<_>>();
            let (accuracy_mean, accuracy_std) = mean_std(&pick(|r| r.accuracy));
            let (xi_mean, xi_std) = mean_std(&pick(|r| r.xi));
            let w: Option<Vec<f64>> = group.iter().map(|r| r.wasserstein).collect();
            let (wasserstein_mean, wasserstein_std) = match w {
                Some(w) => {
                    let (m, s) = mean_std(&w);
                    (Some(m), Some(s))
                }
                None => (None, None),
            };
            SummaryRow {
                method,
                epsilon,
                runs: group.len(),
                accuracy_mean,
                accuracy_std,
                xi_mean,
                xi_std,
                wasserstein_mean,
                wasserstein_std,
            }
        })
        .collect()
}

/// `runs.csv` -> `runs.summary.csv`.
pub fn default_summary_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.summary.csv"))
}

pub fn write_summary(rows: &[SummaryRow], path: &Path) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path)?;
    for r in rows {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

/// Aligned text table of a summary.
pub fn render_table(rows: &[SummaryRow]) -> String {
    let mut out = format!(
        "{:<16} {:>8} {:>5} {:>17} {:>17} {:>17}\n",
        "method", "epsilon", "runs", "accuracy", "xi", "wasserstein"
    );
    for r in rows {
        let w = match (r.wasserstein_mean, r.wasserstein_std) {
            (Some(m), Some(s)) => format!("{m:.4} ± {s:.4}"),
            _ => "-".to_string(),
        };
        let _ = writeln!(
            out,
            "{:<16} {:>8} {:>5} {:>17} {:>17} {:>17}",
            r.method.as_str(),
            r.epsilon,
            r.runs,
            format!("{:.4} ± {:.4}", r.accuracy_mean, r.accuracy_std),
            format!("{:.4} ± {:.4}", r.xi_mean, r.xi_std),
            w
        );
    }
    out
}

/// Reads a sweep CSV and writes its summary to `out` (or next to the input).
pub fn summarize(path: &Path, out: Option<&Path>) -> Result<(Vec<SummaryRow>, PathBuf), CliError> {
    let rows = read_reports(path)?;
    let summary = summarize_rows(&rows);
    let target = out.map(Path::to_path_buf).unwrap_or_else(|| default_summary_path(path));
    write_summary(&summary, &target)?;
    Ok((summary, target))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: Method, epsilon: f64, accuracy: f64, xi: f64) -> ReportRow {
        ReportRow {
            method,
            epsilon,
            accuracy,
            xi,
            wasserstein: None,
            seed: 0,
            wall_ms: 1,
        }
    }

    #[test]
    fn mean_std_edge_cases() {
        assert_eq!(mean_std(&[0.7]), (0.7, 0.0));
        assert_eq!(mean_std(&[0.25, 0.25]), (0.25, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn groups_sorted_by_method_then_epsilon() {
        let rows = vec![
            row(Method::SfT, 2.0, 0.5, 0.1),
            row(Method::SfS, 1.0, 0.6, 0.2),
            row(Method::SfT, 1.0, 0.7, 0.3),
            row(Method::SfS, 1.0, 0.8, 0.4),
        ];
        let s = summarize_rows(&rows);
        let keys: Vec<(Method, f64, usize)> = s.iter().map(|r| (r.method, r.epsilon, r.runs)).collect();
        assert_eq!(keys, vec![(Method::SfS, 1.0, 2), (Method::SfT, 1.0, 1), (Method::SfT, 2.0, 1)]);
        assert!((s[0].accuracy_mean - 0.7).abs() < 1e-15);
        assert_eq!(s[0].wasserstein_mean, None);
    }

    #[test]
    fn summary_path_sits_next_to_input() {
        assert_eq!(
            default_summary_path(Path::new("/tmp/x/runs.csv")),
            PathBuf::from("/tmp/x/runs.summary.csv")
        );
    }
}
