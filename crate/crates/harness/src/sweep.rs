//! Cross-product sweeps with CSV output, resumable by fingerprint.

use crate::config::{ConfigError, ExperimentConfig};
use crate::run::{fingerprint, run_one, ResultRow, RunError, CSV_HEADER};
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::fs::OpenOptions;
use std::io;
use std::path::Path;
use thiserror::Error;

/// Keys that may take a list of values in a grid.
pub const GRID_AXES: [&str; 10] =
    ["protocol", "n", "t", "f", "B", "adversary", "epsilon", "fault_placement", "prediction_placement", "inputs"];

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("empty grid")]
    Empty,
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("run {fingerprint}: {source}")]
    Run { fingerprint: String, source: RunError },
}

/// Base assignments plus per-axis value lists, expanded as a cross product.
#[derive(Clone, Debug, Default)]
pub struct Grid {
    entries: Vec<(String, Vec<String>)>,
}

impl Grid {
    /// Lines are `key = value` or, on grid axes, `key = [a, b, c]`.
    pub fn parse(text: &str) -> Result<Grid, ConfigError> {
        let mut g = Grid::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            g.set(k.trim(), v.trim())?;
        }
        Ok(g)
    }

    /// Later assignments to the same key replace earlier ones.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let values = match value.strip_prefix('[').and_then(|v| v.strip_suffix(']')) {
            Some(list) if GRID_AXES.contains(&key) => list.split(',').map(|s| s.trim().to_string()).collect(),
            Some(_) => return Err(ConfigError::BadValue { key: key.into(), value: value.into() }),
            None => vec![value.to_string()],
        };
        if values.iter().any(String::is_empty) {
            return Err(ConfigError::BadValue { key: key.into(), value: value.into() });
        }
        self.entries.retain(|(k, _)| k != key);
        self.entries.push((key.to_string(), values));
        Ok(())
    }

    /// One config per combination, first axis varying slowest.
    pub fn expand(&self) -> Result<Vec<ExperimentConfig>, ConfigError> {
        let mut out = vec![ExperimentConfig::default()];
        for (k, values) in &self.entries {
            let mut next = Vec::with_capacity(out.len() * values.len());
            for cfg in &out {
                for v in values {
                    let mut c = cfg.clone();
                    c.set(k, v)?;
                    next.push(c);
                }
            }
            out = next;
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Default)]
pub struct SweepReport {
    pub rows: Vec<ResultRow>,
    pub executed: usize,
    pub reused: usize,
    /// Fingerprints of rows with an invariant violation.
    pub violations: Vec<String>,
}

/// Rows already present in a CSV file; a torn last line is dropped.
pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>, SweepError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut rd = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let mut rows = Vec::new();
    for rec in rd.records() {
        match rec {
            Ok(r) => rows.extend(ResultRow::from_record(&r)),
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(_) => continue,
        }
    }
    Ok(rows)
}

pub fn write_rows(path: &Path, rows: &[ResultRow]) -> Result<(), SweepError> {
    let tmp = path.with_extension("csv.tmp");
    {
        let mut w = csv::Writer::from_path(&tmp)?;
        w.write_record(CSV_HEADER)?;
        for r in rows {
            w.write_record(r.to_record())?;
        }
        w.flush()?;
    }
    std::fs::rename(tmp, path)?;
    Ok(())
}

fn append_rows(path: &Path, rows: &[ResultRow]) -> Result<(), SweepError> {
    let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(CSV_HEADER)?;
    }
    for r in rows {
        w.write_record(r.to_record())?;
    }
    w.flush()?;
    Ok(())
}

/// Cells × seeds, executed in parallel. With `out`, finished rows are
/// appended chunk by chunk and reused on the next call; the final file is
/// rewritten sorted by fingerprint.
pub fn sweep(cells: &[ExperimentConfig], out: Option<&Path>) -> Result<SweepReport, SweepError> {
    if cells.is_empty() || cells.iter().all(|c| c.seeds.is_empty()) {
        return Err(SweepError::Empty);
    }
    for c in cells {
        c.validate()?;
    }
    let mut done: Vec<ResultRow> = match out {
        Some(p) => read_rows(p)?,
        None => Vec::new(),
    };
    let mut seen: BTreeSet<String> = BTreeSet::new();
    done.retain(|r| seen.insert(r.fingerprint.clone()));

    let mut jobs = Vec::new();
    let mut wanted = BTreeSet::new();
    for c in cells {
        for &s in &c.seeds {
            let fp = fingerprint(c, s);
            if wanted.insert(fp.clone()) && !seen.contains(&fp) {
                jobs.push((c, s));
            }
        }
    }
    done.retain(|r| wanted.contains(&r.fingerprint));
    let reused = done.len();

    let mut report = SweepReport { reused, ..SweepReport::default() };
    let chunk = (rayon::current_num_threads() * 4).max(8);
    for batch in jobs.chunks(chunk) {
        let results: Vec<Result<(ResultRow, bool), SweepError>> = batch
            .par_iter()
            .map(|(c, s)| {
                run_one(c, *s)
                    .map(|r| {
                        let ok = r.ok();
                        (r.row, ok)
                    })
                    .map_err(|source| SweepError::Run { fingerprint: fingerprint(c, *s), source })
            })
            .collect();
        let mut rows = Vec::with_capacity(results.len());
        for r in results {
            let (row, ok) = r?;
            if !ok {
                report.violations.push(row.fingerprint.clone());
            }
            rows.push(row);
        }
        if let Some(p) = out {
            append_rows(p, &rows)?;
        }
        report.executed += rows.len();
        done.extend(rows);
    }
    done.sort_by(|a, b| a.fingerprint.cmp(&b.fingerprint));
    if let Some(p) = out {
        write_rows(p, &done)?;
    }
    report.rows = done;
    Ok(report)
}

