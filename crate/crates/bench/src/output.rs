//! Trace, summary and comparison files.
//!
//! All files are CSV preceded by `# key = value` header lines: first the run
//! metadata, then the configuration echo. Floats use 17 significant digits
//! in lowercase e-notation; parameter vectors are `;`-joined.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use vqa_core::formats::fmt_f64;

use crate::config::Experiment;
use crate::error::BenchError;
use crate::experiment::{Problem, RunOutput};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const COMPARISON_FILE: &str = "comparison.csv";

pub const SUMMARY_COLUMNS: &[&str] = &[
    "run",
    "seed",
    "evaluations",
    "shots_spent",
    "noisy_best",
    "cost_best",
    "cost_favourite",
    "delta_noisy_best",
    "delta_best",
    "delta_favourite",
    "rel_err_best",
    "rel_err_favourite",
    "best_params",
    "favourite_params",
];

pub fn trace_file_name(run: u64) -> String {
    format!("trace_run{run:03}.csv")
}

fn join_params(params: &[f64]) -> String {
    params.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(";")
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Metadata shared by all files of one batch.
pub fn batch_meta(exp: &Experiment, problem: &Problem) -> BTreeMap<&'static str, String> {
    BTreeMap::from([
        ("label", exp.label.clone()),
        ("system", problem.system.clone()),
        ("optimizer", exp.optimizer.name().to_string()),
        ("budget", exp.schedule.budget().to_string()),
        ("protocol", exp.schedule.protocol().to_string()),
        ("e0", fmt_f64(problem.exact.e0)),
        ("c0", fmt_f64(problem.c0())),
        ("sector", problem.exact.sector.to_string()),
        ("degeneracy", problem.exact.degeneracy.to_string()),
        ("n_params", problem.circuit.n_params().to_string()),
    ])
}

fn header(meta: &BTreeMap<&'static str, String>, exp: &Experiment) -> String {
    let mut s = String::new();
    for (k, v) in meta {
        let _ = writeln!(s, "# meta.{k} = {v}");
    }
    s.push_str(&exp.raw.echo_header("# "));
    s
}

pub fn render_trace(out: &RunOutput, meta: &BTreeMap<&'static str, String>, exp: &Experiment) -> String {
    let mut s = header(meta, exp);
    let _ = writeln!(s, "# meta.run = {}", out.run);
    let _ = writeln!(s, "# meta.seed = {}", out.seed);
    let n = out.result.x0.len();
    s.push_str("evaluation,stage,shots,cumulative_shots,value");
    for i in 0..n {
        let _ = write!(s, ",theta_{i}");
    }
    s.push('\n');
    for e in &out.result.trace {
        let _ = write!(s, "{},{},{},{},{}", e.evaluation, e.stage, e.shots, e.cumulative_shots, fmt_f64(e.value));
        for v in &e.params {
            let _ = write!(s, ",{}", fmt_f64(*v));
        }
        s.push('\n');
    }
    s
}

pub fn render_summary(outs: &[RunOutput], meta: &BTreeMap<&'static str, String>, exp: &Experiment) -> String {
    let mut s = header(meta, exp);
    s.push_str(&SUMMARY_COLUMNS.join(","));
    s.push('\n');
    for o in outs {
        let c = &o.comparison;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            o.run,
            o.seed,
            o.result.evaluations,
            o.result.shots_spent,
            opt_f64(o.result.best_noisy_value),
            fmt_f64(c.cost_best),
            fmt_f64(c.cost_favourite),
            opt_f64(o.result.best_noisy_value.map(|_| c.delta_noisy_best)),
            fmt_f64(c.delta_best),
            fmt_f64(c.delta_favourite),
            fmt_f64(o.rel_err_best),
            fmt_f64(o.rel_err_favourite),
            join_params(&o.result.best_params),
            join_params(&o.result.favourite_params),
        );
    }
    s
}

pub fn render_comparison(outs: &[RunOutput], meta: &BTreeMap<&'static str, String>, exp: &Experiment) -> String {
    let mut s = header(meta, exp);
    s.push_str("run,seed,noisy_best,cost_best,cost_favourite,delta_noisy_best,delta_best,delta_favourite,noise_floor_width\n");
    for o in outs {
        let c = &o.comparison;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            o.run,
            o.seed,
            fmt_f64(c.noisy_best),
            fmt_f64(c.cost_best),
            fmt_f64(c.cost_favourite),
            fmt_f64(c.delta_noisy_best),
            fmt_f64(c.delta_best),
            fmt_f64(c.delta_favourite),
            opt_f64(o.noise_floor.map(|f| f.width)),
        );
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), BenchError> {
    fs::write(path, contents).map_err(|e| BenchError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<(), BenchError> {
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))
}

/// Writes every trace, the summary and the comparison table; returns the paths.
pub fn write_batch(dir: &Path, exp: &Experiment, problem: &Problem, outs: &[RunOutput]) -> Result<Vec<PathBuf>, BenchError> {
    ensure_dir(dir)?;
    let meta = batch_meta(exp, problem);
    let mut written = Vec::new();
    for o in outs {
        let path = dir.join(trace_file_name(o.run));
        write_file(&path, &render_trace(o, &meta, exp))?;
        written.push(path);
    }
    for (name, text) in [
        (SUMMARY_FILE, render_summary(outs, &meta, exp)),
        (COMPARISON_FILE, render_comparison(outs, &meta, exp)),
    ] {
        let path = dir.join(name);
        write_file(&path, &text)?;
        written.push(path);
    }
    Ok(written)
}

/// A parsed CSV file with `# key = value` headers.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub meta: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut table = Table::default();
        for (n, line) in text.lines().enumerate() {
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    table.meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<String> = line.split(',').map(str::to_string).collect();
            if table.columns.is_empty() {
                table.columns = cells;
            } else if cells.len() != table.columns.len() {
                return Err(format!("line {}: {} cells, expected {}", n + 1, cells.len(), table.columns.len()));
            } else {
                table.rows.push(cells);
            }
        }
        Ok(table)
    }

    pub fn read(path: &Path) -> Result<Self, BenchError> {
        let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::parse(&text).map_err(|m| BenchError::Config(vec![format!("{}: {m}", path.display())]))
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Parsed floats of `name`; empty cells are skipped.
    pub fn floats(&self, name: &str) -> Result<Vec<f64>, String> {
        let i = self.column(name).ok_or_else(|| format!("missing column {name}"))?;
        self.rows
            .iter()
            .filter(|r| !r[i].is_empty())
            .map(|r| r[i].parse::<f64>().map_err(|e| format!("column {name}: {e}")))
            .collect()
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.get(key).map(String::as_str)
    }
}

pub fn parse_params(cell: &str) -> Result<Vec<f64>, String> {
    if cell.is_empty() {
        return Ok(Vec::new());
    }
    cell.split(';').map(|v| v.parse::<f64>().map_err(|e| e.to_string())).collect()
}
