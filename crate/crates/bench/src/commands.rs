//! Subcommand implementations shared by the binary and the tests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use vqa_core::analysis::{exact_ground, mean_confidence_interval, relative_error, Sector};
use vqa_core::formats::fmt_f64;
use vqa_core::optim::{CmaConfig, SpsaConfig};
use vqa_core::racing::{tune, Objective, ParamSpace, TuneReport};
use vqa_core::rng::{derive_seed, StreamTag};
use vqa_core::schedule::ShotSchedule;

use crate::config::{AnsatzSpec, Experiment, OptimizerSpec, ProblemSpec};
use crate::error::BenchError;
use crate::experiment::{build_problem, load_hamiltonian, optimize, parallel_map, run_batch, Problem, RunOutput};
use crate::output::{self, write_file, Table, SUMMARY_FILE};

pub struct RunArtifacts {
    pub problem: Problem,
    pub outputs: Vec<RunOutput>,
    pub files: Vec<PathBuf>,
}

/// Runs every repetition and writes traces, summary and comparison into `out`.
pub fn cmd_run(exp: &Experiment, out: &Path, workers: usize) -> Result<RunArtifacts, BenchError> {
    exp.schedule.build()?;
    let problem = build_problem(exp)?;
    let outputs = run_batch(exp, &problem, workers)?;
    let files = output::write_batch(out, exp, &problem, &outputs)?;
    Ok(RunArtifacts { problem, outputs, files })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactReport {
    pub e0: f64,
    pub c0: f64,
    pub degeneracy: usize,
    pub sector: Sector,
    pub dimension: usize,
    /// Ground energy over the whole Hilbert space.
    pub unrestricted_e0: f64,
}

impl ExactReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "e0 = {}", fmt_f64(self.e0));
        let _ = writeln!(s, "c0 = {}", fmt_f64(self.c0));
        let _ = writeln!(s, "degeneracy = {}", self.degeneracy);
        let _ = writeln!(s, "sector = {}", self.sector);
        let _ = writeln!(s, "dimension = {}", self.dimension);
        if (self.unrestricted_e0 - self.e0).abs() > 1e-9 {
            let _ = writeln!(s, "unrestricted_e0 = {}", fmt_f64(self.unrestricted_e0));
        }
        s
    }
}

/// Sector ground energy at the problem's particle number and minimal spin.
pub fn cmd_exact(problem: &ProblemSpec) -> Result<ExactReport, BenchError> {
    let (h, electrons) = load_hamiltonian(problem)?;
    let exact = exact_ground(&h, Some(Sector::particles_min_spin(electrons)))?;
    let unrestricted = exact_ground(&h, None)?;
    Ok(ExactReport {
        e0: exact.e0,
        c0: h.identity_coeff(),
        degeneracy: exact.degeneracy,
        sector: exact.sector,
        dimension: exact.dimension,
        unrestricted_e0: unrestricted.e0,
    })
}

pub fn cmd_schedule(exp: &Experiment) -> Result<String, BenchError> {
    let s = exp.schedule.build()?;
    Ok(render_schedule(&s))
}

pub fn render_schedule(s: &ShotSchedule) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{s}");
    let _ = writeln!(out, "evaluations = {}", s.total_evaluations());
    let _ = writeln!(out, "total_shots = {}", s.total_shots());
    let _ = writeln!(out, "overshoot = {}", s.overshoot());
    out
}

/// The tuning space for the configured optimizer.
pub fn tuning_space(optimizer: &OptimizerSpec) -> ParamSpace {
    match optimizer {
        OptimizerSpec::Spsa(_) => ParamSpace::spsa_default(),
        OptimizerSpec::Cma(_) => ParamSpace::cma_default(),
    }
}

/// Maps a point of [`tuning_space`] onto an optimizer configuration.
pub fn optimizer_from_point(base: &OptimizerSpec, space: &ParamSpace, point: &[f64]) -> OptimizerSpec {
    let get = |name: &str| space.index_of(name).map(|i| point[i]);
    match *base {
        OptimizerSpec::Spsa(c) => OptimizerSpec::Spsa(SpsaConfig {
            a: get("a").unwrap_or(c.a),
            alpha: get("alpha").unwrap_or(c.alpha),
            c: get("c").unwrap_or(c.c),
            gamma: get("gamma").unwrap_or(c.gamma),
            ..c
        }),
        OptimizerSpec::Cma(c) => OptimizerSpec::Cma(CmaConfig {
            sigma0: get("sigma0").unwrap_or(c.sigma0),
            population: get("population").map(|v| v as usize).or(c.population),
            parent_fraction: get("mu").unwrap_or(c.parent_fraction),
            c_mean: get("c_mean").unwrap_or(c.c_mean),
            damp_factor: get("damp_factor").unwrap_or(c.damp_factor),
            ..c
        }),
    }
}

/// Median favourite `Δ_r E` over seeded runs at the reduced tuning budget.
pub struct VqeTuningObjective<'a> {
    pub problem: &'a Problem,
    pub space: &'a ParamSpace,
    pub base: OptimizerSpec,
    pub schedule: ShotSchedule,
    pub runs: u64,
    pub workers: usize,
}

impl VqeTuningObjective<'_> {
    fn score(&self, point: &[f64], instance_seed: u64) -> vqa_core::Result<f64> {
        let optimizer = optimizer_from_point(&self.base, self.space, point);
        let mut errors = Vec::with_capacity(self.runs as usize);
        for r in 0..self.runs {
            let seed = derive_seed(instance_seed, StreamTag::Objective, r);
            let result = optimize(self.problem, &optimizer, &self.schedule, seed).map_err(|e| match e {
                BenchError::Core(c) => c,
                other => vqa_core::Error::InvalidConfig(other.to_string()),
            })?;
            let cost = self.problem.circuit.prepare(&result.favourite_params)?.expectation_sum(&self.problem.hamiltonian)?;
            errors.push(relative_error(cost, self.problem.exact.e0, self.problem.c0())?);
        }
        Ok(median(&mut errors))
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

impl Objective for VqeTuningObjective<'_> {
    fn evaluate(&mut self, config: &[f64], instance_seed: u64) -> vqa_core::Result<f64> {
        self.score(config, instance_seed)
    }

    fn evaluate_batch(&mut self, jobs: &[(&[f64], u64)]) -> Vec<vqa_core::Result<f64>> {
        parallel_map(self.workers, jobs, |(c, s)| self.score(c, *s))
    }
}

pub struct TuneArtifacts {
    pub report: TuneReport,
    /// One ready-to-run experiment per elite, best first.
    pub elites: Vec<Experiment>,
    pub files: Vec<PathBuf>,
}

/// Races `objective` over `space` with the experiment's tuning settings.
pub fn tune_with<O: Objective + ?Sized>(exp: &Experiment, space: &ParamSpace, objective: &mut O) -> Result<TuneArtifacts, BenchError> {
    let report = tune(space, objective, &exp.tune.race)?;
    let elites = report
        .elite_configs()
        .iter()
        .map(|c| exp.with_optimizer(optimizer_from_point(&exp.optimizer, space, &c.values)))
        .collect();
    Ok(TuneArtifacts { report, elites, files: Vec::new() })
}

pub fn cmd_tune(exp: &Experiment, out: &Path, workers: usize) -> Result<TuneArtifacts, BenchError> {
    let schedule = exp.tune.schedule.build()?;
    let problem = build_problem(exp)?;
    let space = tuning_space(&exp.optimizer);
    let mut objective =
        VqeTuningObjective { problem: &problem, space: &space, base: exp.optimizer, schedule, runs: exp.tune.runs, workers };
    let mut artifacts = tune_with(exp, &space, &mut objective)?;
    artifacts.files = write_tune(out, exp, &artifacts)?;
    Ok(artifacts)
}

/// Writes `tune_report.txt` and one `elite_NN.toml` per elite.
pub fn write_tune(out: &Path, exp: &Experiment, artifacts: &TuneArtifacts) -> Result<Vec<PathBuf>, BenchError> {
    output::ensure_dir(out)?;
    let mut files = Vec::new();
    let report_path = out.join("tune_report.txt");
    let mut text = exp.raw.echo_header("# ");
    text.push_str(&artifacts.report.render());
    write_file(&report_path, &text)?;
    files.push(report_path);
    for (k, elite) in artifacts.elites.iter().enumerate() {
        let mut raw = elite.raw.clone();
        // resolved paths keep the elite runnable from the output directory
        if let ProblemSpec::File(p) = &elite.problem {
            raw.hamiltonian = Some(p.clone());
        }
        if let AnsatzSpec::Ucc { generators } = &elite.ansatz {
            raw.generators = Some(generators.clone());
        }
        raw.label = Some(format!("{}-elite{}", elite.label, k + 1));
        let path = out.join(format!("elite_{:02}.toml", k + 1));
        write_file(&path, &raw.to_toml())?;
        files.push(path);
    }
    Ok(files)
}

/// Optimizer, budget, protocol and label.
type GroupKey = (String, u64, String, String);

/// One group of runs inside an analysis panel.
#[derive(Clone, Debug)]
struct Group {
    label: String,
    optimizer: String,
    budget: u64,
    protocol: String,
    series: BTreeMap<&'static str, Vec<f64>>,
}

const RELATIVE_SERIES: [(&str, &str); 2] = [("best", "rel_err_best"), ("favourite", "rel_err_favourite")];
const CANDIDATE_SERIES: [(&str, &str); 3] =
    [("noisy_best", "delta_noisy_best"), ("noiseless_best", "delta_best"), ("noiseless_favourite", "delta_favourite")];

fn summary_path(input: &Path) -> PathBuf {
    if input.is_dir() {
        input.join(SUMMARY_FILE)
    } else {
        input.to_path_buf()
    }
}

fn render_panel(groups: &[&Group], series: &[(&'static str, &str)]) -> String {
    let mut s = String::from("group,optimizer,budget,protocol,series,n,mean,ci_low,ci_high,points\n");
    for g in groups {
        for (name, _) in series {
            let values = &g.series[name];
            let ci = mean_confidence_interval(values, 0.95);
            let (mean, lo, hi) = match ci {
                Some(ci) => (
                    fmt_f64(ci.mean),
                    ci.interval.map(|i| fmt_f64(i.0)).unwrap_or_default(),
                    ci.interval.map(|i| fmt_f64(i.1)).unwrap_or_default(),
                ),
                None => Default::default(),
            };
            let points: Vec<String> = values.iter().map(|v| fmt_f64(*v)).collect();
            let _ = writeln!(
                s,
                "{},{},{},{},{name},{},{mean},{lo},{hi},{}",
                g.label,
                g.optimizer,
                g.budget,
                g.protocol,
                values.len(),
                points.join(";")
            );
        }
    }
    s
}

/// Per-system panels of mean and 95% Student-t intervals from summary files.
///
/// Writes `relative_error_<system>.csv` (best and favourite `Δ_r E`) and
/// `candidates_<system>.csv` (signed errors of the noisy best-ever value and
/// the noiseless best-ever and favourite costs).
pub fn cmd_analyze(inputs: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let mut panels: BTreeMap<String, BTreeMap<GroupKey, Group>> = BTreeMap::new();
    for input in inputs {
        let path = summary_path(input);
        let table = Table::read(&path)?;
        let bad = |m: String| BenchError::Config(vec![format!("{}: {m}", path.display())]);
        let meta = |k: &str| table.meta(&format!("meta.{k}")).map(str::to_string).ok_or_else(|| bad(format!("missing meta.{k}")));
        let system = meta("system")?;
        let label = meta("label")?;
        let optimizer = meta("optimizer")?;
        let protocol = meta("protocol")?;
        let budget: u64 = meta("budget")?.parse().map_err(|_| bad("meta.budget is not an integer".into()))?;
        let group = panels
            .entry(system)
            .or_default()
            .entry((optimizer.clone(), budget, protocol.clone(), label.clone()))
            .or_insert_with(|| Group { label, optimizer, budget, protocol, series: BTreeMap::new() });
        for (name, column) in RELATIVE_SERIES.iter().chain(CANDIDATE_SERIES.iter()) {
            let values = table.floats(column).map_err(bad)?;
            group.series.entry(name).or_default().extend(values);
        }
    }
    output::ensure_dir(out)?;
    let mut files = Vec::new();
    for (system, groups) in &panels {
        let groups: Vec<&Group> = groups.values().collect();
        for (prefix, series) in [("relative_error", &RELATIVE_SERIES[..]), ("candidates", &CANDIDATE_SERIES[..])] {
            let path = out.join(format!("{prefix}_{system}.csv"));
            write_file(&path, &render_panel(&groups, series))?;
            files.push(path);
        }
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0]), 2.5);
    }

    #[test]
    fn points_map_onto_named_fields() {
        let space = ParamSpace::cma_default();
        let base = OptimizerSpec::Cma(CmaConfig::default());
        let OptimizerSpec::Cma(c) = optimizer_from_point(&base, &space, &[113.0, 0.6317, 0.2741, 0.6771, 0.8561]) else {
            panic!()
        };
        assert_eq!(c.population, Some(113));
        assert_eq!(c.sigma0, 0.8561);
        assert_eq!(c.parent_fraction, 0.2741);
        assert_eq!(c.c_mean, 0.6317);
        assert_eq!(c.damp_factor, 0.6771);
    }
}
