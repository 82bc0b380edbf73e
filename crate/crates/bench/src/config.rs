//! Flat TOML experiment configuration.
//!
//! Every key is top-level; unknown keys are rejected. Relative paths resolve
//! against the directory holding the config file.
//!
//! ```toml
//! label = "hub2x2-cma"
//! problem = "hubbard"          # or "file"
//! hubbard_rows = 2
//! hubbard_cols = 2
//! hubbard_t = 1.0
//! hubbard_u = 2.0
//! ansatz = "vha"               # or "ucc" with `generators = "path"`
//! vha_layers = 2
//! optimizer = "cma"            # or "spsa"
//! schedule = "three_stage"     # or "one_stage" with `evaluations = n`
//! budget_per_pauli = 10000000
//! stage_shots = [100, 1000, 10000]
//! n_repetitions = 15
//! base_seed = 0
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vqa_core::optim::{CmaConfig, SpsaConfig};
use vqa_core::racing::RaceConfig;
use vqa_core::schedule::ShotSchedule;

use crate::error::BenchError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub label: Option<String>,

    pub problem: Option<String>,
    pub hamiltonian: Option<PathBuf>,
    pub hubbard_rows: Option<usize>,
    pub hubbard_cols: Option<usize>,
    pub hubbard_t: Option<f64>,
    pub hubbard_u: Option<f64>,

    pub ansatz: Option<String>,
    pub generators: Option<PathBuf>,
    pub vha_layers: Option<usize>,

    pub optimizer: Option<String>,
    pub spsa_a: Option<f64>,
    pub spsa_alpha: Option<f64>,
    pub spsa_c: Option<f64>,
    pub spsa_gamma: Option<f64>,
    pub spsa_stability: Option<f64>,
    pub cma_sigma0: Option<f64>,
    pub cma_population: Option<usize>,
    pub cma_mu: Option<f64>,
    pub cma_c_mean: Option<f64>,
    pub cma_damp_factor: Option<f64>,

    pub schedule: Option<String>,
    pub budget_per_pauli: Option<u64>,
    pub evaluations: Option<u64>,
    pub stage_shots: Option<Vec<u64>>,

    pub n_repetitions: Option<u64>,
    pub base_seed: Option<u64>,
    /// Tail probability for the reported noise-floor width.
    pub noise_floor_p: Option<f64>,

    pub tune_budget: Option<u64>,
    pub tune_runs: Option<u64>,
    pub tune_budget_per_pauli: Option<u64>,
    pub tune_evaluations: Option<u64>,
    pub tune_initial_candidates: Option<usize>,
    pub tune_seed: Option<u64>,

    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSpec {
    Hubbard { rows: usize, cols: usize, t: f64, u: f64 },
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnsatzSpec {
    Vha { layers: usize },
    Ucc { generators: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OptimizerSpec {
    Spsa(SpsaConfig),
    Cma(CmaConfig),
}

impl OptimizerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerSpec::Spsa(_) => "spsa",
            OptimizerSpec::Cma(_) => "cma",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleSpec {
    OneStage { budget: u64, evaluations: u64 },
    ThreeStage { budget: u64, shots: (u64, u64, u64) },
}

impl ScheduleSpec {
    pub fn build(&self) -> vqa_core::Result<ShotSchedule> {
        match *self {
            ScheduleSpec::OneStage { budget, evaluations } => ShotSchedule::one_stage(budget, evaluations),
            ScheduleSpec::ThreeStage { budget, shots } => ShotSchedule::three_stage(budget, shots),
        }
    }

    pub fn budget(&self) -> u64 {
        match *self {
            ScheduleSpec::OneStage { budget, .. } | ScheduleSpec::ThreeStage { budget, .. } => budget,
        }
    }

    pub fn protocol(&self) -> &'static str {
        match self {
            ScheduleSpec::OneStage { .. } => "one_stage",
            ScheduleSpec::ThreeStage { .. } => "three_stage",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TuneSpec {
    pub race: RaceConfig,
    /// Seeded optimizer runs per objective evaluation.
    pub runs: u64,
    pub schedule: ScheduleSpec,
}

/// A validated configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub label: String,
    pub problem: ProblemSpec,
    pub ansatz: AnsatzSpec,
    pub optimizer: OptimizerSpec,
    pub schedule: ScheduleSpec,
    pub n_repetitions: u64,
    pub base_seed: u64,
    pub noise_floor_p: f64,
    pub tune: TuneSpec,
    /// Raw configuration, echoed into output headers.
    pub raw: ExperimentConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(vec![e.to_string()]))
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_relative() {
            self.base_dir.join(p)
        } else {
            p.to_path_buf()
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    /// Sorted `key = value` pairs of the keys that are set.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let value = toml::Value::try_from(self).expect("flat config serializes");
        value
            .as_table()
            .map(|t| t.iter().map(|(k, v)| (k.clone(), v.to_string())).collect())
            .unwrap_or_default()
    }

    pub fn echo_header(&self, prefix: &str) -> String {
        let mut s = String::new();
        for (k, v) in self.echo() {
            let _ = writeln!(s, "{prefix}{k} = {v}");
        }
        s
    }

    /// Validates every key, reporting all problems at once.
    pub fn validate(&self) -> Result<Experiment, BenchError> {
        let mut errors = Vec::new();
        let problem = match self.problem.as_deref().unwrap_or("hubbard") {
            "hubbard" => {
                let rows = self.hubbard_rows.unwrap_or(0);
                let cols = self.hubbard_cols.unwrap_or(0);
                if rows == 0 || cols == 0 {
                    errors.push("hubbard problems need hubbard_rows >= 1 and hubbard_cols >= 1".to_string());
                }
                if self.hamiltonian.is_some() {
                    errors.push("hamiltonian is only valid with problem = \"file\"".into());
                }
                let t = self.hubbard_t.unwrap_or(1.0);
                let u = self.hubbard_u.unwrap_or(2.0);
                if !t.is_finite() || !u.is_finite() {
                    errors.push("hubbard_t and hubbard_u must be finite".into());
                }
                ProblemSpec::Hubbard { rows, cols, t, u }
            }
            "file" => match self.hamiltonian.as_deref().map(|p| self.resolve(p)) {
                Some(p) => {
                    if !p.is_file() {
                        errors.push(format!("hamiltonian file {} does not exist", p.display()));
                    }
                    ProblemSpec::File(p)
                }
                None => {
                    errors.push("problem = \"file\" needs hamiltonian = <path>".into());
                    ProblemSpec::File(PathBuf::new())
                }
            },
            other => {
                errors.push(format!("unknown problem {other:?}; expected \"hubbard\" or \"file\""));
                ProblemSpec::File(PathBuf::new())
            }
        };

        let default_ansatz = if matches!(problem, ProblemSpec::Hubbard { .. }) { "vha" } else { "ucc" };
        let ansatz = match self.ansatz.as_deref().unwrap_or(default_ansatz) {
            "vha" => {
                if !matches!(problem, ProblemSpec::Hubbard { .. }) {
                    errors.push("ansatz = \"vha\" requires problem = \"hubbard\"".into());
                }
                let layers = self.vha_layers.unwrap_or(1);
                if layers == 0 {
                    errors.push("vha_layers must be >= 1".into());
                }
                AnsatzSpec::Vha { layers }
            }
            "ucc" => match self.generators.as_deref().map(|p| self.resolve(p)) {
                Some(p) => {
                    if !p.is_file() {
                        errors.push(format!("generator file {} does not exist", p.display()));
                    }
                    if matches!(problem, ProblemSpec::Hubbard { .. }) {
                        errors.push("ansatz = \"ucc\" requires problem = \"file\"".into());
                    }
                    AnsatzSpec::Ucc { generators: p }
                }
                None => {
                    errors.push("ansatz = \"ucc\" needs generators = <path>".into());
                    AnsatzSpec::Ucc { generators: PathBuf::new() }
                }
            },
            other => {
                errors.push(format!("unknown ansatz {other:?}; expected \"vha\" or \"ucc\""));
                AnsatzSpec::Vha { layers: 1 }
            }
        };

        let seed = self.base_seed.unwrap_or(0);
        let optimizer = match self.optimizer.as_deref().unwrap_or("cma") {
            "spsa" => {
                let d = SpsaConfig::default();
                let cfg = SpsaConfig {
                    a: self.spsa_a.unwrap_or(d.a),
                    alpha: self.spsa_alpha.unwrap_or(d.alpha),
                    c: self.spsa_c.unwrap_or(d.c),
                    gamma: self.spsa_gamma.unwrap_or(d.gamma),
                    stability_offset: self.spsa_stability.unwrap_or(d.stability_offset),
                    seed,
                };
                if let Err(e) = cfg.validate() {
                    errors.push(e.to_string());
                }
                if self.cma_keys_set() {
                    errors.push("cma_* keys are set but optimizer = \"spsa\"".into());
                }
                OptimizerSpec::Spsa(cfg)
            }
            "cma" => {
                let d = CmaConfig::default();
                let cfg = CmaConfig {
                    sigma0: self.cma_sigma0.unwrap_or(d.sigma0),
                    population: self.cma_population,
                    parent_fraction: self.cma_mu.unwrap_or(d.parent_fraction),
                    c_mean: self.cma_c_mean.unwrap_or(d.c_mean),
                    damp_factor: self.cma_damp_factor.unwrap_or(d.damp_factor),
                    seed,
                };
                if let Err(e) = cfg.validate() {
                    errors.push(e.to_string());
                }
                if self.spsa_keys_set() {
                    errors.push("spsa_* keys are set but optimizer = \"cma\"".into());
                }
                OptimizerSpec::Cma(cfg)
            }
            other => {
                errors.push(format!("unknown optimizer {other:?}; expected \"spsa\" or \"cma\""));
                OptimizerSpec::Cma(CmaConfig::default())
            }
        };

        let schedule = self.schedule_spec(&mut errors);

        let n_repetitions = self.n_repetitions.unwrap_or(15);
        if n_repetitions == 0 {
            errors.push("n_repetitions must be >= 1".into());
        }
        let noise_floor_p = self.noise_floor_p.unwrap_or(0.05);
        if !(noise_floor_p > 0.0 && noise_floor_p <= 0.5) {
            errors.push(format!("noise_floor_p must lie in (0, 0.5], got {noise_floor_p}"));
        }

        let race_default = RaceConfig::default();
        let race = RaceConfig {
            budget: self.tune_budget.unwrap_or(race_default.budget),
            initial_candidates: self.tune_initial_candidates.unwrap_or(race_default.initial_candidates),
            seed: self.tune_seed.unwrap_or(seed),
            ..race_default
        };
        let tune_runs = self.tune_runs.unwrap_or(2);
        if tune_runs == 0 {
            errors.push("tune_runs must be >= 1".into());
        }
        if race.initial_candidates == 0 {
            errors.push("tune_initial_candidates must be >= 1".into());
        }
        let tune_budget = self.tune_budget_per_pauli.unwrap_or_else(|| (schedule.budget() / 100).max(1));
        let tune_schedule = match &schedule {
            ScheduleSpec::OneStage { evaluations, .. } => {
                let evals = self.tune_evaluations.unwrap_or((*evaluations / 10).max(1)).min(tune_budget);
                ScheduleSpec::OneStage { budget: tune_budget, evaluations: evals }
            }
            ScheduleSpec::ThreeStage { shots, .. } => match self.tune_evaluations {
                Some(evals) => ScheduleSpec::OneStage { budget: tune_budget, evaluations: evals },
                None => ScheduleSpec::ThreeStage { budget: tune_budget, shots: *shots },
            },
        };

        if !errors.is_empty() {
            return Err(BenchError::Config(errors));
        }
        let label = self.label.clone().unwrap_or_else(|| default_label(&problem, &optimizer, &schedule));
        Ok(Experiment {
            label,
            problem,
            ansatz,
            optimizer,
            schedule,
            n_repetitions,
            base_seed: seed,
            noise_floor_p,
            tune: TuneSpec { race, runs: tune_runs, schedule: tune_schedule },
            raw: self.clone(),
        })
    }

    fn schedule_spec(&self, errors: &mut Vec<String>) -> ScheduleSpec {
        let evaluations = self.evaluations;
        let Some(budget) = self.budget_per_pauli else {
            errors.push("budget_per_pauli is required".into());
            return ScheduleSpec::OneStage { budget: 0, evaluations: 0 };
        };
        match self.schedule.as_deref().unwrap_or("one_stage") {
            "one_stage" => {
                if self.stage_shots.is_some() {
                    errors.push("stage_shots is only valid with schedule = \"three_stage\"".into());
                }
                match evaluations {
                    Some(evaluations) => ScheduleSpec::OneStage { budget, evaluations },
                    None => {
                        errors.push("schedule = \"one_stage\" needs evaluations = <n>".into());
                        ScheduleSpec::OneStage { budget, evaluations: 0 }
                    }
                }
            }
            "three_stage" => {
                if evaluations.is_some() {
                    errors.push("evaluations is only valid with schedule = \"one_stage\"".into());
                }
                match self.stage_shots.as_deref() {
                    Some(&[a, b, c]) => ScheduleSpec::ThreeStage { budget, shots: (a, b, c) },
                    Some(other) => {
                        errors.push(format!("stage_shots needs exactly three entries, got {}", other.len()));
                        ScheduleSpec::ThreeStage { budget, shots: (0, 0, 0) }
                    }
                    None => ScheduleSpec::ThreeStage { budget, shots: default_stage_shots(budget) },
                }
            }
            other => {
                errors.push(format!("unknown schedule {other:?}; expected \"one_stage\" or \"three_stage\""));
                ScheduleSpec::OneStage { budget, evaluations: 0 }
            }
        }
    }

    fn spsa_keys_set(&self) -> bool {
        [self.spsa_a, self.spsa_alpha, self.spsa_c, self.spsa_gamma, self.spsa_stability].iter().any(Option::is_some)
    }

    fn cma_keys_set(&self) -> bool {
        self.cma_population.is_some()
            || [self.cma_sigma0, self.cma_mu, self.cma_c_mean, self.cma_damp_factor].iter().any(Option::is_some)
    }
}

/// Stage shots `budget·(10⁻⁵, 10⁻⁴, 10⁻³)`, matching the published 10⁷–10⁹ settings.
pub fn default_stage_shots(budget: u64) -> (u64, u64, u64) {
    let s1 = (budget / 100_000).max(1);
    (s1, 10 * s1, 100 * s1)
}

fn default_label(problem: &ProblemSpec, optimizer: &OptimizerSpec, schedule: &ScheduleSpec) -> String {
    let system = match problem {
        ProblemSpec::Hubbard { rows, cols, .. } => format!("hub{rows}x{cols}"),
        ProblemSpec::File(p) => p.file_stem().map_or("file".into(), |s| s.to_string_lossy().into_owned()),
    };
    format!("{system}-{}-{}-{}", optimizer.name(), schedule.budget(), schedule.protocol())
}

impl Experiment {
    /// Short system name used to group analysis panels.
    pub fn system(&self) -> String {
        match &self.problem {
            ProblemSpec::Hubbard { rows, cols, .. } => format!("hub{rows}x{cols}"),
            ProblemSpec::File(p) => p.file_stem().map_or("file".into(), |s| s.to_string_lossy().into_owned()),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.base_seed = seed;
        self.raw.base_seed = Some(seed);
        match &mut self.optimizer {
            OptimizerSpec::Spsa(c) => c.seed = seed,
            OptimizerSpec::Cma(c) => c.seed = seed,
        }
        if self.raw.tune_seed.is_none() {
            self.tune.race.seed = seed;
        }
        self
    }

    pub fn with_optimizer(&self, optimizer: OptimizerSpec) -> Self {
        let mut e = self.clone();
        let raw = &mut e.raw;
        raw.spsa_a = None;
        raw.spsa_alpha = None;
        raw.spsa_c = None;
        raw.spsa_gamma = None;
        raw.spsa_stability = None;
        raw.cma_sigma0 = None;
        raw.cma_population = None;
        raw.cma_mu = None;
        raw.cma_c_mean = None;
        raw.cma_damp_factor = None;
        match optimizer {
            OptimizerSpec::Spsa(c) => {
                raw.optimizer = Some("spsa".into());
                raw.spsa_a = Some(c.a);
                raw.spsa_alpha = Some(c.alpha);
                raw.spsa_c = Some(c.c);
                raw.spsa_gamma = Some(c.gamma);
                raw.spsa_stability = Some(c.stability_offset);
            }
            OptimizerSpec::Cma(c) => {
                raw.optimizer = Some("cma".into());
                raw.cma_sigma0 = Some(c.sigma0);
                raw.cma_population = c.population;
                raw.cma_mu = Some(c.parent_fraction);
                raw.cma_c_mean = Some(c.c_mean);
                raw.cma_damp_factor = Some(c.damp_factor);
            }
        }
        e.optimizer = optimizer;
        e
    }
}
