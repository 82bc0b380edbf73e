//! Iterated racing for hyperparameter tuning.
//!
//! Each generation races a candidate set over shared instances. After every
//! round past the minimum repetitions a Friedman test (Iman–Davenport F form)
//! decides whether ranks differ; if so, a Conover post-hoc comparison against
//! the best rank sum removes significantly worse candidates. Survivors seed
//! the next generation through a truncated normal whose spread halves each
//! generation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, substream, StreamRng, StreamTag};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DimKind {
    Real,
    Integer,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dimension {
    pub name: String,
    pub kind: DimKind,
    pub lower: f64,
    pub upper: f64,
}

impl Dimension {
    pub fn real(name: &str, lower: f64, upper: f64) -> Self {
        Self { name: name.into(), kind: DimKind::Real, lower, upper }
    }

    pub fn integer(name: &str, lower: i64, upper: i64) -> Self {
        Self { name: name.into(), kind: DimKind::Integer, lower: lower as f64, upper: upper as f64 }
    }

    pub fn range(&self) -> f64 {
        self.upper - self.lower
    }

    fn clamp(&self, v: f64) -> f64 {
        let v = match self.kind {
            DimKind::Real => v,
            DimKind::Integer => v.round(),
        };
        v.clamp(self.lower, self.upper)
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower && v <= self.upper && (self.kind == DimKind::Real || v.fract() == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamSpace {
    dims: Vec<Dimension>,
}

impl ParamSpace {
    pub fn new(dims: Vec<Dimension>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidConfig("parameter space has no dimensions".into()));
        }
        for d in &dims {
            if !d.lower.is_finite() || !d.upper.is_finite() || d.lower >= d.upper {
                return Err(Error::InvalidConfig(format!(
                    "dimension {} needs finite lower < upper, got [{}, {}]",
                    d.name, d.lower, d.upper
                )));
            }
            if d.kind == DimKind::Integer && (d.lower.fract() != 0.0 || d.upper.fract() != 0.0) {
                return Err(Error::InvalidConfig(format!("integer dimension {} has fractional bounds", d.name)));
            }
        }
        Ok(Self { dims })
    }

    /// SPSA gains and perturbation ranges.
    pub fn spsa_default() -> Self {
        Self::new(vec![
            Dimension::real("a", 0.01, 2.0),
            Dimension::real("alpha", 0.0, 1.0),
            Dimension::real("c", 0.01, 2.0),
            Dimension::real("gamma", 0.0, 1.0 / 6.0),
        ])
        .expect("static space")
    }

    /// CMA-ES population, mean rate, parent fraction, damping and step size.
    pub fn cma_default() -> Self {
        Self::new(vec![
            Dimension::integer("population", 30, 130),
            Dimension::real("c_mean", 0.0, 1.0),
            Dimension::real("mu", 0.0, 0.5),
            Dimension::real("damp_factor", 0.0, 1.0),
            Dimension::real("sigma0", 0.25, 1.1),
        ])
        .expect("static space")
    }

    pub fn dims(&self) -> &[Dimension] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn contains(&self, config: &[f64]) -> bool {
        config.len() == self.dims.len() && self.dims.iter().zip(config).all(|(d, &v)| d.contains(v))
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.dims.iter().position(|d| d.name == name)
    }

    /// `name=value` pairs.
    pub fn describe(&self, config: &[f64]) -> String {
        self.dims
            .iter()
            .zip(config)
            .map(|(d, v)| match d.kind {
                DimKind::Real => format!("{}={v}", d.name),
                DimKind::Integer => format!("{}={}", d.name, *v as i64),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

const TRUNCATION_TRIES: usize = 64;

/// Uniform in bounds without `around`; otherwise a truncated normal around it
/// with standard deviation `spread × range` per dimension.
pub fn sample_config(space: &ParamSpace, around: Option<&[f64]>, spread: f64, rng: &mut impl Rng) -> Vec<f64> {
    space
        .dims
        .iter()
        .enumerate()
        .map(|(i, d)| match around {
            None => match d.kind {
                DimKind::Real => rng.random_range(d.lower..=d.upper),
                DimKind::Integer => rng.random_range(d.lower as i64..=d.upper as i64) as f64,
            },
            Some(center) => {
                let sd = (spread * d.range()).max(0.0);
                let Ok(normal) = Normal::new(center[i], sd) else { return d.clamp(center[i]) };
                let draw = (0..TRUNCATION_TRIES)
                    .map(|_| normal.sample(rng))
                    .find(|v| *v >= d.lower && *v <= d.upper)
                    .unwrap_or(center[i]);
                d.clamp(draw)
            }
        })
        .collect()
}

/// Scores configurations on seeded instances; lower is better.
pub trait Objective {
    fn evaluate(&mut self, config: &[f64], instance_seed: u64) -> Result<f64>;

    /// One round; override to run jobs in parallel. Results keep job order.
    fn evaluate_batch(&mut self, jobs: &[(&[f64], u64)]) -> Vec<Result<f64>> {
        jobs.iter().map(|(c, s)| self.evaluate(c, *s)).collect()
    }
}

pub struct FnObjective<F>(pub F);

impl<F: FnMut(&[f64], u64) -> f64> Objective for FnObjective<F> {
    fn evaluate(&mut self, config: &[f64], instance_seed: u64) -> Result<f64> {
        Ok((self.0)(config, instance_seed))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Friedman {
    pub blocks: usize,
    pub treatments: usize,
    pub rank_sums: Vec<f64>,
    /// Tie-corrected Friedman chi-square.
    pub chi_square: f64,
    /// Iman–Davenport statistic; infinite under perfect concordance.
    pub f_statistic: f64,
    pub p_value: f64,
    /// Standard error of a rank-sum difference in the Conover comparison.
    pub conover_se: f64,
}

fn midranks(row: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|&a, &b| row[a].total_cmp(&row[b]));
    let mut ranks = vec![0.0; row.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && row[idx[j + 1]] == row[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Friedman test on `scores[block][treatment]`; needs at least two of each.
pub fn friedman(scores: &[Vec<f64>]) -> Result<Friedman> {
    let b = scores.len();
    let k = scores.first().map_or(0, Vec::len);
    if b < 2 || k < 2 || scores.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidConfig(format!("friedman test needs a rectangular table of at least 2x2, got {b}x{k}")));
    }
    let (bf, kf) = (b as f64, k as f64);
    let mut rank_sums = vec![0.0; k];
    let mut a = 0.0;
    for row in scores {
        for (j, r) in midranks(row).into_iter().enumerate() {
            rank_sums[j] += r;
            a += r * r;
        }
    }
    let c = bf * kf * (kf + 1.0).powi(2) / 4.0;
    let centre = bf * (kf + 1.0) / 2.0;
    let spread: f64 = rank_sums.iter().map(|r| (r - centre).powi(2)).sum();
    let chi_square = if a - c > 0.0 { (kf - 1.0) * spread / (a - c) } else { 0.0 };
    let denom = bf * (kf - 1.0) - chi_square;
    let f_statistic = if chi_square == 0.0 {
        0.0
    } else if denom <= 1e-12 * bf * kf {
        f64::INFINITY
    } else {
        (bf - 1.0) * chi_square / denom
    };
    let p_value = if f_statistic.is_infinite() {
        0.0
    } else {
        let dist = FisherSnedecor::new(kf - 1.0, (bf - 1.0) * (kf - 1.0))
            .map_err(|e| Error::InvalidConfig(format!("F distribution: {e}")))?;
        1.0 - dist.cdf(f_statistic)
    };
    let sum_sq: f64 = rank_sums.iter().map(|r| r * r).sum();
    let conover_se = (2.0 * (bf * a - sum_sq).max(0.0) / ((bf - 1.0) * (kf - 1.0))).sqrt();
    Ok(Friedman { blocks: b, treatments: k, rank_sums, chi_square, f_statistic, p_value, conover_se })
}

impl Friedman {
    /// Treatments significantly worse than the lowest rank sum, with two-sided
    /// Conover p-values.
    pub fn worse_than_best(&self, alpha: f64) -> Result<Vec<(usize, f64)>> {
        let best = self
            .rank_sums
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let df = ((self.blocks - 1) * (self.treatments - 1)) as f64;
        let t = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidConfig(format!("t distribution: {e}")))?;
        let mut out = Vec::new();
        for (j, &r) in self.rank_sums.iter().enumerate() {
            let diff = r - self.rank_sums[best];
            if j == best || diff <= 0.0 {
                continue;
            }
            let p = if self.conover_se == 0.0 { 0.0 } else { 2.0 * (1.0 - t.cdf(diff / self.conover_se)) };
            if p < alpha {
                out.push((j, p));
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RaceConfig {
    /// Objective invocations across the whole tuning run.
    pub budget: u64,
    /// Rounds before the first test.
    pub initial_reps: usize,
    /// Survivor count that ends a race and seeds the next generation.
    pub elites: usize,
    pub new_per_generation: usize,
    /// Uniform candidates in the first generation.
    pub initial_candidates: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for RaceConfig {
    fn default() -> Self {
        Self { budget: 500, initial_reps: 2, elites: 5, new_per_generation: 10, initial_candidates: 15, alpha: 0.05, seed: 0 }
    }
}

impl RaceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.initial_reps < 2 || self.elites == 0 || !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "race needs initial_reps >= 2, elites >= 1 and alpha in (0, 1); got {self:?}"
            )));
        }
        Ok(())
    }

    /// Generations the budget is split across: `max(3, 2 + log2(d))`.
    pub fn planned_generations(&self, dims: usize) -> u64 {
        (2 + (dims.max(1) as f64).log2().floor() as u64).max(3)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub id: usize,
    pub values: Vec<f64>,
    pub generation: u64,
    pub parent: Option<usize>,
    /// Score per instance index.
    pub scores: BTreeMap<u64, f64>,
}

impl Candidate {
    pub fn mean_score(&self) -> f64 {
        if self.scores.is_empty() {
            return f64::INFINITY;
        }
        self.scores.values().sum::<f64>() / self.scores.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundReport {
    pub instance: u64,
    pub alive: Vec<usize>,
    pub evaluations: u64,
    pub p_value: Option<f64>,
    pub eliminated: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationReport {
    pub generation: u64,
    pub spread: f64,
    pub candidates: Vec<usize>,
    pub rounds: Vec<RoundReport>,
    pub survivors: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct TuneReport {
    pub space: ParamSpace,
    pub candidates: Vec<Candidate>,
    pub generations: Vec<GenerationReport>,
    /// Elite ids, best mean score first.
    pub elites: Vec<usize>,
    pub evaluations_used: u64,
    pub budget: u64,
}

impl TuneReport {
    pub fn elite_configs(&self) -> Vec<&Candidate> {
        self.elites.iter().map(|&i| &self.candidates[i]).collect()
    }

    pub fn best(&self) -> Option<&Candidate> {
        self.elites.first().map(|&i| &self.candidates[i])
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "evaluations {} of {}", self.evaluations_used, self.budget);
        for g in &self.generations {
            let _ = writeln!(s, "generation {} spread {} candidates {}", g.generation, g.spread, g.candidates.len());
            for r in &g.rounds {
                let p = r.p_value.map_or("-".to_string(), |p| format!("{p:.6e}"));
                let elim: Vec<String> = r.eliminated.iter().map(|(id, p)| format!("{id}:{p:.6e}")).collect();
                let _ = writeln!(
                    s,
                    "  instance {} alive {} evaluations {} friedman_p {} eliminated [{}]",
                    r.instance,
                    r.alive.len(),
                    r.evaluations,
                    p,
                    elim.join(" ")
                );
            }
            for &id in &g.survivors {
                let c = &self.candidates[id];
                let _ = writeln!(s, "  survivor {id} mean {:.6e} {}", c.mean_score(), self.space.describe(&c.values));
            }
        }
        let _ = writeln!(s, "elites");
        for (rank, c) in self.elite_configs().into_iter().enumerate() {
            let _ = writeln!(
                s,
                "  {} id {} mean {:.6e} instances {} {}",
                rank + 1,
                c.id,
                c.mean_score(),
                c.scores.len(),
                self.space.describe(&c.values)
            );
        }
        s
    }
}

struct Race<'o, O: Objective + ?Sized> {
    objective: &'o mut O,
    config: RaceConfig,
    candidates: Vec<Candidate>,
    used: u64,
}

impl<O: Objective + ?Sized> Race<'_, O> {
    fn instance_seed(&self, instance: u64) -> u64 {
        derive_seed(self.config.seed, StreamTag::Racing, instance)
    }

    /// Evaluates every id lacking `instance`; false if the budget cannot fund it.
    fn run_round(&mut self, alive: &[usize], instance: u64, cap: u64) -> Option<u64> {
        let missing: Vec<usize> = alive.iter().copied().filter(|&i| !self.candidates[i].scores.contains_key(&instance)).collect();
        if self.used + missing.len() as u64 > cap {
            return None;
        }
        let seed = self.instance_seed(instance);
        let jobs: Vec<(&[f64], u64)> = missing.iter().map(|&i| (self.candidates[i].values.as_slice(), seed)).collect();
        let results = self.objective.evaluate_batch(&jobs);
        for (&i, r) in missing.iter().zip(results) {
            let score = match r {
                Ok(v) if v.is_finite() => v,
                Ok(v) => {
                    log::warn!("candidate {i} instance {instance}: non-finite score {v}, scored as worst");
                    f64::INFINITY
                }
                Err(e) => {
                    log::warn!("candidate {i} instance {instance}: {e}, scored as worst");
                    f64::INFINITY
                }
            };
            self.candidates[i].scores.insert(instance, score);
        }
        self.used += missing.len() as u64;
        Some(missing.len() as u64)
    }

    /// Races `ids` within `cap` total evaluations; returns the report.
    fn race(&mut self, generation: u64, spread: f64, ids: Vec<usize>, cap: u64) -> Result<GenerationReport> {
        let mut alive = ids.clone();
        let mut rounds = Vec::new();
        let mut instance = 0u64;
        while let Some(evaluations) = self.run_round(&alive, instance, cap) {
            instance += 1;
            let mut round = RoundReport { instance, alive: alive.clone(), evaluations, p_value: None, eliminated: Vec::new() };
            if instance as usize >= self.config.initial_reps && alive.len() >= 2 {
                let table: Vec<Vec<f64>> =
                    (0..instance).map(|s| alive.iter().map(|&i| self.candidates[i].scores[&s]).collect()).collect();
                let test = friedman(&table)?;
                round.p_value = Some(test.p_value);
                if test.p_value < self.config.alpha {
                    let worse = test.worse_than_best(self.config.alpha)?;
                    // never race below the elite count in one step
                    let mut worse: Vec<(usize, f64)> = worse.into_iter().map(|(j, p)| (alive[j], p)).collect();
                    worse.sort_by(|x, y| {
                        self.candidates[y.0].mean_score().total_cmp(&self.candidates[x.0].mean_score()).then(x.0.cmp(&y.0))
                    });
                    let removable = alive.len().saturating_sub(self.config.elites);
                    worse.truncate(removable);
                    alive.retain(|i| !worse.iter().any(|(w, _)| w == i));
                    round.eliminated = worse;
                }
            }
            rounds.push(round);
            if alive.len() <= self.config.elites && instance as usize >= self.config.initial_reps {
                break;
            }
        }
        // survivors share instances 0..instance
        alive.sort_by(|&x, &y| self.candidates[x].mean_score().total_cmp(&self.candidates[y].mean_score()).then(x.cmp(&y)));
        alive.truncate(self.config.elites);
        Ok(GenerationReport { generation, spread, candidates: ids, rounds, survivors: alive })
    }

    fn add(&mut self, values: Vec<f64>, generation: u64, parent: Option<usize>) -> usize {
        let id = self.candidates.len();
        self.candidates.push(Candidate { id, values, generation, parent, scores: BTreeMap::new() });
        id
    }
}

fn pick_elite(elites: &[usize], rng: &mut StreamRng) -> usize {
    // rank-proportional: weight n - r for zero-based rank r
    let n = elites.len();
    let total = n * (n + 1) / 2;
    let mut u = rng.random_range(0..total);
    for (r, &id) in elites.iter().enumerate() {
        let w = n - r;
        if u < w {
            return id;
        }
        u -= w;
    }
    elites[n - 1]
}

/// Races a fixed set of configurations once within `config.budget`.
pub fn race<O: Objective + ?Sized>(configs: Vec<Vec<f64>>, objective: &mut O, config: &RaceConfig) -> Result<TuneReport> {
    config.validate()?;
    let dims = configs.first().map_or(0, Vec::len);
    let space = ParamSpace {
        dims: (0..dims).map(|i| Dimension::real(&format!("x{i}"), f64::NEG_INFINITY, f64::INFINITY)).collect(),
    };
    let mut r = Race { objective, config: config.clone(), candidates: Vec::new(), used: 0 };
    let ids: Vec<usize> = configs.into_iter().map(|c| r.add(c, 1, None)).collect();
    let report = r.race(1, 1.0, ids, config.budget)?;
    let elites = report.survivors.clone();
    Ok(TuneReport { space, candidates: r.candidates, generations: vec![report], elites, evaluations_used: r.used, budget: config.budget })
}

/// Iterated racing over `space`.
pub fn tune<O: Objective + ?Sized>(space: &ParamSpace, objective: &mut O, config: &RaceConfig) -> Result<TuneReport> {
    config.validate()?;
    let mut r = Race { objective, config: config.clone(), candidates: Vec::new(), used: 0 };
    let planned = config.planned_generations(space.len());
    let mut generations = Vec::new();
    let mut elites: Vec<usize> = Vec::new();
    let mut generation = 1u64;
    loop {
        let remaining = config.budget - r.used;
        let mut share = remaining / planned.saturating_sub(generation - 1).max(1);
        if generation == 1 {
            // the first race always affords its initial repetitions
            share = share.max((config.initial_candidates * config.initial_reps) as u64).min(remaining);
        }
        let spread = 0.5f64.powi(generation as i32 - 1);
        // elites already hold the first instances; new candidates need initial_reps each
        let elite_debt: u64 = elites
            .iter()
            .map(|&e| (0..config.initial_reps as u64).filter(|s| !r.candidates[e].scores.contains_key(s)).count() as u64)
            .sum();
        let wanted = if generation == 1 { config.initial_candidates } else { config.new_per_generation };
        let affordable = share.saturating_sub(elite_debt) / config.initial_reps as u64;
        let n_new = wanted.min(affordable as usize);
        if n_new == 0 {
            break;
        }
        let mut rng = substream(config.seed, StreamTag::Racing, u64::MAX - generation, 0);
        let mut ids = elites.clone();
        for _ in 0..n_new {
            let (values, parent) = if elites.is_empty() {
                (sample_config(space, None, spread, &mut rng), None)
            } else {
                let parent = pick_elite(&elites, &mut rng);
                (sample_config(space, Some(&r.candidates[parent].values), spread, &mut rng), Some(parent))
            };
            ids.push(r.add(values, generation, parent));
        }
        let cap = r.used + share;
        let report = r.race(generation, spread, ids, cap)?;
        elites = report.survivors.clone();
        generations.push(report);
        generation += 1;
    }
    elites.sort_by(|&x, &y| r.candidates[x].mean_score().total_cmp(&r.candidates[y].mean_score()).then(x.cmp(&y)));
    Ok(TuneReport {
        space: space.clone(),
        candidates: r.candidates,
        generations,
        elites,
        evaluations_used: r.used,
        budget: config.budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::StandardNormal;

    /// `(a − 0.7)² + N(0, 0.01²)`, noise keyed by instance and configuration.
    fn synthetic(config: &[f64], instance_seed: u64) -> f64 {
        let mut rng = StreamRng::seed_from_u64(instance_seed ^ config[0].to_bits().rotate_left(17));
        let noise: f64 = StandardNormal.sample(&mut rng);
        (config[0] - 0.7).powi(2) + 0.01 * noise
    }

    #[test]
    fn friedman_matches_reference_values() {
        // scipy.stats.friedmanchisquare gives 6.4; scipy.stats.f.sf(7.111…, 2, 8) = 0.01679616
        let table = vec![
            vec![1.0, 2.0, 3.0],
            vec![2.0, 1.0, 3.0],
            vec![1.0, 2.0, 3.0],
            vec![1.0, 3.0, 2.0],
            vec![1.0, 2.0, 3.0],
        ];
        let f = friedman(&table).unwrap();
        assert!((f.chi_square - 6.4).abs() < 1e-12);
        assert_eq!(f.rank_sums, vec![6.0, 10.0, 14.0]);
        assert!((f.f_statistic - 7.1111111111111125).abs() < 1e-12);
        assert!((f.p_value - 0.01679616).abs() < 1e-9);
    }

    #[test]
    fn friedman_handles_ties_and_concordance() {
        let tied = friedman(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert_eq!(tied.chi_square, 0.0);
        assert_eq!(tied.p_value, 1.0);
        let perfect = friedman(&[vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert!(perfect.f_statistic.is_infinite());
        assert_eq!(perfect.worse_than_best(0.05).unwrap(), vec![(1, 0.0)]);
        assert!(friedman(&[vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn single_configuration_is_returned_unchanged() {
        let mut calls = 0;
        let mut obj = FnObjective(|c: &[f64], s: u64| {
            calls += 1;
            synthetic(c, s)
        });
        let report = race(vec![vec![0.3]], &mut obj, &RaceConfig::default()).unwrap();
        assert_eq!(report.elites, vec![0]);
        assert_eq!(report.candidates[0].values, vec![0.3]);
        assert_eq!(report.evaluations_used, 2);
        assert_eq!(calls, 2);
    }

    #[test]
    fn dominated_configuration_is_dropped_after_two_instances() {
        let mut obj = FnObjective(|c: &[f64], s: u64| {
            let mut rng = StreamRng::seed_from_u64(s);
            let noise: f64 = StandardNormal.sample(&mut rng);
            c[0] + 0.01 * noise
        });
        let cfg = RaceConfig { elites: 1, ..Default::default() };
        let report = race(vec![vec![0.0], vec![0.1]], &mut obj, &cfg).unwrap();
        let rounds = &report.generations[0].rounds;
        assert_eq!(rounds.len(), 2);
        assert_eq!(rounds[1].eliminated.len(), 1);
        assert_eq!(rounds[1].eliminated[0].0, 1);
        assert_eq!(report.elites, vec![0]);
    }

    #[test]
    fn synthetic_objective_recovers_optimum() {
        let space = ParamSpace::new(vec![Dimension::real("a", 0.01, 2.0)]).unwrap();
        let report = tune(&space, &mut FnObjective(synthetic), &RaceConfig { seed: 11, ..Default::default() }).unwrap();
        assert!(report.evaluations_used <= 500);
        assert!(report.generations.len() >= 3, "{}", report.render());
        let elites = report.elite_configs();
        let mean = elites.iter().map(|c| c.values[0]).sum::<f64>() / elites.len() as f64;
        assert!((mean - 0.7).abs() < 0.1, "elite mean {mean}\n{}", report.render());
    }

    #[test]
    fn small_budget_runs_a_single_race() {
        let space = ParamSpace::spsa_default();
        let cfg = RaceConfig { budget: 10, initial_candidates: 5, ..Default::default() };
        let r = tune(&space, &mut FnObjective(|c: &[f64], s: u64| synthetic(c, s)), &cfg).unwrap();
        assert_eq!(r.generations.len(), 1);
        assert_eq!(r.generations[0].rounds.len(), 2);
        assert_eq!(r.evaluations_used, 10);
        assert!(r.elite_configs().iter().all(|c| space.contains(&c.values)));
    }

    #[test]
    fn failures_score_as_worst() {
        struct Flaky;
        impl Objective for Flaky {
            fn evaluate(&mut self, c: &[f64], _: u64) -> Result<f64> {
                if c[0] > 0.5 {
                    Err(Error::InvalidConfig("boom".into()))
                } else {
                    Ok(c[0])
                }
            }
        }
        let report = race(vec![vec![0.9], vec![0.1]], &mut Flaky, &RaceConfig { elites: 1, ..Default::default() }).unwrap();
        assert_eq!(report.elites, vec![1]);
        assert!(report.candidates[0].scores.values().all(|v| v.is_infinite()));
    }

    #[test]
    fn integer_dimension_near_elite() {
        let space = ParamSpace::cma_default();
        let mut rng = substream(2, StreamTag::Racing, 0, 0);
        let elite = [113.0, 0.5, 0.25, 0.5, 0.6];
        for _ in 0..200 {
            let c = sample_config(&space, Some(&elite), 1e-6, &mut rng);
            assert_eq!(c[0], 113.0);
            assert!(space.contains(&c));
        }
        let edge = [130.0, 1.0, 0.5, 1.0, 1.1];
        for _ in 0..200 {
            assert!(space.contains(&sample_config(&space, Some(&edge), 0.3, &mut rng)));
        }
    }

    #[test]
    fn uniform_draws_stay_in_bounds() {
        let space = ParamSpace::spsa_default();
        let mut rng = substream(5, StreamTag::Racing, 0, 0);
        let draws: Vec<Vec<f64>> = (0..10_000).map(|_| sample_config(&space, None, 1.0, &mut rng)).collect();
        for (i, d) in space.dims().iter().enumerate() {
            let lo = draws.iter().map(|c| c[i]).fold(f64::INFINITY, f64::min);
            let hi = draws.iter().map(|c| c[i]).fold(f64::NEG_INFINITY, f64::max);
            assert!(lo >= d.lower && hi <= d.upper, "{}: [{lo}, {hi}]", d.name);
        }
        let gamma = space.index_of("gamma").unwrap();
        assert!(draws.iter().all(|c| c[gamma] <= 1.0 / 6.0));
    }

    #[test]
    fn rejects_degenerate_bounds() {
        assert!(ParamSpace::new(vec![Dimension::real("x", 1.0, 1.0)]).is_err());
        assert!(ParamSpace::new(vec![]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn budget_is_never_exceeded_and_runs_repeat(budget in 0u64..200, seed in any::<u64>()) {
            let space = ParamSpace::new(vec![Dimension::real("a", 0.01, 2.0), Dimension::integer("n", 1, 9)]).unwrap();
            let cfg = RaceConfig { budget, seed, ..Default::default() };
            let mut calls = 0u64;
            let mut obj = FnObjective(|c: &[f64], s: u64| { calls += 1; synthetic(c, s) + 0.01 * c[1] });
            let a = tune(&space, &mut obj, &cfg).unwrap();
            prop_assert!(a.evaluations_used <= budget);
            prop_assert_eq!(calls, a.evaluations_used);
            for c in &a.candidates {
                prop_assert!(space.contains(&c.values));
            }
            let b = tune(&space, &mut FnObjective(|c: &[f64], s: u64| synthetic(c, s) + 0.01 * c[1]), &cfg).unwrap();
            prop_assert_eq!(a.elites, b.elites);
            prop_assert_eq!(a.candidates, b.candidates);
        }

        #[test]
        fn eliminations_respect_alpha(seed in any::<u64>()) {
            let space = ParamSpace::new(vec![Dimension::real("a", 0.01, 2.0)]).unwrap();
            let r = tune(&space, &mut FnObjective(synthetic), &RaceConfig { seed, budget: 150, ..Default::default() }).unwrap();
            for g in &r.generations {
                for round in &g.rounds {
                    if !round.eliminated.is_empty() {
                        prop_assert!(round.p_value.unwrap() < 0.05);
                        prop_assert!(round.eliminated.iter().all(|(_, p)| *p < 0.05));
                    }
                }
            }
        }
    }
}
