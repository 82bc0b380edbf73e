//! Problem construction and seeded optimizer runs.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use vqa_core::analysis::{
    compare_candidates, exact_ground, noise_floor, relative_error, CandidateComparison, ExactSolution, NoiseFloor,
    Sector,
};
use vqa_core::ansatz::{build_ucc, build_vha, AnsatzCircuit};
use vqa_core::fermion::{build_hubbard, HubbardSpec};
use vqa_core::formats::{GeneratorFile, HamiltonianFile};
use vqa_core::optim::{cma_minimize, spsa_minimize, NoisyEnergy, OptResult};
use vqa_core::sampler::ShotLedger;
use vqa_core::schedule::ShotSchedule;
use vqa_core::PauliSum;

use crate::config::{AnsatzSpec, Experiment, OptimizerSpec, ProblemSpec, ScheduleSpec};
use crate::error::BenchError;

/// Hamiltonian, circuit and exact reference for one configuration.
#[derive(Clone, Debug)]
pub struct Problem {
    pub system: String,
    pub hamiltonian: PauliSum,
    pub circuit: AnsatzCircuit,
    pub exact: ExactSolution,
}

impl Problem {
    pub fn c0(&self) -> f64 {
        self.hamiltonian.identity_coeff()
    }
}

pub fn read_text(path: &Path) -> Result<String, BenchError> {
    fs::read_to_string(path).map_err(|e| BenchError::io(path, e))
}

/// Hamiltonian and electron count without building an ansatz.
pub fn load_hamiltonian(problem: &ProblemSpec) -> Result<(PauliSum, usize), BenchError> {
    match problem {
        ProblemSpec::Hubbard { rows, cols, t, u } => {
            let spec = HubbardSpec::new(*rows, *cols, *t, *u);
            Ok((build_hubbard(&spec)?.full(), spec.n_particles))
        }
        ProblemSpec::File(path) => {
            let file = HamiltonianFile::parse(&read_text(path)?)?;
            Ok((file.hamiltonian, file.electrons))
        }
    }
}

pub fn build_problem(exp: &Experiment) -> Result<Problem, BenchError> {
    let (hamiltonian, circuit) = match (&exp.problem, &exp.ansatz) {
        (ProblemSpec::Hubbard { rows, cols, t, u }, AnsatzSpec::Vha { layers }) => {
            let partition = build_hubbard(&HubbardSpec::new(*rows, *cols, *t, *u))?;
            (partition.full(), build_vha(&partition, *layers)?)
        }
        (ProblemSpec::File(h_path), AnsatzSpec::Ucc { generators }) => {
            let h = HamiltonianFile::parse(&read_text(h_path)?)?;
            let g = GeneratorFile::parse(&read_text(generators)?)?;
            if g.n_qubits != h.n_qubits() || g.electrons != h.electrons {
                return Err(BenchError::Config(vec![format!(
                    "generator file ({} qubits, {} electrons) does not match hamiltonian ({} qubits, {} electrons)",
                    g.n_qubits,
                    g.electrons,
                    h.n_qubits(),
                    h.electrons
                )]));
            }
            (h.hamiltonian, build_ucc(&g)?)
        }
        _ => return Err(BenchError::Config(vec!["ansatz does not match problem kind".into()])),
    };
    let exact = exact_ground(&hamiltonian, Some(Sector::particles_min_spin(circuit.electrons())))?;
    Ok(Problem { system: exp.system(), hamiltonian, circuit, exact })
}

/// One finished repetition with its noiseless post-processing.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub run: u64,
    pub seed: u64,
    pub result: OptResult,
    pub comparison: CandidateComparison,
    pub rel_err_best: f64,
    pub rel_err_favourite: f64,
    /// At the exact ground state with the final stage's shots; absent for an empty schedule.
    pub noise_floor: Option<NoiseFloor>,
}

/// Runs `optimizer` from θ = 0 with shot noise keyed by `seed`.
pub fn optimize(
    problem: &Problem,
    optimizer: &OptimizerSpec,
    schedule: &ShotSchedule,
    seed: u64,
) -> Result<OptResult, BenchError> {
    let x0 = vec![0.0; problem.circuit.n_params()];
    let mut ledger = ShotLedger::new(schedule.ledger_budget());
    let mut cost = NoisyEnergy::new(&problem.circuit, &problem.hamiltonian, seed);
    let result = match *optimizer {
        OptimizerSpec::Spsa(cfg) => spsa_minimize(&mut cost, &x0, &vqa_core::optim::SpsaConfig { seed, ..cfg }, schedule, &mut ledger)?,
        OptimizerSpec::Cma(cfg) => cma_minimize(&mut cost, &x0, &vqa_core::optim::CmaConfig { seed, ..cfg }, schedule, &mut ledger)?,
    };
    Ok(result)
}

pub fn run_single(
    problem: &Problem,
    optimizer: &OptimizerSpec,
    schedule: &ShotSchedule,
    run: u64,
    seed: u64,
    p: f64,
) -> Result<RunOutput, BenchError> {
    let result = optimize(problem, optimizer, schedule, seed)?;
    let comparison = compare_candidates(&result, &problem.circuit, &problem.hamiltonian, &problem.exact)?;
    let (e0, c0) = (problem.exact.e0, problem.c0());
    let noise_floor = match schedule.stages().last() {
        Some(stage) if stage.shots_per_pauli > 0 => {
            Some(noise_floor(&problem.hamiltonian, &problem.exact.ground_vector, stage.shots_per_pauli, p)?)
        }
        _ => None,
    };
    Ok(RunOutput {
        run,
        seed,
        rel_err_best: relative_error(comparison.cost_best, e0, c0)?,
        rel_err_favourite: relative_error(comparison.cost_favourite, e0, c0)?,
        comparison,
        result,
        noise_floor,
    })
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, BenchError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| BenchError::Config(vec![format!("cannot start {workers} workers: {e}")]))
}

/// All repetitions of `exp`; run `i` uses seed `base_seed + i`. Output order is by run.
pub fn run_batch(exp: &Experiment, problem: &Problem, workers: usize) -> Result<Vec<RunOutput>, BenchError> {
    let schedule = exp.schedule.build()?;
    let runs: Vec<u64> = (0..exp.n_repetitions).collect();
    let work = || {
        runs.par_iter()
            .map(|&i| run_single(problem, &exp.optimizer, &schedule, i, exp.base_seed + i, exp.noise_floor_p))
            .collect::<Result<Vec<_>, _>>()
    };
    if workers == 0 {
        work()
    } else {
        pool(workers)?.install(work)
    }
}

/// Evaluates `f` over `items` on `workers` threads, keeping input order.
pub(crate) fn parallel_map<T: Sync, R: Send>(workers: usize, items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let work = || items.par_iter().map(&f).collect();
    match workers {
        0 => work(),
        n => match pool(n) {
            Ok(p) => p.install(work),
            Err(_) => items.iter().map(&f).collect(),
        },
    }
}

/// Checks a schedule can be built without running anything.
pub fn check_schedule(spec: &ScheduleSpec) -> Result<ShotSchedule, BenchError> {
    Ok(spec.build()?)
}
