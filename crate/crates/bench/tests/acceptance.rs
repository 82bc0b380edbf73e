//! Acceptance criteria, each checked at its stated tolerance and time limit.
//!
//! Prints one `PASS`/`FAIL` line per criterion and fails if any criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use vqa_bench::commands::cmd_run;
use vqa_bench::experiment::{build_problem, run_single};
use vqa_bench::ExperimentConfig;
use vqa_core::analysis::{exact_ground, Sector};
use vqa_core::ansatz::build_vha;
use vqa_core::fermion::{build_hubbard, jordan_wigner, FermionOp, HubbardSpec, Ladder};
use vqa_core::optim::{cma_minimize, spsa_minimize, CmaConfig, ExactEnergy, FnCost, SpsaConfig};
use vqa_core::racing::{tune, Dimension, FnObjective, ParamSpace, RaceConfig};
use vqa_core::rng::{substream, StreamTag};
use vqa_core::sampler::{noisy_cost, state_variance, NoiseSource, ShotLedger};
use vqa_core::schedule::ShotSchedule;
use vqa_core::{PauliString, PauliSum, PauliTerm, StateVector};

type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn random_state(n: usize, seed: u64) -> StateVector {
    let mut rng = substream(seed, StreamTag::Objective, 0, 0);
    let amps = (0..1 << n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    StateVector::from_amplitudes(n, amps).unwrap()
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (mean, xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0))
}

fn schedule_exactness() -> Outcome {
    let t = Instant::now();
    let s = ShotSchedule::three_stage(10_000_000, (100, 1000, 10_000)).unwrap();
    let elapsed = t.elapsed();
    let counts: Vec<u64> = s.stages().iter().map(|s| s.evaluations).collect();
    Outcome {
        passed: counts == [7150, 2145, 715] && elapsed < Duration::from_millis(1),
        detail: format!("evaluations {counts:?} in {elapsed:?}"),
    }
}

fn parameter_counts() -> Outcome {
    let counts: Vec<usize> = [(1, 6, 5), (2, 2, 2), (2, 3, 4)]
        .iter()
        .map(|&(r, c, l)| build_vha(&build_hubbard(&HubbardSpec::new(r, c, 1.0, 2.0)).unwrap(), l).unwrap().n_params())
        .collect();
    Outcome { passed: counts == [15, 6, 16], detail: format!("1x6/5L, 2x2/2L, 2x3/4L -> {counts:?}") }
}

fn estimator_law() -> Outcome {
    let state = random_state(4, 21);
    let p = PauliString::parse("XZIY", 4).unwrap();
    let mu = state.expectation(&p).unwrap();
    let h = PauliSum::from_terms(4, 0.0, &[PauliTerm::new(1.0, p).unwrap()]).unwrap();
    let (m, reps) = (10_000u64, 10_000usize);
    let mut ledger = ShotLedger::new(m * reps as u64);
    let mut noise = NoiseSource::new(5);
    let xs: Vec<f64> = (0..reps).map(|_| noisy_cost(&state, &h, m, &mut ledger, &mut noise).unwrap().value).collect();
    let (mean, var) = mean_var(&xs);
    let expected_var = (1.0 - mu * mu) / m as f64;
    let bound = 4.0 * (expected_var / reps as f64).sqrt();
    let rel = (var / expected_var - 1.0).abs();
    Outcome {
        passed: (mean - mu).abs() < bound && rel < 0.10,
        detail: format!("mu {mu:.6}, |mean - mu| {:.3e} < {bound:.3e}, variance off by {:.2}%", (mean - mu).abs(), 100.0 * rel),
    }
}

fn variance_propagation() -> Outcome {
    let state = random_state(4, 33);
    let h = PauliSum::from_terms(
        4,
        -0.3,
        &[
            PauliTerm::new(0.7, PauliString::parse("ZIII", 4).unwrap()).unwrap(),
            PauliTerm::new(-0.4, PauliString::parse("XXII", 4).unwrap()).unwrap(),
            PauliTerm::new(0.25, PauliString::parse("IYZY", 4).unwrap()).unwrap(),
            PauliTerm::new(1.1, PauliString::parse("ZIZX", 4).unwrap()).unwrap(),
            PauliTerm::new(-0.6, PauliString::parse("IIXZ", 4).unwrap()).unwrap(),
        ],
    )
    .unwrap();
    let (m, reps) = (1000u64, 10_000usize);
    let mut ledger = ShotLedger::new(m * reps as u64);
    let mut noise = NoiseSource::new(8);
    let xs: Vec<f64> = (0..reps).map(|_| noisy_cost(&state, &h, m, &mut ledger, &mut noise).unwrap().value).collect();
    let (_, var) = mean_var(&xs);
    let expected = state_variance(&state, &h, m).unwrap();
    let rel = (var / expected - 1.0).abs();
    Outcome { passed: rel < 0.10, detail: format!("empirical {var:.4e} vs sum c^2 sigma^2 {expected:.4e} ({:.2}%)", 100.0 * rel) }
}

/// Occupation-basis matrix of one ladder operator; bit `j` of the index is mode `j`.
fn dense_ladder(l: Ladder, n: usize) -> DMatrix<Complex64> {
    let dim = 1 << n;
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        let occupied = b >> l.mode & 1 == 1;
        if occupied == l.dagger {
            continue;
        }
        let parity = (b & ((1 << l.mode) - 1)).count_ones();
        let sign = if parity.is_multiple_of(2) { 1.0 } else { -1.0 };
        m[(b ^ (1 << l.mode), b)] = Complex64::new(sign, 0.0);
    }
    m
}

fn dense_fermion(op: &FermionOp, n: usize) -> DMatrix<Complex64> {
    let dim = 1 << n;
    let mut total = DMatrix::zeros(dim, dim);
    for p in &op.products {
        let mut acc = DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(p.coeff, 0.0);
        for &l in &p.factors {
            acc *= dense_ladder(l, n);
        }
        total += acc;
    }
    total
}

/// Kronecker product with qubit 0 as the least significant index bit.
fn dense_pauli_sum(h: &PauliSum) -> DMatrix<Complex64> {
    let (o, i) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
    let one = Complex64::new(1.0, 0.0);
    let n = h.n_qubits();
    let dim = 1 << n;
    let mut total = DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(h.identity_coeff(), 0.0);
    for t in h.terms() {
        let mut m = DMatrix::from_element(1, 1, one);
        for q in (0..n).rev() {
            let x = t.string.x_mask() >> q & 1 == 1;
            let z = t.string.z_mask() >> q & 1 == 1;
            let single = match (x, z) {
                (false, false) => DMatrix::from_row_slice(2, 2, &[one, o, o, one]),
                (true, false) => DMatrix::from_row_slice(2, 2, &[o, one, one, o]),
                (true, true) => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
                (false, true) => DMatrix::from_row_slice(2, 2, &[one, o, o, -one]),
            };
            m = m.kronecker(&single);
        }
        total += m * Complex64::new(t.coeff, 0.0);
    }
    total
}

fn sorted_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut v: Vec<f64> = nalgebra::SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn oracle_equivalence() -> Outcome {
    let mut rng = substream(77, StreamTag::Objective, 0, 0);
    let (mut worst, mut matrix_gap, mut spread) = (0.0f64, 0.0f64, 0.0f64);
    let mut cases = 0;
    for n in 1..=4usize {
        for _ in 0..25 {
            let mut op = FermionOp::new();
            for _ in 0..rng.random_range(1..5) {
                let len = rng.random_range(1..=4);
                let factors: Vec<Ladder> =
                    (0..len).map(|_| Ladder { mode: rng.random_range(0..n), dagger: rng.random::<bool>() }).collect();
                op.push(rng.random_range(-1.0..1.0), factors);
            }
            let adjoint = op.adjoint();
            op.extend(adjoint);
            let Ok(h) = jordan_wigner(&op, n) else {
                return Outcome { passed: false, detail: format!("mapping failed on {n} modes") };
            };
            let (mapped, direct) = (dense_pauli_sum(&h), dense_fermion(&op, n));
            let a = sorted_eigenvalues(&mapped);
            let b = sorted_eigenvalues(&direct);
            worst = worst.max(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
            matrix_gap = matrix_gap.max((&mapped - &direct).norm());
            spread = spread.max(b.last().unwrap() - b[0]);
            cases += 1;
        }
    }
    Outcome {
        passed: worst < 1e-9 && matrix_gap < 1e-9 && spread > 0.0,
        detail: format!(
            "{cases} random Hermitian operators, max eigenvalue gap {worst:.2e}, max matrix gap {matrix_gap:.2e}"
        ),
    }
}

fn noiseless_vha_quality() -> Outcome {
    let partition = build_hubbard(&HubbardSpec::new(2, 2, 1.0, 2.0)).unwrap();
    let h = partition.full();
    let circuit = build_vha(&partition, 2).unwrap();
    let exact = exact_ground(&h, Some(Sector::particles_min_spin(4))).unwrap();
    let config = CmaConfig::default();
    let evals = 300 * config.lambda(circuit.n_params()) as u64;
    let schedule = ShotSchedule::one_stage(evals, evals).unwrap();
    let mut ledger = ShotLedger::new(evals);
    let mut cost = ExactEnergy { circuit: &circuit, hamiltonian: &h };
    let r = cma_minimize(&mut cost, &vec![0.0; circuit.n_params()], &config, &schedule, &mut ledger).unwrap();
    let fidelity = circuit.prepare(&r.favourite_params).unwrap().fidelity(&exact.ground_vector);
    Outcome { passed: fidelity >= 0.99, detail: format!("{} generations, fidelity {fidelity:.12}", r.iterations) }
}

fn best_vs_favourite() -> Outcome {
    let exp = ExperimentConfig::load(&fixture("hub2x2_cma.toml")).unwrap().validate().unwrap();
    let problem = build_problem(&exp).unwrap();
    let schedule = exp.schedule.build().unwrap();
    let outs: Vec<_> = (0..15)
        .map(|i| run_single(&problem, &exp.optimizer, &schedule, i, exp.base_seed + i, exp.noise_floor_p).unwrap())
        .collect();
    let below = outs.iter().filter(|o| o.comparison.noisy_best < problem.exact.e0).count();
    let mean = |f: &dyn Fn(&vqa_bench::experiment::RunOutput) -> f64| outs.iter().map(f).sum::<f64>() / outs.len() as f64;
    let fav = mean(&|o| o.comparison.delta_favourite);
    let best = mean(&|o| o.comparison.delta_best);
    let noisy = mean(&|o| o.comparison.delta_noisy_best);
    let shots: Vec<u64> = outs.iter().map(|o| o.result.shots_spent).collect();
    Outcome {
        passed: below >= 1 && fav <= best && shots.iter().all(|&s| s <= 100_000),
        detail: format!(
            "{below}/15 noisy best-ever below E0; mean dE noisy {noisy:.4e}, best {best:.4e}, favourite {fav:.4e}"
        ),
    }
}

fn optimizer_smoke() -> Outcome {
    let sphere = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    let x0 = vec![1.0; 10];
    let s = ShotSchedule::one_stage(4000, 4000).unwrap();
    let mut ledger = ShotLedger::new(4000);
    let spsa = spsa_minimize(&mut FnCost(sphere), &x0, &SpsaConfig::default(), &s, &mut ledger).unwrap();
    let spsa_norm = sphere(&spsa.favourite_params).sqrt();

    let config = CmaConfig::default();
    let evals = 200 * config.lambda(10) as u64;
    let s = ShotSchedule::one_stage(evals, evals).unwrap();
    let mut ledger = ShotLedger::new(evals);
    let cma = cma_minimize(&mut FnCost(sphere), &x0, &config, &s, &mut ledger).unwrap();
    let cma_value = sphere(&cma.favourite_params);
    Outcome {
        passed: spsa.iterations <= 2000 && spsa_norm < 1e-2 && cma.iterations <= 200 && cma_value < 1e-8,
        detail: format!(
            "SPSA |theta| {spsa_norm:.3e} after {} iterations; CMA-ES f {cma_value:.3e} after {} generations",
            spsa.iterations, cma.iterations
        ),
    }
}

fn tuner_recovery() -> Outcome {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let space = ParamSpace::new(vec![Dimension::real("a", 0.01, 2.0)]).unwrap();
    let objective = |c: &[f64], seed: u64| {
        let mut rng = vqa_core::rng::StreamRng::seed_from_u64(seed ^ c[0].to_bits().rotate_left(17));
        let noise: f64 = StandardNormal.sample(&mut rng);
        (c[0] - 0.7).powi(2) + 0.01 * noise
    };
    let report = tune(&space, &mut FnObjective(objective), &RaceConfig { budget: 500, seed: 2021, ..Default::default() }).unwrap();
    let elites = report.elite_configs();
    let mean = elites.iter().map(|c| c.values[0]).sum::<f64>() / elites.len() as f64;
    Outcome {
        passed: (mean - 0.7).abs() < 0.1 && report.evaluations_used <= 500,
        detail: format!(
            "{} elites, mean a {mean:.4}, {} evaluations over {} generations",
            elites.len(),
            report.evaluations_used,
            report.generations.len()
        ),
    }
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let exp = ExperimentConfig::load(&fixture("hub2x2_cma.toml")).unwrap().validate().unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    cmd_run(&exp, &a, 4).unwrap();
    cmd_run(&exp, &b, 1).unwrap();
    let (fa, fb) = (read_all(&a), read_all(&b));
    let traces = fa.iter().filter(|(n, _)| n.starts_with("trace_")).count();
    Outcome {
        passed: !fa.is_empty() && fa == fb && traces == 15,
        detail: format!("{} files ({traces} traces) byte-identical across 4 and 1 workers", fa.len()),
    }
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 10] = [
        ("schedule exactness", Duration::from_millis(1), schedule_exactness),
        ("parameter-count table", Duration::from_secs(1), parameter_counts),
        ("estimator law", Duration::from_secs(30), estimator_law),
        ("variance propagation", Duration::from_secs(60), variance_propagation),
        ("oracle equivalence", Duration::from_secs(10), oracle_equivalence),
        ("noiseless VHA quality", Duration::from_secs(600), noiseless_vha_quality),
        ("best-ever vs favourite", Duration::from_secs(1800), best_vs_favourite),
        ("optimizer smoke", Duration::from_secs(60), optimizer_smoke),
        ("tuner recovery", Duration::from_secs(300), tuner_recovery),
        ("determinism", Duration::from_secs(600), determinism),
    ];
    let mut failures = Vec::new();
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let ok = outcome.passed && elapsed <= limit;
        println!("{} {name}: {} [{elapsed:.2?} / limit {limit:?}]", if ok { "PASS" } else { "FAIL" }, outcome.detail);
        if !ok {
            failures.push(name);
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
