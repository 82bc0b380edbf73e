//! Exact ground states, error metrics and the sampling noise floor.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::ansatz::AnsatzCircuit;
use crate::error::{Error, Result};
use crate::optim::OptResult;
use crate::pauli::PauliSum;
use crate::sampler::state_variance;
use crate::statevector::StateVector;

/// Hilbert-space dimension above which the iterative solver is used.
pub const DENSE_LIMIT: usize = 1 << 12;

/// Eigenvalues closer than this to the minimum count as degenerate.
const DEGENERACY_TOLERANCE: f64 = 1e-8;

/// Particle-number and spin constraints on basis states.
///
/// `sz_twice` is `2·S_z = N↑ − N↓` under the even-up/odd-down mode convention.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Sector {
    pub particles: Option<usize>,
    pub sz_twice: Option<i64>,
}

impl Sector {
    pub fn particles(n: usize) -> Self {
        Self { particles: Some(n), sz_twice: None }
    }

    /// Fixed particle number with the smallest `|S_z|` it allows.
    pub fn particles_min_spin(n: usize) -> Self {
        Self { particles: Some(n), sz_twice: Some((n % 2) as i64) }
    }

    fn contains(&self, basis: usize) -> bool {
        let b = basis as u64;
        if let Some(n) = self.particles {
            if b.count_ones() as usize != n {
                return false;
            }
        }
        if let Some(sz) = self.sz_twice {
            let up = (b & 0x5555_5555_5555_5555).count_ones() as i64;
            let down = (b & 0xaaaa_aaaa_aaaa_aaaa).count_ones() as i64;
            if up - down != sz {
                return false;
            }
        }
        true
    }
}

impl std::fmt::Display for Sector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.particles, self.sz_twice) {
            (None, None) => f.write_str("full"),
            (Some(n), None) => write!(f, "N={n}"),
            (None, Some(s)) => write!(f, "2Sz={s}"),
            (Some(n), Some(s)) => write!(f, "N={n},2Sz={s}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExactSolution {
    pub e0: f64,
    pub ground_vector: StateVector,
    /// Multiplicity of `e0` in the searched space; 1 when found iteratively.
    pub degeneracy: usize,
    pub sector: Sector,
    pub dimension: usize,
}

/// Sector-restricted sparse Hamiltonian (column-major triplets).
struct SectorOperator {
    basis: Vec<usize>,
    columns: Vec<Vec<(usize, Complex64)>>,
}

impl SectorOperator {
    fn build(h: &PauliSum, sector: &Sector) -> Self {
        let full = 1usize << h.n_qubits();
        let basis: Vec<usize> = (0..full).filter(|&b| sector.contains(b)).collect();
        let mut position = vec![usize::MAX; full];
        for (i, &b) in basis.iter().enumerate() {
            position[b] = i;
        }
        let terms: Vec<_> = h.terms().collect();
        let columns = basis
            .iter()
            .map(|&b| {
                let mut col: Vec<(usize, Complex64)> = Vec::new();
                col.push((position[b], Complex64::new(h.identity_coeff(), 0.0)));
                for t in &terms {
                    let target = b ^ t.string.x_mask() as usize;
                    let row = position[target];
                    if row == usize::MAX {
                        continue;
                    }
                    let sign = if ((b as u64) & t.string.z_mask()).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
                    let phase = match t.string.y_count() % 4 {
                        0 => Complex64::new(1.0, 0.0),
                        1 => Complex64::new(0.0, 1.0),
                        2 => Complex64::new(-1.0, 0.0),
                        _ => Complex64::new(0.0, -1.0),
                    };
                    col.push((row, phase * (sign * t.coeff)));
                }
                col.sort_by_key(|e| e.0);
                let mut merged: Vec<(usize, Complex64)> = Vec::with_capacity(col.len());
                for (r, v) in col {
                    match merged.last_mut() {
                        Some(last) if last.0 == r => last.1 += v,
                        _ => merged.push((r, v)),
                    }
                }
                merged
            })
            .collect();
        Self { basis, columns }
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                m[(r, c)] += v;
            }
        }
        m
    }

    fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::zeros(self.dim());
        for (c, col) in self.columns.iter().enumerate() {
            let x = v[c];
            for &(r, m) in col {
                out[r] += m * x;
            }
        }
        out
    }

    fn embed(&self, n_qubits: usize, v: &DVector<Complex64>) -> Result<StateVector> {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        for (i, &b) in self.basis.iter().enumerate() {
            amps[b] = v[i];
        }
        StateVector::from_amplitudes(n_qubits, amps)
    }
}

/// Rotates `v` so its first largest-magnitude entry is real and positive.
fn fix_phase(v: &mut DVector<Complex64>) {
    let mut best = 0;
    for i in 0..v.len() {
        if v[i].norm() > v[best].norm() + 1e-12 {
            best = i;
        }
    }
    let pivot = v[best];
    if pivot.norm() > 0.0 {
        let phase = pivot.conj() / pivot.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

/// Lowest eigenpair of `h`, optionally restricted to a sector.
///
/// Within a degenerate ground space the returned vector is the normalized
/// projection of the lowest-index basis state with non-negligible overlap.
pub fn exact_ground(h: &PauliSum, sector: Option<Sector>) -> Result<ExactSolution> {
    exact_ground_resolved(h, sector, None)
}

/// As [`exact_ground`], but a degenerate ground space is resolved by the
/// lowest eigenvector of `tiebreak` projected onto it.
pub fn exact_ground_resolved(h: &PauliSum, sector: Option<Sector>, tiebreak: Option<&PauliSum>) -> Result<ExactSolution> {
    let sector = sector.unwrap_or_default();
    let op = SectorOperator::build(h, &sector);
    let dim = op.dim();
    if dim == 0 {
        return Err(Error::Eigensolver(format!("sector {sector} is empty")));
    }
    if let Some(t) = tiebreak {
        if t.n_qubits() != h.n_qubits() {
            return Err(Error::SizeMismatch { left: h.n_qubits(), right: t.n_qubits() });
        }
    }
    if dim <= DENSE_LIMIT {
        let tiebreak = tiebreak.map(|t| SectorOperator::build(t, &sector));
        dense_ground(h.n_qubits(), &op, sector, tiebreak.as_ref())
    } else {
        lanczos_ground(h.n_qubits(), &op, sector)
    }
}

fn dense_ground(
    n_qubits: usize,
    op: &SectorOperator,
    sector: Sector,
    tiebreak: Option<&SectorOperator>,
) -> Result<ExactSolution> {
    let m = op.dense();
    let dim = op.dim();
    let asym = (&m - m.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if asym > 1e-10 {
        return Err(Error::NotHermitian(asym));
    }
    let is_real = m.iter().all(|v| v.im.abs() < 1e-14);
    let (values, vectors): (Vec<f64>, DMatrix<Complex64>) = if is_real {
        let eig = SymmetricEigen::new(m.map(|v| v.re));
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(|v| Complex64::new(v, 0.0)))
    } else {
        let eig = SymmetricEigen::new(m);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let e0 = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !e0.is_finite() {
        return Err(Error::Eigensolver("non-finite eigenvalue".into()));
    }
    let ground: Vec<usize> = (0..dim).filter(|&i| values[i] - e0 < DEGENERACY_TOLERANCE).collect();
    let vector = if ground.len() == 1 {
        vectors.column(ground[0]).into_owned()
    } else if let Some(t) = tiebreak {
        let space: Vec<DVector<Complex64>> = ground.iter().map(|&i| vectors.column(i).into_owned()).collect();
        let images: Vec<DVector<Complex64>> = space.iter().map(|u| t.apply(u)).collect();
        let d = space.len();
        let mut projected = DMatrix::<Complex64>::from_fn(d, d, |i, j| space[i].dotc(&images[j]));
        projected = (&projected + projected.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(projected);
        let low = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
        let mut v = DVector::<Complex64>::zeros(dim);
        for (k, u) in space.iter().enumerate() {
            v += u * eig.eigenvectors[(k, low)];
        }
        v.normalize()
    } else {
        // project e_k for the lowest k with visible weight in the ground space
        let space: Vec<DVector<Complex64>> = ground.iter().map(|&i| vectors.column(i).into_owned()).collect();
        let mut chosen = None;
        for k in 0..dim {
            let mut v = DVector::<Complex64>::zeros(dim);
            for u in &space {
                v += u * u[k].conj();
            }
            if v.norm() > 1e-6 {
                chosen = Some(v.normalize());
                break;
            }
        }
        chosen.ok_or_else(|| Error::Eigensolver("empty ground space".into()))?
    };
    let mut vector = vector;
    fix_phase(&mut vector);
    Ok(ExactSolution {
        e0: values[ground[0]].min(e0),
        ground_vector: op.embed(n_qubits, &vector)?,
        degeneracy: ground.len(),
        sector,
        dimension: dim,
    })
}

/// Lanczos with full reorthogonalization; converges on the Rayleigh residual.
fn lanczos_ground(n_qubits: usize, op: &SectorOperator, sector: Sector) -> Result<ExactSolution> {
    const RESIDUAL_TOLERANCE: f64 = 1e-10;
    let dim = op.dim();
    let max_krylov = dim.min(400);
    let mut start = DVector::<Complex64>::from_fn(dim, |i, _| Complex64::new(1.0 + (i % 7) as f64 * 0.1, 0.0));
    start.normalize_mut();
    let mut basis: Vec<DVector<Complex64>> = vec![start];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    loop {
        let k = basis.len() - 1;
        let mut w = op.apply(&basis[k]);
        let alpha = basis[k].dotc(&w).re;
        alphas.push(alpha);
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.dotc(&w);
                w -= b * overlap;
            }
        }
        let beta = w.norm();

        let m = alphas.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alphas[i];
            if i + 1 < m {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (idx, theta) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty tridiagonal");
        let residual = beta * eig.eigenvectors[(m - 1, idx)].abs();
        if residual < RESIDUAL_TOLERANCE || beta < 1e-14 || m >= max_krylov {
            let mut v = DVector::<Complex64>::zeros(dim);
            for (i, b) in basis.iter().enumerate() {
                v += b * Complex64::new(eig.eigenvectors[(i, idx)], 0.0);
            }
            v.normalize_mut();
            let true_residual = (op.apply(&v) - &v * Complex64::new(theta, 0.0)).norm();
            if true_residual > 1e-8 {
                return Err(Error::Eigensolver(format!(
                    "Lanczos stopped at residual {true_residual:e} after {m} steps"
                )));
            }
            fix_phase(&mut v);
            return Ok(ExactSolution {
                e0: theta,
                ground_vector: op.embed(n_qubits, &v)?,
                degeneracy: 1,
                sector,
                dimension: dim,
            });
        }
        betas.push(beta);
        basis.push(w / Complex64::new(beta, 0.0));
    }
}

/// `|C − E₀| / |E₀ − c₀|`.
pub fn relative_error(cost: f64, e0: f64, c0: f64) -> Result<f64> {
    Ok(signed_relative_error(cost, e0, c0)?.abs())
}

/// `(C − E₀) / |E₀ − c₀|`; negative below the true ground energy.
pub fn signed_relative_error(cost: f64, e0: f64, c0: f64) -> Result<f64> {
    let scale = (e0 - c0).abs();
    if scale == 0.0 {
        return Err(Error::UndefinedMetric(c0));
    }
    Ok((cost - e0) / scale)
}

/// Width of the band of cost values indistinguishable from the optimum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseFloor {
    pub variance: f64,
    pub quantile: f64,
    pub width: f64,
    pub p: f64,
}

/// Upper standard-normal quantile `m(p)` with `P(Z > m) = p`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::InvalidProbability(p));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(normal.inverse_cdf(1.0 - p))
}

/// `2·m(p)·√Var[C̄]` with the variance of the sampled cost at `state`.
pub fn noise_floor(h: &PauliSum, state: &StateVector, shots: u64, p: f64) -> Result<NoiseFloor> {
    let quantile = normal_quantile(p)?;
    let variance = state_variance(state, h, shots)?;
    Ok(NoiseFloor { variance, quantile, width: 2.0 * quantile * variance.sqrt(), p })
}

/// Noisy and noiseless values of one run's two candidates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CandidateComparison {
    /// Best-ever measured noisy value `C̄(θ_best)`.
    pub noisy_best: f64,
    /// `C(θ_best)`.
    pub cost_best: f64,
    /// `C(θ_fav)`.
    pub cost_favourite: f64,
    pub delta_noisy_best: f64,
    pub delta_best: f64,
    pub delta_favourite: f64,
}

pub fn compare_candidates(
    run: &OptResult,
    circuit: &AnsatzCircuit,
    h: &PauliSum,
    exact: &ExactSolution,
) -> Result<CandidateComparison> {
    let (best, favourite) = run.candidates();
    let cost_best = circuit.prepare(best)?.expectation_sum(h)?;
    let cost_favourite = circuit.prepare(favourite)?.expectation_sum(h)?;
    // without evaluations the best-ever value is the starting point's noiseless cost
    let noisy_best = run.best_noisy_value.unwrap_or(cost_best);
    let c0 = h.identity_coeff();
    Ok(CandidateComparison {
        noisy_best,
        cost_best,
        cost_favourite,
        delta_noisy_best: signed_relative_error(noisy_best, exact.e0, c0)?,
        delta_best: signed_relative_error(cost_best, exact.e0, c0)?,
        delta_favourite: signed_relative_error(cost_favourite, exact.e0, c0)?,
    })
}

/// Mean with a two-sided Student-t confidence interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanCi {
    pub n: usize,
    pub mean: f64,
    /// `None` when fewer than two values are available.
    pub interval: Option<(f64, f64)>,
}

pub fn mean_confidence_interval(values: &[f64], level: f64) -> Option<MeanCi> {
    if values.is_empty() {
        return None;
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return Some(MeanCi { n, mean, interval: None });
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.5 + level / 2.0);
    Some(MeanCi { n, mean, interval: Some((mean - t * se, mean + t * se)) })
}
