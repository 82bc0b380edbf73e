//! Covariance matrix adaptation evolution strategy.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};

use super::{CostFunction, Evaluator, OptResult, Optimizer};
use crate::error::{Error, Result};
use crate::rng::{substream, StreamTag};
use crate::sampler::ShotLedger;
use crate::schedule::ShotSchedule;

const MAX_RESTARTS: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CmaConfig {
    pub sigma0: f64,
    /// Offspring per generation; `None` uses [`default_population`].
    pub population: Option<usize>,
    /// Parents are `⌈parent_fraction·λ⌉`.
    pub parent_fraction: f64,
    /// Learning rate of the mean.
    pub c_mean: f64,
    /// Multiplies the step-size damping.
    pub damp_factor: f64,
    pub seed: u64,
}

impl Default for CmaConfig {
    fn default() -> Self {
        Self { sigma0: 0.15, population: None, parent_fraction: 0.5, c_mean: 1.0, damp_factor: 1.0, seed: 0 }
    }
}

/// `⌈4 + 3·ln m⌉`.
pub fn default_population(dim: usize) -> usize {
    (4.0 + 3.0 * (dim.max(1) as f64).ln()).ceil() as usize
}

impl CmaConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.sigma0.is_finite()
            && self.sigma0 > 0.0
            && self.population.is_none_or(|l| l >= 2)
            && self.parent_fraction > 0.0
            && self.parent_fraction <= 1.0
            && self.c_mean > 0.0
            && self.c_mean.is_finite()
            && self.damp_factor > 0.0
            && self.damp_factor.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "cma requires sigma0 > 0, population >= 2, parent fraction in (0, 1], c_mean > 0, damp factor > 0; got {self:?}"
            )))
        }
    }

    pub fn lambda(&self, dim: usize) -> usize {
        self.population.unwrap_or_else(|| default_population(dim))
    }

    pub fn mu(&self, dim: usize) -> usize {
        let lambda = self.lambda(dim);
        ((self.parent_fraction * lambda as f64).ceil() as usize).clamp(1, lambda)
    }
}

/// Strategy constants for a given dimension.
struct Params {
    lambda: usize,
    weights: Vec<f64>,
    mu_eff: f64,
    cs: f64,
    cc: f64,
    c1: f64,
    cmu: f64,
    damps: f64,
    chi_n: f64,
}

impl Params {
    fn new(n: usize, config: &CmaConfig) -> Self {
        let lambda = config.lambda(n);
        let mu = config.mu(n);
        let raw: Vec<f64> = (0..mu).map(|i| ((mu as f64 + 0.5).ln() - ((i + 1) as f64).ln()).max(0.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = if total > 0.0 { raw.iter().map(|w| w / total).collect() } else { vec![1.0] };
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let nf = n as f64;
        let cs = (mu_eff + 2.0) / (nf + mu_eff + 5.0);
        let cc = (4.0 + mu_eff / nf) / (nf + 4.0 + 2.0 * mu_eff / nf);
        let c1 = 2.0 / ((nf + 1.3).powi(2) + mu_eff);
        let cmu = (1.0 - c1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nf + 2.0).powi(2) + mu_eff));
        let damps = (1.0 + 2.0 * (((mu_eff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + cs) * config.damp_factor;
        let chi_n = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));
        Self { lambda, weights, mu_eff, cs, cc, c1, cmu, damps, chi_n }
    }
}

struct State {
    sigma: f64,
    cov: DMatrix<f64>,
    basis: DMatrix<f64>,
    scales: DVector<f64>,
    p_sigma: DVector<f64>,
    p_c: DVector<f64>,
    /// Generations since the last reset, for the evolution-path correction.
    age: u64,
}

impl State {
    fn fresh(n: usize, sigma: f64) -> Self {
        Self {
            sigma,
            cov: DMatrix::identity(n, n),
            basis: DMatrix::identity(n, n),
            scales: DVector::from_element(n, 1.0),
            p_sigma: DVector::zeros(n),
            p_c: DVector::zeros(n),
            age: 0,
        }
    }

    /// Refreshes `B` and `D` from `C`; false if `C` is no longer positive definite.
    fn decompose(&mut self) -> bool {
        if !self.sigma.is_finite() || self.sigma <= 0.0 || self.cov.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let eig = SymmetricEigen::new(self.cov.clone());
        if eig.eigenvalues.iter().any(|&l| !l.is_finite() || l <= 0.0) {
            return false;
        }
        self.scales = eig.eigenvalues.map(f64::sqrt);
        self.basis = eig.eigenvectors;
        true
    }
}

/// The favourite is the final distribution mean.
pub fn cma_minimize<C: CostFunction + ?Sized>(
    cost: &mut C,
    x0: &[f64],
    config: &CmaConfig,
    schedule: &ShotSchedule,
    ledger: &mut ShotLedger,
) -> Result<OptResult> {
    config.validate()?;
    let n = x0.len();
    if n == 0 {
        return Err(Error::InvalidConfig("cma needs at least one parameter".into()));
    }
    let p = Params::new(n, config);
    let mut mean = DVector::from_column_slice(x0);
    let mut state = State::fresh(n, config.sigma0);
    let mut eval = Evaluator::new(cost, schedule, ledger);
    let mut generation = 0u64;
    let mut restarts = 0u32;

    'run: loop {
        let mut rng = substream(config.seed, StreamTag::Optimizer, generation, restarts as u64);
        let mut steps = Vec::with_capacity(p.lambda);
        let mut values = Vec::with_capacity(p.lambda);
        for _ in 0..p.lambda {
            let z = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            let y = &state.basis * z.component_mul(&state.scales);
            let x = &mean + state.sigma * &y;
            let Some(v) = eval.eval(x.as_slice())? else { break 'run };
            steps.push(y);
            values.push(v);
        }

        let mut order: Vec<usize> = (0..p.lambda).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

        let mut y_w = DVector::zeros(n);
        for (w, &i) in p.weights.iter().zip(&order) {
            y_w += *w * &steps[i];
        }
        mean += config.c_mean * state.sigma * &y_w;

        // C^{-1/2} y_w = B D^{-1} Bᵀ y_w
        let whitened = &state.basis * (state.basis.transpose() * &y_w).component_div(&state.scales);
        state.p_sigma = (1.0 - p.cs) * &state.p_sigma + (p.cs * (2.0 - p.cs) * p.mu_eff).sqrt() * whitened;
        state.age += 1;
        let ps_norm = state.p_sigma.norm();
        let hsig = ps_norm / (1.0 - (1.0 - p.cs).powi(2 * state.age as i32)).sqrt() / p.chi_n
            < 1.4 + 2.0 / (n as f64 + 1.0);
        let h = if hsig { 1.0 } else { 0.0 };
        state.p_c = (1.0 - p.cc) * &state.p_c + h * (p.cc * (2.0 - p.cc) * p.mu_eff).sqrt() * &y_w;

        let mut rank_mu = DMatrix::zeros(n, n);
        for (w, &i) in p.weights.iter().zip(&order) {
            rank_mu += *w * &steps[i] * steps[i].transpose();
        }
        let decay = 1.0 - p.c1 - p.cmu + (1.0 - h) * p.c1 * p.cc * (2.0 - p.cc);
        state.cov = decay * &state.cov + p.c1 * &state.p_c * state.p_c.transpose() + p.cmu * rank_mu;
        state.cov = (&state.cov + state.cov.transpose()) * 0.5;
        state.sigma *= ((p.cs / p.damps) * (ps_norm / p.chi_n - 1.0)).exp();
        generation += 1;

        if !state.decompose() || mean.iter().any(|v| !v.is_finite()) {
            if restarts == MAX_RESTARTS {
                log::warn!("cma: numerical failure after {MAX_RESTARTS} resets, stopping");
                break;
            }
            restarts += 1;
            log::warn!("cma: numerical failure at generation {generation}, resetting sigma and covariance");
            if mean.iter().any(|v| !v.is_finite()) {
                mean = DVector::from_column_slice(x0);
            }
            state = State::fresh(n, config.sigma0);
        }
    }
    Ok(eval.finish(Optimizer::Cma, x0, mean.as_slice().to_vec(), generation, restarts))
}
