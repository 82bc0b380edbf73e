//! Gradient-free optimizers on noisy costs.
//!
//! Both optimizers draw shots from a [`ShotSchedule`] and debit a
//! [`ShotLedger`]; a run ends when the schedule runs out of evaluations or the
//! ledger refuses. Every evaluation is recorded in the trace.

mod cma;
mod spsa;

pub use cma::{cma_minimize, default_population, CmaConfig};
pub use spsa::{spsa_gradient, spsa_minimize, SpsaConfig};

use crate::ansatz::AnsatzCircuit;
use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::sampler::{noisy_cost, NoiseSource, ShotLedger};
use crate::schedule::ShotSchedule;

/// A cost evaluated at a given shot count.
pub trait CostFunction {
    /// Debits `shots` from the ledger and returns the (possibly noisy) cost.
    /// A refused debit surfaces as [`Error::Budget`].
    fn evaluate(&mut self, params: &[f64], shots: u64, ledger: &mut ShotLedger) -> Result<f64>;
}

/// Noiseless plug-in cost from a closure; still debits the ledger.
pub struct FnCost<F>(pub F);

impl<F: FnMut(&[f64]) -> f64> CostFunction for FnCost<F> {
    fn evaluate(&mut self, params: &[f64], shots: u64, ledger: &mut ShotLedger) -> Result<f64> {
        ledger.try_debit(shots)?;
        Ok((self.0)(params))
    }
}

/// Shot-noise VQE energy `C̄(θ, M)`.
pub struct NoisyEnergy<'a> {
    pub circuit: &'a AnsatzCircuit,
    pub hamiltonian: &'a PauliSum,
    pub noise: NoiseSource,
}

impl<'a> NoisyEnergy<'a> {
    pub fn new(circuit: &'a AnsatzCircuit, hamiltonian: &'a PauliSum, seed: u64) -> Self {
        Self { circuit, hamiltonian, noise: NoiseSource::new(seed) }
    }
}

impl CostFunction for NoisyEnergy<'_> {
    fn evaluate(&mut self, params: &[f64], shots: u64, ledger: &mut ShotLedger) -> Result<f64> {
        if ledger.remaining() < shots {
            ledger.try_debit(shots)?;
        }
        let state = self.circuit.prepare(params)?;
        Ok(noisy_cost(&state, self.hamiltonian, shots, ledger, &mut self.noise)?.value)
    }
}

/// Exact VQE energy `C(θ)`; shots are only booked, never sampled.
pub struct ExactEnergy<'a> {
    pub circuit: &'a AnsatzCircuit,
    pub hamiltonian: &'a PauliSum,
}

impl CostFunction for ExactEnergy<'_> {
    fn evaluate(&mut self, params: &[f64], shots: u64, ledger: &mut ShotLedger) -> Result<f64> {
        ledger.try_debit(shots)?;
        self.circuit.prepare(params)?.expectation_sum(self.hamiltonian)
    }
}

/// One recorded cost evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub evaluation: u64,
    pub stage: usize,
    pub shots: u64,
    pub cumulative_shots: u64,
    pub params: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Optimizer {
    Spsa,
    Cma,
}

impl Optimizer {
    pub fn name(self) -> &'static str {
        match self {
            Optimizer::Spsa => "spsa",
            Optimizer::Cma => "cma",
        }
    }

    /// What the favourite candidate is for this optimizer.
    pub fn favourite_kind(self) -> &'static str {
        match self {
            Optimizer::Spsa => "final_iterate",
            Optimizer::Cma => "distribution_mean",
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptResult {
    pub optimizer: Optimizer,
    pub x0: Vec<f64>,
    /// Parameters of the lowest measured value; `x0` when nothing was evaluated.
    pub best_params: Vec<f64>,
    pub best_noisy_value: Option<f64>,
    /// SPSA: final iterate. CMA-ES: final distribution mean.
    pub favourite_params: Vec<f64>,
    pub evaluations: u64,
    pub shots_spent: u64,
    /// SPSA iterations or CMA-ES generations completed.
    pub iterations: u64,
    /// CMA-ES covariance resets after numerical failure.
    pub restarts: u32,
    pub trace: Vec<TraceEntry>,
}

impl OptResult {
    /// `(best-ever, favourite)` parameter vectors.
    pub fn candidates(&self) -> (&[f64], &[f64]) {
        (&self.best_params, &self.favourite_params)
    }
}

/// `(best, favourite)` as owned vectors.
pub fn extract_candidates(result: &OptResult) -> (Vec<f64>, Vec<f64>) {
    (result.best_params.clone(), result.favourite_params.clone())
}

/// Schedule-driven evaluation with trace and best-ever bookkeeping.
pub(crate) struct Evaluator<'a, C: CostFunction + ?Sized> {
    cost: &'a mut C,
    schedule: &'a ShotSchedule,
    ledger: &'a mut ShotLedger,
    trace: Vec<TraceEntry>,
    best: Option<(f64, usize)>,
    spent_at_start: u64,
}

impl<'a, C: CostFunction + ?Sized> Evaluator<'a, C> {
    pub(crate) fn new(cost: &'a mut C, schedule: &'a ShotSchedule, ledger: &'a mut ShotLedger) -> Self {
        let spent_at_start = ledger.spent();
        Self { cost, schedule, ledger, trace: Vec::new(), best: None, spent_at_start }
    }

    /// `Ok(None)` once the schedule or the ledger is exhausted.
    pub(crate) fn eval(&mut self, params: &[f64]) -> Result<Option<f64>> {
        let index = self.trace.len() as u64;
        let Some((stage, shots)) = self.schedule.shots_for(index) else {
            return Ok(None);
        };
        let value = match self.cost.evaluate(params, shots, self.ledger) {
            Ok(v) => v,
            Err(Error::Budget(b)) => {
                log::debug!("evaluation {index} refused: {b}");
                return Ok(None);
            }
            Err(e) => return Err(e),
        };
        self.trace.push(TraceEntry {
            evaluation: index,
            stage,
            shots,
            cumulative_shots: self.ledger.spent() - self.spent_at_start,
            params: params.to_vec(),
            value,
        });
        // ties keep the earliest evaluation
        if self.best.is_none_or(|(b, _)| value < b) {
            self.best = Some((value, self.trace.len() - 1));
        }
        Ok(Some(value))
    }

    pub(crate) fn finish(self, optimizer: Optimizer, x0: &[f64], favourite: Vec<f64>, iterations: u64, restarts: u32) -> OptResult {
        let (best_params, best_noisy_value) = match self.best {
            Some((v, i)) => (self.trace[i].params.clone(), Some(v)),
            None => (x0.to_vec(), None),
        };
        OptResult {
            optimizer,
            x0: x0.to_vec(),
            best_params,
            best_noisy_value,
            favourite_params: favourite,
            evaluations: self.trace.len() as u64,
            shots_spent: self.ledger.spent() - self.spent_at_start,
            iterations,
            restarts,
            trace: self.trace,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_evaluation_results_fall_back_to_x0() {
        let x0 = vec![0.3, -0.2];
        let schedule = ShotSchedule::one_stage(0, 0).unwrap();
        for optimizer in [Optimizer::Spsa, Optimizer::Cma] {
            let mut ledger = ShotLedger::new(0);
            let mut cost = FnCost(|x: &[f64]| x.iter().map(|v| v * v).sum());
            let result = match optimizer {
                Optimizer::Spsa => spsa_minimize(&mut cost, &x0, &SpsaConfig::default(), &schedule, &mut ledger),
                Optimizer::Cma => cma_minimize(&mut cost, &x0, &CmaConfig::default(), &schedule, &mut ledger),
            }
            .unwrap();
            assert_eq!(result.evaluations, 0);
            let (best, fav) = extract_candidates(&result);
            assert_eq!(best, x0);
            assert_eq!(fav, x0);
            assert!(result.best_noisy_value.is_none());
        }
    }

    #[test]
    fn ledger_refusal_stops_the_run() {
        let schedule = ShotSchedule::one_stage(1000, 100).unwrap();
        let mut ledger = ShotLedger::new(55);
        let mut cost = FnCost(|x: &[f64]| x[0] * x[0]);
        let r = spsa_minimize(&mut cost, &[1.0], &SpsaConfig::default(), &schedule, &mut ledger).unwrap();
        assert_eq!(r.evaluations, 5);
        assert_eq!(r.shots_spent, 50);
    }
}
