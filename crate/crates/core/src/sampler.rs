//! Shot-noise model of the sampled cost and the shot ledger.
//!
//! Each Pauli expectation `μ` is estimated from `M` shots by drawing
//! `k ~ Binomial(M, (1 − μ)/2)` and returning `1 − 2k/M`. Terms are sampled
//! independently with equal shots, so `Var[C̄] = Σ cᵢ²(1 − μᵢ²)/M`.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{BudgetExhausted, Error, Result};
use crate::pauli::PauliSum;
use crate::rng::{substream, StreamTag};
use crate::statevector::StateVector;

/// Running account of shots spent per Pauli operator.
///
/// One evaluation at `M` shots per Pauli costs `M` units regardless of the
/// number of terms in the Hamiltonian.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotLedger {
    budget: u64,
    spent: u64,
    debits: u64,
}

impl ShotLedger {
    pub fn new(budget_per_pauli: u64) -> Self {
        Self { budget: budget_per_pauli, spent: 0, debits: 0 }
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn spent(&self) -> u64 {
        self.spent
    }

    pub fn remaining(&self) -> u64 {
        self.budget - self.spent
    }

    /// Number of successful debits.
    pub fn debits(&self) -> u64 {
        self.debits
    }

    /// Debits `shots` or refuses without changing state.
    pub fn try_debit(&mut self, shots: u64) -> Result<(), BudgetExhausted> {
        if shots > self.remaining() {
            return Err(BudgetExhausted { spent: self.spent, budget: self.budget, requested: shots });
        }
        self.spent += shots;
        self.debits += 1;
        Ok(())
    }
}

/// Source of per-evaluation noise streams for one run.
///
/// Evaluation `e`, term `t` draws from stream `t` of the key derived from
/// `(seed, e)`; refused evaluations do not consume an index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoiseSource {
    seed: u64,
    next_evaluation: u64,
}

impl NoiseSource {
    pub fn new(seed: u64) -> Self {
        Self { seed, next_evaluation: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn evaluations(&self) -> u64 {
        self.next_evaluation
    }

    fn advance(&mut self) -> u64 {
        let e = self.next_evaluation;
        self.next_evaluation += 1;
        e
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoisyValue {
    pub value: f64,
    pub shots_per_pauli: u64,
    pub variance_estimate: f64,
}

/// One shot-noise estimate of an exact Pauli expectation.
pub fn sample_expectation(exact: f64, shots: u64, rng: &mut impl Rng) -> Result<f64> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    if exact.is_nan() || exact.abs() > 1.0 + 1e-9 {
        return Err(Error::ExpectationOutOfRange(exact));
    }
    let p = ((1.0 - exact) / 2.0).clamp(0.0, 1.0);
    let k = Binomial::new(shots, p)
        .map_err(|e| Error::InvalidConfig(format!("binomial({shots}, {p}): {e}")))?
        .sample(rng);
    Ok(1.0 - 2.0 * (k as f64) / (shots as f64))
}

/// State-dependent variance `Σ cᵢ²(1 − ⟨Pᵢ⟩²)/M` of the sampled cost.
pub fn state_variance(state: &StateVector, h: &PauliSum, shots: u64) -> Result<f64> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let mut var = 0.0;
    for t in h.terms() {
        let mu = state.expectation(&t.string)?;
        var += t.coeff * t.coeff * (1.0 - mu * mu);
    }
    Ok(var / shots as f64)
}

/// State-independent worst case `Σ cᵢ²/M`.
pub fn variance_bound(h: &PauliSum, shots: u64) -> Result<f64> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    Ok(h.coefficient_norm_sq() / shots as f64)
}

/// Sampled cost `c₀ + Σ cᵢ·sample(⟨Pᵢ⟩, M)`.
///
/// The ledger is debited `shots_per_pauli` before any sampling; a refused
/// debit returns [`Error::Budget`] and leaves the noise source untouched.
pub fn noisy_cost(
    state: &StateVector,
    h: &PauliSum,
    shots_per_pauli: u64,
    ledger: &mut ShotLedger,
    noise: &mut NoiseSource,
) -> Result<NoisyValue> {
    if shots_per_pauli == 0 {
        return Err(Error::ZeroShots);
    }
    if h.n_qubits() != state.n_qubits() {
        return Err(Error::SizeMismatch { left: state.n_qubits(), right: h.n_qubits() });
    }
    ledger.try_debit(shots_per_pauli)?;
    let evaluation = noise.advance();
    let mut value = h.identity_coeff();
    let mut variance = 0.0;
    for (index, t) in h.terms().enumerate() {
        let mu = state.expectation_unchecked(&t.string);
        let mut rng = substream(noise.seed, StreamTag::ShotNoise, evaluation, index as u64);
        value += t.coeff * sample_expectation(mu, shots_per_pauli, &mut rng)?;
        variance += t.coeff * t.coeff * (1.0 - mu * mu);
    }
    Ok(NoisyValue {
        value,
        shots_per_pauli,
        variance_estimate: variance / shots_per_pauli as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{PauliString, PauliTerm};
    use num_complex::Complex64;
    use rand::SeedableRng;

    fn p(text: &str) -> PauliString {
        PauliString::parse(text, text.len()).unwrap()
    }

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    fn test_state() -> StateVector {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let amps = (0..8)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        StateVector::from_amplitudes(3, amps).unwrap()
    }

    fn test_hamiltonian() -> PauliSum {
        let terms = [(0.7, "ZII"), (-0.4, "XXI"), (0.3, "IYY"), (0.25, "ZZZ"), (-0.6, "IXZ")];
        let terms: Vec<PauliTerm> = terms.iter().map(|(c, s)| PauliTerm::new(*c, p(s)).unwrap()).collect();
        PauliSum::from_terms(3, -1.2, &terms).unwrap()
    }

    #[test]
    fn degenerate_expectations_are_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for m in [1, 7, 1000, 1_000_000] {
            assert_eq!(sample_expectation(1.0, m, &mut rng).unwrap(), 1.0);
            assert_eq!(sample_expectation(-1.0, m, &mut rng).unwrap(), -1.0);
        }
        assert!(sample_expectation(1.1, 10, &mut rng).is_err());
        assert!(sample_expectation(0.0, 0, &mut rng).is_err());
        assert!(sample_expectation(1.0 + 1e-12, 10, &mut rng).is_ok());
    }

    #[test]
    fn unbiased_zero_expectation_has_binomial_variance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let m = 10_000u64;
        let draws = 10_000;
        let xs: Vec<f64> = (0..draws).map(|_| sample_expectation(0.0, m, &mut rng).unwrap()).collect();
        let (mean, var) = mean_var(&xs);
        assert!(mean.abs() < 4.0 / ((m * draws) as f64).sqrt(), "mean {mean}");
        let expected = 1.0 / m as f64;
        assert!((var - expected).abs() < 0.05 * expected, "var {var} vs {expected}");
    }

    #[test]
    fn identity_only_and_eigenstate_are_noiseless() {
        let state = StateVector::basis_state(1, &[]).unwrap();
        let mut ledger = ShotLedger::new(1000);
        let mut noise = NoiseSource::new(0);
        let h = PauliSum::from_terms(1, 0.75, &[]).unwrap();
        let v = noisy_cost(&state, &h, 100, &mut ledger, &mut noise).unwrap();
        assert_eq!((v.value, v.variance_estimate), (0.75, 0.0));

        let h = PauliSum::from_terms(1, 0.0, &[PauliTerm::new(1.0, p("Z")).unwrap()]).unwrap();
        let v = noisy_cost(&state, &h, 100, &mut ledger, &mut noise).unwrap();
        assert_eq!((v.value, v.variance_estimate), (1.0, 0.0));
        assert_eq!(ledger.spent(), 200);
    }

    #[test]
    fn budget_refusal_is_distinguishable_and_leaves_state() {
        let state = test_state();
        let h = test_hamiltonian();
        let mut ledger = ShotLedger::new(250);
        let mut noise = NoiseSource::new(5);
        noisy_cost(&state, &h, 100, &mut ledger, &mut noise).unwrap();
        noisy_cost(&state, &h, 100, &mut ledger, &mut noise).unwrap();
        let err = noisy_cost(&state, &h, 100, &mut ledger, &mut noise).unwrap_err();
        assert!(err.is_budget_exhausted());
        assert_eq!(ledger.spent(), 200);
        assert_eq!(ledger.debits(), 2);
        assert_eq!(noise.evaluations(), 2);
        noisy_cost(&state, &h, 50, &mut ledger, &mut noise).unwrap();
        assert_eq!(ledger.remaining(), 0);
    }

    #[test]
    fn identical_seeds_give_identical_values() {
        let state = test_state();
        let h = test_hamiltonian();
        let run = |seed| {
            let mut ledger = ShotLedger::new(u64::MAX);
            let mut noise = NoiseSource::new(seed);
            (0..20)
                .map(|_| noisy_cost(&state, &h, 1000, &mut ledger, &mut noise).unwrap().value.to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }

    #[test]
    fn noisy_cost_unbiased_with_matching_variance() {
        let state = test_state();
        let h = test_hamiltonian();
        let exact = state.expectation_sum(&h).unwrap();
        let m = 1000;
        let reps = 10_000;
        let mut ledger = ShotLedger::new(u64::MAX);
        let mut noise = NoiseSource::new(77);
        let mut predicted = 0.0;
        let xs: Vec<f64> = (0..reps)
            .map(|_| {
                let v = noisy_cost(&state, &h, m, &mut ledger, &mut noise).unwrap();
                predicted = v.variance_estimate;
                v.value
            })
            .collect();
        let (mean, var) = mean_var(&xs);
        let se = (predicted / reps as f64).sqrt();
        assert!((mean - exact).abs() < 4.0 * se, "bias {}", mean - exact);
        assert!((var - predicted).abs() < 0.1 * predicted, "var {var} vs {predicted}");
        assert!((state_variance(&state, &h, m).unwrap() - predicted).abs() < 1e-15);
    }

    #[test]
    fn concentration_at_large_shot_counts() {
        let state = test_state();
        let h = test_hamiltonian();
        let exact = state.expectation_sum(&h).unwrap();
        let mut ledger = ShotLedger::new(u64::MAX);
        let mut noise = NoiseSource::new(8);
        let trials = 200;
        let inside = (0..trials)
            .filter(|_| {
                let v = noisy_cost(&state, &h, 100_000_000, &mut ledger, &mut noise).unwrap();
                (v.value - exact).abs() < 5.0 * v.variance_estimate.sqrt()
            })
            .count();
        assert!(inside as f64 >= 0.99 * trials as f64);
    }

    #[test]
    fn variance_bound_cases() {
        let empty = PauliSum::new(2).unwrap();
        assert_eq!(variance_bound(&empty, 10).unwrap(), 0.0);
        let single = PauliSum::from_terms(1, 0.0, &[PauliTerm::new(2.0, p("X")).unwrap()]).unwrap();
        assert!((variance_bound(&single, 100).unwrap() - 0.04).abs() < 1e-15);

        let h = test_hamiltonian();
        let bound = variance_bound(&h, 100).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let amps = (0..8)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let s = StateVector::from_amplitudes(3, amps).unwrap();
            assert!(state_variance(&s, &h, 100).unwrap() <= bound + 1e-15);
        }
    }
}
