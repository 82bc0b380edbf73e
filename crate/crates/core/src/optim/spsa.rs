//! Simultaneous perturbation stochastic approximation.

use rand::Rng;

use super::{CostFunction, Evaluator, OptResult, Optimizer};
use crate::error::{Error, Result};
use crate::rng::{substream, StreamTag};
use crate::sampler::ShotLedger;
use crate::schedule::ShotSchedule;

/// Gains `a_k = a/(A + k + 1)^α` and perturbations `c_k = c/(k + 1)^γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpsaConfig {
    pub a: f64,
    pub alpha: f64,
    pub c: f64,
    pub gamma: f64,
    pub stability_offset: f64,
    pub seed: u64,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self { a: 0.15, alpha: 0.602, c: 0.2, gamma: 0.101, stability_offset: 0.0, seed: 0 }
    }
}

impl SpsaConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.a > 0.0
            && self.c > 0.0
            && (0.0..=1.0).contains(&self.alpha)
            && (0.0..=1.0 / 6.0).contains(&self.gamma)
            && self.stability_offset >= 0.0
            && [self.a, self.c, self.alpha, self.gamma, self.stability_offset].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "spsa requires a, c > 0, alpha in [0, 1], gamma in [0, 1/6], A >= 0; got {self:?}"
            )))
        }
    }

    pub fn gain(&self, k: u64) -> f64 {
        self.a / (self.stability_offset + k as f64 + 1.0).powf(self.alpha)
    }

    pub fn perturbation(&self, k: u64) -> f64 {
        self.c / (k as f64 + 1.0).powf(self.gamma)
    }
}

/// Two-sided simultaneous-perturbation gradient estimate from the values at
/// `θ + c·Δ` and `θ − c·Δ`.
pub fn spsa_gradient(plus: f64, minus: f64, c: f64, delta: &[f64]) -> Vec<f64> {
    delta.iter().map(|d| (plus - minus) / (2.0 * c * d)).collect()
}

fn rademacher(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

/// Gains continue across schedule stages; the favourite is the final iterate.
pub fn spsa_minimize<C: CostFunction + ?Sized>(
    cost: &mut C,
    x0: &[f64],
    config: &SpsaConfig,
    schedule: &ShotSchedule,
    ledger: &mut ShotLedger,
) -> Result<OptResult> {
    config.validate()?;
    let mut theta = x0.to_vec();
    let mut eval = Evaluator::new(cost, schedule, ledger);
    let mut k = 0u64;
    loop {
        let ck = config.perturbation(k);
        let delta = rademacher(&mut substream(config.seed, StreamTag::Optimizer, k, 0), theta.len());
        let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + ck * d).collect();
        let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t - ck * d).collect();
        let Some(y_plus) = eval.eval(&plus)? else { break };
        let Some(y_minus) = eval.eval(&minus)? else { break };
        let ak = config.gain(k);
        for (t, g) in theta.iter_mut().zip(spsa_gradient(y_plus, y_minus, ck, &delta)) {
            *t -= ak * g;
        }
        k += 1;
    }
    Ok(eval.finish(Optimizer::Spsa, x0, theta, k, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::FnCost;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn converges_on_two_dim_quadratic() {
        let schedule = ShotSchedule::one_stage(4000, 4000).unwrap();
        let mut ledger = ShotLedger::new(schedule.ledger_budget());
        let r = spsa_minimize(&mut FnCost(sphere), &[1.0, 1.0], &SpsaConfig::default(), &schedule, &mut ledger)
            .unwrap();
        assert_eq!(r.iterations, 2000);
        let norm = sphere(&r.favourite_params).sqrt();
        assert!(norm < 1e-2, "|θ| = {norm}");
    }

    #[test]
    fn gradient_estimate_is_unbiased_on_linear_cost() {
        let b = [0.7, -1.3, 0.2, 2.0];
        let theta = [0.1, 0.4, -0.3, 0.9];
        let c = 0.2;
        let n = 10_000;
        let mut rng = substream(1, StreamTag::Optimizer, 0, 0);
        let samples: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let delta = rademacher(&mut rng, 4);
                let f = |x: &[f64]| x.iter().zip(&b).map(|(xi, bi)| xi * bi).sum::<f64>();
                let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + c * d).collect();
                let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t - c * d).collect();
                spsa_gradient(f(&plus), f(&minus), c, &delta)
            })
            .collect();
        for i in 0..4 {
            let xs: Vec<f64> = samples.iter().map(|g| g[i]).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            assert!((mean - b[i]).abs() < 4.0 * se, "component {i}: {mean} vs {}", b[i]);
        }
    }

    #[test]
    fn tuned_configuration_is_accepted() {
        let cfg = SpsaConfig { a: 1.556, alpha: 0.809, c: 0.106, gamma: 0.097, ..Default::default() };
        cfg.validate().unwrap();
        assert!(SpsaConfig { gamma: 0.2, ..Default::default() }.validate().is_err());
        assert!(SpsaConfig { a: 0.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn deterministic_and_monotone_best() {
        let schedule = ShotSchedule::one_stage(300, 300).unwrap();
        let run = || {
            let mut ledger = ShotLedger::new(300);
            let mut calls = 0u64;
            let mut cost = FnCost(move |x: &[f64]| {
                calls += 1;
                sphere(x) + 0.01 * ((calls as f64) * 1.7).sin()
            });
            spsa_minimize(&mut cost, &[0.5, -0.5, 0.2], &SpsaConfig { seed: 4, ..Default::default() }, &schedule, &mut ledger)
                .unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.trace, b.trace);
        let mut running = f64::INFINITY;
        for e in &a.trace {
            running = running.min(e.value);
        }
        assert_eq!(Some(running), a.best_noisy_value);
        let best_entry = a.trace.iter().find(|e| Some(e.value) == a.best_noisy_value).unwrap();
        assert_eq!(best_entry.params, a.best_params);
        assert_eq!(a.shots_spent, a.trace.iter().map(|e| e.shots).sum::<u64>());
    }
}
