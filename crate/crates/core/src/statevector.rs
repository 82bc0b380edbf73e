//! Dense statevector simulation.
//!
//! Basis index bit `q` holds the state of qubit `q`. A Pauli string with
//! masks `(x, z)` acts as `P|b⟩ = i^{#Y} (−1)^{|b ∧ z|} |b ⊕ x⟩`, which is all
//! that exponentials and expectations below rely on.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};

/// Largest register simulated densely.
pub const MAX_SIMULATED_QUBITS: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

/// `(−1)^{popcount(b & z)}`.
#[inline]
fn parity_sign(b: usize, z: u64) -> f64 {
    if ((b as u64) & z).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `i^k` for the Y-count prefactor of a Pauli string.
#[inline]
fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl StateVector {
    /// Computational basis state with the listed qubits in `|1⟩`.
    pub fn basis_state(n_qubits: usize, occupied: &[usize]) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_SIMULATED_QUBITS {
            return Err(Error::InvalidQubitCount(n_qubits));
        }
        let mut index = 0usize;
        for &q in occupied {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            index |= 1 << q;
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps amplitudes, normalizing them.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_SIMULATED_QUBITS {
            return Err(Error::InvalidQubitCount(n_qubits));
        }
        if amps.len() != 1 << n_qubits {
            return Err(Error::InvalidConfig(format!(
                "{} amplitudes supplied for {n_qubits} qubits",
                amps.len()
            )));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidConfig("state vector has zero or non-finite norm".into()));
        }
        Ok(Self {
            n_qubits,
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn check(&self, p: &PauliString) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch { left: self.n_qubits, right: p.n_qubits() });
        }
        Ok(())
    }

    /// In-place `|ψ⟩ ← exp(i·angle·P)|ψ⟩ = (cos(angle)·I + i·sin(angle)·P)|ψ⟩`.
    pub fn apply_pauli_exponential(&mut self, p: &PauliString, angle: f64) -> Result<()> {
        self.check(p)?;
        if angle == 0.0 {
            return Ok(());
        }
        let (cos, sin) = (angle.cos(), angle.sin());
        let x = p.x_mask() as usize;
        let z = p.z_mask();
        let isin = Complex64::new(0.0, sin);
        if x == 0 {
            let plus = Complex64::new(cos, sin);
            let minus = Complex64::new(cos, -sin);
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a *= if parity_sign(b, z) > 0.0 { plus } else { minus };
            }
            return Ok(());
        }
        let prefactor = i_pow(p.y_count()) * isin;
        // pair b with b ^ x, visiting each pair once through its lower index
        let pivot = 1usize << (63 - (x as u64).leading_zeros());
        for b in 0..self.amps.len() {
            if b & pivot != 0 {
                continue;
            }
            let c = b ^ x;
            let (ab, ac) = (self.amps[b], self.amps[c]);
            // P|b⟩ = i^y (−1)^{b·z} |c⟩ and P|c⟩ = i^y (−1)^{c·z} |b⟩
            self.amps[c] = ac * cos + prefactor * parity_sign(b, z) * ab;
            self.amps[b] = ab * cos + prefactor * parity_sign(c, z) * ac;
        }
        Ok(())
    }

    /// `⟨ψ|P|ψ⟩`, clamped to `[−1, 1]`.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        self.check(p)?;
        Ok(self.expectation_unchecked(p))
    }

    pub(crate) fn expectation_unchecked(&self, p: &PauliString) -> f64 {
        let x = p.x_mask() as usize;
        let z = p.z_mask();
        let value = if x == 0 {
            self.amps
                .iter()
                .enumerate()
                .map(|(b, a)| parity_sign(b, z) * a.norm_sqr())
                .sum::<f64>()
        } else {
            let prefactor = i_pow(p.y_count());
            let acc: Complex64 = self
                .amps
                .iter()
                .enumerate()
                .map(|(b, a)| self.amps[b ^ x].conj() * a * parity_sign(b, z))
                .sum();
            (prefactor * acc).re
        };
        value.clamp(-1.0, 1.0)
    }

    /// Noiseless cost `c₀ + Σ cᵢ⟨Pᵢ⟩`.
    pub fn expectation_sum(&self, h: &PauliSum) -> Result<f64> {
        if h.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch { left: self.n_qubits, right: h.n_qubits() });
        }
        Ok(h.identity_coeff()
            + h.terms()
                .map(|t| t.coeff * self.expectation_unchecked(&t.string))
                .sum::<f64>())
    }

    /// `H|ψ⟩` as a raw amplitude vector (not normalized).
    pub fn apply_sum(&self, h: &PauliSum) -> Result<Vec<Complex64>> {
        if h.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch { left: self.n_qubits, right: h.n_qubits() });
        }
        Ok(apply_sum_raw(h, &self.amps))
    }
}

/// `H·v` on a raw amplitude vector of dimension `2^n`.
pub(crate) fn apply_sum_raw(h: &PauliSum, v: &[Complex64]) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = v.iter().map(|a| a * h.identity_coeff()).collect();
    for t in h.terms() {
        let x = t.string.x_mask() as usize;
        let z = t.string.z_mask();
        let pre = i_pow(t.string.y_count()) * t.coeff;
        for (b, a) in v.iter().enumerate() {
            out[b ^ x] += pre * parity_sign(b, z) * a;
        }
    }
    out
}
