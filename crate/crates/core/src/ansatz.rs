//! Parameterized circuits: trotterized UCC and the layered Hubbard ansatz.
//!
//! A circuit is an initial state followed by factors `exp(i·θ_j·Σ_k g_k P_k)`,
//! each realized as the ordered product of single-string exponentials
//! `exp(i·θ_j·g_k·P_k)`. Factors act in listed order: the first factor
//! touches the initial state first.

use crate::analysis::{exact_ground_resolved, Sector};
use crate::error::{Error, Result};
use crate::fermion::{Generator, HubbardPartition};
use crate::formats::GeneratorFile;
use crate::pauli::PauliString;
use crate::statevector::StateVector;

#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    /// Computational basis state with these qubits set.
    Occupation(Vec<usize>),
    /// Explicit state vector.
    Vector(StateVector),
}

/// One parameterized exponential `exp(i·θ_param·Σ g_k P_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    pub param: usize,
    pub label: String,
    pub terms: Vec<(f64, PauliString)>,
}

#[derive(Clone, Debug)]
pub struct AnsatzCircuit {
    n_qubits: usize,
    electrons: usize,
    initial: InitialState,
    factors: Vec<Factor>,
    n_params: usize,
    /// Human-readable provenance, e.g. degeneracy of the initial state.
    pub notes: Vec<String>,
}

impl AnsatzCircuit {
    pub fn new(n_qubits: usize, electrons: usize, initial: InitialState, factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidAnsatz("circuit has no parameters".into()));
        }
        let n_params = factors.iter().map(|f| f.param).max().expect("non-empty") + 1;
        let mut used = vec![false; n_params];
        for f in &factors {
            used[f.param] = true;
            if let Some((_, p)) = f.terms.iter().find(|(_, p)| p.n_qubits() != n_qubits) {
                return Err(Error::SizeMismatch { left: n_qubits, right: p.n_qubits() });
            }
        }
        if let Some(unused) = used.iter().position(|u| !u) {
            return Err(Error::InvalidAnsatz(format!("parameter {unused} is never used")));
        }
        match &initial {
            InitialState::Occupation(occ) => {
                if let Some(&q) = occ.iter().find(|&&q| q >= n_qubits) {
                    return Err(Error::QubitOutOfRange { index: q, n_qubits });
                }
            }
            InitialState::Vector(v) => {
                if v.n_qubits() != n_qubits {
                    return Err(Error::SizeMismatch { left: n_qubits, right: v.n_qubits() });
                }
            }
        }
        Ok(Self { n_qubits, electrons, initial, factors, n_params, notes: Vec::new() })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn electrons(&self) -> usize {
        self.electrons
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn initial(&self) -> &InitialState {
        &self.initial
    }

    pub fn initial_state(&self) -> Result<StateVector> {
        match &self.initial {
            InitialState::Occupation(occ) => StateVector::basis_state(self.n_qubits, occ),
            InitialState::Vector(v) => Ok(v.clone()),
        }
    }

    /// `|Ψ(θ)⟩ = U(θ)|Φ⟩`.
    pub fn prepare(&self, params: &[f64]) -> Result<StateVector> {
        if params.len() != self.n_params {
            return Err(Error::ParamLengthMismatch { expected: self.n_params, found: params.len() });
        }
        let mut state = self.initial_state()?;
        for f in &self.factors {
            let theta = params[f.param];
            for (g, p) in &f.terms {
                state.apply_pauli_exponential(p, theta * g)?;
            }
        }
        Ok(state)
    }

    /// Parameter labels in index order.
    pub fn param_labels(&self) -> Vec<String> {
        let mut labels = vec![String::new(); self.n_params];
        for f in &self.factors {
            if labels[f.param].is_empty() {
                labels[f.param] = f.label.clone();
            }
        }
        labels
    }
}

/// One parameter per generator, applied in descending |amplitude| order on
/// top of the Hartree-Fock state `{0, …, k−1}`.
pub fn build_ucc(file: &GeneratorFile) -> Result<AnsatzCircuit> {
    if file.blocks.is_empty() {
        return Err(Error::InvalidAnsatz("generator list is empty".into()));
    }
    if let Some(b) = file.blocks.iter().find(|b| b.amplitude == 0.0) {
        return Err(Error::ZeroAmplitude { index: b.index });
    }
    let mut file = file.clone();
    if !file.is_sorted_by_amplitude() {
        log::warn!("generator file not in descending |amplitude| order; re-sorting");
    }
    file.sort_by_amplitude();
    let factors = file
        .blocks
        .iter()
        .enumerate()
        .map(|(param, b)| Factor {
            param,
            label: format!("g{}", b.index),
            terms: b.generator.terms.clone(),
        })
        .collect();
    let occupied: Vec<usize> = (0..file.electrons).collect();
    AnsatzCircuit::new(file.n_qubits, file.electrons, InitialState::Occupation(occupied), factors)
}

/// Layered ansatz `Π_l e^{iθ_{v2,l}H_{v2}} e^{iθ_{h2,l}H_{h2}} e^{iθ_{v1,l}H_{v1}} e^{iθ_{h1,l}H_{h1}} e^{iθ_{U,l}H_U}`
/// over the classes present in `partition`, starting from the ground state
/// of the hopping part in the fixed-particle, minimal-`|S_z|` sector. A
/// degenerate hopping ground space is resolved by the lowest eigenvector of
/// the full Hamiltonian projected onto it.
pub fn build_vha(partition: &HubbardPartition, layers: usize) -> Result<AnsatzCircuit> {
    if layers == 0 {
        return Err(Error::InvalidAnsatz("at least one layer is required".into()));
    }
    if partition.parts().is_empty() {
        return Err(Error::InvalidAnsatz("partition has no term classes".into()));
    }
    let spec = partition.spec;
    let sector = Sector::particles_min_spin(spec.n_particles);
    let free = exact_ground_resolved(&partition.hopping(), Some(sector), Some(&partition.full()))?;

    let per_layer = partition.parts().len();
    let mut factors = Vec::with_capacity(layers * per_layer);
    for layer in 0..layers {
        for (k, (class, h)) in partition.parts().iter().enumerate() {
            factors.push(Factor {
                param: layer * per_layer + k,
                label: format!("{class}_{}", layer + 1),
                terms: Generator::from_hermitian(h).terms,
            });
        }
    }
    let mut circuit = AnsatzCircuit::new(
        partition.n_qubits(),
        spec.n_particles,
        InitialState::Vector(free.ground_vector),
        factors,
    )?;
    circuit.notes.push(format!("sector {sector}"));
    circuit.notes.push(format!("non-interacting ground degeneracy {}", free.degeneracy));
    if free.degeneracy > 1 {
        log::info!(
            "hopping Hamiltonian of the {} lattice has a {}-fold degenerate ground space in sector {sector}",
            spec.label(),
            free.degeneracy
        );
    }
    Ok(circuit)
}
