//! Building blocks for benchmarking gradient-free optimizers on variational
//! quantum eigensolver problems under simulated shot noise.
//!
//! The crate is organised bottom-up:
//!
//! - [`pauli`]: Pauli strings and real Pauli sums.
//! - [`fermion`]: Jordan-Wigner mapping, Fermi-Hubbard construction, excitation generators.
//! - [`statevector`]: dense state simulation with exact Pauli exponentials.
//! - [`ansatz`]: trotterized UCC and layered Hamiltonian-variational circuits.
//! - [`sampler`]: binomial shot sampling and shot accounting.
//! - [`schedule`]: one- and three-stage shot schedules.
//! - [`optim`]: SPSA and CMA-ES with best-ever and favourite candidates.
//! - [`racing`]: iterated racing for hyperparameter tuning.
//! - [`analysis`]: exact diagonalization, error metrics and the sampling noise floor.
//! - [`formats`]: Hamiltonian and generator text files.

pub mod analysis;
pub mod ansatz;
pub mod error;
pub mod fermion;
pub mod formats;
pub mod optim;
pub mod pauli;
pub mod racing;
pub mod rng;
pub mod sampler;
pub mod schedule;
pub mod statevector;

#[cfg(test)]
pub(crate) mod dense;

pub use error::{BudgetExhausted, Error, Result};
pub use pauli::{Letter, Phase, PauliString, PauliSum, PauliTerm};
pub use statevector::StateVector;
