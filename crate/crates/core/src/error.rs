use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count {0} outside 1..=64")]
    InvalidQubitCount(usize),
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("invalid Pauli string at position {position}: {message}")]
    PauliParse { position: usize, message: String },
    #[error("size mismatch: {left} vs {right} qubits")]
    SizeMismatch { left: usize, right: usize },
    #[error("coefficient {0} is not finite")]
    NonFiniteCoefficient(f64),

    #[error("fermionic mode {mode} out of range for {n_modes} modes")]
    ModeOutOfRange { mode: usize, n_modes: usize },
    #[error("operator is not Hermitian (largest imaginary coefficient {0:e})")]
    NotHermitian(f64),
    #[error("generator is not anti-Hermitian (largest real coefficient {0:e})")]
    NotAntiHermitian(f64),
    #[error("malformed excitation: {0}")]
    MalformedExcitation(String),
    #[error("degenerate lattice {rows}x{cols}: at least two sites required")]
    DegenerateLattice { rows: usize, cols: usize },

    #[error("parameter vector has length {found}, circuit expects {expected}")]
    ParamLengthMismatch { expected: usize, found: usize },
    #[error("invalid ansatz: {0}")]
    InvalidAnsatz(String),
    #[error("generator {index} has zero amplitude")]
    ZeroAmplitude { index: usize },

    #[error("exact expectation {0} outside [-1, 1]")]
    ExpectationOutOfRange(f64),
    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("infeasible schedule: {0}")]
    ScheduleInfeasible(String),

    #[error("relative error undefined: E0 equals the identity coefficient ({0})")]
    UndefinedMetric(f64),
    #[error("probability {0} outside the open interval (0, 0.5)")]
    InvalidProbability(f64),
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error(transparent)]
    Budget(#[from] BudgetExhausted),
}

impl Error {
    /// True for the normal end-of-budget signal that stops an optimizer.
    pub fn is_budget_exhausted(&self) -> bool {
        matches!(self, Error::Budget(_))
    }
}

/// Returned when an evaluation would overdraw the shot ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("shot budget exhausted: {spent} of {budget} spent, {requested} requested")]
pub struct BudgetExhausted {
    pub spent: u64,
    pub budget: u64,
    pub requested: u64,
}
