//! Dense-matrix oracles used only by unit tests. Nothing here goes through
//! the bit-mask machinery of the modules under test.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::pauli::{Letter, PauliString, PauliSum};

fn single(letter: Letter) -> [[Complex64; 2]; 2] {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match letter {
        Letter::I => [[l, o], [o, l]],
        Letter::X => [[o, l], [l, o]],
        Letter::Y => [[o, -i], [i, o]],
        Letter::Z => [[l, o], [o, -l]],
    }
}

/// Matrix of a Pauli string; basis index bit `q` is the state of qubit `q`.
pub fn pauli_matrix(p: &PauliString) -> DMatrix<Complex64> {
    let n = p.n_qubits();
    let dim = 1usize << n;
    let factors: Vec<_> = (0..n).map(|q| single(p.letter(q))).collect();
    DMatrix::from_fn(dim, dim, |r, c| {
        let mut v = Complex64::new(1.0, 0.0);
        for (q, f) in factors.iter().enumerate() {
            v *= f[(r >> q) & 1][(c >> q) & 1];
        }
        v
    })
}

pub fn sum_matrix(h: &PauliSum) -> DMatrix<Complex64> {
    let dim = 1usize << h.n_qubits();
    let mut m = DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(h.identity_coeff(), 0.0);
    for t in h.terms() {
        m += pauli_matrix(&t.string) * Complex64::new(t.coeff, 0.0);
    }
    m
}

/// Generator `Σ i·g_k·P_k` as a dense matrix.
pub fn generator_matrix(n_qubits: usize, terms: &[(f64, PauliString)]) -> DMatrix<Complex64> {
    let dim = 1usize << n_qubits;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (g, p) in terms {
        m += pauli_matrix(p) * Complex64::new(0.0, *g);
    }
    m
}

/// Annihilation operator on mode `j` in the occupation-number basis with the
/// usual ordering sign `(-1)^(number of occupied modes below j)`.
pub fn annihilation(n_modes: usize, j: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n_modes;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for b in 0..dim {
        if b >> j & 1 == 1 {
            let sign = if (b & ((1 << j) - 1)).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            m[(b ^ (1 << j), b)] = Complex64::new(sign, 0.0);
        }
    }
    m
}

pub fn creation(n_modes: usize, j: usize) -> DMatrix<Complex64> {
    annihilation(n_modes, j).adjoint()
}

pub fn number_operator(n_modes: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n_modes;
    DMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            Complex64::new(r.count_ones() as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn sorted_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

pub fn to_dvector(amps: &[Complex64]) -> DVector<Complex64> {
    DVector::from_column_slice(amps)
}
