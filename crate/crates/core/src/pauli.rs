//! Pauli strings in the (x, z) bit-mask encoding and real-weighted Pauli sums.
//!
//! Qubit `q` corresponds to bit `q` of both masks and to character `q` of the
//! textual form, so `"XZYI"` has X on qubit 0, Z on qubit 1 and Y on qubit 2.
//! Letters are encoded as `I = (0, 0)`, `X = (1, 0)`, `Y = (1, 1)`, `Z = (0, 1)`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Largest register a [`PauliString`] can describe.
pub const MAX_QUBITS: usize = 64;

/// Default magnitude below which combined coefficients are dropped.
pub const DEFAULT_PRUNE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    /// Position in the canonical letter order `I < X < Y < Z`.
    fn rank(self) -> u8 {
        match self {
            Letter::I => 0,
            Letter::X => 1,
            Letter::Y => 2,
            Letter::Z => 3,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// Phase factor produced by multiplying two Pauli strings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    PlusOne,
    MinusOne,
    PlusI,
    MinusI,
}

impl Phase {
    /// Builds `i^k`.
    pub fn from_power_of_i(k: u32) -> Self {
        match k % 4 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    /// Exponent `k` in `i^k`.
    pub fn power_of_i(self) -> u32 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn to_complex(self) -> num_complex::Complex64 {
        use num_complex::Complex64;
        match self {
            Phase::PlusOne => Complex64::new(1.0, 0.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::PlusI => Complex64::new(0.0, 1.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

/// A tensor product of single-qubit Paulis on `n_qubits` qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

fn width_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        Self::from_masks(n_qubits, 0, 0)
    }

    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidQubitCount(n_qubits));
        }
        let mask = width_mask(n_qubits);
        if (x | z) & !mask != 0 {
            return Err(Error::QubitOutOfRange {
                index: 63 - ((x | z) & !mask).leading_zeros() as usize,
                n_qubits,
            });
        }
        Ok(Self { n_qubits, x, z })
    }

    /// Builds a string from `(qubit, letter)` pairs; unlisted qubits are `I`.
    pub fn from_sparse(n_qubits: usize, letters: &[(usize, Letter)]) -> Result<Self> {
        let mut s = Self::identity(n_qubits)?;
        for &(q, letter) in letters {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            s.set(q, letter);
        }
        Ok(s)
    }

    /// Parses text such as `"XZYI"`; character `q` is the letter on qubit `q`.
    pub fn parse(text: &str, n_qubits: usize) -> Result<Self> {
        let chars: Vec<char> = text.chars().collect();
        if chars.len() != n_qubits {
            return Err(Error::PauliParse {
                position: chars.len().min(n_qubits),
                message: format!("expected {n_qubits} letters, found {}", chars.len()),
            });
        }
        let mut s = Self::identity(n_qubits)?;
        for (q, ch) in chars.into_iter().enumerate() {
            let letter = match ch {
                'I' => Letter::I,
                'X' => Letter::X,
                'Y' => Letter::Y,
                'Z' => Letter::Z,
                other => {
                    return Err(Error::PauliParse {
                        position: q,
                        message: format!("unexpected character {other:?}"),
                    })
                }
            };
            s.set(q, letter);
        }
        Ok(s)
    }

    fn set(&mut self, q: usize, letter: Letter) {
        let (xb, zb) = letter.bits();
        let bit = 1u64 << q;
        self.x = (self.x & !bit) | if xb { bit } else { 0 };
        self.z = (self.z & !bit) | if zb { bit } else { 0 };
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.n_qubits).map(move |q| self.letter(q))
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// True when the string contains no X or Y letter.
    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Number of Y letters.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Operator product `self · other = phase · product`.
    pub fn multiply(&self, other: &Self) -> Result<(Phase, PauliString)> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::SizeMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        let (ax, az, bx, bz) = (self.x, self.z, other.x, other.z);
        let a_x = ax & !az;
        let a_y = ax & az;
        let a_z = !ax & az;
        let b_x = bx & !bz;
        let b_y = bx & bz;
        let b_z = !bx & bz;
        // XY = iZ, YZ = iX, ZX = iY and the reversed products carry -i.
        let plus = (a_x & b_y) | (a_y & b_z) | (a_z & b_x);
        let minus = (a_y & b_x) | (a_z & b_y) | (a_x & b_z);
        let k = (plus.count_ones() + 3 * minus.count_ones()) % 4;
        Ok((
            Phase::from_power_of_i(k),
            PauliString {
                n_qubits: self.n_qubits,
                x: ax ^ bx,
                z: az ^ bz,
            },
        ))
    }
}

impl Ord for PauliString {
    /// Lexicographic on letters from qubit 0 upward with `I < X < Y < Z`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.n_qubits.cmp(&other.n_qubits).then_with(|| {
            let diff = (self.x ^ other.x) | (self.z ^ other.z);
            if diff == 0 {
                return Ordering::Equal;
            }
            let q = diff.trailing_zeros() as usize;
            self.letter(q).rank().cmp(&other.letter(q).rank())
        })
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for letter in self.letters() {
            write!(f, "{}", letter.as_char())?;
        }
        Ok(())
    }
}

/// A real coefficient attached to a Pauli string.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    pub string: PauliString,
}

impl PauliTerm {
    pub fn new(coeff: f64, string: PauliString) -> Result<Self> {
        if !coeff.is_finite() {
            return Err(Error::NonFiniteCoefficient(coeff));
        }
        Ok(Self { coeff, string })
    }
}

/// Canonicalized real linear combination of Pauli strings.
///
/// The identity contribution is kept apart in `identity_coeff`; stored terms
/// are unique, non-identity and iterate in canonical string order.
#[derive(Clone, Debug)]
pub struct PauliSum {
    n_qubits: usize,
    identity_coeff: f64,
    terms: BTreeMap<PauliString, f64>,
    prune_tolerance: f64,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Result<Self> {
        Self::with_prune_tolerance(n_qubits, DEFAULT_PRUNE_TOLERANCE)
    }

    pub fn with_prune_tolerance(n_qubits: usize, prune_tolerance: f64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidQubitCount(n_qubits));
        }
        Ok(Self {
            n_qubits,
            identity_coeff: 0.0,
            terms: BTreeMap::new(),
            prune_tolerance,
        })
    }

    pub fn from_terms(n_qubits: usize, identity_coeff: f64, terms: &[PauliTerm]) -> Result<Self> {
        let mut sum = Self::new(n_qubits)?;
        sum.add_identity(identity_coeff)?;
        for term in terms {
            sum.add_term(*term)?;
        }
        Ok(sum)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn identity_coeff(&self) -> f64 {
        self.identity_coeff
    }

    pub fn prune_tolerance(&self) -> f64 {
        self.prune_tolerance
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Non-identity terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = PauliTerm> + '_ {
        self.terms
            .iter()
            .map(|(string, &coeff)| PauliTerm { coeff, string: *string })
    }

    pub fn coefficient(&self, string: &PauliString) -> f64 {
        if string.is_identity() {
            self.identity_coeff
        } else {
            self.terms.get(string).copied().unwrap_or(0.0)
        }
    }

    pub fn add_identity(&mut self, coeff: f64) -> Result<()> {
        if !coeff.is_finite() {
            return Err(Error::NonFiniteCoefficient(coeff));
        }
        self.identity_coeff += coeff;
        Ok(())
    }

    /// Adds a term, combining it with an existing equal string and pruning
    /// the result if its magnitude drops below the prune tolerance.
    pub fn add_term(&mut self, term: PauliTerm) -> Result<()> {
        if term.string.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                left: self.n_qubits,
                right: term.string.n_qubits(),
            });
        }
        if !term.coeff.is_finite() {
            return Err(Error::NonFiniteCoefficient(term.coeff));
        }
        if term.string.is_identity() {
            self.identity_coeff += term.coeff;
            return Ok(());
        }
        let entry = self.terms.entry(term.string).or_insert(0.0);
        *entry += term.coeff;
        if entry.abs() < self.prune_tolerance {
            self.terms.remove(&term.string);
        }
        Ok(())
    }

    /// Consuming form of [`PauliSum::add_term`].
    pub fn with_term(mut self, term: PauliTerm) -> Result<Self> {
        self.add_term(term)?;
        Ok(self)
    }

    pub fn add_sum(&mut self, other: &PauliSum) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::SizeMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        self.identity_coeff += other.identity_coeff;
        for term in other.terms() {
            self.add_term(term)?;
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> PauliSum {
        let mut out = self.clone();
        out.identity_coeff *= factor;
        for coeff in out.terms.values_mut() {
            *coeff *= factor;
        }
        out.terms.retain(|_, c| c.abs() >= out.prune_tolerance);
        out
    }

    /// Sum of squared non-identity coefficients.
    pub fn coefficient_norm_sq(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum()
    }

    /// Largest absolute coefficient difference against `other`, identity included.
    pub fn max_difference(&self, other: &PauliSum) -> f64 {
        let mut diff = (self.identity_coeff - other.identity_coeff).abs();
        for (s, c) in &self.terms {
            diff = diff.max((c - other.coefficient(s)).abs());
        }
        for (s, c) in &other.terms {
            diff = diff.max((c - self.coefficient(s)).abs());
        }
        diff
    }
}

impl PartialEq for PauliSum {
    fn eq(&self, other: &Self) -> bool {
        self.n_qubits == other.n_qubits
            && self.identity_coeff == other.identity_coeff
            && self.terms == other.terms
    }
}
