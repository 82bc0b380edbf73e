//! Jordan-Wigner mapping of fermionic operators, Fermi-Hubbard lattices and
//! coupled-cluster excitation generators.
//!
//! Spin orbitals follow a single convention throughout the crate: site `s`
//! with spin `σ ∈ {0 = up, 1 = down}` is mode `2s + σ`, and mode `j` is qubit `j`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString, PauliSum, PauliTerm};

/// Largest |imaginary| (resp. |real|) part tolerated when reducing a complex
/// Pauli expansion to a Hermitian (resp. anti-Hermitian) result.
const HERMITICITY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self { mode, dagger: false }
    }
}

/// One weighted product of ladder operators, applied right to left.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionProduct {
    pub coeff: f64,
    pub factors: Vec<Ladder>,
}

/// Real linear combination of ladder-operator products.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FermionOp {
    pub products: Vec<FermionProduct>,
}

impl FermionOp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, coeff: f64, factors: Vec<Ladder>) {
        self.products.push(FermionProduct { coeff, factors });
    }

    pub fn extend(&mut self, other: FermionOp) {
        self.products.extend(other.products);
    }

    /// `n_j = a†_j a_j`.
    pub fn number(mode: usize) -> Self {
        let mut op = Self::new();
        op.push(1.0, vec![Ladder::create(mode), Ladder::annihilate(mode)]);
        op
    }

    /// `coeff · (a†_i a_j + a†_j a_i)`.
    pub fn hopping(i: usize, j: usize, coeff: f64) -> Self {
        let mut op = Self::new();
        op.push(coeff, vec![Ladder::create(i), Ladder::annihilate(j)]);
        op.push(coeff, vec![Ladder::create(j), Ladder::annihilate(i)]);
        op
    }

    /// `coeff · n_i n_j`.
    pub fn density_density(i: usize, j: usize, coeff: f64) -> Self {
        let mut op = Self::new();
        op.push(
            coeff,
            vec![
                Ladder::create(i),
                Ladder::annihilate(i),
                Ladder::create(j),
                Ladder::annihilate(j),
            ],
        );
        op
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.products
            .iter()
            .flat_map(|p| p.factors.iter().map(|l| l.mode))
            .max()
    }

    /// Hermitian conjugate.
    pub fn adjoint(&self) -> Self {
        Self {
            products: self
                .products
                .iter()
                .map(|p| FermionProduct {
                    coeff: p.coeff,
                    factors: p
                        .factors
                        .iter()
                        .rev()
                        .map(|l| Ladder { mode: l.mode, dagger: !l.dagger })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Complex-weighted Pauli expansion, the intermediate form of the mapping.
#[derive(Clone, Debug)]
pub struct ComplexPauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl ComplexPauliSum {
    fn zero(n_qubits: usize) -> Self {
        Self { n_qubits, terms: BTreeMap::new() }
    }

    fn scalar(n_qubits: usize, c: Complex64) -> Result<Self> {
        let mut s = Self::zero(n_qubits);
        s.terms.insert(PauliString::identity(n_qubits)?, c);
        Ok(s)
    }

    fn add(&mut self, string: PauliString, c: Complex64) {
        *self.terms.entry(string).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    fn multiply(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zero(self.n_qubits);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let (phase, prod) = a.multiply(b)?;
                out.add(prod, ca * cb * phase.to_complex());
            }
        }
        out.terms.retain(|_, c| c.norm() > 1e-15);
        Ok(out)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn max_imag(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_real(&self) -> f64 {
        self.terms.values().map(|c| c.re.abs()).fold(0.0, f64::max)
    }
}

/// Jordan-Wigner image of a single ladder operator:
/// `a_j = Z_0…Z_{j-1} (X_j + iY_j)/2`, `a†_j = Z_0…Z_{j-1} (X_j − iY_j)/2`.
fn ladder_image(l: Ladder, n_modes: usize) -> Result<ComplexPauliSum> {
    let chain: Vec<(usize, Letter)> = (0..l.mode).map(|q| (q, Letter::Z)).collect();
    let mut with_x = chain.clone();
    with_x.push((l.mode, Letter::X));
    let mut with_y = chain;
    with_y.push((l.mode, Letter::Y));
    let y_sign = if l.dagger { -0.5 } else { 0.5 };
    let mut out = ComplexPauliSum::zero(n_modes);
    out.add(PauliString::from_sparse(n_modes, &with_x)?, Complex64::new(0.5, 0.0));
    out.add(PauliString::from_sparse(n_modes, &with_y)?, Complex64::new(0.0, y_sign));
    Ok(out)
}

/// Full complex Jordan-Wigner expansion of `op` on `n_modes` qubits.
pub fn jordan_wigner_complex(op: &FermionOp, n_modes: usize) -> Result<ComplexPauliSum> {
    if let Some(m) = op.max_mode() {
        if m >= n_modes {
            return Err(Error::ModeOutOfRange { mode: m, n_modes });
        }
    }
    let mut total = ComplexPauliSum::zero(n_modes);
    for product in &op.products {
        let mut acc = ComplexPauliSum::scalar(n_modes, Complex64::new(product.coeff, 0.0))?;
        for &l in &product.factors {
            acc = acc.multiply(&ladder_image(l, n_modes)?)?;
        }
        for (s, c) in acc.terms {
            total.add(s, c);
        }
    }
    Ok(total)
}

/// Jordan-Wigner image of a Hermitian fermionic operator as a real Pauli sum.
pub fn jordan_wigner(op: &FermionOp, n_modes: usize) -> Result<PauliSum> {
    let expansion = jordan_wigner_complex(op, n_modes)?;
    let max_imag = expansion.max_imag();
    if max_imag > HERMITICITY_TOLERANCE {
        return Err(Error::NotHermitian(max_imag));
    }
    let mut sum = PauliSum::new(n_modes)?;
    for (s, c) in expansion.terms {
        sum.add_term(PauliTerm::new(c.re, s)?)?;
    }
    Ok(sum)
}

/// Total particle number `Σ_j n_j`.
pub fn total_number(n_modes: usize) -> Result<PauliSum> {
    let mut op = FermionOp::new();
    for j in 0..n_modes {
        op.extend(FermionOp::number(j));
    }
    jordan_wigner(&op, n_modes)
}

/// Total `S_z = ½ Σ_s (n_{s↑} − n_{s↓})`; requires an even mode count.
pub fn total_sz(n_modes: usize) -> Result<PauliSum> {
    let mut op = FermionOp::new();
    for j in 0..n_modes {
        let sign = if j % 2 == 0 { 0.5 } else { -0.5 };
        op.push(sign, vec![Ladder::create(j), Ladder::annihilate(j)]);
    }
    jordan_wigner(&op, n_modes)
}

// ---------------------------------------------------------------------------
// Fermi-Hubbard
// ---------------------------------------------------------------------------

/// Open-boundary Fermi-Hubbard lattice of `rows × cols` sites.
///
/// A lattice labelled `R×C` has `R` rows and `C` columns: `1×6` is a chain of
/// six sites along the horizontal direction. Site `(r, c)` has index `r·cols + c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HubbardSpec {
    pub rows: usize,
    pub cols: usize,
    pub t: f64,
    pub u: f64,
    pub n_particles: usize,
}

impl HubbardSpec {
    /// Half-filled lattice.
    pub fn new(rows: usize, cols: usize, t: f64, u: f64) -> Self {
        Self { rows, cols, t, u, n_particles: rows * cols }
    }

    pub fn n_sites(&self) -> usize {
        self.rows * self.cols
    }

    pub fn n_modes(&self) -> usize {
        2 * self.n_sites()
    }

    pub fn site(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn label(&self) -> String {
        format!("{}x{}", self.rows, self.cols)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows * self.cols < 2 {
            return Err(Error::DegenerateLattice { rows: self.rows, cols: self.cols });
        }
        if !self.t.is_finite() || !self.u.is_finite() {
            return Err(Error::InvalidConfig("hubbard t and u must be finite".into()));
        }
        if self.n_particles > self.n_modes() {
            return Err(Error::InvalidConfig(format!(
                "{} particles do not fit in {} spin orbitals",
                self.n_particles,
                self.n_modes()
            )));
        }
        Ok(())
    }

    /// Nearest-neighbour bonds `(site_a, site_b)` belonging to `class`.
    pub fn bonds(&self, class: TermClass) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        match class {
            TermClass::H1 | TermClass::H2 => {
                let parity = if class == TermClass::H1 { 0 } else { 1 };
                for r in 0..self.rows {
                    for c in (parity..self.cols.saturating_sub(1)).step_by(2) {
                        out.push((self.site(r, c), self.site(r, c + 1)));
                    }
                }
            }
            TermClass::V1 | TermClass::V2 => {
                let parity = if class == TermClass::V1 { 0 } else { 1 };
                for r in (parity..self.rows.saturating_sub(1)).step_by(2) {
                    for c in 0..self.cols {
                        out.push((self.site(r, c), self.site(r + 1, c)));
                    }
                }
            }
            TermClass::U => {}
        }
        out
    }

    /// Fermionic operator of one term class.
    pub fn class_operator(&self, class: TermClass) -> FermionOp {
        let mut op = FermionOp::new();
        match class {
            TermClass::U => {
                for s in 0..self.n_sites() {
                    op.extend(FermionOp::density_density(2 * s, 2 * s + 1, self.u));
                }
            }
            _ => {
                for (a, b) in self.bonds(class) {
                    for spin in 0..2 {
                        op.extend(FermionOp::hopping(2 * a + spin, 2 * b + spin, -self.t));
                    }
                }
            }
        }
        op
    }

    /// The whole Hamiltonian as one fermionic operator, built bond by bond
    /// without reference to the class partition.
    pub fn fermion_op(&self) -> FermionOp {
        let mut op = FermionOp::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                let s = self.site(r, c);
                let mut neighbours = Vec::new();
                if c + 1 < self.cols {
                    neighbours.push(self.site(r, c + 1));
                }
                if r + 1 < self.rows {
                    neighbours.push(self.site(r + 1, c));
                }
                for n in neighbours {
                    for spin in 0..2 {
                        op.extend(FermionOp::hopping(2 * s + spin, 2 * n + spin, -self.t));
                    }
                }
                op.extend(FermionOp::density_density(2 * s, 2 * s + 1, self.u));
            }
        }
        op
    }
}

/// Hamiltonian term classes of the layered Hubbard ansatz, in application order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermClass {
    U,
    H1,
    V1,
    H2,
    V2,
}

impl TermClass {
    pub const APPLICATION_ORDER: [TermClass; 5] =
        [TermClass::U, TermClass::H1, TermClass::V1, TermClass::H2, TermClass::V2];

    pub fn name(self) -> &'static str {
        match self {
            TermClass::U => "u",
            TermClass::H1 => "h1",
            TermClass::V1 => "v1",
            TermClass::H2 => "h2",
            TermClass::V2 => "v2",
        }
    }

    pub fn is_hopping(self) -> bool {
        self != TermClass::U
    }
}

impl fmt::Display for TermClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Qubit Hubbard Hamiltonian split into its term classes.
#[derive(Clone, Debug)]
pub struct HubbardPartition {
    pub spec: HubbardSpec,
    parts: Vec<(TermClass, PauliSum)>,
}

impl HubbardPartition {
    /// Present classes in application order `U, h1, v1, h2, v2`.
    pub fn parts(&self) -> &[(TermClass, PauliSum)] {
        &self.parts
    }

    pub fn part(&self, class: TermClass) -> Option<&PauliSum> {
        self.parts.iter().find(|(c, _)| *c == class).map(|(_, h)| h)
    }

    pub fn classes(&self) -> Vec<TermClass> {
        self.parts.iter().map(|(c, _)| *c).collect()
    }

    pub fn n_qubits(&self) -> usize {
        self.spec.n_modes()
    }

    /// Sum of every part.
    pub fn full(&self) -> PauliSum {
        self.sum_where(|_| true)
    }

    /// Hopping part `H_t`.
    pub fn hopping(&self) -> PauliSum {
        self.sum_where(TermClass::is_hopping)
    }

    fn sum_where(&self, keep: impl Fn(TermClass) -> bool) -> PauliSum {
        let mut total = PauliSum::new(self.n_qubits()).expect("lattice has at least two sites");
        for (class, h) in &self.parts {
            if keep(*class) {
                total.add_sum(h).expect("parts share the register size");
            }
        }
        total
    }
}

/// Builds the Hubbard Hamiltonian and its disjoint-matching class partition.
pub fn build_hubbard(spec: &HubbardSpec) -> Result<HubbardPartition> {
    spec.validate()?;
    let n_modes = spec.n_modes();
    let mut parts = Vec::new();
    for class in TermClass::APPLICATION_ORDER {
        if class.is_hopping() && spec.bonds(class).is_empty() {
            continue;
        }
        let h = jordan_wigner(&spec.class_operator(class), n_modes)?;
        parts.push((class, h));
    }
    Ok(HubbardPartition { spec: *spec, parts })
}

// ---------------------------------------------------------------------------
// Excitation generators
// ---------------------------------------------------------------------------

/// Particle-hole excitation `τ`: `a†_a a_i` or `a†_a a†_b a_i a_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Excitation {
    Single { from: usize, to: usize },
    Double { from: [usize; 2], to: [usize; 2] },
}

impl Excitation {
    fn validate(&self) -> Result<()> {
        let modes: Vec<usize> = match *self {
            Excitation::Single { from, to } => vec![from, to],
            Excitation::Double { from, to } => vec![from[0], from[1], to[0], to[1]],
        };
        for (i, a) in modes.iter().enumerate() {
            if modes[i + 1..].contains(a) {
                return Err(Error::MalformedExcitation(format!("mode {a} repeated in {self:?}")));
            }
        }
        Ok(())
    }

    pub fn operator(&self) -> FermionOp {
        let mut op = FermionOp::new();
        match *self {
            Excitation::Single { from, to } => {
                op.push(1.0, vec![Ladder::create(to), Ladder::annihilate(from)]);
            }
            Excitation::Double { from, to } => op.push(
                1.0,
                vec![
                    Ladder::create(to[0]),
                    Ladder::create(to[1]),
                    Ladder::annihilate(from[0]),
                    Ladder::annihilate(from[1]),
                ],
            ),
        }
        op
    }
}

/// Anti-Hermitian generator `G = Σ_k i·g_k·P_k`, terms in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub n_qubits: usize,
    pub terms: Vec<(f64, PauliString)>,
}

impl Generator {
    pub fn new(n_qubits: usize, mut terms: Vec<(f64, PauliString)>) -> Result<Self> {
        for (g, p) in &terms {
            if p.n_qubits() != n_qubits {
                return Err(Error::SizeMismatch { left: n_qubits, right: p.n_qubits() });
            }
            if !g.is_finite() {
                return Err(Error::NonFiniteCoefficient(*g));
            }
        }
        terms.sort_by_key(|a| a.1);
        Ok(Self { n_qubits, terms })
    }

    /// `i·H` for a Hermitian `H`, dropping its identity part (a global phase).
    pub fn from_hermitian(h: &PauliSum) -> Self {
        Self {
            n_qubits: h.n_qubits(),
            terms: h.terms().map(|t| (t.coeff, t.string)).collect(),
        }
    }
}

/// `τ − τ†` for a single or double excitation, mapped to qubits.
pub fn excitation_generator(excitation: &Excitation, n_modes: usize) -> Result<Generator> {
    excitation.validate()?;
    let tau = excitation.operator();
    let mut op = tau.clone();
    for p in tau.adjoint().products {
        op.push(-p.coeff, p.factors);
    }
    let expansion = jordan_wigner_complex(&op, n_modes)?;
    let max_real = expansion.max_real();
    if max_real > HERMITICITY_TOLERANCE {
        return Err(Error::NotAntiHermitian(max_real));
    }
    let terms = expansion
        .terms()
        .filter(|(_, c)| c.im.abs() > HERMITICITY_TOLERANCE)
        .map(|(s, c)| (c.im, *s))
        .collect();
    Generator::new(n_modes, terms)
}
