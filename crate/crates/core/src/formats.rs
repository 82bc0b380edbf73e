//! Text formats for Hamiltonians and excitation generators.
//!
//! Hamiltonian file:
//!
//! ```text
//! qubits 4
//! electrons 2
//! identity -9.8863969999999998e-2
//! 1.7119774999999999e-1 ZIII
//! ```
//!
//! Generator file: `qubits`/`electrons` header, then blocks
//! `generator <index> amplitude <a>` each followed by `<g_k> <paulistring>`
//! lines meaning the term `i·g_k·P_k`. Blocks appear in descending |amplitude|.
//!
//! `#` starts a comment in both formats. Floats are written with 17
//! significant digits in lowercase e-notation.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fermion::Generator;
use crate::pauli::{PauliString, PauliSum, PauliTerm};

/// Renders a float with 17 significant digits, e.g. `-2.5000000000000000e-1`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token.parse().map_err(|_| Error::Format {
        line,
        message: format!("invalid number {token:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Format { line, message: format!("non-finite number {token:?}") });
    }
    Ok(v)
}

fn parse_usize(token: &str, line: usize) -> Result<usize> {
    token.parse().map_err(|_| Error::Format {
        line,
        message: format!("invalid integer {token:?}"),
    })
}

/// Non-empty lines with comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn expect_header<'a>(
    lines: &mut impl Iterator<Item = (usize, Vec<&'a str>)>,
    key: &str,
) -> Result<(usize, &'a str)> {
    match lines.next() {
        Some((n, tokens)) if tokens.len() == 2 && tokens[0] == key => Ok((n, tokens[1])),
        Some((n, _)) => Err(Error::Format { line: n, message: format!("expected `{key} <value>`") }),
        None => Err(Error::Format { line: 0, message: format!("missing `{key}` header") }),
    }
}

/// A qubit Hamiltonian together with its electron count.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianFile {
    pub electrons: usize,
    pub hamiltonian: PauliSum,
}

impl HamiltonianFile {
    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let (n, q) = expect_header(&mut lines, "qubits")?;
        let n_qubits = parse_usize(q, n)?;
        let (n, e) = expect_header(&mut lines, "electrons")?;
        let electrons = parse_usize(e, n)?;
        if electrons > n_qubits {
            return Err(Error::Format {
                line: n,
                message: format!("{electrons} electrons exceed {n_qubits} spin orbitals"),
            });
        }
        let (n, c0) = expect_header(&mut lines, "identity")?;
        let mut hamiltonian = PauliSum::new(n_qubits)?;
        hamiltonian.add_identity(parse_f64(c0, n)?)?;
        for (n, tokens) in lines {
            if tokens.len() != 2 {
                return Err(Error::Format { line: n, message: "expected `<coeff> <paulistring>`".into() });
            }
            let coeff = parse_f64(tokens[0], n)?;
            let string = PauliString::parse(tokens[1], n_qubits)
                .map_err(|e| Error::Format { line: n, message: e.to_string() })?;
            hamiltonian.add_term(PauliTerm::new(coeff, string)?)?;
        }
        Ok(Self { electrons, hamiltonian })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "qubits {}", self.n_qubits());
        let _ = writeln!(out, "electrons {}", self.electrons);
        let _ = writeln!(out, "identity {}", fmt_f64(self.hamiltonian.identity_coeff()));
        for t in self.hamiltonian.terms() {
            let _ = writeln!(out, "{} {}", fmt_f64(t.coeff), t.string);
        }
        out
    }
}

/// One excitation generator with the amplitude used to order it.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorBlock {
    pub index: usize,
    pub amplitude: f64,
    pub generator: Generator,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorFile {
    pub n_qubits: usize,
    pub electrons: usize,
    pub blocks: Vec<GeneratorBlock>,
}

impl GeneratorFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = content_lines(text).peekable();
        let (n, q) = expect_header(&mut lines, "qubits")?;
        let n_qubits = parse_usize(q, n)?;
        let (n, e) = expect_header(&mut lines, "electrons")?;
        let electrons = parse_usize(e, n)?;
        let mut blocks = Vec::new();
        while let Some((n, tokens)) = lines.next() {
            if tokens.len() != 4 || tokens[0] != "generator" || tokens[2] != "amplitude" {
                return Err(Error::Format {
                    line: n,
                    message: "expected `generator <index> amplitude <a>`".into(),
                });
            }
            let index = parse_usize(tokens[1], n)?;
            let amplitude = parse_f64(tokens[3], n)?;
            let mut terms = Vec::new();
            while let Some((_, next)) = lines.peek() {
                if next[0] == "generator" {
                    break;
                }
                let (n, tokens) = lines.next().expect("peeked");
                if tokens.len() != 2 {
                    return Err(Error::Format { line: n, message: "expected `<g> <paulistring>`".into() });
                }
                let g = parse_f64(tokens[0], n)?;
                let p = PauliString::parse(tokens[1], n_qubits)
                    .map_err(|e| Error::Format { line: n, message: e.to_string() })?;
                terms.push((g, p));
            }
            if terms.is_empty() {
                return Err(Error::Format { line: n, message: format!("generator {index} has no terms") });
            }
            blocks.push(GeneratorBlock { index, amplitude, generator: Generator::new(n_qubits, terms)? });
        }
        Ok(Self { n_qubits, electrons, blocks })
    }

    /// Sorts blocks by descending |amplitude|, ties by index.
    pub fn sort_by_amplitude(&mut self) {
        self.blocks.sort_by(|a, b| {
            b.amplitude
                .abs()
                .total_cmp(&a.amplitude.abs())
                .then(a.index.cmp(&b.index))
        });
    }

    pub fn is_sorted_by_amplitude(&self) -> bool {
        self.blocks
            .windows(2)
            .all(|w| w[0].amplitude.abs() >= w[1].amplitude.abs())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "qubits {}", self.n_qubits);
        let _ = writeln!(out, "electrons {}", self.electrons);
        for b in &self.blocks {
            let _ = writeln!(out, "generator {} amplitude {}", b.index, fmt_f64(b.amplitude));
            for (g, p) in &b.generator.terms {
                let _ = writeln!(out, "{} {}", fmt_f64(*g), p);
            }
        }
        out
    }
}
