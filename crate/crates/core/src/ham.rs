//! Pauli-string Hamiltonians.
//!
//! A Hamiltonian is a real-weighted sum of Pauli strings
//!
//!   H = Σ_k c_k · P_k
//!
//! Basis-state convention: bit `q` of a computational basis index is the
//! state of qubit `q` (little-endian), so `|5⟩` on three qubits has qubits 0
//! and 2 set.
//!
//! # Text format
//!
//! ```text
//! # transverse-field Ising, two sites
//! qubits 2
//! -1.0 Z0 Z1
//! -0.5 X0
//! -0.5 X1
//! ```
//!
//! A bare coefficient is an identity term. Duplicate strings are summed.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register handled by dense-matrix routines.
pub const MAX_DENSE_QUBITS: usize = 14;

/// Single-qubit Pauli operator (identity is represented by absence).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PauliOp {
    X,
    Y,
    Z,
}

impl PauliOp {
    fn from_char(c: char) -> Option<Self> {
        match c {
            'X' => Some(PauliOp::X),
            'Y' => Some(PauliOp::Y),
            'Z' => Some(PauliOp::Z),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            PauliOp::X => 'X',
            PauliOp::Y => 'Y',
            PauliOp::Z => 'Z',
        }
    }
}

/// Tensor product of Pauli operators keyed by qubit index.
///
/// Ordering is lexicographic over the `(qubit, op)` sequence, which is the
/// tie-break used by [`PauliHamiltonian::compress`].
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    ops: BTreeMap<usize, PauliOp>,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Build from `(qubit, op)` pairs. A repeated qubit keeps the last op.
    pub fn from_ops(ops: impl IntoIterator<Item = (usize, PauliOp)>) -> Self {
        Self {
            ops: ops.into_iter().collect(),
        }
    }

    pub fn single(qubit: usize, op: PauliOp) -> Self {
        Self::from_ops([(qubit, op)])
    }

    pub fn ops(&self) -> impl Iterator<Item = (usize, PauliOp)> + '_ {
        self.ops.iter().map(|(&q, &op)| (q, op))
    }

    pub fn get(&self, qubit: usize) -> Option<PauliOp> {
        self.ops.get(&qubit).copied()
    }

    pub fn is_identity(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.ops.len()
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.ops.keys().next_back().copied()
    }

    /// Bits flipped by the string (X and Y positions).
    pub fn x_mask(&self) -> usize {
        self.ops
            .iter()
            .filter(|(_, op)| matches!(op, PauliOp::X | PauliOp::Y))
            .fold(0, |m, (&q, _)| m | (1 << q))
    }

    /// Bits that pick up a sign (Z and Y positions).
    pub fn z_mask(&self) -> usize {
        self.ops
            .iter()
            .filter(|(_, op)| matches!(op, PauliOp::Z | PauliOp::Y))
            .fold(0, |m, (&q, _)| m | (1 << q))
    }

    pub fn y_count(&self) -> usize {
        self.ops.values().filter(|op| **op == PauliOp::Y).count()
    }

    /// Precomputed action on basis states.
    pub fn action(&self) -> PauliAction {
        PauliAction::new(self)
    }

    /// Two Pauli strings anticommute iff they differ on an odd number of
    /// shared non-identity positions.
    pub fn anticommutes_with(&self, other: &PauliString) -> bool {
        let clashes = self
            .ops
            .iter()
            .filter(|(q, op)| other.ops.get(q).is_some_and(|o| o != *op))
            .count();
        clashes % 2 == 1
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ops.is_empty() {
            return f.write_str("I");
        }
        for (i, (q, op)) in self.ops.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}{}", op.as_char(), q)?;
        }
        Ok(())
    }
}

/// Bit-mask form of a Pauli string: `P|b⟩ = phase(b) · |b ⊕ x_mask⟩` with
/// `phase(b) = i^{n_Y} · (−1)^{popcount(b & z_mask)}` (using `Y = iXZ`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliAction {
    pub x_mask: usize,
    pub z_mask: usize,
    /// `i^{n_Y}` as a power of `i` modulo 4.
    y_power: u8,
}

impl PauliAction {
    pub fn new(p: &PauliString) -> Self {
        Self {
            x_mask: p.x_mask(),
            z_mask: p.z_mask(),
            y_power: (p.y_count() % 4) as u8,
        }
    }

    /// Phase acquired when acting on basis state `b`.
    #[inline]
    pub fn phase(&self, b: usize) -> Complex64 {
        let sign_flip = (b & self.z_mask).count_ones() % 2 == 1;
        let power = (self.y_power + if sign_flip { 2 } else { 0 }) % 4;
        match power {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    #[inline]
    pub fn is_diagonal(&self) -> bool {
        self.x_mask == 0
    }

    /// `(P ψ)` accumulated into `out` with weight `coeff`.
    pub fn apply_add(&self, coeff: f64, psi: &[Complex64], out: &mut [Complex64]) {
        for (b, amp) in psi.iter().enumerate() {
            out[b ^ self.x_mask] += self.phase(b) * amp * coeff;
        }
    }
}

/// Weighted sum of Pauli strings with real coefficients.
///
/// Terms keep first-appearance order; equality compares terms as a multiset.
#[derive(Debug, Clone)]
pub struct PauliHamiltonian {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PartialEq for PauliHamiltonian {
    fn eq(&self, other: &Self) -> bool {
        if self.n_qubits != other.n_qubits || self.terms.len() != other.terms.len() {
            return false;
        }
        let mut a: Vec<_> = self.terms.iter().collect();
        let mut b: Vec<_> = other.terms.iter().collect();
        a.sort_by(|x, y| x.1.cmp(&y.1));
        b.sort_by(|x, y| x.1.cmp(&y.1));
        a.iter().zip(&b).all(|(x, y)| x.1 == y.1 && x.0 == y.0)
    }
}

impl PauliHamiltonian {
    /// Validate indices and coefficients and merge duplicate strings.
    pub fn new(
        n_qubits: usize,
        terms: impl IntoIterator<Item = (f64, PauliString)>,
    ) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Invalid(
                "a Hamiltonian needs at least one qubit".into(),
            ));
        }
        let mut merged: Vec<(f64, PauliString)> = Vec::new();
        let mut index: HashMap<PauliString, usize> = HashMap::new();
        for (coeff, string) in terms {
            if !coeff.is_finite() {
                return Err(Error::Invalid(format!(
                    "non-finite coefficient on {string}"
                )));
            }
            if let Some(q) = string.max_qubit().filter(|&q| q >= n_qubits) {
                return Err(Error::QubitRange {
                    line: 0,
                    index: q,
                    n_qubits,
                });
            }
            match index.get(&string) {
                Some(&i) => merged[i].0 += coeff,
                None => {
                    index.insert(string.clone(), merged.len());
                    merged.push((coeff, string));
                }
            }
        }
        Ok(Self {
            n_qubits,
            terms: merged,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    /// Sum of two Hamiltonians on the same register.
    pub fn add(&self, other: &PauliHamiltonian) -> Result<PauliHamiltonian> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Shape(format!(
                "cannot add {}-qubit and {}-qubit Hamiltonians",
                self.n_qubits, other.n_qubits
            )));
        }
        PauliHamiltonian::new(
            self.n_qubits,
            self.terms.iter().chain(&other.terms).cloned(),
        )
    }

    /// Drop terms with `|c| <= cutoff`, then keep the `max_terms` largest by
    /// magnitude. Output order is descending `|c|`, ties by Pauli string.
    pub fn compress(&self, cutoff: f64, max_terms: Option<usize>) -> PauliHamiltonian {
        let mut kept: Vec<(f64, PauliString)> = self
            .terms
            .iter()
            .filter(|(c, _)| c.abs() > cutoff)
            .cloned()
            .collect();
        kept.sort_by(|a, b| {
            b.0.abs()
                .partial_cmp(&a.0.abs())
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.1.cmp(&b.1))
        });
        if let Some(m) = max_terms {
            kept.truncate(m);
        }
        PauliHamiltonian {
            n_qubits: self.n_qubits,
            terms: kept,
        }
    }

    /// `⟨b|H|b⟩` for a computational basis state.
    pub fn diagonal(&self, b: usize) -> f64 {
        self.terms
            .iter()
            .filter(|(_, p)| p.x_mask() == 0)
            .map(|(c, p)| {
                if (b & p.z_mask()).count_ones() % 2 == 1 {
                    -c
                } else {
                    *c
                }
            })
            .sum()
    }

    /// All diagonal entries, `2^n` of them.
    pub fn diagonal_entries(&self) -> Vec<f64> {
        let mut diag = vec![0.0; self.dim()];
        for (c, p) in &self.terms {
            if p.x_mask() != 0 {
                continue;
            }
            let z = p.z_mask();
            for (b, d) in diag.iter_mut().enumerate() {
                if (b & z).count_ones() % 2 == 1 {
                    *d -= c;
                } else {
                    *d += c;
                }
            }
        }
        diag
    }

    /// `H ψ` without forming the matrix.
    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(psi.len(), self.dim());
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        for (c, p) in &self.terms {
            p.action().apply_add(*c, psi, &mut out);
        }
        out
    }

    /// `⟨ψ|H|ψ⟩`, real part (the imaginary part vanishes for Hermitian H).
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let h_psi = self.apply(psi);
        psi.iter().zip(&h_psi).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn to_dense_matrix(&self) -> Result<DMatrix<Complex64>> {
        check_dense(self.n_qubits)?;
        let dim = self.dim();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (c, p) in &self.terms {
            let act = p.action();
            for col in 0..dim {
                m[(col ^ act.x_mask, col)] += act.phase(col) * *c;
            }
        }
        Ok(m)
    }

    /// Minimal eigenpair by full dense diagonalisation.
    ///
    /// The eigenvector's global phase is fixed so that its largest component
    /// is real and positive.
    pub fn exact_ground_state(&self) -> Result<GroundState> {
        let m = self.to_dense_matrix()?;
        let (energy, vector) = lowest_eigenpair(m);
        Ok(GroundState { energy, vector })
    }

    /// Text serialisation; coefficients carry 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.n_qubits);
        for (c, p) in &self.terms {
            if p.is_identity() {
                out.push_str(&format!("{c:.16e}\n"));
            } else {
                out.push_str(&format!("{c:.16e} {p}\n"));
            }
        }
        out
    }

    pub fn read(path: impl AsRef<std::path::Path>) -> Result<PauliHamiltonian> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_hamiltonian(&text)
    }
}

impl FromStr for PauliHamiltonian {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_hamiltonian(s)
    }
}

/// Minimal eigenvalue and eigenvector of a Hermitian matrix.
///
/// Real symmetric input (every Pauli term with an even number of Y factors)
/// takes the cheaper real path.
pub(crate) fn lowest_eigenpair(m: DMatrix<Complex64>) -> (f64, Vec<Complex64>) {
    if m.iter().all(|z| z.im == 0.0) {
        let eig = SymmetricEigen::new(m.map(|z| z.re));
        let (imin, energy) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty matrix");
        let v = eig
            .eigenvectors
            .column(imin)
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        return (energy, fix_phase(v));
    }
    let eig = SymmetricEigen::new(m);
    let (imin, energy) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty matrix");
    let v: Vec<Complex64> = eig.eigenvectors.column(imin).iter().copied().collect();
    (energy, fix_phase(v))
}

/// Normalise and rotate the global phase so the largest component is real
/// and positive.
fn fix_phase(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    let rot = pivot.conj() / pivot.norm();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut v {
        *a = *a * rot / norm;
    }
    v
}

pub(crate) fn check_dense(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_DENSE_QUBITS {
        return Err(Error::Capacity {
            what: "dense matrix",
            requested: n_qubits,
            limit: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub vector: Vec<Complex64>,
}

/// Parse the line format described in the module docs.
pub fn parse_hamiltonian(text: &str) -> Result<PauliHamiltonian> {
    let mut n_qubits: Option<usize> = None;
    let mut terms = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let first = tokens.next().expect("non-empty line");
        if first == "qubits" {
            if n_qubits.is_some() {
                return Err(parse_err(line_no, "duplicate `qubits` header"));
            }
            let n: usize = tokens
                .next()
                .and_then(|t| t.parse().ok())
                .filter(|&n| n > 0)
                .ok_or_else(|| parse_err(line_no, "expected `qubits <positive integer>`"))?;
            if tokens.next().is_some() {
                return Err(parse_err(line_no, "trailing tokens after qubit count"));
            }
            n_qubits = Some(n);
            continue;
        }
        let n = n_qubits.ok_or_else(|| parse_err(line_no, "term before `qubits <n>` header"))?;
        let coeff: f64 = first
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad coefficient `{first}`")))?;
        if !coeff.is_finite() {
            return Err(parse_err(line_no, "coefficient must be finite"));
        }
        let mut ops = BTreeMap::new();
        for tok in tokens {
            if tok == "I" {
                continue;
            }
            let mut chars = tok.chars();
            let head = chars.next().expect("non-empty token");
            let idx: usize = chars
                .as_str()
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad Pauli factor `{tok}`")))?;
            if idx >= n {
                return Err(Error::QubitRange {
                    line: line_no,
                    index: idx,
                    n_qubits: n,
                });
            }
            if head == 'I' {
                continue;
            }
            let op = PauliOp::from_char(head)
                .ok_or_else(|| parse_err(line_no, format!("bad Pauli factor `{tok}`")))?;
            if ops.insert(idx, op).is_some() {
                return Err(parse_err(line_no, format!("qubit {idx} appears twice")));
            }
        }
        terms.push((coeff, PauliString { ops }));
    }
    let n = n_qubits.ok_or_else(|| parse_err(0, "missing `qubits <n>` header"))?;
    PauliHamiltonian::new(n, terms)
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// A solver's answer plus run accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyEstimate {
    pub value: f64,
    pub shots_used: u64,
    pub iterations: usize,
    pub wall_time_s: f64,
    /// The solver fell back to the reference-state diagonal energy.
    pub degenerate: bool,
    /// The run stopped early on the shot budget.
    pub truncated: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parses_single_term() {
        let h = parse_hamiltonian("qubits 1\n-1.0 Z0").unwrap();
        assert_eq!(h.n_qubits(), 1);
        assert_eq!(h.terms(), &[(-1.0, PauliString::single(0, PauliOp::Z))]);
    }

    #[test]
    fn merges_duplicate_strings() {
        let h = parse_hamiltonian("qubits 2\n0.5 Z0 Z1\n0.5 Z0 Z1").unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.terms()[0].0, 1.0);
    }

    #[test]
    fn rejects_out_of_range_index() {
        let err = parse_hamiltonian("qubits 2\n1.0 X3").unwrap_err();
        assert!(matches!(
            err,
            Error::QubitRange {
                line: 2,
                index: 3,
                n_qubits: 2
            }
        ));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_hamiltonian("qubits 2\n# ok\n\n1.0 Q0").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        let err = parse_hamiltonian("1.0 Z0").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_hamiltonian("# nothing").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        let err = parse_hamiltonian("qubits 2\n1.0 Z0 X0").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn identity_terms_and_comments() {
        let h = parse_hamiltonian("qubits 2 # header\n0.25\n1.5 I0 Z1 # trailing\n").unwrap();
        assert_eq!(h.len(), 2);
        assert!(h.terms()[0].1.is_identity());
        assert_eq!(h.terms()[1].1, PauliString::single(1, PauliOp::Z));
    }

    #[test]
    fn compress_cutoff_removes_small_terms() {
        let h = PauliHamiltonian::new(
            1,
            [
                (1.0, PauliString::single(0, PauliOp::Z)),
                (0.04, PauliString::single(0, PauliOp::X)),
            ],
        )
        .unwrap();
        let hc = h.compress(0.05, None);
        assert_eq!(hc.terms(), &[(1.0, PauliString::single(0, PauliOp::Z))]);
        // Boundary: a term exactly at the cutoff goes.
        let h = PauliHamiltonian::new(1, [(0.05, PauliString::single(0, PauliOp::X))]).unwrap();
        assert!(h.compress(0.05, None).is_empty());
    }

    #[test]
    fn compress_zero_cutoff_is_noop() {
        let h = PauliHamiltonian::new(1, [(1.0, PauliString::single(0, PauliOp::Z))]).unwrap();
        assert_eq!(h.compress(0.0, None), h);
    }

    #[test]
    fn compress_keeps_largest_terms() {
        let terms: Vec<_> = (0..300)
            .map(|k| {
                let p = PauliString::from_ops(
                    (0..9).filter(|q| k >> q & 1 == 1).map(|q| (q, PauliOp::Z)),
                );
                (0.001 * (k as f64 + 1.0), p)
            })
            .collect();
        let h = PauliHamiltonian::new(9, terms).unwrap();
        let hc = h.compress(0.0, Some(200));
        assert_eq!(hc.len(), 200);
        let smallest = hc
            .terms()
            .iter()
            .map(|t| t.0.abs())
            .fold(f64::MAX, f64::min);
        assert_abs_diff_eq!(smallest, 0.101, epsilon = 1e-12);
        assert!(hc.terms().windows(2).all(|w| w[0].0.abs() >= w[1].0.abs()));
    }

    #[test]
    fn compress_breaks_ties_lexicographically() {
        let h = PauliHamiltonian::new(
            2,
            [
                (-1.0, PauliString::single(1, PauliOp::X)),
                (1.0, PauliString::single(0, PauliOp::Z)),
                (1.0, PauliString::single(0, PauliOp::X)),
            ],
        )
        .unwrap();
        let order: Vec<String> = h
            .compress(0.0, None)
            .terms()
            .iter()
            .map(|t| t.1.to_string())
            .collect();
        assert_eq!(order, ["X0", "Z0", "X1"]);
    }

    #[test]
    fn dense_matrices_of_single_paulis() {
        let z = PauliHamiltonian::new(1, [(1.0, PauliString::single(0, PauliOp::Z))]).unwrap();
        let m = z.to_dense_matrix().unwrap();
        assert_eq!(m[(0, 0)], c(1.0, 0.0));
        assert_eq!(m[(1, 1)], c(-1.0, 0.0));
        assert_eq!(m[(0, 1)], c(0.0, 0.0));

        let x = PauliHamiltonian::new(1, [(1.0, PauliString::single(0, PauliOp::X))]).unwrap();
        let m = x.to_dense_matrix().unwrap();
        assert_eq!(m[(0, 1)], c(1.0, 0.0));
        assert_eq!(m[(1, 0)], c(1.0, 0.0));
        assert_eq!(m[(0, 0)], c(0.0, 0.0));

        let y = PauliHamiltonian::new(1, [(1.0, PauliString::single(0, PauliOp::Y))]).unwrap();
        let m = y.to_dense_matrix().unwrap();
        assert_eq!(m[(0, 1)], c(0.0, -1.0));
        assert_eq!(m[(1, 0)], c(0.0, 1.0));
    }

    #[test]
    fn dense_zz_matches_hand_kronecker() {
        let h = parse_hamiltonian("qubits 2\n0.5 Z0 Z1").unwrap();
        let m = h.to_dense_matrix().unwrap();
        let expect = [0.5, -0.5, -0.5, 0.5];
        for (i, e) in expect.iter().enumerate() {
            for j in 0..4 {
                let want = if i == j { *e } else { 0.0 };
                assert_eq!(m[(i, j)], c(want, 0.0));
            }
        }
    }

    #[test]
    fn dense_capacity_guard() {
        let h = PauliHamiltonian::new(15, [(1.0, PauliString::single(14, PauliOp::Z))]).unwrap();
        assert!(matches!(h.to_dense_matrix(), Err(Error::Capacity { .. })));
        assert!(matches!(
            h.exact_ground_state(),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn ground_state_of_diagonal_and_x() {
        let h = parse_hamiltonian("qubits 1\n-1.0 Z0").unwrap();
        let gs = h.exact_ground_state().unwrap();
        assert_abs_diff_eq!(gs.energy, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gs.vector[0].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gs.vector[1].norm(), 0.0, epsilon = 1e-12);

        let h = parse_hamiltonian("qubits 1\n1.0 X0").unwrap();
        let gs = h.exact_ground_state().unwrap();
        assert_abs_diff_eq!(gs.energy, -1.0, epsilon = 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // Phase-fixed up to which component is the pivot.
        let ratio = gs.vector[1] / gs.vector[0];
        assert_abs_diff_eq!(ratio.re, -1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(gs.vector[0].norm(), s, epsilon = 1e-10);
    }

    #[test]
    fn text_round_trip_is_exact() {
        let h = PauliHamiltonian::new(
            3,
            [
                (
                    0.1 + 0.2,
                    PauliString::from_ops([(0, PauliOp::X), (2, PauliOp::Y)]),
                ),
                (-1.0 / 3.0, PauliString::identity()),
                (1e-300, PauliString::single(1, PauliOp::Z)),
            ],
        )
        .unwrap();
        let back = parse_hamiltonian(&h.to_text()).unwrap();
        assert_eq!(back, h);
        assert_eq!(back.terms(), h.terms());
    }

    #[test]
    fn anticommutation_rule() {
        let x0 = PauliString::single(0, PauliOp::X);
        let z0 = PauliString::single(0, PauliOp::Z);
        let z0z1 = PauliString::from_ops([(0, PauliOp::Z), (1, PauliOp::Z)]);
        let x0x1 = PauliString::from_ops([(0, PauliOp::X), (1, PauliOp::X)]);
        assert!(x0.anticommutes_with(&z0));
        assert!(!x0x1.anticommutes_with(&z0z1));
        assert!(x0.anticommutes_with(&z0z1));
    }

    #[test]
    fn expectation_matches_dense() {
        let h = parse_hamiltonian("qubits 2\n0.3 X0 Y1\n-0.7 Z0\n0.2 Y0 Y1\n0.1").unwrap();
        let psi: Vec<Complex64> = [c(0.1, 0.2), c(-0.5, 0.1), c(0.3, -0.4), c(0.2, 0.6)].into();
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let psi: Vec<_> = psi.iter().map(|a| a / norm).collect();
        let m = h.to_dense_matrix().unwrap();
        let v = nalgebra::DVector::from_vec(psi.clone());
        let dense = (v.adjoint() * &m * &v)[(0, 0)];
        assert_abs_diff_eq!(h.expectation(&psi), dense.re, epsilon = 1e-12);
        assert_abs_diff_eq!(dense.im, 0.0, epsilon = 1e-12);
    }
}
