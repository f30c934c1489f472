//! Single-qubit Pauli matrices, tensor-product Pauli strings and the
//! generalized Bloch representation of operators on `m` qubits.
//!
//! Qubit 1 (the first entry of a [`PauliString`]) is the leftmost Kronecker
//! factor, i.e. the most significant bit of a computational-basis index.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Operator, C0, C1};

/// Largest qubit count for which dense `2^m × 2^m` matrices are built.
pub const DEFAULT_DENSE_CAP: usize = 8;

/// Tolerance for exact algebraic identities.
pub const ALGEBRAIC_TOL: f64 = 1e-10;

/// Tolerance for anything that goes through an eigensolver.
pub const EIGEN_TOL: f64 = 1e-9;

/// 0 is the identity, 1, 2, 3 are σ₁ (X), σ₂ (Y), σ₃ (Z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PauliIndex(u8);

impl PauliIndex {
    pub const I: PauliIndex = PauliIndex(0);
    pub const X: PauliIndex = PauliIndex(1);
    pub const Y: PauliIndex = PauliIndex(2);
    pub const Z: PauliIndex = PauliIndex(3);

    pub fn new(value: u8) -> Result<Self> {
        if value <= 3 {
            Ok(PauliIndex(value))
        } else {
            Err(Error::InvalidPauliIndex(value))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn matrix(self) -> Operator {
        single_pauli(self)
    }
}

/// Ordered tuple of per-qubit Pauli indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PauliString(Vec<PauliIndex>);

impl PauliString {
    pub fn new(indices: Vec<PauliIndex>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidAlphabet("a Pauli string needs at least one qubit".into()));
        }
        Ok(PauliString(indices))
    }

    pub fn from_values(values: &[u8]) -> Result<Self> {
        let indices = values.iter().map(|&v| PauliIndex::new(v)).collect::<Result<Vec<_>>>()?;
        Self::new(indices)
    }

    pub fn identity(m: usize) -> Self {
        PauliString(vec![PauliIndex::I; m.max(1)])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[PauliIndex] {
        &self.0
    }

    pub fn values(&self) -> Vec<u8> {
        self.0.iter().map(|p| p.0).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == PauliIndex::I)
    }

    /// True when every index is one of σ₁, σ₂, σ₃.
    pub fn is_non_identity_alphabet(&self) -> bool {
        self.0.iter().all(|&p| p != PauliIndex::I)
    }

    /// Every string over `{0,1,2,3}^m` in lexicographic order.
    pub fn all(m: usize) -> Vec<PauliString> {
        enumerate_strings(m, &[0, 1, 2, 3])
    }

    /// Every string over `{1,2,3}^m` in lexicographic order.
    pub fn all_non_identity(m: usize) -> Vec<PauliString> {
        enumerate_strings(m, &[1, 2, 3])
    }

    /// Position of this string in the lexicographic enumeration of
    /// `{1,2,3}^m`.
    pub fn non_identity_rank(&self) -> Result<usize> {
        self.0.iter().try_fold(0usize, |acc, p| match p.0 {
            1..=3 => Ok(acc * 3 + (p.0 as usize - 1)),
            v => Err(Error::InvalidAlphabet(format!("index {v} not in {{1,2,3}}"))),
        })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.0)?;
        }
        Ok(())
    }
}

fn enumerate_strings(m: usize, alphabet: &[u8]) -> Vec<PauliString> {
    let mut out: Vec<Vec<PauliIndex>> = vec![Vec::new()];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                alphabet.iter().map(move |&a| {
                    let mut next = prefix.clone();
                    next.push(PauliIndex(a));
                    next
                })
            })
            .collect();
    }
    out.into_iter().map(PauliString).collect()
}

pub fn single_pauli(i: PauliIndex) -> Operator {
    let ci = Complex64::new(0.0, 1.0);
    match i.0 {
        0 => Operator::from_row_slice(2, 2, &[C1, C0, C0, C1]),
        1 => Operator::from_row_slice(2, 2, &[C0, C1, C1, C0]),
        2 => Operator::from_row_slice(2, 2, &[C0, -ci, ci, C0]),
        _ => Operator::from_row_slice(2, 2, &[C1, C0, C0, -C1]),
    }
}

pub fn pauli_string_matrix(y: &PauliString) -> Result<Operator> {
    pauli_string_matrix_with_cap(y, DEFAULT_DENSE_CAP)
}

pub fn pauli_string_matrix_with_cap(y: &PauliString, cap: usize) -> Result<Operator> {
    if y.len() > cap {
        return Err(Error::CapacityExceeded { qubits: y.len(), cap });
    }
    let mut acc = single_pauli(y.0[0]);
    for &p in &y.0[1..] {
        acc = linalg::kron(&acc, &single_pauli(p));
    }
    Ok(acc)
}

/// `σ_y · v` without materializing the matrix.
pub fn apply_pauli_string(y: &PauliString, v: &[Complex64]) -> Result<Vec<Complex64>> {
    let m = y.len();
    let dim =
        1usize.checked_shl(m as u32).ok_or(Error::CapacityExceeded { qubits: m, cap: usize::BITS as usize - 1 })?;
    if v.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
    }
    let mut flip = 0usize;
    for (q, p) in y.0.iter().enumerate() {
        if matches!(p.0, 1 | 2) {
            flip |= 1 << (m - 1 - q);
        }
    }
    let ci = Complex64::new(0.0, 1.0);
    let mut out = vec![C0; dim];
    for (b, &amp) in v.iter().enumerate() {
        let mut phase = C1;
        for (q, p) in y.0.iter().enumerate() {
            let bit = (b >> (m - 1 - q)) & 1;
            match (p.0, bit) {
                (2, 0) => phase *= ci,
                (2, _) => phase *= -ci,
                (3, 1) => phase = -phase,
                _ => {}
            }
        }
        out[b ^ flip] = phase * amp;
    }
    Ok(out)
}

/// Maximum deviations from the four Pauli-string identities: hermiticity,
/// `tr σ_y = 2^m δ_{y,0}`, spectrum in `{−1, 1}`, and
/// `tr(σ_y† σ_y′) = 2^m δ_{y,y′}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliPropertiesReport {
    pub hermiticity: f64,
    pub trace: f64,
    pub eigenvalues: f64,
    pub orthogonality: f64,
    pub trace_value: f64,
    pub inner_product: f64,
}

impl PauliPropertiesReport {
    pub fn max_deviation(&self) -> f64 {
        self.hermiticity.max(self.trace).max(self.eigenvalues).max(self.orthogonality)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_deviation() <= tol
    }
}

pub fn pauli_properties_check(y: &PauliString, y_prime: &PauliString) -> Result<PauliPropertiesReport> {
    if y.len() != y_prime.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), found: y_prime.len() });
    }
    let a = pauli_string_matrix(y)?;
    let b = pauli_string_matrix(y_prime)?;
    let d = a.nrows() as f64;

    let hermiticity = linalg::max_abs(&(&a - a.adjoint()));

    let tr = linalg::trace(&a);
    let expected_tr = if y.is_identity() { d } else { 0.0 };
    let trace = (tr - Complex64::new(expected_tr, 0.0)).norm();

    let eigenvalues =
        linalg::eigenvalues(&a).into_iter().map(|l| (l - 1.0).abs().min((l + 1.0).abs())).fold(0.0, f64::max);

    let inner = linalg::trace_of_product(&a.adjoint(), &b);
    let expected_inner = if y == y_prime { d } else { 0.0 };
    let orthogonality = (inner - Complex64::new(expected_inner, 0.0)).norm();

    Ok(PauliPropertiesReport {
        hermiticity,
        trace,
        eigenvalues,
        orthogonality,
        trace_value: tr.re,
        inner_product: inner.re,
    })
}

/// Coefficients `tr(σ_y σ)` over all of `{0,1,2,3}^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochCoefficients {
    pub m: usize,
    pub coeffs: BTreeMap<PauliString, f64>,
}

impl BlochCoefficients {
    pub fn get(&self, y: &PauliString) -> f64 {
        self.coeffs.get(y).copied().unwrap_or(0.0)
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.coeffs.values().map(|c| c * c).sum()
    }
}

pub fn bloch_decompose(sigma: &Operator) -> Result<BlochCoefficients> {
    let dim = sigma.nrows();
    if dim < 2 || !dim.is_power_of_two() || sigma.ncols() != dim {
        return Err(Error::Malformed(format!("{}x{} is not a qubit operator", sigma.nrows(), sigma.ncols())));
    }
    let m = dim.trailing_zeros() as usize;
    if m > DEFAULT_DENSE_CAP {
        return Err(Error::CapacityExceeded { qubits: m, cap: DEFAULT_DENSE_CAP });
    }
    let deviation = linalg::hermiticity_deviation(sigma);
    if deviation > ALGEBRAIC_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let mut coeffs = BTreeMap::new();
    for y in PauliString::all(m) {
        let p = pauli_string_matrix(&y)?;
        coeffs.insert(y, linalg::trace_of_product(&p, sigma).re);
    }
    Ok(BlochCoefficients { m, coeffs })
}

pub fn bloch_reconstruct(c: &BlochCoefficients) -> Result<Operator> {
    let dim = 1usize << c.m;
    let mut out = Operator::zeros(dim, dim);
    for (y, &value) in &c.coeffs {
        if y.len() != c.m {
            return Err(Error::DimensionMismatch { expected: c.m, found: y.len() });
        }
        if value != 0.0 {
            out += pauli_string_matrix(y)? * Complex64::new(value, 0.0);
        }
    }
    Ok(out.unscale(dim as f64))
}
