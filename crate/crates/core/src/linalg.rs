//! Dense complex linear algebra shared by every module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`; Hermitian spectra come from
//! `SymmetricEigen`, which handles complex Hermitian input.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Square complex matrix. All quantum states and measurement elements are
/// carried in this form.
pub type Operator = DMatrix<Complex64>;

/// Complex column vector.
pub type StateVector = DVector<Complex64>;

pub const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const C1: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn identity(dim: usize) -> Operator {
    DMatrix::identity(dim, dim)
}

pub fn trace(a: &Operator) -> Complex64 {
    a.diagonal().iter().sum()
}

/// `tr(a·b)` without forming the product.
pub fn trace_of_product(a: &Operator, b: &Operator) -> Complex64 {
    let n = a.nrows();
    let mut acc = C0;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kronecker(b)
}

pub fn max_abs(a: &Operator) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise deviation of `a` from `a†`.
pub fn hermiticity_deviation(a: &Operator) -> f64 {
    let n = a.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Average of `a` and `a†`; removes rounding asymmetry before eigensolves.
pub fn hermitian_part(a: &Operator) -> Operator {
    (a + a.adjoint()).scale(0.5)
}

/// Ascending eigenvalues and matching column eigenvectors of a Hermitian
/// operator.
pub fn eigh(a: &Operator) -> (Vec<f64>, Operator) {
    let eig = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Operator::from_fn(a.nrows(), a.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn eigenvalues(a: &Operator) -> Vec<f64> {
    eigh(a).0
}

/// Sum of absolute eigenvalues of a Hermitian operator.
pub fn trace_norm(a: &Operator) -> f64 {
    eigenvalues(a).iter().map(|v| v.abs()).sum()
}

/// Applies `f` to the spectrum of a Hermitian operator.
pub fn spectral_map(a: &Operator, f: impl Fn(f64) -> f64) -> Operator {
    let (values, vectors) = eigh(a);
    let n = a.nrows();
    let mut out = Operator::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        let col = vectors.column(k);
        let w = Complex64::new(f(lambda), 0.0);
        if w == C0 {
            continue;
        }
        out += (col * col.adjoint()) * w;
    }
    out
}

/// Eigenvalues below this are treated as zero before square roots, which
/// would otherwise lift `1e-17` rounding noise to `3e-9`.
pub const SPECTRAL_FLOOR: f64 = 1e-14;

/// Principal square root of a positive semidefinite operator.
pub fn psd_sqrt(a: &Operator) -> Operator {
    spectral_map(a, |x| if x > SPECTRAL_FLOOR { x.sqrt() } else { 0.0 })
}

/// `|v⟩⟨v|`.
pub fn outer(v: &StateVector) -> Operator {
    v * v.adjoint()
}

/// Computational basis vector `|index⟩` of dimension `dim`.
pub fn basis_vector(dim: usize, index: usize) -> StateVector {
    let mut v = StateVector::zeros(dim);
    v[index] = C1;
    v
}

/// Traces out the trailing factor of dimension `dim_b` from an operator on
/// `A ⊗ B`.
pub fn partial_trace_second(a: &Operator, dim_a: usize, dim_b: usize) -> Result<Operator> {
    if a.nrows() != dim_a * dim_b {
        return Err(Error::DimensionMismatch { expected: dim_a * dim_b, found: a.nrows() });
    }
    Ok(Operator::from_fn(dim_a, dim_a, |i, j| (0..dim_b).map(|k| a[(i * dim_b + k, j * dim_b + k)]).sum()))
}

/// Traces out the leading factor of dimension `dim_a` from an operator on
/// `A ⊗ B`.
pub fn partial_trace_first(a: &Operator, dim_a: usize, dim_b: usize) -> Result<Operator> {
    if a.nrows() != dim_a * dim_b {
        return Err(Error::DimensionMismatch { expected: dim_a * dim_b, found: a.nrows() });
    }
    Ok(Operator::from_fn(dim_b, dim_b, |i, j| (0..dim_a).map(|k| a[(k * dim_b + i, k * dim_b + j)]).sum()))
}

pub fn random_complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Haar-random unit vector.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector {
    let v = StateVector::from_fn(dim, |_, _| random_complex_gaussian(rng));
    let norm = v.norm();
    v.unscale(norm)
}

/// Random mixed state `G G† / tr(G G†)` with a Ginibre matrix `G`.
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    let g = Operator::from_fn(dim, dim, |_, _| random_complex_gaussian(rng));
    let rho = &g * g.adjoint();
    let tr = trace(&rho).re;
    hermitian_part(&rho.unscale(tr))
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    let g = Operator::from_fn(dim, dim, |_, _| random_complex_gaussian(rng));
    hermitian_part(&g)
}
