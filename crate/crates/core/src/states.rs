//! Density operators, classical-quantum states and the locking ensemble.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Operator, StateVector};
use crate::pauli::{self, PauliString, ALGEBRAIC_TOL, DEFAULT_DENSE_CAP, EIGEN_TOL};

/// Outcome of [`validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub hermiticity_deviation: f64,
    pub min_eigenvalue: f64,
    pub trace_deviation: f64,
}

impl ValidationReport {
    pub fn passes(&self) -> bool {
        self.hermiticity_deviation <= ALGEBRAIC_TOL
            && self.min_eigenvalue >= -EIGEN_TOL
            && self.trace_deviation <= ALGEBRAIC_TOL
    }
}

/// Checks hermiticity, positivity and unit trace of a square matrix.
pub fn validate(rho: &Operator) -> ValidationReport {
    let hermiticity_deviation = linalg::hermiticity_deviation(rho);
    let min_eigenvalue = linalg::eigenvalues(rho).first().copied().unwrap_or(0.0);
    let trace_deviation = (linalg::trace(rho) - linalg::C1).norm();
    ValidationReport { hermiticity_deviation, min_eigenvalue, trace_deviation }
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator(Operator);

impl DensityOperator {
    pub fn new(op: Operator) -> Result<Self> {
        if op.nrows() != op.ncols() || op.nrows() == 0 {
            return Err(Error::InvalidState(format!("{}x{} is not square", op.nrows(), op.ncols())));
        }
        let report = validate(&op);
        if !report.passes() {
            return Err(Error::InvalidState(format!(
                "hermiticity {:.3e}, min eigenvalue {:.3e}, trace deviation {:.3e}",
                report.hermiticity_deviation, report.min_eigenvalue, report.trace_deviation
            )));
        }
        Ok(DensityOperator(linalg::hermitian_part(&op)))
    }

    /// Skips validation for operators that are valid by construction.
    pub(crate) fn trusted(op: Operator) -> Self {
        DensityOperator(op)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityOperator(linalg::identity(dim).unscale(dim as f64))
    }

    pub fn pure(v: &StateVector) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(Error::InvalidState(format!("state vector has norm {norm}")));
        }
        Ok(DensityOperator(linalg::outer(v)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn op(&self) -> &Operator {
        &self.0
    }

    pub fn into_op(self) -> Operator {
        self.0
    }

    pub fn validate(&self) -> ValidationReport {
        validate(&self.0)
    }
}

/// Unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureStateVector {
    amplitudes: StateVector,
}

impl PureStateVector {
    pub fn new(amplitudes: StateVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(Error::InvalidState(format!("state vector has norm {norm}")));
        }
        Ok(PureStateVector { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &StateVector {
        &self.amplitudes
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator(linalg::outer(&self.amplitudes))
    }
}

/// A classical register with explicit labels correlated with a quantum
/// system: `Σ_v P(v) |v⟩⟨v| ⊗ ρ_{E|v}`.
#[derive(Debug, Clone)]
pub struct CqState<L> {
    labels: Vec<L>,
    probs: Vec<f64>,
    conditionals: Vec<DensityOperator>,
}

impl<L: Clone + PartialEq> CqState<L> {
    pub fn new(labels: Vec<L>, probs: Vec<f64>, conditionals: Vec<DensityOperator>) -> Result<Self> {
        if labels.is_empty() || labels.len() != probs.len() || labels.len() != conditionals.len() {
            return Err(Error::Malformed(format!(
                "{} labels, {} probabilities, {} conditionals",
                labels.len(),
                probs.len(),
                conditionals.len()
            )));
        }
        if let Some(&p) = probs.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(Error::Malformed(format!("probabilities sum to {total}")));
        }
        let dim = conditionals[0].dim();
        if let Some(c) = conditionals.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: c.dim() });
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[i + 1..].contains(a) {
                return Err(Error::Malformed(format!("duplicate label at position {i}")));
            }
        }
        Ok(CqState { labels, probs, conditionals })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.conditionals[0].dim()
    }

    pub fn labels(&self) -> &[L] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn conditionals(&self) -> &[DensityOperator] {
        &self.conditionals
    }

    pub fn conditional(&self, label: &L) -> Option<&DensityOperator> {
        self.labels.iter().position(|l| l == label).map(|i| &self.conditionals[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&L, f64, &DensityOperator)> {
        self.labels.iter().zip(self.probs.iter().copied()).zip(&self.conditionals).map(|((l, p), c)| (l, p, c))
    }

    /// Restricts to labels matching `keep`, renormalizing the probabilities.
    pub fn restrict(&self, keep: impl Fn(&L) -> bool) -> Result<Self> {
        let mut labels = Vec::new();
        let mut probs = Vec::new();
        let mut conditionals = Vec::new();
        for (l, p, c) in self.iter() {
            if keep(l) {
                labels.push(l.clone());
                probs.push(p);
                conditionals.push(c.clone());
            }
        }
        let total: f64 = probs.iter().sum();
        if labels.is_empty() || total <= 0.0 {
            return Err(Error::Malformed("restriction keeps no probability mass".into()));
        }
        probs.iter_mut().for_each(|p| *p /= total);
        CqState::new(labels, probs, conditionals)
    }
}

/// Label `(x, y)` of the locking ensemble: a bit and a string over `{1,2,3}^m`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LockingLabel {
    pub x: u8,
    pub y: PauliString,
}

/// Two classical registers `(X, Y)` and a quantum system.
pub type CcqState = CqState<LockingLabel>;

fn check_cap(m: usize, cap: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidConfig("m must be at least 1".into()));
    }
    if m > cap {
        return Err(Error::CapacityExceeded { qubits: m, cap });
    }
    Ok(())
}

fn labels_for(m: usize) -> Vec<LockingLabel> {
    let ys = PauliString::all_non_identity(m);
    (0..2u8).flat_map(|x| ys.iter().map(move |y| LockingLabel { x, y: y.clone() })).collect()
}

/// `2^{−m}(id + (−1)^x σ_y)`.
pub fn locking_conditional(x: u8, y: &PauliString) -> Result<Operator> {
    let sigma = pauli::pauli_string_matrix(y)?;
    let dim = sigma.nrows();
    let sign = if x == 0 { 1.0 } else { -1.0 };
    Ok((linalg::identity(dim) + sigma.scale(sign)).unscale(dim as f64))
}

/// The uniform ensemble over `{0,1} × {1,2,3}^m` with conditionals
/// `2^{−m}(id + (−1)^x σ_y)`. Labels are ordered `x` first, then `y`
/// lexicographically.
pub fn locking_state(m: usize) -> Result<CcqState> {
    locking_state_with_cap(m, DEFAULT_DENSE_CAP)
}

pub fn locking_state_with_cap(m: usize, cap: usize) -> Result<CcqState> {
    check_cap(m, cap)?;
    let labels = labels_for(m);
    let p = 1.0 / labels.len() as f64;
    let conditionals = labels
        .iter()
        .map(|l| locking_conditional(l.x, &l.y).and_then(DensityOperator::new))
        .collect::<Result<Vec<_>>>()?;
    CqState::new(labels.clone(), vec![p; labels.len()], conditionals)
}

/// Same ensemble built from uniformly random `r ∈ {0,1}^m` and per-qubit
/// eigenprojectors `[r_i]_{y_i}`, grouped by `x = ⊕ r_i`.
pub fn locking_state_alt(m: usize) -> Result<CcqState> {
    check_cap(m, DEFAULT_DENSE_CAP)?;
    let dim = 1usize << m;
    let labels = labels_for(m);
    let mut conditionals = Vec::with_capacity(labels.len());
    for label in &labels {
        let mut acc = Operator::zeros(dim, dim);
        for r in 0..dim {
            if (r.count_ones() % 2) as u8 != label.x {
                continue;
            }
            let mut product = Operator::identity(1, 1);
            for (q, &p) in label.y.indices().iter().enumerate() {
                let bit = (r >> (m - 1 - q)) & 1;
                product = linalg::kron(&product, &eigenprojector(p, bit as u8));
            }
            acc += product;
        }
        conditionals.push(DensityOperator::new(acc.unscale((dim / 2) as f64))?);
    }
    let p = 1.0 / labels.len() as f64;
    CqState::new(labels.clone(), vec![p; labels.len()], conditionals)
}

/// Projector onto the `(−1)^r` eigenspace of a single Pauli.
pub fn eigenprojector(p: pauli::PauliIndex, r: u8) -> Operator {
    let sign = if r == 0 { 1.0 } else { -1.0 };
    (linalg::identity(2) + pauli::single_pauli(p).scale(sign)).scale(0.5)
}

/// `Σ_v P(v) ρ_{E|v}`.
pub fn marginal_e<L>(s: &CqState<L>) -> DensityOperator {
    let dim = s.conditionals[0].dim();
    let mut acc = Operator::zeros(dim, dim);
    for (p, c) in s.probs.iter().zip(&s.conditionals) {
        acc += c.op().scale(*p);
    }
    DensityOperator(linalg::hermitian_part(&acc))
}

/// Moves `Y` into the quantum side: the conditional for `(x, y)` becomes
/// `|e_y⟩⟨e_y| ⊗ ρ_{E|x,y}` with the `y`-register ordered lexicographically
/// over `{1,2,3}^m`.
pub fn extend_with_y(s: &CcqState) -> Result<CqState<LockingLabel>> {
    let m = s.labels[0].y.len();
    let y_dim = 3usize.pow(m as u32);
    let combined = y_dim * s.dim();
    if combined > 1 << DEFAULT_DENSE_CAP {
        return Err(Error::CapacityExceeded { qubits: m, cap: DEFAULT_DENSE_CAP });
    }
    let mut conditionals = Vec::with_capacity(s.len());
    for (label, _, rho) in s.iter() {
        let rank = label.y.non_identity_rank()?;
        let reg = linalg::outer(&linalg::basis_vector(y_dim, rank));
        conditionals.push(DensityOperator::trusted(linalg::kron(&reg, rho.op())));
    }
    CqState::new(s.labels.clone(), s.probs.clone(), conditionals)
}

/// `Σ_i √λ_i |e_i⟩ ⊗ |i⟩` on `d²` dimensions, system factor first.
pub fn purify(rho: &DensityOperator) -> PureStateVector {
    let d = rho.dim();
    let (values, vectors) = linalg::eigh(rho.op());
    let mut psi = StateVector::zeros(d * d);
    for (i, &lambda) in values.iter().enumerate() {
        if lambda <= linalg::SPECTRAL_FLOOR {
            continue;
        }
        let w = lambda.sqrt();
        for a in 0..d {
            psi[a * d + i] += vectors[(a, i)] * Complex64::new(w, 0.0);
        }
    }
    let norm = psi.norm();
    PureStateVector { amplitudes: psi.unscale(norm) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, max_abs, outer};
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn label(x: u8, y: &[u8]) -> LockingLabel {
        LockingLabel { x, y: PauliString::from_values(y).unwrap() }
    }

    #[test]
    fn single_qubit_conditionals() {
        let s = locking_state(1).unwrap();
        assert_eq!(s.len(), 6);
        let zero = s.conditional(&label(0, &[3])).unwrap();
        let one = s.conditional(&label(1, &[3])).unwrap();
        assert!(max_abs(&(zero.op() - outer(&basis_vector(2, 0)))) < 1e-12);
        assert!(max_abs(&(one.op() - outer(&basis_vector(2, 1)))) < 1e-12);
        assert!(linalg::trace_of_product(zero.op(), one.op()).norm() < 1e-12);
    }

    #[test]
    fn conditionals_are_valid_and_orthogonal_per_y() {
        for m in 1..=3 {
            let s = locking_state(m).unwrap();
            assert_eq!(s.len(), 2 * 3usize.pow(m as u32));
            assert!(s.probs().iter().all(|&p| (p - 1.0 / s.len() as f64).abs() < 1e-15));
            for c in s.conditionals() {
                assert!(c.validate().passes());
            }
            for y in PauliString::all_non_identity(m) {
                let a = s.conditional(&LockingLabel { x: 0, y: y.clone() }).unwrap();
                let b = s.conditional(&LockingLabel { x: 1, y }).unwrap();
                assert!(linalg::trace_of_product(a.op(), b.op()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn marginal_is_maximally_mixed() {
        for m in 1..=3 {
            let rho = marginal_e(&locking_state(m).unwrap());
            let d = 1 << m;
            assert!(max_abs(&(rho.op() - linalg::identity(d).unscale(d as f64))) < 1e-10);
        }
    }

    #[test]
    fn label_entropy_is_one_plus_m_log3() {
        for m in 1..=3 {
            let s = locking_state(m).unwrap();
            let h: f64 = s.probs().iter().map(|p| -p * p.log2()).sum();
            assert!((h - (1.0 + m as f64 * 3f64.log2())).abs() < 1e-12);
        }
    }

    #[test]
    fn alt_construction_matches() {
        let s = locking_state_alt(1).unwrap();
        let c = s.conditional(&label(0, &[3])).unwrap();
        assert!(max_abs(&(c.op() - outer(&basis_vector(2, 0)))) < 1e-12);

        let s2 = locking_state_alt(2).unwrap();
        let c = s2.conditional(&label(0, &[3, 3])).unwrap();
        let expected = (outer(&basis_vector(4, 0)) + outer(&basis_vector(4, 3))).scale(0.5);
        assert!(max_abs(&(c.op() - expected)) < 1e-12);

        for m in 1..=3 {
            let a = locking_state(m).unwrap();
            let b = locking_state_alt(m).unwrap();
            assert_eq!(a.labels(), b.labels());
            for (ca, cb) in a.conditionals().iter().zip(b.conditionals()) {
                assert!(max_abs(&(ca.op() - cb.op())) < 1e-10);
            }
        }
    }

    #[test]
    fn locking_state_caps() {
        assert!(matches!(locking_state(0), Err(Error::InvalidConfig(_))));
        assert_eq!(locking_state_with_cap(3, 2).unwrap_err(), Error::CapacityExceeded { qubits: 3, cap: 2 });
    }

    #[test]
    fn marginal_of_single_label() {
        let rho = DensityOperator::pure(&basis_vector(2, 1)).unwrap();
        let s = CqState::new(vec![7u8], vec![1.0], vec![rho.clone()]).unwrap();
        assert_eq!(marginal_e(&s).op(), rho.op());
    }

    #[test]
    fn extend_with_y_single_qubit() {
        let ext = extend_with_y(&locking_state(1).unwrap()).unwrap();
        assert_eq!(ext.dim(), 6);
        for (i, a) in ext.iter().enumerate() {
            for b in ext.iter().skip(i + 1) {
                if a.0.y != b.0.y {
                    assert!(linalg::trace_of_product(a.2.op(), b.2.op()).norm() < 1e-12);
                }
            }
        }
        let avg = marginal_e(&ext);
        let e_part = linalg::partial_trace_first(avg.op(), 3, 2).unwrap();
        assert!(max_abs(&(e_part - linalg::identity(2).unscale(2.0))) < 1e-12);
    }

    #[test]
    fn extend_with_y_caps_combined_dimension() {
        assert!(extend_with_y(&locking_state(3).unwrap()).is_ok());
        assert!(matches!(extend_with_y(&locking_state(4).unwrap()), Err(Error::CapacityExceeded { .. })));
    }

    #[test]
    fn cq_state_rejects_bad_input() {
        let rho = DensityOperator::maximally_mixed(2);
        assert!(CqState::new(vec![0u8, 1], vec![0.5, 0.6], vec![rho.clone(), rho.clone()]).is_err());
        assert!(CqState::new(vec![0u8, 0], vec![0.5, 0.5], vec![rho.clone(), rho.clone()]).is_err());
        assert!(CqState::new(vec![0u8, 1], vec![1.5, -0.5], vec![rho.clone(), rho.clone()]).is_err());
        assert!(CqState::new(vec![0u8], vec![1.0], vec![]).is_err());
        let big = DensityOperator::maximally_mixed(4);
        assert!(CqState::new(vec![0u8, 1], vec![0.5, 0.5], vec![rho, big]).is_err());
    }

    #[test]
    fn validator_examples() {
        assert!(validate(&linalg::identity(2).unscale(2.0)).passes());
        let bad =
            Operator::from_diagonal(&DVector::from_vec(vec![Complex64::new(1.5, 0.0), Complex64::new(-0.5, 0.0)]));
        let r = validate(&bad);
        assert!(!r.passes());
        assert!((r.min_eigenvalue + 0.5).abs() < 1e-12);
        assert!(DensityOperator::new(bad).is_err());
    }

    #[test]
    fn purification_examples() {
        let zero = DensityOperator::pure(&basis_vector(2, 0)).unwrap();
        let psi = purify(&zero);
        assert_eq!(psi.dim(), 4);
        let back = linalg::partial_trace_second(psi.density().op(), 2, 2).unwrap();
        assert!(max_abs(&(back - zero.op())) < 1e-12);
        // |0⟩ ⊗ |aux⟩ up to phase: no weight on the |1⟩ system half
        assert!(psi.amplitudes()[2].norm() < 1e-12 && psi.amplitudes()[3].norm() < 1e-12);

        let mixed = DensityOperator::maximally_mixed(2);
        let psi = purify(&mixed);
        let back = linalg::partial_trace_second(psi.density().op(), 2, 2).unwrap();
        assert!(max_abs(&(back - mixed.op())) < 1e-12);
        // maximally entangled: the auxiliary marginal is also id/2
        let aux = linalg::partial_trace_first(psi.density().op(), 2, 2).unwrap();
        assert!(max_abs(&(aux - mixed.op())) < 1e-12);
    }

    #[test]
    fn purification_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in [2usize, 3, 4, 8, 16] {
            let rho = DensityOperator::new(linalg::random_density_matrix(d, &mut rng)).unwrap();
            let psi = purify(&rho);
            let back = linalg::partial_trace_second(psi.density().op(), d, d).unwrap();
            assert!(max_abs(&(back - rho.op())) < 1e-9, "d={d}");
        }
    }
}
