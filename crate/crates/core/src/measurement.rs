//! POVMs, outcome statistics and the measurements used on the locking
//! ensemble.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, Operator};
use crate::pauli::{self, PauliIndex, PauliString, EIGEN_TOL};
use crate::states::{self, CcqState, CqState, DensityOperator, LockingLabel};

/// Completeness and positivity tolerance for POVMs.
pub const POVM_TOL: f64 = 1e-9;

/// Positive operators summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<Operator>,
}

impl Povm {
    pub fn new(elements: Vec<Operator>) -> Result<Self> {
        let povm = Povm { elements };
        povm.check()?;
        Ok(povm)
    }

    pub(crate) fn trusted(elements: Vec<Operator>) -> Self {
        Povm { elements }
    }

    fn check(&self) -> Result<()> {
        let Some(first) = self.elements.first() else {
            return Err(Error::InvalidPovm("no elements".into()));
        };
        let dim = first.nrows();
        let mut sum = Operator::zeros(dim, dim);
        for (k, e) in self.elements.iter().enumerate() {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: e.nrows() });
            }
            let herm = linalg::hermiticity_deviation(e);
            if herm > POVM_TOL {
                return Err(Error::InvalidPovm(format!("element {k} not Hermitian ({herm:.3e})")));
            }
            let min = linalg::eigenvalues(e)[0];
            if min < -POVM_TOL {
                return Err(Error::InvalidPovm(format!("element {k} has eigenvalue {min:.3e}")));
            }
            sum += e;
        }
        let dev = linalg::max_abs(&(sum - linalg::identity(dim)));
        if dev > POVM_TOL {
            return Err(Error::InvalidPovm(format!("elements sum to identity only within {dev:.3e}")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    /// Projective measurement in the computational basis.
    pub fn computational_basis(dim: usize) -> Self {
        Povm { elements: (0..dim).map(|i| linalg::outer(&linalg::basis_vector(dim, i))).collect() }
    }
}

/// Probabilities indexed by measurement outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    pub probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if let Some(&p) = probs.iter().find(|p| !(**p >= -1e-12)) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        let probs: Vec<f64> = probs.into_iter().map(|p| p.max(0.0)).collect();
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > POVM_TOL {
            return Err(Error::Malformed(format!("distribution sums to {total}")));
        }
        Ok(OutcomeDistribution { probs })
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.probs)
    }
}

/// Joint distribution `P(v, z)`; rows are labels, columns outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    pub probs: Vec<Vec<f64>>,
}

impl JointDistribution {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        let cols = probs.first().map(|r| r.len()).unwrap_or(0);
        if cols == 0 || probs.iter().any(|r| r.len() != cols) {
            return Err(Error::Malformed("joint distribution must be a non-empty rectangle".into()));
        }
        if let Some(&p) = probs.iter().flatten().find(|p| !(**p >= 0.0)) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        let total: f64 = probs.iter().flatten().sum();
        if (total - 1.0).abs() > POVM_TOL {
            return Err(Error::Malformed(format!("joint distribution sums to {total}")));
        }
        Ok(JointDistribution { probs })
    }

    pub fn label_marginal(&self) -> Vec<f64> {
        self.probs.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn outcome_marginal(&self) -> Vec<f64> {
        let cols = self.probs[0].len();
        (0..cols).map(|z| self.probs.iter().map(|r| r[z]).sum()).collect()
    }

    /// `H(V | Z)` in bits.
    pub fn conditional_label_entropy(&self) -> f64 {
        let joint: Vec<f64> = self.probs.iter().flatten().copied().collect();
        (entropy_bits(&joint) - entropy_bits(&self.outcome_marginal())).max(0.0)
    }

    /// Probability that the maximum-likelihood guess of the label from the
    /// outcome is correct.
    pub fn guessing_probability(&self) -> f64 {
        let cols = self.probs[0].len();
        (0..cols).map(|z| self.probs.iter().map(|r| r[z]).fold(0.0, f64::max)).sum()
    }
}

/// `−Σ p log₂ p` with `0 log 0 = 0`.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

pub fn shannon_entropy(d: &OutcomeDistribution) -> f64 {
    entropy_bits(&d.probs)
}

pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(entropy_bits(&[p, 1.0 - p]))
}

/// `H(V) + H(Z) − H(V,Z)`, small negative rounding clipped to zero.
pub fn mutual_information(j: &JointDistribution) -> f64 {
    let joint: Vec<f64> = j.probs.iter().flatten().copied().collect();
    let mi = entropy_bits(&j.label_marginal()) + entropy_bits(&j.outcome_marginal()) - entropy_bits(&joint);
    mi.max(0.0)
}

fn check_dims(p: &Povm, dim: usize) -> Result<()> {
    if p.dim() != dim {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: dim });
    }
    Ok(())
}

pub fn apply_povm(p: &Povm, sigma: &DensityOperator) -> Result<OutcomeDistribution> {
    check_dims(p, sigma.dim())?;
    let probs = p.elements.iter().map(|e| linalg::trace_of_product(e, sigma.op()).re.max(0.0)).collect();
    OutcomeDistribution::new(probs)
}

/// `P(v, z) = P(v) tr(M_z ρ_{E|v})`.
pub fn measure_cq<L>(p: &Povm, s: &CqState<L>) -> Result<JointDistribution>
where
    L: Clone + PartialEq,
{
    check_dims(p, s.dim())?;
    let probs = s
        .iter()
        .map(|(_, pv, rho)| {
            p.elements.iter().map(|e| (pv * linalg::trace_of_product(e, rho.op()).re).max(0.0)).collect()
        })
        .collect();
    JointDistribution::new(probs)
}

fn check_locking_string(y: &PauliString) -> Result<()> {
    if !y.is_non_identity_alphabet() {
        return Err(Error::InvalidAlphabet(format!("{y} is not a string over {{1,2,3}}")));
    }
    Ok(())
}

/// Projectors onto the `+1` and `−1` eigenspaces of `σ_y`. Outcome 0 is
/// the `+1` eigenspace, matching `x = 0`.
pub fn conditional_x_povm(y: &PauliString) -> Result<Povm> {
    check_locking_string(y)?;
    let sigma = pauli::pauli_string_matrix(y)?;
    let id = linalg::identity(sigma.nrows());
    Ok(Povm::trusted(vec![(&id + &sigma).scale(0.5), (&id - &sigma).scale(0.5)]))
}

/// Elements `d · P(v) · ρ_{E|v}`; a POVM exactly when the average state is
/// maximally mixed.
pub fn pretty_good_povm<L>(s: &CqState<L>) -> Result<Povm>
where
    L: Clone + PartialEq,
{
    let d = s.dim();
    let avg = states::marginal_e(s);
    let deviation = linalg::max_abs(&(avg.op() - linalg::identity(d).unscale(d as f64)));
    if deviation > POVM_TOL {
        return Err(Error::NotMaximallyMixed { deviation });
    }
    let elements = s.iter().map(|(_, p, rho)| rho.op().scale(d as f64 * p)).collect();
    Povm::new(elements)
}

/// The binary measurement `{d · P_{X|Y=y}(x) · ρ_{E|x,y}}_x` for a single
/// `y`, i.e. `(id ± σ_y)/2`.
pub fn binary_povm_ny(m: usize, y: &PauliString) -> Result<Povm> {
    check_locking_string(y)?;
    if y.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: y.len() });
    }
    let d = (1usize << m) as f64;
    let elements = (0..2u8)
        .map(|x| states::locking_conditional(x, y).map(|rho| rho.scale(d * 0.5)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Povm::trusted(elements))
}

/// `|p₀ − p₁|` for a two-outcome distribution.
pub fn outcome_gap(d: &OutcomeDistribution) -> f64 {
    (d.probs[0] - d.probs[1]).abs()
}

/// Reads the `y`-register then measures `σ_y`'s eigenspaces: one outcome
/// per label `(x, y)` on the `3^m · 2^m` dimensional extended system.
pub fn perfect_joint_povm(m: usize) -> Result<Povm> {
    let ys = PauliString::all_non_identity(m);
    let y_dim = ys.len();
    let mut elements = Vec::with_capacity(2 * y_dim);
    for x in 0..2 {
        for (rank, y) in ys.iter().enumerate() {
            let reg = linalg::outer(&linalg::basis_vector(y_dim, rank));
            let proj = conditional_x_povm(y)?.elements[x].clone();
            elements.push(linalg::kron(&reg, &proj));
        }
    }
    Ok(Povm::trusted(elements))
}

/// Measurement of [`perfect_joint_povm`] on a state produced by
/// [`states::extend_with_y`]. Outcome order matches the label order of
/// [`states::locking_state`].
pub fn perfect_joint_measurement(s_ext: &CqState<LockingLabel>) -> Result<JointDistribution> {
    let m = s_ext.labels()[0].y.len();
    let expected = 3usize.pow(m as u32) << m;
    if s_ext.dim() != expected || s_ext.labels().iter().any(|l| l.y.len() != m) {
        return Err(Error::Malformed(format!(
            "expected an extended locking state of dimension {expected}, found {}",
            s_ext.dim()
        )));
    }
    measure_cq(&perfect_joint_povm(m)?, s_ext)
}

/// Samples `r` uniformly among bit strings of parity `x`: the outcome of
/// measuring `ρ_{E|x,y}` qubit by qubit in the eigenbases of `σ_{y_i}`.
pub fn sample_locking_outcome<R: Rng + ?Sized>(m: usize, x: u8, y: &PauliString, rng: &mut R) -> Result<Vec<u8>> {
    check_locking_string(y)?;
    if y.len() != m || m == 0 {
        return Err(Error::DimensionMismatch { expected: m, found: y.len() });
    }
    if x > 1 {
        return Err(Error::InvalidAlphabet(format!("x = {x} is not a bit")));
    }
    let mut r: Vec<u8> = (0..m - 1).map(|_| rng.random_range(0..2u8)).collect();
    let parity = r.iter().fold(0u8, |a, b| a ^ b);
    r.push(parity ^ x);
    Ok(r)
}

/// Measures each qubit of `ρ_{E|x,y}` in the eigenbasis of `σ_{basis_i}`.
/// Qubits whose basis matches `y_i` return the state's bit; mismatched
/// Pauli bases are mutually unbiased, so those return a fair coin.
pub fn measure_locking_in_basis<R: Rng + ?Sized>(
    x: u8,
    y: &PauliString,
    basis: &PauliString,
    rng: &mut R,
) -> Result<Vec<u8>> {
    check_locking_string(basis)?;
    let r = sample_locking_outcome(y.len(), x, y, rng)?;
    if basis.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), found: basis.len() });
    }
    Ok(r.into_iter()
        .zip(y.indices().iter().zip(basis.indices()))
        .map(|(bit, (a, b))| if a == b { bit } else { rng.random_range(0..2u8) })
        .collect())
}

/// Dense version of the per-qubit product measurement in `basis`: one
/// element per outcome string `r`, index `r` read most-significant first.
pub fn product_basis_povm(basis: &PauliString) -> Result<Povm> {
    check_locking_string(basis)?;
    let m = basis.len();
    if m > pauli::DEFAULT_DENSE_CAP {
        return Err(Error::CapacityExceeded { qubits: m, cap: pauli::DEFAULT_DENSE_CAP });
    }
    let elements = (0..1usize << m)
        .map(|r| {
            basis.indices().iter().enumerate().fold(Operator::identity(1, 1), |acc, (q, &p)| {
                let bit = ((r >> (m - 1 - q)) & 1) as u8;
                linalg::kron(&acc, &states::eigenprojector(p, bit))
            })
        })
        .collect();
    Ok(Povm::trusted(elements))
}

/// Splits every element into rank-one pieces `√λ|e⟩`; the returned vectors
/// `v` satisfy `Σ v v† = Σ M = id`. Refining outcomes never lowers
/// measured information.
pub fn rank_one_vectors(p: &Povm) -> Vec<linalg::StateVector> {
    let mut out = Vec::new();
    for e in &p.elements {
        let (values, vectors) = linalg::eigh(e);
        for (k, &lambda) in values.iter().enumerate() {
            if lambda > EIGEN_TOL {
                out.push(vectors.column(k).into_owned() * Complex64::new(lambda.sqrt(), 0.0));
            }
        }
    }
    out
}

/// Single-qubit computational-basis projectors, as an [`PauliIndex::Z`]
/// product measurement on `m` qubits.
pub fn fixed_z_basis(m: usize) -> PauliString {
    PauliString::new(vec![PauliIndex::Z; m.max(1)]).expect("non-empty")
}

/// Convenience: locking state restricted to a single `y`.
pub fn restrict_to_y(s: &CcqState, y: &PauliString) -> Result<CcqState> {
    s.restrict(|l| &l.y == y)
}
