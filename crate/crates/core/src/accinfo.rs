//! Accessible information: measured information for a fixed POVM, a
//! random-restart search over rank-one POVMs that serves as a lower-bound
//! oracle, the analytic locking bound with its proof chain, and the
//! locking gap.
//!
//! Values returned by the search are best-found lower bounds on the
//! accessible information. Only [`locking_upper_bound`] is a bound.

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Operator, StateVector};
use crate::measurement::{self, entropy_bits, Povm};
use crate::pauli::{self, PauliString};
use crate::states::{self, CqState, DensityOperator};

/// Largest system dimension the POVM search accepts.
pub const MAX_SEARCH_DIM: usize = 64;

/// Search envelope for the random-restart optimizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Outcome-count range for random POVMs; `None` means `d` and `d²`.
    pub outcomes_min: Option<usize>,
    pub outcomes_max: Option<usize>,
    /// Maximum number of perturbation sweeps per restart.
    pub max_iters: usize,
    pub step_tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 200,
            outcomes_min: None,
            outcomes_max: None,
            max_iters: 300,
            step_tolerance: 1e-4,
            seed: 42,
        }
    }
}

impl OptimizerConfig {
    fn outcome_range(&self, d: usize) -> Result<(usize, usize)> {
        let lo = self.outcomes_min.unwrap_or(d);
        let hi = self.outcomes_max.unwrap_or(d * d);
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if lo < 2 || hi < lo || hi > d * d {
            return Err(Error::InvalidConfig(format!("outcome range [{lo}, {hi}] invalid for d = {d}")));
        }
        if !(self.step_tolerance > 0.0) {
            return Err(Error::InvalidConfig("step tolerance must be positive".into()));
        }
        Ok((lo, hi))
    }
}

/// Result of [`optimize_accessible_info`].
#[derive(Debug, Clone)]
pub struct AccInfoEstimate {
    /// Best-found lower bound on the accessible information, in bits.
    pub best_value: f64,
    pub best_povm: Povm,
    pub upper_bound: Option<f64>,
    pub restarts_used: usize,
}

/// `I(V;Z)` for the outcome `Z` of `p` on the quantum part of `s`.
pub fn measured_info<L: Clone + PartialEq>(s: &CqState<L>, p: &Povm) -> Result<f64> {
    Ok(measurement::mutual_information(&measurement::measure_cq(p, s)?))
}

/// Measured information of the rank-one POVM `{w_i w_i†}` with
/// `W = L⁻¹ V`, `V V† = L L†`. Columns of `V` are free parameters.
struct InfoObjective {
    weighted: Vec<Operator>,
    label_entropy: f64,
}

impl InfoObjective {
    fn new<L: Clone + PartialEq>(s: &CqState<L>) -> Self {
        InfoObjective {
            weighted: s.iter().map(|(_, p, rho)| rho.op().scale(p)).collect(),
            label_entropy: entropy_bits(s.probs()),
        }
    }

    fn normalized(&self, v: &DMatrix<Complex64>) -> Option<DMatrix<Complex64>> {
        let gram = v * v.adjoint();
        let chol = Cholesky::new(gram)?;
        chol.l_dirty().solve_lower_triangular(v)
    }

    fn value(&self, v: &DMatrix<Complex64>) -> Option<f64> {
        let w = self.normalized(v)?;
        let k = w.ncols();
        let mut outcome = vec![0.0; k];
        let mut joint_entropy = 0.0;
        for rho in &self.weighted {
            let rw = rho * &w;
            for (i, total) in outcome.iter_mut().enumerate() {
                let p = w.column(i).dotc(&rw.column(i)).re.max(0.0);
                *total += p;
                if p > 0.0 {
                    joint_entropy -= p * p.log2();
                }
            }
        }
        let mi = self.label_entropy + entropy_bits(&outcome) - joint_entropy;
        mi.is_finite().then_some(mi.max(0.0))
    }

    fn povm(&self, v: &DMatrix<Complex64>) -> Option<Povm> {
        let w = self.normalized(v)?;
        let elements = (0..w.ncols()).map(|i| {
            let c = w.column(i).into_owned();
            linalg::outer(&c)
        });
        Some(Povm::trusted(elements.collect()))
    }
}

/// Coordinate-block pattern search: each column is nudged along a random
/// complex direction, improvements are kept, the step halves after a sweep
/// without progress.
fn refine<R: Rng>(
    start: DMatrix<Complex64>,
    mut score: impl FnMut(&DMatrix<Complex64>) -> Option<f64>,
    cfg: &OptimizerConfig,
    rng: &mut R,
) -> (DMatrix<Complex64>, f64) {
    let mut current = start;
    let mut best = score(&current).unwrap_or(f64::NEG_INFINITY);
    let mut step = 0.5;
    let (rows, cols) = current.shape();
    for _ in 0..cfg.max_iters {
        if step < cfg.step_tolerance {
            break;
        }
        let mut improved = false;
        for col in 0..cols {
            let scale = current.column(col).norm().max(1e-3) * step;
            let dir = StateVector::from_fn(rows, |_, _| linalg::random_complex_gaussian(rng));
            let dir = dir.unscale(dir.norm()) * Complex64::new(scale, 0.0);
            for sign in [1.0, -1.0] {
                let mut trial = current.clone();
                let mut c = trial.column_mut(col);
                c += &dir * Complex64::new(sign, 0.0);
                if let Some(v) = score(&trial) {
                    if v > best + 1e-15 {
                        best = v;
                        current = trial;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (current, best)
}

fn vectors_to_matrix(vs: &[StateVector]) -> DMatrix<Complex64> {
    DMatrix::from_columns(vs)
}

fn random_vectors<R: Rng>(dim: usize, k: usize, rng: &mut R) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, k, |_, _| linalg::random_complex_gaussian(rng))
}

/// Default warm starts: the computational basis, plus the pretty-good
/// measurement when the average state is maximally mixed.
pub fn default_seeds<L: Clone + PartialEq>(s: &CqState<L>) -> Vec<Povm> {
    let mut seeds = vec![Povm::computational_basis(s.dim())];
    if let Ok(n) = measurement::pretty_good_povm(s) {
        seeds.push(n);
    }
    seeds
}

/// Warm starts for the locking ensemble on `m` qubits: every
/// `conditional_x_povm(y)` and every product eigenbasis measurement.
pub fn locking_seeds(m: usize) -> Result<Vec<Povm>> {
    let mut seeds = Vec::new();
    for y in PauliString::all_non_identity(m) {
        seeds.push(measurement::conditional_x_povm(&y)?);
        seeds.push(measurement::product_basis_povm(&y)?);
    }
    Ok(seeds)
}

/// Random-restart search for the accessible information, with the
/// [`default_seeds`] injected as warm starts.
pub fn optimize_accessible_info<L>(s: &CqState<L>, cfg: &OptimizerConfig) -> Result<AccInfoEstimate>
where
    L: Clone + PartialEq + Sync,
{
    optimize_accessible_info_seeded(s, cfg, &[])
}

/// As [`optimize_accessible_info`], additionally warm-starting from every
/// POVM in `seeds`. The result dominates every seed's measured information.
///
/// Random restart `i` draws from `ChaCha8Rng::seed_from_u64(cfg.seed + i)`;
/// seeded restarts follow with consecutive seeds. The merge picks the
/// largest value with ties going to the lowest restart index, so the result
/// does not depend on the thread count.
pub fn optimize_accessible_info_seeded<L>(
    s: &CqState<L>,
    cfg: &OptimizerConfig,
    seeds: &[Povm],
) -> Result<AccInfoEstimate>
where
    L: Clone + PartialEq + Sync,
{
    let d = s.dim();
    if d > MAX_SEARCH_DIM {
        return Err(Error::CapacityExceeded { qubits: d.trailing_zeros() as usize, cap: 6 });
    }
    let (k_lo, k_hi) = cfg.outcome_range(d)?;
    let mut all_seeds = default_seeds(s);
    all_seeds.extend_from_slice(seeds);
    for p in &all_seeds {
        if p.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: p.dim() });
        }
    }
    let objective = InfoObjective::new(s);

    let random_runs: Vec<(f64, Povm)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
            let k = rng.random_range(k_lo..=k_hi);
            let start = random_vectors(d, k, &mut rng);
            let (v, value) = refine(start, |v| objective.value(v), cfg, &mut rng);
            (value, objective.povm(&v).expect("refined point has a finite score"))
        })
        .collect();

    let seeded_runs: Vec<(f64, Povm)> = all_seeds
        .par_iter()
        .enumerate()
        .map(|(j, p)| {
            let raw = measured_info(s, p).unwrap_or(0.0);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add((cfg.restarts + j) as u64));
            let start = vectors_to_matrix(&measurement::rank_one_vectors(p));
            let (v, value) = refine(start, |v| objective.value(v), cfg, &mut rng);
            match objective.povm(&v) {
                Some(refined) if value >= raw => (value, refined),
                _ => (raw, p.clone()),
            }
        })
        .collect();

    let restarts_used = random_runs.len() + seeded_runs.len();
    let (best_value, best_povm) = random_runs
        .into_iter()
        .chain(seeded_runs)
        .reduce(|best, next| if next.0 > best.0 { next } else { best })
        .expect("at least one restart");

    Ok(AccInfoEstimate { best_value, best_povm, upper_bound: None, restarts_used })
}

/// Search on the locking ensemble with all locking warm starts, reporting
/// the analytic bound alongside.
pub fn optimize_locking(m: usize, cfg: &OptimizerConfig) -> Result<AccInfoEstimate> {
    let s = states::locking_state(m)?;
    let mut est = optimize_accessible_info_seeded(&s, cfg, &locking_seeds(m)?)?;
    est.upper_bound = Some(locking_upper_bound(m));
    Ok(est)
}

/// `(2/3)^{m/2}`.
pub fn locking_upper_bound(m: usize) -> f64 {
    (2.0f64 / 3.0).powf(m as f64 / 2.0)
}

/// `H(N[σ])` for a pure `σ = ψψ†/‖ψ‖²` and `N` the pretty-good measurement.
struct OutputEntropyObjective {
    elements: Vec<Operator>,
}

impl OutputEntropyObjective {
    fn entropy(&self, psi: &DMatrix<Complex64>) -> Option<f64> {
        let norm2 = psi.norm_squared();
        if !(norm2 > 1e-300) {
            return None;
        }
        let probs: Vec<f64> =
            self.elements.iter().map(|e| ((psi.adjoint() * e * psi)[(0, 0)].re / norm2).max(0.0)).collect();
        Some(entropy_bits(&probs))
    }
}

/// Minimum over pure states of the outcome entropy of the pretty-good
/// measurement. Pure states suffice because the outcome distribution is
/// linear in the state and entropy is concave.
pub fn min_output_entropy<L>(s: &CqState<L>, cfg: &OptimizerConfig) -> Result<f64>
where
    L: Clone + PartialEq + Sync,
{
    let d = s.dim();
    if d > MAX_SEARCH_DIM {
        return Err(Error::CapacityExceeded { qubits: d.trailing_zeros() as usize, cap: 6 });
    }
    if cfg.restarts == 0 {
        return Err(Error::InvalidConfig("restarts must be at least 1".into()));
    }
    let n = measurement::pretty_good_povm(s)?;
    let objective = OutputEntropyObjective { elements: n.elements().to_vec() };

    let mut starts: Vec<StateVector> = (0..d).map(|i| linalg::basis_vector(d, i)).collect();
    for (_, _, rho) in s.iter() {
        let (_, vectors) = linalg::eigh(rho.op());
        starts.push(vectors.column(d - 1).into_owned());
    }

    let run = |index: usize, start: Option<&StateVector>| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(index as u64));
        let psi = match start {
            Some(v) => DMatrix::from_column_slice(d, 1, v.as_slice()),
            None => random_vectors(d, 1, &mut rng),
        };
        let (_, neg) = refine(psi, |v| objective.entropy(v).map(|h| -h), cfg, &mut rng);
        -neg
    };

    let random_best = (0..cfg.restarts).into_par_iter().map(|i| run(i, None)).reduce(|| f64::INFINITY, f64::min);
    let seeded_best =
        starts.par_iter().enumerate().map(|(j, v)| run(cfg.restarts + j, Some(v))).reduce(|| f64::INFINITY, f64::min);
    Ok(random_best.min(seeded_best))
}

/// Slack of each step in the entropy argument behind the locking bound, for
/// one state `σ`. Every slack is non-negative when the step holds.
#[derive(Debug, Clone, Serialize)]
pub struct ProofChainReport {
    pub m: usize,
    /// `|H(N[σ]) − H(Y) − E_y H(N_y[σ])|`.
    pub decomposition_error: f64,
    /// `E_y H(N_y[σ]) − (1 − mean_y |tr(σ_y σ)|)`.
    pub binary_entropy_slack: f64,
    /// `√(Σ_y tr(σ_y σ)²)/√|Y| − mean_y |tr(σ_y σ)|`.
    pub cauchy_schwarz_slack: f64,
    /// `(2/3)^{m/2} − mean_y |tr(σ_y σ)|`.
    pub bound_slack: f64,
    /// `2^m − Σ_{y ∈ {0..3}^m} tr(σ_y σ)²`.
    pub purity_slack: f64,
}

impl ProofChainReport {
    pub fn passes(&self) -> bool {
        self.decomposition_error <= 1e-9
            && self.binary_entropy_slack >= -1e-12
            && self.cauchy_schwarz_slack >= -1e-12
            && self.bound_slack >= -1e-12
            && self.purity_slack >= -1e-10
    }
}

pub fn proof_chain_check(m: usize, sigma: &DensityOperator) -> Result<ProofChainReport> {
    let s = states::locking_state(m)?;
    if sigma.dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: sigma.dim() });
    }
    let ys = PauliString::all_non_identity(m);
    let y_count = ys.len() as f64;

    let full = measurement::apply_povm(&measurement::pretty_good_povm(&s)?, sigma)?.entropy();

    let mut mean_binary = 0.0;
    let mut mean_abs = 0.0;
    let mut sum_sq = 0.0;
    for y in &ys {
        let ny = measurement::apply_povm(&measurement::binary_povm_ny(m, y)?, sigma)?;
        mean_binary += ny.entropy() / y_count;
        let c = linalg::trace_of_product(&pauli::pauli_string_matrix(y)?, sigma.op()).re;
        mean_abs += c.abs() / y_count;
        sum_sq += c * c;
    }
    let y_entropy = entropy_bits(&vec![1.0 / y_count; ys.len()]);
    let all_sq = pauli::bloch_decompose(sigma.op())?.sum_of_squares();

    Ok(ProofChainReport {
        m,
        decomposition_error: (full - y_entropy - mean_binary).abs(),
        binary_entropy_slack: mean_binary - (1.0 - mean_abs),
        cauchy_schwarz_slack: sum_sq.sqrt() / y_count.sqrt() - mean_abs,
        bound_slack: locking_upper_bound(m) - mean_abs,
        purity_slack: (1usize << m) as f64 - all_sq,
    })
}

/// How much revealing `Y` raises the accessible information of the locking
/// ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LockingGapReport {
    pub m: usize,
    /// `I_acc(XY; EY) = H(XY) = 1 + m log₂3`.
    pub i_with_y: f64,
    /// Analytic upper bound on `I_acc(XY; E)`.
    pub i_without_y_upper: f64,
    /// `i_with_y − i_without_y_upper`, a lower bound on the gap.
    pub delta_lower: f64,
    /// Best-found value of `I_acc(XY; E)` when a search was run.
    pub i_without_y_best_found: Option<f64>,
}

pub fn key_entropy_bits(m: usize) -> f64 {
    1.0 + m as f64 * 3f64.log2()
}

pub fn locking_gap(m: usize, best_found: Option<f64>) -> Result<LockingGapReport> {
    if m == 0 {
        return Err(Error::InvalidConfig("m must be at least 1".into()));
    }
    let i_with_y = key_entropy_bits(m);
    let upper = locking_upper_bound(m);
    Ok(LockingGapReport {
        m,
        i_with_y,
        i_without_y_upper: upper,
        delta_lower: i_with_y - upper,
        i_without_y_best_found: best_found,
    })
}

/// `e^{−(n−2)/8}`.
pub fn epsilon_of_n(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("key length {n} must be at least 2")));
    }
    Ok((-((n - 2) as f64) / 8.0).exp())
}

/// Key length `⌊m log₂3⌋ + 1` matching an `m`-qubit locking key.
pub fn key_length_for(m: usize) -> usize {
    (m as f64 * 3f64.log2()).floor() as usize + 1
}

/// `((2/3)^{m/2}, e^{−(n−2)/8})` for `n = key_length_for(m)`.
pub fn epsilon_consistency(m: usize) -> Result<(f64, f64)> {
    Ok((locking_upper_bound(m), epsilon_of_n(key_length_for(m))?))
}
