//! Trace distance, fidelity, the trace-distance security criterion, and
//! keys obtained by measuring near-Bell states.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::accinfo::{self, OptimizerConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, Operator, StateVector};
use crate::states::{self, CqState, DensityOperator};

fn same_dim(a: &DensityOperator, b: &DensityOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

/// `½ tr|ρ − τ|`.
pub fn trace_distance(rho: &DensityOperator, tau: &DensityOperator) -> Result<f64> {
    same_dim(rho, tau)?;
    Ok((0.5 * linalg::trace_norm(&(rho.op() - tau.op()))).clamp(0.0, 1.0))
}

/// Square-root fidelity `tr|√ρ √τ|`, the sum of singular values of
/// `√ρ √τ`.
pub fn fidelity(rho: &DensityOperator, tau: &DensityOperator) -> Result<f64> {
    same_dim(rho, tau)?;
    let product = linalg::psd_sqrt(rho.op()) * linalg::psd_sqrt(tau.op());
    let f: f64 = product.singular_values().iter().sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Both sides of `D(ρ, τ) ≤ √(1 − F(ρ, τ)²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FuchsVanDeGraafReport {
    pub trace_distance: f64,
    pub bound: f64,
}

impl FuchsVanDeGraafReport {
    pub fn holds(&self) -> bool {
        self.trace_distance <= self.bound + 1e-9
    }
}

pub fn fuchs_van_de_graaf_check(rho: &DensityOperator, tau: &DensityOperator) -> Result<FuchsVanDeGraafReport> {
    let f = fidelity(rho, tau)?;
    Ok(FuchsVanDeGraafReport { trace_distance: trace_distance(rho, tau)?, bound: (1.0 - f * f).max(0.0).sqrt() })
}

/// Distance of `ρ_SE` from `ρ_U ⊗ ρ_E` with `ρ_U` uniform over the labels.
/// Both operators are block diagonal in the label, so the trace norm is
/// the sum of blockwise trace norms `tr|P(v) ρ_{E|v} − ρ_E/|S||`.
pub fn epsilon_secure_distance<L: Clone + PartialEq>(s: &CqState<L>) -> f64 {
    let avg = states::marginal_e(s);
    let ideal = avg.op().unscale(s.len() as f64);
    let total: f64 = s.iter().map(|(_, p, rho)| linalg::trace_norm(&(rho.op().scale(p) - &ideal))).sum();
    (0.5 * total).clamp(0.0, 1.0)
}

/// `|Φ⁺⟩^{⊗n}` with the `n` qubits of `A` first and the `n` qubits of `B`
/// second: `2^{−n/2} Σ_s |s⟩_A |s⟩_B`.
pub fn bell_vector(n: usize) -> StateVector {
    let a = 1usize << n;
    let mut v = StateVector::zeros(a * a);
    let amp = Complex64::new((a as f64).sqrt().recip(), 0.0);
    for s in 0..a {
        v[s * a + s] = amp;
    }
    v
}

pub fn bell_state(n: usize) -> DensityOperator {
    DensityOperator::trusted(linalg::outer(&bell_vector(n)))
}

/// `(1 − p)|Φ⁺⟩⟨Φ⁺|^{⊗n} + p |0…0⟩⟨0…0|_A ⊗ |0…01⟩⟨0…01|_B`: a single
/// bit-flip error on the last qubit of `B`.
pub fn bell_with_flip_noise(n: usize, p: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    let a = 1usize << n;
    let flipped = linalg::outer(&linalg::basis_vector(a * a, 1));
    DensityOperator::new(bell_state(n).op().scale(1.0 - p) + flipped.scale(p))
}

/// A random state near `|Φ⁺⟩^{⊗n}`: either a mixture with a random mixed
/// state of weight up to `strength`, or a pure state displaced by a
/// Gaussian vector of norm scale `strength`.
pub fn random_bell_perturbation<R: Rng + ?Sized>(n: usize, strength: f64, rng: &mut R) -> DensityOperator {
    let dim = 1usize << (2 * n);
    if rng.random_bool(0.5) {
        let p = strength * rng.random::<f64>();
        let noise = linalg::random_density_matrix(dim, rng);
        DensityOperator::trusted(linalg::hermitian_part(&(bell_state(n).op().scale(1.0 - p) + noise.scale(p))))
    } else {
        let kick = StateVector::from_fn(dim, |_, _| linalg::random_complex_gaussian(rng));
        let kick = kick.unscale(kick.norm()) * Complex64::new(strength * rng.random::<f64>(), 0.0);
        let v = bell_vector(n) + kick;
        let v = v.unscale(v.norm());
        DensityOperator::trusted(linalg::outer(&v))
    }
}

/// Outcome of measuring both halves of a near-Bell state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellExperimentResult {
    pub n: usize,
    pub fidelity: f64,
    /// `√(1 − F²)`.
    pub epsilon_bound: f64,
    /// `‖ρ_{S_A S_B E} − ρ_UU ⊗ σ_E‖` with `σ_E` the measured state's
    /// `E` marginal.
    pub measured_key_distance: f64,
}

impl BellExperimentResult {
    pub fn passes(&self) -> bool {
        self.measured_key_distance <= self.epsilon_bound + 1e-9
    }
}

/// Purifies `ρ_AB` into `E`, measures `A` and `B` in the computational
/// basis, and compares the resulting key-and-adversary state with perfectly
/// correlated uniform keys independent of `E`.
pub fn bell_key_experiment(n: usize, rho_ab: &DensityOperator) -> Result<BellExperimentResult> {
    if !(1..=2).contains(&n) {
        return Err(Error::InvalidConfig(format!("n = {n} must be 1 or 2")));
    }
    let a_dim = 1usize << n;
    let ab_dim = a_dim * a_dim;
    if rho_ab.dim() != ab_dim {
        return Err(Error::DimensionMismatch { expected: ab_dim, found: rho_ab.dim() });
    }
    let f = fidelity(rho_ab, &bell_state(n))?;
    let theta = states::purify(rho_ab);
    let amps = theta.amplitudes();
    let e_dim = ab_dim;

    let blocks: Vec<Operator> = (0..ab_dim)
        .map(|ab| {
            let u = StateVector::from_fn(e_dim, |e, _| amps[ab * e_dim + e]);
            linalg::outer(&u)
        })
        .collect();
    let sigma_e = blocks.iter().fold(Operator::zeros(e_dim, e_dim), |acc, b| acc + b);
    let ideal = sigma_e.unscale(a_dim as f64);

    let mut total = 0.0;
    for (ab, block) in blocks.iter().enumerate() {
        let (sa, sb) = (ab / a_dim, ab % a_dim);
        total += if sa == sb { linalg::trace_norm(&(block - &ideal)) } else { linalg::trace(block).re };
    }
    Ok(BellExperimentResult {
        n,
        fidelity: f,
        epsilon_bound: (1.0 - f * f).max(0.0).sqrt(),
        measured_key_distance: 0.5 * total,
    })
}

/// Accessible-information view versus trace-distance view of the locking
/// key on `m` qubits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecurityReport {
    pub m: usize,
    pub key_entropy_bits: f64,
    pub iacc_upper: f64,
    /// `None` in bound-only mode.
    pub iacc_best_found: Option<f64>,
    pub epsilon_distance: f64,
    pub verdict_text: String,
}

/// Builds the report. The search leg runs for `m ≤ 2`; with `bound_only`
/// the search is skipped and `m ≤ 3` is accepted.
pub fn security_report(m: usize, cfg: &OptimizerConfig, bound_only: bool) -> Result<SecurityReport> {
    let limit = if bound_only { 3 } else { 2 };
    if m == 0 || m > limit {
        return Err(Error::InvalidConfig(format!(
            "m = {m} outside 1..={limit} for {} mode",
            if bound_only { "bound-only" } else { "search" }
        )));
    }
    let s = states::locking_state(m)?;
    let iacc_upper = accinfo::locking_upper_bound(m);
    let iacc_best_found = if bound_only { None } else { Some(accinfo::optimize_locking(m, cfg)?.best_value) };
    let epsilon_distance = epsilon_secure_distance(&s);
    let verdict_text = format!(
        "accessible information at most {iacc_upper:.6} bits: the accessible-information criterion passes; \
         trace distance to an ideal key is {epsilon_distance:.6}: not epsilon-secure for any epsilon < 1/2"
    );
    Ok(SecurityReport {
        m,
        key_entropy_bits: accinfo::key_entropy_bits(m),
        iacc_upper,
        iacc_best_found,
        epsilon_distance,
        verdict_text,
    })
}
