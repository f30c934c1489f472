//! Experiment drivers. Each returns its table and whether every numerical
//! check it performs held.

use locklab::accinfo::{self, OptimizerConfig};
use locklab::attack::{self, BlindStrategy};
use locklab::measurement;
use locklab::security;
use locklab::states::{self, DensityOperator};
use locklab::{linalg, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::table::{Cell, Table};

pub struct Outcome {
    pub table: Table,
    pub checks_passed: bool,
}

pub const BOUNDS_COLUMNS: [&str; 6] = ["m", "n", "lemma2_bound", "epsilon_of_n", "delta_lower", "key_entropy_bits"];

pub fn bounds(ms: impl IntoIterator<Item = usize>) -> Result<Outcome> {
    let mut table = Table::new(&BOUNDS_COLUMNS);
    let mut ok = true;
    for m in ms {
        let n = accinfo::key_length_for(m);
        let gap = accinfo::locking_gap(m, None)?;
        let (bound, eps) = accinfo::epsilon_consistency(m)?;
        ok &= bound <= eps && gap.delta_lower > m as f64 * 3f64.log2();
        table.push(vec![
            m.into(),
            n.into(),
            bound.into(),
            eps.into(),
            gap.delta_lower.into(),
            accinfo::key_entropy_bits(m).into(),
        ]);
    }
    Ok(Outcome { table, checks_passed: ok })
}

pub const ATTACK_COLUMNS: [&str; 7] = ["mode", "strategy", "m", "trials", "successes", "success_rate", "exact_rate"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StrategyName {
    /// σ₃ eigenbasis on every qubit, output the parity
    FixedBasis,
    /// σ_y eigenspace projectors for y = (3,…,3)
    ConditionalX,
    /// the pretty-good measurement of the ensemble
    Pgm,
}

impl StrategyName {
    fn label(self) -> &'static str {
        match self {
            StrategyName::FixedBasis => "fixed-basis",
            StrategyName::ConditionalX => "conditional-x",
            StrategyName::Pgm => "pgm",
        }
    }

    fn build(self, m: usize) -> Result<BlindStrategy> {
        Ok(match self {
            StrategyName::FixedBasis => BlindStrategy::FixedBasis,
            StrategyName::ConditionalX => {
                BlindStrategy::Povm(measurement::conditional_x_povm(&measurement::fixed_z_basis(m))?)
            }
            StrategyName::Pgm => BlindStrategy::Povm(measurement::pretty_good_povm(&states::locking_state(m)?)?),
        })
    }
}

pub fn attack(
    ms: impl IntoIterator<Item = usize>,
    trials: usize,
    seed: u64,
    blind: Option<StrategyName>,
) -> Result<Outcome> {
    let mut table = Table::new(&ATTACK_COLUMNS);
    let mut ok = true;
    for m in ms {
        match blind {
            None => {
                let s = attack::run_header_attack(m, trials, seed)?;
                ok &= s.successes == s.trials;
                table.push(vec![
                    "header".into(),
                    Cell::Null,
                    m.into(),
                    s.trials.into(),
                    s.successes.into(),
                    s.success_rate.into(),
                    1.0.into(),
                ]);
            }
            Some(name) => {
                let strategy = name.build(m)?;
                let s = attack::run_blind_attack(m, trials, &strategy, seed)?;
                let exact = attack::exact_blind_success(m, &strategy)?;
                ok &= (s.success_rate - exact).abs() <= 4.0 * s.standard_error(exact).max(1e-12);
                table.push(vec![
                    "blind".into(),
                    name.label().into(),
                    m.into(),
                    s.trials.into(),
                    s.successes.into(),
                    s.success_rate.into(),
                    exact.into(),
                ]);
            }
        }
    }
    Ok(Outcome { table, checks_passed: ok })
}

pub const IACC_COLUMNS: [&str; 7] =
    ["m", "restarts_used", "best_found", "upper_bound", "pgm_value", "within_bound", "delta_lower"];

pub fn iacc(ms: impl IntoIterator<Item = usize>, cfg: &OptimizerConfig) -> Result<Outcome> {
    let mut table = Table::new(&IACC_COLUMNS);
    let mut ok = true;
    for m in ms {
        let s = states::locking_state(m)?;
        let est = accinfo::optimize_locking(m, cfg)?;
        let upper = accinfo::locking_upper_bound(m);
        let pgm = accinfo::measured_info(&s, &measurement::pretty_good_povm(&s)?)?;
        let within = est.best_value <= upper + 1e-6;
        ok &= within;
        let gap = accinfo::locking_gap(m, Some(est.best_value))?;
        table.push(vec![
            m.into(),
            est.restarts_used.into(),
            est.best_value.into(),
            upper.into(),
            pgm.into(),
            within.into(),
            gap.delta_lower.into(),
        ]);
    }
    Ok(Outcome { table, checks_passed: ok })
}

pub const SECURITY_COLUMNS: [&str; 6] =
    ["m", "key_entropy_bits", "iacc_upper", "iacc_best_found", "epsilon_distance", "verdict_text"];

pub fn security(ms: impl IntoIterator<Item = usize>, cfg: &OptimizerConfig, bound_only: bool) -> Result<Outcome> {
    let mut table = Table::new(&SECURITY_COLUMNS);
    let mut ok = true;
    for m in ms {
        let r = security::security_report(m, cfg, bound_only)?;
        ok &= (r.epsilon_distance - 0.5).abs() <= 1e-9;
        ok &= r.iacc_best_found.is_none_or(|v| v <= r.iacc_upper + 1e-6);
        table.push(vec![
            r.m.into(),
            r.key_entropy_bits.into(),
            r.iacc_upper.into(),
            r.iacc_best_found.into(),
            r.epsilon_distance.into(),
            r.verdict_text.into(),
        ]);
    }
    Ok(Outcome { table, checks_passed: ok })
}

pub const BELL_COLUMNS: [&str; 5] = ["trial", "fidelity", "epsilon_bound", "measured_distance", "pass"];

/// Trial 0 uses a deterministic bit-flip admixture of weight
/// `perturbation`; later trials draw random perturbations of that strength
/// from `seed + trial`. A zero perturbation gives the exact Bell state.
pub fn bell(n: usize, perturbation: f64, trials: usize, seed: u64) -> Result<Outcome> {
    let mut table = Table::new(&BELL_COLUMNS);
    let mut ok = true;
    for trial in 0..trials {
        let rho = if perturbation == 0.0 {
            security::bell_state(n)
        } else if trial == 0 {
            security::bell_with_flip_noise(n, perturbation)?
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64));
            security::random_bell_perturbation(n, perturbation, &mut rng)
        };
        let r = security::bell_key_experiment(n, &rho)?;
        ok &= r.passes();
        table.push(vec![
            trial.into(),
            r.fidelity.into(),
            r.epsilon_bound.into(),
            r.measured_key_distance.into(),
            r.passes().into(),
        ]);
    }
    Ok(Outcome { table, checks_passed: ok })
}

pub const PROOFCHAIN_COLUMNS: [&str; 8] = [
    "sample",
    "m",
    "decomposition_error",
    "binary_entropy_slack",
    "cauchy_schwarz_slack",
    "bound_slack",
    "purity_slack",
    "pass",
];

/// Random pure states drawn from `seed + sample`.
pub fn proofchain(ms: impl IntoIterator<Item = usize>, samples: usize, seed: u64) -> Result<Outcome> {
    let mut table = Table::new(&PROOFCHAIN_COLUMNS);
    let mut ok = true;
    for m in ms {
        for sample in 0..samples {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(sample as u64));
            let psi = linalg::random_unit_vector(1 << m, &mut rng);
            let sigma = DensityOperator::pure(&psi)?;
            let r = accinfo::proof_chain_check(m, &sigma)?;
            ok &= r.passes();
            table.push(vec![
                sample.into(),
                m.into(),
                r.decomposition_error.into(),
                r.binary_entropy_slack.into(),
                r.cauchy_schwarz_slack.into(),
                r.bound_slack.into(),
                r.purity_slack.into(),
                r.passes().into(),
            ]);
        }
    }
    Ok(Outcome { table, checks_passed: ok })
}
