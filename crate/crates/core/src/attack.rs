//! One-time pad over `{0,1} × {0,1,2}^m` keyed by locking-ensemble symbols,
//! and two adversaries: one who knows the message header and one who does
//! not.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurement::{self, Povm};
use crate::pauli::{PauliIndex, PauliString};
use crate::states::{self, LockingLabel};

/// Key symbol `(x, y)` with `y ∈ {1,2,3}^m`.
pub type KeySymbol = LockingLabel;

/// `m` trits followed by one bit. Messages and ciphertexts share this shape.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Block {
    pub head: Vec<u8>,
    pub last: u8,
}

pub type Message = Block;
pub type Ciphertext = Block;

impl Block {
    pub fn zero(m: usize) -> Self {
        Block { head: vec![0; m], last: 0 }
    }

    fn check(&self, m: usize) -> Result<()> {
        if self.head.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: self.head.len() });
        }
        if let Some(t) = self.head.iter().find(|&&t| t > 2) {
            return Err(Error::InvalidAlphabet(format!("{t} is not a trit")));
        }
        if self.last > 1 {
            return Err(Error::InvalidAlphabet(format!("{} is not a bit", self.last)));
        }
        Ok(())
    }
}

fn check_key(k: &KeySymbol) -> Result<()> {
    if k.x > 1 || !k.y.is_non_identity_alphabet() {
        return Err(Error::InvalidAlphabet(format!("key ({}, {}) outside {{0,1}} x {{1,2,3}}^m", k.x, k.y)));
    }
    Ok(())
}

/// Trit shift of a key index: `{1,2,3} → {0,1,2}`.
fn shift(p: PauliIndex) -> u8 {
    p.value() - 1
}

pub fn otp_encrypt(k: &KeySymbol, msg: &Message) -> Result<Ciphertext> {
    check_key(k)?;
    msg.check(k.y.len())?;
    Ok(Block {
        head: msg.head.iter().zip(k.y.indices()).map(|(&h, &p)| (h + shift(p)) % 3).collect(),
        last: msg.last ^ k.x,
    })
}

pub fn otp_decrypt(k: &KeySymbol, c: &Ciphertext) -> Result<Message> {
    check_key(k)?;
    c.check(k.y.len())?;
    Ok(Block {
        head: c.head.iter().zip(k.y.indices()).map(|(&h, &p)| (h + 3 - shift(p)) % 3).collect(),
        last: c.last ^ k.x,
    })
}

/// The key's `y` part from a ciphertext header and the plaintext header it
/// encrypts.
pub fn infer_key_y(cipher_head: &[u8], known_head: &[u8]) -> Result<PauliString> {
    if cipher_head.len() != known_head.len() {
        return Err(Error::DimensionMismatch { expected: known_head.len(), found: cipher_head.len() });
    }
    let values: Vec<u8> = cipher_head.iter().zip(known_head).map(|(&c, &h)| (c + 3 - h % 3) % 3 + 1).collect();
    PauliString::from_values(&values)
}

pub fn random_key<R: Rng + ?Sized>(m: usize, rng: &mut R) -> KeySymbol {
    let x = rng.random_range(0..2u8);
    let y: Vec<PauliIndex> = (0..m).map(|_| PauliIndex::new(rng.random_range(1..=3u8)).expect("in range")).collect();
    LockingLabel { x, y: PauliString::new(y).expect("m >= 1") }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttackStats {
    pub m: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub seed: u64,
}

impl AttackStats {
    fn new(m: usize, trials: usize, successes: usize, seed: u64) -> Self {
        AttackStats { m, trials, successes, success_rate: successes as f64 / trials as f64, seed }
    }

    /// Binomial standard deviation of the success rate around `p`.
    pub fn standard_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64))
}

fn count_successes(trials: usize, seed: u64, trial: impl Fn(&mut ChaCha8Rng) -> Result<bool> + Sync) -> Result<usize> {
    (0..trials)
        .into_par_iter()
        .map(|t| trial(&mut trial_rng(seed, t)).map(usize::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// The adversary knows the plaintext header, reads `y` off the ciphertext,
/// measures `E` in the eigenbases of `σ_y`, takes the parity of the
/// outcomes as `x` and decrypts the final bit.
pub fn run_header_attack(m: usize, trials: usize, seed: u64) -> Result<AttackStats> {
    run_header_attack_with(m, trials, seed, &vec![0; m])
}

pub fn run_header_attack_with(m: usize, trials: usize, seed: u64, known_head: &[u8]) -> Result<AttackStats> {
    if m == 0 || trials == 0 {
        return Err(Error::InvalidConfig("m and trials must be at least 1".into()));
    }
    if known_head.len() != m || known_head.iter().any(|&t| t > 2) {
        return Err(Error::InvalidAlphabet("known header must be m trits".into()));
    }
    let successes = count_successes(trials, seed, |rng| {
        let key = random_key(m, rng);
        let msg = Block { head: known_head.to_vec(), last: rng.random_range(0..2u8) };
        let c = otp_encrypt(&key, &msg)?;

        let y = infer_key_y(&c.head, known_head)?;
        let r = measurement::measure_locking_in_basis(key.x, &key.y, &y, rng)?;
        let x_guess = r.iter().fold(0u8, |a, b| a ^ b);
        Ok((c.last ^ x_guess) == msg.last)
    })?;
    Ok(AttackStats::new(m, trials, successes, seed))
}

/// Measurement used by an adversary who never sees the ciphertext header.
#[derive(Debug, Clone)]
pub enum BlindStrategy {
    /// Measure every qubit in the σ₃ eigenbasis and output the parity.
    FixedBasis,
    /// Any dense POVM on `E`, followed by the maximum-likelihood guess of `x`.
    Povm(Povm),
}

/// Exact success probability of a blind strategy, from the full joint
/// distribution of `x` and the outcome.
pub fn exact_blind_success(m: usize, strategy: &BlindStrategy) -> Result<f64> {
    match strategy {
        BlindStrategy::FixedBasis => {
            let p_match = 3f64.powi(-(m as i32));
            Ok(p_match + (1.0 - p_match) * 0.5)
        }
        BlindStrategy::Povm(p) => {
            let table = x_outcome_table(m, p)?;
            Ok(table.iter().map(|row| row[0].max(row[1])).sum())
        }
    }
}

/// `P(x, z)` marginalized over `y`, indexed `[z][x]`.
fn x_outcome_table(m: usize, p: &Povm) -> Result<Vec<[f64; 2]>> {
    let s = states::locking_state(m)?;
    let j = measurement::measure_cq(p, &s)?;
    let mut table = vec![[0.0; 2]; p.len()];
    for (row, label) in j.probs.iter().zip(s.labels()) {
        for (z, &q) in row.iter().enumerate() {
            table[z][label.x as usize] += q;
        }
    }
    Ok(table)
}

pub fn run_blind_attack(m: usize, trials: usize, strategy: &BlindStrategy, seed: u64) -> Result<AttackStats> {
    if m == 0 || trials == 0 {
        return Err(Error::InvalidConfig("m and trials must be at least 1".into()));
    }
    let successes = match strategy {
        BlindStrategy::FixedBasis => {
            let basis = measurement::fixed_z_basis(m);
            count_successes(trials, seed, |rng| {
                let key = random_key(m, rng);
                let msg = Block { head: vec![0; m], last: rng.random_range(0..2u8) };
                let c = otp_encrypt(&key, &msg)?;
                let r = measurement::measure_locking_in_basis(key.x, &key.y, &basis, rng)?;
                let x_guess = r.iter().fold(0u8, |a, b| a ^ b);
                Ok((c.last ^ x_guess) == msg.last)
            })?
        }
        BlindStrategy::Povm(p) => {
            let s = states::locking_state(m)?;
            let guess: Vec<u8> = x_outcome_table(m, p)?.iter().map(|row| u8::from(row[1] > row[0])).collect();
            // outcome distribution of every label, for sampling
            let rows = measurement::measure_cq(p, &s)?.probs;
            let rows: Vec<Vec<f64>> = rows
                .into_iter()
                .map(|r| {
                    let t: f64 = r.iter().sum();
                    r.into_iter().map(|q| q / t).collect()
                })
                .collect();
            count_successes(trials, seed, |rng| {
                let key = random_key(m, rng);
                let msg = Block { head: vec![0; m], last: rng.random_range(0..2u8) };
                let c = otp_encrypt(&key, &msg)?;
                let idx = s.labels().iter().position(|l| l == &key).expect("key is a label");
                let z = sample_index(&rows[idx], rng);
                Ok((c.last ^ guess[z]) == msg.last)
            })?
        }
    };
    Ok(AttackStats::new(m, trials, successes, seed))
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(x: u8, y: &[u8]) -> KeySymbol {
        LockingLabel { x, y: PauliString::from_values(y).unwrap() }
    }

    fn all_blocks(m: usize) -> Vec<Block> {
        let mut out = Vec::new();
        for code in 0..3usize.pow(m as u32) {
            let head: Vec<u8> = (0..m).map(|i| ((code / 3usize.pow(i as u32)) % 3) as u8).collect();
            for last in 0..2 {
                out.push(Block { head: head.clone(), last });
            }
        }
        out
    }

    #[test]
    fn encryption_examples() {
        let c = otp_encrypt(&key(0, &[1, 1, 1]), &Block::zero(3)).unwrap();
        assert_eq!(c, Block::zero(3));
        let c = otp_encrypt(&key(0, &[3]), &Block { head: vec![2], last: 0 }).unwrap();
        assert_eq!(c.head, vec![1]);
        assert_eq!(otp_decrypt(&key(0, &[3]), &c).unwrap(), Block { head: vec![2], last: 0 });
    }

    #[test]
    fn shape_and_alphabet_errors() {
        assert!(otp_encrypt(&key(0, &[1, 2]), &Block::zero(3)).is_err());
        assert!(otp_encrypt(&key(0, &[1]), &Block { head: vec![3], last: 0 }).is_err());
        assert!(otp_encrypt(&key(2, &[1]), &Block::zero(1)).is_err());
        assert!(otp_encrypt(&key(0, &[0]), &Block::zero(1)).is_err());
        assert!(otp_decrypt(&key(0, &[1]), &Block { head: vec![0], last: 2 }).is_err());
    }

    #[test]
    fn exhaustive_inverse_and_uniformity() {
        for m in 1..=2 {
            let keys: Vec<KeySymbol> = states::locking_state(m).unwrap().labels().to_vec();
            for msg in all_blocks(m) {
                let mut seen = std::collections::HashMap::new();
                for k in &keys {
                    let c = otp_encrypt(k, &msg).unwrap();
                    assert_eq!(otp_decrypt(k, &c).unwrap(), msg);
                    *seen.entry(c).or_insert(0usize) += 1;
                }
                // every ciphertext appears exactly once over the uniform keys
                assert_eq!(seen.len(), keys.len());
                assert!(seen.values().all(|&n| n == 1));
            }
        }
    }

    #[test]
    fn randomized_inverse_for_larger_m() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..10_000 {
            let m = rng.random_range(3..=30);
            let k = random_key(m, &mut rng);
            let msg =
                Block { head: (0..m).map(|_| rng.random_range(0..3u8)).collect(), last: rng.random_range(0..2u8) };
            let c = otp_encrypt(&k, &msg).unwrap();
            assert_eq!(otp_decrypt(&k, &c).unwrap(), msg);
            assert_eq!(infer_key_y(&c.head, &msg.head).unwrap(), k.y);
        }
    }

    #[test]
    fn zero_message_round_trip() {
        let k = key(1, &[2, 3]);
        let c = otp_encrypt(&k, &Block::zero(2)).unwrap();
        assert_eq!(otp_decrypt(&k, &c).unwrap(), Block::zero(2));
    }

    #[test]
    fn header_attack_is_certain() {
        let s = run_header_attack(1, 1, 42).unwrap();
        assert_eq!(s.successes, 1);
        for m in [1, 3, 20] {
            let s = run_header_attack(m, 5_000, 7).unwrap();
            assert_eq!(s.successes, s.trials);
            assert_eq!(s.success_rate, 1.0);
        }
        let s = run_header_attack_with(2, 1000, 1, &[2, 1]).unwrap();
        assert_eq!(s.success_rate, 1.0);
        assert!(run_header_attack(0, 10, 1).is_err());
        assert!(run_header_attack(2, 0, 1).is_err());
        assert!(run_header_attack_with(2, 10, 1, &[0]).is_err());
    }

    #[test]
    fn header_attack_is_deterministic() {
        assert_eq!(run_header_attack(4, 100, 9).unwrap(), run_header_attack(4, 100, 9).unwrap());
    }

    #[test]
    fn exact_blind_oracles() {
        let z = PauliString::from_values(&[3]).unwrap();
        let cond = BlindStrategy::Povm(measurement::conditional_x_povm(&z).unwrap());
        assert!((exact_blind_success(1, &cond).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((exact_blind_success(1, &BlindStrategy::FixedBasis).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((exact_blind_success(2, &BlindStrategy::FixedBasis).unwrap() - 5.0 / 9.0).abs() < 1e-12);
        // the dense product measurement agrees with the preset's closed form
        let dense = BlindStrategy::Povm(measurement::product_basis_povm(&measurement::fixed_z_basis(2)).unwrap());
        assert!((exact_blind_success(2, &dense).unwrap() - 5.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn blind_attack_matches_oracle() {
        let trials = 20_000;
        let z = PauliString::from_values(&[3]).unwrap();
        let pgm = measurement::pretty_good_povm(&states::locking_state(1).unwrap()).unwrap();
        let cases = [
            (1, BlindStrategy::Povm(measurement::conditional_x_povm(&z).unwrap())),
            (1, BlindStrategy::Povm(pgm)),
            (2, BlindStrategy::FixedBasis),
        ];
        for (m, strategy) in cases {
            let exact = exact_blind_success(m, &strategy).unwrap();
            let s = run_blind_attack(m, trials, &strategy, 3).unwrap();
            assert!((s.success_rate - exact).abs() <= 3.0 * s.standard_error(exact), "{s:?} vs {exact}");
            assert!(s.success_rate < 1.0);
        }
    }
}
