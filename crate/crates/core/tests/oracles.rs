use approx::assert_abs_diff_eq;
use locklab::accinfo::{self, OptimizerConfig};
use locklab::linalg::{self, Operator};
use locklab::measurement::{self, Povm};
use locklab::pauli::PauliString;
use locklab::security;
use locklab::states::{self, CqState, DensityOperator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn quick(restarts: usize) -> OptimizerConfig {
    OptimizerConfig { restarts, ..OptimizerConfig::default() }
}

fn basis_state(d: usize, i: usize) -> DensityOperator {
    DensityOperator::pure(&linalg::basis_vector(d, i)).unwrap()
}

/// Random rank-one POVM with `k` outcomes: `W = L⁻¹V` where `VV† = LL†`.
fn random_povm(d: usize, k: usize, rng: &mut ChaCha8Rng) -> Povm {
    let v = Operator::from_fn(d, k, |_, _| linalg::random_complex_gaussian(rng));
    let gram = &v * v.adjoint();
    let l = gram.cholesky().unwrap().l();
    let w = l.solve_lower_triangular(&v).unwrap();
    Povm::new((0..k).map(|j| linalg::outer(&w.column(j).into_owned())).collect()).unwrap()
}

#[test]
fn search_finds_one_bit_for_orthogonal_states() {
    let s = CqState::new(vec![0u8, 1], vec![0.5, 0.5], vec![basis_state(2, 0), basis_state(2, 1)]).unwrap();
    let est = accinfo::optimize_accessible_info(&s, &quick(10)).unwrap();
    assert_abs_diff_eq!(est.best_value, 1.0, epsilon = 1e-4);
}

#[test]
fn search_finds_nothing_for_identical_states() {
    let rho = DensityOperator::maximally_mixed(2);
    let s = CqState::new(vec![0u8, 1], vec![0.5, 0.5], vec![rho.clone(), rho]).unwrap();
    let est = accinfo::optimize_accessible_info(&s, &quick(10)).unwrap();
    assert_abs_diff_eq!(est.best_value, 0.0, epsilon = 1e-9);
}

#[test]
fn search_dominates_the_pretty_good_measurement() {
    for m in [1, 2] {
        let s = states::locking_state(m).unwrap();
        let pgm = accinfo::measured_info(&s, &measurement::pretty_good_povm(&s).unwrap()).unwrap();
        let est = accinfo::optimize_accessible_info(&s, &quick(10)).unwrap();
        assert!(est.best_value >= pgm - 1e-9, "m={m}");
        assert!(est.best_value <= accinfo::locking_upper_bound(m) + 1e-6, "m={m}");
    }
}

#[test]
fn search_is_reproducible() {
    let s = states::locking_state(1).unwrap();
    let a = accinfo::optimize_accessible_info(&s, &quick(8)).unwrap();
    let b = accinfo::optimize_accessible_info(&s, &quick(8)).unwrap();
    assert_eq!(a.best_value.to_bits(), b.best_value.to_bits());
}

#[test]
fn knowing_y_unlocks_the_key() {
    let s = states::locking_state(1).unwrap();
    let without = accinfo::optimize_locking(1, &quick(20)).unwrap().best_value;
    let ext = states::extend_with_y(&s).unwrap();
    let with =
        accinfo::optimize_accessible_info_seeded(&ext, &quick(4), &[measurement::perfect_joint_povm(1).unwrap()])
            .unwrap()
            .best_value;
    assert!(with >= without);
    assert_abs_diff_eq!(with, accinfo::key_entropy_bits(1), epsilon = 1e-9);
}

#[test]
fn conditional_entropy_above_minimum_output_entropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in [1, 2] {
        let d = 1 << m;
        let s = states::locking_state(m).unwrap();
        let h_min = accinfo::min_output_entropy(&s, &quick(20)).unwrap();
        for _ in 0..20 {
            let p = random_povm(d, d + 2, &mut rng);
            let h = measurement::measure_cq(&p, &s).unwrap().conditional_label_entropy();
            assert!(h >= h_min - 1e-6, "m={m}: {h} < {h_min}");
        }
    }
}

#[test]
fn minimum_output_entropy_values() {
    let s2 = states::locking_state(2).unwrap();
    let h2 = accinfo::min_output_entropy(&s2, &quick(20)).unwrap();
    assert!(h2 >= 3.503258 - 1e-6, "{h2}");

    let orth = CqState::new(vec![0u8, 1], vec![0.5, 0.5], vec![basis_state(2, 0), basis_state(2, 1)]).unwrap();
    assert_abs_diff_eq!(accinfo::min_output_entropy(&orth, &quick(5)).unwrap(), 0.0, epsilon = 1e-6);
}

#[test]
fn alternative_construction_agrees() {
    for m in 1..=3 {
        let a = states::locking_state(m).unwrap();
        let b = states::locking_state_alt(m).unwrap();
        for (label, p, rho) in a.iter() {
            let other = b.conditional(label).expect("same label set");
            assert!(linalg::max_abs(&(other.op() - rho.op())) <= 1e-12);
            assert_abs_diff_eq!(p, 1.0 / (2.0 * 3f64.powi(m as i32)), epsilon = 1e-15);
        }
        assert_eq!(a.len(), b.len());
        let avg = states::marginal_e(&a);
        assert!(linalg::max_abs(&(avg.op() - linalg::identity(1 << m).unscale((1 << m) as f64))) <= 1e-12);
    }
}

#[test]
fn pretty_good_measurement_of_the_mixed_state_is_uniform() {
    let s = states::locking_state(1).unwrap();
    let n = measurement::pretty_good_povm(&s).unwrap();
    let p = measurement::apply_povm(&n, &DensityOperator::maximally_mixed(2)).unwrap();
    assert_eq!(p.probs.len(), 6);
    for v in p.probs {
        assert_abs_diff_eq!(v, 1.0 / 6.0, epsilon = 1e-12);
    }
}

#[test]
fn conditional_measurement_recovers_x() {
    let y = PauliString::from_values(&[1, 2]).unwrap();
    let p = measurement::conditional_x_povm(&y).unwrap();
    let rho = DensityOperator::new(states::locking_conditional(1, &y).unwrap()).unwrap();
    let d = measurement::apply_povm(&p, &rho).unwrap();
    assert_abs_diff_eq!(d.probs[1], 1.0, epsilon = 1e-10);
}

#[test]
fn secure_key_has_zero_distance() {
    let rho = DensityOperator::maximally_mixed(2);
    let s = CqState::new(vec![0u8, 1], vec![0.5, 0.5], vec![rho.clone(), rho]).unwrap();
    assert_abs_diff_eq!(security::epsilon_secure_distance(&s), 0.0, epsilon = 1e-12);
}

#[test]
fn flip_noise_bell_pair() {
    let rho = security::bell_with_flip_noise(1, 0.1).unwrap();
    let r = security::bell_key_experiment(1, &rho).unwrap();
    assert_abs_diff_eq!(r.fidelity, 0.9f64.sqrt(), epsilon = 1e-9);
    assert_abs_diff_eq!(r.epsilon_bound, 0.1f64.sqrt(), epsilon = 1e-9);
    assert!(r.measured_key_distance <= r.epsilon_bound + 1e-9);
}

#[test]
fn bound_only_report_for_three_qubits() {
    let r = security::security_report(3, &OptimizerConfig::default(), true).unwrap();
    assert_abs_diff_eq!(r.iacc_upper, 0.544331, epsilon = 1e-6);
    assert_abs_diff_eq!(r.epsilon_distance, 0.5, epsilon = 1e-9);
    assert!(r.iacc_best_found.is_none());
}

#[test]
fn epsilon_examples() {
    assert_abs_diff_eq!(accinfo::epsilon_of_n(2).unwrap(), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(accinfo::epsilon_of_n(10).unwrap(), (-1f64).exp(), epsilon = 1e-15);
    assert_eq!(accinfo::key_length_for(10), 16);
    let (bound, eps) = accinfo::epsilon_consistency(10).unwrap();
    assert_abs_diff_eq!(bound, 0.131687, epsilon = 1e-6);
    assert_abs_diff_eq!(eps, 0.173774, epsilon = 1e-6);
}
