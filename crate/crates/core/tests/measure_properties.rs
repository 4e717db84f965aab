//! Structural properties of the total-correlation measure over random states.

use rmcorr::ensembles::{sample_party_setting, sample_setting, EnsembleId};
use rmcorr::oracle::{exact_correlation, exact_tk, FidelityVariant};
use rmcorr::qcore::{apply_product_unitary, make_state, random_mixed_state, tensor, StateKind};
use rmcorr::Partition;

const GM: FidelityVariant = FidelityVariant::Gm;
const TOL: f64 = 1e-10;

#[test]
fn product_states_carry_no_correlation() {
    for seed in 0..100 {
        let a = random_mixed_state(1, 1, seed).unwrap();
        let b = random_mixed_state(2, 1, 1000 + seed).unwrap();
        let p = Partition::from_sizes(&[1, 2]).unwrap();
        let c = exact_correlation(&tensor(&a, &b).unwrap(), &p, GM).unwrap();
        assert!(c.abs() < TOL, "seed {seed}: {c}");
    }
}

#[test]
fn local_unitaries_leave_correlation_unchanged() {
    let p = Partition::from_sizes(&[1, 2]).unwrap();
    for seed in 0..100 {
        let rho = random_mixed_state(3, 2, seed).unwrap();
        let before = exact_correlation(&rho, &p, GM).unwrap();
        let setting = sample_party_setting(3, &p, 500 + seed).unwrap();
        let after = exact_correlation(&apply_product_unitary(&rho, &setting, &[]).unwrap(), &p, GM).unwrap();
        assert!((before - after).abs() < TOL, "seed {seed}: {before} vs {after}");
    }
}

#[test]
fn appending_an_uncorrelated_party_changes_nothing() {
    let p = Partition::from_sizes(&[1, 1]).unwrap();
    let extended = Partition::from_sizes(&[1, 1, 1]).unwrap();
    for seed in 0..100 {
        let rho = random_mixed_state(2, 2, seed).unwrap();
        let extra = random_mixed_state(1, 1, 2000 + seed).unwrap();
        let c = exact_correlation(&rho, &p, GM).unwrap();
        let c_ext = exact_correlation(&tensor(&rho, &extra).unwrap(), &extended, GM).unwrap();
        assert!((c - c_ext).abs() < TOL, "seed {seed}: {c} vs {c_ext}");
    }
}

#[test]
fn correlation_adds_over_tensor_products() {
    let pa = Partition::from_sizes(&[1, 1]).unwrap();
    let joint = Partition::from_sizes(&[1, 1, 1, 1]).unwrap();
    for seed in 0..100 {
        let a = random_mixed_state(2, 1, seed).unwrap();
        let b = random_mixed_state(2, 2, 3000 + seed).unwrap();
        let sum = exact_correlation(&a, &pa, GM).unwrap() + exact_correlation(&b, &pa, GM).unwrap();
        let c = exact_correlation(&tensor(&a, &b).unwrap(), &joint, GM).unwrap();
        assert!((c - sum).abs() < TOL, "seed {seed}: {c} vs {sum}");
    }
}

#[test]
fn ghz_overlap_is_independent_of_size() {
    for n in [3, 6, 9] {
        let ghz = make_state(StateKind::Ghz, n, 0).unwrap();
        let t = exact_tk(&ghz, &Partition::equal(n, 3).unwrap()).unwrap();
        assert!((t - 0.125).abs() < 1e-12, "n = {n}: {t}");
    }
}

#[test]
fn pure_state_correlation_is_local_unitary_invariant() {
    let p = Partition::from_sizes(&[2, 2]).unwrap();
    for seed in 0..20 {
        let psi = make_state(StateKind::PureRandom, 4, seed).unwrap();
        let setting = sample_setting(4, EnsembleId::Haar1q, 40 + seed).unwrap();
        let rotated = apply_product_unitary(&psi, &setting, &[]).unwrap();
        let a = exact_correlation(&psi, &p, GM).unwrap();
        let b = exact_correlation(&rotated, &p, GM).unwrap();
        assert!((a - b).abs() < TOL);
    }
}
