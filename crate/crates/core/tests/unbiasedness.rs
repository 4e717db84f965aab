//! Exact expectations of the estimators over the full Clifford ensemble.

use rmcorr::oracle::{
    brute_force_estimator_expectation, brute_force_fixed_outcome_moment, collision_moment, concurrence_from_collision,
    exact_concurrence, exact_mes_fidelity, exact_tk,
};
use rmcorr::qcore::{depolarize, make_state, random_mixed_state, StateKind};
use rmcorr::{Partition, Protocol};

fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b}");
}

#[test]
fn overlap_estimator_is_unbiased_on_named_states() {
    let bell = make_state(StateKind::Bell, 2, 0).unwrap();
    let bb = Partition::from_sizes(&[1, 1]).unwrap();
    let e = brute_force_estimator_expectation(&bell, Some(&bb), Protocol::LocalCro).unwrap();
    assert_close(e, 0.25, 1e-10, "bell");
    assert_close(e, exact_tk(&bell, &bb).unwrap(), 1e-10, "bell oracle");

    let ghz = make_state(StateKind::Ghz, 3, 0).unwrap();
    let p3 = Partition::from_sizes(&[1, 1, 1]).unwrap();
    let e = brute_force_estimator_expectation(&ghz, Some(&p3), Protocol::LocalCro).unwrap();
    assert_close(e, 0.125, 1e-10, "ghz3");

    let dep = depolarize(&bell, 0.5).unwrap();
    let e = brute_force_estimator_expectation(&dep, Some(&bb), Protocol::LocalCro).unwrap();
    assert_close(e, exact_tk(&dep, &bb).unwrap(), 1e-10, "depolarized bell");
}

#[test]
fn overlap_estimator_is_unbiased_on_random_states() {
    let cases = [("0;1", 2), ("0;2", 3), ("0,1;2", 3), ("2;0,1", 3), ("0;1;2", 3)];
    for (seed, (spec, n)) in cases.iter().enumerate() {
        let rho = random_mixed_state(*n, 1, seed as u64).unwrap();
        let p = Partition::parse(spec).unwrap();
        let e = brute_force_estimator_expectation(&rho, Some(&p), Protocol::LocalCro).unwrap();
        assert_close(e, exact_tk(&rho, &p).unwrap(), 1e-10, spec);
    }
}

#[test]
fn mes_fidelity_estimator_is_unbiased() {
    for seed in 0..3 {
        let rho = random_mixed_state(2, 2, seed).unwrap();
        let e = brute_force_estimator_expectation(&rho, None, Protocol::MesFidelity).unwrap();
        assert_close(e, exact_mes_fidelity(&rho).unwrap(), 1e-10, "random two-qubit");
    }
    let ghz4 = make_state(StateKind::Ghz, 4, 0).unwrap();
    let e = brute_force_estimator_expectation(&ghz4, None, Protocol::MesFidelity).unwrap();
    assert_close(e, exact_mes_fidelity(&ghz4).unwrap(), 1e-10, "ghz4");
}

#[test]
fn fixed_outcome_and_symmetrized_concurrence_agree() {
    for n in 1..=3usize {
        for seed in 0..2 {
            let psi = make_state(StateKind::PureRandom, n, seed).unwrap();
            let k = brute_force_estimator_expectation(&psi, None, Protocol::Concurrence).unwrap();
            assert_close(k, collision_moment(&psi).unwrap(), 1e-10, "twirl formula");
            let symmetrized = concurrence_from_collision(k, n);
            assert_close(symmetrized, exact_concurrence(&psi).unwrap(), 1e-10, "oracle");
            for s in [0, (1 << n) - 1] {
                let fixed = brute_force_fixed_outcome_moment(&psi, s).unwrap();
                let via_fixed = 2.0 * (1.0 - 3f64.powi(n as i32) * fixed).max(0.0).sqrt();
                assert_close(via_fixed, symmetrized, 1e-10, "fixed outcome");
            }
        }
    }
}
