//! Identity checks run by `rmcorr verify`.

use serde::Serialize;

use rmcorr::ensembles::{clifford_1q, twirl, verify_perm_sums, TwirlEnsemble, WeingartenTable, CLIFFORD_1Q_ORDER};
use rmcorr::oracle::{
    brute_force_estimator_expectation, brute_force_fixed_outcome_moment, concurrence_from_collision,
    exact_concurrence, exact_tk,
};
use rmcorr::qcore::{cre, depolarize, make_state, permutation_operator, CMatrix};
use rmcorr::{Partition, Protocol, StateKind};

use crate::error::CliResult;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn tolerance(name: &str, error: f64, tol: f64) -> Self {
        Self { name: name.to_string(), passed: error <= tol, detail: format!("max error {error:e} (tolerance {tol:e})") }
    }

    fn failed(name: &str, err: impl std::fmt::Display) -> Self {
        Self { name: name.to_string(), passed: false, detail: err.to_string() }
    }
}

fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Twirl of `X(s, s') = d delta - 1` on two qubits equals SWAP.
pub fn twirl_check() -> CliResult<Check> {
    // diagonal weight operator with entry (s, s') = x_weight(s, s', 2)
    let w = CMatrix::from_fn(4, 4, |r, c| {
        if r != c {
            return cre(0.0);
        }
        let (s, sp) = (r >> 1, r & 1);
        cre(if s == sp { 2.0 } else { -1.0 })
    });
    let t = twirl(&w, TwirlEnsemble::Clifford1q, 2)?;
    let swap = permutation_operator(&[1, 0], 2, 2)?.to_dense();
    Ok(Check::tolerance("twirl_weight_to_swap", max_abs_diff(&t.mean, &swap), 1e-12))
}

fn clifford_group_check() -> CliResult<Check> {
    let mats: Vec<CMatrix> = (0..CLIFFORD_1Q_ORDER).map(clifford_1q).collect::<Result<_, _>>()?;
    let unitary = mats.iter().all(|m| max_abs_diff(&(m * m.adjoint()), &CMatrix::identity(2, 2)) < 1e-12);
    let closed = mats.iter().all(|a| {
        mats.iter().all(|b| mats.iter().any(|c| rmcorr::ensembles::equal_up_to_phase(&(a * b), c)))
    });
    Ok(Check {
        name: "clifford_group_closure".into(),
        passed: unitary && closed,
        detail: format!("{} elements, unitary {unitary}, closed {closed}", mats.len()),
    })
}

fn weingarten_check() -> CliResult<Check> {
    let table = WeingartenTable::new(2, 2)?;
    let x = CMatrix::from_fn(4, 4, |r, c| cre(((r * 7 + c * 3) % 5) as f64 - 2.0));
    let exact = twirl(&x, TwirlEnsemble::Clifford1q, 2)?.mean;
    let err = max_abs_diff(&table.twirl(&x)?, &exact);
    let row = (table.row_sum(0) - table.expected_row_sum()).abs();
    Ok(Check::tolerance("weingarten_matches_clifford_twirl", err.max(row), 1e-12))
}

fn perm_sum_checks() -> Vec<Check> {
    (2..=5)
        .map(|d| match verify_perm_sums(d) {
            Ok(r) => Check {
                name: format!("perm_sums_d{d}"),
                passed: r.ok,
                detail: format!("computed {:?}, closed form {:?}", r.computed, r.closed_form),
            },
            Err(e) => Check::failed(&format!("perm_sums_d{d}"), e),
        })
        .collect()
}

/// Exact finite-ensemble expectation of the overlap estimator against the oracle.
pub fn unbiasedness_checks() -> Vec<Check> {
    let cases: Vec<(&str, Box<dyn Fn() -> rmcorr::Result<(rmcorr::QuantumState, Partition)>>)> = vec![
        ("bell_k2", Box::new(|| Ok((make_state(StateKind::Bell, 2, 0)?, Partition::from_sizes(&[1, 1])?)))),
        ("ghz3_k3", Box::new(|| Ok((make_state(StateKind::Ghz, 3, 0)?, Partition::from_sizes(&[1, 1, 1])?)))),
        (
            "depolarized_bell_k2",
            Box::new(|| Ok((depolarize(&make_state(StateKind::Bell, 2, 0)?, 0.5)?, Partition::from_sizes(&[1, 1])?))),
        ),
    ];
    cases
        .into_iter()
        .map(|(name, build)| {
            let name = format!("unbiased_{name}");
            let run = || -> rmcorr::Result<f64> {
                let (state, p) = build()?;
                let e = brute_force_estimator_expectation(&state, Some(&p), Protocol::LocalCro)?;
                Ok((e - exact_tk(&state, &p)?).abs())
            };
            match run() {
                Ok(err) => Check::tolerance(&name, err, 1e-10),
                Err(e) => Check::failed(&name, e),
            }
        })
        .collect()
}

/// Fixed-outcome, symmetrized and oracle concurrence agree for `n <= 3`.
pub fn concurrence_chain_checks() -> Vec<Check> {
    (1..=3usize)
        .map(|n| {
            let name = format!("concurrence_chain_n{n}");
            let run = || -> rmcorr::Result<f64> {
                let psi = if n == 1 { make_state(StateKind::PureRandom, 1, 5)? } else { make_state(StateKind::Ghz, n, 0)? };
                let k = brute_force_estimator_expectation(&psi, None, Protocol::Concurrence)?;
                let sym = concurrence_from_collision(k, n);
                let fixed = brute_force_fixed_outcome_moment(&psi, 0)?;
                let via_fixed = 2.0 * (1.0 - 3f64.powi(n as i32) * fixed).max(0.0).sqrt();
                let oracle = exact_concurrence(&psi)?;
                Ok((sym - via_fixed).abs().max((sym - oracle).abs()))
            };
            match run() {
                Ok(err) => Check::tolerance(&name, err, 1e-10),
                Err(e) => Check::failed(&name, e),
            }
        })
        .collect()
}

pub fn run_all() -> Vec<Check> {
    let mut checks = Vec::new();
    for c in [twirl_check(), clifford_group_check(), weingarten_check()] {
        checks.push(c.unwrap_or_else(|e| Check::failed("setup", e)));
    }
    checks.extend(perm_sum_checks());
    checks.extend(unbiasedness_checks());
    checks.extend(concurrence_chain_checks());
    checks
}
