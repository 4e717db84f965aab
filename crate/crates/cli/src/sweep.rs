//! Grid sweeps: repeated simulate-and-estimate runs per grid point, with the
//! exact value alongside, and the witness scan over a two-qubit family.

use rayon::prelude::*;
use serde::Serialize;

use rmcorr::estimators::{estimate_mes_fidelity, estimate_tk};
use rmcorr::oracle::{bisect_sign_change, criterion_report, exact_mes_fidelity, exact_tk, CriterionReport};
use rmcorr::qcore::{cre, make_state, mix};
use rmcorr::rng;
use rmcorr::sampler::{run_local_protocol, run_mes_fidelity_protocol};
use rmcorr::stats::{mean, sample_variance};
use rmcorr::{Partition, QuantumState, StateKind};

use crate::config::{Experiment, SweepConfig};
use crate::error::{CliError, CliResult};
use crate::regress::{regress, RegressionResult};
use crate::table::{num, Table};

pub const STAT_COLUMNS: [&str; 13] = [
    "x",
    "n_qubits",
    "N_U",
    "N_M",
    "replications",
    "mean",
    "variance",
    "oracle",
    "bias",
    "mean_abs_error",
    "se_abs_error",
    "mean_std_error",
    "status",
];

pub const CRITERION_COLUMNS: [&str; 5] = ["p", "ppt", "entropy", "p3ppt", "t2"];

/// Bisection width for witness crossings.
pub const CROSSING_TOL: f64 = 1e-3;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Crossing {
    pub criterion: String,
    /// `None` when the witness stays positive up to the last scanned point.
    pub p: Option<f64>,
    /// Smallest witness value seen on the scan while still detecting.
    pub min_positive: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub experiment: String,
    pub rows: usize,
    pub failed_rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regression: Option<RegressionResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub crossings: Vec<Crossing>,
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub table: Table,
    pub summary: SweepSummary,
}

/// One grid point of a statistical sweep.
struct Point {
    x: f64,
    state: QuantumState,
    partition: Option<Partition>,
    n_u: usize,
    n_m: usize,
    oracle: f64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Quantity {
    Overlap,
    MesFidelity,
}

fn quantity(exp: Experiment) -> Quantity {
    match exp {
        Experiment::FidelityCurve => Quantity::MesFidelity,
        _ => Quantity::Overlap,
    }
}

fn setup_point(cfg: &SweepConfig, x: f64) -> CliResult<Point> {
    let state_cfg = cfg.state.as_ref().ok_or_else(|| CliError::Config("missing state".into()))?;
    let mut spec = state_cfg.spec();
    let (mut n_u, mut n_m) = (cfg.n_u, cfg.n_m);
    let count = x as usize;
    match cfg.experiment {
        Experiment::VarVsNu => n_u = count,
        Experiment::VarVsN => spec.n = count,
        Experiment::VarVsNm | Experiment::NoisyStateEstimate => n_m = count,
        Experiment::FidelityCurve => spec.noise = x,
        Experiment::CriterionScan => unreachable!("criterion scans have no statistical points"),
    }
    let state = spec.build()?;
    match quantity(cfg.experiment) {
        Quantity::Overlap => {
            let partition = cfg.partition_for(spec.n)?;
            let oracle = exact_tk(&state, &partition)?;
            Ok(Point { x, state, partition: Some(partition), n_u, n_m, oracle })
        }
        Quantity::MesFidelity => {
            let oracle = exact_mes_fidelity(&state)?;
            Ok(Point { x, state, partition: None, n_u, n_m, oracle })
        }
    }
}

fn replicate(point: &Point, q: Quantity, seed: u64) -> CliResult<(f64, f64)> {
    let est = match q {
        Quantity::Overlap => {
            let ds = run_local_protocol(&point.state, point.n_u, point.n_m, seed)?;
            estimate_tk(&ds, point.partition.as_ref().expect("overlap points carry a partition"))?
        }
        Quantity::MesFidelity => {
            let ds = run_mes_fidelity_protocol(&point.state, point.n_u, point.n_m, seed)?;
            estimate_mes_fidelity(&ds)?
        }
    };
    Ok((est.value, est.std_error))
}

fn stat_row(point: &Point, cfg: &SweepConfig, results: &[(f64, f64)]) -> Vec<String> {
    let values: Vec<f64> = results.iter().map(|r| r.0).collect();
    let errors: Vec<f64> = values.iter().map(|v| (v - point.oracle).abs()).collect();
    let m = mean(&values);
    let reps = results.len();
    let opt = |x: f64| if reps >= 2 { num(x) } else { String::new() };
    vec![
        num(point.x),
        point.state.n_qubits().to_string(),
        point.n_u.to_string(),
        point.n_m.to_string(),
        cfg.replications.to_string(),
        num(m),
        opt(sample_variance(&values)),
        num(point.oracle),
        num(m - point.oracle),
        num(mean(&errors)),
        opt((sample_variance(&errors) / reps as f64).sqrt()),
        num(mean(&results.iter().map(|r| r.1).collect::<Vec<_>>())),
        "ok".to_string(),
    ]
}

fn failed_row(x: f64, cfg: &SweepConfig, err: &CliError) -> Vec<String> {
    let mut row = vec![String::new(); STAT_COLUMNS.len()];
    row[0] = num(x);
    row[4] = cfg.replications.to_string();
    row[12] = format!("error: {err}");
    row
}

fn statistical_sweep(cfg: &SweepConfig) -> CliResult<SweepOutput> {
    let q = quantity(cfg.experiment);
    let points: Vec<CliResult<Point>> = cfg.grid.par_iter().map(|&x| setup_point(cfg, x)).collect();
    let jobs: Vec<(usize, usize)> =
        (0..points.len()).flat_map(|g| (0..cfg.replications).map(move |r| (g, r))).collect();
    let outcomes: Vec<CliResult<(f64, f64)>> = jobs
        .par_iter()
        .map(|&(g, r)| match &points[g] {
            Ok(p) => replicate(p, q, rng::derive(cfg.seed, &[g as u64, r as u64])),
            Err(_) => Err(CliError::Usage("point setup failed".into())),
        })
        .collect();

    let mut table = Table::new(&STAT_COLUMNS);
    let mut failed = 0;
    for (g, point) in points.iter().enumerate() {
        let chunk = &outcomes[g * cfg.replications..(g + 1) * cfg.replications];
        let row = match point {
            Err(e) => Err(e),
            Ok(p) => match chunk.iter().find_map(|o| o.as_ref().err()) {
                Some(e) => Err(e),
                None => Ok(stat_row(p, cfg, &chunk.iter().map(|o| *o.as_ref().unwrap()).collect::<Vec<_>>())),
            },
        };
        match row {
            Ok(r) => table.push(r),
            Err(e) => {
                failed += 1;
                table.push(failed_row(cfg.grid[g], cfg, e));
            }
        }
    }
    let regression = variance_regression(cfg.experiment, &table);
    Ok(SweepOutput {
        summary: SweepSummary {
            experiment: cfg.experiment.name().to_string(),
            rows: table.rows.len(),
            failed_rows: failed,
            regression,
            crossings: Vec::new(),
        },
        table,
    })
}

/// `log2 Var` against `log2 x` (sample sizes) or `x` (qubit number).
pub fn variance_regression(exp: Experiment, table: &Table) -> Option<RegressionResult> {
    let log_x = match exp {
        Experiment::VarVsNu | Experiment::VarVsNm => true,
        Experiment::VarVsN => false,
        _ => return None,
    };
    let xs = table.numbers("x")?;
    let vs = table.numbers("variance")?;
    let (px, py): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(&vs)
        .filter_map(|(x, v)| match (x, v) {
            (Some(x), Some(v)) if *v > 0.0 => Some((if log_x { x.log2() } else { *x }, v.log2())),
            _ => None,
        })
        .unzip();
    regress(&px, &py).ok()
}

/// `(1 - p) |Psi+><Psi+| + p |0+><0+|`.
pub fn bell_zero_plus(p: f64) -> CliResult<QuantumState> {
    let bell = make_state(StateKind::Bell, 2, 0)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let zero_plus = QuantumState::pure(vec![cre(h), cre(h), cre(0.0), cre(0.0)], "zero_plus")?;
    Ok(mix(&bell, &zero_plus, p)?)
}

pub fn criterion_at(p: f64) -> CliResult<CriterionReport> {
    Ok(criterion_report(&bell_zero_plus(p)?, &Partition::from_sizes(&[1, 1])?)?)
}

/// First positive-to-nonpositive transition of each witness on a uniform
/// scan of `[0, p_max]`, refined by bisection.
pub fn criterion_crossings(p_max: f64, steps: usize) -> CliResult<Vec<Crossing>> {
    let ps: Vec<f64> = (0..=steps).map(|i| p_max * i as f64 / steps as f64).collect();
    let reports: Vec<CriterionReport> = ps.iter().map(|&p| criterion_at(p)).collect::<CliResult<_>>()?;
    let mut out = Vec::new();
    for name in CRITERION_COLUMNS[1..].iter() {
        let vals: Vec<f64> = reports.iter().map(|r| r.get(name).expect("known criterion")).collect();
        let mut crossing = None;
        let mut min_positive: Option<f64> = None;
        for i in 0..vals.len() {
            if vals[i] <= 0.0 {
                if i > 0 {
                    let f = |p: f64| {
                        criterion_at(p)
                            .map(|r| r.get(name).expect("known criterion"))
                            .map_err(|e| rmcorr::Error::InvalidArgument(e.to_string()))
                    };
                    crossing = Some(bisect_sign_change(f, ps[i - 1], ps[i], CROSSING_TOL)?);
                }
                break;
            }
            min_positive = Some(min_positive.map_or(vals[i], |m: f64| m.min(vals[i])));
        }
        out.push(Crossing { criterion: name.to_string(), p: crossing, min_positive });
    }
    Ok(out)
}

fn criterion_sweep(cfg: &SweepConfig) -> CliResult<SweepOutput> {
    let mut table = Table::new(&CRITERION_COLUMNS);
    for &p in &cfg.grid {
        let r = criterion_at(p)?;
        table.push(vec![num(p), num(r.ppt), num(r.entropy), num(r.p3ppt), num(r.t2)]);
    }
    let crossings = criterion_crossings(0.99, 99)?;
    Ok(SweepOutput {
        summary: SweepSummary {
            experiment: cfg.experiment.name().to_string(),
            rows: table.rows.len(),
            failed_rows: 0,
            regression: None,
            crossings,
        },
        table,
    })
}

pub fn run_sweep(cfg: &SweepConfig) -> CliResult<SweepOutput> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::CriterionScan => criterion_sweep(cfg),
        _ => statistical_sweep(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> SweepConfig {
        SweepConfig::from_json(json).unwrap()
    }

    #[test]
    fn statistical_rows_carry_the_oracle() {
        let c = cfg(r#"{"experiment":"var_vs_NU","state":{"kind":"ghz","n":3},"grid":[16,32],"N_M":5,"replications":4,"seed":1}"#);
        let out = run_sweep(&c).unwrap();
        assert_eq!(out.table.rows.len(), 2);
        for o in out.table.numbers("oracle").unwrap() {
            assert!((o.unwrap() - 0.125).abs() < 1e-12);
        }
        assert!(out.summary.regression.is_some());
        let again = run_sweep(&c).unwrap();
        assert_eq!(out.table, again.table);
    }

    #[test]
    fn cap_violations_fail_only_their_row() {
        let c = cfg(r#"{"experiment":"var_vs_n","state":{"kind":"ghz","n":3},"grid":[3,24],"N_U":4,"N_M":5,"replications":2}"#);
        let out = run_sweep(&c).unwrap();
        assert_eq!(out.summary.failed_rows, 1);
        let status = out.table.column("status").unwrap();
        assert_eq!(out.table.rows[0][status], "ok");
        assert!(out.table.rows[1][status].starts_with("error"));
    }

    #[test]
    fn fidelity_curve_tracks_noise() {
        let c = cfg(r#"{"experiment":"fidelity_curve","state":{"kind":"mes","n":2},"grid":[0.0,0.4,1.0],"N_U":50,"N_M":10,"replications":2}"#);
        let out = run_sweep(&c).unwrap();
        let oracle: Vec<f64> = out.table.numbers("oracle").unwrap().into_iter().map(Option::unwrap).collect();
        for (o, expect) in oracle.iter().zip([1.0, 0.7, 0.25]) {
            assert!((o - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn witness_crossings() {
        let cs = criterion_crossings(0.99, 99).unwrap();
        let get = |n: &str| cs.iter().find(|c| c.criterion == n).unwrap().clone();
        assert!((get("entropy").p.unwrap() - 0.5).abs() < 0.01);
        assert!(get("t2").p.is_none() && get("ppt").p.is_none());
    }
}
