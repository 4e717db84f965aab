//! Postprocessing of measurement datasets into unbiased estimates.
//!
//! Every estimator computes one value per unitary setting and averages over
//! settings; the reported standard error is the sample standard deviation of
//! the per-setting values over `sqrt(N_U)`.

use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::qcore::{qubit_mask, Partition};
use crate::sampler::{MeasurementDataset, Protocol};
use crate::stats::{binomial, mean, neumaier_sum, sample_covariance, std_error};

/// Largest number of (k+1)-subsets [`tk_setting_direct`] will enumerate
/// (about `N_M = 60` for `k = 3`).
pub const DIRECT_ENUMERATION_CAP: f64 = 500_000.0;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct EstimateWithError {
    pub estimator_id: String,
    pub value: f64,
    pub std_error: f64,
    #[serde(rename = "N_U")]
    pub n_u: usize,
    #[serde(rename = "N_M")]
    pub n_m: usize,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub diagnostics: BTreeMap<String, f64>,
}

impl EstimateWithError {
    fn from_per_setting(id: &str, per_setting: &[f64], n_m: usize) -> Self {
        Self {
            estimator_id: id.to_string(),
            value: mean(per_setting),
            std_error: std_error(per_setting),
            n_u: per_setting.len(),
            n_m,
            diagnostics: BTreeMap::new(),
        }
    }

    /// |value - target| in units of the reported standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target).abs() / self.std_error
    }
}

/// `X(s, s') = -(-d)^{delta_{s,s'}}`: `d` when the outcomes agree, `-1` otherwise.
#[inline]
pub fn x_weight(s: u64, s_prime: u64, d: u64) -> f64 {
    if s == s_prime { d as f64 } else { -1.0 }
}

/// Product of per-bit weights, `2^m (-2)^{-hamming}`, for two `m`-bit strings
/// given as 0/1 digits.
pub fn x_weight_local(s: &[u8], s_prime: &[u8]) -> Result<f64> {
    if s.len() != s_prime.len() {
        return Err(Error::InvalidArgument(format!(
            "bitstrings of lengths {} and {} cannot be compared",
            s.len(),
            s_prime.len()
        )));
    }
    let h = s.iter().zip(s_prime).filter(|(a, b)| a != b).count() as u32;
    Ok(local_weight(s.len() as u32, h))
}

/// `2^m (-2)^{-h} = (-1)^h 2^{m-h}`.
#[inline]
fn local_weight(m: u32, h: u32) -> f64 {
    let mag = f64::from(2u32).powi(m as i32 - h as i32);
    if h.is_multiple_of(2) { mag } else { -mag }
}

/// `(-2)^{-h}`.
#[inline]
pub(crate) fn mes_weight(h: u32) -> f64 {
    let mag = 0.5f64.powi(h as i32);
    if h.is_multiple_of(2) { mag } else { -mag }
}

/// Which single-party weight the estimator uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    /// Product of single-qubit weights over the party (local protocol).
    Local,
    /// One weight with `d = 2^{|g|}` per party (global protocol).
    Global,
}

impl Kernel {
    fn for_protocol(p: Protocol) -> Self {
        match p {
            Protocol::GlobalCro => Kernel::Global,
            _ => Kernel::Local,
        }
    }
}

/// Party weight between two full-width shots.
#[inline]
pub(crate) fn party_weight(kernel: Kernel, a: u64, b: u64, mask: u64, m: u32) -> f64 {
    let diff = (a ^ b) & mask;
    match kernel {
        Kernel::Local => local_weight(m, diff.count_ones()),
        Kernel::Global => {
            if diff == 0 { f64::from(2u32).powi(m as i32) } else { -1.0 }
        }
    }
}

/// Dense `N_M x N_M` weight table for one party.
fn pair_weights(shots: &[u64], kernel: Kernel, mask: u64, m: u32) -> Vec<f64> {
    let n = shots.len();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = party_weight(kernel, shots[i], shots[j], mask, m);
        }
    }
    w
}

struct PartyMasks {
    masks: Vec<(u64, u32)>,
}

impl PartyMasks {
    fn new(n: usize, groups: &[Vec<usize>]) -> Self {
        Self { masks: groups.iter().map(|g| (qubit_mask(n, g) as u64, g.len() as u32)).collect() }
    }
}

/// Per-setting U-statistic over (k+1)-subsets `i_0 < i_1 < ... < i_k` of the
/// shots: `prod_m X_{g_m}(s_{i_0}, s_{i_m})`, normalized by `C(N_M, k+1)`.
/// The smallest index is the shared copy; party `m` takes the `m`-th
/// smallest of the rest.
///
/// Evaluated by a suffix-sum recursion over increasing chains, in
/// `O(k N_M^2)`.
pub fn tk_setting(shots: &[u64], n_qubits: usize, groups: &[Vec<usize>], kernel: Kernel) -> f64 {
    let n = shots.len();
    let k = groups.len();
    let masks = PartyMasks::new(n_qubits, groups);
    let weights: Vec<Vec<f64>> = masks.masks.iter().map(|&(mask, m)| pair_weights(shots, kernel, mask, m)).collect();
    let mut chain = vec![0.0; n];
    let mut totals = Vec::with_capacity(n);
    for i in 0..n {
        // chain[j]: sum over chains for parties m..k starting at shot j
        for j in (i + 1)..n {
            chain[j] = weights[k - 1][i * n + j];
        }
        for m in (0..k - 1).rev() {
            let mut suffix = 0.0;
            for j in (i + 1..n).rev() {
                let next = chain[j];
                chain[j] = weights[m][i * n + j] * suffix;
                suffix += next;
            }
        }
        totals.push(neumaier_sum(chain[i + 1..n].iter().copied()));
    }
    neumaier_sum(totals) / binomial(n, k + 1)
}

/// Reference evaluation of [`tk_setting`] by explicit subset enumeration.
pub fn tk_setting_direct(shots: &[u64], n_qubits: usize, groups: &[Vec<usize>], kernel: Kernel) -> Result<f64> {
    let n = shots.len();
    let k = groups.len();
    let count = binomial(n, k + 1);
    if count > DIRECT_ENUMERATION_CAP {
        return Err(Error::CapExceeded(format!(
            "{count} subsets exceed the direct-enumeration cap {DIRECT_ENUMERATION_CAP}"
        )));
    }
    if n < k + 1 {
        return Err(Error::InsufficientData(format!("{n} shots for {} copies", k + 1)));
    }
    let masks = PartyMasks::new(n_qubits, groups);
    let mut idx: Vec<usize> = (0..=k).collect();
    let mut terms = Vec::with_capacity(count as usize);
    loop {
        let first = shots[idx[0]];
        let term: f64 = masks
            .masks
            .iter()
            .enumerate()
            .map(|(m, &(mask, bits))| party_weight(kernel, first, shots[idx[m + 1]], mask, bits))
            .product();
        terms.push(term);
        // next combination in lexicographic order
        let mut pos = k as isize;
        while pos >= 0 && idx[pos as usize] == n - (k + 1) + pos as usize {
            pos -= 1;
        }
        if pos < 0 {
            break;
        }
        let p = pos as usize;
        idx[p] += 1;
        for q in p + 1..=k {
            idx[q] = idx[q - 1] + 1;
        }
    }
    Ok(neumaier_sum(terms) / count)
}

/// `(N_M (N_M - 1))^{-1} sum_{i != j} X(s_i, s_j)` on one party.
fn purity_setting(shots: &[u64], n_qubits: usize, subset: &[usize], kernel: Kernel) -> f64 {
    let n = shots.len();
    let mask = qubit_mask(n_qubits, subset) as u64;
    let m = subset.len() as u32;
    let mut terms = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            terms.push(party_weight(kernel, shots[i], shots[j], mask, m));
        }
    }
    2.0 * neumaier_sum(terms) / (n * (n - 1)) as f64
}

fn require_protocol(ds: &MeasurementDataset, allowed: &[Protocol]) -> Result<()> {
    if allowed.contains(&ds.protocol) {
        Ok(())
    } else {
        Err(Error::WrongProtocol {
            expected: allowed.iter().map(|p| p.name()).collect::<Vec<_>>().join(" or "),
            found: ds.protocol.name().to_string(),
        })
    }
}

/// Global datasets only support parties that were rotated as a block.
fn check_against_hint(ds: &MeasurementDataset, groups: &[Vec<usize>]) -> Result<()> {
    if ds.protocol != Protocol::GlobalCro {
        return Ok(());
    }
    let hint = ds
        .partition_hint
        .as_ref()
        .ok_or_else(|| Error::PartitionMismatch("global dataset carries no partition".into()))?;
    for g in groups {
        if !hint.groups().iter().any(|h| h == g) {
            return Err(Error::PartitionMismatch(format!(
                "group {g:?} is not one of the measured parties {hint}"
            )));
        }
    }
    Ok(())
}

fn per_setting<F>(ds: &MeasurementDataset, f: F) -> Vec<f64>
where
    F: Fn(&[u64]) -> f64 + Sync,
{
    ds.shots.par_iter().map(|s| f(s)).collect()
}

fn tk_inputs(ds: &MeasurementDataset, partition: &Partition) -> Result<()> {
    require_protocol(ds, &[Protocol::LocalCro, Protocol::GlobalCro])?;
    partition.require_multipartite()?;
    partition.check_within(ds.n_qubits)?;
    let k = partition.k();
    if ds.n_m < k + 1 {
        return Err(Error::InsufficientData(format!(
            "T_{k} needs N_M >= {}, dataset has N_M = {}",
            k + 1,
            ds.n_m
        )));
    }
    check_against_hint(ds, partition.groups())
}

/// Per-setting values of the T_k U-statistic with an explicit kernel choice.
pub fn tk_per_setting_with_kernel(ds: &MeasurementDataset, partition: &Partition, kernel: Kernel) -> Result<Vec<f64>> {
    tk_inputs(ds, partition)?;
    if kernel == Kernel::Global && ds.protocol == Protocol::LocalCro && partition.groups().iter().any(|g| g.len() > 1) {
        return Err(Error::PartitionMismatch(
            "the single-party kernel on local data needs one qubit per party".into(),
        ));
    }
    let n = ds.n_qubits;
    Ok(per_setting(ds, |shots| tk_setting(shots, n, partition.groups(), kernel)))
}

pub fn tk_per_setting(ds: &MeasurementDataset, partition: &Partition) -> Result<Vec<f64>> {
    tk_per_setting_with_kernel(ds, partition, Kernel::for_protocol(ds.protocol))
}

pub fn estimate_tk_with_kernel(ds: &MeasurementDataset, partition: &Partition, kernel: Kernel) -> Result<EstimateWithError> {
    let values = tk_per_setting_with_kernel(ds, partition, kernel)?;
    Ok(EstimateWithError::from_per_setting(&format!("T_{}", partition.k()), &values, ds.n_m))
}

/// Correlation overlap `T_k = tr(rho ⊗_i rho_i)`.
pub fn estimate_tk(ds: &MeasurementDataset, partition: &Partition) -> Result<EstimateWithError> {
    estimate_tk_with_kernel(ds, partition, Kernel::for_protocol(ds.protocol))
}

pub fn purity_per_setting(ds: &MeasurementDataset, subset: &[usize]) -> Result<Vec<f64>> {
    require_protocol(ds, &[Protocol::LocalCro, Protocol::GlobalCro, Protocol::Concurrence])?;
    if subset.is_empty() {
        return Err(Error::InvalidQubits("purity needs a nonempty subset".into()));
    }
    Partition::new(vec![subset.to_vec()])?.check_within(ds.n_qubits)?;
    if ds.n_m < 2 {
        return Err(Error::InsufficientData("purity needs N_M >= 2".into()));
    }
    check_against_hint(ds, &[subset.to_vec()])?;
    let n = ds.n_qubits;
    let kernel = Kernel::for_protocol(ds.protocol);
    Ok(per_setting(ds, |shots| purity_setting(shots, n, subset, kernel)))
}

/// `tr(rho_S^2)` for the reduced state on `subset`.
pub fn estimate_purity(ds: &MeasurementDataset, subset: &[usize]) -> Result<EstimateWithError> {
    let values = purity_per_setting(ds, subset)?;
    Ok(EstimateWithError::from_per_setting("purity", &values, ds.n_m))
}

/// Delta-method standard error of `f(mean_1, ..., mean_p)` from per-setting
/// component series and the gradient of `f` at the means.
fn propagated_error(series: &[Vec<f64>], grad: &[f64]) -> f64 {
    let n_u = series[0].len() as f64;
    let mut var = 0.0;
    for (a, ga) in series.iter().zip(grad) {
        for (b, gb) in series.iter().zip(grad) {
            var += ga * gb * sample_covariance(a, b);
        }
    }
    (var.max(0.0) / n_u).sqrt()
}

/// Total correlation `-log2(T_k / sqrt(tr rho^2 prod tr rho_i^2))`, with the
/// full-state purity taken on the union of the partition's qubits.
pub fn estimate_correlation(ds: &MeasurementDataset, partition: &Partition) -> Result<EstimateWithError> {
    let t = tk_per_setting(ds, partition)?;
    let mut series = vec![t];
    series.push(purity_per_setting(ds, &partition.qubits())?);
    for g in partition.groups() {
        series.push(purity_per_setting(ds, g)?);
    }
    let means: Vec<f64> = series.iter().map(|s| mean(s)).collect();
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("t_hat".to_string(), means[0]);
    diagnostics.insert("purity_full".to_string(), means[1]);
    for (i, m) in means[2..].iter().enumerate() {
        diagnostics.insert(format!("purity_{i}"), *m);
    }
    if means.iter().any(|&m| m <= 0.0) {
        let diag = diagnostics.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ");
        return Err(Error::Undefined {
            reason: "nonpositive overlap or purity estimate".into(),
            diagnostics: diag,
        });
    }
    let ln2 = std::f64::consts::LN_2;
    let value = -means[0].log2() + 0.5 * means[1..].iter().map(|m| m.log2()).sum::<f64>();
    let mut grad = vec![-1.0 / (means[0] * ln2)];
    grad.extend(means[1..].iter().map(|m| 0.5 / (m * ln2)));
    Ok(EstimateWithError {
        estimator_id: format!("C_{}", partition.k()),
        value,
        std_error: propagated_error(&series, &grad),
        n_u: ds.n_u,
        n_m: ds.n_m,
        diagnostics,
    })
}

/// Fidelity with the maximally entangled state between the two halves from
/// `U ⊗ U*` data: mean over shots of `(-2)^{-hamming(s_A, s_B)}`.
pub fn estimate_mes_fidelity(ds: &MeasurementDataset) -> Result<EstimateWithError> {
    require_protocol(ds, &[Protocol::MesFidelity])?;
    let half = ds.n_qubits / 2;
    let low = (1u64 << half) - 1;
    let values = per_setting(ds, |shots| {
        neumaier_sum(shots.iter().map(|&s| mes_weight(((s >> half) ^ (s & low)).count_ones()))) / shots.len() as f64
    });
    Ok(EstimateWithError::from_per_setting("mes_fidelity", &values, ds.n_m))
}

fn collision_fraction(shots: &[u64]) -> f64 {
    let n = shots.len();
    let mut sorted = shots.to_vec();
    sorted.sort_unstable();
    let pairs: usize = sorted.chunk_by(|a, b| a == b).map(|c| c.len() * (c.len() - 1)).sum();
    pairs as f64 / (n * (n - 1)) as f64
}

fn concurrence_from_moment(scaled: f64, scaled_se: f64, id: &str, ds: &MeasurementDataset, raw: f64) -> EstimateWithError {
    let radicand = 1.0 - scaled;
    let value = 2.0 * radicand.max(0.0).sqrt();
    // delta method while the radicand is resolved from zero, otherwise the
    // one-sigma width of 2 sqrt(r) at r = 0
    let std_error = if radicand > scaled_se {
        scaled_se / radicand.sqrt()
    } else {
        2.0 * scaled_se.sqrt()
    };
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("radicand".to_string(), radicand);
    diagnostics.insert("collision_moment".to_string(), raw);
    EstimateWithError { estimator_id: id.to_string(), value, std_error, n_u: ds.n_u, n_m: ds.n_m, diagnostics }
}

fn concurrence_inputs(ds: &MeasurementDataset) -> Result<()> {
    require_protocol(ds, &[Protocol::Concurrence])?;
    if ds.n_m < 2 {
        return Err(Error::InsufficientData("concurrence needs N_M >= 2".into()));
    }
    Ok(())
}

/// Pure-state concurrence `2 sqrt(1 - (3/2)^n E_U sum_s P(s|U)^2)`, the
/// collision moment estimated from ordered shot pairs per setting. A negative
/// radicand is clamped to zero and kept in the diagnostics.
pub fn estimate_concurrence(ds: &MeasurementDataset) -> Result<EstimateWithError> {
    concurrence_inputs(ds)?;
    let k = per_setting(ds, collision_fraction);
    let scale = 1.5f64.powi(ds.n_qubits as i32);
    Ok(concurrence_from_moment(scale * mean(&k), scale * std_error(&k), "concurrence", ds, mean(&k)))
}

/// Single-outcome variant `2 sqrt(1 - 3^n E_U P(s|U)^2)` for one fixed
/// bitstring `s`.
pub fn estimate_concurrence_fixed_outcome(ds: &MeasurementDataset, outcome: u64) -> Result<EstimateWithError> {
    concurrence_inputs(ds)?;
    let n_m = ds.n_m;
    let p2 = per_setting(ds, |shots| {
        let c = shots.iter().filter(|&&s| s == outcome).count();
        (c * c.saturating_sub(1)) as f64 / (n_m * (n_m - 1)) as f64
    });
    let scale = 3f64.powi(ds.n_qubits as i32);
    Ok(concurrence_from_moment(scale * mean(&p2), scale * std_error(&p2), "concurrence_fixed_s", ds, mean(&p2)))
}

/// `tr rho_AB^2 + tr rho_A^2 + tr rho_B^2 - 2 T_2 - 1`; positive values
/// certify entanglement across the bipartition.
pub fn estimate_t2_witness(ds: &MeasurementDataset, bipartition: &Partition) -> Result<EstimateWithError> {
    require_protocol(ds, &[Protocol::LocalCro])?;
    if bipartition.k() != 2 {
        return Err(Error::InvalidArgument(format!("the T_2 witness needs two parties, got {}", bipartition.k())));
    }
    let t = tk_per_setting(ds, bipartition)?;
    let ab = purity_per_setting(ds, &bipartition.qubits())?;
    let a = purity_per_setting(ds, &bipartition.groups()[0])?;
    let b = purity_per_setting(ds, &bipartition.groups()[1])?;
    let w: Vec<f64> = (0..t.len()).map(|i| ab[i] + a[i] + b[i] - 2.0 * t[i] - 1.0).collect();
    Ok(EstimateWithError::from_per_setting("t2_witness", &w, ds.n_m))
}
