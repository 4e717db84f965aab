//! Exact values of every estimated quantity, computed from state vectors and
//! density matrices, plus separability witnesses and finite-ensemble
//! expectations of the estimators.

use rayon::prelude::*;
use serde::Serialize;

use crate::ensembles::{LocalUnitarySetting, CLIFFORD_1Q_ORDER};
use crate::error::{Error, Result};
use crate::estimators::{mes_weight, party_weight, Kernel};
use crate::qcore::{
    apply_gate_pure, apply_product_unitary, cre, hermitian_eigenvalues, kron, outcome_distribution,
    partial_trace, partial_transpose_matrix, qubit_mask, trace_product, CMatrix, Partition, QuantumState,
    StateRepr, MAX_MIXED_QUBITS,
};
use crate::sampler::Protocol;
use crate::stats::neumaier_sum;

/// Largest `settings x outcome tuples` count the brute-force expectation
/// will enumerate.
pub const BRUTE_FORCE_CAP: f64 = 2e8;

/// Eigenvalues this close to zero count as zero in the PPT witness.
const EIGEN_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityVariant {
    /// `tr(rho sigma) / sqrt(tr rho^2 tr sigma^2)`
    Gm,
    /// `tr(rho sigma) / max(tr rho^2, tr sigma^2)`
    Max,
}

impl std::str::FromStr for FidelityVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gm" => Ok(Self::Gm),
            "max" => Ok(Self::Max),
            other => Err(Error::InvalidArgument(format!("unknown fidelity variant '{other}' (gm, max)"))),
        }
    }
}

/// Purity of the reduced state on `subset`; an empty subset gives 1.
pub fn exact_purity(state: &QuantumState, subset: &[usize]) -> Result<f64> {
    let n = state.n_qubits();
    if subset.is_empty() {
        return Ok(1.0);
    }
    if subset.len() == n && state.is_pure_repr() {
        return Ok(1.0);
    }
    // a pure state has equal purity on complementary sides
    if state.is_pure_repr() && 2 * subset.len() > n {
        let rest: Vec<usize> = (0..n).filter(|q| !subset.contains(q)).collect();
        return exact_purity(state, &rest);
    }
    Ok(partial_trace(state, subset)?.purity())
}

fn marginals(state: &QuantumState, partition: &Partition) -> Result<Vec<CMatrix>> {
    partition.groups().iter().map(|g| partial_trace(state, g)?.density_matrix()).collect()
}

/// `T_k = tr(rho ⊗_i rho_i)` with `rho` reduced to the partition's qubits.
pub fn exact_tk(state: &QuantumState, partition: &Partition) -> Result<f64> {
    partition.check_within(state.n_qubits())?;
    let margs = marginals(state, partition)?;
    let n = state.n_qubits();
    if let (StateRepr::Pure(psi), true) = (state.repr(), partition.qubits().len() == n) {
        // <psi| ⊗ rho_i |psi>
        let mut phi = psi.to_vec();
        for (g, m) in partition.groups().iter().zip(&margs) {
            apply_gate_pure(&mut phi, n, g, m);
        }
        let overlap: crate::qcore::C64 = psi.iter().zip(&phi).map(|(a, b)| a.conj() * b).sum();
        return Ok(overlap.re);
    }
    let qubits = partition.qubits();
    if qubits.len() > MAX_MIXED_QUBITS {
        return Err(Error::CapExceeded(format!("{} qubits exceed the density-matrix cap", qubits.len())));
    }
    // reorder so that each party is a contiguous block
    let mut rho = partial_trace(state, &qubits)?.density_matrix()?;
    let m = qubits.len();
    let mut start = 0;
    for (g, marg) in partition.groups().iter().zip(&margs) {
        let block: Vec<usize> = (start..start + g.len()).collect();
        for c in 0..rho.ncols() {
            apply_gate_pure(rho.column_mut(c).as_mut_slice(), m, &block, marg);
        }
        start += g.len();
    }
    Ok(rho.trace().re)
}

/// `⊗_i rho_i` as a dense matrix on the partition's qubits in party order.
pub fn marginal_product(state: &QuantumState, partition: &Partition) -> Result<CMatrix> {
    partition.check_within(state.n_qubits())?;
    if partition.qubits().len() > MAX_MIXED_QUBITS {
        return Err(Error::CapExceeded("marginal product too large to materialize".into()));
    }
    Ok(marginals(state, partition)?.iter().fold(CMatrix::identity(1, 1), |acc, m| kron(&acc, m)))
}

fn fidelity_from_parts(overlap: f64, p_rho: f64, p_sigma: f64, variant: FidelityVariant) -> Result<f64> {
    let denom = match variant {
        FidelityVariant::Gm => (p_rho * p_sigma).sqrt(),
        FidelityVariant::Max => p_rho.max(p_sigma),
    };
    if denom <= 0.0 || !denom.is_finite() {
        return Err(Error::Undefined {
            reason: "zero purity in fidelity denominator".into(),
            diagnostics: format!("tr rho^2 = {p_rho}, tr sigma^2 = {p_sigma}"),
        });
    }
    Ok(overlap / denom)
}

/// Superfidelity-type overlap between two density matrices.
pub fn exact_fidelity(rho: &CMatrix, sigma: &CMatrix, variant: FidelityVariant) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", rho.shape(), sigma.shape())));
    }
    let overlap = trace_product(rho, sigma).re;
    fidelity_from_parts(overlap, trace_product(rho, rho).re, trace_product(sigma, sigma).re, variant)
}

/// `-log2 F(rho, ⊗_i rho_i)`, without materializing the product.
pub fn exact_correlation(state: &QuantumState, partition: &Partition, variant: FidelityVariant) -> Result<f64> {
    let t = exact_tk(state, partition)?;
    let p_full = exact_purity(state, &partition.qubits())?;
    let mut p_prod = 1.0;
    for g in partition.groups() {
        p_prod *= exact_purity(state, g)?;
    }
    let f = fidelity_from_parts(t, p_full, p_prod, variant)?;
    Ok(-f.log2())
}

/// Minimum of the gm-variant correlation over all bipartitions of the parties.
pub fn exact_genuine_correlation(state: &QuantumState, parties: &Partition) -> Result<f64> {
    let k = parties.k();
    if k < 2 {
        return Err(Error::InvalidArgument("genuine correlation needs at least two parties".into()));
    }
    if k > 12 {
        return Err(Error::CapExceeded(format!("{k} parties exceed the bipartition cap of 12")));
    }
    let groups = parties.groups();
    let mut best = f64::INFINITY;
    // the last party always sits on the complement side
    for mask in 1usize..(1 << (k - 1)) {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for (i, g) in groups.iter().enumerate() {
            if mask >> i & 1 == 1 { a.extend(g) } else { b.extend(g) }
        }
        let c = exact_correlation(state, &Partition::new(vec![a, b])?, FidelityVariant::Gm)?;
        best = best.min(c);
    }
    Ok(best)
}

/// `||rho - ⊗_i rho_i||_HS^2` from the dense difference.
pub fn exact_hs_distance(state: &QuantumState, partition: &Partition) -> Result<f64> {
    let rho = partial_trace(state, &partition.qubits())?.density_matrix()?;
    let diff = rho - marginal_product(state, partition)?;
    Ok(trace_product(&diff, &diff.adjoint()).re)
}

fn mes_halves(state: &QuantumState) -> Result<usize> {
    let n = state.n_qubits();
    if !n.is_multiple_of(2) || n == 0 {
        return Err(Error::InvalidArgument(format!("MES fidelity needs an even qubit count, got {n}")));
    }
    Ok(n / 2)
}

/// `<Psi+| rho |Psi+>` with `|Psi+> = d^{-1/2} sum_i |i>|i>` across the halves.
pub fn exact_mes_fidelity(state: &QuantumState) -> Result<f64> {
    let half = mes_halves(state)?;
    let d = 1usize << half;
    let diag = |i: usize| i * d + i;
    let direct = match state.repr() {
        StateRepr::Pure(psi) => {
            let amp: crate::qcore::C64 = (0..d).map(|i| psi[diag(i)]).sum();
            amp.norm_sqr() / d as f64
        }
        StateRepr::Mixed(rho) => {
            let mut acc = crate::qcore::czero();
            for i in 0..d {
                for j in 0..d {
                    acc += rho[(diag(i), diag(j))];
                }
            }
            acc.re / d as f64
        }
    };
    if state.n_qubits() <= 8 {
        let swap_route = exact_mes_fidelity_swap(state)?;
        if (swap_route - direct).abs() > 1e-12 {
            return Err(Error::InvalidState(format!(
                "MES fidelity routes disagree: {direct} vs {swap_route}"
            )));
        }
    }
    Ok(direct)
}

/// `(1/d) tr(rho S^{T_B})` with a dense swap operator; limited to 8 qubits.
pub fn exact_mes_fidelity_swap(state: &QuantumState) -> Result<f64> {
    let half = mes_halves(state)?;
    let n = state.n_qubits();
    if n > 8 {
        return Err(Error::CapExceeded("dense swap route limited to 8 qubits".into()));
    }
    let d = 1usize << half;
    let mut swap = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            swap[(j * d + i, i * d + j)] = cre(1.0);
        }
    }
    let b: Vec<usize> = (half..n).collect();
    let st = partial_transpose_matrix(&swap, n, &b)?;
    Ok(trace_product(&state.density_matrix()?, &st).re / d as f64)
}

fn require_pure(state: &QuantumState, what: &str) -> Result<()> {
    if !state.is_pure_repr() && (state.purity() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("{what} is defined for pure states only")));
    }
    Ok(())
}

/// Pure-state concurrence `2^{1-n/2} sqrt((2^n - 2) - sum_S tr rho_S^2)` over
/// the nontrivial subsystems `S`.
pub fn exact_concurrence(state: &QuantumState) -> Result<f64> {
    require_pure(state, "concurrence")?;
    let n = state.n_qubits();
    if n > 16 {
        return Err(Error::CapExceeded(format!("{n} qubits: too many subsystems to enumerate")));
    }
    let mut sum = 0.0;
    for mask in 1usize..(1 << n) - 1 {
        let subset: Vec<usize> = (0..n).filter(|&q| mask >> (n - 1 - q) & 1 == 1).collect();
        sum += exact_purity(state, &subset)?;
    }
    let radicand = ((1u64 << n) as f64 - 2.0 - sum).max(0.0);
    Ok(2f64.powf(1.0 - n as f64 / 2.0) * radicand.sqrt())
}

/// `E_U sum_s P(s|U)^2` over local Clifford settings, from the twirl formula
/// `3^{-n} sum_{S ⊆ [n]} tr rho_S^2`.
pub fn collision_moment(state: &QuantumState) -> Result<f64> {
    let n = state.n_qubits();
    if n > 16 {
        return Err(Error::CapExceeded(format!("{n} qubits: too many subsystems to enumerate")));
    }
    let mut sum = 0.0;
    for mask in 0usize..(1 << n) {
        let subset: Vec<usize> = (0..n).filter(|&q| mask >> (n - 1 - q) & 1 == 1).collect();
        sum += exact_purity(state, &subset)?;
    }
    Ok(sum / 3f64.powi(n as i32))
}

/// `2 sqrt(1 - (3/2)^n K)` for a collision moment `K`.
pub fn concurrence_from_collision(k: f64, n: usize) -> f64 {
    2.0 * (1.0 - 1.5f64.powi(n as i32) * k).max(0.0).sqrt()
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CriterionReport {
    /// `-lambda_min(rho^{T_B})`
    pub ppt: f64,
    /// `tr rho_AB^2 - min(tr rho_A^2, tr rho_B^2)`
    pub entropy: f64,
    /// `(tr rho^2)^2 - tr((rho^{T_B})^3)`
    pub p3ppt: f64,
    /// `tr rho_AB^2 + tr rho_A^2 + tr rho_B^2 - 2 T_2 - 1`
    pub t2: f64,
}

impl CriterionReport {
    pub fn flags(&self) -> [(&'static str, bool); 4] {
        [
            ("ppt", self.ppt > 0.0),
            ("entropy", self.entropy > 0.0),
            ("p3ppt", self.p3ppt > 0.0),
            ("t2", self.t2 > 0.0),
        ]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "ppt" => Some(self.ppt),
            "entropy" => Some(self.entropy),
            "p3ppt" => Some(self.p3ppt),
            "t2" => Some(self.t2),
            _ => None,
        }
    }
}

/// Four entanglement witnesses across a bipartition; positive values detect
/// entanglement.
pub fn criterion_report(state: &QuantumState, bipartition: &Partition) -> Result<CriterionReport> {
    if bipartition.k() != 2 {
        return Err(Error::InvalidArgument(format!("criteria need a bipartition, got {} parties", bipartition.k())));
    }
    bipartition.check_within(state.n_qubits())?;
    let qubits = bipartition.qubits();
    if qubits.len() > MAX_MIXED_QUBITS {
        return Err(Error::CapExceeded("bipartite state too large".into()));
    }
    let rho = partial_trace(state, &qubits)?.density_matrix()?;
    let m = qubits.len();
    let b: Vec<usize> = (bipartition.groups()[0].len()..m).collect();
    let pt = partial_transpose_matrix(&rho, m, &b)?;
    let lmin = hermitian_eigenvalues(&pt)[0];
    let ppt = if lmin.abs() < EIGEN_FLOOR { 0.0 } else { -lmin };
    let p_ab = trace_product(&rho, &rho).re;
    let p_a = exact_purity(state, &bipartition.groups()[0])?;
    let p_b = exact_purity(state, &bipartition.groups()[1])?;
    let pt2 = &pt * &pt;
    let p3 = trace_product(&pt2, &pt).re;
    let t2 = exact_tk(state, bipartition)?;
    Ok(CriterionReport {
        ppt,
        entropy: p_ab - p_a.min(p_b),
        p3ppt: p_ab * p_ab - p3,
        t2: p_ab + p_a + p_b - 2.0 * t2 - 1.0,
    })
}

/// Root of `f` in `[lo, hi]` by bisection to width `tol`; `f(lo)` and `f(hi)`
/// must differ in sign.
pub fn bisect_sign_change<F: Fn(f64) -> Result<f64>>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::InvalidArgument(format!(
            "no sign change on [{lo}, {hi}]: f = {f_lo}, {f_hi}"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn clifford_settings(n_sides: usize) -> impl ParallelIterator<Item = Vec<u8>> {
    let total = CLIFFORD_1Q_ORDER.pow(n_sides as u32);
    (0..total).into_par_iter().map(move |mut idx| {
        let mut v = vec![0u8; n_sides];
        for q in (0..n_sides).rev() {
            v[q] = (idx % CLIFFORD_1Q_ORDER) as u8;
            idx /= CLIFFORD_1Q_ORDER;
        }
        v
    })
}

fn rotated_distribution(state: &QuantumState, indices: Vec<u8>, mask: &[bool]) -> Result<Vec<f64>> {
    let setting = LocalUnitarySetting::clifford(indices)?;
    Ok(outcome_distribution(&apply_product_unitary(state, &setting, mask)?))
}

fn check_budget(settings: f64, tuples: f64) -> Result<()> {
    if settings * tuples > BRUTE_FORCE_CAP {
        return Err(Error::CapExceeded(format!(
            "{settings} settings x {tuples} outcome tuples exceed the enumeration cap {BRUTE_FORCE_CAP}"
        )));
    }
    Ok(())
}

/// `E[T_k estimator term]` for one setting: every (k+1)-tuple of outcomes
/// weighted by its probability.
fn tk_tuple_expectation(probs: &[f64], masks: &[(u64, u32)]) -> f64 {
    let k = masks.len();
    let dim = probs.len();
    let mut idx = vec![0usize; k + 1];
    let mut terms = Vec::new();
    loop {
        let weight: f64 = idx.iter().map(|&s| probs[s]).product();
        if weight != 0.0 {
            let s0 = idx[0] as u64;
            let kernel: f64 = masks
                .iter()
                .enumerate()
                .map(|(m, &(mask, bits))| party_weight(Kernel::Local, s0, idx[m + 1] as u64, mask, bits))
                .product();
            terms.push(weight * kernel);
        }
        let mut pos = 0;
        loop {
            if pos > k {
                return neumaier_sum(terms);
            }
            idx[pos] += 1;
            if idx[pos] < dim {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Exact expectation of the per-setting estimator over every single-qubit
/// Clifford setting and every outcome tuple.
///
/// `local_cro` needs the partition and returns `E[T_k estimate]`;
/// `mes_fidelity` returns `E[fidelity estimate]`; `concurrence` returns the
/// expected collision moment `E_U sum_s P(s|U)^2`.
pub fn brute_force_estimator_expectation(
    state: &QuantumState,
    partition: Option<&Partition>,
    protocol: Protocol,
) -> Result<f64> {
    let n = state.n_qubits();
    if n > 4 {
        return Err(Error::CapExceeded(format!("{n} qubits: brute force is limited to 4")));
    }
    let settings = (CLIFFORD_1Q_ORDER as f64).powi(n as i32);
    let dim = (1usize << n) as f64;
    let per_setting: Vec<f64> = match protocol {
        Protocol::LocalCro => {
            let p = partition.ok_or_else(|| Error::InvalidArgument("local_cro needs a partition".into()))?;
            p.require_multipartite()?;
            p.check_within(n)?;
            check_budget(settings, dim.powi(p.k() as i32 + 1))?;
            let masks: Vec<(u64, u32)> =
                p.groups().iter().map(|g| (qubit_mask(n, g) as u64, g.len() as u32)).collect();
            clifford_settings(n)
                .map(|idx| Ok(tk_tuple_expectation(&rotated_distribution(state, idx, &[])?, &masks)))
                .collect::<Result<_>>()?
        }
        Protocol::Concurrence => {
            check_budget(settings, dim)?;
            clifford_settings(n)
                .map(|idx| {
                    let probs = rotated_distribution(state, idx, &[])?;
                    Ok(neumaier_sum(probs.iter().map(|p| p * p)))
                })
                .collect::<Result<_>>()?
        }
        Protocol::MesFidelity => {
            let half = mes_halves(state)?;
            check_budget((CLIFFORD_1Q_ORDER as f64).powi(half as i32), dim)?;
            let mask: Vec<bool> = (0..n).map(|q| q >= half).collect();
            let low = (1usize << half) - 1;
            clifford_settings(half)
                .map(|side| {
                    let full: Vec<u8> = side.iter().chain(&side).copied().collect();
                    let probs = rotated_distribution(state, full, &mask)?;
                    Ok(neumaier_sum(
                        probs.iter().enumerate().map(|(s, p)| p * mes_weight(((s >> half) ^ (s & low)).count_ones())),
                    ))
                })
                .collect::<Result<_>>()?
        }
        Protocol::GlobalCro => {
            return Err(Error::Unsupported(
                "the global protocol draws Haar unitaries, which cannot be enumerated".into(),
            ))
        }
    };
    Ok(neumaier_sum(per_setting.iter().copied()) / per_setting.len() as f64)
}

/// `E_U P(s|U)^2` for one fixed outcome `s`, over all local Clifford settings.
pub fn brute_force_fixed_outcome_moment(state: &QuantumState, outcome: usize) -> Result<f64> {
    let n = state.n_qubits();
    if n > 4 {
        return Err(Error::CapExceeded(format!("{n} qubits: brute force is limited to 4")));
    }
    if outcome >= 1 << n {
        return Err(Error::InvalidArgument(format!("outcome {outcome} out of range for {n} qubits")));
    }
    let values: Vec<f64> = clifford_settings(n)
        .map(|idx| Ok(rotated_distribution(state, idx, &[])?[outcome].powi(2)))
        .collect::<Result<_>>()?;
    Ok(neumaier_sum(values.iter().copied()) / values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{haar_unitary, sample_setting, EnsembleId};
    use crate::qcore::{depolarize, make_state, mix, random_mixed_state, realignment, tensor, StateKind, C64};
    use crate::rng;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    fn ghz(n: usize) -> QuantumState {
        make_state(StateKind::Ghz, n, 0).unwrap()
    }

    fn bell() -> QuantumState {
        make_state(StateKind::Bell, 2, 0).unwrap()
    }

    fn bb() -> Partition {
        Partition::from_sizes(&[1, 1]).unwrap()
    }

    fn pure_from(amps: &[C64]) -> QuantumState {
        QuantumState::pure(amps.to_vec(), "v").unwrap()
    }

    #[test]
    fn tk_examples() {
        for n in [3, 6, 9, 12, 15] {
            close(exact_tk(&ghz(n), &Partition::equal(n, 3).unwrap()).unwrap(), 0.125, 1e-12);
        }
        let prod = make_state(StateKind::ProductRandom, 4, 3).unwrap();
        close(exact_tk(&prod, &Partition::from_sizes(&[2, 1, 1]).unwrap()).unwrap(), 1.0, 1e-12);
        close(exact_tk(&bell(), &bb()).unwrap(), 0.25, 1e-12);
        // mixed path agrees with the pure path
        let g = ghz(3);
        let p = Partition::parse("0,2;1").unwrap();
        close(exact_tk(&g.to_mixed().unwrap(), &p).unwrap(), exact_tk(&g, &p).unwrap(), 1e-12);
    }

    #[test]
    fn tk_matches_dense_contraction() {
        for seed in 0..5 {
            let rho = random_mixed_state(3, 2, seed).unwrap();
            let p = Partition::parse("2;0").unwrap();
            let reduced = partial_trace(&rho, &p.qubits()).unwrap().density_matrix().unwrap();
            let dense = trace_product(&reduced, &marginal_product(&rho, &p).unwrap()).re;
            close(exact_tk(&rho, &p).unwrap(), dense, 1e-12);
        }
    }

    #[test]
    fn fidelity_examples() {
        let rho = random_mixed_state(2, 1, 4).unwrap().density_matrix().unwrap();
        close(exact_fidelity(&rho, &rho, FidelityVariant::Gm).unwrap(), 1.0, 1e-12);
        close(exact_fidelity(&rho, &rho, FidelityVariant::Max).unwrap(), 1.0, 1e-12);
        let b = bell();
        let prod = marginal_product(&b, &bb()).unwrap();
        close(exact_fidelity(&b.density_matrix().unwrap(), &prod, FidelityVariant::Gm).unwrap(), 0.5, 1e-12);
        for seed in 0..20 {
            let a = random_mixed_state(2, 1, seed).unwrap().density_matrix().unwrap();
            let c = random_mixed_state(2, 2, 100 + seed).unwrap().density_matrix().unwrap();
            let gm = exact_fidelity(&a, &c, FidelityVariant::Gm).unwrap();
            let mx = exact_fidelity(&a, &c, FidelityVariant::Max).unwrap();
            assert!(gm >= mx - 1e-12);
        }
        assert!(exact_fidelity(&rho, &CMatrix::zeros(4, 4), FidelityVariant::Gm).is_err());
        assert!(exact_fidelity(&rho, &CMatrix::zeros(2, 2), FidelityVariant::Gm).is_err());
    }

    #[test]
    fn correlation_examples() {
        close(exact_correlation(&bell(), &bb(), FidelityVariant::Gm).unwrap(), 1.0, 1e-12);
        let p3 = Partition::from_sizes(&[1, 1, 1]).unwrap();
        close(exact_correlation(&ghz(3), &p3, FidelityVariant::Gm).unwrap(), 1.5, 1e-12);
        let prod = make_state(StateKind::ProductRandom, 3, 1).unwrap();
        close(exact_correlation(&prod, &p3, FidelityVariant::Gm).unwrap(), 0.0, 1e-12);
    }

    #[test]
    fn correlation_is_additive_and_lu_invariant() {
        let mut r = rng::from_seed(5);
        for seed in 0..10 {
            let a = random_mixed_state(2, 1, seed).unwrap();
            let b = random_mixed_state(3, 1, 50 + seed).unwrap();
            let pa = bb();
            let pb = Partition::from_sizes(&[2, 1]).unwrap();
            let joint = Partition::new(vec![vec![0], vec![1], vec![2, 3], vec![4]]).unwrap();
            let ab = tensor(&a, &b).unwrap();
            let lhs = exact_correlation(&ab, &joint, FidelityVariant::Gm).unwrap();
            let rhs = exact_correlation(&a, &pa, FidelityVariant::Gm).unwrap()
                + exact_correlation(&b, &pb, FidelityVariant::Gm).unwrap();
            close(lhs, rhs, 1e-10);

            let blocks = vec![(vec![0, 1], haar_unitary(4, &mut r)), (vec![2], haar_unitary(2, &mut r))];
            let setting = LocalUnitarySetting::from_blocks(blocks, 3, EnsembleId::HaarNq).unwrap();
            let rotated = apply_product_unitary(&b, &setting, &[]).unwrap();
            close(
                exact_correlation(&rotated, &pb, FidelityVariant::Gm).unwrap(),
                exact_correlation(&b, &pb, FidelityVariant::Gm).unwrap(),
                1e-10,
            );
        }
    }

    #[test]
    fn genuine_correlation_examples() {
        let a = make_state(StateKind::PureRandom, 1, 2).unwrap();
        let bc = make_state(StateKind::PureRandom, 2, 3).unwrap();
        let p3 = Partition::from_sizes(&[1, 1, 1]).unwrap();
        close(exact_genuine_correlation(&tensor(&a, &bc).unwrap(), &p3).unwrap(), 0.0, 1e-12);
        // every bipartition of GHZ3 has T_2 = 1/4 and purities 1 and 1/2
        let expected = -(0.25f64 / 0.25f64.sqrt()).log2();
        close(exact_genuine_correlation(&ghz(3), &p3).unwrap(), expected, 1e-12);
        for seed in 0..10 {
            let rho = random_mixed_state(3, 2, seed).unwrap();
            let g = exact_genuine_correlation(&rho, &p3).unwrap();
            assert!(g <= exact_correlation(&rho, &p3, FidelityVariant::Gm).unwrap() + 1e-12);
        }
    }

    #[test]
    fn hilbert_schmidt_identity() {
        for seed in 0..10 {
            let rho = random_mixed_state(3, 2, seed).unwrap();
            let p = Partition::from_sizes(&[1, 1, 1]).unwrap();
            let prod: f64 = (0..3).map(|q| exact_purity(&rho, &[q]).unwrap()).product();
            let via_t = rho.purity() + prod - 2.0 * exact_tk(&rho, &p).unwrap();
            close(exact_hs_distance(&rho, &p).unwrap(), via_t, 1e-10);
        }
    }

    #[test]
    fn realigned_difference_norm() {
        for seed in 0..10 {
            let rho = random_mixed_state(2, 2, seed).unwrap();
            let split = bb();
            let diff = rho.density_matrix().unwrap() - marginal_product(&rho, &split).unwrap();
            let diff_state = QuantumState::mixed_unchecked(diff, "diff".into());
            let r = realignment(&diff_state, &split).unwrap();
            let lhs = trace_product(&r, &r.adjoint()).re;
            let rhs = rho.purity() * 1.0 + exact_purity(&rho, &[0]).unwrap() * exact_purity(&rho, &[1]).unwrap()
                - 2.0 * exact_tk(&rho, &split).unwrap();
            close(lhs, rhs, 1e-10);
        }
    }

    #[test]
    fn mes_fidelity_examples() {
        close(exact_mes_fidelity(&bell()).unwrap(), 1.0, 1e-12);
        let mixed = depolarize(&bell(), 1.0).unwrap();
        close(exact_mes_fidelity(&mixed).unwrap(), 0.25, 1e-12);
        let four = depolarize(&ghz(4), 1.0).unwrap();
        close(exact_mes_fidelity(&four).unwrap(), 1.0 / 16.0, 1e-12);
        for seed in 0..5 {
            let rho = random_mixed_state(4, 1, seed).unwrap();
            close(exact_mes_fidelity(&rho).unwrap(), exact_mes_fidelity_swap(&rho).unwrap(), 1e-12);
        }
        assert!(exact_mes_fidelity(&ghz(3)).is_err());
    }

    #[test]
    fn concurrence_examples() {
        close(exact_concurrence(&bell()).unwrap(), 1.0, 1e-12);
        close(exact_concurrence(&make_state(StateKind::ProductRandom, 3, 2).unwrap()).unwrap(), 0.0, 1e-7);
        close(exact_concurrence(&ghz(3)).unwrap(), 1.5f64.sqrt(), 1e-12);
        assert!(exact_concurrence(&depolarize(&bell(), 0.1).unwrap()).is_err());
        for n in 1..=3 {
            for seed in 0..3 {
                let psi = make_state(StateKind::PureRandom, n, seed).unwrap();
                let k = collision_moment(&psi).unwrap();
                close(concurrence_from_collision(k, n), exact_concurrence(&psi).unwrap(), 1e-10);
            }
        }
    }

    #[test]
    fn criterion_report_on_mixture_family() {
        let psi = bell();
        let zp = pure_from(&[cre(0.5f64.sqrt()), cre(0.5f64.sqrt()), cre(0.0), cre(0.0)]);
        let rho = mix(&psi, &zp, 0.7).unwrap();
        let r = criterion_report(&rho, &bb()).unwrap();
        assert!(r.t2 > 0.0 && r.ppt > 0.0);
        assert!(r.entropy < 0.0 && r.p3ppt < 0.0);
        // the entropy witness is (p - 1/2)(p - 1) on this family
        for p in [0.1, 0.3, 0.8] {
            let r = criterion_report(&mix(&psi, &zp, p).unwrap(), &bb()).unwrap();
            close(r.entropy, (p - 0.5) * (p - 1.0), 1e-12);
        }
        let bell_r = criterion_report(&psi, &bb()).unwrap();
        close(bell_r.ppt, 0.5, 1e-12);
        close(bell_r.t2, 0.5, 1e-12);
    }

    #[test]
    fn bell_diagonal_entropy_and_t2_agree() {
        // rho = (I + sum_i r_i sigma_i ⊗ sigma_i) / 4
        let paulis = [
            CMatrix::from_row_slice(2, 2, &[cre(0.0), cre(1.0), cre(1.0), cre(0.0)]),
            CMatrix::from_row_slice(2, 2, &[cre(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), cre(0.0)]),
            CMatrix::from_row_slice(2, 2, &[cre(1.0), cre(0.0), cre(0.0), cre(-1.0)]),
        ];
        let mut r = rng::from_seed(9);
        use rand::Rng as _;
        let mut checked = 0;
        while checked < 50 {
            let c: [f64; 3] = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
            let mut rho = CMatrix::identity(4, 4);
            for (ci, s) in c.iter().zip(&paulis) {
                rho += kron(s, s) * cre(*ci);
            }
            rho *= cre(0.25);
            if hermitian_eigenvalues(&rho)[0] < 0.0 || c.iter().map(|x| x * x).sum::<f64>() >= 1.0 {
                continue;
            }
            let st = QuantumState::mixed(rho, "bd").unwrap();
            let rep = criterion_report(&st, &bb()).unwrap();
            assert_eq!(rep.entropy > 0.0, rep.t2 > 0.0, "{c:?}: {rep:?}");
            checked += 1;
        }
    }

    #[test]
    fn separable_mixtures_never_trip_t2() {
        for seed in 0..30 {
            let mut rho: Option<QuantumState> = None;
            for j in 0..4 {
                let a = random_mixed_state(1, 1, seed * 10 + j).unwrap();
                let b = random_mixed_state(1, 1, 1000 + seed * 10 + j).unwrap();
                let prod = tensor(&a, &b).unwrap();
                rho = Some(match rho {
                    None => prod,
                    Some(acc) => mix(&acc, &prod, 1.0 / (j as f64 + 1.0)).unwrap(),
                });
            }
            let rep = criterion_report(&rho.unwrap(), &bb()).unwrap();
            assert!(rep.t2 <= 1e-10, "{rep:?}");
            assert!(rep.ppt <= 0.0, "{rep:?}");
        }
    }

    #[test]
    fn pure_t2_witness_detects_exactly_the_entangled_states() {
        let mut r = rng::from_seed(11);
        use rand::Rng as _;
        for trial in 0..40 {
            // Schmidt form sqrt(l0)|00> + sqrt(l1)|11>, one coefficient zero for products
            let l0: f64 = if trial % 4 == 0 { 1.0 } else { r.random_range(0.01..0.99) };
            let amps = [cre(l0.sqrt()), cre(0.0), cre(0.0), cre((1.0 - l0).sqrt())];
            let psi = pure_from(&amps);
            let setting = sample_setting(2, EnsembleId::Haar1q, trial).unwrap();
            let psi = apply_product_unitary(&psi, &setting, &[]).unwrap();
            let w = criterion_report(&psi, &bb()).unwrap().t2;
            let expected = 2.0 * (l0.powi(2) + (1.0 - l0).powi(2) - l0.powi(3) - (1.0 - l0).powi(3));
            close(w, expected, 1e-10);
            assert_eq!(w > 1e-12, l0 < 1.0);
        }
    }

    #[test]
    fn bisection_finds_roots() {
        let root = bisect_sign_change(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-9).unwrap();
        close(root, 2f64.sqrt(), 1e-9);
        assert!(bisect_sign_change(|x| Ok(x * x + 1.0), 0.0, 1.0, 1e-6).is_err());
    }

    #[test]
    fn brute_force_expectations() {
        close(
            brute_force_estimator_expectation(&bell(), Some(&bb()), Protocol::LocalCro).unwrap(),
            0.25,
            1e-10,
        );
        let dep = depolarize(&bell(), 0.5).unwrap();
        close(
            brute_force_estimator_expectation(&dep, Some(&bb()), Protocol::LocalCro).unwrap(),
            exact_tk(&dep, &bb()).unwrap(),
            1e-10,
        );
        close(brute_force_estimator_expectation(&dep, None, Protocol::MesFidelity).unwrap(), exact_mes_fidelity(&dep).unwrap(), 1e-10);
        let psi = make_state(StateKind::PureRandom, 2, 7).unwrap();
        let k = brute_force_estimator_expectation(&psi, None, Protocol::Concurrence).unwrap();
        close(k, collision_moment(&psi).unwrap(), 1e-10);
        // the collision moment is the same for every fixed outcome
        for s in 0..4 {
            close(4.0 * brute_force_fixed_outcome_moment(&psi, s).unwrap(), k, 1e-10);
        }
        assert!(brute_force_estimator_expectation(&ghz(5), Some(&bb()), Protocol::LocalCro).is_err());
        assert!(brute_force_estimator_expectation(&bell(), None, Protocol::LocalCro).is_err());
        assert!(brute_force_estimator_expectation(&bell(), Some(&bb()), Protocol::GlobalCro).is_err());
    }
}
