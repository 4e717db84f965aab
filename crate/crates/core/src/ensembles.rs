//! Unitary ensembles: the 24-element single-qubit Clifford group, Haar
//! sampling, per-measurement product settings, and the twirling channel.

use nalgebra::DVector;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::qcore::{
    all_permutations, cre, czero, kron, permutation_operator, trace_product, CMatrix, Partition,
    C64,
};
use crate::rng;

pub const CLIFFORD_1Q_ORDER: usize = 24;
/// Largest party (in qubits) for which Haar party unitaries are drawn.
pub const MAX_HAAR_PARTY_QUBITS: usize = 5;
const UNITARY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnsembleId {
    #[serde(rename = "clifford1q")]
    Clifford1q,
    #[serde(rename = "haar1q")]
    Haar1q,
    /// One Haar unitary per party (global protocol).
    #[serde(rename = "haarNq")]
    HaarNq,
}

impl EnsembleId {
    pub fn name(self) -> &'static str {
        match self {
            EnsembleId::Clifford1q => "clifford1q",
            EnsembleId::Haar1q => "haar1q",
            EnsembleId::HaarNq => "haarNq",
        }
    }
}

fn phase_canonical(m: &CMatrix) -> CMatrix {
    let pivot = m.iter().copied().find(|z| z.norm() > 1e-9).unwrap_or(cre(1.0));
    let phase = pivot.conj() / pivot.norm();
    m.map(|z| z * phase)
}

fn approx_eq(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| (x - y).norm() < tol)
}

/// True if `a` and `b` differ only by a global phase.
pub fn equal_up_to_phase(a: &CMatrix, b: &CMatrix) -> bool {
    approx_eq(&phase_canonical(a), &phase_canonical(b), 1e-9)
}

fn hadamard() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[cre(h), cre(h), cre(h), cre(-h)])
}

fn phase_gate() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cre(1.0), czero(), czero(), C64::new(0.0, 1.0)])
}

fn clifford_table() -> &'static [CMatrix] {
    static TABLE: OnceLock<Vec<CMatrix>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // breadth-first closure of {H, S}, left-multiplying, in discovery order
        let gens = [hadamard(), phase_gate()];
        let mut elems = vec![CMatrix::identity(2, 2)];
        let mut next = 0;
        while next < elems.len() {
            let cur = elems[next].clone();
            for g in &gens {
                let cand = phase_canonical(&(g * &cur));
                if !elems.iter().any(|e| approx_eq(e, &cand, 1e-9)) {
                    elems.push(cand);
                }
            }
            next += 1;
        }
        assert_eq!(elems.len(), CLIFFORD_1Q_ORDER);
        elems
    })
}

pub fn clifford_1q(index: usize) -> Result<CMatrix> {
    clifford_table()
        .get(index)
        .cloned()
        .ok_or_else(|| Error::InvalidArgument(format!("Clifford index {index} not in [0, 24)")))
}

/// The frozen enumeration as JSON lines: `{"index", "re", "im"}` with
/// row-major matrix entries.
pub fn clifford_table_json() -> String {
    clifford_table()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let re: Vec<f64> = (0..2).flat_map(|r| (0..2).map(move |c| (r, c))).map(|rc| m[rc].re).collect();
            let im: Vec<f64> = (0..2).flat_map(|r| (0..2).map(move |c| (r, c))).map(|rc| m[rc].im).collect();
            serde_json::json!({ "index": i, "re": re, "im": im }).to_string() + "\n"
        })
        .collect()
}

pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && approx_eq(&(m.adjoint() * m), &CMatrix::identity(m.nrows(), m.nrows()), tol)
}

/// Haar-random `d x d` unitary (QR of a Ginibre matrix with phase fix).
pub fn haar_unitary(d: usize, rng: &mut rng::Rng) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DVector::from_fn(d, |i, _| {
        let z = r[(i, i)];
        if z.norm() > 0.0 { z / z.norm() } else { cre(1.0) }
    });
    q * CMatrix::from_diagonal(&phases)
}

#[derive(Clone, Debug, PartialEq)]
pub enum UnitarySpec {
    Clifford(u8),
    Matrix(CMatrix),
}

/// One tensor factor of a product unitary; the first listed qubit is the
/// most significant index of `matrix`.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    pub qubits: Vec<usize>,
    pub unitary: UnitarySpec,
}

impl Factor {
    pub fn matrix(&self) -> CMatrix {
        match &self.unitary {
            UnitarySpec::Clifford(i) => clifford_table()[*i as usize].clone(),
            UnitarySpec::Matrix(m) => m.clone(),
        }
    }
}

/// A sampled product unitary covering every qubit exactly once.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalUnitarySetting {
    ensemble: EnsembleId,
    n_qubits: usize,
    factors: Vec<Factor>,
}

impl LocalUnitarySetting {
    pub fn clifford(indices: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i as usize >= CLIFFORD_1Q_ORDER) {
            return Err(Error::InvalidArgument(format!("Clifford index {bad} not in [0, 24)")));
        }
        Ok(Self {
            ensemble: EnsembleId::Clifford1q,
            n_qubits: indices.len(),
            factors: indices
                .into_iter()
                .enumerate()
                .map(|(q, i)| Factor { qubits: vec![q], unitary: UnitarySpec::Clifford(i) })
                .collect(),
        })
    }

    /// Explicit single-qubit matrices, one per qubit.
    pub fn from_matrices(mats: Vec<CMatrix>) -> Result<Self> {
        let n = mats.len();
        let blocks = mats.into_iter().enumerate().map(|(q, m)| (vec![q], m)).collect();
        Self::from_blocks(blocks, n, EnsembleId::Haar1q)
    }

    /// Explicit multi-qubit blocks. Every qubit must be covered exactly once.
    pub fn from_blocks(blocks: Vec<(Vec<usize>, CMatrix)>, n: usize, ensemble: EnsembleId) -> Result<Self> {
        let mut covered = vec![false; n];
        let mut factors = Vec::with_capacity(blocks.len());
        for (qubits, m) in blocks {
            for &q in &qubits {
                if q >= n || std::mem::replace(&mut covered[q], true) {
                    return Err(Error::InvalidQubits(format!("block qubit {q} invalid or repeated")));
                }
            }
            if qubits.is_empty() || m.nrows() != 1 << qubits.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{}x{} block on {} qubits",
                    m.nrows(),
                    m.ncols(),
                    qubits.len()
                )));
            }
            if !is_unitary(&m, UNITARY_TOL) {
                return Err(Error::InvalidArgument("block matrix is not unitary".into()));
            }
            factors.push(Factor { qubits, unitary: UnitarySpec::Matrix(m) });
        }
        if covered.iter().any(|c| !c) {
            return Err(Error::InvalidQubits("setting does not cover every qubit".into()));
        }
        Ok(Self { ensemble, n_qubits: n, factors })
    }

    pub fn ensemble(&self) -> EnsembleId {
        self.ensemble
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Clifford indices per qubit, if this is a Clifford setting.
    pub fn clifford_indices(&self) -> Option<Vec<u8>> {
        self.factors
            .iter()
            .map(|f| match f.unitary {
                UnitarySpec::Clifford(i) => Some(i),
                UnitarySpec::Matrix(_) => None,
            })
            .collect()
    }
}

pub(crate) fn sample_setting_with(
    n: usize,
    ensemble: EnsembleId,
    parties: Option<&Partition>,
    rng: &mut rng::Rng,
) -> Result<LocalUnitarySetting> {
    if n == 0 {
        return Err(Error::InvalidArgument("settings need at least one qubit".into()));
    }
    match ensemble {
        EnsembleId::Clifford1q => {
            LocalUnitarySetting::clifford((0..n).map(|_| rng.random_range(0..CLIFFORD_1Q_ORDER as u8)).collect())
        }
        EnsembleId::Haar1q => LocalUnitarySetting::from_matrices((0..n).map(|_| haar_unitary(2, rng)).collect()),
        EnsembleId::HaarNq => {
            let whole;
            let parties = match parties {
                Some(p) => p,
                None => {
                    whole = Partition::new(vec![(0..n).collect()])?;
                    &whole
                }
            };
            parties.check_within(n)?;
            if let Some(g) = parties.groups().iter().find(|g| g.len() > MAX_HAAR_PARTY_QUBITS) {
                return Err(Error::CapExceeded(format!(
                    "party of {} qubits exceeds the {MAX_HAAR_PARTY_QUBITS}-qubit Haar cap",
                    g.len()
                )));
            }
            let mut blocks: Vec<(Vec<usize>, CMatrix)> =
                parties.groups().iter().map(|g| (g.clone(), haar_unitary(1 << g.len(), rng))).collect();
            let covered = parties.qubits();
            for q in (0..n).filter(|q| !covered.contains(q)) {
                blocks.push((vec![q], CMatrix::identity(2, 2)));
            }
            LocalUnitarySetting::from_blocks(blocks, n, EnsembleId::HaarNq)
        }
    }
}

/// Independent uniform draws per qubit; `HaarNq` draws one Haar unitary on
/// all `n` qubits.
pub fn sample_setting(n: usize, ensemble: EnsembleId, seed: u64) -> Result<LocalUnitarySetting> {
    sample_setting_with(n, ensemble, None, &mut rng::from_seed(seed))
}

/// One Haar unitary per party; qubits outside the partition get identity.
pub fn sample_party_setting(n: usize, parties: &Partition, seed: u64) -> Result<LocalUnitarySetting> {
    sample_setting_with(n, EnsembleId::HaarNq, Some(parties), &mut rng::from_seed(seed))
}

#[derive(Clone, Copy, Debug)]
pub enum TwirlEnsemble {
    /// Exact average over the 24 single-qubit Cliffords (a unitary 3-design).
    Clifford1q,
    /// Monte Carlo average over Haar unitaries of dimension `d`.
    Haar { d: usize, samples: usize, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct TwirlResult {
    pub mean: CMatrix,
    /// Entrywise standard error (real and imaginary parts separately);
    /// `None` for exact finite averages.
    pub std_error: Option<CMatrix>,
}

fn tensor_power(u: &CMatrix, t: usize) -> CMatrix {
    (0..t).fold(CMatrix::identity(1, 1), |acc, _| kron(&acc, u))
}

/// Average of `U^{⊗t} X U^{†⊗t}` over the ensemble.
pub fn twirl(x: &CMatrix, ensemble: TwirlEnsemble, t: usize) -> Result<TwirlResult> {
    if t == 0 {
        return Err(Error::InvalidArgument("twirl needs t >= 1".into()));
    }
    let d = match ensemble {
        TwirlEnsemble::Clifford1q => {
            if t > 3 {
                return Err(Error::Unsupported(format!(
                    "the single-qubit Clifford group is only a 3-design, t = {t} requested"
                )));
            }
            2
        }
        TwirlEnsemble::Haar { d, samples, .. } => {
            if samples < 2 {
                return Err(Error::InvalidArgument("Haar twirl needs at least two samples".into()));
            }
            d
        }
    };
    let dim = d.pow(t as u32);
    if x.nrows() != dim || x.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, expected {dim}x{dim}",
            x.nrows(),
            x.ncols()
        )));
    }
    match ensemble {
        TwirlEnsemble::Clifford1q => {
            let mut acc = CMatrix::zeros(dim, dim);
            for u in clifford_table() {
                let ut = tensor_power(u, t);
                acc += &ut * x * ut.adjoint();
            }
            Ok(TwirlResult { mean: acc / cre(CLIFFORD_1Q_ORDER as f64), std_error: None })
        }
        TwirlEnsemble::Haar { samples, seed, .. } => {
            let mut rng = rng::from_seed(seed);
            let mut sum = CMatrix::zeros(dim, dim);
            let mut sq_re = nalgebra::DMatrix::<f64>::zeros(dim, dim);
            let mut sq_im = nalgebra::DMatrix::<f64>::zeros(dim, dim);
            for _ in 0..samples {
                let ut = tensor_power(&haar_unitary(d, &mut rng), t);
                let y = &ut * x * ut.adjoint();
                for (i, z) in y.iter().enumerate() {
                    sq_re[i] += z.re * z.re;
                    sq_im[i] += z.im * z.im;
                }
                sum += y;
            }
            let m = samples as f64;
            let mean = sum / cre(m);
            let se = CMatrix::from_fn(dim, dim, |r, c| {
                let mu = mean[(r, c)];
                let var_re = (sq_re[(r, c)] / m - mu.re * mu.re).max(0.0) * m / (m - 1.0);
                let var_im = (sq_im[(r, c)] / m - mu.im * mu.im).max(0.0) * m / (m - 1.0);
                C64::new((var_re / m).sqrt(), (var_im / m).sqrt())
            });
            Ok(TwirlResult { mean, std_error: Some(se) })
        }
    }
}

/// Weingarten coefficients `C_{pi,sigma}` for `t <= 2`, indexed in the
/// order of [`all_permutations`].
#[derive(Clone, Debug)]
pub struct WeingartenTable {
    pub t: usize,
    pub d: usize,
    pub perms: Vec<Vec<usize>>,
    pub coeffs: Vec<Vec<f64>>,
}

impl WeingartenTable {
    pub fn new(d: usize, t: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument("Weingarten table needs d >= 2".into()));
        }
        let df = d as f64;
        let coeffs = match t {
            1 => vec![vec![1.0 / df]],
            2 => {
                let diag = 1.0 / (df * df - 1.0);
                let off = -1.0 / (df * (df * df - 1.0));
                vec![vec![diag, off], vec![off, diag]]
            }
            _ => return Err(Error::Unsupported(format!("Weingarten table for t = {t}"))),
        };
        Ok(Self { t, d, perms: all_permutations(t), coeffs })
    }

    pub fn row_sum(&self, row: usize) -> f64 {
        self.coeffs[row].iter().sum()
    }

    /// `(d-1)! / (d+t-1)!`.
    pub fn expected_row_sum(&self) -> f64 {
        (0..self.t).fold(1.0, |acc, j| acc / (self.d + j) as f64)
    }

    /// Haar twirl via `sum C_{pi,sigma} tr(X W_pi) W_sigma`.
    pub fn twirl(&self, x: &CMatrix) -> Result<CMatrix> {
        let ws = self
            .perms
            .iter()
            .map(|p| permutation_operator(p, self.d, self.t).map(|w| w.to_dense()))
            .collect::<Result<Vec<_>>>()?;
        let dim = ws[0].nrows();
        if x.nrows() != dim || x.ncols() != dim {
            return Err(Error::DimensionMismatch("operator does not match d^t".into()));
        }
        let mut out = CMatrix::zeros(dim, dim);
        for (i, wp) in ws.iter().enumerate() {
            let tr = trace_product(x, wp);
            for (j, ws_j) in ws.iter().enumerate() {
                out += ws_j * (tr * cre(self.coeffs[i][j]));
            }
        }
        Ok(out)
    }
}

/// The diagonal weight `X(a, b) = -(-d)^{delta_ab}`.
#[inline]
pub fn x_entry(a: usize, b: usize, d: usize) -> i64 {
    if a == b { d as i64 } else { -1 }
}

/// `diag(X(a1,a2)^2)`, `diag(X(a1,a2) X(a1,a3))`, `diag(X(a1,a2) X(a3,a4))`.
fn perm_sum_observables() -> [(usize, fn(&[usize], usize) -> i64); 3] {
    [
        (2, |a, d| x_entry(a[0], a[1], d).pow(2)),
        (3, |a, d| x_entry(a[0], a[1], d) * x_entry(a[0], a[2], d)),
        (4, |a, d| x_entry(a[0], a[1], d) * x_entry(a[2], a[3], d)),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct PermSumReport {
    pub d: usize,
    pub computed: [f64; 3],
    pub closed_form: [i64; 3],
    pub max_abs_error: f64,
    pub ok: bool,
}

pub fn perm_sum_closed_forms(d: usize) -> [i64; 3] {
    let d = d as i64;
    [d * (2 * d - 1) * (d + 1), 3 * d * d * (d + 1), d * (d + 1) * (d * d + 9 * d + 2)]
}

/// Brute-force `sum_sigma tr(W_sigma Q)` for the three diagonal observables,
/// materializing every permutation operator, against their closed forms.
pub fn verify_perm_sums(d: usize) -> Result<PermSumReport> {
    if !(2..=6).contains(&d) {
        return Err(Error::CapExceeded(format!("permutation sums are enumerated for 2 <= d <= 6, got {d}")));
    }
    let mut computed = [0.0; 3];
    for (slot, (t, obs)) in perm_sum_observables().into_iter().enumerate() {
        let mut total = 0.0;
        for p in all_permutations(t) {
            let w = permutation_operator(&p, d, t)?;
            let dense = w.to_dense();
            for a in 0..w.dim() {
                let diag = dense[(a, a)].re;
                if diag != 0.0 {
                    total += diag * obs(&w.digits(a), d) as f64;
                }
            }
        }
        computed[slot] = total;
    }
    let closed_form = perm_sum_closed_forms(d);
    let max_abs_error = computed
        .iter()
        .zip(closed_form)
        .map(|(c, e)| (c - e as f64).abs())
        .fold(0.0, f64::max);
    Ok(PermSumReport { d, computed, closed_form, max_abs_error, ok: max_abs_error < 1e-8 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random_mixed_state;
    use std::collections::HashMap;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn x_operator(d: usize) -> CMatrix {
        let dim = d * d;
        CMatrix::from_fn(dim, dim, |r, c| {
            if r == c { cre(x_entry(r / d, r % d, d) as f64) } else { czero() }
        })
    }

    fn swap(d: usize) -> CMatrix {
        permutation_operator(&[1, 0], d, 2).unwrap().to_dense()
    }

    #[test]
    fn clifford_enumeration_is_the_group() {
        assert_eq!(clifford_1q(0).unwrap(), CMatrix::identity(2, 2));
        assert!(clifford_1q(24).is_err());
        let all: Vec<CMatrix> = (0..24).map(|i| clifford_1q(i).unwrap()).collect();
        for (i, a) in all.iter().enumerate() {
            assert!(is_unitary(a, 1e-12));
            for b in &all[i + 1..] {
                assert!(!equal_up_to_phase(a, b));
            }
        }
        for a in &all {
            for b in &all {
                let p = a * b;
                assert_eq!(all.iter().filter(|c| equal_up_to_phase(c, &p)).count(), 1);
            }
        }
        assert_eq!(clifford_table_json().lines().count(), 24);
    }

    #[test]
    fn setting_sampling() {
        let n = 100_000;
        let s = sample_setting(n, EnsembleId::Clifford1q, 5).unwrap();
        let idx = s.clifford_indices().unwrap();
        let mut counts = HashMap::new();
        for i in idx {
            *counts.entry(i).or_insert(0usize) += 1;
        }
        let p = 1.0 / 24.0;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert_eq!(counts.len(), 24);
        for c in counts.values() {
            assert!((*c as f64 - n as f64 * p).abs() < 5.0 * sigma);
        }
        assert_eq!(sample_setting(7, EnsembleId::Haar1q, 3).unwrap(), sample_setting(7, EnsembleId::Haar1q, 3).unwrap());
        assert!(sample_setting(0, EnsembleId::Clifford1q, 1).is_err());
        assert!(sample_setting(6, EnsembleId::HaarNq, 1).is_err());
        let parties = Partition::from_sizes(&[2, 1]).unwrap();
        let g = sample_party_setting(4, &parties, 9).unwrap();
        assert_eq!(g.factors().len(), 3);
        assert!(g.factors().iter().all(|f| is_unitary(&f.matrix(), 1e-12)));
    }

    #[test]
    fn clifford_twirl_maps_x_to_swap() {
        let out = twirl(&x_operator(2), TwirlEnsemble::Clifford1q, 2).unwrap();
        assert!(max_abs(&(out.mean - swap(2))) < 1e-12);
    }

    #[test]
    fn twirl_of_pure_product_is_symmetric_projector() {
        for seed in 0..5 {
            let psi = crate::qcore::make_state(crate::qcore::StateKind::PureRandom, 1, seed).unwrap();
            let p = psi.density_matrix().unwrap();
            let out = twirl(&kron(&p, &p), TwirlEnsemble::Clifford1q, 2).unwrap().mean;
            let expected = (CMatrix::identity(4, 4) + swap(2)) / cre(6.0);
            assert!(max_abs(&(out - expected)) < 1e-12);
        }
    }

    #[test]
    fn one_design_depolarizes() {
        let a = CMatrix::from_fn(2, 2, |r, c| C64::new(r as f64 + 1.0, c as f64 - 0.3));
        let out = twirl(&a, TwirlEnsemble::Clifford1q, 1).unwrap().mean;
        let expected = CMatrix::identity(2, 2) * (a.trace() / cre(2.0));
        assert!(max_abs(&(out - expected)) < 1e-12);
    }

    #[test]
    fn twirl_errors() {
        assert!(twirl(&CMatrix::identity(16, 16), TwirlEnsemble::Clifford1q, 4).is_err());
        assert!(twirl(&CMatrix::identity(3, 3), TwirlEnsemble::Clifford1q, 2).is_err());
    }

    #[test]
    fn clifford_twirl_agrees_with_haar_and_weingarten() {
        let x = random_mixed_state(2, 1, 4).unwrap().density_matrix().unwrap()
            + CMatrix::from_fn(4, 4, |r, c| C64::new(0.1 * r as f64, -0.2 * c as f64));
        let exact = twirl(&x, TwirlEnsemble::Clifford1q, 2).unwrap().mean;
        let wg = WeingartenTable::new(2, 2).unwrap().twirl(&x).unwrap();
        assert!(max_abs(&(&exact - wg)) < 1e-12);

        let mc = twirl(&x, TwirlEnsemble::Haar { d: 2, samples: 10_000, seed: 17 }, 2).unwrap();
        let se = mc.std_error.unwrap();
        for i in 0..16 {
            let diff = mc.mean[i] - exact[i];
            assert!(diff.re.abs() <= 5.0 * se[i].re + 1e-12, "entry {i}: {diff} vs {}", se[i]);
            assert!(diff.im.abs() <= 5.0 * se[i].im + 1e-12, "entry {i}: {diff} vs {}", se[i]);
        }
    }

    #[test]
    fn twirl_is_idempotent() {
        let x = CMatrix::from_fn(4, 4, |r, c| C64::new((r * 3 + c) as f64, (r as f64) - (c as f64)));
        let once = twirl(&x, TwirlEnsemble::Clifford1q, 2).unwrap().mean;
        let twice = twirl(&once, TwirlEnsemble::Clifford1q, 2).unwrap().mean;
        assert!(max_abs(&(once - twice)) < 1e-12);
    }

    #[test]
    fn weingarten_invariants() {
        for d in [2, 3, 4] {
            let w = WeingartenTable::new(d, 2).unwrap();
            assert_eq!(w.coeffs[0][1], w.coeffs[1][0]);
            for row in 0..2 {
                assert!((w.row_sum(row) - w.expected_row_sum()).abs() < 1e-15);
            }
            // the Haar twirl of any operator commutes with U⊗U; spot-check
            // the projector property through the table itself
            let x = CMatrix::from_fn(d * d, d * d, |r, c| cre(((r + 2 * c) % 5) as f64));
            let once = w.twirl(&x).unwrap();
            assert!(max_abs(&(w.twirl(&once).unwrap() - &once)) < 1e-12);
        }
        assert!(WeingartenTable::new(2, 4).is_err());
    }

    #[test]
    fn perm_sums_small_dimensions() {
        // closed forms at d = 2 and 3, confirmed by hand enumeration
        assert_eq!(perm_sum_closed_forms(2), [18, 36, 144]);
        assert_eq!(perm_sum_closed_forms(3), [60, 108, 456]);
        for d in [2, 3] {
            let r = verify_perm_sums(d).unwrap();
            assert!(r.ok, "{r:?}");
        }
        assert!(verify_perm_sums(7).is_err());
    }
}
