//! Dense multi-qubit states and the structural operators acting on them.
//!
//! Basis index convention: qubit 0 is the most significant bit, so for `n`
//! qubits the bit of qubit `q` sits at position `n - 1 - q`.

use nalgebra::{Complex, DMatrix};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::ensembles::LocalUnitarySetting;
use crate::error::{Error, Result};
use crate::rng;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

pub const MAX_PURE_QUBITS: usize = 22;
pub const MAX_MIXED_QUBITS: usize = 12;
/// Upper bound on `t * d^t` for materialized permutation operators.
pub const PERMUTATION_CAP: usize = 1 << 13;

const NORM_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-8;
/// Full eigen-validation of user-supplied density matrices stops here.
const PSD_CHECK_MAX_QUBITS: usize = 8;

#[inline]
pub fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

#[inline]
pub fn cre(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[inline]
fn bit_of(n: usize, q: usize) -> usize {
    1usize << (n - 1 - q)
}

/// Scatter the bits of `sub` (first listed qubit most significant) onto the
/// positions of `qubits` in an `n`-qubit index.
#[inline]
pub fn scatter_bits(sub: usize, n: usize, qubits: &[usize]) -> usize {
    let m = qubits.len();
    qubits.iter().enumerate().fold(0usize, |acc, (j, &q)| {
        if (sub >> (m - 1 - j)) & 1 == 1 {
            acc | bit_of(n, q)
        } else {
            acc
        }
    })
}

/// Inverse of [`scatter_bits`]: read the bits of `qubits` out of `index`.
#[inline]
pub fn gather_bits(index: usize, n: usize, qubits: &[usize]) -> usize {
    qubits.iter().fold(0usize, |acc, &q| {
        (acc << 1) | usize::from(index & bit_of(n, q) != 0)
    })
}

/// Bit mask covering `qubits` in an `n`-qubit index.
pub fn qubit_mask(n: usize, qubits: &[usize]) -> usize {
    qubits.iter().fold(0, |acc, &q| acc | bit_of(n, q))
}

fn complement(n: usize, qubits: &[usize]) -> Vec<usize> {
    (0..n).filter(|q| !qubits.contains(q)).collect()
}

fn check_qubits(n: usize, qubits: &[usize], what: &str) -> Result<()> {
    if qubits.is_empty() {
        return Err(Error::InvalidQubits(format!("{what}: empty qubit list")));
    }
    for (i, &q) in qubits.iter().enumerate() {
        if q >= n {
            return Err(Error::InvalidQubits(format!(
                "{what}: qubit {q} out of range for {n} qubits"
            )));
        }
        if qubits[..i].contains(&q) {
            return Err(Error::InvalidQubits(format!("{what}: qubit {q} repeated")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub enum StateRepr {
    Pure(Vec<C64>),
    Mixed(CMatrix),
}

/// A validated pure or mixed state on `n_qubits` qubits.
#[derive(Clone, Debug)]
pub struct QuantumState {
    n_qubits: usize,
    repr: StateRepr,
    label: String,
}

impl QuantumState {
    pub fn pure(amplitudes: Vec<C64>, label: impl Into<String>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "amplitude vector length {len} is not 2^n with n >= 1"
            )));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_PURE_QUBITS {
            return Err(Error::CapExceeded(format!(
                "pure states are limited to {MAX_PURE_QUBITS} qubits, got {n}"
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(Self {
            n_qubits: n,
            repr: StateRepr::Pure(amplitudes),
            label: label.into(),
        })
    }

    pub fn mixed(rho: CMatrix, label: impl Into<String>) -> Result<Self> {
        let d = rho.nrows();
        if d != rho.ncols() || d < 2 || !d.is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "density matrix shape {}x{} is not 2^n x 2^n",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let n = d.trailing_zeros() as usize;
        if n > MAX_MIXED_QUBITS {
            return Err(Error::CapExceeded(format!(
                "density matrices are limited to {MAX_MIXED_QUBITS} qubits, got {n}"
            )));
        }
        let herm_err = (&rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_err > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm_err:e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        if n <= PSD_CHECK_MAX_QUBITS {
            let min = hermitian_eigenvalues(&rho).into_iter().fold(f64::INFINITY, f64::min);
            if min < -PSD_TOL {
                return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(Self {
            n_qubits: n,
            repr: StateRepr::Mixed(rho),
            label: label.into(),
        })
    }

    /// Wraps a matrix that is a density matrix by construction.
    pub(crate) fn mixed_unchecked(rho: CMatrix, label: String) -> Self {
        let n = rho.nrows().trailing_zeros() as usize;
        Self {
            n_qubits: n,
            repr: StateRepr::Mixed(rho),
            label,
        }
    }

    pub(crate) fn pure_unchecked(amps: Vec<C64>, label: String) -> Self {
        let n = amps.len().trailing_zeros() as usize;
        Self {
            n_qubits: n,
            repr: StateRepr::Pure(amps),
            label,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn repr(&self) -> &StateRepr {
        &self.repr
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn is_pure_repr(&self) -> bool {
        matches!(self.repr, StateRepr::Pure(_))
    }

    pub fn amplitudes(&self) -> Option<&[C64]> {
        match &self.repr {
            StateRepr::Pure(v) => Some(v),
            StateRepr::Mixed(_) => None,
        }
    }

    /// Density matrix, materializing `|psi><psi|` for pure states.
    pub fn density_matrix(&self) -> Result<CMatrix> {
        match &self.repr {
            StateRepr::Mixed(m) => Ok(m.clone()),
            StateRepr::Pure(v) => {
                if self.n_qubits > MAX_MIXED_QUBITS {
                    return Err(Error::CapExceeded(format!(
                        "cannot materialize a {}-qubit density matrix (cap {MAX_MIXED_QUBITS})",
                        self.n_qubits
                    )));
                }
                let d = v.len();
                Ok(CMatrix::from_fn(d, d, |r, c| v[r] * v[c].conj()))
            }
        }
    }

    pub fn to_mixed(&self) -> Result<Self> {
        Ok(Self::mixed_unchecked(self.density_matrix()?, self.label.clone()))
    }

    /// tr(rho^2).
    pub fn purity(&self) -> f64 {
        match &self.repr {
            StateRepr::Pure(_) => 1.0,
            StateRepr::Mixed(m) => trace_product(m, m).re,
        }
    }
}

/// tr(AB) without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = czero();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let sym = (m + m.adjoint()) * cre(0.5);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Tensor product of two states; qubits of `b` follow those of `a`.
pub fn tensor(a: &QuantumState, b: &QuantumState) -> Result<QuantumState> {
    let label = format!("{}⊗{}", a.label, b.label);
    match (&a.repr, &b.repr) {
        (StateRepr::Pure(x), StateRepr::Pure(y)) => {
            if a.n_qubits + b.n_qubits > MAX_PURE_QUBITS {
                return Err(Error::CapExceeded("tensor product too large".into()));
            }
            let amps = x.iter().flat_map(|&p| y.iter().map(move |&q| p * q)).collect();
            Ok(QuantumState::pure_unchecked(amps, label))
        }
        _ => {
            if a.n_qubits + b.n_qubits > MAX_MIXED_QUBITS {
                return Err(Error::CapExceeded("tensor product too large".into()));
            }
            Ok(QuantumState::mixed_unchecked(
                kron(&a.density_matrix()?, &b.density_matrix()?),
                label,
            ))
        }
    }
}

/// Ordered disjoint grouping of qubit indices into parties.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    groups: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(groups: Vec<Vec<usize>>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidArgument("partition has no groups".into()));
        }
        let mut seen = Vec::new();
        for g in &groups {
            if g.is_empty() {
                return Err(Error::InvalidArgument("partition group is empty".into()));
            }
            for &q in g {
                if seen.contains(&q) {
                    return Err(Error::InvalidArgument(format!(
                        "qubit {q} appears in more than one group"
                    )));
                }
                seen.push(q);
            }
        }
        Ok(Self { groups })
    }

    /// Consecutive groups of the given sizes starting at qubit 0.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        let mut next = 0;
        let groups = sizes
            .iter()
            .map(|&s| {
                let g: Vec<usize> = (next..next + s).collect();
                next += s;
                g
            })
            .collect();
        Self::new(groups)
    }

    /// `k` consecutive groups of equal size over `n` qubits.
    pub fn equal(n: usize, k: usize) -> Result<Self> {
        if k == 0 || !n.is_multiple_of(k) {
            return Err(Error::InvalidArgument(format!(
                "{n} qubits cannot be split into {k} equal parties"
            )));
        }
        Self::from_sizes(&vec![n / k; k])
    }

    /// Parses `1|1|1` (group sizes) or `0,1;2` (explicit qubit lists).
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.contains(';') || spec.contains(',') {
            let groups = spec
                .split(';')
                .map(|g| {
                    g.split(',')
                        .map(|q| {
                            q.trim().parse::<usize>().map_err(|_| {
                                Error::InvalidArgument(format!("bad qubit index '{q}' in '{spec}'"))
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Self::new(groups)
        } else {
            let sizes = spec
                .split('|')
                .map(|s| {
                    s.trim().parse::<usize>().map_err(|_| {
                        Error::InvalidArgument(format!("bad group size '{s}' in '{spec}'"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Self::from_sizes(&sizes)
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.groups.iter().map(|g| 1 << g.len()).collect()
    }

    /// All qubits in group order.
    pub fn qubits(&self) -> Vec<usize> {
        self.groups.iter().flatten().copied().collect()
    }

    pub fn check_within(&self, n: usize) -> Result<()> {
        match self.qubits().into_iter().find(|&q| q >= n) {
            Some(q) => Err(Error::InvalidQubits(format!(
                "partition uses qubit {q} but the state has {n} qubits"
            ))),
            None => Ok(()),
        }
    }

    pub fn require_multipartite(&self) -> Result<()> {
        if self.k() < 2 {
            return Err(Error::InvalidArgument(
                "correlation quantities need at least two parties".into(),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self
            .groups
            .iter()
            .map(|g| g.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{}", s.join(";"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Ghz,
    W,
    Bell,
    ProductRandom,
    PureRandom,
    Zero,
    /// Maximally entangled state between qubits `0..n/2` and `n/2..n`.
    Mes,
}

impl StateKind {
    pub fn name(self) -> &'static str {
        match self {
            StateKind::Ghz => "ghz",
            StateKind::W => "w",
            StateKind::Bell => "bell",
            StateKind::ProductRandom => "product_random",
            StateKind::PureRandom => "pure_random",
            StateKind::Zero => "zero",
            StateKind::Mes => "mes",
        }
    }
}

impl std::str::FromStr for StateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ghz" => StateKind::Ghz,
            "w" => StateKind::W,
            "bell" => StateKind::Bell,
            "product_random" => StateKind::ProductRandom,
            "pure_random" => StateKind::PureRandom,
            "zero" => StateKind::Zero,
            "mes" => StateKind::Mes,
            other => return Err(Error::InvalidArgument(format!("unknown state kind '{other}'"))),
        })
    }
}

fn random_pure_amplitudes(dim: usize, rng: &mut rng::Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
    v
}

pub fn make_state(kind: StateKind, n: usize, seed: u64) -> Result<QuantumState> {
    if n == 0 {
        return Err(Error::InvalidArgument("state needs at least one qubit".into()));
    }
    if n > MAX_PURE_QUBITS {
        return Err(Error::CapExceeded(format!(
            "pure states are limited to {MAX_PURE_QUBITS} qubits, got {n}"
        )));
    }
    let dim = 1usize << n;
    let mut amps = vec![czero(); dim];
    match kind {
        StateKind::Ghz => {
            let a = cre(std::f64::consts::FRAC_1_SQRT_2);
            amps[0] = a;
            amps[dim - 1] = a;
        }
        StateKind::W => {
            let a = cre(1.0 / (n as f64).sqrt());
            for q in 0..n {
                amps[bit_of(n, q)] = a;
            }
        }
        StateKind::Bell => {
            if n != 2 {
                return Err(Error::Unsupported(format!("bell state needs n = 2, got {n}")));
            }
            let a = cre(std::f64::consts::FRAC_1_SQRT_2);
            amps[0] = a;
            amps[3] = a;
        }
        StateKind::Mes => {
            if !n.is_multiple_of(2) {
                return Err(Error::Unsupported(format!(
                    "maximally entangled state needs an even qubit count, got {n}"
                )));
            }
            let half = n / 2;
            let side = 1usize << half;
            let a = cre(1.0 / (side as f64).sqrt());
            for i in 0..side {
                amps[(i << half) | i] = a;
            }
        }
        StateKind::Zero => amps[0] = cre(1.0),
        StateKind::PureRandom => {
            let mut rng = rng::from_seed(seed);
            amps = random_pure_amplitudes(dim, &mut rng);
        }
        StateKind::ProductRandom => {
            let mut rng = rng::from_seed(seed);
            amps = vec![cre(1.0)];
            for _ in 0..n {
                let q = random_pure_amplitudes(2, &mut rng);
                amps = amps.iter().flat_map(|&p| q.iter().map(move |&x| p * x)).collect();
            }
        }
    }
    Ok(QuantumState::pure_unchecked(amps, format!("{}{n}", kind.name())))
}

/// Random mixed state: partial trace of a Haar-random pure state on
/// `n + ancillas` qubits.
pub fn random_mixed_state(n: usize, ancillas: usize, seed: u64) -> Result<QuantumState> {
    if n > MAX_MIXED_QUBITS {
        return Err(Error::CapExceeded(format!("{n} qubits exceed the density-matrix cap")));
    }
    let mut rng = rng::from_seed(seed);
    let total = n + ancillas;
    let psi = QuantumState::pure_unchecked(random_pure_amplitudes(1 << total, &mut rng), String::new());
    let keep: Vec<usize> = (0..n).collect();
    Ok(partial_trace(&psi, &keep)?.with_label(format!("random_mixed{n}")))
}

/// (1 - p) rho + p I / 2^n.
pub fn depolarize(state: &QuantumState, p: f64) -> Result<QuantumState> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidArgument(format!("noise p = {p} outside [0, 1]")));
    }
    let mut rho = state.density_matrix()?;
    let d = rho.nrows();
    rho *= cre(1.0 - p);
    for i in 0..d {
        rho[(i, i)] += cre(p / d as f64);
    }
    Ok(QuantumState::mixed_unchecked(
        rho,
        format!("{}_dep{p}", state.label),
    ))
}

/// Convex combination `(1 - p) a + p b` of two states on the same qubits.
pub fn mix(a: &QuantumState, b: &QuantumState, p: f64) -> Result<QuantumState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("mixing weight {p} outside [0, 1]")));
    }
    if a.n_qubits != b.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "cannot mix {} and {} qubit states",
            a.n_qubits, b.n_qubits
        )));
    }
    let rho = a.density_matrix()? * cre(1.0 - p) + b.density_matrix()? * cre(p);
    Ok(QuantumState::mixed_unchecked(
        rho,
        format!("mix({},{},{p})", a.label, b.label),
    ))
}

/// Reduced state on `keep`, with output qubits in the order listed.
///
/// Listing every qubit in a new order permutes the state without tracing.
pub fn partial_trace(state: &QuantumState, keep: &[usize]) -> Result<QuantumState> {
    let n = state.n_qubits;
    check_qubits(n, keep, "partial trace")?;
    if keep.len() > MAX_MIXED_QUBITS {
        return Err(Error::CapExceeded(format!(
            "reduced state on {} qubits exceeds the density-matrix cap",
            keep.len()
        )));
    }
    let rest = complement(n, keep);
    let dk = 1usize << keep.len();
    let dr = 1usize << rest.len();
    let keep_base: Vec<usize> = (0..dk).map(|a| scatter_bits(a, n, keep)).collect();
    let rest_off: Vec<usize> = (0..dr).map(|e| scatter_bits(e, n, &rest)).collect();
    let rho = match &state.repr {
        StateRepr::Pure(psi) => {
            let m = CMatrix::from_fn(dk, dr, |a, e| psi[keep_base[a] | rest_off[e]]);
            &m * m.adjoint()
        }
        StateRepr::Mixed(full) => CMatrix::from_fn(dk, dk, |a, b| {
            rest_off
                .iter()
                .map(|&e| full[(keep_base[a] | e, keep_base[b] | e)])
                .sum()
        }),
    };
    let label = format!("{}|{:?}", state.label, keep);
    Ok(QuantumState::mixed_unchecked(rho, label))
}

fn apply_gate_to_vector(v: &mut [C64], n: usize, qubits: &[usize], u: &CMatrix) {
    if qubits.len() == 1 {
        let stride = bit_of(n, qubits[0]);
        let (u00, u01, u10, u11) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
        let len = v.len();
        let mut base = 0;
        while base < len {
            for i in base..base + stride {
                let a = v[i];
                let b = v[i + stride];
                v[i] = u00 * a + u01 * b;
                v[i + stride] = u10 * a + u11 * b;
            }
            base += 2 * stride;
        }
        return;
    }
    let m = qubits.len();
    let dm = 1usize << m;
    let offsets: Vec<usize> = (0..dm).map(|a| scatter_bits(a, n, qubits)).collect();
    let mask = qubit_mask(n, qubits);
    let mut buf = vec![czero(); dm];
    for r in 0..v.len() {
        if r & mask != 0 {
            continue;
        }
        for a in 0..dm {
            buf[a] = v[r | offsets[a]];
        }
        for a in 0..dm {
            let mut acc = czero();
            for b in 0..dm {
                acc += u[(a, b)] * buf[b];
            }
            v[r | offsets[a]] = acc;
        }
    }
}

/// Applies `u` to the listed qubits of a pure amplitude vector in place.
pub fn apply_gate_pure(amps: &mut [C64], n: usize, qubits: &[usize], u: &CMatrix) {
    apply_gate_to_vector(amps, n, qubits, u);
}

/// rho -> u rho u^dagger on the listed qubits.
pub fn apply_gate_mixed(rho: &mut CMatrix, n: usize, qubits: &[usize], u: &CMatrix) {
    let d = rho.nrows();
    for c in 0..d {
        apply_gate_to_vector(rho.column_mut(c).as_mut_slice(), n, qubits, u);
    }
    let mut adj = rho.adjoint();
    for c in 0..d {
        apply_gate_to_vector(adj.column_mut(c).as_mut_slice(), n, qubits, u);
    }
    *rho = adj.adjoint();
}

/// Evolves the state by the product unitary of `setting`; a factor whose
/// qubits are flagged in `conjugate_mask` uses the entrywise conjugate.
pub fn apply_product_unitary(
    state: &QuantumState,
    setting: &LocalUnitarySetting,
    conjugate_mask: &[bool],
) -> Result<QuantumState> {
    let n = state.n_qubits;
    if setting.n_qubits() != n {
        return Err(Error::DimensionMismatch(format!(
            "setting covers {} qubits, state has {n}",
            setting.n_qubits()
        )));
    }
    if !conjugate_mask.is_empty() && conjugate_mask.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "conjugate mask has {} entries for {n} qubits",
            conjugate_mask.len()
        )));
    }
    let mut out = state.clone();
    for factor in setting.factors() {
        let conj = match conjugate_mask {
            [] => false,
            mask => {
                let first = mask[factor.qubits[0]];
                if factor.qubits.iter().any(|&q| mask[q] != first) {
                    return Err(Error::InvalidArgument(
                        "conjugate mask splits a multi-qubit factor".into(),
                    ));
                }
                first
            }
        };
        let u = factor.matrix();
        let u = if conj { u.map(|z| z.conj()) } else { u };
        match &mut out.repr {
            StateRepr::Pure(v) => apply_gate_to_vector(v, n, &factor.qubits, &u),
            StateRepr::Mixed(m) => apply_gate_mixed(m, n, &factor.qubits, &u),
        }
    }
    Ok(out)
}

/// Computational-basis outcome probabilities, indexed by bitstring.
pub fn outcome_distribution(state: &QuantumState) -> Vec<f64> {
    match &state.repr {
        StateRepr::Pure(v) => v.iter().map(|a| a.norm_sqr()).collect(),
        StateRepr::Mixed(m) => (0..m.nrows()).map(|i| m[(i, i)].re.max(0.0)).collect(),
    }
}

/// Draws shots by inverting the cumulative distribution.
pub fn sample_outcomes_with(probs: &[f64], n_shots: usize, rng: &mut rng::Rng) -> Result<Vec<u64>> {
    if n_shots == 0 {
        return Err(Error::InvalidArgument("n_shots must be positive".into()));
    }
    if probs.is_empty() || probs.iter().any(|&p| p < 0.0 || p.is_nan()) {
        return Err(Error::InvalidArgument("invalid probability vector".into()));
    }
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
    }
    Ok((0..n_shots)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= u);
            // u < total, so idx < len except for rounding at the top end
            idx.min(probs.len() - 1) as u64
        })
        .collect())
}

pub fn sample_outcomes(probs: &[f64], n_shots: usize, seed: u64) -> Result<Vec<u64>> {
    sample_outcomes_with(probs, n_shots, &mut rng::from_seed(seed))
}

/// Transpose on the qubits in `subsystem` of an `n`-qubit operator.
pub fn partial_transpose_matrix(m: &CMatrix, n: usize, subsystem: &[usize]) -> Result<CMatrix> {
    if m.nrows() != 1 << n || m.ncols() != 1 << n {
        return Err(Error::DimensionMismatch("operator is not 2^n x 2^n".into()));
    }
    check_qubits(n, subsystem, "partial transpose")?;
    let mask = qubit_mask(n, subsystem);
    let d = m.nrows();
    Ok(CMatrix::from_fn(d, d, |r, c| {
        let r2 = (r & !mask) | (c & mask);
        let c2 = (c & !mask) | (r & mask);
        m[(r2, c2)]
    }))
}

pub fn partial_transpose(rho: &QuantumState, subsystem: &[usize]) -> Result<CMatrix> {
    partial_transpose_matrix(&rho.density_matrix()?, rho.n_qubits, subsystem)
}

/// Realignment `R(O)_{ij,kl} = O_{ik,jl}` with `A = a_qubits` and `B` the
/// remaining qubits in ascending order. Output is `d_A^2 x d_B^2`.
pub fn realign_matrix(m: &CMatrix, n: usize, a_qubits: &[usize]) -> Result<CMatrix> {
    if m.nrows() != 1 << n || m.ncols() != 1 << n {
        return Err(Error::DimensionMismatch("operator is not 2^n x 2^n".into()));
    }
    check_qubits(n, a_qubits, "realignment")?;
    let b_qubits = complement(n, a_qubits);
    if b_qubits.is_empty() {
        return Err(Error::InvalidArgument("realignment needs a nonempty second party".into()));
    }
    let da = 1usize << a_qubits.len();
    let db = 1usize << b_qubits.len();
    let idx = |a: usize, b: usize| scatter_bits(a, n, a_qubits) | scatter_bits(b, n, &b_qubits);
    Ok(CMatrix::from_fn(da * da, db * db, |row, col| {
        let (i, j) = (row / da, row % da);
        let (k, l) = (col / db, col % db);
        m[(idx(i, k), idx(j, l))]
    }))
}

pub fn realignment(rho: &QuantumState, split: &Partition) -> Result<CMatrix> {
    if split.k() != 2 {
        return Err(Error::InvalidArgument(format!(
            "realignment needs a bipartition, got {} groups",
            split.k()
        )));
    }
    split.check_within(rho.n_qubits)?;
    // reduce to the split's qubits with group A first
    let ordered = partial_trace(rho, &split.qubits())?;
    let a: Vec<usize> = (0..split.groups()[0].len()).collect();
    realign_matrix(&ordered.density_matrix()?, ordered.n_qubits, &a)
}

/// Permutation of `t` tensor copies of `C^d`: copy `i` is moved to slot
/// `perm[i]`, so `W_pi W_sigma = W_{pi sigma}` with `(pi sigma)(i) = pi(sigma(i))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationOperator {
    perm: Vec<usize>,
    d: usize,
}

pub fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&x| x < p.len() && !std::mem::replace(&mut seen[x], true))
}

/// `(pi sigma)(i) = pi(sigma(i))`.
pub fn compose_permutations(pi: &[usize], sigma: &[usize]) -> Vec<usize> {
    sigma.iter().map(|&s| pi[s]).collect()
}

/// All permutations of `0..t` in lexicographic order.
pub fn all_permutations(t: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; t], &mut out);
    out
}

pub fn permutation_operator(pi: &[usize], d: usize, t: usize) -> Result<PermutationOperator> {
    if pi.len() != t || !is_permutation(pi) {
        return Err(Error::InvalidArgument(format!("{pi:?} is not a permutation of {t} copies")));
    }
    if d < 1 {
        return Err(Error::InvalidArgument("local dimension must be positive".into()));
    }
    let size = (d as u128).checked_pow(t as u32).unwrap_or(u128::MAX);
    if size.saturating_mul(t as u128) > PERMUTATION_CAP as u128 {
        return Err(Error::CapExceeded(format!(
            "t * d^t = {t} * {d}^{t} exceeds the cap {PERMUTATION_CAP}"
        )));
    }
    Ok(PermutationOperator { perm: pi.to_vec(), d })
}

impl PermutationOperator {
    pub fn copies(&self) -> usize {
        self.perm.len()
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.d.pow(self.perm.len() as u32)
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Digits of a basis index, copy 0 most significant.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let t = self.perm.len();
        let mut out = vec![0; t];
        for slot in (0..t).rev() {
            out[slot] = index % self.d;
            index /= self.d;
        }
        out
    }

    fn from_digits(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &x| acc * self.d + x)
    }

    /// Image of basis vector `index`.
    pub fn map_index(&self, index: usize) -> usize {
        let a = self.digits(index);
        let mut b = vec![0; a.len()];
        for (i, &x) in a.iter().enumerate() {
            b[self.perm[i]] = x;
        }
        self.from_digits(&b)
    }

    pub fn to_dense(&self) -> CMatrix {
        let dim = self.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            m[(self.map_index(col), col)] = cre(1.0);
        }
        m
    }
}
