//! Measurement protocols and the persistent dataset format.
//!
//! Each unitary setting `t` draws from its own stream `rng::stream(seed, t)`:
//! the unitary first, then the shots. Settings are simulated in parallel and
//! assembled in order, so results do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::io::{BufRead, Write};

use crate::ensembles::{sample_setting_with, EnsembleId, LocalUnitarySetting, CLIFFORD_1Q_ORDER};
use crate::error::{Error, Result};
use crate::qcore::{
    apply_product_unitary, outcome_distribution, sample_outcomes_with, CMatrix, Partition, QuantumState, C64,
    MAX_MIXED_QUBITS, MAX_PURE_QUBITS,
};
use crate::rng;
use rand::Rng as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    LocalCro,
    GlobalCro,
    MesFidelity,
    Concurrence,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::LocalCro => "local_cro",
            Protocol::GlobalCro => "global_cro",
            Protocol::MesFidelity => "mes_fidelity",
            Protocol::Concurrence => "concurrence",
        }
    }
}

/// `N_U` sampled settings with `N_M` computational-basis shots each.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementDataset {
    pub protocol: Protocol,
    pub n_qubits: usize,
    pub n_u: usize,
    pub n_m: usize,
    pub seed: u64,
    pub state_label: String,
    pub ensemble: EnsembleId,
    /// Party structure of the global protocol's unitaries.
    pub partition_hint: Option<Partition>,
    /// Qubits measured after the conjugated unitary (second half for
    /// `mes_fidelity`, empty otherwise).
    pub conjugate_mask: Vec<bool>,
    pub settings: Vec<LocalUnitarySetting>,
    pub shots: Vec<Vec<u64>>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    protocol: Protocol,
    n_qubits: usize,
    #[serde(rename = "N_U")]
    n_u: usize,
    #[serde(rename = "N_M")]
    n_m: usize,
    seed: u64,
    state_label: String,
    ensemble_id: EnsembleId,
    #[serde(default)]
    partition: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    conjugate_mask: Vec<bool>,
}

impl MeasurementDataset {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidArgument(format!("invalid dataset: {msg}")));
        if self.settings.len() != self.n_u || self.shots.len() != self.n_u {
            return fail(format!(
                "{} settings and {} shot lists for N_U = {}",
                self.settings.len(),
                self.shots.len(),
                self.n_u
            ));
        }
        if self.n_qubits == 0 || self.n_qubits > 63 {
            return fail(format!("unsupported qubit count {}", self.n_qubits));
        }
        for (t, (s, shots)) in self.settings.iter().zip(&self.shots).enumerate() {
            if s.n_qubits() != self.n_qubits {
                return fail(format!("setting {t} covers {} qubits", s.n_qubits()));
            }
            if shots.len() != self.n_m {
                return fail(format!("setting {t} has {} shots, N_M = {}", shots.len(), self.n_m));
            }
            if shots.iter().any(|&b| b >> self.n_qubits != 0) {
                return fail(format!("setting {t} has a bitstring wider than {} bits", self.n_qubits));
            }
        }
        if self.protocol == Protocol::MesFidelity {
            let half = self.n_qubits / 2;
            let expected: Vec<bool> = (0..self.n_qubits).map(|q| q >= half).collect();
            if !self.n_qubits.is_multiple_of(2) || self.conjugate_mask != expected {
                return fail("mes_fidelity needs an even qubit count and a second-half conjugate mask".into());
            }
        } else if self.conjugate_mask.iter().any(|&c| c) {
            return fail(format!("{} datasets carry no conjugated qubits", self.protocol.name()));
        }
        if let Some(p) = &self.partition_hint {
            p.check_within(self.n_qubits)?;
        }
        Ok(())
    }

    fn setting_json(&self, s: &LocalUnitarySetting) -> Value {
        match s.clifford_indices() {
            Some(idx) => json!({ "clifford": idx }),
            None => {
                let blocks: Vec<Value> = s
                    .factors()
                    .iter()
                    .map(|f| {
                        let m = f.matrix();
                        let d = m.nrows();
                        let entries = (0..d).flat_map(|r| (0..d).map(move |c| (r, c)));
                        let re: Vec<f64> = entries.clone().map(|rc| m[rc].re).collect();
                        let im: Vec<f64> = entries.map(|rc| m[rc].im).collect();
                        json!({ "qubits": f.qubits, "re": re, "im": im })
                    })
                    .collect();
                json!({ "blocks": blocks })
            }
        }
    }

    /// Line 1: header; then per setting one setting line and one shot line.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            protocol: self.protocol,
            n_qubits: self.n_qubits,
            n_u: self.n_u,
            n_m: self.n_m,
            seed: self.seed,
            state_label: self.state_label.clone(),
            ensemble_id: self.ensemble,
            partition: self.partition_hint.as_ref().map(|p| p.groups().to_vec()),
            conjugate_mask: self.conjugate_mask.clone(),
        };
        writeln!(w, "{}", serde_json::to_string(&header).map_err(io_err)?)?;
        let width = self.n_qubits;
        for (s, shots) in self.settings.iter().zip(&self.shots) {
            writeln!(w, "{}", self.setting_json(s))?;
            let bits: Vec<String> = shots.iter().map(|b| format!("{b:0width$b}")).collect();
            writeln!(w, "{}", serde_json::to_string(&bits).map_err(io_err)?)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("dataset text is UTF-8")
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let mut next_line = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, Ok(l))) => Ok((i + 1, l)),
                Some((_, Err(e))) => Err(e.into()),
                None => Err(Error::Format { line: 0, msg: format!("unexpected end of file, expected {what}") }),
            }
        };
        let (ln, head) = next_line("header")?;
        let header: Header =
            serde_json::from_str(&head).map_err(|e| Error::Format { line: ln, msg: e.to_string() })?;
        let partition_hint = header.partition.map(Partition::new).transpose()?;
        let mut settings = Vec::with_capacity(header.n_u);
        let mut shots = Vec::with_capacity(header.n_u);
        for _ in 0..header.n_u {
            let (ln, sline) = next_line("setting line")?;
            settings.push(parse_setting(&sline, header.n_qubits, header.ensemble_id, ln)?);
            let (ln, bline) = next_line("shot line")?;
            let strs: Vec<String> =
                serde_json::from_str(&bline).map_err(|e| Error::Format { line: ln, msg: e.to_string() })?;
            let parsed = strs
                .iter()
                .map(|s| {
                    if s.len() != header.n_qubits {
                        return Err(Error::Format {
                            line: ln,
                            msg: format!("bitstring '{s}' does not have {} bits", header.n_qubits),
                        });
                    }
                    u64::from_str_radix(s, 2)
                        .map_err(|e| Error::Format { line: ln, msg: format!("bitstring '{s}': {e}") })
                })
                .collect::<Result<Vec<_>>>()?;
            shots.push(parsed);
        }
        let ds = Self {
            protocol: header.protocol,
            n_qubits: header.n_qubits,
            n_u: header.n_u,
            n_m: header.n_m,
            seed: header.seed,
            state_label: header.state_label,
            ensemble: header.ensemble_id,
            partition_hint,
            conjugate_mask: header.conjugate_mask,
            settings,
            shots,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::read_from(text.as_bytes())
    }
}

fn io_err(e: serde_json::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn parse_setting(line: &str, n: usize, ensemble: EnsembleId, ln: usize) -> Result<LocalUnitarySetting> {
    let fmt = |msg: String| Error::Format { line: ln, msg };
    let v: Value = serde_json::from_str(line).map_err(|e| fmt(e.to_string()))?;
    if let Some(idx) = v.get("clifford") {
        let idx: Vec<u8> = serde_json::from_value(idx.clone()).map_err(|e| fmt(e.to_string()))?;
        if idx.len() != n {
            return Err(fmt(format!("{} Clifford indices for {n} qubits", idx.len())));
        }
        return LocalUnitarySetting::clifford(idx);
    }
    let blocks = v
        .get("blocks")
        .and_then(Value::as_array)
        .ok_or_else(|| fmt("setting line has neither 'clifford' nor 'blocks'".into()))?;
    let mut parsed = Vec::with_capacity(blocks.len());
    for b in blocks {
        let qubits: Vec<usize> = serde_json::from_value(b["qubits"].clone()).map_err(|e| fmt(e.to_string()))?;
        let re: Vec<f64> = serde_json::from_value(b["re"].clone()).map_err(|e| fmt(e.to_string()))?;
        let im: Vec<f64> = serde_json::from_value(b["im"].clone()).map_err(|e| fmt(e.to_string()))?;
        let d = 1usize << qubits.len();
        if re.len() != d * d || im.len() != d * d {
            return Err(fmt(format!("block on {} qubits needs {} entries", qubits.len(), d * d)));
        }
        parsed.push((qubits, CMatrix::from_fn(d, d, |r, c| C64::new(re[r * d + c], im[r * d + c]))));
    }
    LocalUnitarySetting::from_blocks(parsed, n, ensemble)
}

/// Simulation budget: vectors up to the pure cap, matrices up to the mixed cap.
fn check_simulable(state: &QuantumState) -> Result<()> {
    let cap = if state.is_pure_repr() { MAX_PURE_QUBITS } else { MAX_MIXED_QUBITS };
    if state.n_qubits() > cap {
        return Err(Error::CapExceeded(format!("{} qubits exceed the simulation cap {cap}", state.n_qubits())));
    }
    Ok(())
}

struct RunSpec<'a> {
    protocol: Protocol,
    ensemble: EnsembleId,
    partition_hint: Option<Partition>,
    conjugate_mask: Vec<bool>,
    draw: &'a (dyn Fn(&mut rng::Rng) -> Result<LocalUnitarySetting> + Sync),
}

fn run(state: &QuantumState, n_u: usize, n_m: usize, seed: u64, spec: RunSpec<'_>) -> Result<MeasurementDataset> {
    if n_u == 0 || n_m == 0 {
        return Err(Error::InvalidArgument("N_U and N_M must be positive".into()));
    }
    check_simulable(state)?;
    let per_setting: Vec<(LocalUnitarySetting, Vec<u64>)> = (0..n_u)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(seed, t as u64);
            let setting = (spec.draw)(&mut rng)?;
            let rotated = apply_product_unitary(state, &setting, &spec.conjugate_mask)?;
            let probs = outcome_distribution(&rotated);
            let shots = sample_outcomes_with(&probs, n_m, &mut rng)?;
            Ok((setting, shots))
        })
        .collect::<Result<_>>()?;
    let (settings, shots) = per_setting.into_iter().unzip();
    let ds = MeasurementDataset {
        protocol: spec.protocol,
        n_qubits: state.n_qubits(),
        n_u,
        n_m,
        seed,
        state_label: state.label().to_string(),
        ensemble: spec.ensemble,
        partition_hint: spec.partition_hint,
        conjugate_mask: spec.conjugate_mask,
        settings,
        shots,
    };
    ds.validate()?;
    Ok(ds)
}

/// Local protocol: independent random single-qubit unitaries on every qubit.
/// `Haar1q` is accepted for cross-checks; the default is `Clifford1q`.
pub fn run_local_protocol_with(
    state: &QuantumState,
    ensemble: EnsembleId,
    n_u: usize,
    n_m: usize,
    seed: u64,
) -> Result<MeasurementDataset> {
    if ensemble == EnsembleId::HaarNq {
        return Err(Error::InvalidArgument("the local protocol uses single-qubit ensembles".into()));
    }
    let n = state.n_qubits();
    let draw = move |rng: &mut rng::Rng| sample_setting_with(n, ensemble, None, rng);
    run(
        state,
        n_u,
        n_m,
        seed,
        RunSpec { protocol: Protocol::LocalCro, ensemble, partition_hint: None, conjugate_mask: vec![], draw: &draw },
    )
}

pub fn run_local_protocol(state: &QuantumState, n_u: usize, n_m: usize, seed: u64) -> Result<MeasurementDataset> {
    run_local_protocol_with(state, EnsembleId::Clifford1q, n_u, n_m, seed)
}

/// Global protocol: one Haar unitary per party of `partition`.
pub fn run_global_protocol(
    state: &QuantumState,
    partition: &Partition,
    n_u: usize,
    n_m: usize,
    seed: u64,
) -> Result<MeasurementDataset> {
    let n = state.n_qubits();
    partition.check_within(n)?;
    let parties = partition.clone();
    let draw = move |rng: &mut rng::Rng| sample_setting_with(n, EnsembleId::HaarNq, Some(&parties), rng);
    run(
        state,
        n_u,
        n_m,
        seed,
        RunSpec {
            protocol: Protocol::GlobalCro,
            ensemble: EnsembleId::HaarNq,
            partition_hint: Some(partition.clone()),
            conjugate_mask: vec![],
            draw: &draw,
        },
    )
}

/// `U ⊗ U*` protocol on a state with two equal halves: qubit `i` of the
/// first half and qubit `n/2 + i` share a Clifford, conjugated on the second.
pub fn run_mes_fidelity_protocol(state: &QuantumState, n_u: usize, n_m: usize, seed: u64) -> Result<MeasurementDataset> {
    let n = state.n_qubits();
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("the U⊗U* protocol needs an even qubit count, got {n}")));
    }
    let half = n / 2;
    let draw = move |rng: &mut rng::Rng| {
        let side: Vec<u8> = (0..half).map(|_| rng.random_range(0..CLIFFORD_1Q_ORDER as u8)).collect();
        LocalUnitarySetting::clifford(side.iter().chain(&side).copied().collect())
    };
    run(
        state,
        n_u,
        n_m,
        seed,
        RunSpec {
            protocol: Protocol::MesFidelity,
            ensemble: EnsembleId::Clifford1q,
            partition_hint: None,
            conjugate_mask: (0..n).map(|q| q >= half).collect(),
            draw: &draw,
        },
    )
}

/// Same mechanics as the local protocol, for pure input states only.
pub fn run_concurrence_protocol(state: &QuantumState, n_u: usize, n_m: usize, seed: u64) -> Result<MeasurementDataset> {
    if !state.is_pure_repr() && (state.purity() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState("the concurrence protocol needs a pure state".into()));
    }
    let mut ds = run_local_protocol(state, n_u, n_m, seed)?;
    ds.protocol = Protocol::Concurrence;
    Ok(ds)
}

/// Per-setting shots restricted to `qubits`, packed with the first listed
/// qubit most significant.
pub fn restrict_shot(shot: u64, n: usize, qubits: &[usize]) -> u64 {
    qubits.iter().fold(0u64, |acc, &q| (acc << 1) | ((shot >> (n - 1 - q)) & 1))
}

#[cfg(test)]
pub(crate) fn unit_setting(n: usize) -> LocalUnitarySetting {
    LocalUnitarySetting::clifford(vec![0; n]).expect("identity indices are valid")
}

/// Test hook: run the local mechanics with a caller-supplied setting sampler.
#[cfg(test)]
pub(crate) fn run_local_with_sampler(
    state: &QuantumState,
    n_u: usize,
    n_m: usize,
    seed: u64,
    draw: &(dyn Fn(&mut rng::Rng) -> Result<LocalUnitarySetting> + Sync),
) -> Result<MeasurementDataset> {
    run(
        state,
        n_u,
        n_m,
        seed,
        RunSpec { protocol: Protocol::LocalCro, ensemble: EnsembleId::Clifford1q, partition_hint: None, conjugate_mask: vec![], draw },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::clifford_1q;
    use crate::qcore::{depolarize, kron, make_state, partial_trace, StateKind};

    fn five_sigma_check(counts: &[usize], probs: &[f64], total: usize) {
        for (c, p) in counts.iter().zip(probs) {
            let mean = total as f64 * p;
            let sigma = (total as f64 * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - mean).abs() <= 5.0 * sigma + 1e-9, "count {c} vs mean {mean} (sigma {sigma})");
        }
    }

    #[test]
    fn identity_ensemble_on_zero_state_gives_all_zero_shots() {
        let zero = make_state(StateKind::Zero, 4, 0).unwrap();
        let ds = run_local_with_sampler(&zero, 7, 9, 1, &|_| Ok(unit_setting(4))).unwrap();
        assert!(ds.shots.iter().flatten().all(|&s| s == 0));
    }

    #[test]
    fn per_setting_histogram_matches_outcome_distribution() {
        let psi = make_state(StateKind::PureRandom, 3, 4).unwrap();
        let n_m = 20_000;
        let ds = run_local_protocol(&psi, 3, n_m, 99).unwrap();
        for (s, shots) in ds.settings.iter().zip(&ds.shots) {
            let probs = outcome_distribution(&apply_product_unitary(&psi, s, &[]).unwrap());
            let mut counts = vec![0usize; 8];
            shots.iter().for_each(|&b| counts[b as usize] += 1);
            five_sigma_check(&counts, &probs, n_m);
        }
    }

    #[test]
    fn marginal_histogram_matches_reduced_state() {
        let rho = depolarize(&make_state(StateKind::W, 4, 0).unwrap(), 0.3).unwrap();
        let n_m = 20_000;
        let ds = run_local_protocol(&rho, 2, n_m, 5).unwrap();
        let subset = [2usize, 0];
        for (s, shots) in ds.settings.iter().zip(&ds.shots) {
            let rotated = apply_product_unitary(&rho, s, &[]).unwrap();
            let probs = outcome_distribution(&partial_trace(&rotated, &subset).unwrap());
            let mut counts = vec![0usize; 4];
            shots.iter().for_each(|&b| counts[restrict_shot(b, 4, &subset) as usize] += 1);
            five_sigma_check(&counts, &probs, n_m);
        }
    }

    #[test]
    fn settings_are_independent() {
        // frequency of outcome 0 in setting 0 vs setting 1 across replications
        let psi = make_state(StateKind::Ghz, 2, 0).unwrap();
        let reps = 400;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for r in 0..reps {
            let ds = run_local_protocol(&psi, 2, 20, 1000 + r).unwrap();
            let f = |t: usize| ds.shots[t].iter().filter(|&&s| s == 0).count() as f64 / 20.0;
            a.push(f(0));
            b.push(f(1));
        }
        let cov = crate::stats::sample_covariance(&a, &b);
        let corr = cov / (crate::stats::sample_variance(&a) * crate::stats::sample_variance(&b)).sqrt();
        // null standard deviation of a sample correlation is about 1/sqrt(reps)
        assert!(corr.abs() < 5.0 / (reps as f64).sqrt(), "correlation {corr}");
    }

    #[test]
    fn same_seed_same_dataset() {
        let psi = make_state(StateKind::Ghz, 3, 0).unwrap();
        let a = run_local_protocol(&psi, 20, 10, 3).unwrap();
        let b = run_local_protocol(&psi, 20, 10, 3).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        let c = run_local_protocol(&psi, 20, 10, 4).unwrap();
        assert_ne!(a.to_text(), c.to_text());
    }

    #[test]
    fn global_protocol_records_partition_and_roundtrips() {
        let psi = make_state(StateKind::Ghz, 3, 0).unwrap();
        let p = Partition::from_sizes(&[2, 1]).unwrap();
        let ds = run_global_protocol(&psi, &p, 4, 5, 8).unwrap();
        assert_eq!(ds.partition_hint.as_ref(), Some(&p));
        assert_eq!(ds.settings[0].factors().len(), 2);
        let text = ds.to_text();
        let back = MeasurementDataset::from_text(&text).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.to_text(), text);
        let big = Partition::new(vec![(0..6).collect(), vec![6]]).unwrap();
        let psi7 = make_state(StateKind::Ghz, 7, 0).unwrap();
        assert!(run_global_protocol(&psi7, &big, 2, 2, 0).is_err());
    }

    #[test]
    fn zero_state_global_protocol_identity_draws() {
        let zero = make_state(StateKind::Zero, 3, 0).unwrap();
        let draw = |_: &mut rng::Rng| {
            LocalUnitarySetting::from_blocks(
                vec![(vec![0, 1], CMatrix::identity(4, 4)), (vec![2], CMatrix::identity(2, 2))],
                3,
                EnsembleId::HaarNq,
            )
        };
        let ds = run_local_with_sampler(&zero, 3, 4, 0, &draw).unwrap();
        assert!(ds.shots.iter().flatten().all(|&s| s == 0));
    }

    #[test]
    fn mes_protocol_on_bell_pair() {
        let bell = make_state(StateKind::Bell, 2, 0).unwrap();
        let ds = run_mes_fidelity_protocol(&bell, 50, 20, 6).unwrap();
        assert_eq!(ds.conjugate_mask, vec![false, true]);
        assert!(ds.shots.iter().flatten().all(|&s| s == 0b00 || s == 0b11));
        assert_eq!(ds.to_text(), run_mes_fidelity_protocol(&bell, 50, 20, 6).unwrap().to_text());
        assert!(run_mes_fidelity_protocol(&make_state(StateKind::Ghz, 3, 0).unwrap(), 1, 1, 0).is_err());
    }

    #[test]
    fn u_tensor_u_conjugate_preserves_bell_correlations() {
        // <a,b|(U⊗U*)|Ψ+> vanishes for a != b for every Clifford
        let bell = make_state(StateKind::Bell, 2, 0).unwrap();
        for i in 0..24 {
            let u = clifford_1q(i).unwrap();
            let uu = kron(&u, &u.map(|z| z.conj()));
            let amps = bell.amplitudes().unwrap();
            let out: Vec<C64> = (0..4).map(|r| (0..4).map(|c| uu[(r, c)] * amps[c]).sum()).collect();
            assert!(out[1].norm() < 1e-12 && out[2].norm() < 1e-12);
        }
    }

    #[test]
    fn concurrence_protocol_rejects_mixed_states() {
        let rho = depolarize(&make_state(StateKind::Bell, 2, 0).unwrap(), 0.2).unwrap();
        assert!(run_concurrence_protocol(&rho, 2, 2, 0).is_err());
        let psi = make_state(StateKind::Bell, 2, 0).unwrap();
        let ds = run_concurrence_protocol(&psi, 2, 2, 0).unwrap();
        assert_eq!(ds.protocol, Protocol::Concurrence);
    }

    #[test]
    fn malformed_files_are_rejected() {
        let psi = make_state(StateKind::Ghz, 2, 0).unwrap();
        let text = run_local_protocol(&psi, 2, 3, 0).unwrap().to_text();
        let truncated: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
        assert!(matches!(MeasurementDataset::from_text(&truncated), Err(Error::Format { .. })));
        let bad_bits = text.replacen("\"", "\"1", 3);
        assert!(MeasurementDataset::from_text(&bad_bits).is_err());
        assert!(MeasurementDataset::from_text("not json\n").is_err());
    }

    #[test]
    fn restrict_shot_orders_bits() {
        assert_eq!(restrict_shot(0b1011, 4, &[0, 3]), 0b11);
        assert_eq!(restrict_shot(0b1011, 4, &[1, 0]), 0b01);
    }

    #[test]
    fn haar1q_local_datasets_roundtrip_bit_exactly() {
        let psi = make_state(StateKind::PureRandom, 2, 1).unwrap();
        let ds = run_local_protocol_with(&psi, EnsembleId::Haar1q, 3, 4, 2).unwrap();
        let back = MeasurementDataset::from_text(&ds.to_text()).unwrap();
        assert_eq!(back, ds);
    }
}
