//! Sweep configuration files (JSON).

use std::path::{Path, PathBuf};

use rmcorr::{Partition, StateKind};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::state_spec::StateSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Experiment {
    #[serde(rename = "var_vs_NU")]
    VarVsNu,
    #[serde(rename = "var_vs_n")]
    VarVsN,
    #[serde(rename = "var_vs_NM")]
    VarVsNm,
    #[serde(rename = "noisy_state_estimate")]
    NoisyStateEstimate,
    #[serde(rename = "criterion_scan")]
    CriterionScan,
    #[serde(rename = "fidelity_curve")]
    FidelityCurve,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::VarVsNu => "var_vs_NU",
            Experiment::VarVsN => "var_vs_n",
            Experiment::VarVsNm => "var_vs_NM",
            Experiment::NoisyStateEstimate => "noisy_state_estimate",
            Experiment::CriterionScan => "criterion_scan",
            Experiment::FidelityCurve => "fidelity_curve",
        }
    }

    /// Whether grid values are counts rather than probabilities.
    fn integer_grid(self) -> bool {
        matches!(self, Experiment::VarVsNu | Experiment::VarVsN | Experiment::VarVsNm | Experiment::NoisyStateEstimate)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub kind: StateKind,
    pub n: usize,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
}

impl StateConfig {
    pub fn spec(&self) -> StateSpec {
        StateSpec::new(self.kind, self.n).with_noise(self.noise).with_seed(self.seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub experiment: Experiment,
    /// Not needed by `criterion_scan`, which has a fixed state family.
    #[serde(default)]
    pub state: Option<StateConfig>,
    pub grid: Vec<f64>,
    #[serde(rename = "N_U", default)]
    pub n_u: usize,
    #[serde(rename = "N_M", default)]
    pub n_m: usize,
    #[serde(default = "one")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    /// Equal parties per state when no explicit partition is given.
    #[serde(default = "three")]
    pub parties: usize,
    /// Explicit partition (`1|1|1` or `0,1;2`); not allowed with `var_vs_n`.
    #[serde(default)]
    pub partition: Option<String>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn one() -> usize {
    1
}

fn three() -> usize {
    3
}

impl SweepConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.grid.is_empty() {
            return bad("grid must not be empty".into());
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.experiment.integer_grid() {
            if let Some(x) = self.grid.iter().find(|x| **x < 1.0 || x.fract() != 0.0) {
                return bad(format!("{} grid values must be positive integers, got {x}", self.experiment.name()));
            }
        } else if let Some(x) = self.grid.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return bad(format!("{} grid values must lie in [0, 1], got {x}", self.experiment.name()));
        }
        if self.experiment != Experiment::CriterionScan {
            if self.state.is_none() {
                return bad(format!("{} needs a state", self.experiment.name()));
            }
            let needs_nu = !matches!(self.experiment, Experiment::VarVsNu);
            let needs_nm = !matches!(self.experiment, Experiment::VarVsNm | Experiment::NoisyStateEstimate);
            if needs_nu && self.n_u == 0 {
                return bad("N_U must be positive".into());
            }
            if needs_nm && self.n_m == 0 {
                return bad("N_M must be positive".into());
            }
            if self.parties == 0 {
                return bad("parties must be positive".into());
            }
        }
        if self.experiment == Experiment::VarVsN && self.partition.is_some() {
            return bad("var_vs_n changes the qubit number; use `parties` instead of `partition`".into());
        }
        if let Some(p) = &self.partition {
            Partition::parse(p).map_err(|e| CliError::Config(format!("partition: {e}")))?;
        }
        Ok(())
    }

    /// Partition used for an `n`-qubit state.
    pub fn partition_for(&self, n: usize) -> CliResult<Partition> {
        match &self.partition {
            Some(p) => Ok(Partition::parse(p)?),
            None => Ok(Partition::equal(n, self.parties)?),
        }
    }
}
