//! Compact textual state descriptions such as `ghz3`, `w:6` or `bell`.

use std::fmt;
use std::str::FromStr;

use rmcorr::qcore::{depolarize, make_state};
use rmcorr::{QuantumState, StateKind};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateSpec {
    pub kind: StateKind,
    pub n: usize,
    /// Depolarizing weight mixed in after preparation.
    pub noise: f64,
    /// Seed for the random state kinds.
    pub seed: u64,
}

impl StateSpec {
    pub fn new(kind: StateKind, n: usize) -> Self {
        Self { kind, n, noise: 0.0, seed: 0 }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn build(&self) -> CliResult<QuantumState> {
        let state = make_state(self.kind, self.n, self.seed)?;
        if self.noise > 0.0 {
            Ok(depolarize(&state, self.noise)?)
        } else {
            Ok(state)
        }
    }
}

impl FromStr for StateSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, digits) = match s.split_once(':') {
            Some((a, b)) => (a.to_string(), b.to_string()),
            None => {
                let cut = s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len());
                (s[..cut].to_string(), s[cut..].to_string())
            }
        };
        let kind: StateKind = name.parse()?;
        let n = if digits.is_empty() {
            match kind {
                StateKind::Bell | StateKind::Mes => 2,
                _ => return Err(CliError::Usage(format!("state '{s}' needs a qubit count, e.g. {name}3"))),
            }
        } else {
            digits
                .parse()
                .map_err(|_| CliError::Usage(format!("bad qubit count '{digits}' in state '{s}'")))?
        };
        if kind == StateKind::Bell && n != 2 {
            return Err(CliError::Usage("the bell state has two qubits".into()));
        }
        Ok(Self::new(kind, n))
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.name(), self.n)?;
        if self.noise > 0.0 {
            write!(f, "_p{}", self.noise)?;
        }
        Ok(())
    }
}
