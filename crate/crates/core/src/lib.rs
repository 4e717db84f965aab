//! Randomized-measurement toolkit for the correlation overlap and total
//! correlation of multi-qubit states.
//!
//! The crate is split along the measurement/postprocessing boundary:
//!
//! - [`qcore`]: dense states, partial traces, partial transposes, realignment
//!   and permutation operators.
//! - [`ensembles`]: the single-qubit Clifford group, Haar sampling and the
//!   twirling channel.
//! - [`sampler`]: measurement protocols that turn a simulated state into a
//!   [`sampler::MeasurementDataset`], plus the dataset file format.
//! - [`estimators`]: U-statistic postprocessing of datasets.
//! - [`oracle`]: exact values computed from density matrices.
//!
//! Qubit 0 is the most significant bit of every basis index and bitstring.

pub mod ensembles;
pub mod error;
pub mod estimators;
pub mod oracle;
pub mod qcore;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
pub use estimators::EstimateWithError;
pub use qcore::{Partition, QuantumState, StateKind};
pub use sampler::{MeasurementDataset, Protocol};
