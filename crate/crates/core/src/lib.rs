//! Density-matrix simulation of NMR analogs of Bell-inequality tests.
//!
//! - [`densmat`]: dense complex matrices and qubit states
//! - [`channels`]: rotations, controlled gates, Kraus channels, relaxation
//! - [`pps`]: pseudo-pure and thermal state preparation
//! - [`bell`]: correlations, inequality evaluation, shot sampling
//! - [`readout`]: gradient dephasing, line amplitudes, Pauli tomography
//! - [`lrhvm`]: bulk-ensemble pipeline, separability gate, polarization sweeps

#![forbid(unsafe_code)]

pub mod bell;
pub mod channels;
pub mod densmat;
pub mod error;
pub mod lrhvm;
pub mod pps;
pub mod readout;

pub use bell::{
    chsh_qm_prediction, chsh_spec, correlation_from_probs, correlation_qm, evaluate_inequality,
    joint_probabilities, sample_shots, InequalityEvaluation, InequalitySpec, MeasurementDirection,
    OutcomeDistribution,
};
pub use channels::{KrausChannel, RelaxationParams};
pub use densmat::{ComplexMatrix, DensityMatrix, PureState};
pub use error::{Error, Result};
pub use lrhvm::{EnsembleRun, ExperimentRecord, PrepRoute, SweepResult};
pub use pps::PseudoPureState;
pub use readout::TomographyResult;
pub use num_complex::Complex64;
