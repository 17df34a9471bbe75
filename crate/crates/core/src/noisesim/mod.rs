//! Synthetic noise backend.
//!
//! A routed CNOT is modeled as the ideal gate followed by a global two-qubit
//! depolarizing channel whose survival parameter is the product of
//! `1 - eps` over every physical CNOT the routing emits. The module provides
//! the closed-form fidelity of that channel, a statevector simulator for
//! equivalence checks, and a full two-qubit process tomography pipeline that
//! recovers the same fidelity from simulated measurements.

mod channel;
mod statevector;
mod tomography;

use thiserror::Error;

use crate::topology::{CalibrationError, Edge, TopologyError};

pub use channel::{
    analytic_process_fidelity, convert_gate_fidelity, lambda_from_error, lowered_path_circuit,
    path_cnot_count, path_cnot_edges, path_gate_fidelity, path_lambda, path_process_fidelity,
    RoutingMode, TWO_QUBIT_DIM,
};
pub use statevector::{equivalent_up_to_permutation, simulate_statevector, MAX_SIM_QUBITS};
pub use tomography::{
    run_process_tomography, ProcessTomographyResult, SettingExpectation, Shots, TomographyConfig,
};

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("{what} = {value} is outside [0, 1]")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("Hilbert-space dimension {0} is below 2")]
    Dimension(usize),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error("calibration has no rate for edge {0}")]
    MissingEdge(Edge),
    #[error("calibration has no readout rate for qubit {0}")]
    MissingReadout(usize),
    #[error("circuit has {found} qubits; the simulator is limited to {max}")]
    TooManyQubits { found: usize, max: usize },
    #[error("circuits act on {left} and {right} qubits")]
    WidthMismatch { left: usize, right: usize },
    #[error("output permutation {0:?} is not a bijection on the register")]
    BadPermutation(Vec<usize>),
    #[error("basis state {index} is outside a {num_qubits}-qubit register")]
    BasisOutOfRange { index: usize, num_qubits: usize },
    #[error("shot count must be at least 1")]
    ZeroShots,
    #[error("tomography reconstruction matrix is singular")]
    SingularReconstruction,
    #[error("readout rate {rate} on qubit {qubit} cannot be inverted")]
    UnmitigableReadout { qubit: usize, rate: f64 },
}

pub type Result<T, E = NoiseError> = std::result::Result<T, E>;
