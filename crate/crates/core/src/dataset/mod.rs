//! Experiment records, data preparation and feature encoding.
//!
//! Records are collected against the synthetic backend: each one routes a
//! CNOT along a random simple path under one calibration snapshot and labels
//! it with the gate fidelity measured by process tomography. Records keep a
//! calibration id; rates are resolved only when features are built.

mod features;
mod io;
pub mod sampling;
mod split;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::noisesim::{run_process_tomography, NoiseError, RoutingMode, Shots, TomographyConfig};
use crate::rng::{derive_seed, substream};
use crate::topology::{CalibrationError, CalibrationSnapshot, Path, Topology, TopologyError};

pub use features::{
    build_features, encode_features, FeatureVector, DEFAULT_PATH_SLOTS, PATH_SENTINEL,
};
pub use io::{append_records, load_calibrations, load_dataset, save_calibrations, save_dataset};
pub use split::{bin_and_sample, BinSummary, DatasetSplit};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("no records")]
    Empty,
    #[error("length range [{min}, {max}] is invalid for a {num_qubits}-qubit device")]
    LengthRange {
        min: usize,
        max: usize,
        num_qubits: usize,
    },
    #[error("experiment count must be at least 1")]
    ZeroCount,
    #[error("at least one calibration snapshot is required")]
    NoCalibrations,
    #[error("no simple path of length {0} found after bounded retries")]
    UnreachableLength(usize),
    #[error("unknown calibration id {0}")]
    UnknownCalibration(u32),
    #[error("path of {len} qubits exceeds the {slots} path slots")]
    PathTooLong { len: usize, slots: usize },
    #[error("calibration snapshot does not match the topology")]
    CalibrationMismatch,
    #[error(
        "dataset too small: the smallest length bin (length {length}) has {size} records, \
         so 2/3 of it rounds down to zero"
    )]
    TooSmall { length: usize, size: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
}

pub type Result<T, E = DatasetError> = std::result::Result<T, E>;

/// One routed-CNOT experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub path: Path,
    pub timestamp: i64,
    pub calibration_id: u32,
    pub gate_fidelity: f64,
}

impl ExperimentRecord {
    pub fn path_length(&self) -> usize {
        self.path.len()
    }
}

/// Calibration snapshots addressed by id (their index).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CalibrationStore {
    snapshots: Vec<CalibrationSnapshot>,
}

impl CalibrationStore {
    pub fn new(snapshots: Vec<CalibrationSnapshot>) -> Self {
        CalibrationStore { snapshots }
    }

    pub fn get(&self, id: u32) -> Result<&CalibrationSnapshot> {
        self.snapshots
            .get(id as usize)
            .ok_or(DatasetError::UnknownCalibration(id))
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[CalibrationSnapshot] {
        &self.snapshots
    }
}

/// Settings for [`generate_experiments`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub count: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub seed: u64,
    pub shots: Shots,
    pub mode: RoutingMode,
    /// Candidate paths gathered per start qubit during sampling.
    pub candidates: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            count: 4050,
            min_len: 2,
            max_len: 100,
            seed: 0,
            shots: Shots::Exact,
            mode: RoutingMode::Permute,
            candidates: sampling::DEFAULT_CANDIDATES,
        }
    }
}

/// Runs `config.count` random CNOT experiments.
///
/// Record `i` draws from its own RNG stream, so the output does not depend on
/// scheduling. Each record picks a snapshot uniformly, a path length
/// uniformly in `[min_len, max_len]`, a random simple path of that length,
/// and is labelled by tomography on the synthetic backend.
pub fn generate_experiments(
    topology: &Topology,
    calibrations: &CalibrationStore,
    config: &GenerationConfig,
) -> Result<Vec<ExperimentRecord>> {
    if config.count == 0 {
        return Err(DatasetError::ZeroCount);
    }
    if calibrations.is_empty() {
        return Err(DatasetError::NoCalibrations);
    }
    if calibrations
        .snapshots()
        .iter()
        .any(|c| !c.matches(topology))
    {
        return Err(DatasetError::CalibrationMismatch);
    }
    if config.min_len < 2
        || config.min_len > config.max_len
        || config.max_len > topology.num_qubits()
    {
        return Err(DatasetError::LengthRange {
            min: config.min_len,
            max: config.max_len,
            num_qubits: topology.num_qubits(),
        });
    }

    (0..config.count)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(config.seed, "experiment", i as u64);
            let calibration_id = rng.random_range(0..calibrations.len()) as u32;
            let length = rng.random_range(config.min_len..=config.max_len);
            let path = sampling::sample_path(topology, length, config.candidates, &mut rng)
                .ok_or(DatasetError::UnreachableLength(length))?;
            let calibration = calibrations.get(calibration_id)?;
            let tomography = TomographyConfig {
                shots: config.shots,
                seed: derive_seed(config.seed, "experiment-tomography", i as u64),
                mode: config.mode,
                mitigate_readout: true,
            };
            let result = run_process_tomography(topology, calibration, &path, &tomography)?;
            Ok(ExperimentRecord {
                path,
                timestamp: calibration.timestamp + rng.random_range(0..3600),
                calibration_id,
                gate_fidelity: result.gate_fidelity,
            })
        })
        .collect()
}

/// Count and path-length statistics of a record set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DatasetSummary {
    pub count: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub mean_len: f64,
}

impl DatasetSummary {
    pub fn of(records: &[ExperimentRecord]) -> Option<Self> {
        let lengths = records.iter().map(ExperimentRecord::path_length);
        let min_len = lengths.clone().min()?;
        let max_len = lengths.clone().max()?;
        let mean_len = lengths.sum::<usize>() as f64 / records.len() as f64;
        Some(DatasetSummary {
            count: records.len(),
            min_len,
            max_len,
            mean_len,
        })
    }
}
