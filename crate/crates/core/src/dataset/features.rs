use super::{CalibrationStore, DatasetError, ExperimentRecord, Result};
use crate::topology::{CalibrationSnapshot, Path, Topology};

/// Path slots in the default feature layout.
pub const DEFAULT_PATH_SLOTS: usize = 100;
/// Value of unused path slots.
pub const PATH_SENTINEL: f64 = -1.0;

/// Model input: `[edge errors | readout errors | path qubits, -1 padded]`.
///
/// Edge errors follow the canonical edge order and readout errors follow
/// qubit order. Path slots hold raw qubit indices.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Self {
        FeatureVector(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }
}

impl From<Vec<f64>> for FeatureVector {
    fn from(values: Vec<f64>) -> Self {
        FeatureVector(values)
    }
}

/// Encodes a path under a calibration snapshot.
pub fn encode_features(
    topology: &Topology,
    calibration: &CalibrationSnapshot,
    path: &Path,
    slots: usize,
) -> Result<FeatureVector> {
    if path.len() > slots {
        return Err(DatasetError::PathTooLong {
            len: path.len(),
            slots,
        });
    }
    if !calibration.matches(topology) {
        return Err(DatasetError::CalibrationMismatch);
    }
    let mut values = Vec::with_capacity(topology.num_edges() + topology.num_qubits() + slots);
    values.extend(calibration.edge_errors().map(|(_, rate)| rate));
    values.extend_from_slice(calibration.readout_errors());
    values.extend(path.qubits().iter().map(|&q| q as f64));
    values.resize(
        topology.num_edges() + topology.num_qubits() + slots,
        PATH_SENTINEL,
    );
    Ok(FeatureVector(values))
}

/// Resolves the record's calibration and encodes it.
pub fn build_features(
    record: &ExperimentRecord,
    topology: &Topology,
    calibrations: &CalibrationStore,
    slots: usize,
) -> Result<FeatureVector> {
    let calibration = calibrations.get(record.calibration_id)?;
    encode_features(topology, calibration, &record.path, slots)
}
