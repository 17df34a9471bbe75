//! Shared fixtures for the criterion benchmarks.

use fidroute_core::dataset::{
    build_features, generate_experiments, CalibrationStore, GenerationConfig,
};
use fidroute_core::gbdt::{train, GbdtModel, GbdtParams};
use fidroute_core::rng::substream;
use fidroute_core::topology::{
    CalibrationSnapshot, SyntheticCalibration, Topology, HEAVY_HEX_REFERENCE,
};

pub const SEED: u64 = 42;

pub fn reference_device() -> (Topology, CalibrationSnapshot) {
    let topology = HEAVY_HEX_REFERENCE.generate().expect("reference device");
    let calibration = SyntheticCalibration::default()
        .generate(&topology, &mut substream(SEED, "calibration", 0))
        .expect("calibration");
    (topology, calibration)
}

/// Feature rows and labels from `count` exact experiments on the reference device.
pub fn training_set(count: usize, slots: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (topology, calibration) = reference_device();
    let store = CalibrationStore::new(vec![calibration]);
    let config = GenerationConfig {
        count,
        max_len: slots,
        seed: SEED,
        ..Default::default()
    };
    let records = generate_experiments(&topology, &store, &config).expect("experiments");
    let x = records
        .iter()
        .map(|r| {
            build_features(r, &topology, &store, slots)
                .expect("features")
                .values()
                .to_vec()
        })
        .collect();
    let y = records.iter().map(|r| r.gate_fidelity).collect();
    (x, y)
}

pub fn small_model(slots: usize) -> GbdtModel {
    let (x, y) = training_set(400, slots);
    let params = GbdtParams {
        rounds: 40,
        ..Default::default()
    };
    train(&x, &y, &params).expect("training")
}
