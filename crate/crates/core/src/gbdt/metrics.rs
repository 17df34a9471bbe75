use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::{GbdtError, GbdtModel, Result};
use crate::dataset::{build_features, CalibrationStore, ExperimentRecord};
use crate::topology::Topology;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
    /// `None` when the truths have zero variance.
    pub r2: Option<f64>,
}

pub fn compute_metrics(predictions: &[f64], truths: &[f64]) -> Result<MetricsReport> {
    if predictions.is_empty() || predictions.len() != truths.len() {
        return Err(GbdtError::MetricLengths {
            predictions: predictions.len(),
            truths: truths.len(),
        });
    }
    let n = truths.len() as f64;
    let mae = predictions
        .iter()
        .zip(truths)
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / n;
    let sse: f64 = predictions
        .iter()
        .zip(truths)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    let mean = truths.iter().sum::<f64>() / n;
    let sst: f64 = truths.iter().map(|t| (t - mean) * (t - mean)).sum();
    let mse = sse / n;
    Ok(MetricsReport {
        mae,
        mse,
        rmse: mse.sqrt(),
        r2: (sst > 0.0).then(|| 1.0 - sse / sst),
    })
}

/// Mean measured and predicted fidelity for one path length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LengthRow {
    pub length: usize,
    pub count: usize,
    pub measured: f64,
    pub predicted: f64,
}

/// Per-length averages of measured and predicted fidelity, sorted by length.
pub fn fidelity_vs_length_table(
    model: &GbdtModel,
    records: &[ExperimentRecord],
    topology: &Topology,
    calibrations: &CalibrationStore,
    slots: usize,
) -> Result<Vec<LengthRow>> {
    let mut bins: BTreeMap<usize, (usize, f64, f64)> = BTreeMap::new();
    for r in records {
        let x = build_features(r, topology, calibrations, slots)?;
        let p = model.predict(x.values())?;
        let e = bins.entry(r.path_length()).or_default();
        e.0 += 1;
        e.1 += r.gate_fidelity;
        e.2 += p;
    }
    Ok(bins
        .into_iter()
        .map(|(length, (count, m, p))| LengthRow {
            length,
            count,
            measured: m / count as f64,
            predicted: p / count as f64,
        })
        .collect())
}

pub fn write_length_table_csv<W: Write>(rows: &[LengthRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "length,count,measured_fidelity,predicted_fidelity")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.length, r.count, r.measured, r.predicted
        )?;
    }
    Ok(())
}
