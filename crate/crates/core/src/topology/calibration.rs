use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Edge, Topology};

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error("calibration parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("calibration has no entry for edge {0}")]
    MissingEdge(Edge),
    #[error("calibration lists edge {0}, which is not a coupling of the topology")]
    UnknownEdge(Edge),
    #[error("calibration lists edge {0} more than once")]
    DuplicateEdge(Edge),
    #[error("calibration has {found} readout rates, topology has {expected} qubits")]
    ReadoutCount { expected: usize, found: usize },
    #[error("rate {rate} for {what} is outside [0, 1]")]
    RateOutOfRange { what: String, rate: f64 },
    #[error("cannot plant {requested} failed edges on a topology with {available} edges")]
    TooManyFailures { requested: usize, available: usize },
}

/// Device error rates at one instant.
///
/// Edge rates are two-qubit gate error probabilities; readout rates are
/// per-qubit measurement bit-flip probabilities. A rate of exactly 1 marks a
/// failed calibration and is legal.
#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationSnapshot {
    pub timestamp: i64,
    edge_error: BTreeMap<Edge, f64>,
    readout_error: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CalibrationDocument {
    timestamp: i64,
    edge_errors: Vec<(usize, usize, f64)>,
    readout_errors: Vec<f64>,
}

fn check_rate(what: impl FnOnce() -> String, rate: f64) -> Result<(), CalibrationError> {
    if (0.0..=1.0).contains(&rate) {
        Ok(())
    } else {
        Err(CalibrationError::RateOutOfRange { what: what(), rate })
    }
}

impl CalibrationSnapshot {
    /// Builds a snapshot whose keys exactly cover `topology`.
    pub fn new(
        topology: &Topology,
        timestamp: i64,
        edge_errors: impl IntoIterator<Item = (Edge, f64)>,
        readout_error: Vec<f64>,
    ) -> Result<Self, CalibrationError> {
        let mut edge_error = BTreeMap::new();
        for (edge, rate) in edge_errors {
            if topology.edge_index(edge.low(), edge.high()).is_none() {
                return Err(CalibrationError::UnknownEdge(edge));
            }
            check_rate(|| format!("edge {edge}"), rate)?;
            if edge_error.insert(edge, rate).is_some() {
                return Err(CalibrationError::DuplicateEdge(edge));
            }
        }
        if let Some(missing) = topology
            .edges()
            .iter()
            .find(|e| !edge_error.contains_key(e))
        {
            return Err(CalibrationError::MissingEdge(*missing));
        }
        if readout_error.len() != topology.num_qubits() {
            return Err(CalibrationError::ReadoutCount {
                expected: topology.num_qubits(),
                found: readout_error.len(),
            });
        }
        for (q, &rate) in readout_error.iter().enumerate() {
            check_rate(|| format!("readout of qubit {q}"), rate)?;
        }
        Ok(CalibrationSnapshot {
            timestamp,
            edge_error,
            readout_error,
        })
    }

    /// Every edge at `edge_rate`, every qubit at `readout_rate`.
    pub fn uniform(
        topology: &Topology,
        timestamp: i64,
        edge_rate: f64,
        readout_rate: f64,
    ) -> Result<Self, CalibrationError> {
        Self::new(
            topology,
            timestamp,
            topology.edges().iter().map(|&e| (e, edge_rate)),
            vec![readout_rate; topology.num_qubits()],
        )
    }

    /// Parses `{"timestamp", "edge_errors": [[a, b, rate], ...], "readout_errors": [...]}`
    /// and checks it against `topology`.
    pub fn from_json(text: &str, topology: &Topology) -> Result<Self, CalibrationError> {
        let doc: CalibrationDocument =
            serde_json::from_str(text).map_err(|e| CalibrationError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        Self::from_document(doc, topology)
    }

    fn from_document(
        doc: CalibrationDocument,
        topology: &Topology,
    ) -> Result<Self, CalibrationError> {
        Self::new(
            topology,
            doc.timestamp,
            doc.edge_errors
                .into_iter()
                .map(|(a, b, r)| (Edge::new(a, b), r)),
            doc.readout_errors,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.document()).expect("calibration document serializes")
    }

    fn document(&self) -> CalibrationDocument {
        CalibrationDocument {
            timestamp: self.timestamp,
            edge_errors: self
                .edge_error
                .iter()
                .map(|(e, &r)| (e.low(), e.high(), r))
                .collect(),
            readout_errors: self.readout_error.clone(),
        }
    }

    /// Two-qubit error rate of the coupling `(a, b)`.
    pub fn edge_error(&self, a: usize, b: usize) -> Option<f64> {
        self.edge_error.get(&Edge::new(a, b)).copied()
    }

    pub fn readout_error(&self, qubit: usize) -> Option<f64> {
        self.readout_error.get(qubit).copied()
    }

    /// Edge rates in canonical edge order.
    pub fn edge_errors(&self) -> impl Iterator<Item = (Edge, f64)> + '_ {
        self.edge_error.iter().map(|(e, &r)| (*e, r))
    }

    pub fn readout_errors(&self) -> &[f64] {
        &self.readout_error
    }

    /// Returns a copy with one edge rate replaced.
    pub fn with_edge_error(&self, edge: Edge, rate: f64) -> Result<Self, CalibrationError> {
        check_rate(|| format!("edge {edge}"), rate)?;
        let mut out = self.clone();
        match out.edge_error.get_mut(&edge) {
            Some(slot) => *slot = rate,
            None => return Err(CalibrationError::UnknownEdge(edge)),
        }
        Ok(out)
    }

    /// True when the snapshot covers exactly the couplings of `topology`.
    pub fn matches(&self, topology: &Topology) -> bool {
        self.readout_error.len() == topology.num_qubits()
            && self.edge_error.len() == topology.num_edges()
            && topology
                .edges()
                .iter()
                .all(|e| self.edge_error.contains_key(e))
    }
}

/// Parameters of the synthetic calibration generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCalibration {
    /// Edge rates are log-uniform in this range.
    pub edge_range: (f64, f64),
    /// Readout rates are uniform in this range.
    pub readout_range: (f64, f64),
    /// Number of edges planted with rate 1.0.
    pub fail_edges: usize,
    pub timestamp: i64,
}

impl Default for SyntheticCalibration {
    fn default() -> Self {
        SyntheticCalibration {
            edge_range: (1e-3, 5e-2),
            readout_range: (5e-3, 5e-2),
            fail_edges: 0,
            timestamp: 1_700_000_000,
        }
    }
}

impl SyntheticCalibration {
    pub fn generate<R: Rng + ?Sized>(
        &self,
        topology: &Topology,
        rng: &mut R,
    ) -> Result<CalibrationSnapshot, CalibrationError> {
        let available = topology.num_edges();
        if self.fail_edges > available {
            return Err(CalibrationError::TooManyFailures {
                requested: self.fail_edges,
                available,
            });
        }
        let (lo, hi) = self.edge_range;
        let (log_lo, log_hi) = (lo.ln(), hi.ln());
        let mut rates: Vec<f64> = (0..available)
            .map(|_| (log_lo + (log_hi - log_lo) * rng.random::<f64>()).exp())
            .collect();
        for i in sample(rng, available, self.fail_edges) {
            rates[i] = 1.0;
        }
        let (rlo, rhi) = self.readout_range;
        let readout = (0..topology.num_qubits())
            .map(|_| rlo + (rhi - rlo) * rng.random::<f64>())
            .collect();
        CalibrationSnapshot::new(
            topology,
            self.timestamp,
            topology.edges().iter().copied().zip(rates),
            readout,
        )
    }
}
