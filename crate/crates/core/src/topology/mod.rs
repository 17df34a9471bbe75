//! Device coupling graphs, calibration snapshots and path primitives.
//!
//! Edges are undirected and stored canonically as `(min, max)`. The canonical
//! edge order is lexicographic on that pair; it fixes the layout of every
//! per-edge vector in the crate (calibration rates, feature vectors, visit
//! counts).

mod calibration;
mod generate;
mod paths;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use calibration::{CalibrationError, CalibrationSnapshot, SyntheticCalibration};
pub use generate::{TopologyKind, HEAVY_HEX_REFERENCE};
pub use paths::{VisitationStats, DEFAULT_CAP, DEFAULT_SLACK};

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("topology parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("topology must have at least one qubit")]
    NoQubits,
    #[error("edge ({0},{0}) is a self-loop")]
    SelfLoop(usize),
    #[error("edge ({a},{b}) references a qubit outside [0, {num_qubits})")]
    EdgeOutOfRange {
        a: usize,
        b: usize,
        num_qubits: usize,
    },
    #[error("edge {0} appears more than once")]
    DuplicateEdge(Edge),
    #[error("unsupported size for {kind}: {reason}")]
    UnsupportedSize { kind: &'static str, reason: String },
    #[error("qubit {qubit} is outside [0, {num_qubits})")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("source and destination are both qubit {0}")]
    SameEndpoints(usize),
    #[error("no path between qubits {from} and {to}")]
    NoPath { from: usize, to: usize },
    #[error("invalid path {path:?}: {reason}")]
    InvalidPath { path: Vec<usize>, reason: String },
}

pub type Result<T, E = TopologyError> = std::result::Result<T, E>;

/// An undirected coupling, always stored as `(min, max)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge(usize, usize);

impl Edge {
    /// Canonicalizes the pair. Self-loops are representable here and rejected
    /// by [`Topology::new`].
    pub fn new(a: usize, b: usize) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn low(&self) -> usize {
        self.0
    }

    pub fn high(&self) -> usize {
        self.1
    }

    pub fn contains(&self, qubit: usize) -> bool {
        self.0 == qubit || self.1 == qubit
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0, self.1)
    }
}

/// A simple path through the coupling graph, control first and target last.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path(Vec<usize>);

impl Path {
    /// Builds a path without checking adjacency; use [`Topology::validate_path`]
    /// before trusting it against a device.
    pub fn new(qubits: Vec<usize>) -> Self {
        Path(qubits)
    }

    pub fn qubits(&self) -> &[usize] {
        &self.0
    }

    /// Number of qubits on the path (an adjacent pair has length 2).
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn control(&self) -> usize {
        self.0[0]
    }

    pub fn target(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    /// Consecutive couplings along the path in traversal order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.0.windows(2).map(|w| Edge::new(w[0], w[1]))
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl From<Vec<usize>> for Path {
    fn from(qubits: Vec<usize>) -> Self {
        Path(qubits)
    }
}

/// Coupling graph of a device.
#[derive(Clone, Debug)]
pub struct Topology {
    num_qubits: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
    edge_index: HashMap<Edge, usize>,
}

impl PartialEq for Topology {
    fn eq(&self, other: &Self) -> bool {
        self.num_qubits == other.num_qubits && self.edges == other.edges
    }
}

impl Eq for Topology {}

#[derive(Serialize, Deserialize)]
struct TopologyDocument {
    num_qubits: usize,
    edges: Vec<[usize; 2]>,
}

impl Topology {
    /// Validates and canonicalizes an edge list.
    pub fn new<I>(num_qubits: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if num_qubits == 0 {
            return Err(TopologyError::NoQubits);
        }
        let mut canonical = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(TopologyError::SelfLoop(a));
            }
            if a >= num_qubits || b >= num_qubits {
                return Err(TopologyError::EdgeOutOfRange { a, b, num_qubits });
            }
            canonical.push(Edge::new(a, b));
        }
        canonical.sort_unstable();
        if let Some(w) = canonical.windows(2).find(|w| w[0] == w[1]) {
            return Err(TopologyError::DuplicateEdge(w[0]));
        }

        let mut adjacency = vec![Vec::new(); num_qubits];
        for e in &canonical {
            adjacency[e.0].push(e.1);
            adjacency[e.1].push(e.0);
        }
        for neighbors in &mut adjacency {
            neighbors.sort_unstable();
        }
        let edge_index = canonical.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        Ok(Topology {
            num_qubits,
            edges: canonical,
            adjacency,
            edge_index,
        })
    }

    /// Parses the `{"num_qubits": n, "edges": [[a, b], ...]}` document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TopologyDocument =
            serde_json::from_str(text).map_err(|e| TopologyError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        Topology::new(doc.num_qubits, doc.edges.into_iter().map(|[a, b]| (a, b)))
    }

    pub fn to_json(&self) -> String {
        let doc = TopologyDocument {
            num_qubits: self.num_qubits,
            edges: self.edges.iter().map(|e| [e.0, e.1]).collect(),
        };
        serde_json::to_string(&doc).expect("topology document serializes")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges in canonical order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbors of `qubit` in ascending index order.
    pub fn neighbors(&self, qubit: usize) -> &[usize] {
        &self.adjacency[qubit]
    }

    /// Position of `(a, b)` in the canonical edge order, if coupled.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&Edge::new(a, b)).copied()
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.edge_index(a, b).is_some()
    }

    pub(crate) fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            Err(TopologyError::QubitOutOfRange {
                qubit,
                num_qubits: self.num_qubits,
            })
        } else {
            Ok(())
        }
    }

    /// Checks that `path` is a simple path of at least two qubits whose
    /// consecutive elements are coupled.
    pub fn validate_path(&self, path: &Path) -> Result<()> {
        let invalid = |reason: String| TopologyError::InvalidPath {
            path: path.qubits().to_vec(),
            reason,
        };
        let qubits = path.qubits();
        if qubits.len() < 2 {
            return Err(invalid("fewer than two qubits".into()));
        }
        let mut seen = vec![false; self.num_qubits];
        for &q in qubits {
            if q >= self.num_qubits {
                return Err(invalid(format!("qubit {q} out of range")));
            }
            if std::mem::replace(&mut seen[q], true) {
                return Err(invalid(format!("qubit {q} repeated")));
            }
        }
        for w in qubits.windows(2) {
            if !self.are_adjacent(w[0], w[1]) {
                return Err(invalid(format!(
                    "qubits {} and {} are not coupled",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }
}
