//! Fidelity-aware qubit routing: device graphs, a synthetic noise backend,
//! experiment datasets, a gradient-boosted fidelity model and the routers
//! built on it.

pub mod circuit;
pub mod dataset;
pub mod gbdt;
pub mod noisesim;
pub mod rng;
pub mod router;
pub mod topology;

pub use circuit::{Circuit, Gate, GateKind};
pub use dataset::{CalibrationStore, ExperimentRecord, FeatureVector};
pub use gbdt::{GbdtModel, GbdtParams, MetricsReport};
pub use noisesim::{RoutingMode, Shots};
pub use router::{ComparisonReport, Layout, Method, RouteOptions, RoutedResult};
pub use topology::{CalibrationSnapshot, Edge, Path, Topology, TopologyKind};
