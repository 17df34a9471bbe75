use serde::{Deserialize, Serialize};

use super::{NoiseError, Result};
use crate::circuit::{Circuit, Gate};
use crate::topology::{CalibrationSnapshot, Edge, Path, Topology};

/// Hilbert-space dimension of a two-qubit gate.
pub const TWO_QUBIT_DIM: usize = 4;

/// How a long-range CNOT is realized along a path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoutingMode {
    /// SWAP the control forward until it neighbors the target, then CNOT.
    /// The permutation is left in place.
    #[default]
    Permute,
    /// As `Permute`, then undo the SWAPs in reverse order.
    Restore,
}

impl std::str::FromStr for RoutingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "permute" => Ok(RoutingMode::Permute),
            "restore" => Ok(RoutingMode::Restore),
            other => Err(format!(
                "unknown routing mode `{other}` (expected permute|restore)"
            )),
        }
    }
}

fn check_unit(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(NoiseError::OutOfRange { what, value })
    }
}

/// Depolarizing survival parameter of one CNOT with error rate `eps`.
pub fn lambda_from_error(eps: f64) -> Result<f64> {
    check_unit("edge error", eps)?;
    Ok(1.0 - eps)
}

/// Number of physical CNOTs for a CNOT routed along a path of `len` qubits.
/// Each SWAP costs three CNOTs.
pub fn path_cnot_count(len: usize, mode: RoutingMode) -> usize {
    assert!(len >= 2, "a path has at least two qubits");
    let swaps = len - 2;
    match mode {
        RoutingMode::Permute => 3 * swaps + 1,
        RoutingMode::Restore => 6 * swaps + 1,
    }
}

/// Coupling used by each physical CNOT, in emission order.
pub fn path_cnot_edges(path: &Path, mode: RoutingMode) -> Vec<Edge> {
    let q = path.qubits();
    let n = q.len();
    let swap_edges: Vec<Edge> = (0..n - 2).map(|i| Edge::new(q[i], q[i + 1])).collect();
    let mut edges = Vec::with_capacity(path_cnot_count(n, mode));
    for &e in &swap_edges {
        edges.extend([e; 3]);
    }
    edges.push(Edge::new(q[n - 2], q[n - 1]));
    if mode == RoutingMode::Restore {
        for &e in swap_edges.iter().rev() {
            edges.extend([e; 3]);
        }
    }
    edges
}

/// The routed CNOT with every SWAP lowered to three CNOTs.
pub fn lowered_path_circuit(path: &Path, mode: RoutingMode, num_qubits: usize) -> Circuit {
    let q = path.qubits();
    let n = q.len();
    let mut gates = Vec::with_capacity(path_cnot_count(n, mode));
    let swap = |gates: &mut Vec<Gate>, a: usize, b: usize| {
        gates.extend([Gate::cnot(a, b), Gate::cnot(b, a), Gate::cnot(a, b)]);
    };
    for i in 0..n - 2 {
        swap(&mut gates, q[i], q[i + 1]);
    }
    gates.push(Gate::cnot(q[n - 2], q[n - 1]));
    if mode == RoutingMode::Restore {
        for i in (0..n - 2).rev() {
            swap(&mut gates, q[i], q[i + 1]);
        }
    }
    Circuit::from_gates(num_qubits, gates).expect("path qubits inside register")
}

/// Composite survival parameter of the routed CNOT.
pub fn path_lambda(
    topology: &Topology,
    calibration: &CalibrationSnapshot,
    path: &Path,
    mode: RoutingMode,
) -> Result<f64> {
    topology.validate_path(path)?;
    path_cnot_edges(path, mode)
        .into_iter()
        .try_fold(1.0, |acc, e| {
            let eps = calibration
                .edge_error(e.low(), e.high())
                .ok_or(NoiseError::MissingEdge(e))?;
            Ok(acc * lambda_from_error(eps)?)
        })
}

/// Process fidelity of a `d`-dimensional depolarizing channel with survival
/// parameter `lambda`.
pub fn analytic_process_fidelity(lambda: f64, d: usize) -> f64 {
    let d2 = (d * d) as f64;
    lambda + (1.0 - lambda) / d2
}

/// Ground-truth process fidelity of a CNOT routed along `path`.
pub fn path_process_fidelity(
    topology: &Topology,
    calibration: &CalibrationSnapshot,
    path: &Path,
    mode: RoutingMode,
) -> Result<f64> {
    Ok(analytic_process_fidelity(
        path_lambda(topology, calibration, path, mode)?,
        TWO_QUBIT_DIM,
    ))
}

/// Average gate fidelity from process fidelity: `(d F + 1) / (d + 1)`.
pub fn convert_gate_fidelity(f_process: f64, d: usize) -> Result<f64> {
    check_unit("process fidelity", f_process)?;
    if d < 2 {
        return Err(NoiseError::Dimension(d));
    }
    let d = d as f64;
    Ok((d * f_process + 1.0) / (d + 1.0))
}

/// Ground-truth gate fidelity of a CNOT routed along `path`.
pub fn path_gate_fidelity(
    topology: &Topology,
    calibration: &CalibrationSnapshot,
    path: &Path,
    mode: RoutingMode,
) -> Result<f64> {
    convert_gate_fidelity(
        path_process_fidelity(topology, calibration, path, mode)?,
        TWO_QUBIT_DIM,
    )
}
