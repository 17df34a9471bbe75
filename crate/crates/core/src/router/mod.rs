//! Gate-by-gate SWAP routing with fidelity-ranked or shortest paths.

mod compare;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, Gate};
use crate::dataset::{encode_features, DatasetError, DEFAULT_PATH_SLOTS};
use crate::gbdt::{GbdtError, GbdtModel};
use crate::noisesim::{NoiseError, RoutingMode};
use crate::topology::{
    CalibrationSnapshot, Path, Topology, TopologyError, DEFAULT_CAP, DEFAULT_SLACK,
};

pub use compare::{compare_benchmark, CaseOutcome, CaseRow, CompareConfig, ComparisonReport};

#[derive(Debug, Error)]
pub enum RouterError {
    #[error("circuit uses {logical} qubits but the device has {physical}")]
    CircuitTooWide { logical: usize, physical: usize },
    #[error("xgswap routing needs a trained model")]
    MissingModel,
    #[error("no candidate path from {from} to {to} fits in {lmax} qubits")]
    PathTooLong { from: usize, to: usize, lmax: usize },
    #[error("no paths to rank")]
    NoCandidates,
    #[error("path length range [{min}, {max}] is invalid")]
    LengthRange { min: usize, max: usize },
    #[error("no qubit pair with a shortest path of {min}..={max} qubits found")]
    NoPairs { min: usize, max: usize },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Model(#[from] GbdtError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

pub type Result<T, E = RouterError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    XgSwap,
    Shortest,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "xgswap" => Ok(Method::XgSwap),
            "shortest" => Ok(Method::Shortest),
            other => Err(format!(
                "unknown routing method `{other}` (expected xgswap|shortest)"
            )),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::XgSwap => "xgswap",
            Method::Shortest => "shortest",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteOptions {
    pub method: Method,
    pub slack: usize,
    pub cap: usize,
    pub mode: RoutingMode,
    /// Path slots of the model's feature layout.
    pub lmax: usize,
}

impl Default for RouteOptions {
    fn default() -> Self {
        RouteOptions {
            method: Method::XgSwap,
            slack: DEFAULT_SLACK,
            cap: DEFAULT_CAP,
            mode: RoutingMode::Permute,
            lmax: DEFAULT_PATH_SLOTS,
        }
    }
}

/// Logical-to-physical assignment over the whole device.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    to_physical: Vec<usize>,
    to_logical: Vec<usize>,
}

impl Layout {
    pub fn identity(n: usize) -> Self {
        Layout {
            to_physical: (0..n).collect(),
            to_logical: (0..n).collect(),
        }
    }

    pub fn physical(&self, logical: usize) -> usize {
        self.to_physical[logical]
    }

    pub fn logical(&self, physical: usize) -> usize {
        self.to_logical[physical]
    }

    /// Exchanges the logical qubits held by two physical qubits.
    pub fn swap_physical(&mut self, a: usize, b: usize) {
        let (la, lb) = (self.to_logical[a], self.to_logical[b]);
        self.to_logical.swap(a, b);
        self.to_physical[la] = b;
        self.to_physical[lb] = a;
    }

    /// `result[logical] = physical`.
    pub fn as_slice(&self) -> &[usize] {
        &self.to_physical
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChosenPath {
    pub gate_index: usize,
    pub path: Path,
    /// Model score of the path; absent for shortest-path routing.
    pub predicted_fidelity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoutedResult {
    pub circuit: Circuit,
    pub final_layout: Layout,
    pub chosen_paths: Vec<ChosenPath>,
    pub swap_count: usize,
}

/// Scores `paths` with the model, best first.
///
/// Order is score descending, then length ascending, then lexicographic.
pub fn rank_paths(
    paths: &[Path],
    topology: &Topology,
    calibration: &CalibrationSnapshot,
    model: &GbdtModel,
    lmax: usize,
) -> Result<Vec<(Path, f64)>> {
    if paths.is_empty() {
        return Err(RouterError::NoCandidates);
    }
    let mut scored = paths
        .iter()
        .map(|p| {
            let x = encode_features(topology, calibration, p, lmax)?;
            Ok((p.clone(), model.predict(x.values())?))
        })
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|(pa, fa), (pb, fb)| {
        fb.total_cmp(fa)
            .then(pa.len().cmp(&pb.len()))
            .then_with(|| pa.qubits().cmp(pb.qubits()))
    });
    Ok(scored)
}

/// Picks the path for one non-adjacent gate.
fn choose_path(
    from: usize,
    to: usize,
    topology: &Topology,
    calibration: &CalibrationSnapshot,
    model: Option<&GbdtModel>,
    options: &RouteOptions,
) -> Result<(Path, Option<f64>)> {
    match options.method {
        Method::Shortest => Ok((topology.shortest_path(from, to)?, None)),
        Method::XgSwap => {
            let model = model.ok_or(RouterError::MissingModel)?;
            let candidates: Vec<Path> = topology
                .enumerate_paths(from, to, options.slack, options.cap)?
                .into_iter()
                .filter(|p| p.len() <= options.lmax)
                .collect();
            if candidates.is_empty() {
                return Err(RouterError::PathTooLong {
                    from,
                    to,
                    lmax: options.lmax,
                });
            }
            let (path, score) =
                rank_paths(&candidates, topology, calibration, model, options.lmax)?.swap_remove(0);
            Ok((path, Some(score)))
        }
    }
}

/// Routes `circuit` onto `topology` starting from the identity layout.
///
/// Gates are processed in program order. A two-qubit gate on uncoupled
/// qubits gets a path from its first (control) qubit to its second; the
/// control is SWAPped along the path until it neighbors the target. Under
/// [`RoutingMode::Restore`] the SWAPs are undone after the gate.
pub fn route(
    circuit: &Circuit,
    topology: &Topology,
    calibration: &CalibrationSnapshot,
    model: Option<&GbdtModel>,
    options: &RouteOptions,
) -> Result<RoutedResult> {
    let n = topology.num_qubits();
    if circuit.num_qubits() > n {
        return Err(RouterError::CircuitTooWide {
            logical: circuit.num_qubits(),
            physical: n,
        });
    }
    if options.method == Method::XgSwap && model.is_none() {
        return Err(RouterError::MissingModel);
    }
    let mut layout = Layout::identity(n);
    let mut out = Circuit::new(n);
    let mut chosen_paths = Vec::new();
    let mut swap_count = 0;
    let push = |out: &mut Circuit, g: Gate| out.push(g).expect("physical qubit in range");

    for (gate_index, gate) in circuit.gates().iter().enumerate() {
        if !gate.is_two_qubit() {
            push(&mut out, gate.relabeled(|q| layout.physical(q)));
            continue;
        }
        let (pc, pt) = (
            layout.physical(gate.qubits()[0]),
            layout.physical(gate.qubits()[1]),
        );
        if topology.are_adjacent(pc, pt) {
            push(&mut out, gate.relabeled(|q| layout.physical(q)));
            continue;
        }
        let (path, predicted_fidelity) =
            choose_path(pc, pt, topology, calibration, model, options)?;
        let q = path.qubits();
        let hops = q.len() - 2;
        for i in 0..hops {
            push(&mut out, Gate::swap(q[i], q[i + 1]));
            layout.swap_physical(q[i], q[i + 1]);
        }
        swap_count += hops;
        push(&mut out, gate.relabeled(|l| layout.physical(l)));
        if options.mode == RoutingMode::Restore {
            for i in (0..hops).rev() {
                push(&mut out, Gate::swap(q[i], q[i + 1]));
                layout.swap_physical(q[i], q[i + 1]);
            }
            swap_count += hops;
        }
        chosen_paths.push(ChosenPath {
            gate_index,
            path,
            predicted_fidelity,
        });
    }
    Ok(RoutedResult {
        circuit: out,
        final_layout: layout,
        chosen_paths,
        swap_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;
    use crate::gbdt::{GbdtParams, Tree, TreeNode};
    use crate::noisesim::{equivalent_up_to_permutation, path_gate_fidelity};
    use crate::topology::{Edge, TopologyKind};

    fn shortest() -> RouteOptions {
        RouteOptions {
            method: Method::Shortest,
            ..Default::default()
        }
    }

    fn constant_model(width: usize) -> GbdtModel {
        GbdtModel {
            base_score: 0.5,
            eta: 1.0,
            feature_width: width,
            trees: vec![],
            params: GbdtParams::default(),
        }
    }

    #[test]
    fn layout_swaps_stay_bijective() {
        let mut l = Layout::identity(4);
        l.swap_physical(0, 1);
        l.swap_physical(1, 3);
        assert_eq!(l.as_slice(), &[3, 0, 2, 1]);
        for q in 0..4 {
            assert_eq!(l.logical(l.physical(q)), q);
        }
    }

    #[test]
    fn adjacent_gate_passes_through() {
        let t = TopologyKind::Line { n: 3 }.generate().unwrap();
        let cal = CalibrationSnapshot::uniform(&t, 0, 0.01, 0.01).unwrap();
        let c = Circuit::from_gates(2, vec![Gate::cnot(0, 1)]).unwrap();
        let r = route(&c, &t, &cal, None, &shortest()).unwrap();
        assert_eq!(r.circuit.gates(), c.gates());
        assert_eq!(r.swap_count, 0);
        assert_eq!(r.final_layout, Layout::identity(3));
        assert!(r.chosen_paths.is_empty());
    }

    #[test]
    fn line_cnot_zero_two() {
        let t = TopologyKind::Line { n: 3 }.generate().unwrap();
        let cal = CalibrationSnapshot::uniform(&t, 0, 0.01, 0.01).unwrap();
        let c = Circuit::from_gates(3, vec![Gate::cnot(0, 2)]).unwrap();
        let r = route(&c, &t, &cal, None, &shortest()).unwrap();
        assert_eq!(r.circuit.gates(), &[Gate::swap(0, 1), Gate::cnot(1, 2)]);
        assert_eq!(r.final_layout.as_slice(), &[1, 0, 2]);
        assert_eq!(r.swap_count, 1);
        assert!(r.circuit.coupling_satisfied(&t).is_satisfied());
        assert!(equivalent_up_to_permutation(&c, &r.circuit, r.final_layout.as_slice()).unwrap());
    }

    #[test]
    fn restore_mode_returns_to_identity() {
        let t = TopologyKind::Line { n: 4 }.generate().unwrap();
        let cal = CalibrationSnapshot::uniform(&t, 0, 0.01, 0.01).unwrap();
        let c =
            Circuit::from_gates(4, vec![Gate::cnot(0, 3), Gate::single(GateKind::H, 0)]).unwrap();
        let opts = RouteOptions {
            mode: RoutingMode::Restore,
            ..shortest()
        };
        let r = route(&c, &t, &cal, None, &opts).unwrap();
        assert_eq!(r.final_layout, Layout::identity(4));
        assert_eq!(r.swap_count, 4);
        assert!(equivalent_up_to_permutation(&c, &r.circuit, r.final_layout.as_slice()).unwrap());
    }

    #[test]
    fn ring_detour_avoids_failed_edge() {
        let t = TopologyKind::Ring { n: 4 }.generate().unwrap();
        let cal = CalibrationSnapshot::uniform(&t, 0, 0.001, 0.01)
            .unwrap()
            .with_edge_error(Edge::new(0, 1), 1.0)
            .unwrap();
        let lmax = 4;
        let width = 4 + 4 + lmax;
        // The (0,1) edge error is feature 0: a failed edge costs 0.5, and
        // paths through qubit 1 (slot 1 == 1) take the loss.
        let tree = Tree::from_nodes(vec![
            TreeNode::Split {
                feature: width - lmax + 1,
                threshold: 0.5,
                left: 1,
                right: 2,
            },
            TreeNode::Leaf { weight: 0.0 },
            TreeNode::Split {
                feature: width - lmax + 1,
                threshold: 1.5,
                left: 3,
                right: 4,
            },
            TreeNode::Split {
                feature: 0,
                threshold: 0.5,
                left: 5,
                right: 6,
            },
            TreeNode::Leaf { weight: 0.0 },
            TreeNode::Leaf { weight: 0.0 },
            TreeNode::Leaf { weight: -0.5 },
        ]);
        let model = GbdtModel {
            trees: vec![tree],
            ..constant_model(width)
        };
        let c = Circuit::from_gates(3, vec![Gate::cnot(0, 2)]).unwrap();
        let opts = RouteOptions {
            lmax,
            ..Default::default()
        };
        let r = route(&c, &t, &cal, Some(&model), &opts).unwrap();
        assert_eq!(r.chosen_paths[0].path.qubits(), &[0, 3, 2]);
        let via3 =
            path_gate_fidelity(&t, &cal, &Path::new(vec![0, 3, 2]), RoutingMode::Permute).unwrap();
        let via1 =
            path_gate_fidelity(&t, &cal, &Path::new(vec![0, 1, 2]), RoutingMode::Permute).unwrap();
        assert!(via3 > via1);
        let plain = route(&c, &t, &cal, None, &shortest()).unwrap();
        assert_eq!(plain.chosen_paths[0].path.qubits(), &[0, 1, 2]);
    }

    #[test]
    fn ranking_tie_breaks() {
        let t = TopologyKind::Ring { n: 6 }.generate().unwrap();
        let cal = CalibrationSnapshot::uniform(&t, 0, 0.01, 0.01).unwrap();
        let model = constant_model(6 + 6 + 8);
        let paths = vec![
            Path::new(vec![0, 5, 4, 3]),
            Path::new(vec![0, 1, 2]),
            Path::new(vec![0, 1, 2, 3]),
        ];
        let ranked = rank_paths(&paths, &t, &cal, &model, 8).unwrap();
        let order: Vec<&[usize]> = ranked.iter().map(|(p, _)| p.qubits()).collect();
        assert_eq!(order, vec![&[0, 1, 2][..], &[0, 1, 2, 3], &[0, 5, 4, 3]]);
        assert!(ranked.iter().all(|(_, s)| *s == 0.5));
        assert!(matches!(
            rank_paths(&paths, &t, &cal, &model, 3),
            Err(RouterError::Dataset(DatasetError::PathTooLong { .. }))
        ));
        assert!(matches!(
            rank_paths(&[], &t, &cal, &model, 8),
            Err(RouterError::NoCandidates)
        ));
    }

    #[test]
    fn error_cases() {
        let t = Topology::new(4, [(0, 1), (2, 3)]).unwrap();
        let cal = CalibrationSnapshot::uniform(&t, 0, 0.01, 0.01).unwrap();
        let c = Circuit::from_gates(4, vec![Gate::cnot(0, 3)]).unwrap();
        assert!(matches!(
            route(&c, &t, &cal, None, &shortest()),
            Err(RouterError::Topology(TopologyError::NoPath { .. }))
        ));
        assert!(matches!(
            route(&c, &t, &cal, None, &RouteOptions::default()),
            Err(RouterError::MissingModel)
        ));
        let wide = Circuit::from_gates(5, vec![]).unwrap();
        assert!(matches!(
            route(&wide, &t, &cal, None, &shortest()),
            Err(RouterError::CircuitTooWide { .. })
        ));
        let line = TopologyKind::Line { n: 6 }.generate().unwrap();
        let cal = CalibrationSnapshot::uniform(&line, 0, 0.01, 0.01).unwrap();
        let far = Circuit::from_gates(6, vec![Gate::cnot(0, 5)]).unwrap();
        let opts = RouteOptions {
            lmax: 4,
            ..Default::default()
        };
        assert!(matches!(
            route(&far, &line, &cal, Some(&constant_model(5 + 6 + 4)), &opts),
            Err(RouterError::PathTooLong { lmax: 4, .. })
        ));
    }

    #[test]
    fn method_parsing() {
        assert_eq!("xgswap".parse::<Method>().unwrap(), Method::XgSwap);
        assert_eq!("shortest".parse::<Method>().unwrap(), Method::Shortest);
        assert!("sabre".parse::<Method>().is_err());
    }
}
