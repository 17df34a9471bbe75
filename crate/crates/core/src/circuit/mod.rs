//! Gate-list circuit IR over physical qubits, with an OpenQASM 2.0 subset
//! reader/writer.

mod qasm;

use std::fmt;

use thiserror::Error;

use crate::topology::Topology;

pub use qasm::{emit_qasm, parse_qasm, QasmError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind {
    Cnot,
    Swap,
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    /// Z rotation by the angle in radians.
    Rz(f64),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Swap => 2,
            _ => 1,
        }
    }

    /// Lower-case OpenQASM mnemonic.
    pub fn mnemonic(&self) -> &'static str {
        match self {
            GateKind::Cnot => "cx",
            GateKind::Swap => "swap",
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::Rz(_) => "rz",
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("gate {kind} expects {expected} qubits, got {found}")]
    Arity {
        kind: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("two-qubit gate {kind} acts twice on qubit {qubit}")]
    RepeatedQubit { kind: &'static str, qubit: usize },
    #[error("qubit {qubit} is outside the {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
}

/// One gate application. For CNOT the first qubit is the control.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    kind: GateKind,
    qubits: [usize; 2],
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize]) -> Result<Self, CircuitError> {
        if qubits.len() != kind.arity() {
            return Err(CircuitError::Arity {
                kind: kind.mnemonic(),
                expected: kind.arity(),
                found: qubits.len(),
            });
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(CircuitError::RepeatedQubit {
                kind: kind.mnemonic(),
                qubit: qubits[0],
            });
        }
        let mut q = [qubits[0], 0];
        if qubits.len() == 2 {
            q[1] = qubits[1];
        }
        Ok(Gate { kind, qubits: q })
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::new(GateKind::Cnot, &[control, target]).expect("distinct CNOT qubits")
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Gate::new(GateKind::Swap, &[a, b]).expect("distinct SWAP qubits")
    }

    pub fn single(kind: GateKind, qubit: usize) -> Self {
        Gate::new(kind, &[qubit]).expect("single-qubit kind")
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }

    pub fn is_two_qubit(&self) -> bool {
        self.kind.arity() == 2
    }

    /// Same gate with every qubit passed through `map`.
    pub fn relabeled(&self, map: impl Fn(usize) -> usize) -> Self {
        let mut out = self.clone();
        for q in &mut out.qubits[..self.kind.arity()] {
            *q = map(*q);
        }
        out
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GateKind::Rz(theta) => write!(f, "rz({theta:?})")?,
            k => f.write_str(k.mnemonic())?,
        }
        let qs: Vec<String> = self.qubits().iter().map(|q| format!("q[{q}]")).collect();
        write!(f, " {}", qs.join(","))
    }
}

/// Ordered gate list over `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

/// Result of checking a circuit against a coupling map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingCheck {
    Satisfied,
    /// Index of the first two-qubit gate acting on an uncoupled pair.
    Violated {
        gate_index: usize,
    },
}

impl CouplingCheck {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, CouplingCheck::Satisfied)
    }
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(num_qubits: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        let mut c = Circuit::new(num_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        if let Some(&qubit) = gate.qubits().iter().find(|&&q| q >= self.num_qubits) {
            return Err(CircuitError::QubitOutOfRange {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Same gates on a register of `num_qubits >= self.num_qubits()`; the
    /// extra qubits stay idle.
    pub fn widened(&self, num_qubits: usize) -> Self {
        assert!(num_qubits >= self.num_qubits, "cannot shrink a register");
        Circuit {
            num_qubits,
            gates: self.gates.clone(),
        }
    }

    /// Checks that every two-qubit gate acts on a coupled pair of `topology`.
    pub fn coupling_satisfied(&self, topology: &Topology) -> CouplingCheck {
        self.gates
            .iter()
            .position(|g| {
                g.is_two_qubit() && {
                    let q = g.qubits();
                    q[0] >= topology.num_qubits()
                        || q[1] >= topology.num_qubits()
                        || !topology.are_adjacent(q[0], q[1])
                }
            })
            .map_or(CouplingCheck::Satisfied, |gate_index| {
                CouplingCheck::Violated { gate_index }
            })
    }
}
