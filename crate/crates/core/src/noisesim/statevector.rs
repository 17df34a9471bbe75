//! Dense noiseless statevector simulation.
//!
//! Basis index convention: qubit `q` of an `n`-qubit register is bit
//! `n - 1 - q` of the index, so the ket `|q0 q1 ... q(n-1)>` reads as the
//! binary expansion of its index. `|10>` on two qubits is index 2.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::{NoiseError, Result};
use crate::circuit::{Circuit, GateKind};

/// Resource guard for dense simulation.
pub const MAX_SIM_QUBITS: usize = 12;

type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn single_qubit_matrix(kind: GateKind) -> Mat2 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    match kind {
        GateKind::H => [[h, h], [h, -h]],
        GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
        GateKind::Y => [[ZERO, -I], [I, ZERO]],
        GateKind::Z => [[ONE, ZERO], [ZERO, -ONE]],
        GateKind::S => [[ONE, ZERO], [ZERO, I]],
        GateKind::Sdg => [[ONE, ZERO], [ZERO, -I]],
        GateKind::Rz(theta) => [
            [Complex64::from_polar(1.0, -theta / 2.0), ZERO],
            [ZERO, Complex64::from_polar(1.0, theta / 2.0)],
        ],
        GateKind::Cnot | GateKind::Swap => unreachable!("two-qubit gate"),
    }
}

fn check_width(n: usize) -> Result<()> {
    if n > MAX_SIM_QUBITS {
        Err(NoiseError::TooManyQubits {
            found: n,
            max: MAX_SIM_QUBITS,
        })
    } else {
        Ok(())
    }
}

fn apply(circuit: &Circuit, state: &mut [Complex64]) {
    let n = circuit.num_qubits();
    let mask = |q: usize| 1usize << (n - 1 - q);
    for gate in circuit.gates() {
        let qs = gate.qubits();
        match gate.kind() {
            GateKind::Cnot => {
                let (c, t) = (mask(qs[0]), mask(qs[1]));
                for i in 0..state.len() {
                    if i & c != 0 && i & t == 0 {
                        state.swap(i, i | t);
                    }
                }
            }
            GateKind::Swap => {
                let (a, b) = (mask(qs[0]), mask(qs[1]));
                for i in 0..state.len() {
                    if i & a != 0 && i & b == 0 {
                        state.swap(i, (i & !a) | b);
                    }
                }
            }
            kind => {
                let m = single_qubit_matrix(kind);
                let bit = mask(qs[0]);
                for i in 0..state.len() {
                    if i & bit == 0 {
                        let (a0, a1) = (state[i], state[i | bit]);
                        state[i] = m[0][0] * a0 + m[0][1] * a1;
                        state[i | bit] = m[1][0] * a0 + m[1][1] * a1;
                    }
                }
            }
        }
    }
}

/// Runs `circuit` on the computational basis state `initial`.
pub fn simulate_statevector(circuit: &Circuit, initial: usize) -> Result<Vec<Complex64>> {
    let n = circuit.num_qubits();
    check_width(n)?;
    let dim = 1usize << n;
    if initial >= dim {
        return Err(NoiseError::BasisOutOfRange {
            index: initial,
            num_qubits: n,
        });
    }
    let mut state = vec![ZERO; dim];
    state[initial] = ONE;
    apply(circuit, &mut state);
    Ok(state)
}

/// Checks that `b` implements the same unitary as `a` once its outputs are
/// relabeled by `perm`, up to one global phase, within `1e-9`.
///
/// `perm[q]` is the qubit of `b` holding logical qubit `q` at the end; both
/// circuits must act on `perm.len()` qubits.
pub fn equivalent_up_to_permutation(a: &Circuit, b: &Circuit, perm: &[usize]) -> Result<bool> {
    const TOL: f64 = 1e-9;
    let n = a.num_qubits();
    if b.num_qubits() != n {
        return Err(NoiseError::WidthMismatch {
            left: n,
            right: b.num_qubits(),
        });
    }
    check_width(n)?;
    let mut seen = vec![false; n];
    if perm.len() != n
        || perm
            .iter()
            .any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
    {
        return Err(NoiseError::BadPermutation(perm.to_vec()));
    }

    let dim = 1usize << n;
    // Position in `b`'s output of the logical basis index `y`.
    let relabel: Vec<usize> = (0..dim)
        .map(|y| {
            (0..n).fold(0usize, |acc, q| {
                if y & (1 << (n - 1 - q)) != 0 {
                    acc | (1 << (n - 1 - perm[q]))
                } else {
                    acc
                }
            })
        })
        .collect();

    let mut phase: Option<Complex64> = None;
    for x in 0..dim {
        let sa = simulate_statevector(a, x)?;
        let sb = simulate_statevector(b, x)?;
        let ph = *phase.get_or_insert_with(|| {
            let (y, _) = sa
                .iter()
                .enumerate()
                .max_by(|l, r| l.1.norm().total_cmp(&r.1.norm()))
                .expect("non-empty state");
            sb[relabel[y]] / sa[y]
        });
        if (ph.norm() - 1.0).abs() > TOL {
            return Ok(false);
        }
        if (0..dim).any(|y| (sb[relabel[y]] - ph * sa[y]).norm() > TOL) {
            return Ok(false);
        }
    }
    Ok(true)
}
