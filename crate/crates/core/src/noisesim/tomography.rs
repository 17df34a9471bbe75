//! Two-qubit quantum process tomography by linear inversion.
//!
//! Preparations are `{|0>, |1>, |+>, |+i>}` on each qubit and measurements
//! are the nine Pauli bases `{X, Y, Z}^2`, giving 16 x 9 = 144 settings.
//! Setting labels are `<prep><prep>/<basis><basis>` with prep symbols
//! `0`, `1`, `+` and `r` (for `|+i>`), e.g. `0r/XZ`.

use std::io::{self, Write};

use nalgebra::{Matrix2, Matrix4, SMatrix};
use num_complex::Complex64;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::channel::{convert_gate_fidelity, path_lambda, RoutingMode, TWO_QUBIT_DIM};
use super::{NoiseError, Result};
use crate::rng::substream;
use crate::topology::{CalibrationSnapshot, Path, Topology};

type C = Complex64;
type Ptm = SMatrix<f64, 16, 16>;

/// Measurement statistics model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shots {
    /// Exact outcome probabilities.
    #[default]
    Exact,
    /// Multinomial sampling with this many shots per setting.
    Count(u32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomographyConfig {
    pub shots: Shots,
    pub seed: u64,
    pub mode: RoutingMode,
    /// Divide measured expectations by the known readout contrast `1 - 2r`.
    pub mitigate_readout: bool,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        TomographyConfig {
            shots: Shots::Exact,
            seed: 0,
            mode: RoutingMode::Permute,
            mitigate_readout: true,
        }
    }
}

/// One estimated expectation value from one setting.
#[derive(Clone, Debug, PartialEq)]
pub struct SettingExpectation {
    pub setting: String,
    pub observable: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProcessTomographyResult {
    /// Reconstructed Pauli transfer matrix, rows and columns indexed by
    /// `4 * a + b` for the Pauli `P_a (x) P_b` (I, X, Y, Z).
    pub ptm: [[f64; 16]; 16],
    pub process_fidelity: f64,
    pub gate_fidelity: f64,
    /// Physical qubits read out at the end (control location, target).
    pub measured_qubits: (usize, usize),
    pub expectations: Vec<SettingExpectation>,
}

impl ProcessTomographyResult {
    /// Dumps per-setting expectation values as `setting,observable,expectation`.
    pub fn write_expectations_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "setting,observable,expectation")?;
        for e in &self.expectations {
            writeln!(out, "{},{},{:?}", e.setting, e.observable, e.value)?;
        }
        Ok(())
    }
}

const PAULI_LABELS: [char; 4] = ['I', 'X', 'Y', 'Z'];
const PREP_LABELS: [char; 4] = ['0', '1', '+', 'r'];

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn paulis() -> [Matrix2<C>; 4] {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    [
        Matrix2::new(l, o, o, l),
        Matrix2::new(o, l, l, o),
        Matrix2::new(o, -i, i, o),
        Matrix2::new(l, o, o, -l),
    ]
}

fn kron(a: &Matrix2<C>, b: &Matrix2<C>) -> Matrix4<C> {
    let k = a.kronecker(b);
    Matrix4::from_fn(|r, col| k[(r, col)])
}

fn two_qubit_paulis() -> Vec<Matrix4<C>> {
    let p = paulis();
    (0..16).map(|i| kron(&p[i / 4], &p[i % 4])).collect()
}

fn preparations() -> [Matrix2<C>; 4] {
    let h = 0.5;
    [
        Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)),
        Matrix2::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)),
        Matrix2::new(c(h, 0.0), c(h, 0.0), c(h, 0.0), c(h, 0.0)),
        Matrix2::new(c(h, 0.0), c(0.0, -h), c(0.0, h), c(h, 0.0)),
    ]
}

/// Rotation applied before a Z-basis readout to measure X, Y or Z.
fn basis_rotation(pauli: usize) -> Matrix2<C> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match pauli {
        // H
        1 => Matrix2::new(c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)),
        // H S^dagger
        2 => Matrix2::new(c(r, 0.0), c(0.0, -r), c(r, 0.0), c(0.0, r)),
        3 => Matrix2::identity(),
        _ => unreachable!("measurement bases are X, Y, Z"),
    }
}

fn ideal_cnot() -> Matrix4<C> {
    let mut u = Matrix4::<C>::zeros();
    for (row, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        u[(row, col)] = c(1.0, 0.0);
    }
    u
}

fn pauli_vector(rho: &Matrix4<C>, paulis: &[Matrix4<C>]) -> [f64; 16] {
    let mut v = [0.0; 16];
    for (i, p) in paulis.iter().enumerate() {
        v[i] = (p * rho).trace().re;
    }
    v
}

/// Pauli transfer matrix of the unitary channel `rho -> U rho U^dagger`.
fn unitary_ptm(u: &Matrix4<C>, paulis: &[Matrix4<C>]) -> Ptm {
    let ud = u.adjoint();
    Ptm::from_fn(|i, j| (paulis[i] * u * paulis[j] * ud).trace().re / 4.0)
}

fn readout_rate(cal: &CalibrationSnapshot, qubit: usize) -> Result<f64> {
    cal.readout_error(qubit)
        .ok_or(NoiseError::MissingReadout(qubit))
}

/// Outcome probabilities `p[2 m_a + m_b]` after independent bit flips.
fn apply_readout(p: [f64; 4], ra: f64, rb: f64) -> [f64; 4] {
    let flip = |m: usize, m2: usize, r: f64| if m == m2 { 1.0 - r } else { r };
    let mut out = [0.0; 4];
    for (o, slot) in out.iter_mut().enumerate() {
        *slot = (0..4)
            .map(|m| p[m] * flip(m >> 1, o >> 1, ra) * flip(m & 1, o & 1, rb))
            .sum();
    }
    out
}

fn sample_counts<R: rand::Rng + ?Sized>(p: [f64; 4], shots: u32, rng: &mut R) -> [f64; 4] {
    let mut remaining = u64::from(shots);
    let mut mass = 1.0;
    let mut out = [0.0; 4];
    for m in 0..4 {
        let k = if m == 3 || remaining == 0 {
            remaining
        } else {
            let q = (p[m].max(0.0) / mass).clamp(0.0, 1.0);
            Binomial::new(remaining, q)
                .expect("valid binomial")
                .sample(rng)
        };
        out[m] = k as f64 / f64::from(shots);
        remaining -= k;
        mass -= p[m];
        if mass <= 0.0 {
            mass = f64::MIN_POSITIVE;
        }
    }
    out
}

/// Simulates full process tomography of a CNOT routed along `path` on the
/// synthetic backend and reconstructs its PTM.
///
/// The channel is the ideal CNOT followed by global depolarizing noise with
/// the path's composite survival parameter; readout bit flips use the rates
/// of the two physical qubits holding control and target at the end.
pub fn run_process_tomography(
    topology: &Topology,
    calibration: &CalibrationSnapshot,
    path: &Path,
    config: &TomographyConfig,
) -> Result<ProcessTomographyResult> {
    if config.shots == Shots::Count(0) {
        return Err(NoiseError::ZeroShots);
    }
    let lambda = path_lambda(topology, calibration, path, config.mode)?;
    let q = path.qubits();
    let measured = match config.mode {
        RoutingMode::Permute => (q[q.len() - 2], q[q.len() - 1]),
        RoutingMode::Restore => (q[0], q[q.len() - 1]),
    };
    let (ra, rb) = (
        readout_rate(calibration, measured.0)?,
        readout_rate(calibration, measured.1)?,
    );
    let (ca, cb) = (1.0 - 2.0 * ra, 1.0 - 2.0 * rb);
    if config.mitigate_readout {
        for (qubit, rate, contrast) in [(measured.0, ra, ca), (measured.1, rb, cb)] {
            if contrast.abs() < 1e-12 {
                return Err(NoiseError::UnmitigableReadout { qubit, rate });
            }
        }
    }
    let (ca, cb) = if config.mitigate_readout {
        (ca, cb)
    } else {
        (1.0, 1.0)
    };

    let paulis = two_qubit_paulis();
    let preps = preparations();
    let u = ideal_cnot();
    let ud = u.adjoint();
    let mixed = Matrix4::<C>::identity() / c(4.0, 0.0);
    let rotations: Vec<Matrix4<C>> = (0..9)
        .map(|m| kron(&basis_rotation(m / 3 + 1), &basis_rotation(m % 3 + 1)))
        .collect();

    let mut inputs = Ptm::zeros();
    let mut outputs = Ptm::zeros();
    let mut expectations = Vec::with_capacity(16 * 9 * 3);

    for k in 0..16 {
        let rho_in = kron(&preps[k / 4], &preps[k % 4]);
        let rho_out = (u * rho_in * ud) * c(lambda, 0.0) + mixed * c(1.0 - lambda, 0.0);
        for (i, v) in pauli_vector(&rho_in, &paulis).into_iter().enumerate() {
            inputs[(i, k)] = v;
        }

        // Sums for single-qubit Paulis are averaged over the three settings
        // that measure them.
        let mut single_a = [0.0; 4];
        let mut single_b = [0.0; 4];
        let mut out = [0.0; 16];
        out[0] = 1.0;
        for (m, rot) in rotations.iter().enumerate() {
            let (pa, pb) = (m / 3 + 1, m % 3 + 1);
            let rotated = rot * rho_out * rot.adjoint();
            let ideal: [f64; 4] = std::array::from_fn(|o| rotated[(o, o)].re);
            let observed = apply_readout(ideal, ra, rb);
            let freq = match config.shots {
                Shots::Exact => observed,
                Shots::Count(n) => {
                    let mut rng = substream(config.seed, "tomography-setting", (9 * k + m) as u64);
                    sample_counts(observed, n, &mut rng)
                }
            };
            let sign = |bit: usize| if bit == 0 { 1.0 } else { -1.0 };
            let (mut ea, mut eb, mut eab) = (0.0, 0.0, 0.0);
            for (o, f) in freq.iter().enumerate() {
                ea += f * sign(o >> 1);
                eb += f * sign(o & 1);
                eab += f * sign(o >> 1) * sign(o & 1);
            }
            let (ea, eb, eab) = (ea / ca, eb / cb, eab / (ca * cb));
            single_a[pa] += ea / 3.0;
            single_b[pb] += eb / 3.0;
            out[4 * pa + pb] = eab;

            let setting = format!(
                "{}{}/{}{}",
                PREP_LABELS[k / 4],
                PREP_LABELS[k % 4],
                PAULI_LABELS[pa],
                PAULI_LABELS[pb]
            );
            for (obs, value) in [
                (format!("{}I", PAULI_LABELS[pa]), ea),
                (format!("I{}", PAULI_LABELS[pb]), eb),
                (format!("{}{}", PAULI_LABELS[pa], PAULI_LABELS[pb]), eab),
            ] {
                expectations.push(SettingExpectation {
                    setting: setting.clone(),
                    observable: obs,
                    value,
                });
            }
        }
        for p in 1..4 {
            out[4 * p] = single_a[p];
            out[p] = single_b[p];
        }
        for (i, v) in out.iter().enumerate() {
            outputs[(i, k)] = *v;
        }
    }

    let inverse = inputs
        .try_inverse()
        .ok_or(NoiseError::SingularReconstruction)?;
    let ptm = outputs * inverse;
    let ideal_inverse = unitary_ptm(&u, &paulis)
        .try_inverse()
        .ok_or(NoiseError::SingularReconstruction)?;
    let d2 = (TWO_QUBIT_DIM * TWO_QUBIT_DIM) as f64;
    let process_fidelity = ((ideal_inverse * ptm).trace() / d2).clamp(0.0, 1.0);
    let gate_fidelity = convert_gate_fidelity(process_fidelity, TWO_QUBIT_DIM)?;

    Ok(ProcessTomographyResult {
        ptm: std::array::from_fn(|i| std::array::from_fn(|j| ptm[(i, j)])),
        process_fidelity,
        gate_fidelity,
        measured_qubits: measured,
        expectations,
    })
}
