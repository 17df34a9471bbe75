//! Random-CNOT benchmark: shortest path versus the model's choice.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{choose_path, Method, Result, RouteOptions, RouterError};
use crate::dataset::DEFAULT_PATH_SLOTS;
use crate::gbdt::GbdtModel;
use crate::noisesim::{
    path_gate_fidelity, run_process_tomography, RoutingMode, Shots, TomographyConfig,
};
use crate::rng::{derive_seed, substream};
use crate::topology::{CalibrationSnapshot, Path, Topology, DEFAULT_CAP, DEFAULT_SLACK};

/// Exact fidelity differences below this are ties.
const EXACT_TIE: f64 = 1e-12;
/// Pair draws per case before giving up.
const PAIR_ATTEMPTS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareConfig {
    pub pairs: usize,
    /// Inclusive range for the number of qubits on the shortest path.
    pub min_len: usize,
    pub max_len: usize,
    pub seed: u64,
    pub shots: Shots,
    pub slack: usize,
    pub cap: usize,
    pub mode: RoutingMode,
    pub lmax: usize,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            pairs: 313,
            min_len: 3,
            max_len: 27,
            seed: 0,
            shots: Shots::Exact,
            slack: DEFAULT_SLACK,
            cap: DEFAULT_CAP,
            mode: RoutingMode::Permute,
            lmax: DEFAULT_PATH_SLOTS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseOutcome {
    /// Both methods chose the same path.
    Same,
    Higher,
    /// Lower or tied.
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseRow {
    pub control: usize,
    pub target: usize,
    pub shortest: Path,
    pub xgswap: Path,
    pub predicted_xgswap: f64,
    /// Measured fidelities; only evaluated when the paths differ.
    pub fidelity_shortest: Option<f64>,
    pub fidelity_xgswap: Option<f64>,
    /// Mean and standard deviation of the edge errors along each path.
    pub edge_error_shortest: (f64, f64),
    pub edge_error_xgswap: (f64, f64),
    pub outcome: CaseOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub total: usize,
    pub differing_paths: usize,
    pub higher_fidelity: usize,
    pub lower_fidelity: usize,
    pub rows: Vec<CaseRow>,
}

fn percent(count: usize, of: usize) -> String {
    if of == 0 {
        "-".to_string()
    } else {
        format!("{:.0}%", 100.0 * count as f64 / of as f64)
    }
}

fn path_cell(p: &Path) -> String {
    p.qubits()
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join("-")
}

fn opt_cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

impl ComparisonReport {
    /// Share of differing cases won and lost, in percent.
    pub fn proportions(&self) -> Option<(f64, f64)> {
        (self.differing_paths > 0).then(|| {
            let d = self.differing_paths as f64;
            (
                100.0 * self.lower_fidelity as f64 / d,
                100.0 * self.higher_fidelity as f64 / d,
            )
        })
    }

    /// Three-row outcome table over the cases whose paths differ.
    pub fn summary_table(&self) -> String {
        let d = self.differing_paths;
        let mut s = String::from("outcome,count,proportion\n");
        s += &format!("Experiments,{d},{}\n", percent(d, d));
        s += &format!(
            "Lower Fidelity,{},{}\n",
            self.lower_fidelity,
            percent(self.lower_fidelity, d)
        );
        s += &format!(
            "Higher Fidelity,{},{}\n",
            self.higher_fidelity,
            percent(self.higher_fidelity, d)
        );
        s
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "case,control,target,shortest_path,xgswap_path,predicted_xgswap,\
             fidelity_shortest,fidelity_xgswap,edge_error_mean_shortest,edge_error_std_shortest,\
             edge_error_mean_xgswap,edge_error_std_xgswap,outcome"
        )?;
        for (i, r) in self.rows.iter().enumerate() {
            let outcome = match r.outcome {
                CaseOutcome::Same => "same",
                CaseOutcome::Higher => "higher",
                CaseOutcome::Lower => "lower",
            };
            writeln!(
                out,
                "{i},{},{},{},{},{},{},{},{},{},{},{},{outcome}",
                r.control,
                r.target,
                path_cell(&r.shortest),
                path_cell(&r.xgswap),
                r.predicted_xgswap,
                opt_cell(r.fidelity_shortest),
                opt_cell(r.fidelity_xgswap),
                r.edge_error_shortest.0,
                r.edge_error_shortest.1,
                r.edge_error_xgswap.0,
                r.edge_error_xgswap.1,
            )?;
        }
        Ok(())
    }
}

fn edge_error_stats(calibration: &CalibrationSnapshot, path: &Path) -> (f64, f64) {
    let rates: Vec<f64> = path
        .edges()
        .map(|e| {
            calibration
                .edge_error(e.low(), e.high())
                .unwrap_or(f64::NAN)
        })
        .collect();
    let n = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / n;
    let var = rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Draws a (control, target) pair whose shortest path has `min..=max` qubits.
fn draw_pair<R: Rng>(
    topology: &Topology,
    min: usize,
    max: usize,
    rng: &mut R,
) -> Option<(usize, usize)> {
    let n = topology.num_qubits();
    for _ in 0..PAIR_ATTEMPTS {
        let control = rng.random_range(0..n);
        let dist = topology.bfs_distances(control);
        let targets: Vec<usize> = (0..n)
            .filter(|&q| {
                q != control && dist[q] != usize::MAX && (min..=max).contains(&(dist[q] + 1))
            })
            .collect();
        if !targets.is_empty() {
            return Some((control, targets[rng.random_range(0..targets.len())]));
        }
    }
    None
}

/// Runs `config.pairs` random CNOT cases and tallies where the model's path
/// beats the shortest path.
///
/// Cases with different paths are evaluated with the analytic fidelity
/// (exact) or sampled tomography (shots). A case counts as higher only if
/// the model's path wins by more than the tie margin: `1e-12` when exact,
/// and non-overlapping `±1/sqrt(shots)` intervals when sampled.
pub fn compare_benchmark(
    topology: &Topology,
    calibration: &CalibrationSnapshot,
    model: &GbdtModel,
    config: &CompareConfig,
) -> Result<ComparisonReport> {
    if config.min_len < 2 || config.min_len > config.max_len {
        return Err(RouterError::LengthRange {
            min: config.min_len,
            max: config.max_len,
        });
    }
    let xg = RouteOptions {
        method: Method::XgSwap,
        slack: config.slack,
        cap: config.cap,
        mode: config.mode,
        lmax: config.lmax,
    };
    let rows = (0..config.pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(config.seed, "compare-pair", i as u64);
            let (control, target) = draw_pair(topology, config.min_len, config.max_len, &mut rng)
                .ok_or(RouterError::NoPairs {
                min: config.min_len,
                max: config.max_len,
            })?;
            let shortest = topology.shortest_path(control, target)?;
            let (xgswap, score) =
                choose_path(control, target, topology, calibration, Some(model), &xg)?;
            let mut row = CaseRow {
                control,
                target,
                edge_error_shortest: edge_error_stats(calibration, &shortest),
                edge_error_xgswap: edge_error_stats(calibration, &xgswap),
                shortest,
                xgswap,
                predicted_xgswap: score.expect("xgswap scores its path"),
                fidelity_shortest: None,
                fidelity_xgswap: None,
                outcome: CaseOutcome::Same,
            };
            if row.shortest == row.xgswap {
                return Ok(row);
            }
            let measure = |path: &Path, label: &str| -> Result<f64> {
                Ok(match config.shots {
                    Shots::Exact => path_gate_fidelity(topology, calibration, path, config.mode)?,
                    Shots::Count(_) => {
                        let tomo = TomographyConfig {
                            shots: config.shots,
                            seed: derive_seed(config.seed, label, i as u64),
                            mode: config.mode,
                            mitigate_readout: true,
                        };
                        run_process_tomography(topology, calibration, path, &tomo)?.gate_fidelity
                    }
                })
            };
            let fs = measure(&row.shortest, "compare-shortest")?;
            let fx = measure(&row.xgswap, "compare-xgswap")?;
            let margin = match config.shots {
                Shots::Exact => EXACT_TIE,
                Shots::Count(n) => 2.0 / (n.max(1) as f64).sqrt(),
            };
            row.outcome = if fx - fs > margin {
                CaseOutcome::Higher
            } else {
                CaseOutcome::Lower
            };
            row.fidelity_shortest = Some(fs);
            row.fidelity_xgswap = Some(fx);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;

    let count = |o| rows.iter().filter(|r| r.outcome == o).count();
    let higher_fidelity = count(CaseOutcome::Higher);
    let lower_fidelity = count(CaseOutcome::Lower);
    Ok(ComparisonReport {
        total: rows.len(),
        differing_paths: higher_fidelity + lower_fidelity,
        higher_fidelity,
        lower_fidelity,
        rows,
    })
}
