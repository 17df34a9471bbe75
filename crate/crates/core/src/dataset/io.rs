//! JSON-lines persistence for records and calibration snapshots.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path as FsPath;

use serde_json::Value;

use super::{CalibrationStore, DatasetError, ExperimentRecord, Result};
use crate::topology::{CalibrationSnapshot, Topology};

fn io_err(path: &FsPath) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &FsPath, line: usize, message: impl ToString) -> DatasetError {
    DatasetError::Parse {
        path: path.display().to_string(),
        line,
        message: message.to_string(),
    }
}

fn write_lines(path: &FsPath, append: bool, lines: impl Iterator<Item = String>) -> Result<()> {
    let file = OpenOptions::new()
        .create(true)
        .write(true)
        .append(append)
        .truncate(!append)
        .open(path)
        .map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    for line in lines {
        writeln!(out, "{line}").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

/// Non-blank lines with their 1-based line numbers.
fn read_lines(path: &FsPath) -> Result<Vec<(usize, String)>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut lines = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if !line.trim().is_empty() {
            lines.push((i + 1, line));
        }
    }
    Ok(lines)
}

/// Writes one JSON record per line, replacing the file.
pub fn save_dataset(path: impl AsRef<FsPath>, records: &[ExperimentRecord]) -> Result<()> {
    write_lines(path.as_ref(), false, records.iter().map(record_line))
}

/// Appends records to an existing (or new) dataset file.
pub fn append_records(path: impl AsRef<FsPath>, records: &[ExperimentRecord]) -> Result<()> {
    write_lines(path.as_ref(), true, records.iter().map(record_line))
}

fn record_line(r: &ExperimentRecord) -> String {
    serde_json::to_string(r).expect("record serializes")
}

/// Reads a dataset file. An empty file yields no records.
pub fn load_dataset(path: impl AsRef<FsPath>) -> Result<Vec<ExperimentRecord>> {
    let path = path.as_ref();
    read_lines(path)?
        .into_iter()
        .map(|(n, line)| {
            let r: ExperimentRecord =
                serde_json::from_str(&line).map_err(|e| parse_err(path, n, e))?;
            if r.path.len() < 2 {
                return Err(parse_err(path, n, "path needs at least two qubits"));
            }
            if !(0.0..=1.0).contains(&r.gate_fidelity) {
                return Err(parse_err(
                    path,
                    n,
                    format!("fidelity {} outside [0, 1]", r.gate_fidelity),
                ));
            }
            Ok(r)
        })
        .collect()
}

/// Writes snapshots as `{"calibration_id": i, ...snapshot}` lines.
pub fn save_calibrations(path: impl AsRef<FsPath>, store: &CalibrationStore) -> Result<()> {
    let lines = store.snapshots().iter().enumerate().map(|(id, cal)| {
        let mut doc: Value = serde_json::from_str(&cal.to_json()).expect("calibration json");
        doc.as_object_mut()
            .expect("object")
            .insert("calibration_id".into(), Value::from(id));
        doc.to_string()
    });
    write_lines(path.as_ref(), false, lines)
}

/// Reads snapshots written by [`save_calibrations`]; ids must run 0, 1, 2, ...
pub fn load_calibrations(
    path: impl AsRef<FsPath>,
    topology: &Topology,
) -> Result<CalibrationStore> {
    let path = path.as_ref();
    let mut snapshots = Vec::new();
    for (n, line) in read_lines(path)? {
        let mut doc: Value = serde_json::from_str(&line).map_err(|e| parse_err(path, n, e))?;
        let id = doc
            .as_object_mut()
            .and_then(|o| o.remove("calibration_id"))
            .and_then(|v| v.as_u64())
            .ok_or_else(|| parse_err(path, n, "missing integer calibration_id"))?;
        if id != snapshots.len() as u64 {
            return Err(parse_err(
                path,
                n,
                format!("expected calibration_id {}, found {id}", snapshots.len()),
            ));
        }
        let cal = CalibrationSnapshot::from_json(&doc.to_string(), topology)
            .map_err(|e| parse_err(path, n, e))?;
        snapshots.push(cal);
    }
    Ok(CalibrationStore::new(snapshots))
}
