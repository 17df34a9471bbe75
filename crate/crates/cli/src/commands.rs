use std::fs;
use std::path::{Path as FsPath, PathBuf};

use anyhow::Context;
use clap::Parser;
use serde::Serialize;

use fidroute_core::circuit::{emit_qasm, parse_qasm};
use fidroute_core::dataset::{
    bin_and_sample, build_features, generate_experiments, load_calibrations, load_dataset,
    save_calibrations, save_dataset, CalibrationStore, DatasetError, DatasetSummary,
    ExperimentRecord, GenerationConfig, DEFAULT_PATH_SLOTS,
};
use fidroute_core::gbdt::{
    compute_metrics, fidelity_vs_length_table, load_model, save_model, train_with_trace,
    write_length_table_csv, GbdtModel, GbdtParams,
};
use fidroute_core::rng::substream;
use fidroute_core::router::{compare_benchmark, route, CompareConfig, Method, RouteOptions};
use fidroute_core::topology::{
    CalibrationError, CalibrationSnapshot, SyntheticCalibration, Topology, TopologyError,
    TopologyKind, HEAVY_HEX_REFERENCE,
};

use crate::args::{self, Cli, Command, Kind};
use crate::{invalid, CliError, CliResult};

pub fn dispatch(cli: &Cli, argv: &[String]) -> CliResult<()> {
    let out_dir = match &cli.command {
        Command::GenTopology(a) => gen_topology(a)?,
        Command::GenCalibration(a) => gen_calibration(a, cli.seed)?,
        Command::GenData(a) => gen_data(a, cli.seed)?,
        Command::Prepare(a) => prepare(a, cli.seed)?,
        Command::Train(a) => train(a)?,
        Command::Evaluate(a) => evaluate(a)?,
        Command::Route(a) => route_cmd(a)?,
        Command::Compare(a) => compare(a, cli.seed)?,
        Command::Replay(a) => return replay(&a.manifest),
    };
    write_manifest(&out_dir, cli, argv)
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    argv: &'a [String],
    config: &'a Command,
}

fn write_manifest(dir: &FsPath, cli: &Cli, argv: &[String]) -> CliResult<()> {
    let manifest = Manifest {
        tool: "fidroute",
        version: env!("CARGO_PKG_VERSION"),
        seed: cli.seed,
        argv: argv.get(1..).unwrap_or_default(),
        config: &cli.command,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write(dir, &format!("manifest-{}.json", cli.command.name()), text)
}

fn replay(manifest: &FsPath) -> CliResult<()> {
    let text = read(manifest)?;
    let doc: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("{}: malformed manifest", manifest.display()))?;
    let Some(args) = doc.get("argv").and_then(|v| v.as_array()) else {
        return invalid(format!("{}: manifest has no argv list", manifest.display()));
    };
    let mut argv = vec!["fidroute".to_string()];
    for a in args {
        match a.as_str() {
            Some(s) => argv.push(s.to_string()),
            None => {
                return invalid(format!(
                    "{}: argv entries must be strings",
                    manifest.display()
                ))
            }
        }
    }
    let cli =
        Cli::try_parse_from(&argv).map_err(|e| CliError::Validation(e.render().to_string()))?;
    if matches!(cli.command, Command::Replay(_)) {
        return invalid("a manifest cannot replay another replay");
    }
    dispatch(&cli, &argv)
}

fn read(path: &FsPath) -> CliResult<String> {
    Ok(fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?)
}

fn write(dir: &FsPath, name: &str, contents: impl AsRef<[u8]>) -> CliResult<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn ensure_dir(dir: &FsPath) -> CliResult<()> {
    Ok(fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?)
}

fn load_topology(path: &FsPath) -> CliResult<Topology> {
    let text = read(path)?;
    Ok(Topology::from_json(&text)
        .with_context(|| format!("{}: invalid topology", path.display()))?)
}

fn load_snapshot(path: &FsPath, topology: &Topology) -> CliResult<CalibrationSnapshot> {
    let text = read(path)?;
    Ok(CalibrationSnapshot::from_json(&text, topology)
        .with_context(|| format!("{}: invalid calibration", path.display()))?)
}

fn load_store(path: &FsPath, topology: &Topology) -> CliResult<CalibrationStore> {
    Ok(load_calibrations(path, topology).context("loading calibrations")?)
}

fn load_records(path: &FsPath) -> CliResult<Vec<ExperimentRecord>> {
    Ok(load_dataset(path).context("loading dataset")?)
}

fn load_model_file(path: &FsPath) -> CliResult<GbdtModel> {
    Ok(load_model(path).with_context(|| format!("{}: cannot load model", path.display()))?)
}

/// Path slots implied by a model's feature width on `topology`.
fn model_slots(model: &GbdtModel, topology: &Topology) -> CliResult<usize> {
    let fixed = topology.num_edges() + topology.num_qubits();
    match model.feature_width.checked_sub(fixed) {
        Some(slots) if slots >= 2 => Ok(slots),
        _ => invalid(format!(
            "model feature width {} does not fit a device with {} edges and {} qubits",
            model.feature_width,
            topology.num_edges(),
            topology.num_qubits()
        )),
    }
}

fn gen_topology(a: &args::GenTopology) -> CliResult<PathBuf> {
    let need = |v: Option<usize>, flag: &str, kind: &str| -> CliResult<usize> {
        v.ok_or_else(|| CliError::Validation(format!("--kind {kind} requires --{flag}")))
    };
    let kind = if a.reference {
        if a.kind.is_some_and(|k| k != Kind::HeavyHex)
            || a.n.is_some()
            || a.rows.is_some()
            || a.cols.is_some()
        {
            return invalid("--reference takes no size flags and implies --kind heavy-hex");
        }
        HEAVY_HEX_REFERENCE
    } else {
        match a.kind {
            None => return invalid("either --kind or --reference is required"),
            Some(Kind::Line) => TopologyKind::Line {
                n: need(a.n, "n", "line")?,
            },
            Some(Kind::Ring) => TopologyKind::Ring {
                n: need(a.n, "n", "ring")?,
            },
            Some(Kind::Grid) => TopologyKind::Grid {
                rows: need(a.rows, "rows", "grid")?,
                cols: need(a.cols, "cols", "grid")?,
            },
            Some(Kind::HeavyHex) => TopologyKind::HeavyHex {
                rows: need(a.rows, "rows", "heavy-hex")?,
                cols: need(a.cols, "cols", "heavy-hex")?,
            },
        }
    };
    let topology = match kind.generate() {
        Ok(t) => t,
        Err(e @ TopologyError::UnsupportedSize { .. }) => return invalid(e.to_string()),
        Err(e) => return Err(anyhow::Error::from(e).into()),
    };
    write(&a.out, "topology.json", topology.to_json() + "\n")?;
    println!(
        "topology: {} qubits, {} edges -> {}",
        topology.num_qubits(),
        topology.num_edges(),
        a.out.join("topology.json").display()
    );
    Ok(a.out.clone())
}

fn gen_calibration(a: &args::GenCalibration, seed: u64) -> CliResult<PathBuf> {
    let topology = load_topology(&a.topology)?;
    if a.fail_edges > topology.num_edges() {
        return invalid(format!(
            "--fail-edges {} exceeds the {} device edges",
            a.fail_edges,
            topology.num_edges()
        ));
    }
    let base = SyntheticCalibration::default();
    let mut snapshots = Vec::with_capacity(a.count as usize);
    for i in 0..a.count {
        let generator = SyntheticCalibration {
            fail_edges: a.fail_edges,
            timestamp: base.timestamp + 86_400 * i as i64,
            ..base.clone()
        };
        let snapshot = generator
            .generate(&topology, &mut substream(seed, "calibration", i as u64))
            .map_err(|e| match e {
                CalibrationError::TooManyFailures { .. } => CliError::Validation(e.to_string()),
                other => CliError::Runtime(other.into()),
            })?;
        snapshots.push(snapshot);
    }
    let store = CalibrationStore::new(snapshots);
    ensure_dir(&a.out)?;
    save_calibrations(a.out.join("calibrations.jsonl"), &store).context("writing calibrations")?;
    write(
        &a.out,
        "calibration.json",
        store.snapshots()[0].to_json() + "\n",
    )?;
    let failed = store.snapshots()[0]
        .edge_errors()
        .filter(|(_, r)| *r == 1.0)
        .count();
    println!(
        "calibration: {} snapshot(s), {} failed edge(s) each -> {}",
        store.len(),
        failed,
        a.out.display()
    );
    Ok(a.out.clone())
}

fn gen_data(a: &args::GenData, seed: u64) -> CliResult<PathBuf> {
    let topology = load_topology(&a.topology)?;
    let store = load_store(&a.calibrations, &topology)?;
    let config = GenerationConfig {
        count: a.num as usize,
        min_len: a.min_len,
        max_len: a.max_len,
        seed,
        shots: a.shots,
        mode: a.mode,
        ..Default::default()
    };
    let records = generate_experiments(&topology, &store, &config).map_err(|e| match e {
        DatasetError::LengthRange { .. }
        | DatasetError::ZeroCount
        | DatasetError::NoCalibrations => CliError::Validation(e.to_string()),
        other => CliError::Runtime(anyhow::Error::from(other).context("generating experiments")),
    })?;
    ensure_dir(&a.out)?;
    save_dataset(a.out.join("dataset.jsonl"), &records).context("writing dataset")?;
    let s = DatasetSummary::of(&records).expect("at least one record");
    println!("experiments,min_length,max_length,mean_length");
    println!("{},{},{},{:.2}", s.count, s.min_len, s.max_len, s.mean_len);
    Ok(a.out.clone())
}

fn prepare(a: &args::Prepare, seed: u64) -> CliResult<PathBuf> {
    let records = load_records(&a.dataset)?;
    let split = bin_and_sample(&records, seed).map_err(|e| match e {
        DatasetError::TooSmall { .. } => CliError::Runtime(anyhow::anyhow!(
            "{e}; generate more experiments or narrow the length range so every length has at least 2 records"
        )),
        other => CliError::Runtime(other.into()),
    })?;
    ensure_dir(&a.out)?;
    save_dataset(a.out.join("train.jsonl"), &split.train).context("writing training set")?;
    save_dataset(a.out.join("validation.jsonl"), &split.validation)
        .context("writing validation set")?;
    let mut bins = String::from("length,total,train,validation\n");
    for b in &split.bins {
        bins += &format!("{},{},{},{}\n", b.length, b.total, b.train, b.validation);
    }
    write(&a.out, "bins.csv", bins)?;
    println!(
        "prepare: {} bins, {} per bin -> train {}, validation {}",
        split.bins.len(),
        split.per_bin,
        split.train.len(),
        split.validation.len()
    );
    Ok(a.out.clone())
}

fn feature_rows(
    records: &[ExperimentRecord],
    topology: &Topology,
    store: &CalibrationStore,
    slots: usize,
) -> CliResult<Vec<Vec<f64>>> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            build_features(r, topology, store, slots)
                .map(|x| x.values().to_vec())
                .with_context(|| format!("record {}", i + 1))
                .map_err(CliError::from)
        })
        .collect()
}

fn train(a: &args::Train) -> CliResult<PathBuf> {
    let params = GbdtParams {
        rounds: a.rounds,
        max_depth: a.max_depth,
        eta: a.eta,
        lambda_reg: a.lambda,
        min_child_weight: a.min_child_weight,
        min_gain: a.min_gain,
    };
    if let Err(e) = params.validate() {
        return invalid(e.to_string());
    }
    if a.inputs.lmax < 2 {
        return invalid("--lmax must be at least 2");
    }
    let topology = load_topology(&a.inputs.topology)?;
    let store = load_store(&a.inputs.calibrations, &topology)?;
    let records = load_records(&a.train)?;
    let x = feature_rows(&records, &topology, &store, a.inputs.lmax)?;
    let y: Vec<f64> = records.iter().map(|r| r.gate_fidelity).collect();
    let (model, trace) = train_with_trace(&x, &y, &params).context("training")?;
    ensure_dir(&a.out)?;
    save_model(&model, a.out.join("model.json")).context("writing model")?;
    let mut csv = String::from("round,train_mse\n");
    for (i, mse) in trace.iter().enumerate() {
        csv += &format!("{i},{mse}\n");
    }
    write(&a.out, "training_trace.csv", csv)?;
    println!(
        "train: {} rows x {} features, {} rounds, final training MSE {:.3e}",
        x.len(),
        model.feature_width,
        model.trees.len(),
        trace.last().copied().unwrap_or_default()
    );
    Ok(a.out.clone())
}

fn evaluate(a: &args::Evaluate) -> CliResult<PathBuf> {
    let model = load_model_file(&a.model)?;
    let topology = load_topology(&a.topology)?;
    let store = load_store(&a.calibrations, &topology)?;
    let slots = model_slots(&model, &topology)?;
    let records = load_records(&a.validation)?;
    if records.is_empty() {
        return Err(CliError::Runtime(anyhow::anyhow!(
            "{}: no records",
            a.validation.display()
        )));
    }
    let x = feature_rows(&records, &topology, &store, slots)?;
    let predictions = model.predict_batch(&x).context("predicting")?;
    let truths: Vec<f64> = records.iter().map(|r| r.gate_fidelity).collect();
    let metrics = compute_metrics(&predictions, &truths).context("computing metrics")?;
    let r2 = metrics
        .r2
        .map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"));
    println!("MAE,MSE,RMSE,R2");
    println!(
        "{:.4},{:.4},{:.4},{r2}",
        metrics.mae, metrics.mse, metrics.rmse
    );

    ensure_dir(&a.out)?;
    write(
        &a.out,
        "metrics.json",
        serde_json::to_string_pretty(&metrics).expect("metrics serialize") + "\n",
    )?;
    let mut rows = String::from("record,length,measured_fidelity,predicted_fidelity\n");
    for (i, (r, p)) in records.iter().zip(&predictions).enumerate() {
        rows += &format!("{i},{},{},{p}\n", r.path_length(), r.gate_fidelity);
    }
    write(&a.out, "predictions.csv", rows)?;
    let table = fidelity_vs_length_table(&model, &records, &topology, &store, slots)
        .context("building length table")?;
    let mut csv = Vec::new();
    write_length_table_csv(&table, &mut csv).expect("in-memory write");
    write(&a.out, "fidelity_vs_length.csv", csv)?;
    Ok(a.out.clone())
}

#[derive(Serialize)]
struct RouteReport<'a> {
    method: Method,
    swap_count: usize,
    final_layout: &'a [usize],
    chosen_paths: &'a [fidroute_core::router::ChosenPath],
}

fn route_cmd(a: &args::Route) -> CliResult<PathBuf> {
    if a.method == Method::XgSwap && a.model.is_none() {
        return invalid("--method xgswap requires --model");
    }
    let topology = load_topology(&a.topology)?;
    let calibration = load_snapshot(&a.calibration, &topology)?;
    let text = read(&a.circuit)?;
    let circuit = parse_qasm(&text)
        .with_context(|| format!("{}: cannot parse circuit", a.circuit.display()))?;
    let model = match (&a.model, a.method) {
        (Some(path), Method::XgSwap) => Some(load_model_file(path)?),
        _ => None,
    };
    let lmax = match &model {
        Some(m) => model_slots(m, &topology)?,
        None => DEFAULT_PATH_SLOTS,
    };
    let options = RouteOptions {
        method: a.method,
        slack: a.routing.slack,
        cap: a.routing.cap,
        mode: a.routing.mode,
        lmax,
    };
    let routed = route(&circuit, &topology, &calibration, model.as_ref(), &options)
        .with_context(|| format!("routing {}", a.circuit.display()))?;

    let dir = a.out.parent().map(FsPath::to_path_buf).unwrap_or_default();
    let dir = if dir.as_os_str().is_empty() {
        PathBuf::from(".")
    } else {
        dir
    };
    let name = a
        .out
        .file_name()
        .ok_or_else(|| {
            CliError::Validation(format!("--out {} is not a file path", a.out.display()))
        })?
        .to_string_lossy()
        .to_string();
    write(&dir, &name, emit_qasm(&routed.circuit))?;
    let report = RouteReport {
        method: a.method,
        swap_count: routed.swap_count,
        final_layout: routed.final_layout.as_slice(),
        chosen_paths: &routed.chosen_paths,
    };
    let stem = a
        .out
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or(name);
    write(
        &dir,
        &format!("{stem}.report.json"),
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
    )?;
    println!(
        "route: {} gates in, {} gates out, {} swaps ({})",
        circuit.len(),
        routed.circuit.len(),
        routed.swap_count,
        a.method
    );
    Ok(dir)
}

fn compare(a: &args::Compare, seed: u64) -> CliResult<PathBuf> {
    if a.min_len < 2 || a.min_len > a.max_len {
        return invalid(format!(
            "invalid length range --min-len {} --max-len {}",
            a.min_len, a.max_len
        ));
    }
    let topology = load_topology(&a.topology)?;
    let calibration = load_snapshot(&a.calibration, &topology)?;
    let model = load_model_file(&a.model)?;
    let config = CompareConfig {
        pairs: a.pairs as usize,
        min_len: a.min_len,
        max_len: a.max_len,
        seed,
        shots: a.shots,
        slack: a.routing.slack,
        cap: a.routing.cap,
        mode: a.routing.mode,
        lmax: model_slots(&model, &topology)?,
    };
    let report = compare_benchmark(&topology, &calibration, &model, &config)
        .context("running comparison")?;
    ensure_dir(&a.out)?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv).expect("in-memory write");
    write(&a.out, "comparison.csv", csv)?;
    let summary = report.summary_table();
    write(&a.out, "comparison_summary.csv", &summary)?;
    println!(
        "compare: {} experiments, {} with a different path",
        report.total, report.differing_paths
    );
    print!("{summary}");
    Ok(a.out.clone())
}
