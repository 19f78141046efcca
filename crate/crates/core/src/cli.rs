//! Command-line front end.
//!
//! Every subcommand resolves a [`RunConfig`] from flags (optionally
//! overridden by `--json-config`), runs one analysis and emits its primary
//! artefact on standard output. With `--out DIR` all artefacts are written
//! to `DIR` instead, next to `<command>.json`, which holds the resolved
//! config and the structured result. Feeding that file back through
//! `--json-config` reproduces the run.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bias::{multi_photon_bias, zeta_map, BiasConfig, Ensemble, ZetaConfig};
use crate::calibration::{calibrate, calibration_error_map, ErrorMap, ScanSpec, SimulatedDevice};
use crate::error::{Error, Result};
use crate::export::{big_matrix, emit, matrix_csv, mesh_grid, to_json_pretty, write_records_csv};
use crate::graph::{Centrality, MeshGraph, NodeKind};
use crate::mesh::Architecture;
use crate::paths::{self, AsymptoticCase, TrapezoidIndex};
use crate::photonics::dependency_sets;
use crate::stats::spearman;
use crate::unitary::{
    decompose, frobenius_distance, matrix_from_json, matrix_to_json, reconstruct, unitarity_deviation,
    CMatrix, MeshParameters, NoiseModel,
};
use crate::par;

const PATHS_CAP: usize = 400;
const GRAPH_CAP: usize = 200;
const ZETA_CAP: usize = 64;
const DEPSETS_CAP: usize = 64;
const CALIBRATION_CAP: usize = 16;
const DECOMPOSE_CAP: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Subcommand)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Decompose a unitary into mesh parameters.
    Decompose,
    /// Rebuild the unitary of a parameter file.
    Reconstruct,
    /// Optical path counts between every input and output.
    Paths,
    /// Flow and sensitivity index of every MZ.
    Flow,
    /// Centrality measures of the mesh graph.
    Centrality,
    /// Single-photon sensitivity map.
    Zeta,
    /// Multi-photon bias maps.
    Mpbias,
    /// Parameters each matrix element depends on.
    Depsets,
    /// Simulated calibration and its error maps.
    Calibrate,
    /// Table of Catalan trapezoid numbers.
    Catalan,
    /// Exact vs. approximate triangular/rectangular path-count ratios.
    Asymptotics,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Decompose => "decompose",
            Command::Reconstruct => "reconstruct",
            Command::Paths => "paths",
            Command::Flow => "flow",
            Command::Centrality => "centrality",
            Command::Zeta => "zeta",
            Command::Mpbias => "mpbias",
            Command::Depsets => "depsets",
            Command::Calibrate => "calibrate",
            Command::Catalan => "catalan",
            Command::Asymptotics => "asymptotics",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "meshbias", version, about = "Noise bias, path counting and calibration for MZ meshes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Default, clap::Args)]
pub struct Flags {
    /// Number of modes.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Mesh architecture.
    #[arg(long, global = true, value_parser = parse_arch)]
    pub arch: Option<Architecture>,
    #[arg(long, global = true, value_parser = parse_ensemble)]
    pub ensemble: Option<Ensemble>,
    #[arg(long, global = true)]
    pub photons: Option<usize>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub unitaries: Option<usize>,
    /// Sets both the beamsplitter and the phase noise level.
    #[arg(long, global = true)]
    pub noise: Option<f64>,
    #[arg(long = "bs-sigma", global = true)]
    pub bs_sigma: Option<f64>,
    #[arg(long = "phase-sigma", global = true)]
    pub phase_sigma: Option<f64>,
    /// Relative power noise of calibration measurements.
    #[arg(long = "meas-noise", global = true)]
    pub meas_noise: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "MESHBIAS_WORKERS")]
    pub workers: Option<usize>,
    /// Input file: a unitary (JSON) or, for `reconstruct`, mesh parameters.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Flow exponent.
    #[arg(long, global = true)]
    pub k: Option<f64>,
    /// Centrality measure (all measures when omitted).
    #[arg(long, global = true, value_parser = parse_measure)]
    pub measure: Option<Centrality>,
    /// Calibration repeats; two or more produce error maps.
    #[arg(long, global = true)]
    pub repeats: Option<usize>,
    /// Catalan trapezoid order.
    #[arg(long, global = true)]
    pub s: Option<u64>,
    /// JSON file whose fields override the flags.
    #[arg(long = "json-config", global = true)]
    pub json_config: Option<PathBuf>,
}

fn parse_arch(s: &str) -> std::result::Result<Architecture, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_ensemble(s: &str) -> std::result::Result<Ensemble, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_measure(s: &str) -> std::result::Result<Centrality, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Fully resolved parameters of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub m: usize,
    pub architecture: Architecture,
    pub ensemble: Ensemble,
    pub photons: usize,
    pub trials: usize,
    pub unitaries: usize,
    pub bs_sigma: f64,
    pub phase_sigma: f64,
    pub meas_noise: f64,
    pub seed: u64,
    pub workers: usize,
    pub input: Option<PathBuf>,
    pub k: f64,
    pub measure: Option<Centrality>,
    pub repeats: usize,
    pub s: u64,
    pub scan_points: usize,
    pub scan_max_v2: f64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        let noise = NoiseModel::default();
        let scan = ScanSpec::default();
        RunConfig {
            command,
            m: 8,
            architecture: Architecture::Rectangular,
            ensemble: Ensemble::Haar,
            photons: 2,
            trials: 200,
            unitaries: 200,
            bs_sigma: noise.bs_sigma,
            phase_sigma: noise.phase_sigma,
            meas_noise: 1e-2,
            seed: 0,
            workers: par::default_workers(),
            input: None,
            k: 1.0,
            measure: None,
            repeats: 1,
            s: 1,
            scan_points: scan.points,
            scan_max_v2: scan.max_v2,
            out: None,
        }
    }

    /// Flags first, then the JSON config file on top.
    pub fn resolve(command: Command, f: &Flags) -> Result<Self> {
        let mut c = RunConfig::defaults(command);
        macro_rules! set {
            ($($field:ident <- $flag:ident),* $(,)?) => {
                $(if let Some(v) = f.$flag.clone() { c.$field = v; })*
            };
        }
        set!(m <- m, architecture <- arch, ensemble <- ensemble, photons <- photons,
             trials <- trials, unitaries <- unitaries, meas_noise <- meas_noise,
             seed <- seed, workers <- workers, k <- k, repeats <- repeats, s <- s);
        if let Some(n) = f.noise {
            c.bs_sigma = n;
            c.phase_sigma = n;
        }
        set!(bs_sigma <- bs_sigma, phase_sigma <- phase_sigma);
        c.input = f.input.clone();
        c.measure = f.measure;
        c.out = f.out.clone();

        if let Some(path) = &f.json_config {
            let text = std::fs::read_to_string(path)?;
            let mut doc: Value = serde_json::from_str(&text)?;
            // accept a bare config or a run document with a "config" member
            if let Some(inner) = doc.get_mut("config") {
                doc = inner.take();
            }
            let Value::Object(overrides) = doc else {
                return Err(Error::InvalidArgument("JSON config must be an object".into()));
            };
            let mut base = serde_json::to_value(&c)?;
            let obj = base.as_object_mut().expect("config serialises to an object");
            for (key, v) in overrides {
                obj.insert(key, v);
            }
            let out = c.out.take();
            c = serde_json::from_value(base)?;
            c.out = out;
            if c.command != command {
                return Err(Error::InvalidArgument(format!(
                    "JSON config is for '{}', not '{}'",
                    c.command.name(),
                    command.name()
                )));
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.workers == 0 {
            return bad("workers must be >= 1".into());
        }
        self.noise().validate()?;
        if !(self.meas_noise >= 0.0) || !self.meas_noise.is_finite() {
            return bad(format!("meas_noise must be >= 0, got {}", self.meas_noise));
        }
        let cap = |what: &'static str, cap: usize| {
            if self.m > cap {
                Err(Error::TooLarge {
                    what,
                    size: self.m,
                    cap,
                })
            } else {
                Ok(())
            }
        };
        match self.command {
            Command::Paths => cap("path-count m", PATHS_CAP)?,
            Command::Flow | Command::Centrality => cap("graph m", GRAPH_CAP)?,
            Command::Zeta | Command::Mpbias => cap("simulation m", ZETA_CAP)?,
            Command::Depsets => cap("dependency-set m", DEPSETS_CAP)?,
            Command::Calibrate => cap("calibration m", CALIBRATION_CAP)?,
            Command::Decompose => cap("decomposition m", DECOMPOSE_CAP)?,
            _ => {}
        }
        if self.m < 1 {
            return bad("m must be >= 1".into());
        }
        match self.command {
            Command::Calibrate if self.architecture != Architecture::Rectangular => {
                bad("calibration needs the rectangular (clements) mesh".into())
            }
            Command::Calibrate if self.repeats == 0 => bad("repeats must be >= 1".into()),
            Command::Reconstruct if self.input.is_none() => bad("reconstruct needs --input".into()),
            Command::Catalan if self.s == 0 => bad("s must be >= 1".into()),
            _ => Ok(()),
        }
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel {
            bs_sigma: self.bs_sigma,
            phase_sigma: self.phase_sigma,
            ..NoiseModel::default()
        }
    }

    fn scan(&self) -> ScanSpec {
        ScanSpec {
            points: self.scan_points,
            max_v2: self.scan_max_v2,
            ..ScanSpec::default()
        }
    }

    fn zeta_config(&self) -> Result<ZetaConfig> {
        let mut z = ZetaConfig::new(self.m, self.architecture, self.ensemble);
        z.n_unitaries = self.unitaries;
        z.n_trials = self.trials;
        z.noise = self.noise();
        z.seed = self.seed;
        z.workers = self.workers;
        if self.ensemble == Ensemble::File {
            z.unitary = Some(self.load_unitary()?);
        }
        Ok(z)
    }

    fn load_unitary(&self) -> Result<CMatrix> {
        let path = self
            .input
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("this run needs --input <unitary.json>".into()))?;
        let u = matrix_from_json(&std::fs::read_to_string(path)?)?;
        if u.nrows() != self.m {
            return Err(Error::InvalidArgument(format!(
                "input unitary has {} modes but m = {}",
                u.nrows(),
                self.m
            )));
        }
        Ok(u)
    }

    /// The unitary a single-unitary command works on: the input file if
    /// given, else the first member of the ensemble.
    fn unitary(&self) -> Result<CMatrix> {
        if self.input.is_some() {
            return self.load_unitary();
        }
        Ok(reconstruct(&self.zeta_config()?.member(0)?))
    }
}

/// Everything a command produces.
pub struct RunOutput {
    /// Structured result, stored in `<command>.json` with the config.
    pub result: Value,
    /// Additional files, `(name, content)`.
    pub files: Vec<(String, String)>,
    /// Name of the file printed to standard output without `--out`; `None`
    /// prints the JSON run document.
    pub primary: Option<String>,
}

impl RunOutput {
    fn json(result: Value) -> Self {
        RunOutput {
            result,
            files: Vec::new(),
            primary: None,
        }
    }
}

/// The JSON document holding the resolved config and a result.
pub fn run_document(cfg: &RunConfig, result: &Value) -> Value {
    json!({
        "tool": "meshbias",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "result": result,
    })
}

/// Execute a resolved config.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match cfg.command {
        Command::Decompose => cmd_decompose(cfg),
        Command::Reconstruct => cmd_reconstruct(cfg),
        Command::Paths => cmd_paths(cfg),
        Command::Flow => cmd_flow(cfg),
        Command::Centrality => cmd_centrality(cfg),
        Command::Zeta => cmd_zeta(cfg),
        Command::Mpbias => cmd_mpbias(cfg),
        Command::Depsets => cmd_depsets(cfg),
        Command::Calibrate => cmd_calibrate(cfg),
        Command::Catalan => cmd_catalan(cfg),
        Command::Asymptotics => cmd_asymptotics(cfg),
    }
}

/// Execute and write the artefacts.
pub fn run(cfg: &RunConfig) -> Result<()> {
    let start = Instant::now();
    eprintln!("meshbias {}: m={} arch={} seed={}", cfg.command.name(), cfg.m, cfg.architecture, cfg.seed);
    let out = execute(cfg)?;
    let doc_name = format!("{}.json", cfg.command.name());
    if out.files.iter().any(|(n, _)| *n == doc_name) {
        return Err(Error::Inconsistent(format!("artefact name {doc_name} is reserved")));
    }
    let doc =to_json_pretty(&run_document(cfg, &out.result))? + "\n";
    match &cfg.out {
        Some(dir) => {
            emit(Some(&dir.join(&doc_name)), &doc)?;
            for (name, content) in &out.files {
                emit(Some(&dir.join(name)), content)?;
            }
            eprintln!("wrote {} file(s) to {}", out.files.len() + 1, dir.display());
        }
        None => match &out.primary {
            Some(name) => {
                let (_, content) = out
                    .files
                    .iter()
                    .find(|(n, _)| n == name)
                    .expect("primary artefact is among the files");
                emit(None, content)?;
            }
            None => emit(None, &doc)?,
        },
    }
    eprintln!("done in {:.2?}", start.elapsed());
    Ok(())
}

/// Report an error as JSON on standard error.
pub fn report_error(e: &Error) {
    let v = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
    eprintln!("{v}");
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let v = json!({ "error": { "kind": "usage", "message": e.to_string().trim() } });
            eprintln!("{v}");
            return 2;
        }
    };
    match RunConfig::resolve(cli.command, &cli.flags).and_then(|c| run(&c)) {
        Ok(()) => 0,
        Err(e) => {
            report_error(&e);
            1
        }
    }
}

fn cmd_decompose(cfg: &RunConfig) -> Result<RunOutput> {
    let u = cfg.unitary()?;
    let p = decompose(&u, cfg.architecture)?;
    let err = frobenius_distance(&reconstruct(&p), &u);
    let mut out = RunOutput::json(json!({ "parameters": p, "reconstruction_error": err }));
    out.files.push(("parameters.json".into(), p.to_json()?));
    out.files.push(("unitary.json".into(), matrix_to_json(&u)?));
    Ok(out)
}

fn cmd_reconstruct(cfg: &RunConfig) -> Result<RunOutput> {
    let path = cfg.input.as_ref().expect("validated");
    let p = MeshParameters::from_json(&std::fs::read_to_string(path)?)?;
    let u = reconstruct(&p);
    let entries: Vec<Vec<[f64; 2]>> = (0..u.nrows())
        .map(|r| (0..u.ncols()).map(|c| [u[(r, c)].re, u[(r, c)].im]).collect())
        .collect();
    let mut out = RunOutput::json(json!({
        "m": u.nrows(),
        "entries": entries,
        "unitarity_deviation": unitarity_deviation(&u),
    }));
    out.files.push(("unitary.json".into(), matrix_to_json(&u)?));
    Ok(out)
}

fn cmd_paths(cfg: &RunConfig) -> Result<RunOutput> {
    let m = cfg.m;
    let counts: Vec<Vec<_>> = (1..=m)
        .map(|i| (1..=m).map(|j| paths::count(m, cfg.architecture, i, j)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let log10: Vec<Vec<f64>> = counts.iter().map(|r| r.iter().map(paths::big_log10).collect()).collect();
    let decimal = big_matrix(&counts);
    let mut files = vec![
        ("log10_counts.csv".to_string(), matrix_csv("output\\input", &log10)?),
        ("counts.csv".to_string(), matrix_csv("output\\input", &decimal)?),
    ];
    let mut mean_lengths = Value::Null;
    if m <= 64 {
        let g = MeshGraph::new(m, cfg.architecture)?;
        let stats = g.path_stats_matrix()?;
        let mean: Vec<Vec<String>> = stats
            .iter()
            .map(|r| r.iter().map(|s| s.mean_length.to_string()).collect())
            .collect();
        files.push(("mean_length.csv".into(), matrix_csv("output\\input", &mean)?));
        mean_lengths = json!(mean);
    }
    Ok(RunOutput {
        result: json!({ "counts": decimal, "log10_counts": log10, "mean_lengths": mean_lengths }),
        files,
        primary: Some("log10_counts.csv".into()),
    })
}

#[derive(Serialize)]
struct FlowRecord {
    layer: usize,
    row: usize,
    flow: f64,
    sensitivity_index: usize,
}

fn cmd_flow(cfg: &RunConfig) -> Result<RunOutput> {
    let g = MeshGraph::new(cfg.m, cfg.architecture)?;
    let flow = g.flow_all(cfg.k)?;
    let mut records = Vec::new();
    for (n, f) in g.mz_nodes().zip(&flow) {
        let pos = g.position(n).expect("mz node");
        records.push(FlowRecord {
            layer: pos.layer + 1,
            row: pos.row + 1,
            flow: *f,
            sensitivity_index: g.sensitivity_index(n)?,
        });
    }
    let cells: Vec<_> = g.mz_nodes().map(|n| g.position(n).expect("mz node")).collect();
    let sens: Vec<f64> = records.iter().map(|r| r.sensitivity_index as f64).collect();
    let mut csv = Vec::new();
    write_records_csv(&mut csv, &records)?;
    let rho = spearman(&flow, &sens);
    Ok(RunOutput {
        result: json!({ "k": cfg.k, "cells": records, "spearman_flow_sensitivity": rho }),
        files: vec![
            ("flow.csv".into(), String::from_utf8(csv).expect("utf-8")),
            ("flow_grid.csv".into(), matrix_csv("row\\layer", &mesh_grid(cfg.m, &cells, &flow))?),
            ("sensitivity_grid.csv".into(), matrix_csv("row\\layer", &mesh_grid(cfg.m, &cells, &sens))?),
        ],
        primary: Some("flow.csv".into()),
    })
}

fn cmd_centrality(cfg: &RunConfig) -> Result<RunOutput> {
    let g = MeshGraph::new(cfg.m, cfg.architecture)?;
    let measures: Vec<Centrality> = match cfg.measure {
        Some(c) => vec![c],
        None => Centrality::ALL.to_vec(),
    };
    let values = measures
        .iter()
        .map(|&c| g.centrality(c))
        .collect::<Result<Vec<_>>>()?;
    let mut wr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["node", "kind", "mode", "layer", "row"];
    header.extend(measures.iter().map(|c| c.name()));
    wr.write_record(&header)?;
    let mut rows = Vec::new();
    for n in 0..g.node_count() {
        let (kind, mode, layer, row) = match g.kind(n) {
            NodeKind::Input { mode } => ("input", (mode + 1).to_string(), String::new(), String::new()),
            NodeKind::Output { mode } => ("output", (mode + 1).to_string(), String::new(), String::new()),
            NodeKind::Mz { layer, row } => ("mz", String::new(), (layer + 1).to_string(), (row + 1).to_string()),
        };
        let mut rec = vec![n.to_string(), kind.to_string(), mode, layer, row];
        rec.extend(values.iter().map(|v| v[&n].to_string()));
        wr.write_record(&rec)?;
        let vals: serde_json::Map<String, Value> = measures
            .iter()
            .zip(&values)
            .map(|(c, v)| (c.name().to_string(), json!(v[&n])))
            .collect();
        rows.push(json!({ "node": n, "kind": g.kind(n), "values": vals }));
    }
    let csv = String::from_utf8(wr.into_inner().map_err(|e| Error::Io(e.into_error()))?).expect("utf-8");
    Ok(RunOutput {
        result: json!({ "nodes": rows }),
        files: vec![("centrality.csv".into(), csv)],
        primary: Some("centrality.csv".into()),
    })
}

fn cmd_zeta(cfg: &RunConfig) -> Result<RunOutput> {
    let z = zeta_map(&cfg.zeta_config()?)?;
    let files = vec![
        ("zeta.csv".to_string(), matrix_csv("output\\input", &z.zeta)?),
        ("mean_re.csv".to_string(), matrix_csv("output\\input", &z.mean_re)?),
        ("mean_im.csv".to_string(), matrix_csv("output\\input", &z.mean_im)?),
    ];
    Ok(RunOutput {
        result: serde_json::to_value(&z)?,
        files,
        primary: Some("zeta.csv".into()),
    })
}

fn cmd_mpbias(cfg: &RunConfig) -> Result<RunOutput> {
    let u = cfg.unitary()?;
    let mut b = BiasConfig::new(cfg.photons, cfg.trials);
    b.noise = cfg.noise();
    b.seed = cfg.seed;
    b.workers = cfg.workers;
    let maps = multi_photon_bias(&u, cfg.architecture, &b)?;
    let sets = dependency_sets(cfg.m, cfg.architecture)?;
    let counts = sets.parameter_counts();
    let dij: Vec<f64> = maps.delta_ij.iter().flatten().copied().collect();
    let cnt: Vec<f64> = counts.iter().flatten().map(|&c| c as f64).collect();
    let rho = spearman(&dij, &cnt);

    #[derive(Serialize)]
    struct Row {
        input: String,
        output: String,
        p: f64,
        delta: f64,
        sigma: f64,
        spread: f64,
    }
    let rows: Vec<Row> = maps
        .records
        .iter()
        .map(|r| Row {
            input: r.input.to_string(),
            output: r.output.to_string(),
            p: r.p,
            delta: r.delta,
            sigma: r.sigma,
            spread: r.spread,
        })
        .collect();
    let mut rec = Vec::new();
    write_records_csv(&mut rec, &rows)?;
    let xi: Vec<Vec<f64>> = maps.delta_xi.iter().map(|&v| vec![v]).collect();
    let files = vec![
        ("delta_ij.csv".to_string(), matrix_csv("output\\input", &maps.delta_ij)?),
        ("delta_xi.csv".to_string(), matrix_csv("param", &xi)?),
        ("records.csv".to_string(), String::from_utf8(rec).expect("utf-8")),
    ];
    Ok(RunOutput {
        result: json!({
            "mean_significance": maps.mean_significance,
            "significance_std": maps.significance_std,
            "skipped_pairs": maps.skipped_pairs,
            "sigma_scale": maps.sigma_scale,
            "spearman_delta_ij_parameter_count": rho,
            "delta_ij": maps.delta_ij,
            "delta_xi": maps.delta_xi,
        }),
        files,
        primary: Some("delta_ij.csv".into()),
    })
}

fn cmd_depsets(cfg: &RunConfig) -> Result<RunOutput> {
    let sets = dependency_sets(cfg.m, cfg.architecture)?;
    let counts = sets.parameter_counts();
    let doc: Value = serde_json::from_str(&sets.to_json()?)?;
    Ok(RunOutput {
        result: doc,
        files: vec![
            ("parameter_counts.csv".into(), matrix_csv("output\\input", &counts)?),
            ("dependency_sets.json".into(), sets.to_json()?),
        ],
        primary: Some("parameter_counts.csv".into()),
    })
}

fn cmd_calibrate(cfg: &RunConfig) -> Result<RunOutput> {
    let scan = cfg.scan();
    if cfg.repeats == 1 {
        let mut dev = SimulatedDevice::random(cfg.m, cfg.meas_noise, cfg.seed)?;
        let truth: Vec<Value> = dev
            .cells()
            .iter()
            .zip(dev.laws())
            .map(|(c, l)| json!({ "layer": c.layer, "row": c.row, "law": l }))
            .collect();
        let est = calibrate(&mut dev, &scan)?;
        let max_error = est.max_error();
        let mut out = RunOutput::json(json!({
            "max_error": max_error,
            "truth": truth,
            "estimate": est,
        }));
        out.files.push(("estimate.json".into(), to_json_pretty(&est)?));
        out.files.push(("truth.json".into(), to_json_pretty(&truth)?));
        return Ok(out);
    }
    let map = calibration_error_map(cfg.m, cfg.repeats, cfg.meas_noise, cfg.seed, &scan, cfg.workers)?;
    let order: Vec<f64> = map.psi_order.iter().map(|&o| o as f64).collect();
    let rho = spearman(&map.psi0, &order);
    let grid = |v: &[f64]| matrix_csv("row\\layer", &mesh_grid(map.m, &map.cells, v));
    let files = vec![
        ("psi0_error.csv".to_string(), grid(&map.psi0)?),
        ("beta_error.csv".to_string(), grid(&map.beta)?),
        ("theta0_error.csv".to_string(), grid(&map.theta0)?),
        ("alpha_error.csv".to_string(), grid(&map.alpha)?),
        ("order.csv".to_string(), grid(&order)?),
    ];
    Ok(RunOutput {
        result: error_map_json(&map, rho),
        files,
        primary: Some("psi0_error.csv".into()),
    })
}

fn error_map_json(map: &ErrorMap, rho: f64) -> Value {
    json!({ "map": map, "spearman_psi0_order": rho })
}

fn cmd_catalan(cfg: &RunConfig) -> Result<RunOutput> {
    // rows a = 0..=m, columns b = 0..=m
    let n = cfg.m as u64;
    let table: Vec<Vec<String>> = (0..=n)
        .map(|a| {
            (0..=n)
                .map(|b| paths::catalan_trapezoid(TrapezoidIndex { s: cfg.s, a, b }).to_str_radix(10))
                .collect()
        })
        .collect();
    let mut wr = csv::Writer::from_writer(Vec::new());
    let mut header = vec![format!("s={} a\\b", cfg.s)];
    header.extend((0..=n).map(|b| b.to_string()));
    wr.write_record(&header)?;
    for (a, row) in table.iter().enumerate() {
        let mut rec = vec![a.to_string()];
        rec.extend(row.iter().cloned());
        wr.write_record(&rec)?;
    }
    let csv = String::from_utf8(wr.into_inner().map_err(|e| Error::Io(e.into_error()))?).expect("utf-8");
    Ok(RunOutput {
        result: json!({ "s": cfg.s, "table": table }),
        files: vec![("catalan.csv".into(), csv)],
        primary: Some("catalan.csv".into()),
    })
}

#[derive(Serialize)]
struct AsymptoticRow {
    m: usize,
    case: AsymptoticCase,
    exact_log_ratio: f64,
    approx_log_ratio: f64,
    relative_error: f64,
}

fn cmd_asymptotics(cfg: &RunConfig) -> Result<RunOutput> {
    // the requested m plus the doubling ladder used in the analysis
    let mut ms = vec![30, 60, 120, 240];
    if !ms.contains(&cfg.m) && cfg.m >= 4 {
        ms.push(cfg.m);
        ms.sort_unstable();
    }
    let mut rows = Vec::new();
    for &m in &ms {
        for case in AsymptoticCase::ALL {
            if case == AsymptoticCase::Edge1HalfM && m % 2 == 1 {
                continue;
            }
            let exact = paths::exact_log_ratio(m, case)?;
            let approx = paths::asymptotic_log_ratio(m, case)?;
            rows.push(AsymptoticRow {
                m,
                case,
                exact_log_ratio: exact,
                approx_log_ratio: approx,
                relative_error: ((approx - exact) / exact).abs(),
            });
        }
    }
    let mut csv = Vec::new();
    write_records_csv(&mut csv, &rows)?;
    Ok(RunOutput {
        result: json!({ "rows": rows, "edge_rate": paths::edge_rate() }),
        files: vec![("asymptotics.csv".into(), String::from_utf8(csv).expect("utf-8"))],
        primary: Some("asymptotics.csv".into()),
    })
}

/// Write a unitary file usable as `--input`.
pub fn write_unitary(path: &Path, u: &CMatrix) -> Result<()> {
    emit(Some(path), &matrix_to_json(u)?)
}
