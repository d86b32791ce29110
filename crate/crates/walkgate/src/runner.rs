//! Reproducible experiment driver behind the `walkgate` CLI.
//!
//! Every experiment is a JSON config with a `command` field; unknown fields
//! are rejected. Runs are deterministic for a fixed seed and write a
//! `result.json` record (config echo, scalar results, units, artifact
//! version) plus CSV arrays next to it. The sweep command patches a base
//! config over a parameter grid and runs the points on a worker pool,
//! writing each record atomically.

use crate::cqed::{self, LatticeSpec};
use crate::embedding::{ancilla_block, embed, Ancilla};
use crate::fsbsw;
use crate::ion;
use crate::linalg::{average_gate_fidelity, Operator, C64};
use crate::qsp::{self, FindPhasesOptions, PhaseSequence, TargetPolynomial};
use crate::walk;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("simulation failed: {0}")]
    Simulation(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunnerError {
    /// CLI exit code: 2 for validation problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunnerError::Validation(_) => 2,
            _ => 1,
        }
    }
}

fn validation<E: std::fmt::Display>(e: E) -> RunnerError {
    RunnerError::Validation(e.to_string())
}

fn simulation<E: std::fmt::Display>(e: E) -> RunnerError {
    RunnerError::Simulation(e.to_string())
}

/// Result record written as `result.json`.
#[derive(Clone, Debug, Serialize)]
pub struct ResultRecord {
    pub command: String,
    pub config: Value,
    pub scalars: BTreeMap<String, f64>,
    pub notes: BTreeMap<String, String>,
    pub units: BTreeMap<String, String>,
    /// CSV/JSON artifacts written next to the record.
    pub outputs: Vec<String>,
    pub artifact_version: String,
    pub wall_ms: u128,
}

impl ResultRecord {
    fn new(command: &str, config: Value) -> Self {
        ResultRecord {
            command: command.to_string(),
            config,
            scalars: BTreeMap::new(),
            notes: BTreeMap::new(),
            units: BTreeMap::new(),
            outputs: Vec::new(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_ms: 0,
        }
    }
}

/// Overrides carried in from the command line.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct CommandProbe {
    command: String,
    #[serde(default)]
    output: Option<String>,
}

/// Output directory resolution: an explicit CLI path wins, then the
/// config's `output` field, then `walkgate-out`.
pub fn resolve_out_dir(config: &Value, cli: Option<&Path>) -> PathBuf {
    if let Some(p) = cli {
        return p.to_path_buf();
    }
    if let Ok(probe) = serde_json::from_value::<CommandProbe>(config.clone()) {
        if let Some(out) = probe.output {
            return PathBuf::from(out);
        }
    }
    PathBuf::from("walkgate-out")
}

macro_rules! parse_cfg {
    ($ty:ty, $value:expr) => {
        serde_json::from_value::<$ty>($value.clone()).map_err(validation)?
    };
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)] // common schema fields are CLI-resolved
struct WalkConfig {
    #[allow(dead_code)]
    command: String,
    theta: f64,
    #[serde(default)]
    k: f64,
    half_steps: usize,
    #[serde(default = "default_grid")]
    grid_size: usize,
    #[serde(default)]
    rng_seed: Option<u64>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    output: Option<String>,
}

fn default_grid() -> usize {
    256
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)] // common schema fields are CLI-resolved
struct EmbedConfig {
    #[allow(dead_code)]
    command: String,
    matrix: MatrixSpec,
    t: f64,
    #[serde(default)]
    k: f64,
    half_steps: usize,
    #[serde(default)]
    rng_seed: Option<u64>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    output: Option<String>,
}

/// The matrix A to embed.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum MatrixSpec {
    /// Truncated annihilation operator on `dim` levels.
    Annihilation { dim: usize },
    /// Simultaneous-CZ coupling matrix Σ g_j |1_j⟩⟨2_j| on 3-level sites.
    Couplings { couplings: Vec<f64> },
}

impl MatrixSpec {
    fn build(&self) -> Operator {
        match self {
            MatrixSpec::Annihilation { dim } => crate::linalg::annihilation(*dim),
            MatrixSpec::Couplings { couplings } => cqed::embedded_matrix(couplings),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)] // common schema fields are CLI-resolved
struct CqedRwaConfig {
    #[allow(dead_code)]
    command: String,
    #[serde(default)]
    preset: Option<String>,
    #[serde(default)]
    couplings: Option<Vec<f64>>,
    half_steps: usize,
    #[serde(default)]
    k: f64,
    #[serde(default = "default_t_factor")]
    t_factor: f64,
    #[serde(default)]
    rng_seed: Option<u64>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    output: Option<String>,
}

fn default_t_factor() -> f64 {
    0.333
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)] // common schema fields are CLI-resolved
struct CqedFullConfig {
    #[allow(dead_code)]
    command: String,
    /// Resonant coupling g/2π in MHz (reference lattice); ignored when a
    /// full `lattice` document is given.
    #[serde(default)]
    g_mhz: Option<f64>,
    /// Explicit lattice description, overriding the reference preset.
    #[serde(default)]
    lattice: Option<LatticeSpec>,
    #[serde(default)]
    half_steps: Option<usize>,
    #[serde(default = "default_t_factor")]
    t_factor: f64,
    #[serde(default = "default_phi_scan")]
    phi_scan: usize,
    /// Collapse the third anharmonicity to −0.283 MHz (nearly harmonic
    /// neighbor, resonant 0↔1 exchange).
    #[serde(default)]
    nearly_harmonic_neighbor: bool,
    #[serde(default = "default_true")]
    counter_rotating: bool,
    #[serde(default = "default_local_dim")]
    local_dim: usize,
    #[serde(default)]
    probe: Option<ProbeSpec>,
    #[serde(default)]
    rng_seed: Option<u64>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    output: Option<String>,
}

fn default_phi_scan() -> usize {
    720
}
fn default_true() -> bool {
    true
}
fn default_local_dim() -> usize {
    3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbeSpec {
    states: Vec<String>,
    /// Trace length in units of π/g.
    #[serde(default = "default_probe_span")]
    t_max_factor: f64,
    #[serde(default = "default_probe_samples")]
    samples: usize,
}

fn default_probe_span() -> f64 {
    1.0
}
fn default_probe_samples() -> usize {
    201
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)] // common schema fields are CLI-resolved
struct QspConfig {
    #[allow(dead_code)]
    command: String,
    target: TargetPolynomial,
    #[serde(default)]
    degree: Option<usize>,
    /// Verify these phases instead of searching.
    #[serde(default)]
    phases: Option<Vec<f64>>,
    #[serde(default = "default_qsp_grid")]
    grid_points: usize,
    /// Homogeneous-coupling reflection fidelity over this many neighbors.
    #[serde(default)]
    n_neighbors: Option<usize>,
    /// Interaction time in units of 1/g for the reflection fidelity.
    #[serde(default)]
    t: Option<f64>,
    #[serde(default)]
    rng_seed: Option<u64>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    output: Option<String>,
}

fn default_qsp_grid() -> usize {
    201
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)] // common schema fields are CLI-resolved
struct IonConfig {
    #[allow(dead_code)]
    command: String,
    operation: IonOperation,
    #[serde(default)]
    rng_seed: Option<u64>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    output: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum IonOperation {
    Reflection {
        n_neighbors: usize,
        theta: f64,
        half_steps: usize,
        #[serde(default)]
        phi: f64,
    },
    Partition {
        integers: Vec<i64>,
        mechanism: ion::PartitionMechanism,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)] // common schema fields are CLI-resolved
struct RydbergConfig {
    #[allow(dead_code)]
    command: String,
    couplings: Vec<f64>,
    t: f64,
    phi: f64,
    #[serde(default)]
    rng_seed: Option<u64>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    output: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)] // common schema fields are CLI-resolved
struct FsbswConfig {
    #[allow(dead_code)]
    command: String,
    n: usize,
    /// NOT-conjugate these qubits before and after the sequence.
    #[serde(default)]
    not_conjugation: Vec<usize>,
    #[serde(default)]
    rng_seed: Option<u64>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    output: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)] // common schema fields are CLI-resolved
struct SweepConfig {
    #[allow(dead_code)]
    command: String,
    base: Value,
    axes: Vec<SweepAxis>,
    #[serde(default)]
    rng_seed: Option<u64>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    output: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepAxis {
    field: String,
    #[serde(default)]
    values: Option<Vec<Value>>,
    /// [start, stop, count] inclusive grid.
    #[serde(default)]
    linspace: Option<(f64, f64, usize)>,
}

impl SweepAxis {
    fn expand(&self) -> Result<Vec<Value>, RunnerError> {
        match (&self.values, &self.linspace) {
            (Some(v), None) => Ok(v.clone()),
            (None, Some((start, stop, count))) => {
                if *count < 2 {
                    return Err(RunnerError::Validation(
                        "linspace needs at least 2 points".into(),
                    ));
                }
                Ok((0..*count)
                    .map(|i| {
                        let x = start + (stop - start) * i as f64 / (*count - 1) as f64;
                        serde_json::json!(x)
                    })
                    .collect())
            }
            _ => Err(RunnerError::Validation(
                format!("axis '{}' needs exactly one of values/linspace", self.field),
            )),
        }
    }
}

/// Run a config (already parsed to JSON) and write artifacts under
/// `out_dir`. `subcommand` must match the config's command field.
pub fn run(
    subcommand: &str,
    config: &Value,
    out_dir: &Path,
    overrides: Overrides,
) -> Result<ResultRecord, RunnerError> {
    let probe: CommandProbe = serde_json::from_value(config.clone()).map_err(validation)?;
    if probe.command != subcommand {
        return Err(RunnerError::Validation(format!(
            "config command '{}' does not match subcommand '{}'",
            probe.command, subcommand
        )));
    }
    let started = std::time::Instant::now();
    let mut record = dispatch(&probe.command, config, out_dir, overrides)?;
    record.wall_ms = started.elapsed().as_millis();
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join("result.json");
    write_atomic(&path, &serde_json::to_vec_pretty(&record).map_err(simulation)?)?;
    Ok(record)
}

fn dispatch(
    command: &str,
    config: &Value,
    out_dir: &Path,
    overrides: Overrides,
) -> Result<ResultRecord, RunnerError> {
    match command {
        "walk" => run_walk(config, out_dir, overrides),
        "embed" => run_embed(config, out_dir, overrides),
        "cqed-rwa" => run_cqed_rwa(config, overrides),
        "cqed-full" => run_cqed_full(config, out_dir, overrides),
        "qsp" => run_qsp(config, out_dir, overrides),
        "ion" => run_ion(config, overrides),
        "rydberg" => run_rydberg(config, overrides),
        "fsbsw" => run_fsbsw(config, out_dir, overrides),
        "sweep" => run_sweep(config, out_dir, overrides),
        other => Err(RunnerError::Validation(format!("unknown command '{other}'"))),
    }
}

fn run_walk(config: &Value, out_dir: &Path, _ov: Overrides) -> Result<ResultRecord, RunnerError> {
    let cfg = parse_cfg!(WalkConfig, config);
    let mut record = ResultRecord::new("walk", config.clone());
    let residual = walk::revival_residual(cfg.theta, cfg.half_steps).map_err(validation)?;
    let bound = walk::revival_bound(cfg.theta, cfg.half_steps);
    let winding = walk::winding_number(cfg.theta, cfg.grid_size).map_err(validation)?;
    let params = walk::WalkParams::new(cfg.theta, cfg.k, cfg.half_steps).map_err(validation)?;
    let seq = walk::walk_sequence(&params);
    record.scalars.insert("revival_residual".into(), residual);
    record.scalars.insert("revival_bound".into(), bound);
    record
        .scalars
        .insert("winding_number".into(), winding.winding as f64);
    record
        .scalars
        .insert("degenerate".into(), winding.degenerate as u8 as f64);
    record
        .scalars
        .insert("unitarity_deviation".into(), seq.unitarity_deviation());
    record.units.insert("theta".into(), "rad".into());
    record.units.insert("k".into(), "rad".into());
    // band structure over the momentum grid
    let mut rows = Vec::new();
    for i in 0..cfg.grid_size {
        let k = std::f64::consts::TAU * i as f64 / cfg.grid_size as f64;
        if let Ok(p) = walk::band_point(k, cfg.theta) {
            rows.push(vec![
                format!("{k}"),
                format!("{}", p.energy),
                format!("{}", p.axis[0]),
                format!("{}", p.axis[1]),
                format!("{}", p.axis[2]),
            ]);
        }
    }
    let band = write_csv(out_dir, "band.csv", &["k", "energy", "nx", "ny", "nz"], &rows)?;
    record.outputs.push(band);
    Ok(record)
}

fn run_embed(config: &Value, out_dir: &Path, ov: Overrides) -> Result<ResultRecord, RunnerError> {
    let cfg = parse_cfg!(EmbedConfig, config);
    let tol = ov.tol.or(cfg.tol).unwrap_or(crate::linalg::DEFAULT_TOL);
    let mut record = ResultRecord::new("embed", config.clone());
    let a = cfg.matrix.build();
    let sys = embed(&a);
    let seq = sys
        .rotation_sequence(cfg.t, cfg.k, cfg.half_steps)
        .map_err(validation)?;
    let m = ancilla_block(&seq, Ancilla::Excited, Ancilla::Excited);
    let target = sys.ideal_rotation(cfg.k, cfg.half_steps);
    // restrict both to the left singular vectors (the closed subspace)
    let fidelity = average_gate_fidelity(&m, &target.restricted);
    let blocks_dev = sys.evolve(cfg.t).max_abs_diff(&sys.evolve_blocks(cfg.t));
    record.scalars.insert("fidelity".into(), fidelity);
    record.scalars.insert("phi_label".into(), target.phi);
    record
        .scalars
        .insert("block_formula_deviation".into(), blocks_dev);
    record.scalars.insert(
        "n_zero_singular".into(),
        (0..sys.inner_dim()).filter(|&j| sys.svd().is_zero(j)).count() as f64,
    );
    record
        .scalars
        .insert("unitarity_deviation".into(), seq.unitarity_deviation());
    record.notes.insert("tolerance".into(), format!("{tol:e}"));
    let rows: Vec<Vec<String>> = sys
        .svd()
        .singular_values
        .iter()
        .enumerate()
        .map(|(j, s)| vec![format!("{j}"), format!("{s}"), format!("{}", sys.svd().is_zero(j) as u8)])
        .collect();
    let csv = write_csv(out_dir, "singular_values.csv", &["index", "sigma", "is_zero"], &rows)?;
    record.outputs.push(csv);
    Ok(record)
}

fn resolve_couplings(cfg: &CqedRwaConfig) -> Result<Vec<f64>, RunnerError> {
    match (&cfg.preset, &cfg.couplings) {
        (Some(name), None) => match name.as_str() {
            "homogeneous" => Ok(vec![1.0; 4]),
            "inhomogeneous" => Ok(cqed::INHOMOGENEOUS_COUPLINGS.to_vec()),
            "inhomogeneous-rounded" => Ok(cqed::INHOMOGENEOUS_ROUNDED.to_vec()),
            other => Err(RunnerError::Validation(format!("unknown preset '{other}'"))),
        },
        (None, Some(gs)) if !gs.is_empty() => Ok(gs.clone()),
        _ => Err(RunnerError::Validation(
            "cqed-rwa needs exactly one of preset/couplings".into(),
        )),
    }
}

fn run_cqed_rwa(config: &Value, _ov: Overrides) -> Result<ResultRecord, RunnerError> {
    let cfg = parse_cfg!(CqedRwaConfig, config);
    let gs = resolve_couplings(&cfg)?;
    let mut record = ResultRecord::new("cqed-rwa", config.clone());
    let g_max = gs.iter().cloned().fold(0.0, f64::max);
    let t_g = cfg.t_factor * PI / g_max;
    let report =
        cqed::simulate_rwa_sequence(&gs, cfg.half_steps, cfg.k, t_g).map_err(simulation)?;
    record.scalars.insert("fidelity".into(), report.fidelity);
    record.scalars.insert("phi_star".into(), report.phi_star);
    record.scalars.insert("t_g".into(), t_g);
    record
        .units
        .insert("t_g".into(), "1/g (relative coupling units)".into());
    record.units.insert("k".into(), "rad".into());
    Ok(record)
}

fn run_cqed_full(
    config: &Value,
    out_dir: &Path,
    _ov: Overrides,
) -> Result<ResultRecord, RunnerError> {
    let cfg = parse_cfg!(CqedFullConfig, config);
    if cfg.half_steps.is_none() && cfg.probe.is_none() {
        return Err(RunnerError::Validation(
            "cqed-full needs half_steps (sequence) and/or probe".into(),
        ));
    }
    let mut spec = match (&cfg.lattice, cfg.g_mhz) {
        (Some(lattice), _) => lattice.clone(),
        (None, Some(g_mhz)) if cfg.nearly_harmonic_neighbor => {
            LatticeSpec::reference_nearly_harmonic(g_mhz * 1e-3)
        }
        (None, Some(g_mhz)) => LatticeSpec::reference(g_mhz * 1e-3),
        (None, None) => {
            return Err(RunnerError::Validation(
                "cqed-full needs g_mhz or a lattice document".into(),
            ))
        }
    };
    if cfg.lattice.is_none() {
        spec.counter_rotating = cfg.counter_rotating;
        spec.local_dim = cfg.local_dim;
    }
    let mut record = ResultRecord::new("cqed-full", config.clone());
    if let Some(half_steps) = cfg.half_steps {
        let t_g = spec.gate_time_ns(cfg.t_factor);
        let report = cqed::simulate_full_sequence(&spec, half_steps, t_g, cfg.phi_scan)
            .map_err(simulation)?;
        let n = report.m.nrows() as f64;
        let leakage = 1.0 - (report.m.adjoint() * &report.m).trace().re / n;
        record.scalars.insert("fidelity".into(), report.fidelity);
        record.scalars.insert("phi_star".into(), report.phi_star);
        record.scalars.insert("t_g_ns".into(), t_g);
        record.scalars.insert("leakage".into(), leakage);
        record
            .scalars
            .insert("total_time_ns".into(), 2.0 * half_steps as f64 * t_g);
    }
    if let Some(probe) = &cfg.probe {
        let g_ang = std::f64::consts::TAU * spec.g_ghz;
        let t_max = probe.t_max_factor * PI / g_ang;
        let labels: Vec<&str> = probe.states.iter().map(|s| s.as_str()).collect();
        let traces = cqed::probe_initial_states(&spec, &labels, t_max, probe.samples)
            .map_err(validation)?;
        let mut rows = Vec::new();
        for trace in &traces {
            for (t, p) in trace.times_ns.iter().zip(&trace.populations) {
                rows.push(vec![format!("{t}"), trace.label.clone(), format!("{p}")]);
            }
        }
        let csv = write_csv(
            out_dir,
            "traces.csv",
            &["time_ns", "state_label", "population"],
            &rows,
        )?;
        record.outputs.push(csv);
    }
    record.units.insert("g_mhz".into(), "MHz (linear, /2π)".into());
    record.units.insert("t_g_ns".into(), "ns".into());
    record.units.insert("phi_star".into(), "rad".into());
    record.notes.insert(
        "frequencies".into(),
        "omega/2π GHz; interaction on for exactly t_g per step; frame exp(+iH0·T)".into(),
    );
    Ok(record)
}

fn run_qsp(config: &Value, out_dir: &Path, ov: Overrides) -> Result<ResultRecord, RunnerError> {
    let cfg = parse_cfg!(QspConfig, config);
    let mut record = ResultRecord::new("qsp", config.clone());
    let degree = cfg.degree.unwrap_or_else(|| cfg.target.degree());
    let (sequence, residual) = if let Some(phases) = &cfg.phases {
        let seq = PhaseSequence::new(phases.clone());
        if seq.degree() != degree {
            return Err(RunnerError::Validation(format!(
                "phases have degree {}, expected {degree}",
                seq.degree()
            )));
        }
        let sup = (0..cfg.grid_points)
            .map(|i| {
                let x = (PI * i as f64 / (cfg.grid_points - 1) as f64).cos();
                (qsp::qsp_response(&seq, x) - C64::new(cfg.target.eval(x), 0.0)).norm()
            })
            .fold(0.0, f64::max);
        (seq, sup)
    } else {
        let opts = FindPhasesOptions {
            grid_points: cfg.grid_points,
            seed: ov.seed.or(cfg.rng_seed).unwrap_or(7),
            ..FindPhasesOptions::default()
        };
        let found = qsp::find_phases(&cfg.target, degree, opts).map_err(simulation)?;
        (found.sequence, found.residual)
    };
    record.scalars.insert("residual".into(), residual);
    record.scalars.insert("degree".into(), degree as f64);
    let at_one = qsp::qsp_response(&sequence, 1.0);
    record.scalars.insert("response_at_one_re".into(), at_one.re);
    record.scalars.insert("response_at_one_im".into(), at_one.im);
    if let (Some(n), Some(t)) = (cfg.n_neighbors, cfg.t) {
        let blocks = qsp::homogeneous_blocks(n);
        let f = qsp::qsp_reflection_fidelity(&sequence, &blocks, t);
        record.scalars.insert("reflection_fidelity".into(), f);
        record
            .units
            .insert("t".into(), "1/g (homogeneous coupling units)".into());
    }
    // phases as a JSON array (radians)
    let phases_path = out_dir.join("phases.json");
    std::fs::create_dir_all(out_dir)?;
    write_atomic(
        &phases_path,
        &serde_json::to_vec_pretty(&sequence.phases().to_vec()).map_err(simulation)?,
    )?;
    record.outputs.push("phases.json".into());
    // response table with the same-degree walk-reflection polynomial
    let mut rows = Vec::new();
    for i in 0..=200 {
        let x = -1.0 + i as f64 / 100.0;
        let r = qsp::qsp_response(&sequence, x);
        let tw = 2.0 * x.powi(degree as i32) - 1.0;
        rows.push(vec![
            format!("{x}"),
            format!("{}", cfg.target.eval(x)),
            format!("{}", r.re),
            format!("{}", r.im),
            format!("{tw}"),
        ]);
    }
    let csv = write_csv(
        out_dir,
        "response.csv",
        &["x", "target", "response_re", "response_im", "walk_reflection"],
        &rows,
    )?;
    record.outputs.push(csv);
    record.units.insert("phases".into(), "rad".into());
    Ok(record)
}

fn run_ion(config: &Value, _ov: Overrides) -> Result<ResultRecord, RunnerError> {
    let cfg = parse_cfg!(IonConfig, config);
    let mut record = ResultRecord::new("ion", config.clone());
    match &cfg.operation {
        IonOperation::Reflection {
            n_neighbors,
            theta,
            half_steps,
            phi,
        } => {
            let report = ion::ion_reflection(*n_neighbors, *theta, *half_steps, *phi)
                .map_err(validation)?;
            record
                .scalars
                .insert("fidelity_anc0".into(), report.fidelity_anc0);
            record
                .scalars
                .insert("fidelity_anc1".into(), report.fidelity_anc1);
            record
                .scalars
                .insert("zero_subspace_dim".into(), report.zero_subspace_dim as f64);
        }
        IonOperation::Partition {
            integers,
            mechanism,
        } => {
            let report = ion::partition_oracle(integers, *mechanism).map_err(validation)?;
            record.scalars.insert("fidelity".into(), report.fidelity);
            record.scalars.insert(
                "has_balanced_partition".into(),
                report.has_balanced_partition as u8 as f64,
            );
            record
                .scalars
                .insert("zero_subspace_dim".into(), report.zero_subspace_dim as f64);
            record
                .scalars
                .insert("interaction_time".into(), report.interaction_time);
            record.scalars.insert("effort".into(), report.effort as f64);
            record.notes.insert(
                "balanced_assignments".into(),
                format!("{:?}", ion::balanced_assignments(integers)),
            );
        }
    }
    record.units.insert("theta".into(), "rad".into());
    Ok(record)
}

fn run_rydberg(config: &Value, _ov: Overrides) -> Result<ResultRecord, RunnerError> {
    let cfg = parse_cfg!(RydbergConfig, config);
    let mut record = ResultRecord::new("rydberg", config.clone());
    let gates = ion::rydberg_walk_w0(&cfg.couplings, cfg.t, cfg.phi);
    let blocks = ion::rydberg_walk_w0_blocks(&cfg.couplings, cfg.t, cfg.phi);
    record
        .scalars
        .insert("dual_construction_deviation".into(), gates.max_abs_diff(&blocks));
    record
        .scalars
        .insert("unitarity_deviation".into(), gates.unitarity_deviation());
    record.units.insert("t".into(), "1/V (coupling units)".into());
    Ok(record)
}

fn run_fsbsw(config: &Value, out_dir: &Path, _ov: Overrides) -> Result<ResultRecord, RunnerError> {
    let cfg = parse_cfg!(FsbswConfig, config);
    let mut record = ResultRecord::new("fsbsw", config.clone());
    let mut steps: Vec<fsbsw::FsbswStep> = cfg
        .not_conjugation
        .iter()
        .map(|&q| fsbsw::FsbswStep::Not(q))
        .collect();
    let body = fsbsw::build_fsbsw_sequence(cfg.n).map_err(validation)?;
    let duration = fsbsw::total_cz_duration(&body);
    steps.extend(body);
    steps.extend(cfg.not_conjugation.iter().map(|&q| fsbsw::FsbswStep::Not(q)));
    if cfg.n > 6 {
        return Err(RunnerError::Validation(format!(
            "3^n space capped at n = 6, got {}",
            cfg.n
        )));
    }
    let u = fsbsw::simulate_steps(&steps, cfg.n);
    let deviation = if cfg.not_conjugation.is_empty() {
        fsbsw::phase_flip_deviation(&u, cfg.n)
    } else {
        f64::NAN
    };
    record.scalars.insert("duration_cz".into(), duration);
    if cfg.not_conjugation.is_empty() {
        record.scalars.insert("phase_flip_deviation".into(), deviation);
        record.notes.insert(
            "flipped_state".into(),
            fsbsw::flipped_state(cfg.n)
                .iter()
                .map(|d| d.to_string())
                .collect::<String>(),
        );
    }
    let minus: Vec<String> = fsbsw::computational_diagonal(&u, cfg.n)
        .iter()
        .enumerate()
        .filter(|(_, z)| (*z + C64::new(1.0, 0.0)).norm() < 1e-8)
        .map(|(code, _)| format!("{code:0width$b}", width = cfg.n))
        .collect();
    record.notes.insert("minus_states".into(), minus.join(";"));
    record
        .units
        .insert("duration_cz".into(), "π/g (CZ gate times)".into());
    let rows: Vec<Vec<String>> = fsbsw::cost_comparison(cfg.n)
        .map_err(validation)?
        .iter()
        .map(|row| {
            vec![
                row.method.clone(),
                row.n.to_string(),
                format!("{}", row.two_qubit_time_cz),
                row.single_qubit_count
                    .map(|c| c.to_string())
                    .unwrap_or_default(),
            ]
        })
        .collect();
    let csv = write_csv(
        out_dir,
        "cost.csv",
        &["method", "n", "two_qubit_time_cz", "single_qubit_count"],
        &rows,
    )?;
    record.outputs.push(csv);
    Ok(record)
}

fn run_sweep(config: &Value, out_dir: &Path, ov: Overrides) -> Result<ResultRecord, RunnerError> {
    let cfg = parse_cfg!(SweepConfig, config);
    let base_probe: CommandProbe =
        serde_json::from_value(cfg.base.clone()).map_err(validation)?;
    if base_probe.command == "sweep" {
        return Err(RunnerError::Validation("sweeps cannot nest".into()));
    }
    let axes: Vec<(String, Vec<Value>)> = cfg
        .axes
        .iter()
        .map(|a| Ok((a.field.clone(), a.expand()?)))
        .collect::<Result<_, RunnerError>>()?;
    if axes.is_empty() {
        return Err(RunnerError::Validation("sweep needs at least one axis".into()));
    }
    let mut grid: Vec<Vec<usize>> = vec![vec![]];
    for (_, values) in &axes {
        let mut next = Vec::new();
        for combo in &grid {
            for i in 0..values.len() {
                let mut c = combo.clone();
                c.push(i);
                next.push(c);
            }
        }
        grid = next;
    }
    let points_dir = out_dir.join("points");
    std::fs::create_dir_all(&points_dir)?;
    let results: Vec<Result<(usize, ResultRecord), RunnerError>> = grid
        .par_iter()
        .enumerate()
        .map(|(idx, combo)| {
            let mut point = cfg.base.clone();
            let obj = point
                .as_object_mut()
                .ok_or_else(|| RunnerError::Validation("base config must be an object".into()))?;
            for ((field, values), &vi) in axes.iter().zip(combo.iter()) {
                obj.insert(field.clone(), values[vi].clone());
            }
            let point_dir = points_dir.join(format!("{idx:04}"));
            std::fs::create_dir_all(&point_dir)?;
            let record = run(&base_probe.command, &point, &point_dir, ov)?;
            Ok((idx, record))
        })
        .collect();
    let mut records = Vec::with_capacity(results.len());
    for r in results {
        records.push(r?);
    }
    records.sort_by_key(|(idx, _)| *idx);

    // matrix CSV: axis columns then the union of scalar columns
    let mut scalar_keys: Vec<String> = Vec::new();
    for (_, rec) in &records {
        for key in rec.scalars.keys() {
            if !scalar_keys.contains(key) {
                scalar_keys.push(key.clone());
            }
        }
    }
    scalar_keys.sort();
    let mut header: Vec<&str> = vec!["point"];
    let axis_names: Vec<String> = axes.iter().map(|(f, _)| f.clone()).collect();
    header.extend(axis_names.iter().map(|s| s.as_str()));
    header.extend(scalar_keys.iter().map(|s| s.as_str()));
    let mut rows = Vec::new();
    for ((idx, rec), combo) in records.iter().zip(&grid) {
        let mut row = vec![format!("{idx:04}")];
        for ((_, values), &vi) in axes.iter().zip(combo.iter()) {
            let v = &values[vi];
            row.push(match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            });
        }
        for key in &scalar_keys {
            row.push(
                rec.scalars
                    .get(key)
                    .map(|v| format!("{v}"))
                    .unwrap_or_default(),
            );
        }
        rows.push(row);
    }
    let csv = write_csv(out_dir, "sweep.csv", &header, &rows)?;
    let mut record = ResultRecord::new("sweep", config.clone());
    record.scalars.insert("n_points".into(), records.len() as f64);
    record.outputs.push(csv);
    record
        .notes
        .insert("points_dir".into(), "points/<index>/result.json".into());
    Ok(record)
}

/// Write UTF-8 comma-separated values with a header row; returns the file
/// name.
fn write_csv(
    out_dir: &Path,
    name: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<String, RunnerError> {
    std::fs::create_dir_all(out_dir)?;
    let mut body = String::new();
    body.push_str(&header.join(","));
    body.push('\n');
    for row in rows {
        body.push_str(&row.join(","));
        body.push('\n');
    }
    write_atomic(&out_dir.join(name), body.as_bytes())?;
    Ok(name.to_string())
}

/// Write through a temp file and rename, so sweep workers never expose
/// half-written records.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RunnerError> {
    let tmp: PathBuf = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
