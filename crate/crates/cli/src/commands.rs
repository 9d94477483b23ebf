//! The four subcommands. Each writes its report into the output directory
//! and returns the report for callers that want it in memory.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use relcharge_core::closedform::{closed_form_orbit, max_deviation};
use relcharge_core::dynamics::{integrate, IntegrateOptions, Trajectory};
use relcharge_core::invariants::{InvariantSet, TrackedInvariants};
use relcharge_core::sampling::sample_points;
use relcharge_core::symmetry::{basis_names, symmetry_scan};
use relcharge_core::{Error, FieldSpec, PhasePoint};
use serde::Serialize;
use serde_json::Value;

use crate::config::{self, RunConfig, SCHEMA};
use crate::output::{to_json, write_trajectory_csv};
use crate::CliError;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SCAN_FILE: &str = "scan.json";
pub const COMPARE_FILE: &str = "compare.json";
pub const SWEEP_FILE: &str = "sweep.json";

/// Command-line overrides shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

fn apply(cfg: &mut RunConfig, raw: &mut Value, o: &Overrides) {
    if let Some(seed) = o.seed {
        cfg.seed = seed;
        raw["seed"] = Value::from(seed);
    }
}

fn out_dir(cfg: &RunConfig, o: &Overrides) -> Result<PathBuf, CliError> {
    let dir = o
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_report<T: Serialize>(dir: &Path, name: &str, report: &T) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, to_json(report)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
    /// Last good state, in the form's column order.
    pub last_state: Option<Vec<f64>>,
}

impl ErrorReport {
    pub fn from_error(e: &Error) -> Self {
        let (kind, last) = match e {
            Error::DomainBoundary { last, .. } => ("domain_boundary", Some(last)),
            Error::StepUnderflow { last, .. } => ("step_underflow", Some(last)),
            Error::OnLightCone { .. } => ("on_light_cone", None),
            Error::TmSingular => ("tm_singular", None),
            Error::NoClosedForm { .. } => ("no_closed_form", None),
            _ => ("error", None),
        };
        ErrorReport {
            kind,
            message: e.to_string(),
            last_state: last.map(|s| s.to_array().to_vec()),
        }
    }
}

/// Drift statistics of one trajectory.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Drift {
    /// `max |Q(τ) - Q(τ₀)| / max(1, max_τ scale(Q))` per conserved quantity.
    pub drift: BTreeMap<String, f64>,
    /// `max |r|` per identity residual.
    pub identities: BTreeMap<String, f64>,
}

pub fn drift_of(set: &InvariantSet, traj: &Trajectory) -> Result<Drift, Error> {
    let mut out = Drift::default();
    if traj.samples.is_empty() {
        return Ok(out);
    }
    let first = &traj.samples[0].tracked;
    let mut scale = vec![1.0f64; first.len()];
    let mut worst = vec![0.0f64; first.len()];
    let all = set.names();
    let positions: Vec<usize> = traj
        .tracked_names
        .iter()
        .map(|n| all.iter().position(|a| a == n).expect("tracked names come from the set"))
        .collect();
    for s in &traj.samples {
        let m = set.magnitudes(&s.state)?;
        for (k, &pos) in positions.iter().enumerate() {
            scale[k] = scale[k].max(m[pos]);
            worst[k] = worst[k].max((s.tracked[k] - first[k]).abs());
        }
    }
    for (k, name) in traj.tracked_names.iter().enumerate() {
        if set.identities.contains(&name.as_str()) {
            let peak = traj.samples.iter().fold(0.0f64, |a, s| a.max(s.tracked[k].abs()));
            out.identities.insert(name.clone(), peak);
        } else {
            out.drift.insert(name.clone(), worst[k] / scale[k]);
        }
    }
    Ok(out)
}

/// Integrates the configured trajectory, tracking the configured names.
pub fn run_trajectory(cfg: &RunConfig) -> Result<(PhasePoint, Trajectory, Drift), CliError> {
    let initial = cfg.initial_state()?;
    let span = cfg.span()?;
    let set = cfg.invariant_set(&initial)?;
    let names = cfg.tracked_names(set.as_ref())?;
    let opts = IntegrateOptions {
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        ..IntegrateOptions::default()
    };
    let tracker = match &set {
        Some(set) if !names.is_empty() => {
            Some(TrackedInvariants::new(set.clone(), &names).map_err(|e| CliError::Config(e.to_string()))?)
        }
        _ => None,
    };
    let traj = integrate(
        &cfg.field,
        &initial,
        span[1],
        &opts,
        tracker.as_ref().map(|t| t as &dyn relcharge_core::dynamics::Tracker),
    )
    .map_err(CliError::Domain)?;
    let drift = match &set {
        Some(set) => drift_of(set, &traj).map_err(CliError::Domain)?,
        None => Drift::default(),
    };
    Ok((initial, traj, drift))
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulateReport {
    pub schema: u32,
    pub command: &'static str,
    pub system: &'static str,
    pub form: relcharge_core::Form,
    pub status: &'static str,
    pub error: Option<ErrorReport>,
    pub columns: Vec<String>,
    pub initial_state: Vec<f64>,
    pub final_state: Option<Vec<f64>>,
    pub samples: usize,
    pub steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    #[serde(flatten)]
    pub drift: Drift,
    pub wall_time_s: f64,
}

pub fn simulate(cfg_path: &Path, o: &Overrides) -> Result<SimulateReport, CliError> {
    let (mut cfg, mut raw) = config::load(cfg_path)?;
    apply(&mut cfg, &mut raw, o);
    let dir = out_dir(&cfg, o)?;
    let initial = cfg.initial_state()?;
    let start = Instant::now();
    let result = run_trajectory(&cfg);
    let wall = start.elapsed().as_secs_f64();
    let mut report = SimulateReport {
        schema: SCHEMA,
        command: "simulate",
        system: cfg.field.name(),
        form: cfg.form,
        status: "ok",
        error: None,
        columns: Vec::new(),
        initial_state: initial.to_array().to_vec(),
        final_state: None,
        samples: 0,
        steps: 0,
        rejected_steps: 0,
        rhs_evaluations: 0,
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        drift: Drift::default(),
        wall_time_s: wall,
    };
    match result {
        Ok((_, traj, drift)) => {
            let path = dir.join(TRAJECTORY_FILE);
            let file = File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            write_trajectory_csv(BufWriter::new(file), &traj)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            report.columns = traj.form.column_names().iter().map(|s| s.to_string()).collect();
            report.columns.extend(traj.tracked_names.iter().cloned());
            report.final_state = Some(traj.last().to_array().to_vec());
            report.samples = traj.samples.len();
            report.steps = traj.stats.steps;
            report.rejected_steps = traj.stats.rejected;
            report.rhs_evaluations = traj.stats.evaluations;
            report.drift = drift;
            write_report(&dir, SUMMARY_FILE, &report)?;
            Ok(report)
        }
        Err(CliError::Domain(e)) => {
            report.status = "error";
            report.error = Some(ErrorReport::from_error(&e));
            write_report(&dir, SUMMARY_FILE, &report)?;
            Err(CliError::Domain(e))
        }
        Err(other) => Err(other),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub schema: u32,
    pub command: &'static str,
    pub system: &'static str,
    pub seed: u64,
    pub sample_count: usize,
    pub tol: f64,
    pub dimension: usize,
    pub singular_values: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    pub basis_names: Vec<&'static str>,
    pub residuals: Vec<f64>,
    pub spectral_gap: f64,
    pub null_level: f64,
}

pub fn scan(cfg_path: &Path, o: &Overrides) -> Result<ScanReport, CliError> {
    let (mut cfg, mut raw) = config::load(cfg_path)?;
    apply(&mut cfg, &mut raw, o);
    let dir = out_dir(&cfg, o)?;
    let points = sample_points(&cfg.field, cfg.scan.samples, cfg.seed);
    let r = symmetry_scan(&cfg.field, &points, cfg.scan.tol).map_err(|e| match e {
        Error::InsufficientSamples { .. } => CliError::Config(e.to_string()),
        other => CliError::Domain(other),
    })?;
    let report = ScanReport {
        schema: SCHEMA,
        command: "scan",
        system: cfg.field.name(),
        seed: cfg.seed,
        sample_count: r.sample_count,
        tol: cfg.scan.tol,
        dimension: r.dimension(),
        singular_values: r.singular_values.to_vec(),
        basis: r.basis.iter().map(|b| b.to_vec()).collect(),
        basis_names: basis_names().to_vec(),
        residuals: r.residuals.clone(),
        spectral_gap: r.spectral_gap(),
        null_level: r.null_level(),
    };
    write_report(&dir, SCAN_FILE, &report)?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub schema: u32,
    pub command: &'static str,
    pub system: &'static str,
    pub columns: Vec<&'static str>,
    /// Largest deviation per phase-space coordinate.
    pub max_deviation: BTreeMap<&'static str, f64>,
    pub max_state_deviation: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub pass: bool,
}

pub fn compare(cfg_path: &Path, o: &Overrides) -> Result<CompareReport, CliError> {
    let (mut cfg, mut raw) = config::load(cfg_path)?;
    apply(&mut cfg, &mut raw, o);
    let dir = out_dir(&cfg, o)?;
    let initial = cfg.initial_state()?;
    let span = cfg.span()?;
    if let FieldSpec::Undulator { .. } | FieldSpec::HelicalBoost { .. } = cfg.field {
        return Err(CliError::Unsupported(format!("no closed form available for {}", cfg.field.name())));
    }
    if initial.form != relcharge_core::Form::Front {
        return Err(CliError::Unsupported(format!(
            "closed-form orbits are written in the front form; {} was configured in the instant form",
            cfg.field.name()
        )));
    }
    let orbit = closed_form_orbit(&cfg.field, &initial).map_err(|e| match e {
        Error::NoClosedForm { .. } => CliError::Unsupported(e.to_string()),
        other => CliError::Domain(other),
    })?;
    let opts = IntegrateOptions {
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        ..IntegrateOptions::default()
    };
    let traj = integrate(&cfg.field, &initial, span[1], &opts, None).map_err(CliError::Domain)?;
    let dev = max_deviation(&orbit, &traj).map_err(CliError::Domain)?;
    let names = &initial.form.column_names()[1..];
    let worst = dev.iter().fold(0.0f64, |a, v| a.max(*v));
    let report = CompareReport {
        schema: SCHEMA,
        command: "compare",
        system: cfg.field.name(),
        columns: names.to_vec(),
        max_deviation: names.iter().copied().zip(dev).collect(),
        max_state_deviation: worst,
        tolerance: cfg.compare.tolerance,
        samples: traj.samples.len(),
        pass: worst <= cfg.compare.tolerance,
    };
    write_report(&dir, COMPARE_FILE, &report)?;
    if report.pass {
        Ok(report)
    } else {
        Err(CliError::Failed(format!(
            "max deviation {worst:e} exceeds tolerance {:e}",
            cfg.compare.tolerance
        )))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRecord {
    pub index: usize,
    pub value: f64,
    pub status: &'static str,
    pub error: Option<ErrorReport>,
    pub steps: usize,
    pub drift: BTreeMap<String, f64>,
    pub identities: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Stat {
    pub max: f64,
    pub median: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub schema: u32,
    pub command: &'static str,
    pub system: &'static str,
    pub parameter: String,
    pub points: usize,
    pub failures: usize,
    pub drift: BTreeMap<String, Stat>,
    pub records: Vec<SweepRecord>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn sweep_point(raw: &Value, parameter: &str, index: usize, value: f64) -> Result<SweepRecord, CliError> {
    let mut point = raw.clone();
    config::set_parameter(&mut point, parameter, value)?;
    let cfg = config::from_value(point)?;
    let mut record = SweepRecord {
        index,
        value,
        status: "ok",
        error: None,
        steps: 0,
        drift: BTreeMap::new(),
        identities: BTreeMap::new(),
    };
    match run_trajectory(&cfg) {
        Ok((_, traj, drift)) => {
            record.steps = traj.stats.steps;
            record.drift = drift.drift;
            record.identities = drift.identities;
        }
        Err(CliError::Domain(e)) => {
            record.status = "error";
            record.error = Some(ErrorReport::from_error(&e));
        }
        Err(other) => return Err(other),
    }
    Ok(record)
}

/// Runs every grid point of `raw`'s sweep on a pool of `threads` workers.
pub fn run_sweep(raw: &Value, threads: usize) -> Result<SweepReport, CliError> {
    let cfg = config::from_value(raw.clone())?;
    let sweep = cfg
        .sweep
        .clone()
        .ok_or_else(|| CliError::Config("the sweep command needs a `sweep` section".into()))?;
    let grid = sweep.grid()?;
    // validate the parameter path once before fanning out
    config::set_parameter(&mut raw.clone(), &sweep.parameter, grid.first().copied().unwrap_or(0.0))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let records = pool.install(|| {
        grid.par_iter()
            .enumerate()
            .map(|(k, &v)| sweep_point(raw, &sweep.parameter, k, v))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut columns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in &records {
        for (name, d) in &r.drift {
            columns.entry(name.clone()).or_default().push(*d);
        }
    }
    let drift = columns
        .into_iter()
        .map(|(name, v)| {
            let max = v.iter().fold(0.0f64, |a, b| a.max(*b));
            (name, Stat { max, median: median(v) })
        })
        .collect();
    Ok(SweepReport {
        schema: SCHEMA,
        command: "sweep",
        system: cfg.field.name(),
        parameter: sweep.parameter,
        points: records.len(),
        failures: records.iter().filter(|r| r.status != "ok").count(),
        drift,
        records,
    })
}

pub fn sweep(cfg_path: &Path, o: &Overrides) -> Result<SweepReport, CliError> {
    let (mut cfg, mut raw) = config::load(cfg_path)?;
    apply(&mut cfg, &mut raw, o);
    let dir = out_dir(&cfg, o)?;
    let threads = cfg.threads(o.threads);
    if threads == 0 {
        return Err(CliError::Config("threads must be positive".into()));
    }
    let start = Instant::now();
    let report = run_sweep(&raw, threads)?;
    eprintln!(
        "sweep: {} points on {threads} worker(s) in {:.3} s",
        report.points,
        start.elapsed().as_secs_f64()
    );
    write_report(&dir, SWEEP_FILE, &report)?;
    if report.failures > 0 {
        return Err(CliError::Partial(format!("{} of {} grid points failed", report.failures, report.points)));
    }
    Ok(report)
}
