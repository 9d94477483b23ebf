//! Run configuration files (JSON, `"schema": 1`).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use relcharge_core::dynamics::light_cone_gap;
use relcharge_core::invariants::InvariantSet;
use relcharge_core::{FieldSpec, Form, PhasePoint};
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

pub const SCHEMA: u32 = 1;

fn default_form() -> Form {
    Form::Front
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub field: FieldSpec,
    #[serde(default = "default_form")]
    pub form: Form,
    /// Canonical coordinates and momenta keyed by CSV column name; the
    /// time is the start of `time_span`. Sampled from `seed` when absent.
    #[serde(default)]
    pub initial: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub time_span: Option<[f64; 2]>,
    #[serde(default = "default_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_tol")]
    pub abs_tol: f64,
    /// Invariant names to record; every available one when absent.
    #[serde(default)]
    pub tracked: Option<Vec<String>>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub compare: CompareConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub samples: usize,
    pub tol: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { samples: 40, tol: 1e-9 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub tolerance: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig { tolerance: 1e-6 }
    }
}

/// A one-parameter grid. `parameter` is a dotted path into this config,
/// e.g. `field.f1.amplitude` or `initial.p_minus`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: String,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub range: Option<GridRange>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepConfig {
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        match (&self.values, self.range) {
            (Some(v), None) => Ok(v.clone()),
            (None, Some(r)) => {
                if r.count == 0 {
                    return Err(CliError::Config("sweep.range.count must be positive".into()));
                }
                if r.count == 1 {
                    return Ok(vec![r.start]);
                }
                let step = (r.stop - r.start) / (r.count - 1) as f64;
                Ok((0..r.count).map(|k| r.start + step * k as f64).collect())
            }
            _ => Err(CliError::Config("sweep needs exactly one of `values` or `range`".into())),
        }
    }
}

/// Reads a config file, keeping the raw JSON for sweeps.
pub fn load(path: &Path) -> Result<(RunConfig, Value), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let raw: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let cfg = from_value(raw.clone())?;
    Ok((cfg, raw))
}

pub fn from_value(raw: Value) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = serde_json::from_value(raw).map_err(|e| CliError::Config(e.to_string()))?;
    if cfg.schema != SCHEMA {
        return Err(CliError::Config(format!("unsupported schema {}; expected {SCHEMA}", cfg.schema)));
    }
    cfg.field.validate().map_err(|e| CliError::Config(e.to_string()))?;
    if !(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0) {
        return Err(CliError::Config("tolerances must be positive".into()));
    }
    if cfg.threads == Some(0) {
        return Err(CliError::Config("threads must be positive".into()));
    }
    Ok(cfg)
}

/// Sets the dotted `path` in a raw config to `value`.
pub fn set_parameter(raw: &mut Value, path: &str, value: f64) -> Result<(), CliError> {
    let mut node = raw;
    let parts: Vec<&str> = path.split('.').collect();
    for (k, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("sweep parameter {path:?}: {part:?} is not inside an object")))?;
        if k + 1 == parts.len() {
            if !obj.contains_key(*part) {
                return Err(CliError::Config(format!("sweep parameter {path:?} not found in config")));
            }
            obj.insert(part.to_string(), Value::from(value));
            return Ok(());
        }
        node = obj
            .get_mut(*part)
            .ok_or_else(|| CliError::Config(format!("sweep parameter {path:?} not found in config")))?;
    }
    unreachable!("split yields at least one part")
}

impl RunConfig {
    pub fn span(&self) -> Result<[f64; 2], CliError> {
        let span = self
            .time_span
            .ok_or_else(|| CliError::Config("time_span is required for this command".into()))?;
        if !span.iter().all(|t| t.is_finite()) || span[0] == span[1] {
            return Err(CliError::Config("time_span must be two distinct finite times".into()));
        }
        if let FieldSpec::TmMode { .. } = self.field {
            if self.form == Form::Front && span[0].min(span[1]) <= 0.0 && span[0].max(span[1]) >= 0.0 {
                return Err(CliError::Config("tm_mode: time_span must exclude the singular surface x⁺ = 0".into()));
            }
        }
        Ok(span)
    }

    /// The launch state, validated against the system's domain.
    pub fn initial_state(&self) -> Result<PhasePoint, CliError> {
        let span = self.span()?;
        let names = &self.form.column_names()[1..];
        let state = match &self.initial {
            Some(map) => {
                if let Some(extra) = map.keys().find(|k| !names.contains(&k.as_str())) {
                    return Err(CliError::Config(format!(
                        "initial: unknown component {extra:?}; {:?} form uses {}",
                        self.form,
                        names.join(", ")
                    )));
                }
                let mut v = [span[0]; 7];
                for (k, name) in names.iter().enumerate() {
                    v[k + 1] = *map
                        .get(*name)
                        .ok_or_else(|| CliError::Config(format!("initial: missing component {name:?}")))?;
                }
                PhasePoint::from_array(self.form, v)
            }
            None => {
                let mut s = relcharge_core::sampling::sample_states(&self.field, self.form, 1, self.seed)[0];
                s.time = span[0];
                s
            }
        };
        if !state.is_finite() {
            return Err(CliError::Config("initial state must be finite".into()));
        }
        if self.form == Form::Front {
            let gap = light_cone_gap(&self.field, &state).map_err(|e| CliError::Config(e.to_string()))?;
            if gap.abs() < relcharge_core::dynamics::BOUNDARY_EPS {
                return Err(CliError::Config(format!("initial state on the light cone: p₋ - A₋ = {gap:e}")));
            }
        }
        if let FieldSpec::HelicalBoost { f0, .. } = self.field {
            if self.form == Form::Front && !(f0 / (2.0 * state.p[0]) > 0.0) {
                return Err(CliError::Config("helical_boost: F0/(2 p_minus) must be positive".into()));
            }
        }
        Ok(state)
    }

    /// The system's invariants, anchored at launch, when they are written in
    /// the configured form.
    pub fn invariant_set(&self, initial: &PhasePoint) -> Result<Option<InvariantSet>, CliError> {
        // the TM anchor is a light-front time
        let anchor = if self.form == Form::Front { initial.time } else { 1.0 };
        let set = InvariantSet::new(&self.field, anchor).map_err(|e| CliError::Config(e.to_string()))?;
        if set.form() == self.form {
            Ok(Some(set))
        } else {
            Ok(None)
        }
    }

    /// Names to track: the configured list, or every available quantity.
    pub fn tracked_names(&self, set: Option<&InvariantSet>) -> Result<Vec<String>, CliError> {
        match (&self.tracked, set) {
            (Some(names), Some(set)) => {
                for n in names {
                    if set.index_of(n).is_none() {
                        return Err(CliError::Config(format!(
                            "unknown invariant {n:?} for {}; valid: {}",
                            self.field.name(),
                            set.names().join(", ")
                        )));
                    }
                }
                Ok(names.clone())
            }
            (Some(names), None) if !names.is_empty() => Err(CliError::Config(format!(
                "{} invariants are not available in the {:?} form",
                self.field.name(),
                self.form
            ))),
            (_, Some(set)) => Ok(set.names().iter().map(|s| s.to_string()).collect()),
            _ => Ok(Vec::new()),
        }
    }

    pub fn threads(&self, cli: Option<usize>) -> usize {
        cli.or(self.threads)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}
