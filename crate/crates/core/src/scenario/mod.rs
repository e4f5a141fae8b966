//! JSON-described reproduction runs: load, override, validate, run, report.

mod checks;
mod config;
mod run;

use std::path::Path;

use serde_json::Value;

pub use checks::{ByModulation, Check, CheckResult, Expect, Outcome};
pub use config::{
    CircuitConfig, InitialConfig, Kind, ModeConfig, PlaneSourceConfig, Scenario, SheetConfig, SourceConfig,
    StabilityCase, StabilityConfig, SweepConfig, Switch, TargetConfig,
};
pub use run::{metric_names, run_scenario, RunReport};

/// Failures before or during a run, each mapped to a process exit code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("io error: {0}")]
    Io(String),
}

impl ScenarioError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Parse(_) | ScenarioError::Io(_) => 2,
            ScenarioError::Validation(_) => 3,
        }
    }
}

/// JSON schema describing the scenario format.
pub const SCHEMA: &str = include_str!("../../scenarios/schema.json");

/// Scenarios shipped with the crate, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("negative_capacitor", include_str!("../../scenarios/negative_capacitor.json")),
    ("lossy_inductor", include_str!("../../scenarios/lossy_inductor.json")),
    ("emulated_resistor", include_str!("../../scenarios/emulated_resistor.json")),
    ("nonfoster_growth", include_str!("../../scenarios/nonfoster_growth.json")),
    ("stability_suite", include_str!("../../scenarios/stability_suite.json")),
    ("invisible_sheet", include_str!("../../scenarios/invisible_sheet.json")),
    ("invisible_slabs_fdtd", include_str!("../../scenarios/invisible_slabs_fdtd.json")),
    ("static_slabs_fdtd", include_str!("../../scenarios/static_slabs_fdtd.json")),
    ("sensor_variants", include_str!("../../scenarios/sensor_variants.json")),
    ("no_absorber", include_str!("../../scenarios/no_absorber.json")),
    ("power_thickness", include_str!("../../scenarios/power_thickness.json")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|&(_, text)| text)
}

/// A parsed scenario plus the override-applied tree it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub scenario: Scenario,
    pub echo: String,
    pub tree: Value,
    pub origin: String,
}

/// Reads a scenario file; when the path does not exist, a bundled
/// scenario whose name matches the file stem is used instead.
pub fn read_source(arg: &str) -> Result<(String, String), ScenarioError> {
    let path = Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Parse(format!("cannot read {arg}: {e}")))?;
        return Ok((text, arg.to_string()));
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg);
    match bundled(stem) {
        Some(text) => Ok((text.to_string(), format!("bundled:{stem}"))),
        None => Err(ScenarioError::Parse(format!("cannot read {arg}: no such file or bundled scenario"))),
    }
}

/// Splits `key=value`.
pub fn parse_override(raw: &str) -> Result<(String, String), ScenarioError> {
    match raw.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.to_string())),
        _ => Err(ScenarioError::Parse(format!("override `{raw}` is not of the form key=value"))),
    }
}

fn override_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn find_key(v: &Value, key: &str, path: &mut Vec<String>, hits: &mut Vec<Vec<String>>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                path.push(k.clone());
                if k == key {
                    hits.push(path.clone());
                }
                find_key(child, key, path, hits);
                path.pop();
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                path.push(i.to_string());
                find_key(child, key, path, hits);
                path.pop();
            }
        }
        _ => {}
    }
}

fn slot<'a>(root: &'a mut Value, path: &[String], key: &str) -> Result<&'a mut Value, ScenarioError> {
    let unknown = || ScenarioError::Validation(format!("override key `{key}` does not name a scenario parameter"));
    let (last, parents) = path.split_last().ok_or_else(unknown)?;
    let mut cur = root;
    for seg in parents {
        cur = match cur {
            Value::Object(map) => map.get_mut(seg).ok_or_else(unknown)?,
            Value::Array(items) => seg.parse::<usize>().ok().and_then(|i| items.get_mut(i)).ok_or_else(unknown)?,
            _ => return Err(unknown()),
        };
    }
    match cur {
        // typos in new keys are caught by the typed schema
        Value::Object(map) => Ok(map.entry(last.clone()).or_insert(Value::Null)),
        Value::Array(items) => last.parse::<usize>().ok().and_then(|i| items.get_mut(i)).ok_or_else(unknown),
        _ => Err(unknown()),
    }
}

/// Sets one parameter. `key` is a dotted path (`circuit.r_s_ohm`) or a key
/// name that occurs exactly once in the tree. The value is parsed as JSON
/// and taken as a string otherwise.
pub fn apply_override(tree: &mut Value, key: &str, raw: &str) -> Result<(), ScenarioError> {
    let path: Vec<String> = if key.contains('.') {
        key.split('.').map(str::to_string).collect()
    } else {
        let mut hits = Vec::new();
        find_key(tree, key, &mut Vec::new(), &mut hits);
        match hits.len() {
            0 => {
                return Err(ScenarioError::Validation(format!("override key `{key}` does not name a scenario parameter")))
            }
            1 => hits.pop().expect("one hit"),
            _ => {
                let paths: Vec<String> = hits.iter().map(|p| p.join(".")).collect();
                return Err(ScenarioError::Validation(format!(
                    "override key `{key}` is ambiguous, use one of: {}",
                    paths.join(", ")
                )));
            }
        }
    };
    *slot(tree, &path, key)? = override_value(raw);
    Ok(())
}

/// Parses, applies overrides, and validates.
pub fn load(text: &str, origin: &str, overrides: &[(String, String)]) -> Result<Loaded, ScenarioError> {
    let mut tree: Value = serde_json::from_str(text).map_err(|e| ScenarioError::Parse(format!("{origin}: {e}")))?;
    if !tree.is_object() {
        return Err(ScenarioError::Parse(format!("{origin}: top level must be a JSON object")));
    }
    for (k, v) in overrides {
        apply_override(&mut tree, k, v)?;
    }
    let scenario: Scenario =
        serde_json::from_value(tree.clone()).map_err(|e| ScenarioError::Validation(format!("{origin}: {e}")))?;
    scenario.validate()?;
    let echo = serde_json::to_string_pretty(&tree).expect("a parsed tree serializes");
    Ok(Loaded { scenario, echo, tree, origin: origin.to_string() })
}

/// [`read_source`] followed by [`load`].
pub fn load_path(arg: &str, overrides: &[(String, String)]) -> Result<Loaded, ScenarioError> {
    let (text, origin) = read_source(arg)?;
    load(&text, &origin, overrides)
}
