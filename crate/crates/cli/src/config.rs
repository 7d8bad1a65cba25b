//! Run configuration documents and `--set` overrides.

use paramosc::field::Grid;
use paramosc::models::ModelSpec;
use paramosc::validation::{Suite, ValidationTolerances};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub classify: ClassifyConfig,
    #[serde(default)]
    pub green: GreenConfig,
    #[serde(default)]
    pub propagate: PropagateConfig,
    #[serde(default)]
    pub eigenstates: EigenstatesConfig,
    #[serde(default)]
    pub validate: ValidateConfig,
    /// Independent override sets; each entry is run as its own job.
    #[serde(default)]
    pub sweep: Vec<Map<String, Value>>,
}

/// Characteristic solve. The tolerances are shared by every command.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub t_max: f64,
    pub rtol: f64,
    pub atol: f64,
    pub mu1_init: f64,
    /// Uniform output mesh on [0, t_max] with this many points.
    pub samples: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            t_max: 2.0 * std::f64::consts::PI,
            rtol: 1e-10,
            atol: 1e-12,
            mu1_init: 1.0,
            samples: 201,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub xi_max: i64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            xi_max: paramosc::ince::DEFAULT_XI_MAX,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreenConfig {
    pub times: Vec<f64>,
    pub kernel: Option<KernelSlice>,
}

impl Default for GreenConfig {
    fn default() -> Self {
        Self {
            times: vec![0.5, 1.0],
            kernel: None,
        }
    }
}

/// G(x, y, t) along x at fixed y.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSlice {
    pub y: f64,
    pub grid: Grid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagationMethod {
    Quadrature,
    Analytic,
    CrankNicolson,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub epsilon: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub n: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagateConfig {
    pub grid: Grid,
    pub initial: InitialState,
    pub times: Vec<f64>,
    pub method: PropagationMethod,
    /// Crank–Nicolson step.
    pub dt: f64,
}

impl Default for PropagateConfig {
    fn default() -> Self {
        Self {
            grid: Grid {
                x_min: -10.0,
                x_max: 10.0,
                n: 1024,
            },
            initial: InitialState {
                epsilon: 1.0,
                delta: 0.0,
                n: 0,
            },
            times: vec![0.5, 1.0],
            method: PropagationMethod::Quadrature,
            dt: 1e-3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenstatesConfig {
    pub n_max: usize,
    pub c0: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub times: Vec<f64>,
    pub grid: Grid,
}

impl Default for EigenstatesConfig {
    fn default() -> Self {
        Self {
            n_max: 5,
            c0: 1.0,
            epsilon: 1.0,
            delta: 0.0,
            times: vec![0.0, 0.5, 1.0],
            grid: Grid {
                x_min: -12.0,
                x_max: 12.0,
                n: 2048,
            },
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    /// Empty selects every suite.
    pub suites: Vec<Suite>,
    pub tolerances: ValidationTolerances,
}

impl ValidateConfig {
    pub fn selected(&self) -> Vec<Suite> {
        if self.suites.is_empty() {
            Suite::ALL.to_vec()
        } else {
            self.suites.clone()
        }
    }
}

/// Parse `key.path=value`; the value is read as JSON, falling back to a string.
pub fn parse_override(arg: &str) -> Result<(String, Value), CliError> {
    let (key, raw) = arg.split_once('=').ok_or_else(|| {
        CliError::Config(format!("override `{arg}` is not of the form key=value"))
    })?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::Config(format!(
            "override `{arg}` has an empty key"
        )));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

pub fn apply_override(doc: &mut Value, key: &str, value: Value) -> Result<(), CliError> {
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let map = match node {
            Value::Object(map) => map,
            Value::Null => {
                *node = Value::Object(Map::new());
                node.as_object_mut().expect("just created")
            }
            _ => {
                return Err(CliError::Config(format!(
                    "cannot set `{key}`: `{}` is not an object",
                    parts[..i].join(".")
                )))
            }
        };
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("keys have at least one part")
}

pub fn parse_document(doc: Value) -> Result<RunConfig, CliError> {
    serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("{path}: {}", e.into_inner()))
    })
}

/// Raw document from `--config` (or `{}`) with overrides applied.
pub fn load(path: Option<&std::path::Path>, overrides: &[String]) -> Result<Value, CliError> {
    let mut doc = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => Value::Object(Map::new()),
    };
    for arg in overrides {
        let (key, value) = parse_override(arg)?;
        apply_override(&mut doc, &key, value)?;
    }
    Ok(doc)
}
