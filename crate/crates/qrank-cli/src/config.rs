//! Run configuration: flat `key = value` config files, command-line
//! overrides (flags win over file values, file values over defaults), and
//! the effective-config header that every output file embeds.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use qrank::export::fmt_float;
use qrank::quantum::HamiltonianSource;
use qrank::spectral::DEFAULT_SIZE_CAP;

use crate::CliError;

/// Environment variable overriding the dense-superoperator size cap.
pub const SIZE_CAP_ENV: &str = "QRANK_SIZE_CAP";

pub fn size_cap() -> Result<usize, CliError> {
    match std::env::var(SIZE_CAP_ENV) {
        Ok(raw) => raw.trim().parse().map_err(|_| {
            CliError::Config(format!("{SIZE_CAP_ENV} = `{raw}` is not a node count"))
        }),
        Err(_) => Ok(DEFAULT_SIZE_CAP),
    }
}

/// A parsed flat config file. Keys the active command does not use are
/// tolerated so one file can drive several commands.
#[derive(Debug, Default)]
pub struct ConfigFile {
    map: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    idx + 1
                )));
            };
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { map })
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                CliError::Config(format!("config key `{key}` has invalid value `{raw}`"))
            }),
        }
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.parse(key)
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.parse(key)
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        self.parse(key)
    }

    pub fn string(&self, key: &str) -> Option<String> {
        self.map.get(key).cloned()
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.map.get(key).map(PathBuf::from)
    }

    /// Whitespace- or comma-separated list of floats.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(raw) = self.map.get(key) else {
            return Ok(None);
        };
        let mut out = Vec::new();
        for token in raw.split([' ', '\t', ',']).filter(|t| !t.is_empty()) {
            let v = token.parse().map_err(|_| {
                CliError::Config(format!("config key `{key}` has invalid entry `{token}`"))
            })?;
            out.push(v);
        }
        Ok(Some(out))
    }
}

/// Which Hamiltonian feeds the coherent part of the walk.
#[derive(Debug, Clone)]
pub enum HamiltonianChoice {
    Symmetrized,
    Lattice,
    Custom(PathBuf),
}

impl HamiltonianChoice {
    pub fn parse(raw: &str) -> Result<Self, CliError> {
        match raw {
            "symmetrized" => Ok(Self::Symmetrized),
            "lattice" => Ok(Self::Lattice),
            other => match other.strip_prefix("custom:") {
                Some(path) if !path.is_empty() => Ok(Self::Custom(PathBuf::from(path))),
                _ => Err(CliError::Config(format!(
                    "hamiltonian `{other}` is not one of symmetrized | lattice | custom:<file>"
                ))),
            },
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Symmetrized => "symmetrized".into(),
            Self::Lattice => "lattice".into(),
            Self::Custom(path) => format!("custom:{}", path.display()),
        }
    }

    /// Realizes the choice for an `n`-node walk. The lattice choice uses the
    /// uniform open line over the same sites.
    pub fn source(&self, n: usize) -> Result<HamiltonianSource, CliError> {
        match self {
            Self::Symmetrized => Ok(HamiltonianSource::SymmetrizedGoogle),
            Self::Lattice => Ok(HamiltonianSource::Lattice(
                qrank::lattice::LatticeHamiltonian::uniform_line(n).map_err(CliError::Lib)?,
            )),
            Self::Custom(path) => Ok(HamiltonianSource::Custom(load_custom_hamiltonian(path)?)),
        }
    }
}

/// Custom Hamiltonian file: `{"dim": N, "entries": [[re, im], ...]}` with
/// N^2 row-major entries.
fn load_custom_hamiltonian(path: &Path) -> Result<Array2<Complex64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|err| CliError::Config(format!("{}: invalid JSON: {err}", path.display())))?;
    let bad = || CliError::Config(format!(
        "{}: expected {{\"dim\": N, \"entries\": [[re, im], ...]}} with N^2 entries",
        path.display()
    ));
    let dim = value.get("dim").and_then(Value::as_u64).ok_or_else(bad)? as usize;
    let entries = value.get("entries").and_then(Value::as_array).ok_or_else(bad)?;
    if dim == 0 || entries.len() != dim * dim {
        return Err(bad());
    }
    let mut m = Array2::zeros((dim, dim));
    for (k, pair) in entries.iter().enumerate() {
        let pair = pair.as_array().ok_or_else(bad)?;
        if pair.len() != 2 {
            return Err(bad());
        }
        let re = pair[0].as_f64().ok_or_else(bad)?;
        let im = pair[1].as_f64().ok_or_else(bad)?;
        m[[k / dim, k % dim]] = Complex64::new(re, im);
    }
    Ok(m)
}

/// The fully resolved settings of a run, rendered both as `#` header lines
/// for CSV files and as a JSON object embedded in JSON files.
#[derive(Debug, Clone)]
pub struct EffectiveConfig {
    lines: Vec<String>,
    json: Map<String, Value>,
}

impl EffectiveConfig {
    pub fn new(command: &str) -> Self {
        let mut cfg = Self {
            lines: Vec::new(),
            json: Map::new(),
        };
        cfg.add_str("command", command);
        cfg
    }

    pub fn add_str(&mut self, key: &str, value: impl Display) {
        let text = value.to_string();
        self.lines.push(format!("{key} = {text}"));
        self.json.insert(key.to_string(), json!(text));
    }

    pub fn add_f64(&mut self, key: &str, value: f64) {
        self.lines.push(format!("{key} = {}", fmt_float(value)));
        self.json.insert(key.to_string(), json!(value));
    }

    pub fn add_usize(&mut self, key: &str, value: usize) {
        self.lines.push(format!("{key} = {value}"));
        self.json.insert(key.to_string(), json!(value));
    }

    pub fn add_f64_list(&mut self, key: &str, values: &[f64]) {
        let rendered: Vec<String> = values.iter().map(|&v| fmt_float(v)).collect();
        self.lines.push(format!("{key} = {}", rendered.join(" ")));
        self.json.insert(key.to_string(), json!(values));
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn json(&self) -> Value {
        Value::Object(self.json.clone())
    }
}
