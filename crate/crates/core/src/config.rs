//! TOML configuration shared by every subcommand, with dotted-key overrides
//! and a set of bundled presets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::boolean::PlacedGrain;
use crate::error::{io_err, Error, Result};
use crate::experiments::ModelSpec;

pub const SCHEMA_VERSION: u32 = 1;

/// Bundled configurations, addressable as `preset:NAME`.
pub const PRESETS: &[(&str, &str)] = &[
    ("quickstart", include_str!("../presets/quickstart.toml")),
    ("fig1a", include_str!("../presets/fig1a.toml")),
    ("fig1b", include_str!("../presets/fig1b.toml")),
    ("clt-beta0", include_str!("../presets/clt-beta0.toml")),
    ("covariance", include_str!("../presets/covariance.toml")),
    ("degree-poisson", include_str!("../presets/degree-poisson.toml")),
    ("degree-mixedpoisson", include_str!("../presets/degree-mixedpoisson.toml")),
    ("poincare", include_str!("../presets/poincare.toml")),
    ("stabilization", include_str!("../presets/stabilization.toml")),
    ("ring6", include_str!("../presets/ring6.toml")),
    ("fig2-like", include_str!("../presets/fig2-like.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub sample: SampleSection,
    #[serde(default)]
    pub input: InputSection,
    /// Functional descriptors such as `betti:1` or `d:m=1,l=3`.
    #[serde(default)]
    pub functionals: Vec<String>,
    #[serde(default)]
    pub experiment: Option<ExperimentSection>,
    #[serde(default)]
    pub nerve: Option<NerveSection>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSection {
    pub side: Option<f64>,
    /// Window centre; the origin when absent.
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    #[serde(default)]
    pub replication: u64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    /// Point configuration JSON.
    pub configuration: Option<PathBuf>,
    /// Simplicial complex JSON.
    pub complex: Option<PathBuf>,
    /// JSON array of placed grains.
    pub grains: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Clt,
    Covariance,
    Degree,
    Poincare,
    Stabilization,
}

fn default_significance() -> f64 {
    0.01
}

fn default_tolerance() -> f64 {
    0.15
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    pub sides: Vec<f64>,
    pub replications: usize,
    /// Poincaré check: samples of the difference operator.
    #[serde(default)]
    pub inner_replications: Option<usize>,
    #[serde(default = "default_significance")]
    pub significance: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_nerve_alpha() -> usize {
    3
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NerveSection {
    #[serde(default = "default_nerve_alpha")]
    pub alpha: usize,
    #[serde(default = "default_true")]
    pub helly: bool,
    #[serde(default)]
    pub grains: Vec<PlacedGrain>,
    /// Also compute the pixel Betti numbers at this resolution.
    #[serde(default)]
    pub raster_resolution: Option<usize>,
}

/// Applies `key.sub=value` to `table`. The value is read as a TOML value
/// and falls back to a plain string.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::Config(format!("bad override key `{key}`")));
    }
    let value = match toml::from_str::<Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{part}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl Config {
    /// Parses TOML text, applies overrides and checks the schema.
    pub fn from_toml(text: &str, overrides: &[String], base_dir: &Path) -> Result<Self> {
        let mut table: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut cfg: Config = Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported schema {}, expected {SCHEMA_VERSION}", cfg.schema)));
        }
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    /// Loads a file, or a bundled preset given as `preset:NAME`.
    pub fn load(source: &str, overrides: &[String]) -> Result<Self> {
        if let Some(name) = source.strip_prefix("preset:") {
            let text = preset(name).ok_or_else(|| {
                let names: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
                Error::Config(format!("unknown preset `{name}`; available: {}", names.join(", ")))
            })?;
            return Self::from_toml(text, overrides, Path::new("."))
                .map_err(|e| Error::Config(format!("preset {name}: {e}")));
        }
        let path = Path::new(source);
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::from_toml(&text, overrides, &base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn model(&self) -> Result<&ModelSpec> {
        self.model.as_ref().ok_or_else(|| Error::Config("missing [model] section".into()))
    }

    pub fn experiment(&self) -> Result<&ExperimentSection> {
        self.experiment.as_ref().ok_or_else(|| Error::Config("missing [experiment] section".into()))
    }
}
