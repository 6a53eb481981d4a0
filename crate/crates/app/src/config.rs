//! Run configuration. Layers merge as CLI flags > `VARIANT_*` environment
//! variables > TOML file; clap supplies the first two.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use variety_core::analysis::ClusterMethod;
use variety_core::concept::{AbstractionLevel, LevelWeights, WeightError};
use variety_core::distance::{DEFAULT_SEPARATOR, HASHED_DIMENSION};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    File { path: PathBuf, message: String },
    #[error("provider {provider:?} needs {field}")]
    MissingField { provider: &'static str, field: &'static str },
    #[error("unknown provider {0:?} (expected hash, service or precomputed)")]
    UnknownProvider(String),
    #[error("invalid weights {0:?}: expected paper-default, uniform, seven numbers or level=value pairs")]
    BadWeights(String),
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error("{0} must be positive")]
    NotPositive(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Hash,
    Service,
    Precomputed,
}

impl FromStr for ProviderKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hash" => Ok(Self::Hash),
            "service" => Ok(Self::Service),
            "precomputed" => Ok(Self::Precomputed),
            _ => Err(ConfigError::UnknownProvider(s.to_string())),
        }
    }
}

pub const DEFAULT_BATCH_SIZE: usize = 64;
pub const DEFAULT_TIMEOUT_SECS: u64 = 30;

fn default_dimension() -> usize {
    HASHED_DIMENSION
}
fn default_batch_size() -> usize {
    DEFAULT_BATCH_SIZE
}
fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_SECS
}

/// Exactly one embedding provider. The service token is accepted but never
/// written back out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProviderConfig {
    Hash {
        #[serde(default = "default_dimension")]
        dimension: usize,
    },
    Service {
        endpoint: String,
        model: String,
        #[serde(default, skip_serializing)]
        token: Option<String>,
        #[serde(default = "default_batch_size")]
        batch_size: usize,
        #[serde(default = "default_timeout")]
        timeout_secs: u64,
    },
    Precomputed {
        path: PathBuf,
    },
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig::Hash {
            dimension: HASHED_DIMENSION,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightPreset {
    PaperDefault,
    Uniform,
}

/// Weights as submitted: a preset name, a level map or a list of seven.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsSpec {
    Preset(WeightPreset),
    List(Vec<f64>),
    Levels(LevelWeights),
}

impl Default for WeightsSpec {
    fn default() -> Self {
        WeightsSpec::Preset(WeightPreset::PaperDefault)
    }
}

impl WeightsSpec {
    pub fn resolve(&self) -> Result<LevelWeights, ConfigError> {
        Ok(match self {
            WeightsSpec::Preset(WeightPreset::PaperDefault) => LevelWeights::paper_default(),
            WeightsSpec::Preset(WeightPreset::Uniform) => LevelWeights::uniform(),
            WeightsSpec::List(values) => LevelWeights::from_slice(values)?,
            WeightsSpec::Levels(w) => *w,
        })
    }
}

/// Accepts `paper-default`, `uniform`, `1,2,3,4,5,6,7` or `part=1,action=7`
/// (unlisted levels get 0).
impl FromStr for WeightsSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConfigError::BadWeights(s.to_string());
        match s.trim() {
            "paper-default" | "paper_default" | "default" => return Ok(WeightsSpec::Preset(WeightPreset::PaperDefault)),
            "uniform" => return Ok(WeightsSpec::Preset(WeightPreset::Uniform)),
            _ => {}
        }
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.iter().all(|p| p.contains('=')) {
            let mut w = [0.0; 7];
            for p in parts {
                let (k, v) = p.split_once('=').ok_or_else(bad)?;
                let level: AbstractionLevel = k.trim().parse().map_err(|_| bad())?;
                w[level.slot()] = v.trim().parse().map_err(|_| bad())?;
            }
            return Ok(WeightsSpec::Levels(LevelWeights::new(w)?));
        }
        let values = parts
            .iter()
            .map(|p| p.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        LevelWeights::from_slice(&values)?;
        Ok(WeightsSpec::List(values))
    }
}

fn default_separator() -> String {
    DEFAULT_SEPARATOR.to_string()
}
fn default_in_flight() -> usize {
    4
}

/// Where the CLI writes results. Never echoed into result files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

/// Everything that determines one assessment. Echoed into the result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub provider: ProviderConfig,
    #[serde(default)]
    pub weights: WeightsSpec,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub cluster_method: ClusterMethod,
    #[serde(default = "default_separator")]
    pub separator: String,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default, skip_serializing)]
    pub output: OutputPaths,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            provider: ProviderConfig::default(),
            weights: WeightsSpec::default(),
            k: None,
            cluster_method: ClusterMethod::default(),
            separator: default_separator(),
            max_in_flight: default_in_flight(),
            output: OutputPaths::default(),
        }
    }
}

/// One configuration source with every field optional. The TOML file uses
/// the same flat keys.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub provider: Option<ProviderKind>,
    pub dimension: Option<usize>,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub token: Option<String>,
    pub batch_size: Option<usize>,
    pub timeout_secs: Option<u64>,
    pub vectors: Option<PathBuf>,
    pub weights: Option<WeightsSpec>,
    pub k: Option<usize>,
    pub cluster_method: Option<ClusterMethod>,
    pub separator: Option<String>,
    pub max_in_flight: Option<usize>,
    pub out: Option<PathBuf>,
    pub csv_out: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub bind: Option<String>,
}

macro_rules! overlay {
    ($hi:ident, $lo:ident, $($field:ident),*) => {
        ConfigLayer { $($field: $hi.$field.or($lo.$field)),* }
    };
}

impl ConfigLayer {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let err = |message: String| ConfigError::File {
            path: path.to_path_buf(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        Self::from_toml(&text).map_err(|e| err(e.to_string()))
    }

    /// Fields set in `self` win over `lower`.
    pub fn over(self, lower: ConfigLayer) -> ConfigLayer {
        overlay!(
            self, lower, provider, dimension, endpoint, model, token, batch_size, timeout_secs,
            vectors, weights, k, cluster_method, separator, max_in_flight, out, csv_out, data_dir,
            bind
        )
    }

    pub fn resolve(self) -> Result<RunConfig, ConfigError> {
        let provider = match self.provider.unwrap_or(ProviderKind::Hash) {
            ProviderKind::Hash => ProviderConfig::Hash {
                dimension: positive(self.dimension.unwrap_or(HASHED_DIMENSION), "dimension")?,
            },
            ProviderKind::Service => ProviderConfig::Service {
                endpoint: self.endpoint.ok_or(ConfigError::MissingField {
                    provider: "service",
                    field: "an endpoint",
                })?,
                model: self.model.ok_or(ConfigError::MissingField {
                    provider: "service",
                    field: "a model name",
                })?,
                token: self.token,
                batch_size: positive(self.batch_size.unwrap_or(DEFAULT_BATCH_SIZE), "batch_size")?,
                timeout_secs: self.timeout_secs.unwrap_or(DEFAULT_TIMEOUT_SECS),
            },
            ProviderKind::Precomputed => ProviderConfig::Precomputed {
                path: self.vectors.ok_or(ConfigError::MissingField {
                    provider: "precomputed",
                    field: "a vectors file",
                })?,
            },
        };
        let weights = self.weights.unwrap_or_default();
        weights.resolve()?;
        Ok(RunConfig {
            provider,
            weights,
            k: self.k,
            cluster_method: self.cluster_method.unwrap_or_default(),
            separator: self.separator.unwrap_or_else(default_separator),
            max_in_flight: positive(self.max_in_flight.unwrap_or(default_in_flight()), "max_in_flight")?,
            output: OutputPaths {
                json: self.out,
                csv: self.csv_out,
            },
        })
    }
}

fn positive(v: usize, name: &'static str) -> Result<usize, ConfigError> {
    if v == 0 {
        Err(ConfigError::NotPositive(name))
    } else {
        Ok(v)
    }
}
