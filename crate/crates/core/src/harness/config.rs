use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::continual::{Algorithm, ContinualConfig};
use crate::error::{Error, Result};
use crate::scenarios::{ScenarioId, ScenarioSpec};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizePreset {
    #[default]
    Desk,
    TableOne,
}

/// Loss-landscape slice over two parameter dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeSpec {
    pub dims: [usize; 2],
    /// Defaults to the parameter bounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranges: Option<[[f64; 2]; 2]>,
    #[serde(default = "default_resolution")]
    pub resolution: [usize; 2],
    /// Variation `index` of stream `seed` is evaluated.
    #[serde(default)]
    pub variation: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_resolution() -> [usize; 2] {
    [40, 40]
}

impl LandscapeSpec {
    pub fn new(dims: [usize; 2], resolution: usize) -> Self {
        LandscapeSpec {
            dims,
            ranges: None,
            resolution: [resolution, resolution],
            variation: 0,
            seed: 0,
        }
    }
}

fn default_algorithms() -> Vec<Algorithm> {
    Algorithm::ALL.to_vec()
}

fn default_runs() -> usize {
    10
}

fn default_test_size() -> usize {
    100
}

fn default_test_seed() -> u64 {
    1_000_003
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioId,
    #[serde(default)]
    pub size: SizePreset,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Run `r` trains with seed `seed + r` unless `train_seeds` is given.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_seeds: Option<Vec<u64>>,
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    #[serde(default = "default_test_seed")]
    pub test_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub continual: ContinualConfig,
    /// Partial scenario spec merged over the preset.
    #[serde(default, skip_serializing_if = "toml::Table::is_empty")]
    pub spec: toml::Table,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landscape: Option<LandscapeSpec>,
}

impl ExperimentConfig {
    pub fn new(scenario: ScenarioId) -> Self {
        ExperimentConfig {
            scenario,
            size: SizePreset::Desk,
            algorithms: default_algorithms(),
            runs: default_runs(),
            seed: 0,
            train_seeds: None,
            test_size: default_test_size(),
            test_seed: default_test_seed(),
            output: None,
            continual: ContinualConfig::default(),
            spec: toml::Table::new(),
            landscape: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|s| format!("bytes {}..{}", s.start, s.end))
                .unwrap_or_else(|| "config".into());
            Error::config(field, e.message())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Preset spec with the `[spec]` overrides applied.
    pub fn scenario_spec(&self) -> Result<ScenarioSpec> {
        let base = match self.size {
            SizePreset::Desk => ScenarioSpec::desk(self.scenario),
            SizePreset::TableOne => ScenarioSpec::table_one(self.scenario),
        };
        if self.spec.is_empty() {
            return Ok(base);
        }
        let mut table = toml::Table::try_from(&base).expect("spec serializes");
        merge(&mut table, &self.spec);
        let spec: ScenarioSpec = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::config("spec", e.message()))?;
        if spec.id != self.scenario {
            return Err(Error::config("spec.id", "does not match `scenario`"));
        }
        Ok(spec)
    }

    pub fn train_seeds(&self) -> Vec<u64> {
        match &self.train_seeds {
            Some(s) => s.clone(),
            None => (0..self.runs as u64).map(|r| self.seed.wrapping_add(r)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::config("runs", "must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("algorithms", "list is empty"));
        }
        if let Some(s) = &self.train_seeds {
            if s.len() != self.runs {
                return Err(Error::config(
                    "train_seeds",
                    format!("{} seeds given for {} runs", s.len(), self.runs),
                ));
            }
        }
        if self.train_seeds().contains(&self.test_seed) {
            return Err(Error::config("test_seed", "coincides with a train seed"));
        }
        if self.test_size == 0 {
            return Err(Error::config("test_size", "must be at least 1"));
        }
        if let Some(l) = &self.landscape {
            if l.resolution.iter().any(|&r| r < 2) {
                return Err(Error::config("landscape.resolution", "must be at least 2 per axis"));
            }
        }
        self.continual.validate()
    }
}

fn merge(base: &mut toml::Table, over: &toml::Table) {
    for (k, v) in over {
        match (base.get_mut(k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}
