//! Run configuration files (TOML) and run manifests.
//!
//! ```toml
//! seed = 0
//! seeds = 3
//! ratio = 0.5                  # `complete`
//! ratios = [0.2, 0.4, 0.6]     # `sweep`
//!
//! [solver]                     # used by `complete`
//! t_max = 500
//!
//! [[config]]                   # sweep configs, in output order
//! name = "adaptive"
//!
//! [[config]]
//! name = "fixed"
//! solver = { adaptive_rho = false, over_relax = false }
//!
//! [[config]]
//! name = "warm"
//! warm_start_from = "fixed"
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiments::NamedConfig;
use crate::solver::SolverConfig;

pub const DEFAULT_RATIOS: [f64; 5] = [0.2, 0.3, 0.4, 0.5, 0.6];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunFile {
    /// First seed; sweeps use `seed, seed + 1, ...`.
    pub seed: u64,
    pub seeds: usize,
    pub ratio: f64,
    pub ratios: Vec<f64>,
    pub solver: SolverConfig,
    #[serde(rename = "config")]
    pub configs: Vec<ConfigEntry>,
}

impl Default for RunFile {
    fn default() -> Self {
        Self {
            seed: 0,
            seeds: 3,
            ratio: 0.5,
            ratios: DEFAULT_RATIOS.to_vec(),
            solver: SolverConfig::default(),
            configs: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warm_start_from: Option<String>,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl From<&ConfigEntry> for NamedConfig {
    fn from(e: &ConfigEntry) -> Self {
        NamedConfig {
            name: e.name.clone(),
            cfg: e.solver.clone(),
            warm_start_from: e.warm_start_from.clone(),
        }
    }
}

/// The default sweep line-up: the adaptive over-relaxed solver, the
/// fixed-penalty baseline, and the adaptive solver warm-started from the
/// baseline.
pub fn default_configs() -> Vec<ConfigEntry> {
    vec![
        ConfigEntry {
            name: "adaptive".into(),
            warm_start_from: None,
            solver: SolverConfig::default(),
        },
        ConfigEntry {
            name: "fixed".into(),
            warm_start_from: None,
            solver: SolverConfig::fixed_penalty(),
        },
        ConfigEntry {
            name: "warm".into(),
            warm_start_from: Some("fixed".into()),
            solver: SolverConfig::default(),
        },
    ]
}

impl RunFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)?;
        Ok((Self::parse(&text)?, text))
    }

    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64).map(|k| self.seed + k).collect()
    }

    pub fn named_configs(&self) -> Vec<NamedConfig> {
        self.configs.iter().map(NamedConfig::from).collect()
    }

    /// Sets `clip_range` on every solver config that leaves it unset.
    pub fn default_clip(&mut self, range: [f64; 2]) {
        let fill = |c: &mut SolverConfig| {
            c.clip_range.get_or_insert(range);
        };
        fill(&mut self.solver);
        self.configs.iter_mut().for_each(|e| fill(&mut e.solver));
    }

    /// Manifest text: provenance comments, the original config commented
    /// out, then the fully resolved configuration, which parses back into
    /// an identical `RunFile`.
    pub fn manifest(&self, command: &str, input: Option<&Path>, original: Option<&str>) -> Result<String> {
        let mut out = String::new();
        out.push_str(&format!(
            "# {} {} manifest\n# command: {command}\n",
            env!("CARGO_PKG_NAME"),
            env!("CARGO_PKG_VERSION")
        ));
        if let Some(p) = input {
            out.push_str(&format!("# input: {}\n", p.display()));
        }
        if let Some(text) = original {
            out.push_str("#\n# original config:\n");
            for line in text.lines() {
                out.push_str(&format!("#   {line}\n"));
            }
        }
        out.push_str("#\n# resolved config:\n");
        out.push_str(&toml::to_string(self)?);
        Ok(out)
    }
}
