//! Run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::boxsim::BoxMethod;
use crate::error::{Error, Result};
use crate::numeric::{linspace, logspace};
use crate::potentials::PotentialModel;
use crate::trace1d::WeightFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum Task {
    Scatter1d,
    Trace1d,
    Casimir1d,
    Scatter3d,
    Casimir3d,
    Validate,
    GammaDemo,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Scatter1d => "scatter1d",
            Task::Trace1d => "trace1d",
            Task::Casimir1d => "casimir1d",
            Task::Scatter3d => "scatter3d",
            Task::Casimir3d => "casimir3d",
            Task::Validate => "validate",
            Task::GammaDemo => "gamma-demo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    #[default]
    Log,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KGrid {
    pub k_min: f64,
    pub k_max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl KGrid {
    pub fn points(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Linear => linspace(self.k_min, self.k_max, self.count),
            Spacing::Log => logspace(self.k_min, self.k_max, self.count),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.k_min > 0.0 && self.k_min.is_finite()) {
            return Err(Error::config("kgrid.k_min", format!("{} must be finite and > 0", self.k_min)));
        }
        if !(self.k_max.is_finite() && self.k_min < self.k_max) {
            return Err(Error::config(
                "kgrid.k_max",
                format!("k_min = {} must be below k_max = {}", self.k_min, self.k_max),
            ));
        }
        if self.count < 16 {
            return Err(Error::config("kgrid.count", format!("{} < 16", self.count)));
        }
        Ok(())
    }
}

/// Box-oracle settings for `validate` and the 3D oracle.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    /// Half-widths (1D) or radii (3D), ascending.
    pub sizes: Vec<f64>,
    #[serde(default)]
    pub method: Option<BoxMethod>,
    /// Mode-sum cutoff; defaults to `kgrid.k_max`.
    #[serde(default)]
    pub k_cut: Option<f64>,
    #[serde(default)]
    pub l_max: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoConfig {
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// S-operator JSON Lines file for `scatter3d` / `casimir3d`.
    #[serde(default)]
    pub soperator: Option<PathBuf>,
    /// CSV `k,born_integral` accompanying an ingested S-operator.
    #[serde(default)]
    pub born_integral: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaConfig {
    pub z: Vec<f64>,
    #[serde(default)]
    pub terms: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub task: Option<Task>,
    #[serde(default)]
    pub potential: Option<PotentialModel>,
    #[serde(default)]
    pub phi: Option<WeightFunction>,
    #[serde(default)]
    pub kgrid: Option<KGrid>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub io: IoConfig,
    #[serde(default, rename = "box")]
    pub box_: Option<BoxConfig>,
    #[serde(default)]
    pub gamma: Option<GammaConfig>,
}

pub const KNOWN_TOLERANCES: [&str; 4] = ["solver", "unitarity", "validate_gap", "phase_shift"];

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn tol(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }

    pub fn potential(&self) -> Result<&PotentialModel> {
        self.potential
            .as_ref()
            .ok_or_else(|| Error::config("potential", "required for this task"))
    }

    pub fn phi(&self) -> Result<&WeightFunction> {
        self.phi
            .as_ref()
            .ok_or_else(|| Error::config("phi", "required for this task"))
    }

    pub fn kgrid(&self) -> Result<Vec<f64>> {
        let g = self
            .kgrid
            .as_ref()
            .ok_or_else(|| Error::config("kgrid", "required for this task"))?;
        Ok(g.points())
    }

    pub fn box_config(&self) -> Result<&BoxConfig> {
        self.box_
            .as_ref()
            .ok_or_else(|| Error::config("box", "required for this task"))
    }

    /// Everything that can be checked before computing.
    pub fn validate(&self, task: Task) -> Result<()> {
        if let Some(t) = self.task {
            if t != task {
                return Err(Error::config(
                    "task",
                    format!("config is for `{}`, command is `{}`", t.name(), task.name()),
                ));
            }
        }
        for (name, v) in &self.tolerances {
            if !KNOWN_TOLERANCES.contains(&name.as_str()) {
                return Err(Error::config(
                    format!("tolerances.{name}"),
                    format!("unknown tolerance; expected one of {KNOWN_TOLERANCES:?}"),
                ));
            }
            if !(*v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("tolerances.{name}"), format!("{v} must be > 0")));
            }
        }
        if let Some(g) = &self.kgrid {
            g.validate()?;
        }
        if let Some(phi) = &self.phi {
            phi.validate()
                .map_err(|e| Error::config("phi", e.to_string()))?;
        }
        for (field, p) in [
            ("io.soperator", &self.io.soperator),
            ("io.born_integral", &self.io.born_integral),
        ] {
            if let Some(p) = p {
                if !p.is_file() {
                    return Err(Error::config(field, format!("{} does not exist", p.display())));
                }
            }
        }
        if let Some(b) = &self.box_ {
            if b.sizes.len() < 3 || b.sizes.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::config("box.sizes", "need at least three ascending sizes"));
            }
            if b.k_cut.is_some_and(|k| !(k > 0.0)) {
                return Err(Error::config("box.k_cut", "must be > 0"));
            }
        }

        let needs_kgrid = !matches!(task, Task::GammaDemo | Task::Validate);
        let ingest = self.io.soperator.is_some();
        match task {
            Task::GammaDemo => {
                let g = self
                    .gamma
                    .as_ref()
                    .ok_or_else(|| Error::config("gamma", "required for gamma-demo"))?;
                if g.z.is_empty() {
                    return Err(Error::config("gamma.z", "empty list"));
                }
            }
            Task::Validate => {
                self.potential()?;
                self.phi()?;
                self.box_config()?;
                if self.kgrid.is_none() {
                    return Err(Error::config("kgrid", "required for validate"));
                }
            }
            Task::Trace1d => {
                self.potential()?;
                self.phi()?;
            }
            Task::Scatter3d | Task::Casimir3d if ingest => {
                if task == Task::Casimir3d && self.io.born_integral.is_none() && self.potential.is_none() {
                    return Err(Error::config(
                        "io.born_integral",
                        "ingested S-operators need the Born integral (file or potential)",
                    ));
                }
            }
            _ => {
                self.potential()?;
            }
        }
        if needs_kgrid && !ingest && self.kgrid.is_none() {
            return Err(Error::config("kgrid", "required for this task"));
        }
        if matches!(task, Task::Scatter3d | Task::Casimir3d) {
            if let Some(p) = &self.potential {
                if p.is_delta() {
                    return Err(Error::config("potential.kind", "delta is one-dimensional only"));
                }
            }
        }
        Ok(())
    }
}
