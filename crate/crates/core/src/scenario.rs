//! Scenario files: robot, workspace grid, obstacles, query and tool settings.
//!
//! Scenarios are TOML. Every section except `robot`, `grid`, `start` and
//! `goal` is optional; see `scenarios/pillar.toml` for a complete example.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::SamplerParams;
use crate::datagen::JointBox;
use crate::error::{Error, Result};
use crate::grid::VoxelGrid;
use crate::kinematics::{JointConfig, RobotModel};
use crate::live::LiveConfig;
use crate::obstacles::{voxelize_obstacles, ObstacleSet, VoxelSet};
use crate::planner::SearchAlgorithm;
use crate::sonn::{NetworkKind, TrainParams};

const PILLAR: &str = include_str!("../scenarios/pillar.toml");
const WRIST: &str = include_str!("../scenarios/wrist.toml");
const REFERENCE: &str = include_str!("../scenarios/reference.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    pub algorithm: SearchAlgorithm,
    /// Highest spline degree tried; 0 disables smoothing.
    pub smoothing_degree: usize,
    pub samples_per_hop: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            algorithm: SearchAlgorithm::Dijkstra,
            smoothing_degree: 3,
            samples_per_hop: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub kind: NetworkKind,
    pub seed: u64,
    /// Dataset file, relative to the scenario file; generated from `datagen` when absent.
    pub dataset: Option<PathBuf>,
    pub params: TrainParams,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            kind: NetworkKind::Gng,
            seed: 0,
            dataset: None,
            params: TrainParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatagenConfig {
    pub trajectories: usize,
    #[serde(default)]
    pub seed: u64,
    pub regions: Vec<JointBox>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub robot: RobotModel,
    pub grid: VoxelGrid,
    #[serde(default)]
    pub obstacles: ObstacleSet,
    pub start: JointConfig,
    pub goal: JointConfig,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub training: TrainingConfig,
    #[serde(default)]
    pub datagen: Option<DatagenConfig>,
    #[serde(default)]
    pub sampler: SamplerParams,
    #[serde(default)]
    pub live: LiveConfig,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| {
            let location = e
                .span()
                .map(|r| {
                    let line = text[..r.start].matches('\n').count() + 1;
                    format!("line {line}")
                })
                .unwrap_or_else(|| "scenario".into());
            Error::parse(location, e.message())
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut s = Scenario::from_toml(&text).map_err(|e| match e {
            Error::Parse { location, message } => Error::parse(format!("{}: {location}", path.display()), message),
            other => other,
        })?;
        s.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(s)
    }

    /// The bundled planar scenario: a two-link arm reaching around a pillar.
    pub fn pillar() -> Self {
        Scenario::from_toml(PILLAR).expect("bundled scenario is valid")
    }

    /// The bundled constrained-motion scenario: a three-link arm whose last
    /// joint is fixed in all training data.
    pub fn wrist() -> Self {
        Scenario::from_toml(WRIST).expect("bundled scenario is valid")
    }

    /// The pillar world with a 10 000-neuron GNG, for latency measurements.
    pub fn reference() -> Self {
        Scenario::from_toml(REFERENCE).expect("bundled scenario is valid")
    }

    /// A bundled scenario by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "pillar" => Some(Scenario::pillar()),
            "wrist" => Some(Scenario::wrist()),
            "reference" => Some(Scenario::reference()),
            _ => None,
        }
    }

    /// Loads `spec` as a file path, or as a bundled scenario name when no such file exists.
    pub fn resolve(spec: &str) -> Result<Self> {
        if !Path::new(spec).exists() {
            if let Some(s) = Scenario::builtin(spec) {
                return Ok(s);
            }
        }
        Scenario::load(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.robot
            .check_limits(&self.start)
            .map_err(|e| Error::invalid(format!("start: {e}")))?;
        self.robot
            .check_limits(&self.goal)
            .map_err(|e| Error::invalid(format!("goal: {e}")))?;
        let axes = self.grid.axes();
        let want = match self.robot.mode() {
            crate::kinematics::RobotMode::Planar => 2,
            crate::kinematics::RobotMode::Spatial => 3,
        };
        if axes != want {
            return Err(Error::invalid(format!(
                "a {:?} robot needs a {want}-axis grid",
                self.robot.mode()
            )));
        }
        self.obstacles.validate()?;
        self.sampler.validate()?;
        self.training.params.validate()?;
        if let Some(d) = &self.datagen {
            for r in &d.regions {
                r.validate()?;
                self.robot.check_dimension(&r.min)?;
            }
        }
        self.live.validate()?;
        Ok(())
    }

    pub fn resolve_path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Voxels occupied by the obstacles at time `t`.
    pub fn occupied_at(&self, t: f64) -> VoxelSet {
        voxelize_obstacles(&self.obstacles, t, &self.grid)
    }
}
