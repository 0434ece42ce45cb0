//! Planning on the cognitive map.
//!
//! Obstacles block neurons through the lookup table; the start and goal
//! configurations are anchored to their BMUs and a graph search runs over the
//! remaining neurons along topological edges. Paths are smoothed with a
//! clamped B-spline whose samples are re-validated against the blocked set.

mod replan;
mod search;
mod smooth;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom;
use crate::kinematics::JointConfig;
use crate::sonn::{Network, NeuronId};

pub use replan::{replan_decide, AdoptReason, Decision, ReplanState, SHORTER_EPSILON};
pub use search::{dijkstra, plan, plan_detailed, search, wavefront, PlanOutcome};
pub use smooth::{smooth, smooth_validated, SmoothedTrajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SearchAlgorithm {
    Wavefront,
    #[default]
    Dijkstra,
}

impl FromStr for SearchAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wavefront" | "bfs" => Ok(SearchAlgorithm::Wavefront),
            "dijkstra" => Ok(SearchAlgorithm::Dijkstra),
            other => Err(Error::invalid(format!("unknown search algorithm `{other}`"))),
        }
    }
}

impl std::fmt::Display for SearchAlgorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SearchAlgorithm::Wavefront => "wavefront",
            SearchAlgorithm::Dijkstra => "dijkstra",
        })
    }
}

/// A chain of graph-adjacent neurons and their weight vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    neuron_ids: Vec<NeuronId>,
    configs: Vec<JointConfig>,
    cspace_length: f64,
}

impl Path {
    /// Path through `ids`; consecutive ids must be adjacent in `net`.
    pub fn from_neurons(net: &Network, ids: Vec<NeuronId>) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::invalid("a path needs at least one neuron"));
        }
        if let Some(&bad) = ids.iter().find(|&&n| n >= net.len()) {
            return Err(Error::invalid(format!("neuron {bad} does not exist")));
        }
        if let Some(w) = ids.windows(2).find(|w| !net.are_adjacent(w[0], w[1])) {
            return Err(Error::invalid(format!(
                "neurons {} and {} are not adjacent",
                w[0], w[1]
            )));
        }
        let configs: Vec<JointConfig> = ids.iter().map(|&n| JointConfig::from(net.weight(n))).collect();
        let cspace_length = polyline_length(&configs);
        Ok(Path {
            neuron_ids: ids,
            configs,
            cspace_length,
        })
    }

    pub fn neuron_ids(&self) -> &[NeuronId] {
        &self.neuron_ids
    }

    pub fn configs(&self) -> &[JointConfig] {
        &self.configs
    }

    pub fn hop_count(&self) -> usize {
        self.neuron_ids.len() - 1
    }

    pub fn len(&self) -> usize {
        self.neuron_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neuron_ids.is_empty()
    }

    /// Sum of joint-space distances between consecutive configurations (radians).
    pub fn cspace_length(&self) -> f64 {
        self.cspace_length
    }

    pub fn start(&self) -> NeuronId {
        self.neuron_ids[0]
    }

    pub fn goal(&self) -> NeuronId {
        *self.neuron_ids.last().expect("non-empty path")
    }

    /// The remainder of the path from position `from` on.
    pub fn suffix(&self, from: usize) -> Path {
        let from = from.min(self.neuron_ids.len() - 1);
        let configs = self.configs[from..].to_vec();
        Path {
            neuron_ids: self.neuron_ids[from..].to_vec(),
            cspace_length: polyline_length(&configs),
            configs,
        }
    }

    /// Whether any node lies in `blocked`.
    pub fn touches(&self, blocked: &crate::sonn::NeuronSet) -> bool {
        self.neuron_ids.iter().any(|&n| blocked.contains(n))
    }
}

pub fn polyline_length(points: &[JointConfig]) -> f64 {
    points.windows(2).map(|w| geom::distance(&w[0], &w[1])).sum()
}
