use serde::{Deserialize, Serialize};

use super::{Path, SmoothedTrajectory};
use crate::error::Result;
use crate::sonn::{NeuronId, NeuronSet};

/// Margin by which a candidate must undercut the current path length.
pub const SHORTER_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdoptReason {
    NoPrevious,
    Collision,
    Shorter,
}

impl std::fmt::Display for AdoptReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AdoptReason::NoPrevious => "no_previous",
            AdoptReason::Collision => "collision",
            AdoptReason::Shorter => "shorter",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    KeepCurrent,
    Adopt {
        path: Path,
        reason: AdoptReason,
    },
    /// The search failed and there is no usable current path.
    Fail {
        reason: String,
    },
}

/// Bookkeeping of the replan loop.
#[derive(Debug, Clone, Default)]
pub struct ReplanState {
    pub current_path: Option<Path>,
    pub current_smoothed: Option<SmoothedTrajectory>,
    /// When the current run of strictly shorter candidates began.
    pub candidate_shorter_since: Option<f64>,
    /// Blocking the next decision is made against.
    pub blocked: NeuronSet,
    pub bmu_start: NeuronId,
    pub bmu_goal: NeuronId,
}

impl ReplanState {
    pub fn new(neurons: usize) -> Self {
        ReplanState {
            blocked: NeuronSet::new(neurons),
            ..Default::default()
        }
    }

    /// Whether the current unsmoothed path passes through a blocked neuron.
    pub fn current_collides(&self) -> bool {
        self.current_path.as_ref().is_some_and(|p| p.touches(&self.blocked))
    }

    fn adopt(&mut self, path: Path, reason: AdoptReason) -> Decision {
        self.current_path = Some(path.clone());
        self.current_smoothed = None;
        self.candidate_shorter_since = None;
        Decision::Adopt { path, reason }
    }

    fn clear(&mut self) {
        self.current_path = None;
        self.current_smoothed = None;
        self.candidate_shorter_since = None;
    }
}

/// Applies the adoption rule to a fresh search result.
///
/// Adopts when there is no current path, when the current path touches a
/// blocked neuron, or when the candidate has been strictly shorter than the
/// current path without interruption for at least `stability_window`
/// seconds. A failed search with no usable current path clears it and fails.
pub fn replan_decide(state: &mut ReplanState, new_path: Result<Path>, now: f64, stability_window: f64) -> Decision {
    let collides = state.current_collides();
    let current_len = match &state.current_path {
        None => None,
        Some(_) if collides => None,
        Some(p) => Some(p.cspace_length()),
    };
    match (new_path, current_len) {
        (Ok(path), None) => {
            let reason = if state.current_path.is_none() {
                AdoptReason::NoPrevious
            } else {
                AdoptReason::Collision
            };
            state.adopt(path, reason)
        }
        (Err(e), None) => {
            state.clear();
            Decision::Fail { reason: e.to_string() }
        }
        (Err(_), Some(_)) => {
            state.candidate_shorter_since = None;
            Decision::KeepCurrent
        }
        (Ok(path), Some(len)) => {
            if path.cspace_length() < len - SHORTER_EPSILON {
                let since = *state.candidate_shorter_since.get_or_insert(now);
                if now - since >= stability_window - 1e-9 {
                    return state.adopt(path, AdoptReason::Shorter);
                }
            } else {
                state.candidate_shorter_since = None;
            }
            Decision::KeepCurrent
        }
    }
}
