use serde::{Deserialize, Serialize};

use super::{DecisionRecord, WorldState};
use crate::bitmap::MapLayout;
use crate::geom::Point;
use crate::grid::VoxelGrid;
use crate::kinematics::{forward_kinematics, JointConfig};
use crate::obstacles::Shape;
use crate::sonn::NeuronId;

/// Upper bound on trajectory samples carried by a snapshot.
pub const MAX_SNAPSHOT_SAMPLES: usize = 200;

/// Run lengths of alternating `false`/`true` stretches, starting with `false`
/// (the first run may be 0).
pub fn rle_encode(mask: impl IntoIterator<Item = bool>) -> Vec<u32> {
    let mut runs = Vec::new();
    let mut current = false;
    let mut len = 0u32;
    for b in mask {
        if b == current {
            len += 1;
        } else {
            runs.push(len);
            current = b;
            len = 1;
        }
    }
    if len > 0 || runs.is_empty() {
        runs.push(len);
    }
    runs
}

pub fn rle_decode(runs: &[u32]) -> Vec<bool> {
    let mut out = Vec::new();
    for (i, &r) in runs.iter().enumerate() {
        out.extend(std::iter::repeat_n(i % 2 == 1, r as usize));
    }
    out
}

/// At most `max` evenly spaced items; first and last are always kept.
pub fn decimate<T: Clone>(items: &[T], max: usize) -> Vec<T> {
    if items.len() <= max {
        return items.to_vec();
    }
    if max < 2 {
        return items[..max].to_vec();
    }
    let n = items.len() - 1;
    let m = max - 1;
    (0..=m).map(|i| items[(i * n + m / 2) / m].clone()).collect()
}

/// Cognitive-map masks, one bit per neuron in [`MapLayout`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitmapMasks {
    pub width: usize,
    pub height: usize,
    pub neurons: usize,
    pub blocked_rle: Vec<u32>,
    pub path_rle: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleView {
    pub id: u32,
    #[serde(flatten)]
    pub shape: Shape,
    pub center: Point,
    pub active: bool,
}

/// Everything an observer needs to draw one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub paused: bool,
    pub robot_config: JointConfig,
    pub goal: JointConfig,
    /// Base followed by the end point of each link.
    pub joint_positions: Vec<Point>,
    pub obstacles: Vec<ObstacleView>,
    pub grid: VoxelGrid,
    pub occupied_rle: Vec<u32>,
    pub path: Vec<NeuronId>,
    pub bmu_start: NeuronId,
    pub bmu_goal: NeuronId,
    /// Smoothed trajectory, decimated to at most [`MAX_SNAPSHOT_SAMPLES`].
    pub samples: Vec<JointConfig>,
    /// End-effector positions of `samples`.
    pub samples_ee: Vec<Point>,
    pub blocked_count: usize,
    pub last_decision: Option<DecisionRecord>,
    pub bitmap: BitmapMasks,
}

fn chain_points(world: &WorldState, q: &[f64]) -> Vec<Point> {
    match forward_kinematics(world.model(), q) {
        Ok(segs) => std::iter::once(segs[0].start)
            .chain(segs.iter().map(|s| s.end))
            .collect(),
        Err(_) => Vec::new(),
    }
}

impl Snapshot {
    pub(super) fn capture(world: &WorldState) -> Snapshot {
        let net = world.network();
        let grid = world.lookup().grid().clone();
        let path: Vec<NeuronId> = world
            .replan
            .current_path
            .as_ref()
            .map(|p| p.neuron_ids().to_vec())
            .unwrap_or_default();
        let samples = world
            .smoothed()
            .map(|s| decimate(&s.samples, MAX_SNAPSHOT_SAMPLES))
            .unwrap_or_default();
        let samples_ee = samples
            .iter()
            .filter_map(|q| chain_points(world, q).last().copied())
            .collect();
        let layout = MapLayout::for_network(net);
        let mut on_path = vec![false; net.len()];
        for &n in &path {
            on_path[n] = true;
        }
        let obstacles = world
            .obstacles
            .obstacles
            .iter()
            .map(|o| ObstacleView {
                id: o.id,
                shape: o.shape,
                center: o.center_at(world.time),
                active: o.is_active(world.time),
            })
            .collect();
        Snapshot {
            time: world.time,
            paused: world.paused,
            robot_config: world.robot_config.clone(),
            goal: world.goal.clone(),
            joint_positions: chain_points(world, &world.robot_config),
            obstacles,
            occupied_rle: rle_encode((0..grid.cell_count() as u32).map(|v| world.occupied.contains(&v))),
            grid,
            path,
            bmu_start: world.replan.bmu_start,
            bmu_goal: world.replan.bmu_goal,
            samples,
            samples_ee,
            blocked_count: world.replan.blocked.len(),
            last_decision: world.last_decision().cloned(),
            bitmap: BitmapMasks {
                width: layout.width,
                height: layout.height,
                neurons: net.len(),
                blocked_rle: rle_encode(world.replan.blocked.mask().iter().copied()),
                path_rle: rle_encode(on_path),
            },
        }
    }
}
