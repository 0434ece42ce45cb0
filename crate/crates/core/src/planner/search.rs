use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use super::{Path, SearchAlgorithm};
use crate::error::{Endpoint, Error, Result};
use crate::kinematics::RobotModel;
use crate::lut::LookupTable;
use crate::obstacles::VoxelSet;
use crate::sonn::{Network, NeuronId, NeuronSet};

fn check_endpoints(net: &Network, start: NeuronId, goal: NeuronId, blocked: &NeuronSet) -> Result<()> {
    for (id, which) in [(start, Endpoint::Start), (goal, Endpoint::Goal)] {
        if id >= net.len() {
            return Err(Error::invalid(format!("{which} neuron {id} does not exist")));
        }
    }
    if blocked.contains(start) {
        return Err(Error::BlockedEndpoint(Endpoint::Start));
    }
    if blocked.contains(goal) {
        return Err(Error::BlockedEndpoint(Endpoint::Goal));
    }
    Ok(())
}

/// Breadth-first (minimum-hop) search over unblocked neurons.
///
/// Among equally deep predecessors the lowest neuron index is taken.
pub fn wavefront(net: &Network, start: NeuronId, goal: NeuronId, blocked: &NeuronSet) -> Result<Path> {
    check_endpoints(net, start, goal, blocked)?;
    const UNSEEN: u32 = u32::MAX;
    let mut depth = vec![UNSEEN; net.len()];
    depth[start] = 0;
    let mut queue = VecDeque::from([start]);
    'bfs: while let Some(n) = queue.pop_front() {
        if n == goal {
            break;
        }
        for &(m, _) in net.neighbors(n) {
            if depth[m] == UNSEEN && !blocked.contains(m) {
                depth[m] = depth[n] + 1;
                if m == goal {
                    break 'bfs;
                }
                queue.push_back(m);
            }
        }
    }
    if depth[goal] == UNSEEN {
        return Err(Error::Unreachable);
    }
    let mut ids = vec![goal];
    let mut at = goal;
    while at != start {
        let want = depth[at] - 1;
        at = net
            .neighbors(at)
            .iter()
            .map(|&(m, _)| m)
            .find(|&m| depth[m] == want)
            .expect("BFS layer has a predecessor");
        ids.push(at);
    }
    ids.reverse();
    Path::from_neurons(net, ids)
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    node: NeuronId,
}

impl Eq for Entry {}

impl Ord for Entry {
    // max-heap: smaller distance, then lower index, pops first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum joint-space-length search over unblocked neurons.
///
/// Nodes with equal tentative distance settle in index order; a predecessor
/// is only replaced by a strictly shorter route.
pub fn dijkstra(net: &Network, start: NeuronId, goal: NeuronId, blocked: &NeuronSet) -> Result<Path> {
    check_endpoints(net, start, goal, blocked)?;
    let n = net.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[start] = 0.0;
    heap.push(Entry { dist: 0.0, node: start });
    while let Some(Entry { dist: d, node }) = heap.pop() {
        if settled[node] {
            continue;
        }
        settled[node] = true;
        if node == goal {
            break;
        }
        for &(m, w) in net.neighbors(node) {
            if settled[m] || blocked.contains(m) {
                continue;
            }
            let candidate = d + w;
            if candidate < dist[m] {
                dist[m] = candidate;
                pred[m] = node;
                heap.push(Entry {
                    dist: candidate,
                    node: m,
                });
            }
        }
    }
    if !settled[goal] {
        return Err(Error::Unreachable);
    }
    let mut ids = vec![goal];
    let mut at = goal;
    while at != start {
        at = pred[at];
        ids.push(at);
    }
    ids.reverse();
    Path::from_neurons(net, ids)
}

/// Runs the selected search.
pub fn search(
    net: &Network,
    algo: SearchAlgorithm,
    start: NeuronId,
    goal: NeuronId,
    blocked: &NeuronSet,
) -> Result<Path> {
    match algo {
        SearchAlgorithm::Wavefront => wavefront(net, start, goal, blocked),
        SearchAlgorithm::Dijkstra => dijkstra(net, start, goal, blocked),
    }
}

/// A planning result with the anchors and blocking it was computed against.
#[derive(Debug)]
pub struct PlanOutcome {
    pub path: Result<Path>,
    pub blocked: NeuronSet,
    pub bmu_start: NeuronId,
    pub bmu_goal: NeuronId,
}

/// Blocks neurons for `occupied`, anchors both configurations to their BMUs and searches.
pub fn plan(
    net: &Network,
    lut: &LookupTable,
    model: &RobotModel,
    q_start: &[f64],
    q_goal: &[f64],
    occupied: &VoxelSet,
    algo: SearchAlgorithm,
) -> Result<Path> {
    plan_detailed(net, lut, model, q_start, q_goal, occupied, algo)?.path
}

/// Like [`plan`] but keeps the blocked set and anchors; only setup errors are
/// returned directly, search errors land in [`PlanOutcome::path`].
pub fn plan_detailed(
    net: &Network,
    lut: &LookupTable,
    model: &RobotModel,
    q_start: &[f64],
    q_goal: &[f64],
    occupied: &VoxelSet,
    algo: SearchAlgorithm,
) -> Result<PlanOutcome> {
    model.check_dimension(q_start)?;
    model.check_dimension(q_goal)?;
    if lut.neuron_count() != net.len() {
        return Err(Error::FingerprintMismatch);
    }
    let blocked = lut.blocked_neurons(occupied)?;
    let bmu_start = net.best_matching_unit(q_start)?;
    let bmu_goal = net.best_matching_unit(q_goal)?;
    let path = search(net, algo, bmu_start, bmu_goal, &blocked);
    Ok(PlanOutcome {
        path,
        blocked,
        bmu_start,
        bmu_goal,
    })
}
