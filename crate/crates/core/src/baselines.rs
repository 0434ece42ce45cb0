//! Sampling-based planners over the full configuration space: RRT,
//! RRT-Connect and PRM, sharing the voxel collision semantics of the
//! cognitive-map planner.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom;
use crate::grid::VoxelGrid;
use crate::kinematics::{forward_kinematics, interpolate, rasterize_capsule, JointConfig, JointLimit, RobotModel};
use crate::obstacles::VoxelSet;

/// Decides whether a single configuration is admissible.
pub trait ValidityChecker: Sync {
    fn is_valid(&self, q: &[f64]) -> bool;
    fn limits(&self) -> &[JointLimit];
}

/// True iff `q` is within limits and the inflated robot avoids every occupied cell.
pub fn collision_free(model: &RobotModel, grid: &VoxelGrid, occupied: &VoxelSet, q: &[f64]) -> bool {
    if model.check_limits(q).is_err() {
        return false;
    }
    let Ok(segments) = forward_kinematics(model, q) else {
        return false;
    };
    if occupied.is_empty() {
        return true;
    }
    let mut cells = Vec::new();
    for seg in &segments {
        rasterize_capsule(seg, grid, &mut cells);
    }
    !cells.iter().any(|c| occupied.contains(c))
}

/// Collision checking against an occupied voxel set.
pub struct VoxelValidity<'a> {
    pub model: &'a RobotModel,
    pub grid: &'a VoxelGrid,
    pub occupied: &'a VoxelSet,
}

impl ValidityChecker for VoxelValidity<'_> {
    fn is_valid(&self, q: &[f64]) -> bool {
        collision_free(self.model, self.grid, self.occupied, q)
    }

    fn limits(&self) -> &[JointLimit] {
        self.model.limits()
    }
}

/// Only joint limits are enforced.
pub struct FreeSpace(pub Vec<JointLimit>);

impl ValidityChecker for FreeSpace {
    fn is_valid(&self, q: &[f64]) -> bool {
        q.len() == self.0.len() && q.iter().zip(&self.0).all(|(v, l)| l.contains(*v))
    }

    fn limits(&self) -> &[JointLimit] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerParams {
    /// Tree extension length (radians).
    pub step_size: f64,
    /// Spacing of the validity checks along every edge (radians, infinity norm).
    pub edge_resolution: f64,
    pub goal_bias: f64,
    pub max_iterations: usize,
    pub prm_samples: usize,
    pub prm_k: usize,
    pub seed: u64,
}

impl Default for SamplerParams {
    fn default() -> Self {
        SamplerParams {
            step_size: 0.1,
            edge_resolution: 0.01,
            goal_bias: 0.05,
            max_iterations: 20_000,
            prm_samples: 500,
            prm_k: 10,
            seed: 0,
        }
    }
}

impl SamplerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::invalid("step_size must be > 0"));
        }
        if !(self.edge_resolution > 0.0 && self.edge_resolution.is_finite()) {
            return Err(Error::invalid("edge_resolution must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.goal_bias) {
            return Err(Error::invalid("goal_bias must lie in [0, 1]"));
        }
        if self.prm_k == 0 {
            return Err(Error::invalid("prm_k must be positive"));
        }
        Ok(())
    }
}

/// Outcome of a sampling planner; `path` is `None` when the budget ran out.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerResult {
    pub path: Option<Vec<JointConfig>>,
    /// Iterations (RRT, RRT-Connect) or samples drawn (PRM).
    pub iterations: usize,
}

/// Whether the straight joint-space segment `a`-`b` is valid at resolution `step`.
pub fn edge_valid(v: &dyn ValidityChecker, a: &[f64], b: &[f64], step: f64) -> bool {
    match interpolate(a, b, step) {
        Ok(points) => points.iter().skip(1).all(|q| v.is_valid(q)),
        Err(_) => false,
    }
}

fn sample(rng: &mut ChaCha8Rng, limits: &[JointLimit]) -> Vec<f64> {
    limits.iter().map(|l| rng.gen_range(l.min..=l.max)).collect()
}

fn steer(from: &[f64], to: &[f64], step: f64) -> Vec<f64> {
    let d = geom::distance(from, to);
    if d <= step {
        return to.to_vec();
    }
    let t = step / d;
    from.iter().zip(to).map(|(a, b)| a + (b - a) * t).collect()
}

struct Tree {
    nodes: Vec<Vec<f64>>,
    parent: Vec<usize>,
}

impl Tree {
    fn new(root: &[f64]) -> Self {
        Tree {
            nodes: vec![root.to_vec()],
            parent: vec![usize::MAX],
        }
    }

    fn nearest(&self, q: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, n) in self.nodes.iter().enumerate() {
            let d = geom::squared_distance(n, q);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    fn push(&mut self, q: Vec<f64>, parent: usize) -> usize {
        self.nodes.push(q);
        self.parent.push(parent);
        self.nodes.len() - 1
    }

    /// Root-to-`i` chain.
    fn branch(&self, mut i: usize) -> Vec<JointConfig> {
        let mut out = Vec::new();
        loop {
            out.push(JointConfig(self.nodes[i].clone()));
            if self.parent[i] == usize::MAX {
                break;
            }
            i = self.parent[i];
        }
        out.reverse();
        out
    }
}

enum Extend {
    Trapped,
    Advanced(usize),
    Reached(usize),
}

fn extend(tree: &mut Tree, target: &[f64], v: &dyn ValidityChecker, step: f64, res: f64) -> Extend {
    let near = tree.nearest(target);
    let new = steer(&tree.nodes[near], target, step);
    if !edge_valid(v, &tree.nodes[near], &new, res) {
        return Extend::Trapped;
    }
    let reached = geom::squared_distance(&new, target) == 0.0;
    let id = tree.push(new, near);
    if reached {
        Extend::Reached(id)
    } else {
        Extend::Advanced(id)
    }
}

fn check_query(q_start: &[f64], q_goal: &[f64], v: &dyn ValidityChecker, p: &SamplerParams) -> Result<()> {
    p.validate()?;
    let dof = v.limits().len();
    for q in [q_start, q_goal] {
        if q.len() != dof {
            return Err(Error::DimensionMismatch {
                expected: dof,
                actual: q.len(),
            });
        }
    }
    if !v.is_valid(q_start) {
        return Err(Error::invalid("start configuration is not valid"));
    }
    if !v.is_valid(q_goal) {
        return Err(Error::invalid("goal configuration is not valid"));
    }
    Ok(())
}

/// Single-tree RRT with goal bias.
pub fn rrt(q_start: &[f64], q_goal: &[f64], v: &dyn ValidityChecker, p: &SamplerParams) -> Result<SamplerResult> {
    check_query(q_start, q_goal, v, p)?;
    if q_start == q_goal {
        return Ok(SamplerResult {
            path: Some(vec![JointConfig::from(q_start)]),
            iterations: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut tree = Tree::new(q_start);
    for it in 1..=p.max_iterations {
        let target = if rng.gen_bool(p.goal_bias) {
            q_goal.to_vec()
        } else {
            sample(&mut rng, v.limits())
        };
        if let Extend::Advanced(id) | Extend::Reached(id) =
            extend(&mut tree, &target, v, p.step_size, p.edge_resolution)
        {
            let q = &tree.nodes[id];
            if geom::distance(q, q_goal) <= p.step_size && edge_valid(v, q, q_goal, p.edge_resolution) {
                let mut path = tree.branch(id);
                if path.last().is_none_or(|last| &last[..] != q_goal) {
                    path.push(JointConfig::from(q_goal));
                }
                return Ok(SamplerResult {
                    path: Some(path),
                    iterations: it,
                });
            }
        }
    }
    Ok(SamplerResult {
        path: None,
        iterations: p.max_iterations,
    })
}

/// Bidirectional RRT with the connect heuristic.
pub fn rrt_connect(
    q_start: &[f64],
    q_goal: &[f64],
    v: &dyn ValidityChecker,
    p: &SamplerParams,
) -> Result<SamplerResult> {
    check_query(q_start, q_goal, v, p)?;
    if q_start == q_goal {
        return Ok(SamplerResult {
            path: Some(vec![JointConfig::from(q_start)]),
            iterations: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut a = Tree::new(q_start);
    let mut b = Tree::new(q_goal);
    let mut a_is_start = true;
    for it in 1..=p.max_iterations {
        let target = if it == 1 {
            b.nodes[0].clone()
        } else {
            sample(&mut rng, v.limits())
        };
        let new = match extend(&mut a, &target, v, p.step_size, p.edge_resolution) {
            Extend::Trapped => None,
            Extend::Advanced(id) | Extend::Reached(id) => Some(id),
        };
        if let Some(new) = new {
            let goal = a.nodes[new].clone();
            loop {
                match extend(&mut b, &goal, v, p.step_size, p.edge_resolution) {
                    Extend::Trapped => break,
                    Extend::Advanced(_) => continue,
                    Extend::Reached(joined) => {
                        let mut head = a.branch(new);
                        let mut tail = b.branch(joined);
                        tail.pop();
                        tail.reverse();
                        head.extend(tail);
                        if !a_is_start {
                            head.reverse();
                        }
                        return Ok(SamplerResult {
                            path: Some(head),
                            iterations: it,
                        });
                    }
                }
            }
        }
        std::mem::swap(&mut a, &mut b);
        a_is_start = !a_is_start;
    }
    Ok(SamplerResult {
        path: None,
        iterations: p.max_iterations,
    })
}

/// An undirected roadmap with validated edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Roadmap {
    pub nodes: Vec<Vec<f64>>,
    /// Sorted neighbour lists; symmetric.
    pub adjacency: Vec<Vec<usize>>,
}

/// Connects every node to its `k` nearest neighbours wherever the edge is valid.
pub fn build_roadmap(nodes: Vec<Vec<f64>>, v: &dyn ValidityChecker, k: usize, step: f64) -> Roadmap {
    let n = nodes.len();
    let mut candidates: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut by_dist: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (geom::squared_distance(&nodes[i], &nodes[j]), j))
                .collect();
            let k = k.min(by_dist.len());
            if k > 0 && k < by_dist.len() {
                by_dist.select_nth_unstable_by(k - 1, |x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            }
            by_dist.truncate(k);
            by_dist.into_iter().map(move |(_, j)| (i.min(j), i.max(j)))
        })
        .collect();
    candidates.sort_unstable();
    candidates.dedup();
    let valid: Vec<bool> = candidates
        .par_iter()
        .map(|&(i, j)| edge_valid(v, &nodes[i], &nodes[j], step))
        .collect();
    let mut adjacency = vec![Vec::new(); n];
    for (&(i, j), ok) in candidates.iter().zip(valid) {
        if ok {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }
    Roadmap { nodes, adjacency }
}

fn roadmap_shortest(map: &Roadmap, s: usize, g: usize) -> Option<Vec<usize>> {
    #[derive(PartialEq)]
    struct E(f64, usize);
    impl Eq for E {}
    impl Ord for E {
        fn cmp(&self, o: &Self) -> Ordering {
            o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
        }
    }
    impl PartialOrd for E {
        fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
            Some(self.cmp(o))
        }
    }
    let n = map.nodes.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut heap = BinaryHeap::from([E(0.0, s)]);
    dist[s] = 0.0;
    while let Some(E(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if u == g {
            break;
        }
        for &w in &map.adjacency[u] {
            let nd = d + geom::distance(&map.nodes[u], &map.nodes[w]);
            if nd < dist[w] {
                dist[w] = nd;
                pred[w] = u;
                heap.push(E(nd, w));
            }
        }
    }
    if !dist[g].is_finite() {
        return None;
    }
    let mut ids = vec![g];
    while *ids.last().unwrap() != s {
        ids.push(pred[*ids.last().unwrap()]);
    }
    ids.reverse();
    Some(ids)
}

/// Probabilistic roadmap: up to `prm_samples` valid samples (at most
/// `max_iterations` draws) plus start and goal, k-nearest connections, then a
/// shortest-path query.
pub fn prm(q_start: &[f64], q_goal: &[f64], v: &dyn ValidityChecker, p: &SamplerParams) -> Result<SamplerResult> {
    check_query(q_start, q_goal, v, p)?;
    if q_start == q_goal {
        return Ok(SamplerResult {
            path: Some(vec![JointConfig::from(q_start)]),
            iterations: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut nodes = vec![q_start.to_vec(), q_goal.to_vec()];
    let mut draws = 0;
    while nodes.len() < p.prm_samples + 2 && draws < p.max_iterations {
        draws += 1;
        let q = sample(&mut rng, v.limits());
        if v.is_valid(&q) {
            nodes.push(q);
        }
    }
    let map = build_roadmap(nodes, v, p.prm_k, p.edge_resolution);
    let path =
        roadmap_shortest(&map, 0, 1).map(|ids| ids.into_iter().map(|i| JointConfig(map.nodes[i].clone())).collect());
    Ok(SamplerResult {
        path,
        iterations: draws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free() -> FreeSpace {
        FreeSpace(vec![JointLimit::default(); 2])
    }

    #[test]
    fn steer_caps_distance() {
        let q = steer(&[0.0, 0.0], &[3.0, 4.0], 1.0);
        assert!((geom::distance(&q, &[0.0, 0.0]) - 1.0).abs() < 1e-12);
        assert_eq!(steer(&[0.0, 0.0], &[0.3, 0.4], 1.0), vec![0.3, 0.4]);
    }

    #[test]
    fn trivial_queries() {
        let p = SamplerParams::default();
        for f in [rrt, rrt_connect, prm] {
            let r = f(&[0.5, 0.5], &[0.5, 0.5], &free(), &p).unwrap();
            assert_eq!(r.path.unwrap().len(), 1);
        }
    }

    #[test]
    fn invalid_endpoint_is_rejected() {
        let p = SamplerParams::default();
        assert!(rrt(&[4.0, 0.0], &[0.0, 0.0], &free(), &p).is_err());
        assert!(prm(&[0.0, 0.0], &[0.0, 4.0], &free(), &p).is_err());
    }

    #[test]
    fn connect_in_free_space_is_direct() {
        let r = rrt_connect(&[-1.0, -1.0], &[1.0, 1.0], &free(), &SamplerParams::default()).unwrap();
        let path = r.path.unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(&path[0][..], &[-1.0, -1.0]);
        assert_eq!(&path.last().unwrap()[..], &[1.0, 1.0]);
    }
}
