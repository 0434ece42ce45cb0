#![allow(dead_code)]

use std::collections::VecDeque;
use std::sync::OnceLock;

use cogmap::cli::train_for;
use cogmap::grid::VoxelGrid;
use cogmap::kinematics::{forward_kinematics, interpolate, JointConfig, RobotModel};
use cogmap::live::WorldState;
use cogmap::lut::LookupTable;
use cogmap::obstacles::{voxelize_obstacles, Obstacle, VoxelSet};
use cogmap::planner::{search, SearchAlgorithm};
use cogmap::scenario::Scenario;
use cogmap::sonn::{Network, NetworkKind, NeuronSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Planar chain as 3x3 homogeneous transforms multiplied link by link.
pub fn planar_joints_oracle(lengths: &[f64], q: &[f64]) -> Vec<[f64; 2]> {
    let mut t = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut out = vec![[0.0, 0.0]];
    for (l, a) in lengths.iter().zip(q) {
        let (s, c) = a.sin_cos();
        let step = [[c, -s, c * l], [s, c, s * l], [0.0, 0.0, 1.0]];
        t = mat3(&t, &step);
        out.push([t[0][2], t[1][2]]);
    }
    out
}

fn mat3(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    r
}

/// Standard DH chain: Rz(θ) Tz(d) Tx(a) Rx(α) per joint, 4x4 products.
pub fn dh_origins_oracle(dh: &[(f64, f64, f64, f64)], q: &[f64]) -> Vec<[f64; 3]> {
    let mut t = [[0.0; 4]; 4];
    for (i, row) in t.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut out = vec![[0.0; 3]];
    for (&(d, a, alpha, offset), &qi) in dh.iter().zip(q) {
        let th = qi + offset;
        let rz = [
            [th.cos(), -th.sin(), 0.0, 0.0],
            [th.sin(), th.cos(), 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        let tz = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, d],
            [0.0, 0.0, 0.0, 1.0],
        ];
        let tx = [
            [1.0, 0.0, 0.0, a],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        let rx = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, alpha.cos(), -alpha.sin(), 0.0],
            [0.0, alpha.sin(), alpha.cos(), 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        for m in [rz, tz, tx, rx] {
            t = mat4(&t, &m);
        }
        out.push([t[0][3], t[1][3], t[2][3]]);
    }
    out
}

fn mat4(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut r = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            r[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    r
}

/// Lowest-index argmin of the squared distance, by plain linear scan.
pub fn linear_scan_bmu(net: &Network, q: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for n in 0..net.len() {
        let d: f64 = net.weight(n).iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best_d {
            best_d = d;
            best = n;
        }
    }
    best
}

/// Second entry of all neurons sorted by (squared distance, index).
pub fn sorted_second_bmu(net: &Network, q: &[f64]) -> usize {
    let mut all: Vec<(f64, usize)> = (0..net.len())
        .map(|n| (net.weight(n).iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum(), n))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all[1].1
}

/// Dense point-sampling oracle for conservative rasterization. Each link is
/// sampled every `pitch` metres; a sampled distance over-estimates the true
/// distance by at most `pitch / 2`. Returns `(must, may)`: cells whose centre
/// is surely within `radius + half diagonal` of a link, and cells that are
/// within it or too close to the boundary to decide.
pub fn sampled_capsule_cells(model: &RobotModel, q: &[f64], grid: &VoxelGrid, pitch: f64) -> (VoxelSet, VoxelSet) {
    let segs = forward_kinematics(model, q).unwrap();
    let mut pts = Vec::new();
    for s in &segs {
        let len = ((s.end[0] - s.start[0]).powi(2) + (s.end[1] - s.start[1]).powi(2) + (s.end[2] - s.start[2]).powi(2))
            .sqrt();
        let n = (len / pitch).ceil().max(1.0) as usize;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let p = [
                s.start[0] + (s.end[0] - s.start[0]) * t,
                s.start[1] + (s.end[1] - s.start[1]) * t,
                s.start[2] + (s.end[2] - s.start[2]) * t,
            ];
            pts.push((p, s.radius));
        }
    }
    let hd = grid.half_diagonal();
    let mut must = VoxelSet::new();
    let mut may = VoxelSet::new();
    for id in 0..grid.cell_count() as u32 {
        let c = grid.center(id);
        let slack = pts
            .iter()
            .map(|(p, r)| (0..3).map(|k| (c[k] - p[k]).powi(2)).sum::<f64>().sqrt() - r - hd)
            .fold(f64::INFINITY, f64::min);
        if slack <= 0.0 {
            must.insert(id);
        }
        if slack <= pitch / 2.0 + 1e-12 {
            may.insert(id);
        }
    }
    (must, may)
}

/// Undirected weighted graph as a GNG-kind network in the plane.
pub fn graph_network(points: &[[f64; 2]], edges: &[(usize, usize)]) -> Network {
    let weights = points.iter().flat_map(|p| p.iter().copied()).collect();
    Network::new(NetworkKind::Gng, 2, weights, edges.iter().copied(), None, None).unwrap()
}

/// Random connected-ish planar graph with `n` nodes.
pub fn random_graph(r: &mut ChaCha8Rng, n: usize, edge_prob: f64) -> Network {
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|_| [r.gen_range(0.0..10.0), r.gen_range(0.0..10.0)])
        .collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if r.gen_bool(edge_prob) {
                edges.push((a, b));
            }
        }
    }
    graph_network(&pts, &edges)
}

pub fn random_blocking(r: &mut ChaCha8Rng, n: usize, p: f64) -> NeuronSet {
    NeuronSet::from_ids(n, (0..n).filter(|_| r.gen_bool(p)))
}

/// Hop distances from `s` avoiding blocked nodes.
pub fn bfs_oracle(net: &Network, s: usize, blocked: &NeuronSet) -> Vec<Option<usize>> {
    let mut dist = vec![None; net.len()];
    if blocked.contains(s) {
        return dist;
    }
    dist[s] = Some(0);
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for e in net.edges() {
            let v = if e.a == u {
                e.b
            } else if e.b == u {
                e.a
            } else {
                continue;
            };
            if dist[v].is_none() && !blocked.contains(v) {
                dist[v] = Some(dist[u].unwrap() + 1);
                q.push_back(v);
            }
        }
    }
    dist
}

/// All-pairs metric distances over unblocked nodes.
pub fn floyd_warshall_oracle(net: &Network, blocked: &NeuronSet) -> Vec<Vec<f64>> {
    let n = net.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        if !blocked.contains(i) {
            row[i] = 0.0;
        }
    }
    for e in net.edges() {
        if blocked.contains(e.a) || blocked.contains(e.b) {
            continue;
        }
        let w: f64 = net
            .weight(e.a)
            .iter()
            .zip(net.weight(e.b))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        d[e.a][e.b] = d[e.a][e.b].min(w);
        d[e.b][e.a] = d[e.b][e.a].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k].is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// The wavefront/Dijkstra divergence fixture: S and G joined by two long
/// edges through A (2 hops) and by three short hops through B and C; D is a
/// side branch.
pub fn divergence_fixture() -> Network {
    let s = [0.0, 0.0];
    let g = [3.0, 0.0];
    let a = [1.5, 3.0];
    let b = [1.0, 0.1];
    let c = [2.0, 0.1];
    let d = [1.5, -1.0];
    graph_network(
        &[s, g, a, b, c, d],
        &[(0, 2), (2, 1), (0, 3), (3, 4), (4, 1), (3, 5), (4, 5)],
    )
}

/// The neurons whose arm pose at their weight vector touches `occupied`,
/// computed with fresh forward kinematics per neuron.
pub fn fk_blocked_oracle(net: &Network, model: &RobotModel, grid: &VoxelGrid, occupied: &VoxelSet) -> NeuronSet {
    let ids = (0..net.len()).filter(|&n| {
        let q = net.weight(n);
        model.within_limits(q)
            && cogmap::kinematics::occupied_cells(model, q, grid)
                .unwrap()
                .iter()
                .any(|c| occupied.contains(c))
    });
    NeuronSet::from_ids(net.len(), ids)
}

/// Whether any bare link segment (no capsule radius) passes through an
/// occupied cell, checked along `traj` densely interpolated at `step` rad.
/// Points on each segment are sampled every `pitch` metres and located in the grid.
pub fn trajectory_hits(
    model: &RobotModel,
    grid: &VoxelGrid,
    occupied: &VoxelSet,
    traj: &[JointConfig],
    step: f64,
    pitch: f64,
) -> usize {
    let mut dense = vec![traj[0].clone()];
    for w in traj.windows(2) {
        dense.extend(interpolate(&w[0], &w[1], step).unwrap().into_iter().skip(1));
    }
    dense
        .iter()
        .filter(|q| {
            forward_kinematics(model, q).unwrap().iter().any(|s| {
                let len = ((s.end[0] - s.start[0]).powi(2)
                    + (s.end[1] - s.start[1]).powi(2)
                    + (s.end[2] - s.start[2]).powi(2))
                .sqrt();
                let n = (len / pitch).ceil().max(1.0) as usize;
                (0..=n).any(|i| {
                    let t = i as f64 / n as f64;
                    let p = [
                        s.start[0] + (s.end[0] - s.start[0]) * t,
                        s.start[1] + (s.end[1] - s.start[1]) * t,
                        s.start[2] + (s.end[2] - s.start[2]) * t,
                    ];
                    grid.locate(p).is_some_and(|c| occupied.contains(&grid.id(c)))
                })
            })
        })
        .count()
}

/// The pillar scenario trained with its bundled settings, built once per test binary.
pub fn pillar_map() -> &'static (Scenario, Network, LookupTable) {
    static MAP: OnceLock<(Scenario, Network, LookupTable)> = OnceLock::new();
    MAP.get_or_init(|| {
        let sc = Scenario::pillar();
        let (net, lut) = train_for(&sc).unwrap();
        (sc, net, lut)
    })
}

/// Pillar scenario retrained with a different network seed.
pub fn pillar_with_seed(seed: u64) -> (Scenario, Network, LookupTable) {
    let mut sc = Scenario::pillar();
    sc.training.seed = seed;
    let (net, lut) = train_for(&sc).unwrap();
    (sc, net, lut)
}

/// The 10 000-neuron reference scenario, built once per test binary.
pub fn reference_map() -> &'static (Scenario, Network, LookupTable) {
    static MAP: OnceLock<(Scenario, Network, LookupTable)> = OnceLock::new();
    MAP.get_or_init(|| {
        let sc = Scenario::reference();
        let (net, lut) = train_for(&sc).unwrap();
        (sc, net, lut)
    })
}

/// A small disc over a link point of some node of the remaining path, chosen
/// so the path is cut but a detour from the robot to the goal remains.
pub fn obstacle_on_path(w: &WorldState, id: u32) -> Obstacle {
    let path = w.replan.current_path.as_ref().expect("a path is installed");
    let ids = path.neuron_ids();
    let net = w.network();
    let bmu_robot = net.best_matching_unit(&w.robot_config).unwrap();
    for &n in &ids[ids.len() / 3..ids.len() * 2 / 3] {
        for seg in forward_kinematics(w.model(), net.weight(n)).unwrap() {
            for r in [0.1, 0.15] {
                let o = Obstacle::sphere(id, seg.end, r);
                let mut all = w.obstacles.clone();
                all.obstacles.push(o.clone());
                let occ = voxelize_obstacles(&all, w.time, w.lookup().grid());
                let blocked = w.lookup().blocked_neurons(&occ).unwrap();
                if path.touches(&blocked)
                    && search(net, SearchAlgorithm::Dijkstra, bmu_robot, path.goal(), &blocked).is_ok()
                {
                    return o;
                }
            }
        }
    }
    panic!("no node of the path can be blocked safely");
}
