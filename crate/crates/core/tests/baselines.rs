use cogmap::baselines::{
    build_roadmap, collision_free, edge_valid, prm, rrt, rrt_connect, FreeSpace, SamplerParams, SamplerResult,
    ValidityChecker, VoxelValidity,
};
use cogmap::kinematics::{occupied_cells, JointConfig, JointLimit};
use cogmap::obstacles::VoxelSet;
use cogmap::scenario::Scenario;
use cogmap::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Planner = fn(&[f64], &[f64], &dyn ValidityChecker, &SamplerParams) -> Result<SamplerResult>;

const PLANNERS: [(&str, Planner); 3] = [("rrt", rrt), ("rrt-connect", rrt_connect), ("prm", prm)];

fn free2() -> FreeSpace {
    FreeSpace(vec![JointLimit { min: -3.0, max: 3.0 }; 2])
}

fn check_path(path: &[JointConfig], start: &[f64], goal: &[f64], v: &dyn ValidityChecker, res: f64) {
    assert_eq!(&path[0][..], start);
    assert_eq!(&path[path.len() - 1][..], goal);
    for w in path.windows(2) {
        assert!(edge_valid(v, &w[0], &w[1], res));
    }
}

#[test]
fn collision_free_contract() {
    let sc = Scenario::pillar();
    let empty = VoxelSet::new();
    let mut r = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let q = [r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0)];
        assert!(collision_free(&sc.robot, &sc.grid, &empty, &q));
    }
    let home = [0.0, 0.0];
    let cells: VoxelSet = occupied_cells(&sc.robot, &home, &sc.grid)
        .unwrap()
        .into_iter()
        .collect();
    let one: VoxelSet = cells.iter().take(1).copied().collect();
    assert!(!collision_free(&sc.robot, &sc.grid, &one, &home));
    // adding voxels never turns a collision into a free pose
    for _ in 0..50 {
        let q = [r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0)];
        let mut occ = sc.occupied_at(0.0);
        let before = collision_free(&sc.robot, &sc.grid, &occ, &q);
        occ.extend((0..20).map(|_| r.gen_range(0..sc.grid.cell_count() as u32)));
        assert!(before || !collision_free(&sc.robot, &sc.grid, &occ, &q));
    }
}

#[test]
fn empty_space_success_rate() {
    let v = free2();
    for (name, planner) in PLANNERS {
        let mut ok = 0;
        for seed in 0..20 {
            let p = SamplerParams {
                seed,
                ..SamplerParams::default()
            };
            let (s, g) = ([-2.5, -2.0], [2.4, 2.2]);
            if let Some(path) = planner(&s, &g, &v, &p).unwrap().path {
                check_path(&path, &s, &g, &v, p.edge_resolution);
                ok += 1;
            }
        }
        assert!(ok >= 19, "{name}: {ok}/20");
    }
}

#[test]
fn identical_endpoints() {
    let v = free2();
    for (_, planner) in PLANNERS {
        let res = planner(&[0.5, 0.5], &[0.5, 0.5], &v, &SamplerParams::default()).unwrap();
        assert_eq!(res.path.unwrap().len(), 1);
    }
}

#[test]
fn invalid_endpoints_are_errors() {
    let sc = Scenario::pillar();
    let occ = sc.occupied_at(0.0);
    let v = VoxelValidity {
        model: &sc.robot,
        grid: &sc.grid,
        occupied: &occ,
    };
    for (_, planner) in PLANNERS {
        assert!(planner(&[0.0, 0.0], &sc.goal, &v, &SamplerParams::default()).is_err());
        assert!(planner(&sc.start, &[9.0, 0.0], &v, &SamplerParams::default()).is_err());
    }
}

#[test]
fn roadmap_is_symmetric() {
    let v = free2();
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let nodes: Vec<Vec<f64>> = (0..150)
        .map(|_| vec![r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0)])
        .collect();
    let map = build_roadmap(nodes, &v, 8, 0.05);
    for (i, nbrs) in map.adjacency.iter().enumerate() {
        assert!(nbrs.windows(2).all(|w| w[0] < w[1]));
        for &j in nbrs {
            assert_ne!(i, j);
            assert!(map.adjacency[j].binary_search(&i).is_ok());
        }
    }
}

#[test]
fn pillar_success_rates() {
    let sc = Scenario::pillar();
    let occ = sc.occupied_at(0.0);
    let v = VoxelValidity {
        model: &sc.robot,
        grid: &sc.grid,
        occupied: &occ,
    };
    for (name, planner) in PLANNERS {
        let mut ok = 0;
        for seed in 0..20 {
            let p = SamplerParams { seed, ..sc.sampler };
            if let Some(path) = planner(&sc.start, &sc.goal, &v, &p).unwrap().path {
                check_path(&path, &sc.start, &sc.goal, &v, p.edge_resolution);
                ok += 1;
            }
        }
        assert!(ok >= 18, "{name}: {ok}/20");
    }
}

#[test]
fn deterministic_per_seed() {
    let v = free2();
    for (_, planner) in PLANNERS {
        let p = SamplerParams {
            seed: 5,
            ..SamplerParams::default()
        };
        let a = planner(&[-1.0, -1.0], &[1.0, 2.0], &v, &p).unwrap();
        let b = planner(&[-1.0, -1.0], &[1.0, 2.0], &v, &p).unwrap();
        assert_eq!(a.path, b.path);
    }
}
