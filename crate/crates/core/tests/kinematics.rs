mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use cogmap::grid::VoxelGrid;
use cogmap::kinematics::{end_effector, forward_kinematics, interpolate, occupied_cells, RobotModel};
use cogmap::obstacles::VoxelSet;
use common::{dh_origins_oracle, planar_joints_oracle, sampled_capsule_cells};
use proptest::prelude::*;

fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
    a.iter().zip(&b).all(|(x, y)| (x - y).abs() < tol)
}

#[test]
fn planar_examples() {
    let m = RobotModel::planar(&[1.0, 1.0], 0.0).unwrap();
    assert!(close(end_effector(&m, &[0.0, 0.0]).unwrap(), [2.0, 0.0, 0.0], 1e-12));
    assert!(close(
        end_effector(&m, &[FRAC_PI_2, 0.0]).unwrap(),
        [0.0, 2.0, 0.0],
        1e-12
    ));
}

#[test]
fn ur3e_matches_transform_chain() {
    let m = RobotModel::ur3e(0.05).unwrap();
    let dh: Vec<_> = m
        .links()
        .iter()
        .map(|l| {
            let p = l.dh.unwrap();
            (p.d, p.a, p.alpha, p.theta_offset)
        })
        .collect();
    let mut r = common::rng(11);
    for _ in 0..200 {
        let q: Vec<f64> = (0..6).map(|_| rand::Rng::gen_range(&mut r, -PI..PI)).collect();
        let segs = forward_kinematics(&m, &q).unwrap();
        let want = dh_origins_oracle(&dh, &q);
        for (i, s) in segs.iter().enumerate() {
            assert!(close(s.start, want[i], 1e-12), "joint {i} start");
            assert!(close(s.end, want[i + 1], 1e-12), "joint {i} end");
        }
    }
}

#[test]
fn extended_arm_cells_match_dense_sampling() {
    let m = RobotModel::planar(&[1.0, 1.0], 0.0).unwrap();
    let g = VoxelGrid::new(&[-2.5, -2.5], 0.1, &[50, 50]).unwrap();
    let got: VoxelSet = occupied_cells(&m, &[0.0, 0.0], &g).unwrap().into_iter().collect();
    let (must, may) = sampled_capsule_cells(&m, &[0.0, 0.0], &g, 0.001);
    assert!(must.is_subset(&got));
    assert!(got.is_subset(&may));
    // rows y = ±0.05 along x ∈ [0, 2] plus the corner ties at both ends
    assert!(got.iter().all(|&c| (g.center(c)[1].abs() - 0.05).abs() < 1e-9));
}

#[test]
fn inflation_is_monotone() {
    let g = VoxelGrid::new(&[-2.0, -2.0], 0.1, &[40, 40]).unwrap();
    let bare = RobotModel::planar(&[1.0, 0.8], 0.0).unwrap();
    let fat = RobotModel::planar(&[1.0, 0.8], 0.05).unwrap();
    let mut r = common::rng(2);
    for _ in 0..100 {
        let q = [
            rand::Rng::gen_range(&mut r, -PI..PI),
            rand::Rng::gen_range(&mut r, -PI..PI),
        ];
        let a: VoxelSet = occupied_cells(&bare, &q, &g).unwrap().into_iter().collect();
        let b: VoxelSet = occupied_cells(&fat, &q, &g).unwrap().into_iter().collect();
        assert!(!a.is_empty());
        assert!(a.is_subset(&b));
    }
}

#[test]
fn interpolate_examples() {
    assert_eq!(interpolate(&[0.3, 0.1], &[0.3, 0.1], 0.5).unwrap().len(), 1);
    let pts = interpolate(&[0.0, 0.0], &[1.0, 0.0], 0.5).unwrap();
    let pts: Vec<Vec<f64>> = pts.into_iter().map(|q| q.0).collect();
    assert_eq!(pts, vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![1.0, 0.0]]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn planar_matches_transform_chain(
        lengths in prop::collection::vec(0.1f64..2.0, 2..5),
        seed in any::<u64>(),
    ) {
        let m = RobotModel::planar(&lengths, 0.05).unwrap();
        let mut r = common::rng(seed);
        let q: Vec<f64> = lengths.iter().map(|_| rand::Rng::gen_range(&mut r, -PI..PI)).collect();
        let segs = forward_kinematics(&m, &q).unwrap();
        let want = planar_joints_oracle(&lengths, &q);
        for (i, s) in segs.iter().enumerate() {
            prop_assert!(close(s.end, [want[i + 1][0], want[i + 1][1], 0.0], 1e-12));
        }
    }

    #[test]
    fn rasterization_brackets_dense_sampling(q0 in -PI..PI, q1 in -PI..PI, radius in 0.0f64..0.2) {
        let m = RobotModel::planar(&[1.0, 0.8], radius).unwrap();
        let g = VoxelGrid::new(&[-2.0, -2.0], 0.1, &[40, 40]).unwrap();
        let got: VoxelSet = occupied_cells(&m, &[q0, q1], &g).unwrap().into_iter().collect();
        let (must, may) = sampled_capsule_cells(&m, &[q0, q1], &g, 0.002);
        prop_assert!(must.is_subset(&got));
        prop_assert!(got.is_subset(&may));
    }

    #[test]
    fn interpolation_stays_on_segment(
        a in prop::collection::vec(-3.0f64..3.0, 3),
        b in prop::collection::vec(-3.0f64..3.0, 3),
        step in 0.01f64..1.0,
    ) {
        let pts = interpolate(&a, &b, step).unwrap();
        prop_assert_eq!(&pts[0][..], &a[..]);
        prop_assert_eq!(&pts[pts.len() - 1][..], &b[..]);
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| y - x).collect();
        let dd: f64 = d.iter().map(|x| x * x).sum();
        for w in pts.windows(2) {
            prop_assert!(w[0].iter().zip(&w[1][..]).all(|(x, y)| (y - x).abs() <= step + 1e-12));
        }
        for p in &pts {
            let t = if dd == 0.0 { 0.0 } else { p.iter().zip(&a).zip(&d).map(|((p, a), d)| (p - a) * d).sum::<f64>() / dd };
            let resid = p.iter().zip(&a).zip(&d).map(|((p, a), d)| (p - a - t * d).abs()).fold(0.0, f64::max);
            prop_assert!(resid < 1e-12);
        }
    }
}
