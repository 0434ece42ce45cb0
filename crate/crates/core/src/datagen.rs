//! Synthetic pick-and-place training trajectories.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{rrt_connect, SamplerParams, ValidityChecker, VoxelValidity};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::grid::VoxelGrid;
use crate::kinematics::{interpolate, JointConfig, JointLimit, RobotModel};
use crate::obstacles::VoxelSet;

/// Spacing of the densified trajectories (radians, infinity norm).
pub const DENSIFY_STEP: f64 = 0.05;
/// Redraws allowed per trajectory before giving up.
pub const MAX_RETRIES: usize = 20;

/// Axis-aligned box in joint space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl JointBox {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        let b = JointBox { min, max };
        b.validate()?;
        Ok(b)
    }

    pub fn point(q: &[f64]) -> Self {
        JointBox {
            min: q.to_vec(),
            max: q.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min.len() != self.max.len() {
            return Err(Error::DimensionMismatch {
                expected: self.min.len(),
                actual: self.max.len(),
            });
        }
        if self.min.iter().zip(&self.max).any(|(a, b)| !(a <= b)) {
            return Err(Error::invalid("joint box needs min <= max on every axis"));
        }
        Ok(())
    }

    pub fn dof(&self) -> usize {
        self.min.len()
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        q.len() == self.dof()
            && q.iter()
                .enumerate()
                .all(|(i, v)| *v >= self.min[i] && *v <= self.max[i])
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.min
            .iter()
            .zip(&self.max)
            .map(|(&a, &b)| if a == b { a } else { rng.gen_range(a..=b) })
            .collect()
    }
}

/// Collision checking with some joints held at a fixed value.
struct Pinned<'a> {
    inner: VoxelValidity<'a>,
    limits: Vec<JointLimit>,
}

impl ValidityChecker for Pinned<'_> {
    fn is_valid(&self, q: &[f64]) -> bool {
        q.iter().zip(&self.limits).all(|(v, l)| l.contains(*v)) && self.inner.is_valid(q)
    }

    fn limits(&self) -> &[JointLimit] {
        &self.limits
    }
}

/// Joint limits with every joint that all regions fix to one common value
/// collapsed onto that value.
fn pinned_limits(model: &RobotModel, regions: &[JointBox]) -> Vec<JointLimit> {
    let mut limits = model.limits().to_vec();
    for (j, l) in limits.iter_mut().enumerate() {
        let v = regions[0].min[j];
        if regions.iter().all(|r| r.min[j] == v && r.max[j] == v) {
            *l = JointLimit { min: v, max: v };
        }
    }
    limits
}

fn one_trajectory(
    model: &RobotModel,
    grid: &VoxelGrid,
    regions: &[JointBox],
    seed: u64,
    index: usize,
) -> Result<Vec<JointConfig>> {
    let empty = VoxelSet::new();
    let validity = Pinned {
        inner: VoxelValidity {
            model,
            grid,
            occupied: &empty,
        },
        limits: pinned_limits(model, regions),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    for _ in 0..MAX_RETRIES {
        let from = rng.gen_range(0..regions.len());
        let to = if regions.len() > 1 {
            (from + rng.gen_range(1..regions.len())) % regions.len()
        } else {
            from
        };
        let start = regions[from].draw(&mut rng);
        let goal = regions[to].draw(&mut rng);
        if !model.within_limits(&start) || !model.within_limits(&goal) {
            continue;
        }
        let params = SamplerParams {
            seed: rng.gen(),
            ..SamplerParams::default()
        };
        let Some(path) = rrt_connect(&start, &goal, &validity, &params)?.path else {
            continue;
        };
        let mut dense = vec![path[0].clone()];
        for w in path.windows(2) {
            dense.extend(interpolate(&w[0], &w[1], DENSIFY_STEP)?.into_iter().skip(1));
        }
        if dense.len() == 1 {
            dense.push(dense[0].clone());
        }
        return Ok(dense);
    }
    Err(Error::invalid(format!(
        "trajectory {index}: no valid start/goal pair after {MAX_RETRIES} draws"
    )))
}

/// `n_traj` reach trajectories between start and goal configurations drawn
/// from distinct region boxes (the same box if only one is given), planned by
/// RRT-Connect in obstacle-free space and densified to [`DENSIFY_STEP`].
/// A joint that every region fixes to the same value stays at that value
/// along every trajectory.
///
/// Trajectory `i` depends only on `(seed, i)`, so the output is deterministic
/// regardless of thread scheduling.
pub fn generate_pick_place(
    model: &RobotModel,
    grid: &VoxelGrid,
    regions: &[JointBox],
    n_traj: usize,
    seed: u64,
) -> Result<Dataset> {
    if n_traj == 0 {
        return Err(Error::invalid("n_traj must be at least 1"));
    }
    if regions.is_empty() {
        return Err(Error::invalid("at least one region is required"));
    }
    for r in regions {
        r.validate()?;
        model.check_dimension(&r.min)?;
    }
    let trajectories = (0..n_traj)
        .into_par_iter()
        .map(|i| one_trajectory(model, grid, regions, seed, i))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(model.joint_count(), trajectories)
}
