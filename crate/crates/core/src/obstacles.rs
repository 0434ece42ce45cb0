//! Geometric obstacles with optional motion timelines, and their voxelization.

use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::grid::{VoxelGrid, VoxelId};

/// Sorted set of occupied cells.
pub type VoxelSet = BTreeSet<VoxelId>;

/// Points are written as 2- or 3-element arrays; a missing `z` is 0.
pub(crate) mod point_serde {
    use super::*;

    pub fn serialize<S: Serializer>(p: &Point, s: S) -> std::result::Result<S::Ok, S::Error> {
        if p[2] == 0.0 {
            p[..2].serialize(s)
        } else {
            p.serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Point, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        match v.as_slice() {
            [x, y] => Ok([*x, *y, 0.0]),
            [x, y, z] => Ok([*x, *y, *z]),
            _ => Err(serde::de::Error::custom(format!(
                "expected 2 or 3 coordinates, got {}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Shape {
    /// Axis-aligned box given by its half extents.
    Box {
        #[serde(with = "point_serde")]
        half_extents: Point,
    },
    Sphere {
        radius: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    pub t: f64,
    #[serde(with = "point_serde")]
    pub center: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub id: u32,
    #[serde(flatten)]
    pub shape: Shape,
    /// Pose used when there is no timeline.
    #[serde(with = "point_serde")]
    pub center: Point,
    /// Keyframes with strictly increasing times; poses between them are
    /// interpolated linearly and held constant outside.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub timeline: Vec<Keyframe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub appear_at: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vanish_at: Option<f64>,
}

impl Obstacle {
    pub fn new(id: u32, shape: Shape, center: Point) -> Self {
        Obstacle {
            id,
            shape,
            center,
            timeline: Vec::new(),
            appear_at: None,
            vanish_at: None,
        }
    }

    pub fn sphere(id: u32, center: Point, radius: f64) -> Self {
        Obstacle::new(id, Shape::Sphere { radius }, center)
    }

    pub fn cuboid(id: u32, center: Point, half_extents: Point) -> Self {
        Obstacle::new(id, Shape::Box { half_extents }, center)
    }

    pub fn with_timeline(mut self, timeline: Vec<Keyframe>) -> Self {
        self.timeline = timeline;
        self
    }

    pub fn active_between(mut self, appear_at: Option<f64>, vanish_at: Option<f64>) -> Self {
        self.appear_at = appear_at;
        self.vanish_at = vanish_at;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.timeline.windows(2).any(|w| !(w[0].t < w[1].t)) {
            return Err(Error::invalid(format!(
                "obstacle {} timeline timestamps must be strictly increasing",
                self.id
            )));
        }
        match self.shape {
            Shape::Box { half_extents } if half_extents.iter().any(|h| !(*h >= 0.0)) => {
                Err(Error::invalid(format!("obstacle {} has negative extents", self.id)))
            }
            Shape::Sphere { radius } if !(radius >= 0.0) => {
                Err(Error::invalid(format!("obstacle {} has negative radius", self.id)))
            }
            _ => Ok(()),
        }
    }

    pub fn is_active(&self, t: f64) -> bool {
        self.appear_at.is_none_or(|a| t >= a) && self.vanish_at.is_none_or(|v| t < v)
    }

    /// Centre at time `t`.
    pub fn center_at(&self, t: f64) -> Point {
        let tl = &self.timeline;
        match tl.len() {
            0 => self.center,
            _ if t <= tl[0].t => tl[0].center,
            _ if t >= tl[tl.len() - 1].t => tl[tl.len() - 1].center,
            _ => {
                let i = tl.partition_point(|k| k.t <= t);
                let (a, b) = (&tl[i - 1], &tl[i]);
                geom::lerp(a.center, b.center, (t - a.t) / (b.t - a.t))
            }
        }
    }

    /// Whether `p` lies inside the obstacle centred at `center`; only the
    /// first `axes` coordinates are compared.
    pub fn contains(&self, center: Point, p: Point, axes: usize) -> bool {
        match self.shape {
            Shape::Box { half_extents } => (0..axes).all(|a| (p[a] - center[a]).abs() <= half_extents[a]),
            Shape::Sphere { radius } => {
                let d2: f64 = (0..axes).map(|a| (p[a] - center[a]).powi(2)).sum();
                d2 <= radius * radius
            }
        }
    }

    fn half_extents(&self) -> Point {
        match self.shape {
            Shape::Box { half_extents } => half_extents,
            Shape::Sphere { radius } => [radius; 3],
        }
    }

    /// Appends ids of cells whose centre lies inside the obstacle at `center`.
    pub fn rasterize(&self, center: Point, grid: &VoxelGrid, out: &mut Vec<VoxelId>) {
        let axes = grid.axes();
        let half = self.half_extents();
        let mut ranges = [(0usize, 0usize); 3];
        for (axis, range) in ranges.iter_mut().enumerate() {
            if axis >= axes {
                continue;
            }
            match grid.index_range(axis, center[axis] - half[axis], center[axis] + half[axis]) {
                Some(r) => *range = r,
                None => return,
            }
        }
        for z in ranges[2].0..=ranges[2].1 {
            for y in ranges[1].0..=ranges[1].1 {
                for x in ranges[0].0..=ranges[0].1 {
                    let cell = [x, y, z];
                    if self.contains(center, grid.center_of(cell), axes) {
                        out.push(grid.id(cell));
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObstacleSet {
    pub obstacles: Vec<Obstacle>,
}

impl ObstacleSet {
    pub fn new(obstacles: Vec<Obstacle>) -> Result<Self> {
        let set = ObstacleSet { obstacles };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        for o in &self.obstacles {
            o.validate()?;
            if !ids.insert(o.id) {
                return Err(Error::invalid(format!("duplicate obstacle id {}", o.id)));
            }
        }
        Ok(())
    }

    pub fn get(&self, id: u32) -> Option<&Obstacle> {
        self.obstacles.iter().find(|o| o.id == id)
    }

    pub fn get_mut(&mut self, id: u32) -> Option<&mut Obstacle> {
        self.obstacles.iter_mut().find(|o| o.id == id)
    }

    pub fn len(&self) -> usize {
        self.obstacles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obstacles.is_empty()
    }
}

/// Cells whose centres lie inside any obstacle active at time `t`.
pub fn voxelize_obstacles(obs: &ObstacleSet, t: f64, grid: &VoxelGrid) -> VoxelSet {
    let mut cells = Vec::new();
    for o in obs.obstacles.iter().filter(|o| o.is_active(t)) {
        o.rasterize(o.center_at(t), grid, &mut cells);
    }
    cells.into_iter().collect()
}
