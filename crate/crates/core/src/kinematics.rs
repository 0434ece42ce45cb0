//! Serial-manipulator forward kinematics and conservative task-space rasterization.
//!
//! Links are capsules: a segment between consecutive joint origins inflated by a
//! per-link radius. Planar arms rotate every joint about `z`; spatial arms follow
//! the standard Denavit–Hartenberg convention
//! `T_i = Rz(q_i + theta_offset) · Tz(d) · Tx(a) · Rx(alpha)`.

use std::f64::consts::PI;
use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::grid::{VoxelGrid, VoxelId};

/// Inflation radius used when a scenario does not give one.
pub const DEFAULT_INFLATION: f64 = 0.05;

/// A point in configuration space, one angle (radians) per joint.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointConfig(pub Vec<f64>);

impl JointConfig {
    pub fn new(angles: impl Into<Vec<f64>>) -> Self {
        JointConfig(angles.into())
    }

    pub fn dof(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for JointConfig {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for JointConfig {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for JointConfig {
    fn from(v: Vec<f64>) -> Self {
        JointConfig(v)
    }
}

impl From<&[f64]> for JointConfig {
    fn from(v: &[f64]) -> Self {
        JointConfig(v.to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RobotMode {
    Planar,
    Spatial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DhParams {
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    #[serde(default)]
    pub theta_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    /// Segment length in meters. Derived from `dh` for spatial links.
    #[serde(default)]
    pub length: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dh: Option<DhParams>,
}

fn default_radius() -> f64 {
    DEFAULT_INFLATION
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLimit {
    pub min: f64,
    pub max: f64,
}

impl JointLimit {
    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }
}

impl Default for JointLimit {
    fn default() -> Self {
        JointLimit { min: -PI, max: PI }
    }
}

/// Robot geometry: a chain of inflated links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RobotSpec", into = "RobotSpec")]
pub struct RobotModel {
    mode: RobotMode,
    links: Vec<Link>,
    limits: Vec<JointLimit>,
}

#[derive(Serialize, Deserialize)]
struct RobotSpec {
    mode: RobotMode,
    links: Vec<Link>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    joint_limits: Option<Vec<[f64; 2]>>,
}

impl TryFrom<RobotSpec> for RobotModel {
    type Error = Error;

    fn try_from(spec: RobotSpec) -> Result<Self> {
        let limits = spec
            .joint_limits
            .map(|l| l.into_iter().map(|[min, max]| JointLimit { min, max }).collect());
        RobotModel::new(spec.mode, spec.links, limits)
    }
}

impl From<RobotModel> for RobotSpec {
    fn from(m: RobotModel) -> Self {
        RobotSpec {
            mode: m.mode,
            links: m.links,
            joint_limits: Some(m.limits.iter().map(|l| [l.min, l.max]).collect()),
        }
    }
}

impl RobotModel {
    /// Validates the geometry. Missing limits default to `[-π, π]` per joint.
    pub fn new(mode: RobotMode, mut links: Vec<Link>, limits: Option<Vec<JointLimit>>) -> Result<Self> {
        if links.len() < 2 {
            return Err(Error::invalid("a robot needs at least 2 joints"));
        }
        for (i, link) in links.iter_mut().enumerate() {
            if mode == RobotMode::Spatial {
                let dh = link
                    .dh
                    .ok_or_else(|| Error::invalid(format!("spatial link {i} has no DH parameters")))?;
                link.length = dh.a.hypot(dh.d);
            }
            if !(link.length.is_finite() && link.length > 0.0) {
                return Err(Error::invalid(format!("link {i} length must be > 0")));
            }
            if !(link.radius.is_finite() && link.radius >= 0.0) {
                return Err(Error::invalid(format!("link {i} radius must be >= 0")));
            }
        }
        let limits = limits.unwrap_or_else(|| vec![JointLimit::default(); links.len()]);
        if limits.len() != links.len() {
            return Err(Error::DimensionMismatch {
                expected: links.len(),
                actual: limits.len(),
            });
        }
        if let Some(i) = limits.iter().position(|l| !(l.min < l.max)) {
            return Err(Error::invalid(format!("joint {i} limits must satisfy min < max")));
        }
        Ok(RobotModel { mode, links, limits })
    }

    /// Planar arm with uniform inflation and default limits.
    pub fn planar(lengths: &[f64], radius: f64) -> Result<Self> {
        let links = lengths
            .iter()
            .map(|&length| Link {
                length,
                radius,
                dh: None,
            })
            .collect();
        RobotModel::new(RobotMode::Planar, links, None)
    }

    /// Spatial arm from a DH table with uniform inflation and default limits.
    pub fn spatial(dh: &[DhParams], radius: f64) -> Result<Self> {
        let links = dh
            .iter()
            .map(|&p| Link {
                length: 0.0,
                radius,
                dh: Some(p),
            })
            .collect();
        RobotModel::new(RobotMode::Spatial, links, None)
    }

    /// Universal Robots UR3e nominal DH table.
    pub fn ur3e(radius: f64) -> Result<Self> {
        let h = std::f64::consts::FRAC_PI_2;
        let dh = [
            DhParams {
                a: 0.0,
                alpha: h,
                d: 0.15185,
                theta_offset: 0.0,
            },
            DhParams {
                a: -0.24355,
                alpha: 0.0,
                d: 0.0,
                theta_offset: 0.0,
            },
            DhParams {
                a: -0.2132,
                alpha: 0.0,
                d: 0.0,
                theta_offset: 0.0,
            },
            DhParams {
                a: 0.0,
                alpha: h,
                d: 0.13105,
                theta_offset: 0.0,
            },
            DhParams {
                a: 0.0,
                alpha: -h,
                d: 0.08535,
                theta_offset: 0.0,
            },
            DhParams {
                a: 0.0,
                alpha: 0.0,
                d: 0.0921,
                theta_offset: 0.0,
            },
        ];
        RobotModel::spatial(&dh, radius)
    }

    pub fn with_limits(mut self, limits: Vec<JointLimit>) -> Result<Self> {
        self.limits = limits;
        RobotModel::new(self.mode, self.links, Some(self.limits))
    }

    /// Same chain with every link inflated by `radius`; `0.0` gives the bare segments.
    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        let mut links = self.links.clone();
        for l in &mut links {
            l.radius = radius;
        }
        RobotModel::new(self.mode, links, Some(self.limits.clone()))
    }

    pub fn mode(&self) -> RobotMode {
        self.mode
    }

    pub fn joint_count(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn limits(&self) -> &[JointLimit] {
        &self.limits
    }

    /// Largest distance from the base any inflated link surface can reach.
    pub fn reach(&self) -> f64 {
        let total: f64 = self.links.iter().map(|l| l.length).sum();
        let inflation = self.links.iter().map(|l| l.radius).fold(0.0, f64::max);
        total + inflation
    }

    pub fn check_dimension(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.joint_count() {
            return Err(Error::DimensionMismatch {
                expected: self.joint_count(),
                actual: q.len(),
            });
        }
        Ok(())
    }

    pub fn check_limits(&self, q: &[f64]) -> Result<()> {
        self.check_dimension(q)?;
        for (joint, (&value, limit)) in q.iter().zip(&self.limits).enumerate() {
            if !limit.contains(value) {
                return Err(Error::OutOfLimits {
                    joint,
                    value,
                    min: limit.min,
                    max: limit.max,
                });
            }
        }
        Ok(())
    }

    pub fn within_limits(&self, q: &[f64]) -> bool {
        q.len() == self.joint_count() && q.iter().zip(&self.limits).all(|(&v, l)| l.contains(v))
    }
}

/// An inflated link: all points within `radius` of the segment `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSegment {
    pub start: Point,
    pub end: Point,
    pub radius: f64,
}

impl LinkSegment {
    pub fn distance_to(&self, p: Point) -> f64 {
        geom::point_segment_distance(p, self.start, self.end)
    }
}

/// Rotation (row-major 3×3) plus translation.
#[derive(Clone, Copy)]
struct Frame {
    rot: [[f64; 3]; 3],
    pos: Point,
}

impl Frame {
    const IDENTITY: Frame = Frame {
        rot: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        pos: [0.0; 3],
    };

    fn then_dh(&self, theta: f64, p: &DhParams) -> Frame {
        let (st, ct) = theta.sin_cos();
        let (sa, ca) = p.alpha.sin_cos();
        // local transform Rz(theta) Tz(d) Tx(a) Rx(alpha)
        let local_rot = [[ct, -st * ca, st * sa], [st, ct * ca, -ct * sa], [0.0, sa, ca]];
        let local_pos = [p.a * ct, p.a * st, p.d];
        let mut rot = [[0.0; 3]; 3];
        for (i, row) in rot.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.rot[i][k] * local_rot[k][j]).sum();
            }
        }
        let mut pos = self.pos;
        for (i, v) in pos.iter_mut().enumerate() {
            *v += (0..3).map(|k| self.rot[i][k] * local_pos[k]).sum::<f64>();
        }
        Frame { rot, pos }
    }
}

/// Chained link capsules for configuration `q`; segment `i` starts where `i - 1` ends.
pub fn forward_kinematics(model: &RobotModel, q: &[f64]) -> Result<Vec<LinkSegment>> {
    model.check_dimension(q)?;
    let mut segments = Vec::with_capacity(model.joint_count());
    match model.mode {
        RobotMode::Planar => {
            let mut heading = 0.0;
            let mut at: Point = [0.0; 3];
            for (link, &angle) in model.links.iter().zip(q) {
                heading += angle;
                let end = [
                    at[0] + link.length * heading.cos(),
                    at[1] + link.length * heading.sin(),
                    0.0,
                ];
                segments.push(LinkSegment {
                    start: at,
                    end,
                    radius: link.radius,
                });
                at = end;
            }
        }
        RobotMode::Spatial => {
            let mut frame = Frame::IDENTITY;
            for (link, &angle) in model.links.iter().zip(q) {
                let dh = link.dh.expect("validated spatial link");
                let next = frame.then_dh(angle + dh.theta_offset, &dh);
                segments.push(LinkSegment {
                    start: frame.pos,
                    end: next.pos,
                    radius: link.radius,
                });
                frame = next;
            }
        }
    }
    Ok(segments)
}

/// End-effector position (end of the last link).
pub fn end_effector(model: &RobotModel, q: &[f64]) -> Result<Point> {
    Ok(forward_kinematics(model, q)?.last().expect("at least two links").end)
}

/// Grid cells a capsule may touch: every cell whose centre lies within
/// `radius + half cell diagonal` of the segment. Appends unsorted ids to `out`.
pub fn rasterize_capsule(seg: &LinkSegment, grid: &VoxelGrid, out: &mut Vec<VoxelId>) {
    let reach = seg.radius + grid.half_diagonal();
    let mut ranges = [(0usize, 0usize); 3];
    for (axis, range) in ranges.iter_mut().enumerate() {
        let lo = seg.start[axis].min(seg.end[axis]) - reach;
        let hi = seg.start[axis].max(seg.end[axis]) + reach;
        match grid.index_range(axis, lo, hi) {
            Some(r) => *range = r,
            None => return,
        }
    }
    for z in ranges[2].0..=ranges[2].1 {
        for y in ranges[1].0..=ranges[1].1 {
            for x in ranges[0].0..=ranges[0].1 {
                let cell = [x, y, z];
                if seg.distance_to(grid.center_of(cell)) <= reach {
                    out.push(grid.id(cell));
                }
            }
        }
    }
}

/// Sorted, de-duplicated ids of all cells the inflated robot may occupy at `q`.
pub fn occupied_cells(model: &RobotModel, q: &[f64], grid: &VoxelGrid) -> Result<Vec<VoxelId>> {
    model.check_limits(q)?;
    let mut cells = Vec::new();
    for seg in forward_kinematics(model, q)? {
        rasterize_capsule(&seg, grid, &mut cells);
    }
    cells.sort_unstable();
    cells.dedup();
    Ok(cells)
}

/// Linear joint-space interpolation including both endpoints, with consecutive
/// configurations at most `max_step` apart in the infinity norm.
pub fn interpolate(a: &[f64], b: &[f64], max_step: f64) -> Result<Vec<JointConfig>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if !(max_step.is_finite() && max_step > 0.0) {
        return Err(Error::invalid(format!(
            "interpolation step must be > 0, got {max_step}"
        )));
    }
    let span = a.iter().zip(b).map(|(x, y)| (y - x).abs()).fold(0.0, f64::max);
    if span == 0.0 {
        return Ok(vec![JointConfig::from(a)]);
    }
    let steps = ((span / max_step) - 1e-12).ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        if k == steps {
            out.push(JointConfig::from(b));
        } else {
            let t = k as f64 / steps as f64;
            out.push(a.iter().zip(b).map(|(x, y)| x + (y - x) * t).collect::<Vec<_>>().into());
        }
    }
    Ok(out)
}
