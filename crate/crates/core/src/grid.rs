//! Task-space discretization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;

/// Linear index of a cell: `x + nx * (y + ny * z)`.
pub type VoxelId = u32;

/// Axis-aligned regular grid with 2 or 3 axes.
///
/// A planar grid has `dims[2] == 1` and its single layer is centred on `z = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct VoxelGrid {
    origin: Point,
    resolution: f64,
    dims: [usize; 3],
    axes: usize,
}

#[derive(Serialize, Deserialize)]
struct GridSpec {
    origin: Vec<f64>,
    resolution: f64,
    dims: Vec<usize>,
}

impl TryFrom<GridSpec> for VoxelGrid {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        VoxelGrid::new(&spec.origin, spec.resolution, &spec.dims)
    }
}

impl From<VoxelGrid> for GridSpec {
    fn from(grid: VoxelGrid) -> Self {
        GridSpec {
            origin: grid.origin[..grid.axes].to_vec(),
            resolution: grid.resolution,
            dims: grid.dims[..grid.axes].to_vec(),
        }
    }
}

impl VoxelGrid {
    /// `origin` is the minimum corner of cell 0; `origin.len()` must equal `dims.len()` (2 or 3).
    pub fn new(origin: &[f64], resolution: f64, dims: &[usize]) -> Result<Self> {
        let axes = dims.len();
        if !(2..=3).contains(&axes) || origin.len() != axes {
            return Err(Error::invalid(format!(
                "grid needs 2 or 3 axes with matching origin, got dims {dims:?} origin {origin:?}"
            )));
        }
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::invalid(format!("grid resolution must be > 0, got {resolution}")));
        }
        if dims.contains(&0) {
            return Err(Error::invalid("grid dims must be >= 1 on every axis"));
        }
        let count = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        if count.is_none_or(|c| c > u32::MAX as usize) {
            return Err(Error::invalid("grid has too many cells for 32-bit voxel ids"));
        }
        let mut o = [0.0; 3];
        let mut d = [1usize; 3];
        o[..axes].copy_from_slice(origin);
        d[..axes].copy_from_slice(dims);
        if axes == 2 {
            // single layer straddling the plane of motion
            o[2] = -resolution / 2.0;
        }
        Ok(VoxelGrid {
            origin: o,
            resolution,
            dims: d,
            axes,
        })
    }

    /// Square/cubic grid centred on `center` whose half-width is at least `half_extent`.
    pub fn centered(center: &[f64], half_extent: f64, resolution: f64) -> Result<Self> {
        let cells = ((2.0 * half_extent) / resolution).ceil().max(1.0) as usize;
        let origin: Vec<f64> = center.iter().map(|c| c - cells as f64 * resolution / 2.0).collect();
        VoxelGrid::new(&origin, resolution, &vec![cells; center.len()])
    }

    pub fn axes(&self) -> usize {
        self.axes
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn cell_count(&self) -> usize {
        self.dims.iter().product()
    }

    /// Upper corner of the grid volume.
    pub fn max_corner(&self) -> Point {
        [
            self.origin[0] + self.dims[0] as f64 * self.resolution,
            self.origin[1] + self.dims[1] as f64 * self.resolution,
            self.origin[2] + self.dims[2] as f64 * self.resolution,
        ]
    }

    /// Half of the cell diagonal (in the grid's own dimensionality).
    pub fn half_diagonal(&self) -> f64 {
        self.resolution * (self.axes as f64).sqrt() / 2.0
    }

    #[inline]
    pub fn id(&self, cell: [usize; 3]) -> VoxelId {
        (cell[0] + self.dims[0] * (cell[1] + self.dims[1] * cell[2])) as VoxelId
    }

    #[inline]
    pub fn cell(&self, id: VoxelId) -> [usize; 3] {
        let id = id as usize;
        let x = id % self.dims[0];
        let rest = id / self.dims[0];
        [x, rest % self.dims[1], rest / self.dims[1]]
    }

    pub fn contains_id(&self, id: VoxelId) -> bool {
        (id as usize) < self.cell_count()
    }

    #[inline]
    pub fn center_of(&self, cell: [usize; 3]) -> Point {
        let mut c = [0.0; 3];
        for (axis, value) in c.iter_mut().enumerate() {
            *value = self.origin[axis] + (cell[axis] as f64 + 0.5) * self.resolution;
        }
        c
    }

    pub fn center(&self, id: VoxelId) -> Point {
        self.center_of(self.cell(id))
    }

    /// Cell containing `p`, if inside the grid volume.
    pub fn locate(&self, p: Point) -> Option<[usize; 3]> {
        let mut cell = [0usize; 3];
        for axis in 0..3 {
            let f = ((p[axis] - self.origin[axis]) / self.resolution).floor();
            if f < 0.0 || f >= self.dims[axis] as f64 {
                return None;
            }
            cell[axis] = f as usize;
        }
        Some(cell)
    }

    /// Inclusive index range of cells overlapping `[lo, hi]` along `axis`, clipped to the grid.
    pub fn index_range(&self, axis: usize, lo: f64, hi: f64) -> Option<(usize, usize)> {
        let n = self.dims[axis] as f64;
        let a = ((lo - self.origin[axis]) / self.resolution).floor().max(0.0);
        let b = ((hi - self.origin[axis]) / self.resolution).floor().min(n - 1.0);
        if a > b || b < 0.0 || a >= n {
            None
        } else {
            Some((a as usize, b as usize))
        }
    }

    /// Whether the axis-aligned box `[lo, hi]` lies inside the grid volume
    /// (only the grid's own axes are compared).
    pub fn covers(&self, lo: Point, hi: Point) -> bool {
        let max = self.max_corner();
        (0..self.axes).all(|a| lo[a] >= self.origin[a] && hi[a] <= max[a])
    }
}
