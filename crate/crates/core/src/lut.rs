//! Bidirectional voxel ↔ neuron lookup table.
//!
//! `forward[n]` lists the cells the inflated robot may occupy at neuron `n`'s
//! configuration; `inverse[v]` lists every neuron covering cell `v`. Both are
//! sorted id arrays behind offset tables (CSR layout), so memory follows the
//! actual coverage. Turning an obstacle voxel set into blocked neurons is a
//! union over `inverse`.
//!
//! File layout (little-endian):
//!
//! ```text
//! magic "CGLT" | version u16 | axes u8
//! origin f64[3] | resolution f64 | dims u32[3]
//! neurons u32 | network fingerprint [u8; 32]
//! forward:  offsets u32[neurons + 1] | voxel ids u32[offsets[neurons]]
//! inverse:  offsets u32[cells + 1]   | neuron ids u32[offsets[cells]]
//! ```

use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{VoxelGrid, VoxelId};
use crate::io::{write_atomic, Reader, Writer};
use crate::kinematics::{occupied_cells, RobotModel};
use crate::obstacles::VoxelSet;
use crate::sonn::{Network, NeuronId, NeuronSet};

pub const MAGIC: [u8; 4] = *b"CGLT";
pub const FORMAT_VERSION: u16 = 1;

/// Side information gathered while building a table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BuildReport {
    /// Neurons whose weights violate the joint limits; they get empty coverage.
    pub out_of_limits: Vec<NeuronId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LookupTable {
    grid: VoxelGrid,
    fingerprint: [u8; 32],
    forward_offsets: Vec<u32>,
    forward: Vec<u32>,
    inverse_offsets: Vec<u32>,
    inverse: Vec<u32>,
    report: BuildReport,
}

fn csr_offsets(lens: impl Iterator<Item = usize>) -> Vec<u32> {
    let mut offsets = vec![0u32];
    let mut acc = 0usize;
    for l in lens {
        acc += l;
        offsets.push(u32::try_from(acc).expect("lookup table exceeds 32-bit offsets"));
    }
    offsets
}

/// Associates every neuron with the cells its configuration covers.
///
/// The grid must contain the robot's whole reach around the base.
pub fn build_lookup(net: &Network, model: &RobotModel, grid: &VoxelGrid) -> Result<LookupTable> {
    if net.dim() != model.joint_count() {
        return Err(Error::DimensionMismatch {
            expected: model.joint_count(),
            actual: net.dim(),
        });
    }
    let reach = model.reach();
    if !grid.covers([-reach; 3], [reach; 3]) {
        return Err(Error::invalid(format!(
            "grid does not cover the robot reach of {reach:.3} m around the base"
        )));
    }

    let coverage: Vec<Option<Vec<VoxelId>>> = (0..net.len())
        .into_par_iter()
        .map(|n| occupied_cells(model, net.weight(n), grid).ok())
        .collect();

    let report = BuildReport {
        out_of_limits: coverage
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_none())
            .map(|(n, _)| n)
            .collect(),
    };
    let forward_offsets = csr_offsets(coverage.iter().map(|c| c.as_ref().map_or(0, Vec::len)));
    let forward: Vec<u32> = coverage.into_iter().flatten().flatten().collect();

    // transpose by counting sort; neuron ids come out ascending per cell
    let cells = grid.cell_count();
    let mut counts = vec![0usize; cells];
    for &v in &forward {
        counts[v as usize] += 1;
    }
    let inverse_offsets = csr_offsets(counts.iter().copied());
    let mut cursor: Vec<usize> = inverse_offsets[..cells].iter().map(|&o| o as usize).collect();
    let mut inverse = vec![0u32; forward.len()];
    for n in 0..net.len() {
        let (a, b) = (forward_offsets[n] as usize, forward_offsets[n + 1] as usize);
        for &v in &forward[a..b] {
            inverse[cursor[v as usize]] = n as u32;
            cursor[v as usize] += 1;
        }
    }

    Ok(LookupTable {
        grid: grid.clone(),
        fingerprint: net.fingerprint(),
        forward_offsets,
        forward,
        inverse_offsets,
        inverse,
        report,
    })
}

impl LookupTable {
    pub fn grid(&self) -> &VoxelGrid {
        &self.grid
    }

    pub fn fingerprint(&self) -> &[u8; 32] {
        &self.fingerprint
    }

    pub fn neuron_count(&self) -> usize {
        self.forward_offsets.len() - 1
    }

    pub fn report(&self) -> &BuildReport {
        &self.report
    }

    /// Cells covered by neuron `n`, ascending.
    pub fn forward(&self, n: NeuronId) -> &[VoxelId] {
        &self.forward[self.forward_offsets[n] as usize..self.forward_offsets[n + 1] as usize]
    }

    /// Neurons covering cell `v`, ascending.
    pub fn inverse(&self, v: VoxelId) -> &[u32] {
        let v = v as usize;
        &self.inverse[self.inverse_offsets[v] as usize..self.inverse_offsets[v + 1] as usize]
    }

    /// Total number of (neuron, cell) associations.
    pub fn association_count(&self) -> usize {
        self.forward.len()
    }

    /// Errors unless the table was built from `net`.
    pub fn check_network(&self, net: &Network) -> Result<()> {
        if net.len() != self.neuron_count() || net.fingerprint() != self.fingerprint {
            return Err(Error::FingerprintMismatch);
        }
        Ok(())
    }

    /// Neurons whose coverage meets any cell in `occupied`.
    pub fn blocked_neurons(&self, occupied: &VoxelSet) -> Result<NeuronSet> {
        let mut blocked = NeuronSet::new(self.neuron_count());
        for &v in occupied {
            if !self.grid.contains_id(v) {
                return Err(Error::invalid(format!("voxel id {v} is outside the lookup grid")));
            }
            for &n in self.inverse(v) {
                blocked.insert(n as NeuronId);
            }
        }
        Ok(blocked)
    }

    /// Histogram `h[k]` = number of neurons covering exactly `k` cells.
    pub fn coverage_histogram(&self) -> Vec<usize> {
        let mut hist = Vec::new();
        for n in 0..self.neuron_count() {
            let k = self.forward(n).len();
            if hist.len() <= k {
                hist.resize(k + 1, 0);
            }
            hist[k] += 1;
        }
        hist
    }

    /// Exhaustive structural check: sorted unique lists, in-range ids, and
    /// `n ∈ inverse[v] ⇔ v ∈ forward[n]`.
    pub fn verify(&self) -> Result<()> {
        let cells = self.grid.cell_count();
        let n = self.neuron_count();
        if self.inverse_offsets.len() != cells + 1 {
            return Err(Error::Format("inverse section does not match the grid".into()));
        }
        if self.forward.len() != self.inverse.len() {
            return Err(Error::Format(format!(
                "forward holds {} associations, inverse {}",
                self.forward.len(),
                self.inverse.len()
            )));
        }
        let monotone = |o: &[u32], total: usize| {
            o[0] == 0 && o.windows(2).all(|w| w[0] <= w[1]) && o[o.len() - 1] as usize == total
        };
        if !monotone(&self.forward_offsets, self.forward.len()) || !monotone(&self.inverse_offsets, self.inverse.len())
        {
            return Err(Error::Format("offset tables are not monotone".into()));
        }
        for m in 0..n {
            let list = self.forward(m);
            if list.windows(2).any(|w| w[0] >= w[1]) || list.iter().any(|&v| v as usize >= cells) {
                return Err(Error::Format(format!("forward list of neuron {m} is malformed")));
            }
            if let Some(&v) = list
                .iter()
                .find(|&&v| self.inverse(v).binary_search(&(m as u32)).is_err())
            {
                return Err(Error::Format(format!(
                    "neuron {m} covers cell {v} but is missing from its inverse list"
                )));
            }
        }
        for v in 0..cells as VoxelId {
            let list = self.inverse(v);
            if list.windows(2).any(|w| w[0] >= w[1]) || list.iter().any(|&m| m as usize >= n) {
                return Err(Error::Format(format!("inverse list of cell {v} is malformed")));
            }
        }
        // equal totals plus forward ⊆ inverse gives equality
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.bytes(&MAGIC);
        w.u16(FORMAT_VERSION);
        w.u8(self.grid.axes() as u8);
        for v in self.grid.origin() {
            w.f64(v);
        }
        w.f64(self.grid.resolution());
        for d in self.grid.dims() {
            w.len(d);
        }
        w.len(self.neuron_count());
        w.bytes(&self.fingerprint);
        for section in [
            &self.forward_offsets,
            &self.forward,
            &self.inverse_offsets,
            &self.inverse,
        ] {
            for &v in section.iter() {
                w.u32(v);
            }
        }
        w.buf
    }

    /// Parses and verifies a table. The build report is not persisted.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, "lookup table");
        if r.bytes::<4>()? != MAGIC {
            return Err(Error::Format("not a lookup table file (bad magic)".into()));
        }
        let version = r.u16()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported lookup table version {version}")));
        }
        let axes = r.u8()? as usize;
        if !(2..=3).contains(&axes) {
            return Err(r.error(format!("bad axis count {axes}")));
        }
        let origin = [r.f64()?, r.f64()?, r.f64()?];
        let resolution = r.f64()?;
        let dims = [r.u32()? as usize, r.u32()? as usize, r.u32()? as usize];
        let grid = VoxelGrid::new(&origin[..axes], resolution, &dims[..axes])?;
        if grid.origin() != origin || grid.dims() != dims {
            return Err(r.error("grid header is inconsistent"));
        }
        let n = r.u32()? as usize;
        let fingerprint = r.bytes::<32>()?;
        let section = |len: usize, r: &mut Reader| -> Result<Vec<u32>> {
            if len.saturating_mul(4) > bytes.len() - r.offset() {
                return Err(r.error("section exceeds remaining data"));
            }
            (0..len).map(|_| r.u32()).collect()
        };
        let forward_offsets = section(n + 1, &mut r)?;
        let forward = section(*forward_offsets.last().expect("n + 1 >= 1") as usize, &mut r)?;
        let inverse_offsets = section(grid.cell_count() + 1, &mut r)?;
        let inverse = section(*inverse_offsets.last().expect("cells + 1 >= 1") as usize, &mut r)?;
        r.finish()?;
        let table = LookupTable {
            grid,
            fingerprint,
            forward_offsets,
            forward,
            inverse_offsets,
            inverse,
            report: BuildReport::default(),
        };
        table.verify()?;
        Ok(table)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), &self.to_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        LookupTable::from_bytes(&bytes)
    }

    /// Loads a table and checks it belongs to `net`.
    pub fn load_for(path: impl AsRef<Path>, net: &Network) -> Result<Self> {
        let table = LookupTable::load(path)?;
        table.check_network(net)?;
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sonn::NetworkKind;

    fn setup() -> (Network, RobotModel, VoxelGrid) {
        let net = Network::new(
            NetworkKind::Gng,
            2,
            vec![0.0, 0.0, 1.0, 0.5, -1.0, -0.5, 5.0, 0.0],
            [(0, 1), (0, 2), (2, 3)],
            None,
            None,
        )
        .unwrap();
        let model = RobotModel::planar(&[1.0, 0.8], 0.05).unwrap();
        let grid = VoxelGrid::centered(&[0.0, 0.0], 1.9, 0.1).unwrap();
        (net, model, grid)
    }

    #[test]
    fn out_of_limit_neurons_get_empty_coverage() {
        let (net, model, grid) = setup();
        let lut = build_lookup(&net, &model, &grid).unwrap();
        assert_eq!(lut.report().out_of_limits, vec![3]);
        assert!(lut.forward(3).is_empty());
        assert!(!lut.forward(0).is_empty());
        lut.verify().unwrap();
    }

    #[test]
    fn grid_far_from_base_is_rejected() {
        let (net, model, _) = setup();
        let far = VoxelGrid::new(&[10.0, 10.0], 0.1, &[20, 20]).unwrap();
        assert!(matches!(
            build_lookup(&net, &model, &far),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn unknown_voxel_is_rejected() {
        let (net, model, grid) = setup();
        let lut = build_lookup(&net, &model, &grid).unwrap();
        let bogus: VoxelSet = [grid.cell_count() as VoxelId].into_iter().collect();
        assert!(lut.blocked_neurons(&bogus).is_err());
        assert!(lut.blocked_neurons(&VoxelSet::new()).unwrap().is_empty());
    }

    #[test]
    fn bytes_roundtrip_and_fingerprint() {
        let (net, model, grid) = setup();
        let lut = build_lookup(&net, &model, &grid).unwrap();
        let bytes = lut.to_bytes();
        let back = LookupTable::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        back.check_network(&net).unwrap();
        let other = Network::new(NetworkKind::Gng, 2, vec![0.0; 8], [(0, 1)], None, None).unwrap();
        assert!(matches!(back.check_network(&other), Err(Error::FingerprintMismatch)));
        assert!(LookupTable::from_bytes(&bytes[..bytes.len() - 2]).is_err());
    }
}
