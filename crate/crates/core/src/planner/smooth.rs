use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Path;
use crate::error::{Error, Result};
use crate::kinematics::JointConfig;
use crate::sonn::{Network, NeuronSet};

/// Dense samples of a smoothed path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedTrajectory {
    pub samples: Vec<JointConfig>,
    /// Spline degree; 0 means the path configurations were taken verbatim.
    pub degree: usize,
    pub samples_per_hop: usize,
    pub source: Path,
}

impl SmoothedTrajectory {
    /// The path itself, without any interpolation.
    pub fn unsmoothed(path: &Path) -> Self {
        SmoothedTrajectory {
            samples: path.configs().to_vec(),
            degree: 0,
            samples_per_hop: 1,
            source: path.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn cspace_length(&self) -> f64 {
        super::polyline_length(&self.samples)
    }
}

/// Clamped uniform knot vector for `n + 1` control points.
fn knots(n: usize, p: usize) -> Vec<f64> {
    let interior = n - p + 1;
    let mut t = vec![0.0; p + 1];
    t.extend((1..interior).map(|j| j as f64 / interior as f64));
    t.extend(std::iter::repeat_n(1.0, p + 1));
    t
}

fn de_boor(ctrl: &[JointConfig], t: &[f64], p: usize, u: f64, scratch: &mut Vec<Vec<f64>>) -> Vec<f64> {
    let n = ctrl.len() - 1;
    // span k with t[k] <= u < t[k + 1], p <= k <= n
    let k = (t.partition_point(|&x| x <= u) - 1).clamp(p, n);
    scratch.clear();
    scratch.extend((0..=p).map(|j| ctrl[j + k - p].to_vec()));
    for r in 1..=p {
        for j in (r..=p).rev() {
            let i = j + k - p;
            let denom = t[i + p + 1 - r] - t[i];
            let a = if denom > 0.0 { (u - t[i]) / denom } else { 0.0 };
            let (lo, hi) = scratch.split_at_mut(j);
            for (x, y) in hi[0].iter_mut().zip(&lo[j - 1]) {
                *x = (1.0 - a) * y + a * *x;
            }
        }
    }
    scratch[p].clone()
}

/// Clamped uniform B-spline through the path configurations as control points.
///
/// Returns `samples_per_hop * hops + 1` samples at uniformly spaced
/// parameters; the first and last samples are the path endpoints exactly.
pub fn smooth(path: &Path, degree: usize, samples_per_hop: usize) -> Result<SmoothedTrajectory> {
    let hops = path.hop_count();
    if hops == 0 {
        return Err(Error::invalid("smoothing needs a path of at least two neurons"));
    }
    if degree < 1 || degree > hops {
        return Err(Error::invalid(format!("degree {degree} outside 1..={hops}")));
    }
    if samples_per_hop == 0 {
        return Err(Error::invalid("samples_per_hop must be positive"));
    }
    let ctrl = path.configs();
    let t = knots(hops, degree);
    let count = samples_per_hop * hops + 1;
    let mut scratch = Vec::with_capacity(degree + 1);
    let mut samples = Vec::with_capacity(count);
    for s in 0..count {
        let sample = if s == 0 {
            ctrl[0].to_vec()
        } else if s == count - 1 {
            ctrl[hops].to_vec()
        } else {
            de_boor(ctrl, &t, degree, s as f64 / (count - 1) as f64, &mut scratch)
        };
        samples.push(JointConfig(sample));
    }
    Ok(SmoothedTrajectory {
        samples,
        degree,
        samples_per_hop,
        source: path.clone(),
    })
}

fn all_unblocked(net: &Network, blocked: &NeuronSet, samples: &[JointConfig]) -> bool {
    samples.par_iter().all(|q| !blocked.contains(net.bmu_unchecked(q)))
}

/// Smooths with the highest degree (at most `max_degree`) whose samples all
/// map to unblocked BMUs, backing off one degree at a time. If even degree 1
/// fails, the path is returned unsmoothed.
pub fn smooth_validated(
    path: &Path,
    net: &Network,
    blocked: &NeuronSet,
    max_degree: usize,
    samples_per_hop: usize,
) -> Result<SmoothedTrajectory> {
    if path.configs().first().is_some_and(|q| q.len() != net.dim()) {
        return Err(Error::DimensionMismatch {
            expected: net.dim(),
            actual: path.configs()[0].len(),
        });
    }
    for degree in (1..=max_degree.min(path.hop_count())).rev() {
        let traj = smooth(path, degree, samples_per_hop)?;
        if all_unblocked(net, blocked, &traj.samples) {
            return Ok(traj);
        }
    }
    Ok(SmoothedTrajectory::unsmoothed(path))
}
