//! Training data: ordered joint trajectories, and their text file format.
//!
//! ```text
//! #dof 2
//! #trajectories 2 samples 5
//! 0 0
//! 0.05 0.01
//! 0.1 0.02
//!
//! 1 1
//! 1.05 1
//! ```
//!
//! The first line is mandatory. The count line is written on save and, when
//! present on load, must match the body; it turns a truncated file into a
//! parse error. Other `#` lines are comments.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kinematics::JointConfig;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    dof: usize,
    trajectories: Vec<Vec<JointConfig>>,
}

impl Dataset {
    /// Checks that every sample has `dof` values and every trajectory at least 2 samples.
    pub fn new(dof: usize, trajectories: Vec<Vec<JointConfig>>) -> Result<Self> {
        if dof == 0 {
            return Err(Error::invalid("dataset dof must be >= 1"));
        }
        for (i, traj) in trajectories.iter().enumerate() {
            if traj.len() < 2 {
                return Err(Error::invalid(format!(
                    "trajectory {i} has {} samples, need at least 2",
                    traj.len()
                )));
            }
            if let Some(bad) = traj.iter().find(|q| q.len() != dof) {
                return Err(Error::DimensionMismatch {
                    expected: dof,
                    actual: bad.len(),
                });
            }
        }
        Ok(Dataset { dof, trajectories })
    }

    /// Empty dataset of the given dimension.
    pub fn empty(dof: usize) -> Self {
        Dataset {
            dof,
            trajectories: Vec::new(),
        }
    }

    pub fn dof(&self) -> usize {
        self.dof
    }

    pub fn trajectories(&self) -> &[Vec<JointConfig>] {
        &self.trajectories
    }

    pub fn trajectory_count(&self) -> usize {
        self.trajectories.len()
    }

    pub fn sample_count(&self) -> usize {
        self.trajectories.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.sample_count() == 0
    }

    pub fn samples(&self) -> impl Iterator<Item = &JointConfig> + '_ {
        self.trajectories.iter().flatten()
    }

    /// Appends the trajectories of `other` (same dof).
    pub fn extend(&mut self, other: Dataset) -> Result<()> {
        if other.dof != self.dof && !other.trajectories.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: self.dof,
                actual: other.dof,
            });
        }
        self.trajectories.extend(other.trajectories);
        Ok(())
    }

    /// Per-joint `(min, max)` over all samples.
    pub fn bounds(&self) -> Option<Vec<(f64, f64)>> {
        let mut it = self.samples();
        let first = it.next()?;
        let mut b: Vec<(f64, f64)> = first.iter().map(|&v| (v, v)).collect();
        for q in it {
            for (slot, &v) in b.iter_mut().zip(q.iter()) {
                slot.0 = slot.0.min(v);
                slot.1 = slot.1.max(v);
            }
        }
        Some(b)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "#dof {}", self.dof);
        let _ = writeln!(
            out,
            "#trajectories {} samples {}",
            self.trajectory_count(),
            self.sample_count()
        );
        for (i, traj) in self.trajectories.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            for q in traj {
                let mut first = true;
                for v in q.iter() {
                    if !first {
                        out.push(' ');
                    }
                    first = false;
                    // Display for f64 is the shortest round-trip representation
                    let _ = write!(out, "{v}");
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let dof = loop {
            let Some((n, line)) = lines.next() else {
                return Err(Error::parse("line 1", "missing `#dof N` header"));
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let rest = line
                .strip_prefix("#dof")
                .ok_or_else(|| Error::parse(format!("line {}", n + 1), "expected `#dof N` header"))?;
            break rest
                .trim()
                .parse::<usize>()
                .map_err(|e| Error::parse(format!("line {}", n + 1), format!("bad dof: {e}")))?;
        };
        if dof == 0 {
            return Err(Error::parse("header", "dof must be >= 1"));
        }

        let mut declared: Option<(usize, usize)> = None;
        let mut trajectories = Vec::new();
        let mut current: Vec<JointConfig> = Vec::new();
        let mut current_start = 0;
        let flush = |current: &mut Vec<JointConfig>, start: usize, all: &mut Vec<Vec<JointConfig>>| {
            if current.is_empty() {
                return Ok(());
            }
            if current.len() < 2 {
                return Err(Error::parse(
                    format!("line {start}"),
                    "trajectory has fewer than 2 samples",
                ));
            }
            all.push(std::mem::take(current));
            Ok(())
        };
        for (n, raw) in lines {
            let lineno = n + 1;
            let line = raw.trim();
            if line.is_empty() {
                flush(&mut current, current_start, &mut trajectories)?;
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let words: Vec<&str> = comment.split_whitespace().collect();
                if let ["trajectories", t, "samples", s] = words.as_slice() {
                    let parse = |v: &str| {
                        v.parse::<usize>()
                            .map_err(|e| Error::parse(format!("line {lineno}"), format!("bad count: {e}")))
                    };
                    declared = Some((parse(t)?, parse(s)?));
                }
                continue;
            }
            if current.is_empty() {
                current_start = lineno;
            }
            let values = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|e| Error::parse(format!("line {lineno}"), format!("bad number `{tok}`: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != dof {
                return Err(Error::parse(
                    format!("line {lineno}"),
                    format!("expected {dof} values, found {}", values.len()),
                ));
            }
            if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                return Err(Error::parse(format!("line {lineno}"), format!("non-finite value {v}")));
            }
            current.push(JointConfig(values));
        }
        flush(&mut current, current_start, &mut trajectories)?;

        let data = Dataset { dof, trajectories };
        if let Some((t, s)) = declared {
            if t != data.trajectory_count() || s != data.sample_count() {
                return Err(Error::parse(
                    "end of file",
                    format!(
                        "header declares {t} trajectories / {s} samples, found {} / {} (truncated?)",
                        data.trajectory_count(),
                        data.sample_count()
                    ),
                ));
            }
        }
        Ok(data)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path.as_ref(), self.to_text().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Dataset::from_text(&text).map_err(|e| match e {
            Error::Parse { location, message } => Error::Parse {
                location: format!("{}:{location}", path.display()),
                message,
            },
            other => other,
        })
    }
}
