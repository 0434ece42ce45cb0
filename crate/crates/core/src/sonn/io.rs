//! Binary network file.
//!
//! All integers little-endian:
//!
//! ```text
//! magic "CGNW" | version u16 | kind u8 (0 SOM, 1 γ-SOM, 2 GNG)
//! dim u32 | neurons u32 | weights f64[neurons * dim] (row-major)
//! edges u32 | (a u32, b u32)[edges]
//! has_grid u8 | [rows u32, cols u32]
//! has_contexts u8 | [depth u32, values f64[neurons * depth * dim]]
//! ```
//!
//! Edge weights are not stored; they are recomputed from the weights on load.

use std::path::Path;

use sha2::{Digest, Sha256};

use super::{Contexts, Network, NetworkKind};
use crate::error::{Error, Result};
use crate::io::{write_atomic, Reader, Writer};

pub const MAGIC: [u8; 4] = *b"CGNW";
pub const FORMAT_VERSION: u16 = 1;

impl NetworkKind {
    fn tag(self) -> u8 {
        match self {
            NetworkKind::Som => 0,
            NetworkKind::GammaSom => 1,
            NetworkKind::Gng => 2,
        }
    }

    fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(NetworkKind::Som),
            1 => Some(NetworkKind::GammaSom),
            2 => Some(NetworkKind::Gng),
            _ => None,
        }
    }
}

impl Network {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.bytes(&MAGIC);
        w.u16(FORMAT_VERSION);
        w.u8(self.kind.tag());
        w.len(self.dim);
        w.len(self.len());
        for &v in &self.weights {
            w.f64(v);
        }
        w.len(self.edges.len());
        for e in &self.edges {
            w.len(e.a);
            w.len(e.b);
        }
        match self.grid_shape {
            Some((r, c)) => {
                w.u8(1);
                w.len(r);
                w.len(c);
            }
            None => w.u8(0),
        }
        match &self.contexts {
            Some(ctx) => {
                w.u8(1);
                w.len(ctx.depth);
                for &v in &ctx.values {
                    w.f64(v);
                }
            }
            None => w.u8(0),
        }
        w.buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, "network");
        if r.bytes::<4>()? != MAGIC {
            return Err(Error::Format("not a network file (bad magic)".into()));
        }
        let version = r.u16()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported network format version {version}")));
        }
        let tag = r.u8()?;
        let kind = NetworkKind::from_tag(tag).ok_or_else(|| r.error(format!("unknown network kind {tag}")))?;
        let dim = r.u32()? as usize;
        if dim == 0 {
            return Err(r.error("dimension must be >= 1"));
        }
        let n = r.len(8 * dim)?;
        let weights = (0..n * dim).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let m = r.len(8)?;
        let mut pairs = Vec::with_capacity(m);
        for _ in 0..m {
            pairs.push((r.u32()? as usize, r.u32()? as usize));
        }
        let grid_shape = match r.u8()? {
            0 => None,
            1 => Some((r.u32()? as usize, r.u32()? as usize)),
            other => return Err(r.error(format!("bad grid flag {other}"))),
        };
        let contexts = match r.u8()? {
            0 => None,
            1 => {
                let depth = r.u32()? as usize;
                let count = n * depth * dim;
                if count.saturating_mul(8) > bytes.len() - r.offset() {
                    return Err(r.error("context block exceeds remaining data"));
                }
                let values = (0..count).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
                Some(Contexts { depth, values })
            }
            other => return Err(r.error(format!("bad context flag {other}"))),
        };
        r.finish()?;
        Network::new(kind, dim, weights, pairs, grid_shape, contexts)
    }

    /// SHA-256 of the serialized network.
    pub fn fingerprint(&self) -> [u8; 32] {
        Sha256::digest(self.to_bytes()).into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), &self.to_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Network::from_bytes(&bytes)
    }
}
