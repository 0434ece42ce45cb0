//! Self-organizing networks that learn the reduced configuration space.
//!
//! Three trainers produce a [`Network`]: a lattice SOM, the γ-SOM (a SOM with
//! gamma-filter context memory, see [`lattice`]) and a growing neural gas
//! ([`gng`]). At plan time only the weight vectors and edges are used; the
//! network is the cognitive map the planner searches.

mod gng;
mod io;
mod lattice;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geom;

pub use gng::{extend_gng, train_gng, GrowingNeuralGas};
pub use io::{FORMAT_VERSION as NETWORK_FORMAT_VERSION, MAGIC as NETWORK_MAGIC};
pub use lattice::{train_gamma_som, train_som};

/// Index of a neuron in a [`Network`].
pub type NeuronId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkKind {
    Som,
    GammaSom,
    Gng,
}

impl NetworkKind {
    pub fn is_lattice(self) -> bool {
        matches!(self, NetworkKind::Som | NetworkKind::GammaSom)
    }
}

impl std::fmt::Display for NetworkKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NetworkKind::Som => "som",
            NetworkKind::GammaSom => "gamma_som",
            NetworkKind::Gng => "gng",
        })
    }
}

impl std::str::FromStr for NetworkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "som" => Ok(NetworkKind::Som),
            "gamma_som" | "gammasom" => Ok(NetworkKind::GammaSom),
            "gng" => Ok(NetworkKind::Gng),
            other => Err(Error::invalid(format!("unknown network kind `{other}`"))),
        }
    }
}

/// Dispatches to the trainer for `kind`.
pub fn train(kind: NetworkKind, data: &Dataset, p: &TrainParams, seed: u64) -> Result<Network> {
    match kind {
        NetworkKind::Som => train_som(data, p, seed),
        NetworkKind::GammaSom => train_gamma_som(data, p, seed),
        NetworkKind::Gng => train_gng(data, p, seed),
    }
}

/// Undirected topological connection; `a < b`, weight is the distance of the endpoint weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: NeuronId,
    pub b: NeuronId,
    pub weight: f64,
}

/// Per-neuron γ-SOM context vectors, `depth` vectors of the weight dimension each.
#[derive(Debug, Clone, PartialEq)]
pub struct Contexts {
    pub depth: usize,
    /// Layout: `[neuron][k][dim]`.
    pub values: Vec<f64>,
}

/// The trained output space: neuron weights plus topological edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    kind: NetworkKind,
    dim: usize,
    weights: Vec<f64>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NeuronId, f64)>>,
    grid_shape: Option<(usize, usize)>,
    contexts: Option<Contexts>,
}

impl Network {
    /// Builds and validates a network. Edge pairs are canonicalized (`a < b`,
    /// sorted); self-loops, duplicates and dangling indices are rejected, and
    /// lattice kinds must carry exactly the 4-neighbourhood of `grid_shape`.
    pub fn new(
        kind: NetworkKind,
        dim: usize,
        weights: Vec<f64>,
        edge_pairs: impl IntoIterator<Item = (NeuronId, NeuronId)>,
        grid_shape: Option<(usize, usize)>,
        contexts: Option<Contexts>,
    ) -> Result<Self> {
        if dim == 0 || !weights.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "weight array of length {} does not divide into dimension {dim}",
                weights.len()
            )));
        }
        let n = weights.len() / dim;
        if n == 0 {
            return Err(Error::invalid("network has no neurons"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("network weights must be finite"));
        }
        let mut pairs: Vec<(NeuronId, NeuronId)> = Vec::new();
        for (a, b) in edge_pairs {
            if a >= n || b >= n {
                return Err(Error::invalid(format!("edge ({a}, {b}) references a missing neuron")));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop on neuron {a}")));
            }
            pairs.push((a.min(b), a.max(b)));
        }
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate edge"));
        }

        match (kind.is_lattice(), grid_shape) {
            (true, Some(shape)) => {
                if shape.0 * shape.1 != n {
                    return Err(Error::invalid(format!(
                        "grid shape {}x{} does not match {n} neurons",
                        shape.0, shape.1
                    )));
                }
                if pairs != lattice_edges(shape) {
                    return Err(Error::invalid("lattice network edges must be the grid 4-neighbourhood"));
                }
            }
            (true, None) => return Err(Error::invalid("lattice network needs a grid shape")),
            (false, Some(_)) => return Err(Error::invalid("grid shape is only valid for SOM kinds")),
            (false, None) => {}
        }
        if let Some(ctx) = &contexts {
            if kind != NetworkKind::GammaSom {
                return Err(Error::invalid("context vectors are only valid for gamma SOMs"));
            }
            if ctx.values.len() != n * ctx.depth * dim {
                return Err(Error::invalid("context block has the wrong size"));
            }
        }

        let mut net = Network {
            kind,
            dim,
            weights,
            edges: Vec::with_capacity(pairs.len()),
            adjacency: vec![Vec::new(); n],
            grid_shape,
            contexts,
        };
        for (a, b) in pairs {
            let weight = geom::distance(net.weight(a), net.weight(b));
            net.edges.push(Edge { a, b, weight });
            net.adjacency[a].push((b, weight));
            net.adjacency[b].push((a, weight));
        }
        for list in &mut net.adjacency {
            list.sort_unstable_by_key(|&(m, _)| m);
        }
        Ok(net)
    }

    pub fn kind(&self) -> NetworkKind {
        self.kind
    }

    /// Weight-vector dimension (robot joint count).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, n: NeuronId) -> &[f64] {
        &self.weights[n * self.dim..(n + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbours of `n` with edge weights, sorted by neighbour index.
    pub fn neighbors(&self, n: NeuronId) -> &[(NeuronId, f64)] {
        &self.adjacency[n]
    }

    pub fn degree(&self, n: NeuronId) -> usize {
        self.adjacency[n].len()
    }

    pub fn are_adjacent(&self, a: NeuronId, b: NeuronId) -> bool {
        self.adjacency[a].binary_search_by_key(&b, |&(m, _)| m).is_ok()
    }

    pub fn grid_shape(&self) -> Option<(usize, usize)> {
        self.grid_shape
    }

    pub fn contexts(&self) -> Option<&Contexts> {
        self.contexts.as_ref()
    }

    fn check_query(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: q.len(),
            });
        }
        Ok(())
    }

    /// Nearest neuron by Euclidean weight distance; ties go to the lowest index.
    pub fn best_matching_unit(&self, q: &[f64]) -> Result<NeuronId> {
        self.check_query(q)?;
        Ok(self.bmu_unchecked(q))
    }

    pub(crate) fn bmu_unchecked(&self, q: &[f64]) -> NeuronId {
        match self.dim {
            2 => nearest_fixed::<2>(&self.weights, q),
            3 => nearest_fixed::<3>(&self.weights, q),
            4 => nearest_fixed::<4>(&self.weights, q),
            6 => nearest_fixed::<6>(&self.weights, q),
            _ => nearest_dyn(&self.weights, self.dim, q),
        }
    }

    /// Second-nearest neuron (lowest index on ties). Needs at least two neurons.
    pub fn second_bmu(&self, q: &[f64]) -> Result<NeuronId> {
        self.check_query(q)?;
        if self.len() < 2 {
            return Err(Error::invalid("second BMU needs at least two neurons"));
        }
        Ok(self.bmu_pair_unchecked(q).1)
    }

    /// `(best, second)` in one pass.
    pub fn bmu_pair(&self, q: &[f64]) -> Result<(NeuronId, NeuronId)> {
        self.check_query(q)?;
        if self.len() < 2 {
            return Err(Error::invalid("second BMU needs at least two neurons"));
        }
        Ok(self.bmu_pair_unchecked(q))
    }

    fn bmu_pair_unchecked(&self, q: &[f64]) -> (NeuronId, NeuronId) {
        bmu_pair_in(&self.weights, self.dim, q)
    }

    /// BMUs for a batch of queries, evaluated in parallel.
    pub fn best_matching_units(&self, queries: &[Vec<f64>]) -> Result<Vec<NeuronId>> {
        queries.iter().try_for_each(|q| self.check_query(q))?;
        Ok(queries.par_iter().map(|q| self.bmu_unchecked(q)).collect())
    }

    /// Mean Euclidean distance from each sample to its BMU weight.
    pub fn quantization_error(&self, data: &Dataset) -> Result<f64> {
        if data.dof() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: data.dof(),
            });
        }
        let samples: Vec<&[f64]> = data.samples().map(|q| &q[..]).collect();
        if samples.is_empty() {
            return Ok(0.0);
        }
        let total: f64 = samples
            .par_iter()
            .map(|q| geom::distance(self.weight(self.bmu_unchecked(q)), q))
            .sum();
        Ok(total / samples.len() as f64)
    }
}

/// Best and second-best rows of a flat weight array; ties go to the lower index.
fn nearest_dyn(weights: &[f64], dim: usize, q: &[f64]) -> NeuronId {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, w) in weights.chunks_exact(dim).enumerate() {
        let d = geom::squared_distance(w, q);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Same scan with the dimension known at compile time; the distance is summed
/// in the same order, so results match [`nearest_dyn`] bit for bit.
fn nearest_fixed<const D: usize>(weights: &[f64], q: &[f64]) -> NeuronId {
    let q: [f64; D] = q.try_into().expect("query length checked");
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, w) in weights.chunks_exact(D).enumerate() {
        let mut d = 0.0;
        for k in 0..D {
            let t = w[k] - q[k];
            d += t * t;
        }
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

pub(crate) fn bmu_pair_in(weights: &[f64], dim: usize, q: &[f64]) -> (NeuronId, NeuronId) {
    let (mut b1, mut b2) = (0, 0);
    let (mut d1, mut d2) = (f64::INFINITY, f64::INFINITY);
    for (i, w) in weights.chunks_exact(dim).enumerate() {
        let d = geom::squared_distance(w, q);
        if d < d1 {
            b2 = b1;
            d2 = d1;
            b1 = i;
            d1 = d;
        } else if d < d2 {
            b2 = i;
            d2 = d;
        }
    }
    (b1, b2)
}

/// Canonical sorted 4-neighbourhood edge list of a `rows × cols` lattice (row-major ids).
pub fn lattice_edges((rows, cols): (usize, usize)) -> Vec<(NeuronId, NeuronId)> {
    let mut edges = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            if c + 1 < cols {
                edges.push((i, i + 1));
            }
            if r + 1 < rows {
                edges.push((i, i + cols));
            }
        }
    }
    edges.sort_unstable();
    edges
}

/// Set of neurons of one network, stored as a dense mask.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NeuronSet {
    mask: Vec<bool>,
    count: usize,
}

impl NeuronSet {
    /// Empty set over `universe` neurons.
    pub fn new(universe: usize) -> Self {
        NeuronSet {
            mask: vec![false; universe],
            count: 0,
        }
    }

    pub fn from_ids(universe: usize, ids: impl IntoIterator<Item = NeuronId>) -> Self {
        let mut set = NeuronSet::new(universe);
        for id in ids {
            set.insert(id);
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.mask.len()
    }

    /// Returns true if `id` was newly inserted.
    pub fn insert(&mut self, id: NeuronId) -> bool {
        let fresh = !self.mask[id];
        if fresh {
            self.mask[id] = true;
            self.count += 1;
        }
        fresh
    }

    pub fn remove(&mut self, id: NeuronId) -> bool {
        let present = self.mask[id];
        if present {
            self.mask[id] = false;
            self.count -= 1;
        }
        present
    }

    /// Out-of-range ids are reported as absent.
    #[inline]
    pub fn contains(&self, id: NeuronId) -> bool {
        self.mask.get(id).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Ascending ids.
    pub fn iter(&self) -> impl Iterator<Item = NeuronId> + '_ {
        self.mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn is_subset(&self, other: &NeuronSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
}

/// SOM schedule: exponential decay of learning rate and Gaussian radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SomParams {
    /// Lattice shape; when absent the most square factorization of `target_neurons` is used.
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub learning_rate_initial: f64,
    pub learning_rate_final: f64,
    /// Defaults to `max(rows, cols) / 2`.
    pub radius_initial: Option<f64>,
    pub radius_final: f64,
}

impl Default for SomParams {
    fn default() -> Self {
        SomParams {
            rows: None,
            cols: None,
            learning_rate_initial: 0.5,
            learning_rate_final: 0.01,
            radius_initial: None,
            radius_final: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GngParams {
    /// BMU learning rate.
    pub eps_b: f64,
    /// Learning rate for the BMU's topological neighbours.
    pub eps_n: f64,
    /// A neuron is inserted every `lambda` samples.
    pub lambda: usize,
    pub max_edge_age: u32,
    /// Error decay of the two neurons split by an insertion.
    pub alpha: f64,
    /// Global per-step error decay.
    pub decay: f64,
}

impl Default for GngParams {
    fn default() -> Self {
        GngParams {
            eps_b: 0.05,
            eps_n: 0.006,
            lambda: 100,
            max_edge_age: 100,
            alpha: 0.5,
            decay: 0.995,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GammaParams {
    /// Number of context vectors per neuron (K).
    pub depth: usize,
    /// Gamma-filter mixing coefficient in (0, 1].
    pub beta: f64,
    /// Context `k` is weighted by `context_decay^k` in the matching distance.
    pub context_decay: f64,
}

impl Default for GammaParams {
    fn default() -> Self {
        GammaParams {
            depth: 3,
            beta: 0.5,
            context_decay: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainParams {
    pub target_neurons: usize,
    /// Number of sample presentations.
    pub iterations: usize,
    pub som: SomParams,
    pub gng: GngParams,
    pub gamma: GammaParams,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            target_neurons: 500,
            iterations: 50_000,
            som: SomParams::default(),
            gng: GngParams::default(),
            gamma: GammaParams::default(),
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<()> {
        let rate = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be in (0, 1], got {v}")))
            }
        };
        if self.target_neurons < 2 {
            return Err(Error::invalid("target_neurons must be >= 2"));
        }
        rate("som.learning_rate_initial", self.som.learning_rate_initial)?;
        rate("som.learning_rate_final", self.som.learning_rate_final)?;
        rate("gng.eps_b", self.gng.eps_b)?;
        rate("gng.eps_n", self.gng.eps_n)?;
        rate("gng.alpha", self.gng.alpha)?;
        rate("gng.decay", self.gng.decay)?;
        rate("gamma.beta", self.gamma.beta)?;
        rate("gamma.context_decay", self.gamma.context_decay)?;
        if self.gng.lambda < 1 {
            return Err(Error::invalid("gng.lambda must be >= 1"));
        }
        if self.som.radius_final <= 0.0 || self.som.radius_initial.is_some_and(|r| r <= 0.0) {
            return Err(Error::invalid("SOM radii must be > 0"));
        }
        Ok(())
    }

    /// Lattice shape for the SOM trainers.
    pub fn lattice_shape(&self) -> Result<(usize, usize)> {
        let n = self.target_neurons;
        let shape = match (self.som.rows, self.som.cols) {
            (Some(r), Some(c)) => (r, c),
            (Some(r), None) if r > 0 && n.is_multiple_of(r) => (r, n / r),
            (None, Some(c)) if c > 0 && n.is_multiple_of(c) => (n / c, c),
            (None, None) => {
                let mut r = (n as f64).sqrt().floor() as usize;
                while r > 1 && !n.is_multiple_of(r) {
                    r -= 1;
                }
                (r.max(1), n / r.max(1))
            }
            _ => return Err(Error::invalid("SOM rows/cols do not divide target_neurons")),
        };
        if shape.0 * shape.1 != n || shape.0 == 0 {
            return Err(Error::invalid(format!(
                "SOM grid {}x{} must hold exactly target_neurons = {n}",
                shape.0, shape.1
            )));
        }
        if n < 4 {
            return Err(Error::invalid("SOM needs at least 4 neurons"));
        }
        Ok(shape)
    }
}
