//! Growing neural gas.
//!
//! Per presented sample: find winner `s1` and runner-up `s2`, age the
//! winner's edges, accumulate its squared error, move it by `eps_b` and its
//! topological neighbours by `eps_n`, refresh (or create) edge `s1-s2` with
//! age 0 and drop winner edges older than `max_edge_age`. After every
//! `lambda` samples a neuron is inserted halfway between the neuron with the
//! largest error and its largest-error neighbour, until `target_neurons` is
//! reached; adaptation continues for the remaining budget. All errors decay
//! by `decay` each step. Neurons left without edges are removed once, at the
//! end of training.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{bmu_pair_in, Network, NetworkKind, NeuronId, TrainParams};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geom;

/// Training state of a growing neural gas.
///
/// Errors are stored divided by a running decay factor so the global
/// per-step decay costs O(1).
#[derive(Debug, Clone)]
pub struct GrowingNeuralGas {
    dim: usize,
    weights: Vec<f64>,
    scaled_error: Vec<f64>,
    error_scale: f64,
    /// Symmetric adjacency with edge ages.
    adjacency: Vec<Vec<(NeuronId, u32)>>,
    steps: usize,
}

impl GrowingNeuralGas {
    /// Two neurons initialized from distinct random samples.
    pub fn new(data: &Dataset, rng: &mut impl Rng) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::invalid("cannot train on an empty dataset"));
        }
        let samples: Vec<&[f64]> = data.samples().map(|q| &q[..]).collect();
        let first = rng.gen_range(0..samples.len());
        let mut second = rng.gen_range(0..samples.len());
        if samples.len() > 1 && second == first {
            second = (first + 1) % samples.len();
        }
        let mut weights = samples[first].to_vec();
        weights.extend_from_slice(samples[second]);
        Ok(GrowingNeuralGas {
            dim: data.dof(),
            weights,
            scaled_error: vec![0.0; 2],
            error_scale: 1.0,
            adjacency: vec![Vec::new(); 2],
            steps: 0,
        })
    }

    /// Resumes from a trained GNG. Edge ages and accumulated errors start at zero.
    pub fn from_network(net: &Network) -> Result<Self> {
        if net.kind() != NetworkKind::Gng {
            return Err(Error::Unsupported(format!(
                "a {} network cannot be extended and must be retrained",
                net.kind()
            )));
        }
        let adjacency = (0..net.len())
            .map(|i| net.neighbors(i).iter().map(|&(m, _)| (m, 0)).collect())
            .collect();
        Ok(GrowingNeuralGas {
            dim: net.dim(),
            weights: net.weights().to_vec(),
            scaled_error: vec![0.0; net.len()],
            error_scale: 1.0,
            adjacency,
            steps: 0,
        })
    }

    pub fn neuron_count(&self) -> usize {
        self.weights.len() / self.dim
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn weight(&self, i: NeuronId) -> &[f64] {
        &self.weights[i * self.dim..(i + 1) * self.dim]
    }

    fn error(&self, i: NeuronId) -> f64 {
        self.scaled_error[i] * self.error_scale
    }

    fn add_edge(&mut self, a: NeuronId, b: NeuronId) {
        self.adjacency[a].push((b, 0));
        self.adjacency[b].push((a, 0));
    }

    fn remove_edge(&mut self, a: NeuronId, b: NeuronId) {
        self.adjacency[a].retain(|&(m, _)| m != b);
        self.adjacency[b].retain(|&(m, _)| m != a);
    }

    fn set_age(&mut self, a: NeuronId, b: NeuronId, age: u32) -> bool {
        let Some(slot) = self.adjacency[a].iter_mut().find(|(m, _)| *m == b) else {
            return false;
        };
        slot.1 = age;
        let back = self.adjacency[b]
            .iter_mut()
            .find(|(m, _)| *m == a)
            .expect("symmetric adjacency");
        back.1 = age;
        true
    }

    /// One adaptation step with sample `x`; inserts a neuron when the step
    /// count hits a multiple of `lambda` and the network is below target.
    pub fn step(&mut self, x: &[f64], p: &TrainParams) {
        let g = &p.gng;
        let dim = self.dim;
        let (s1, s2) = if self.neuron_count() >= 2 {
            bmu_pair_in(&self.weights, dim, x)
        } else {
            (0, 0)
        };

        let ages: Vec<NeuronId> = self.adjacency[s1].iter().map(|&(m, _)| m).collect();
        for m in ages {
            let age = self.adjacency[s1].iter().find(|(k, _)| *k == m).expect("edge").1 + 1;
            self.set_age(s1, m, age);
        }

        let err = geom::squared_distance(self.weight(s1), x);
        self.scaled_error[s1] += err / self.error_scale;

        for (w, &xv) in self.weights[s1 * dim..(s1 + 1) * dim].iter_mut().zip(x) {
            *w += g.eps_b * (xv - *w);
        }
        for k in 0..self.adjacency[s1].len() {
            let m = self.adjacency[s1][k].0;
            for (w, &xv) in self.weights[m * dim..(m + 1) * dim].iter_mut().zip(x) {
                *w += g.eps_n * (xv - *w);
            }
        }

        if s1 != s2 && !self.set_age(s1, s2, 0) {
            self.add_edge(s1, s2);
        }
        let stale: Vec<NeuronId> = self.adjacency[s1]
            .iter()
            .filter(|&&(_, age)| age > g.max_edge_age)
            .map(|&(m, _)| m)
            .collect();
        for m in stale {
            self.remove_edge(s1, m);
        }

        self.steps += 1;
        if self.steps.is_multiple_of(g.lambda) && self.neuron_count() < p.target_neurons {
            self.insert(p);
        }

        self.error_scale *= g.decay;
        if self.error_scale < 1e-150 {
            for e in &mut self.scaled_error {
                *e *= self.error_scale;
            }
            self.error_scale = 1.0;
        }
    }

    fn insert(&mut self, p: &TrainParams) {
        let dim = self.dim;
        let mut q = 0;
        for i in 1..self.neuron_count() {
            if self.scaled_error[i] > self.scaled_error[q] {
                q = i;
            }
        }
        let f = match self.adjacency[q].iter().map(|&(m, _)| m).reduce(|best, m| {
            let (em, eb) = (self.scaled_error[m], self.scaled_error[best]);
            if em > eb || (em == eb && m < best) {
                m
            } else {
                best
            }
        }) {
            Some(f) => f,
            None => {
                // isolated winner: split towards its nearest neuron
                let wq = self.weight(q).to_vec();
                let mut best = usize::MAX;
                let mut best_d = f64::INFINITY;
                for i in 0..self.neuron_count() {
                    if i == q {
                        continue;
                    }
                    let d = geom::squared_distance(self.weight(i), &wq);
                    if d < best_d {
                        best_d = d;
                        best = i;
                    }
                }
                best
            }
        };
        let r = self.neuron_count();
        for d in 0..dim {
            let v = 0.5 * (self.weights[q * dim + d] + self.weights[f * dim + d]);
            self.weights.push(v);
        }
        self.adjacency.push(Vec::new());
        self.remove_edge(q, f);
        self.add_edge(q, r);
        self.add_edge(r, f);
        self.scaled_error[q] *= p.gng.alpha;
        self.scaled_error[f] *= p.gng.alpha;
        self.scaled_error.push(self.scaled_error[q]);
    }

    /// Presents `iterations` uniformly drawn samples.
    pub fn run(&mut self, data: &Dataset, p: &TrainParams, iterations: usize, rng: &mut impl Rng) {
        let samples: Vec<&[f64]> = data.samples().map(|q| &q[..]).collect();
        if samples.is_empty() {
            return;
        }
        for _ in 0..iterations {
            let x = samples[rng.gen_range(0..samples.len())];
            self.step(x, p);
        }
    }

    /// Accumulated (decayed) error of every neuron.
    pub fn errors(&self) -> Vec<f64> {
        (0..self.neuron_count()).map(|i| self.error(i)).collect()
    }

    /// Removes isolated neurons (keeping relative order) and freezes the graph.
    pub fn into_network(self) -> Result<Network> {
        let n = self.neuron_count();
        let keep: Vec<bool> = self.adjacency.iter().map(|a| !a.is_empty()).collect();
        if !keep.iter().any(|&k| k) {
            return Err(Error::invalid("training produced no connected neurons"));
        }
        let mut remap = vec![usize::MAX; n];
        let mut weights = Vec::with_capacity(self.weights.len());
        let mut next = 0;
        for i in 0..n {
            if keep[i] {
                remap[i] = next;
                next += 1;
                weights.extend_from_slice(self.weight(i));
            }
        }
        let mut pairs = Vec::new();
        for (a, list) in self.adjacency.iter().enumerate() {
            for &(b, _) in list {
                if a < b {
                    pairs.push((remap[a], remap[b]));
                }
            }
        }
        Network::new(NetworkKind::Gng, self.dim, weights, pairs, None, None)
    }
}

/// Trains a GNG for `p.iterations` samples, growing up to `p.target_neurons`.
pub fn train_gng(data: &Dataset, p: &TrainParams, seed: u64) -> Result<Network> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gng = GrowingNeuralGas::new(data, &mut rng)?;
    gng.run(data, p, p.iterations, &mut rng);
    gng.into_network()
}

/// Continues GNG training on additional data. Existing neurons keep their
/// indices unless they end up isolated; an empty `extra` returns `net` unchanged.
pub fn extend_gng(net: &Network, extra: &Dataset, p: &TrainParams, seed: u64) -> Result<Network> {
    let mut gng = GrowingNeuralGas::from_network(net)?;
    if extra.is_empty() {
        return Ok(net.clone());
    }
    if extra.dof() != net.dim() {
        return Err(Error::DimensionMismatch {
            expected: net.dim(),
            actual: extra.dof(),
        });
    }
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gng.run(extra, p, p.iterations, &mut rng);
    gng.into_network()
}
