//! Lattice SOM and γ-SOM training.
//!
//! Both trainers share one loop. Samples are presented trajectory by
//! trajectory, in recorded order, with the trajectory order reshuffled every
//! epoch; the iteration budget counts single presentations. Learning rate and
//! Gaussian neighbourhood radius decay exponentially from their initial to
//! their final values over the budget, and neighbour updates are truncated at
//! three radii on the lattice.
//!
//! # γ-SOM context
//!
//! Every neuron `i` carries, next to its weight `w_i`, `K` context vectors
//! `c_i^1 … c_i^K` (initialized to `w_i`). For sample `x(t)` the input context
//! is a gamma filter driven by the previous winner `I = I(t-1)`:
//!
//! ```text
//! c^0(t) = x(t)
//! c^k(t) = (1 - β) · c_I^k + β · c_I^(k-1)      with c_I^0 = w_I,  k = 1..K
//! ```
//!
//! and at the first sample of a trajectory every `c^k(t) = x(t)`. The winner
//! minimizes `‖x - w_i‖² + Σ_k ρ^k ‖c^k(t) - c_i^k‖²` (`ρ` = `context_decay`);
//! winner and lattice neighbours move their weight towards `x` and each context
//! towards `c^k(t)` with the same rate. With `K = 0` this is exactly the SOM.
//! Contexts only shape training: plan-time BMU queries use plain weights.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{lattice_edges, Contexts, Network, NetworkKind, TrainParams};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geom;

/// Trains a rectangular SOM; deterministic for a given seed.
pub fn train_som(data: &Dataset, p: &TrainParams, seed: u64) -> Result<Network> {
    train_lattice(data, p, seed, NetworkKind::Som, 0)
}

/// Trains a γ-SOM with `p.gamma.depth` context vectors per neuron.
pub fn train_gamma_som(data: &Dataset, p: &TrainParams, seed: u64) -> Result<Network> {
    train_lattice(data, p, seed, NetworkKind::GammaSom, p.gamma.depth)
}

fn decay(initial: f64, last: f64, frac: f64) -> f64 {
    initial * (last / initial).powf(frac)
}

fn train_lattice(data: &Dataset, p: &TrainParams, seed: u64, kind: NetworkKind, depth: usize) -> Result<Network> {
    p.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("cannot train on an empty dataset"));
    }
    let (rows, cols) = p.lattice_shape()?;
    let n = rows * cols;
    let dim = data.dof();
    let samples: Vec<&[f64]> = data.samples().map(|q| &q[..]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut weights = Vec::with_capacity(n * dim);
    for _ in 0..n {
        weights.extend_from_slice(samples[rng.gen_range(0..samples.len())]);
    }
    // [neuron][k][dim]
    let mut contexts = Vec::with_capacity(n * depth * dim);
    for w in weights.chunks_exact(dim) {
        for _ in 0..depth {
            contexts.extend_from_slice(w);
        }
    }
    let ctx_stride = depth * dim;
    let ctx_weight: Vec<f64> = (1..=depth).map(|k| p.gamma.context_decay.powi(k as i32)).collect();
    let beta = p.gamma.beta;

    let radius_initial = p
        .som
        .radius_initial
        .unwrap_or(rows.max(cols) as f64 / 2.0)
        .max(p.som.radius_final);
    let budget = p.iterations;
    let mut order: Vec<usize> = (0..data.trajectory_count()).collect();
    let mut input_ctx = vec![0.0; ctx_stride];
    let mut t = 0usize;

    'epochs: while t < budget {
        order.shuffle(&mut rng);
        for &ti in &order {
            let traj = &data.trajectories()[ti];
            let mut prev: Option<usize> = None;
            for x in traj.iter() {
                if t >= budget {
                    break 'epochs;
                }
                let frac = if budget > 1 {
                    t as f64 / (budget - 1) as f64
                } else {
                    1.0
                };
                let lr = decay(p.som.learning_rate_initial, p.som.learning_rate_final, frac);
                let sigma = decay(radius_initial, p.som.radius_final, frac);

                if depth > 0 {
                    match prev {
                        None => {
                            for k in 0..depth {
                                input_ctx[k * dim..(k + 1) * dim].copy_from_slice(x);
                            }
                        }
                        Some(i) => {
                            let w_prev = &weights[i * dim..(i + 1) * dim];
                            let c_prev = &contexts[i * ctx_stride..(i + 1) * ctx_stride];
                            for k in 0..depth {
                                let lower = if k == 0 {
                                    w_prev
                                } else {
                                    &c_prev[(k - 1) * dim..k * dim]
                                };
                                let same = &c_prev[k * dim..(k + 1) * dim];
                                for d in 0..dim {
                                    input_ctx[k * dim + d] = (1.0 - beta) * same[d] + beta * lower[d];
                                }
                            }
                        }
                    }
                }

                let mut bmu = 0;
                let mut best = f64::INFINITY;
                for i in 0..n {
                    let mut dist = geom::squared_distance(&weights[i * dim..(i + 1) * dim], x);
                    for k in 0..depth {
                        let off = i * ctx_stride + k * dim;
                        dist += ctx_weight[k]
                            * geom::squared_distance(&contexts[off..off + dim], &input_ctx[k * dim..(k + 1) * dim]);
                    }
                    if dist < best {
                        best = dist;
                        bmu = i;
                    }
                }

                let (br, bc) = ((bmu / cols) as isize, (bmu % cols) as isize);
                let reach = (3.0 * sigma).ceil() as isize;
                let two_sigma2 = 2.0 * sigma * sigma;
                for r in (br - reach).max(0)..=(br + reach).min(rows as isize - 1) {
                    for c in (bc - reach).max(0)..=(bc + reach).min(cols as isize - 1) {
                        let d2 = ((r - br) * (r - br) + (c - bc) * (c - bc)) as f64;
                        let h = lr * (-d2 / two_sigma2).exp();
                        let i = r as usize * cols + c as usize;
                        for (w, &xv) in weights[i * dim..(i + 1) * dim].iter_mut().zip(x.iter()) {
                            *w += h * (xv - *w);
                        }
                        for (cv, &target) in contexts[i * ctx_stride..(i + 1) * ctx_stride]
                            .iter_mut()
                            .zip(&input_ctx)
                        {
                            *cv += h * (target - *cv);
                        }
                    }
                }
                prev = Some(bmu);
                t += 1;
            }
        }
    }

    let contexts = (depth > 0).then_some(Contexts {
        depth,
        values: contexts,
    });
    Network::new(
        kind,
        dim,
        weights,
        lattice_edges((rows, cols)),
        Some((rows, cols)),
        contexts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::JointConfig;

    fn params(n: usize, iterations: usize) -> TrainParams {
        TrainParams {
            target_neurons: n,
            iterations,
            ..Default::default()
        }
    }

    #[test]
    fn empty_dataset_is_rejected() {
        assert!(train_som(&Dataset::empty(2), &params(16, 10), 0).is_err());
    }

    #[test]
    fn collapses_onto_a_single_point() {
        let x: JointConfig = vec![0.3, -1.2].into();
        let data = Dataset::new(2, vec![vec![x.clone(); 10]]).unwrap();
        let net = train_som(&data, &params(16, 500), 3).unwrap();
        for i in 0..net.len() {
            assert!(geom::distance(net.weight(i), &x) < 1e-3);
        }
    }

    #[test]
    fn gamma_contexts_are_stored() {
        let traj: Vec<JointConfig> = (0..20).map(|i| vec![i as f64 * 0.1, 0.0].into()).collect();
        let data = Dataset::new(2, vec![traj]).unwrap();
        let net = train_gamma_som(&data, &params(16, 200), 1).unwrap();
        let ctx = net.contexts().unwrap();
        assert_eq!(ctx.depth, 3);
        assert_eq!(ctx.values.len(), 16 * 3 * 2);
        assert_eq!(net.kind(), NetworkKind::GammaSom);
    }
}
