//! Fruchterman–Reingold force-directed layout in the unit square.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;

use super::{EmbedOptions, Embedder, Embedding};

pub const DEFAULT_ITERATIONS: usize = 200;
pub const DEFAULT_TEMPERATURE: f64 = 0.1;

/// Per-iteration record: the step cap in force and the largest move taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringStep {
    pub temperature: f64,
    pub max_displacement: f64,
}

pub fn spring_embed(
    g: &Graph,
    seed: u64,
    iterations: usize,
    initial_temperature: f64,
) -> Result<Embedding> {
    spring_embed_traced(g, seed, iterations, initial_temperature).map(|(e, _)| e)
}

/// Spring layout that also reports every iteration's temperature and largest move.
///
/// Ideal edge length is `d = 1/sqrt(n)`. Edges pull with `|δ|²/d`, every pair
/// pushes with `d²/|δ|`, and each node moves along its net force by at most
/// the current temperature, which falls linearly from `initial_temperature`
/// towards zero. Positions are clamped to `[0, 1]²`.
pub fn spring_embed_traced(
    g: &Graph,
    seed: u64,
    iterations: usize,
    initial_temperature: f64,
) -> Result<(Embedding, Vec<SpringStep>)> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Input("cannot lay out an empty graph".to_string()));
    }
    if iterations == 0 {
        return Err(Error::Param("spring layout needs at least one iteration".to_string()));
    }
    if !(initial_temperature.is_finite() && initial_temperature >= 0.0) {
        return Err(Error::Param(format!(
            "initial temperature {initial_temperature} must be finite and non-negative"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen(), rng.gen()]).collect();
    let d = 1.0 / (n as f64).sqrt();
    let floor = 0.01 * d;
    let mut trace = Vec::with_capacity(iterations);

    for it in 0..iterations {
        let temperature = initial_temperature * (1.0 - it as f64 / iterations as f64);
        // each row is summed independently in index order: thread count cannot change the result
        let disp: Vec<[f64; 2]> = (0..n)
            .into_par_iter()
            .map(|i| {
                let p = pos[i];
                let mut f = [0.0, 0.0];
                for (j, q) in pos.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    let delta = [p[0] - q[0], p[1] - q[1]];
                    let dist = delta[0].hypot(delta[1]).max(floor);
                    let push = d * d / (dist * dist);
                    f[0] += delta[0] * push;
                    f[1] += delta[1] * push;
                }
                for &j in g.neighbors(i) {
                    let q = pos[j];
                    let delta = [p[0] - q[0], p[1] - q[1]];
                    let dist = delta[0].hypot(delta[1]).max(floor);
                    let pull = dist / d;
                    f[0] -= delta[0] * pull;
                    f[1] -= delta[1] * pull;
                }
                f
            })
            .collect();

        let mut max_move = 0.0f64;
        for (p, f) in pos.iter_mut().zip(&disp) {
            let len = f[0].hypot(f[1]);
            if len == 0.0 {
                continue;
            }
            let step = len.min(temperature) / len;
            let old = *p;
            p[0] = (p[0] + f[0] * step).clamp(0.0, 1.0);
            p[1] = (p[1] + f[1] * step).clamp(0.0, 1.0);
            max_move = max_move.max((p[0] - old[0]).hypot(p[1] - old[1]));
        }
        trace.push(SpringStep {
            temperature,
            max_displacement: max_move,
        });
    }

    Ok((
        Embedding {
            coords: pos,
            method: "spring".to_string(),
            normalized: false,
            seed: Some(seed),
            iterations: Some(iterations),
            degenerate: false,
        },
        trace,
    ))
}

pub struct SpringEmbedder;

impl Embedder for SpringEmbedder {
    fn name(&self) -> &'static str {
        "spring"
    }

    fn supports_normalize(&self) -> bool {
        false
    }

    fn embed(&self, g: &Graph, opts: &EmbedOptions) -> Result<Embedding> {
        if opts.normalize {
            return Err(Error::Config(
                "row normalization applies to spectral embeddings only".to_string(),
            ));
        }
        spring_embed(g, opts.seed, opts.iterations, opts.initial_temperature)
    }
}
