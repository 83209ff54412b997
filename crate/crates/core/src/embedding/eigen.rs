//! Smallest eigenpairs of the combinatorial Laplacian `L = D - A`.
//!
//! Small graphs go through a dense Householder tridiagonalization + QR
//! (nalgebra's `SymmetricEigen`). Larger graphs use Lanczos with full
//! reorthogonalization and locking: each run works in the orthogonal
//! complement of the pairs already locked, and a final run checks that no
//! eigenvalue below the locked set was missed. Locking is what recovers
//! repeated eigenvalues, which a single Krylov sequence cannot see. The
//! constant vector is locked up front since the graph is known to be
//! connected.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Graphs up to this many nodes use the dense solver under [`EigenSolver::Auto`].
pub const DENSE_LIMIT: usize = 2000;

/// Relative residual target for Lanczos Ritz pairs.
pub const LANCZOS_TOL: f64 = 1e-10;

const MAX_KRYLOV: usize = 600;
const MAX_RESTARTS: usize = 30;

/// The `how_many` smallest eigenpairs of `L`, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    pub eigenvalues: Vec<f64>,
    /// Unit-norm, mutually orthogonal; `eigenvectors[k]` pairs with `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenSolver {
    #[default]
    Auto,
    Dense,
    Lanczos,
}

/// `y = L x` without forming `L`.
pub fn laplacian_apply(g: &Graph, x: &[f64], y: &mut [f64]) {
    for (i, out) in y.iter_mut().enumerate() {
        let nb = g.neighbors(i);
        let s: f64 = nb.iter().map(|&j| x[j]).sum();
        *out = nb.len() as f64 * x[i] - s;
    }
}

pub fn dense_laplacian(g: &Graph) -> DMatrix<f64> {
    let n = g.node_count();
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        l[(i, i)] = g.degree(i) as f64;
    }
    for &(a, b) in g.edges() {
        l[(a, b)] = -1.0;
        l[(b, a)] = -1.0;
    }
    l
}

pub fn laplacian_eigenpairs(g: &Graph, how_many: usize) -> Result<SpectralBasis> {
    laplacian_eigenpairs_with(g, how_many, EigenSolver::Auto)
}

pub fn laplacian_eigenpairs_with(
    g: &Graph,
    how_many: usize,
    solver: EigenSolver,
) -> Result<SpectralBasis> {
    let n = g.node_count();
    if n < 3 {
        return Err(Error::Input(format!(
            "spectral embedding needs at least 3 nodes, graph has {n}"
        )));
    }
    if how_many == 0 || how_many > n {
        return Err(Error::Param(format!(
            "requested {how_many} eigenpairs of a {n}-node graph"
        )));
    }
    let (_, components) = g.components();
    if components > 1 {
        return Err(Error::Disconnected { components });
    }
    let use_dense = match solver {
        EigenSolver::Dense => true,
        EigenSolver::Lanczos => false,
        EigenSolver::Auto => n <= DENSE_LIMIT,
    };
    let (mut values, mut vectors) = if use_dense {
        dense_smallest(g, how_many)
    } else {
        lanczos_smallest(g, how_many)?
    };
    for v in &mut values {
        *v = v.max(0.0);
    }
    for v in &mut vectors {
        fix_sign(v);
    }
    Ok(SpectralBasis {
        eigenvalues: values,
        eigenvectors: vectors,
    })
}

/// Flips `v` so its first entry that is not round-off noise is positive.
fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * max) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn dense_smallest(g: &Graph, how_many: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = SymmetricEigen::new(dense_laplacian(g));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order
        .into_iter()
        .take(how_many)
        .map(|k| {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            normalize(&mut v);
            (eig.eigenvalues[k], v)
        })
        .unzip()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) -> f64 {
    let nrm = norm(a);
    if nrm > 0.0 {
        a.iter_mut().for_each(|x| *x /= nrm);
    }
    nrm
}

/// Removes the components of `w` along each (orthonormal) vector in `basis`, twice.
fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    orthogonalize_against(w, &[basis]);
}

/// Like [`orthogonalize`] over the union of several mutually orthogonal sets.
/// Each pass sweeps all sets: cleaning one set at a time lets the second
/// reintroduce components along the first.
fn orthogonalize_against(w: &mut [f64], sets: &[&[Vec<f64>]]) {
    for _ in 0..2 {
        for b in sets.iter().flat_map(|s| s.iter()) {
            let c = dot(w, b);
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
}

fn residual_inf(g: &Graph, lambda: f64, v: &[f64]) -> f64 {
    let mut lv = vec![0.0; v.len()];
    laplacian_apply(g, v, &mut lv);
    lv.iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).abs())
        .fold(0.0, f64::max)
}

/// Residual of `(lambda, v)` for `L` restricted to the complement of `locked`,
/// which is what a run against `locked` can actually drive to zero.
fn projected_residual(g: &Graph, lambda: f64, v: &[f64], locked: &[Vec<f64>]) -> f64 {
    let mut r = vec![0.0; v.len()];
    laplacian_apply(g, v, &mut r);
    r.iter_mut().zip(v).for_each(|(a, b)| *a -= lambda * b);
    orthogonalize(&mut r, locked);
    norm(&r)
}

fn lanczos_smallest(g: &Graph, how_many: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = g.node_count();
    // a connected graph's null space is the constant vector
    let mut locked: Vec<(f64, Vec<f64>)> = vec![(0.0, vec![1.0 / (n as f64).sqrt(); n])];
    let max_rounds = 4 * how_many + 16;
    let mut settled = false;
    for round in 0..max_rounds {
        let avail = n - locked.len();
        if avail == 0 {
            settled = true;
            break;
        }
        let vecs: Vec<Vec<f64>> = locked.iter().map(|(_, v)| v.clone()).collect();
        if locked.len() < how_many {
            let need = (how_many - locked.len()).min(avail);
            locked.extend(lanczos_run(g, &vecs, need, round as u64)?);
        } else {
            // verification: the smallest pair of the complement must not undercut the locked set
            let found = lanczos_run(g, &vecs, 1, round as u64)?;
            let (lambda, v) = found.into_iter().next().expect("at least one pair");
            let top = locked.iter().map(|p| p.0).fold(f64::MIN, f64::max);
            if lambda < top - LANCZOS_TOL * top.max(1.0) {
                locked.push((lambda, v));
            } else {
                settled = true;
                break;
            }
        }
        locked.sort_by(|a, b| a.0.total_cmp(&b.0));
        locked.truncate(how_many);
    }
    if !settled {
        return Err(Error::Numerical(
            "Lanczos locking did not settle on the smallest eigenvalues".to_string(),
        ));
    }
    let (values, vectors) = rayleigh_ritz(g, locked.into_iter().map(|(_, v)| v).collect());
    for (lambda, v) in values.iter().zip(&vectors) {
        let r = residual_inf(g, *lambda, v);
        if r > 1e-8 * lambda.abs().max(1.0) {
            return Err(Error::Numerical(format!(
                "Lanczos eigenpair {lambda} has residual {r:e}"
            )));
        }
    }
    Ok((values, vectors))
}

/// Re-diagonalizes `L` on the span of `vectors`, which sharpens pairs that
/// were converged in different complements.
fn rayleigh_ritz(g: &Graph, mut vectors: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let k = vectors.len();
    let n = g.node_count();
    for i in 0..k {
        let (done, rest) = vectors.split_at_mut(i);
        orthogonalize(&mut rest[0], done);
        normalize(&mut rest[0]);
    }
    let mut lv = vec![vec![0.0; n]; k];
    for (v, out) in vectors.iter().zip(lv.iter_mut()) {
        laplacian_apply(g, v, out);
    }
    let h = DMatrix::from_fn(k, k, |i, j| 0.5 * (dot(&vectors[i], &lv[j]) + dot(&vectors[j], &lv[i])));
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order
        .into_iter()
        .map(|c| {
            let mut y = vec![0.0; n];
            for (coef, v) in eig.eigenvectors.column(c).iter().zip(&vectors) {
                y.iter_mut().zip(v).for_each(|(a, b)| *a += coef * b);
            }
            normalize(&mut y);
            (eig.eigenvalues[c], y)
        })
        .unzip()
}

/// One Lanczos sequence in the complement of `locked`, restarted until the
/// lowest `need` Ritz pairs converge. May return fewer pairs when the Krylov
/// space becomes invariant early, never zero.
fn lanczos_run(
    g: &Graph,
    locked: &[Vec<f64>],
    need: usize,
    seed: u64,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = g.node_count();
    let avail = n - locked.len();
    let max_m = avail.min(MAX_KRYLOV.max(4 * need + 40));
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a9c_2f00 ^ seed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();

    for _restart in 0..MAX_RESTARTS {
        orthogonalize(&mut start, locked);
        if normalize(&mut start) == 0.0 {
            start = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            continue;
        }
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![0.0; n];
        // the tridiagonal eigensolve is cubic in m, so checkpoints thin out geometrically
        let mut checkpoint = need.max(10);
        let best: Vec<(f64, Vec<f64>)> = loop {
            let j = basis.len() - 1;
            laplacian_apply(g, &basis[j], &mut w);
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            orthogonalize_against(&mut w, &[locked, &basis]);
            let b = norm(&w);
            let m = alpha.len();
            let scale = alpha.iter().fold(1.0f64, |s, x| s.max(x.abs()));
            // a tiny b means the Krylov space is (numerically) invariant; normalizing it would only amplify roundoff
            let invariant = b <= 1e-8 * scale;
            let full = m >= max_m;
            if invariant || full || m >= checkpoint {
                checkpoint = (checkpoint * 3 / 2).max(checkpoint + 10);
                let (ritz, converged) = ritz_pairs(&alpha, &beta, b, &basis, need, invariant);
                if converged
                    && ritz.iter().all(|(lambda, v)| {
                        projected_residual(g, *lambda, v, locked) <= 1e-9 * lambda.abs().max(1.0)
                    })
                {
                    return Ok(ritz);
                }
                if invariant || full {
                    break ritz;
                }
            }
            beta.push(b);
            let mut next = w.clone();
            next.iter_mut().for_each(|x| *x /= b);
            basis.push(next);
        };

        // explicit restart from the sum of the wanted Ritz vectors
        start = vec![0.0; n];
        for (_, v) in &best {
            start.iter_mut().zip(v).for_each(|(s, x)| *s += x);
        }
        for s in start.iter_mut() {
            *s += 1e-3 * (rng.gen::<f64>() - 0.5);
        }
    }
    Err(Error::Numerical(format!(
        "Lanczos failed to converge {need} eigenpairs after {MAX_RESTARTS} restarts"
    )))
}

/// Ritz pairs of the tridiagonal projection, lowest first, truncated to
/// `need`. The flag reports whether all returned pairs meet [`LANCZOS_TOL`]
/// by the `|beta_m * s_m|` estimate.
fn ritz_pairs(
    alpha: &[f64],
    beta: &[f64],
    last_beta: f64,
    basis: &[Vec<f64>],
    need: usize,
    exact: bool,
) -> (Vec<(f64, Vec<f64>)>, bool) {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let take = need.min(m);
    let mut converged = true;
    let n = basis[0].len();
    let pairs = order[..take]
        .iter()
        .map(|&k| {
            let theta = eig.eigenvalues[k];
            let s = eig.eigenvectors.column(k);
            let estimate = (last_beta * s[m - 1]).abs();
            if !exact && estimate > LANCZOS_TOL * theta.abs().max(1.0) {
                converged = false;
            }
            let mut y = vec![0.0; n];
            for (coef, v) in s.iter().zip(basis) {
                y.iter_mut().zip(v).for_each(|(a, b)| *a += coef * b);
            }
            normalize(&mut y);
            (theta, y)
        })
        .collect();
    (pairs, converged)
}
