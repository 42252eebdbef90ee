//! Ground states of Hermitian sector operators.
//!
//! `lanczos_ground` runs thick-restart Lanczos with full (two-pass
//! Gram-Schmidt) reorthogonalization. Further eigenpairs are obtained by
//! locking converged vectors and restarting in their orthogonal complement.
//! In an exactly degenerate multiplet the first vector is the projection of
//! the seeded start vector, so repeated runs with the same seed pick the
//! same member of the multiplet.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{LinearOperator, SparseOperator, C64};

pub const DENSE_LIMIT: usize = 20_000;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LanczosOptions {
    /// Residual tolerance relative to the spectral width.
    pub tol: f64,
    /// Matrix-vector products allowed per eigenpair.
    pub max_iter: usize,
    /// Krylov basis size before a thick restart; 0 picks one from `memory_budget`.
    pub max_basis: usize,
    /// Bytes available for the Krylov basis.
    pub memory_budget: usize,
    /// Relative gap below which two levels count as one multiplet.
    pub degeneracy_tol: f64,
    /// Keep computing levels until the ground multiplet is closed.
    pub resolve_multiplet: bool,
    pub max_multiplet: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            tol: 1e-10,
            max_iter: 2000,
            max_basis: 0,
            memory_budget: 1 << 30,
            degeneracy_tol: 1e-8,
            resolve_multiplet: false,
            max_multiplet: 8,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralResult {
    pub energies: Vec<f64>,
    #[serde(skip)]
    pub vectors: Vec<Vec<C64>>,
    pub residuals: Vec<f64>,
    pub seed: u64,
    /// Number of computed levels within the degeneracy tolerance of the lowest.
    pub multiplet: usize,
    /// True when a computed level lies above the ground multiplet.
    pub multiplet_closed: bool,
    pub spectral_width: f64,
    pub iterations: usize,
}

impl SpectralResult {
    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn ground(&self) -> &[C64] {
        &self.vectors[0]
    }

    /// The computed members of the ground multiplet.
    pub fn multiplet_vectors(&self) -> &[Vec<C64>] {
        &self.vectors[..self.multiplet]
    }
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn scale(a: &mut [C64], s: f64) {
    a.iter_mut().for_each(|x| *x *= s);
}

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// Two passes of classical Gram-Schmidt; returns the accumulated projections.
fn orthogonalize(w: &mut [C64], basis: &[Vec<C64>]) -> Vec<C64> {
    let mut total = vec![zero(); basis.len()];
    for _ in 0..2 {
        let h: Vec<C64> = basis.iter().map(|v| dot(v, w)).collect();
        for (v, &hi) in basis.iter().zip(&h) {
            axpy(w, -hi, v);
        }
        total.iter_mut().zip(&h).for_each(|(t, hi)| *t += hi);
    }
    total
}

/// One full Gram-Schmidt pass, repeated when it removed a large share of
/// the norm. Returns the total projection onto the last basis vector.
fn reorthogonalize(w: &mut [C64], basis: &[Vec<C64>]) -> C64 {
    let mut last = zero();
    for _ in 0..2 {
        let before = norm(w);
        let h: Vec<C64> = basis.iter().map(|v| dot(v, w)).collect();
        for (v, &hi) in basis.iter().zip(&h) {
            axpy(w, -hi, v);
        }
        last += h[h.len() - 1];
        if norm(w) > std::f64::consts::FRAC_1_SQRT_2 * before {
            break;
        }
    }
    last
}

/// Rotate the global phase so that the largest component is real positive.
pub fn fix_phase(v: &mut [C64]) {
    let max = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v.iter().find(|x| x.norm() >= max * (1.0 - 1e-8)).copied().unwrap();
    let phase = pivot.conj() / pivot.norm();
    v.iter_mut().for_each(|x| *x *= phase);
}

pub fn seeded_vector(dim: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let n = norm(&v);
    scale(&mut v, 1.0 / n);
    v
}

struct Ritz {
    value: f64,
    vector: Vec<C64>,
    residual: f64,
}

struct Krylov<'a, O: LinearOperator> {
    op: &'a O,
    opts: &'a LanczosOptions,
    max_basis: usize,
    width: f64,
    iterations: usize,
}

impl<'a, O: LinearOperator> Krylov<'a, O> {
    fn matvec(&mut self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![zero(); x.len()];
        self.op.apply_into(x, &mut y);
        self.iterations += 1;
        y
    }

    fn true_residual(&mut self, x: &[C64], theta: f64) -> f64 {
        let mut r = self.matvec(x);
        axpy(&mut r, C64::new(-theta, 0.0), x);
        norm(&r)
    }

    /// Lowest eigenpair of the operator restricted to the complement of `locked`.
    fn lowest(&mut self, locked: &[Vec<C64>], start: &[C64], fallback_seed: u64) -> Result<Ritz> {
        let dim = self.op.dim();
        let free = dim - locked.len();
        let cap = self.max_basis.min(free).max(1);
        let budget = self.iterations + self.opts.max_iter;

        let mut v0 = start.to_vec();
        orthogonalize(&mut v0, locked);
        let mut reseed = fallback_seed;
        while norm(&v0) < 1e-8 {
            reseed = reseed.wrapping_add(0x9e37_79b9_7f4a_7c15);
            v0 = seeded_vector(dim, reseed);
            orthogonalize(&mut v0, locked);
        }
        let n0 = norm(&v0);
        scale(&mut v0, 1.0 / n0);

        let mut basis: Vec<Vec<C64>> = vec![v0];
        let mut t = DMatrix::<f64>::zeros(cap + 1, cap + 1);
        let mut best = f64::INFINITY;

        loop {
            let j = basis.len() - 1;
            let mut w = self.matvec(&basis[j]);
            if !locked.is_empty() {
                orthogonalize(&mut w, locked);
            }
            // three-term (or arrow, after a restart) recurrence first
            for i in 0..j {
                let c = t[(i, j)];
                if c != 0.0 {
                    axpy(&mut w, C64::new(-c, 0.0), &basis[i]);
                }
            }
            let mut alpha = dot(&basis[j], &w).re;
            axpy(&mut w, C64::new(-alpha, 0.0), &basis[j]);
            alpha += reorthogonalize(&mut w, &basis).re;
            t[(j, j)] = alpha;
            let beta = norm(&w);
            let m = j + 1;

            let eig = SymmetricEigen::new(t.view((0, 0), (m, m)).into_owned());
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let lo = order[0];
            let hi = order[m - 1];
            self.width = self.width.max(eig.eigenvalues[hi] - eig.eigenvalues[lo]);
            let scale_ref = self.width.max(eig.eigenvalues[lo].abs()).max(f64::MIN_POSITIVE);
            let target = self.opts.tol * scale_ref;
            let estimate = (beta * eig.eigenvectors[(j, lo)]).abs();
            let exhausted = beta <= 1e-13 * scale_ref || m == free;

            if estimate < target || exhausted {
                let theta = eig.eigenvalues[lo];
                let x = combine(&basis, eig.eigenvectors.column(lo).as_slice());
                let res = self.true_residual(&x, theta);
                best = best.min(res);
                if res < target {
                    return Ok(Ritz { value: theta, vector: x, residual: res });
                }
                if exhausted {
                    // invariant subspace without a converged pair: continue from the Ritz vector
                    let mut fresh = seeded_vector(dim, reseed.wrapping_add(self.iterations as u64));
                    orthogonalize(&mut fresh, locked);
                    let mut v = x;
                    axpy(&mut v, C64::new(1e-3, 0.0), &fresh);
                    orthogonalize(&mut v, locked);
                    let nv = norm(&v);
                    scale(&mut v, 1.0 / nv);
                    basis = vec![v];
                    t.fill(0.0);
                    continue;
                }
            } else {
                best = best.min(estimate);
            }
            if self.iterations >= budget {
                return Err(Error::NoConvergence { iterations: self.iterations, best_residual: best });
            }

            scale(&mut w, 1.0 / beta);
            if m < cap {
                t[(j, j + 1)] = beta;
                t[(j + 1, j)] = beta;
                basis.push(w);
                continue;
            }

            // thick restart: keep the lowest half of the Ritz vectors
            let keep = (m / 2).max(1);
            let coeffs: Vec<Vec<f64>> =
                order.iter().take(keep).map(|&idx| eig.eigenvectors.column(idx).iter().copied().collect()).collect();
            let mut kept = combine_many(&basis, &coeffs);
            let mut tn = DMatrix::<f64>::zeros(cap + 1, cap + 1);
            for (i, &idx) in order.iter().take(keep).enumerate() {
                tn[(i, i)] = eig.eigenvalues[idx];
                let b = beta * eig.eigenvectors[(j, idx)];
                tn[(i, keep)] = b;
                tn[(keep, i)] = b;
            }
            kept.push(w);
            basis = kept;
            t = tn;
        }
    }
}

fn combine(basis: &[Vec<C64>], coeffs: &[f64]) -> Vec<C64> {
    let mut x = vec![zero(); basis[0].len()];
    for (v, &c) in basis.iter().zip(coeffs) {
        axpy(&mut x, C64::new(c, 0.0), v);
    }
    let n = norm(&x);
    scale(&mut x, 1.0 / n);
    x
}

/// Several linear combinations of the basis in one blocked sweep.
fn combine_many(basis: &[Vec<C64>], coeffs: &[Vec<f64>]) -> Vec<Vec<C64>> {
    const BLOCK: usize = 2048;
    let dim = basis[0].len();
    let mut out = vec![vec![zero(); dim]; coeffs.len()];
    for start in (0..dim).step_by(BLOCK) {
        let end = (start + BLOCK).min(dim);
        for (v, b) in basis.iter().enumerate() {
            let src = &b[start..end];
            for (o, c) in out.iter_mut().zip(coeffs) {
                let a = c[v];
                o[start..end].iter_mut().zip(src).for_each(|(y, x)| *y += x * a);
            }
        }
    }
    for o in &mut out {
        let n = norm(o);
        scale(o, 1.0 / n);
    }
    out
}

fn auto_basis(dim: usize, opts: &LanczosOptions) -> usize {
    if opts.max_basis > 0 {
        return opts.max_basis.max(2);
    }
    let by_memory = opts.memory_budget / (dim.max(1) * std::mem::size_of::<C64>());
    // past a few tens of thousands of states the reorthogonalization cost
    // outgrows the matvec, so large sectors restart early
    let preferred = if dim <= 50_000 { 120 } else { 24 };
    by_memory.min(preferred).max(8)
}

/// The `k` lowest eigenpairs of a Hermitian operator.
pub fn lanczos_ground<O: LinearOperator>(op: &O, k: usize, seed: u64, opts: &LanczosOptions) -> Result<SpectralResult> {
    lanczos_from(op, k, &seeded_vector(op.dim(), seed), seed, opts)
}

/// As `lanczos_ground`, with an explicit start vector.
pub fn lanczos_from<O: LinearOperator>(
    op: &O,
    k: usize,
    start: &[C64],
    seed: u64,
    opts: &LanczosOptions,
) -> Result<SpectralResult> {
    let dim = op.dim();
    if k == 0 || k > dim {
        return Err(Error::InvalidParams(format!("requested {k} eigenpairs of a {dim}-dimensional operator")));
    }
    if start.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: start.len() });
    }
    let mut kr = Krylov { op, opts, max_basis: auto_basis(dim, opts), width: 0.0, iterations: 0 };
    let mut locked: Vec<Vec<C64>> = Vec::new();
    let mut energies = Vec::new();
    let mut residuals = Vec::new();
    let mut next_start = start.to_vec();
    let limit = if opts.resolve_multiplet { k.max(opts.max_multiplet + 1).min(dim) } else { k };
    while locked.len() < limit {
        let r = kr.lowest(&locked, &next_start, seed.wrapping_add(locked.len() as u64))?;
        energies.push(r.value);
        residuals.push(r.residual);
        locked.push(r.vector);
        next_start = seeded_vector(dim, seed.wrapping_add(1 + locked.len() as u64));
        if locked.len() >= k && opts.resolve_multiplet {
            let gap = opts.degeneracy_tol * kr.width.max(f64::MIN_POSITIVE);
            if r.value - energies[0] > gap {
                break;
            }
        }
    }
    finish(energies, locked, residuals, seed, kr.width, kr.iterations, opts)
}

fn finish(
    energies: Vec<f64>,
    vectors: Vec<Vec<C64>>,
    residuals: Vec<f64>,
    seed: u64,
    width: f64,
    iterations: usize,
    opts: &LanczosOptions,
) -> Result<SpectralResult> {
    let mut idx: Vec<usize> = (0..energies.len()).collect();
    // stable sort keeps the seeded vector first inside a degenerate multiplet
    idx.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
    let gap = opts.degeneracy_tol * width.max(f64::MIN_POSITIVE);
    let e0 = energies[idx[0]];
    let multiplet = idx.iter().filter(|&&i| energies[i] - e0 <= gap).count();
    let mut vectors: Vec<Vec<C64>> = idx.iter().map(|&i| vectors[i].clone()).collect();
    vectors.iter_mut().for_each(|v| fix_phase(v));
    Ok(SpectralResult {
        energies: idx.iter().map(|&i| energies[i]).collect(),
        residuals: idx.iter().map(|&i| residuals[i]).collect(),
        multiplet_closed: multiplet < idx.len(),
        multiplet,
        vectors,
        seed,
        spectral_width: width,
        iterations,
    })
}

/// Full spectrum by dense Hermitian diagonalization.
pub fn dense_spectrum(op: &SparseOperator) -> Result<SpectralResult> {
    if op.dim() > DENSE_LIMIT {
        return Err(Error::TooLarge { dim: op.dim(), limit: DENSE_LIMIT });
    }
    dense_from_matrix(op.to_dense())
}

pub fn dense_from_matrix(m: DMatrix<C64>) -> Result<SpectralResult> {
    let dim = m.nrows();
    if dim == 0 {
        return Err(Error::InvalidParams("empty operator".into()));
    }
    let eig = SymmetricEigen::new(m.clone());
    let energies: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let vectors: Vec<Vec<C64>> = (0..dim).map(|i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
    let residuals = vectors
        .iter()
        .zip(&energies)
        .map(|(v, &e)| {
            let mut y = vec![zero(); dim];
            LinearOperator::apply_into(&m, v, &mut y);
            axpy(&mut y, C64::new(-e, 0.0), v);
            norm(&y)
        })
        .collect();
    let width = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - energies.iter().copied().fold(f64::INFINITY, f64::min);
    finish(energies, vectors, residuals, 0, width, 0, &LanczosOptions { resolve_multiplet: true, ..Default::default() })
}
