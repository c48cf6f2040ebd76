use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::banded::BandedCholesky;
use super::sparse::{dot, norm, CsrMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Relative change of the eigenvalue between sweeps that ends the iteration.
    pub tol: f64,
    pub max_iter: usize,
    /// Number of vectors iterated together.
    pub block: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { tol: 1e-10, max_iter: 500, block: 6, seed: 7 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `‖S x − μ K x‖ / (|μ| ‖K x‖)` for the returned pair.
    pub residual: f64,
    pub iterations: usize,
}

/// Operators defining the pencil `S x = μ K x` with `K` positive definite on
/// the iteration subspace.
pub struct Pencil<'a> {
    pub n: usize,
    pub apply_s: &'a dyn Fn(&[f64]) -> Vec<f64>,
    pub apply_k: &'a dyn Fn(&[f64]) -> Vec<f64>,
    pub solve_k: &'a dyn Fn(&[f64]) -> Vec<f64>,
    /// Optional projection onto the admissible subspace, applied after every solve.
    pub project: Option<&'a dyn Fn(&mut [f64])>,
}

/// Largest eigenvalue of `S x = μ K x` by block inverse iteration
/// (`X ← K⁻¹ S X`) with Rayleigh–Ritz extraction. The seed block is drawn
/// from a fixed-seed generator so results are reproducible.
pub fn dominant_generalized(p: &Pencil, opts: EigenOptions) -> Result<EigenResult> {
    let n = p.n;
    if n == 0 {
        return Err(Error::InvalidInput("empty eigenproblem".into()));
    }
    let block = opts.block.clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = (0..block)
        .map(|_| {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            if let Some(pr) = p.project {
                pr(&mut v);
            }
            v
        })
        .collect();
    let mut prev = f64::NAN;
    let mut last_res = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let mut y: Vec<Vec<f64>> = x
            .iter()
            .map(|v| {
                let mut w = (p.solve_k)(&(p.apply_s)(v));
                if let Some(pr) = p.project {
                    pr(&mut w);
                }
                w
            })
            .collect();
        // Scale to unit length to keep the Gram matrices well conditioned.
        for v in y.iter_mut() {
            let s = norm(v);
            if s > 0.0 {
                v.iter_mut().for_each(|t| *t /= s);
            }
        }
        // Keep the previous Ritz block in the basis: a two-deep block Krylov
        // space converges much faster on clustered spectra.
        if it > 1 {
            for v in &x {
                let mut v = v.clone();
                let s = norm(&v);
                if s > 0.0 {
                    v.iter_mut().for_each(|t| *t /= s);
                    y.push(v);
                }
            }
        }
        let sy: Vec<Vec<f64>> = y.iter().map(|v| (p.apply_s)(v)).collect();
        let ky: Vec<Vec<f64>> = y.iter().map(|v| (p.apply_k)(v)).collect();
        let m = y.len();
        let gs = DMatrix::from_fn(m, m, |i, j| 0.5 * (dot(&y[i], &sy[j]) + dot(&y[j], &sy[i])));
        let gk = DMatrix::from_fn(m, m, |i, j| 0.5 * (dot(&y[i], &ky[j]) + dot(&y[j], &ky[i])));
        let ek = SymmetricEigen::new(gk);
        let dmax = ek.eigenvalues.max();
        if !(dmax > 0.0) {
            return Err(Error::NullspaceOverlap);
        }
        let keep: Vec<usize> = (0..m).filter(|&i| ek.eigenvalues[i] > 1e-13 * dmax).collect();
        let t = DMatrix::from_fn(m, keep.len(), |i, j| {
            ek.eigenvectors[(i, keep[j])] / ek.eigenvalues[keep[j]].sqrt()
        });
        let red = t.transpose() * &gs * &t;
        let red = 0.5 * (&red + red.transpose());
        let es = SymmetricEigen::new(red);
        let mut order: Vec<usize> = (0..keep.len()).collect();
        order.sort_by(|&a, &b| es.eigenvalues[b].total_cmp(&es.eigenvalues[a]));
        let coef = &t * &es.eigenvectors;
        let combine = |vs: &[Vec<f64>], col: usize| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (i, v) in vs.iter().enumerate() {
                let c = coef[(i, col)];
                for (o, vi) in out.iter_mut().zip(v) {
                    *o += c * vi;
                }
            }
            out
        };
        let mu = es.eigenvalues[order[0]];
        let top = combine(&y, order[0]);
        let s_top = combine(&sy, order[0]);
        let k_top = combine(&ky, order[0]);
        let r: Vec<f64> = s_top.iter().zip(&k_top).map(|(s, k)| s - mu * k).collect();
        let kn = norm(&k_top);
        last_res = if mu != 0.0 && kn > 0.0 { norm(&r) / (mu.abs() * kn) } else { norm(&r) };
        let change = ((mu - prev) / mu).abs();
        if it > 2 && (change <= opts.tol || last_res <= opts.tol) {
            return Ok(EigenResult { value: mu, vector: top, residual: last_res, iterations: it });
        }
        prev = mu;
        x = order.iter().take(block).map(|&c| combine(&y, c)).collect();
        // Refill the block if Rayleigh–Ritz dropped dependent directions.
        while x.len() < block {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            if let Some(pr) = p.project {
                pr(&mut v);
            }
            x.push(v);
        }
    }
    Err(Error::ConvergenceFailure { iterations: opts.max_iter, residual: last_res })
}

/// Smallest eigenvalue of `A x = λ B x` (A semidefinite, B definite) by
/// inverse iteration on the shifted operator `A − σ B` with `σ ≤ 0`.
pub fn min_generalized_eigenpair(
    a: &CsrMatrix,
    b: &CsrMatrix,
    shift: f64,
    opts: EigenOptions,
) -> Result<EigenResult> {
    if shift > 0.0 {
        return Err(Error::InvalidInput("shift must be non-positive".into()));
    }
    let shifted = if shift == 0.0 { a.clone() } else { a.linear_combination(1.0, b, -shift) };
    let chol = BandedCholesky::factor(&shifted).map_err(|_| Error::NullspaceOverlap)?;
    let apply_s = |x: &[f64]| b.matvec(x);
    let apply_k = |x: &[f64]| shifted.matvec(x);
    let solve_k = |x: &[f64]| chol.solve(x);
    let pencil = Pencil { n: a.n, apply_s: &apply_s, apply_k: &apply_k, solve_k: &solve_k, project: None };
    let res = dominant_generalized(&pencil, opts)?;
    let lambda = shift + 1.0 / res.value;
    let ax = a.matvec(&res.vector);
    let bx = b.matvec(&res.vector);
    let r: Vec<f64> = ax.iter().zip(&bx).map(|(p, q)| p - lambda * q).collect();
    let scale = lambda.abs() * norm(&bx);
    let residual = if scale > 0.0 { norm(&r) / scale } else { norm(&r) };
    Ok(EigenResult { value: lambda, vector: res.vector, residual, iterations: res.iterations })
}
