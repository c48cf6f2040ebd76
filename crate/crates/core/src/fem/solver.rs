use super::sparse::{axpy, dot, norm, CsrMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Target relative residual `‖b − Ax‖ / ‖b‖`.
    pub tol: f64,
    /// Iteration cap; `None` uses `20·√n + 200`.
    pub max_iter: Option<usize>,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions { tol: 1e-10, max_iter: None }
    }
}

impl CgOptions {
    pub fn with_tol(tol: f64) -> Self {
        CgOptions { tol, max_iter: None }
    }

    pub fn cap(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(20 * (n as f64).sqrt().ceil() as usize + 200)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CgStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Kernel of a semidefinite operator together with the mean functionals
/// that fix the free constants.
///
/// Kernel vector `z_c` and weight vector `w_c` belong together; the solution
/// is shifted along `z_c` until `w_c · x = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gauge {
    pub kernel: Vec<Vec<f64>>,
    pub weights: Vec<Vec<f64>>,
}

impl Gauge {
    /// Removes the kernel component of a right-hand side.
    pub fn project_rhs(&self, b: &mut [f64]) {
        for z in &self.kernel {
            let zz = dot(z, z);
            if zz > 0.0 {
                axpy(-dot(z, b) / zz, z, b);
            }
        }
    }

    /// Shifts `x` along the kernel so that every weighted mean vanishes.
    pub fn fix(&self, x: &mut [f64]) {
        for (z, w) in self.kernel.iter().zip(&self.weights) {
            let wz = dot(w, z);
            if wz != 0.0 {
                axpy(-dot(w, x) / wz, z, x);
            }
        }
    }
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
pub fn solve_spd(op: &CsrMatrix, rhs: &[f64], opts: CgOptions) -> Result<(Vec<f64>, CgStats)> {
    solve_spd_with(op, rhs, None, None, opts)
}

/// Jacobi-preconditioned conjugate gradients with optional warm start and
/// gauge. With a gauge, the right-hand side is made consistent first and the
/// result is normalized afterwards.
pub fn solve_spd_with(
    op: &CsrMatrix,
    rhs: &[f64],
    x0: Option<&[f64]>,
    gauge: Option<&Gauge>,
    opts: CgOptions,
) -> Result<(Vec<f64>, CgStats)> {
    let n = op.n;
    assert_eq!(rhs.len(), n);
    let mut b = rhs.to_vec();
    if let Some(g) = gauge {
        g.project_rhs(&mut b);
    }
    let bnorm = norm(&b);
    let mut x = match x0 {
        Some(x0) => x0.to_vec(),
        None => vec![0.0; n],
    };
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], CgStats::default()));
    }
    let inv_diag: Vec<f64> = op.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut r = op.matvec(&x);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    if let Some(g) = gauge {
        g.project_rhs(&mut r);
    }
    let mut res = norm(&r) / bnorm;
    let cap = opts.cap(n);
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut it = 0;
    while res > opts.tol {
        if it >= cap {
            return Err(Error::MaxIterationsExceeded { iterations: it, residual: res });
        }
        op.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::IndefiniteDetected(pap));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        it += 1;
        // Recompute the true residual now and then to avoid drift.
        if it % 50 == 0 {
            op.matvec_into(&x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
            if let Some(g) = gauge {
                g.project_rhs(&mut r);
            }
        }
        res = norm(&r) / bnorm;
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if let Some(g) = gauge {
        g.fix(&mut x);
    }
    Ok((x, CgStats { iterations: it, residual: res }))
}
