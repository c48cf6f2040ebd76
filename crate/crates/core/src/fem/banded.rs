use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Cholesky factor of a symmetric positive definite band matrix.
///
/// Used for the repeated solves of the eigenvalue iterations and the plate
/// stepper, where one factorization is reused many times. Storage is
/// `n × (bw + 1)` with row `i` holding columns `i − bw ..= i`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n;
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            for p in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.col[p];
                if j <= i {
                    l[i * w + (j + bw - i)] = a.val[p];
                }
            }
        }
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            let diag_in = l[i * w + bw];
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                let ri = i * w + bw - i;
                let rj = j * w + bw - j;
                let mut s = l[ri + j];
                let (li, lj) = (&l[ri + k0..ri + j], &l[rj + k0..rj + j]);
                s -= li.iter().zip(lj).map(|(x, y)| x * y).sum::<f64>();
                if j == i {
                    if !(s > 1e-13 * diag_in.abs()) || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite(i));
                    }
                    l[ri + j] = s.sqrt();
                } else {
                    l[ri + j] = s / l[rj + j];
                }
            }
        }
        Ok(BandedCholesky { n, bw, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            let ri = i * w + bw - i;
            let mut s = x[i];
            for j in j0..i {
                s -= self.l[ri + j] * x[j];
            }
            x[i] = s / self.l[ri + i];
        }
        for i in (0..n).rev() {
            let ri = i * w + bw - i;
            x[i] /= self.l[ri + i];
            let xi = x[i];
            let j0 = i.saturating_sub(bw);
            for j in j0..i {
                x[j] -= self.l[ri + j] * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
