use nalgebra::{Matrix6, SymmetricEigen};

use crate::error::{Error, Result};

pub type Mat3 = [[f64; 3]; 3];

/// Orthonormal basis of symmetric 3×3 matrices used for the 6×6 (Mandel)
/// representation: e1e1, e2e2, e3e3, then the normalized 23, 13, 12 shears.
pub fn mandel_basis() -> [Mat3; 6] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut b = [[[0.0; 3]; 3]; 6];
    b[0][0][0] = 1.0;
    b[1][1][1] = 1.0;
    b[2][2][2] = 1.0;
    b[3][1][2] = s;
    b[3][2][1] = s;
    b[4][0][2] = s;
    b[4][2][0] = s;
    b[5][0][1] = s;
    b[5][1][0] = s;
    b
}

/// Mandel vector of a symmetric matrix.
#[inline]
pub fn to_mandel(m: &Mat3) -> [f64; 6] {
    let r = std::f64::consts::SQRT_2;
    [m[0][0], m[1][1], m[2][2], r * m[1][2], r * m[0][2], r * m[0][1]]
}

#[inline]
pub fn from_mandel(v: &[f64; 6]) -> Mat3 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        [v[0], s * v[5], s * v[4]],
        [s * v[5], v[1], s * v[3]],
        [s * v[4], s * v[3], v[2]],
    ]
}

#[inline]
pub fn ddot(a: &Mat3, b: &Mat3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += a[i][j] * b[i][j];
        }
    }
    s
}

/// Fourth-order elasticity tensor with minor and major index symmetries
/// (`A_ijkl = A_jikl = A_klij`, hence also `A_ijkl = A_jilk`) and a positive
/// coercivity constant.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticityTensor4 {
    a: [[[[f64; 3]; 3]; 3]; 3],
    c0: f64,
}

impl ElasticityTensor4 {
    pub fn new(a: [[[[f64; 3]; 3]; 3]; 3]) -> Result<Self> {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let v = a[i][j][k][l];
                        if v != a[j][i][k][l] || v != a[k][l][i][j] {
                            return Err(Error::TensorSymmetry([i, j, k, l]));
                        }
                    }
                }
            }
        }
        let mut t = ElasticityTensor4 { a, c0: 0.0 };
        let eig = SymmetricEigen::new(t.mandel_matrix());
        let c0 = eig.eigenvalues.min();
        let scale = eig.eigenvalues.amax();
        if !(c0 > 1e-12 * scale) || !c0.is_finite() {
            return Err(Error::NotCoercive(c0));
        }
        t.c0 = c0;
        Ok(t)
    }

    /// `A = λ δ⊗δ + μ (δ_ik δ_jl + δ_il δ_jk)`.
    pub fn isotropic(lambda: f64, mu: f64) -> Result<Self> {
        let mut a = [[[[0.0; 3]; 3]; 3]; 3];
        let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        a[i][j][k][l] = lambda * d(i, j) * d(k, l) + mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k));
                    }
                }
            }
        }
        Self::new(a)
    }

    /// Tensor with `A D : D = |D|²` (λ = 0, μ = 1/2).
    pub fn identity_like() -> Self {
        Self::isotropic(0.0, 0.5).expect("identity tensor is coercive")
    }

    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.a[i][j][k][l]
    }

    pub fn components(&self) -> &[[[[f64; 3]; 3]; 3]; 3] {
        &self.a
    }

    pub fn coercivity(&self) -> f64 {
        self.c0
    }

    /// `(A B)_kl = Σ_ij A_ijkl B_ij`.
    pub fn apply(&self, b: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let bij = b[i][j];
                if bij == 0.0 {
                    continue;
                }
                for k in 0..3 {
                    for l in 0..3 {
                        out[k][l] += self.a[i][j][k][l] * bij;
                    }
                }
            }
        }
        out
    }

    /// `C_IJ = (A M_J) : M_I` in the Mandel basis.
    pub fn mandel_matrix(&self) -> Matrix6<f64> {
        let basis = mandel_basis();
        let mut c = Matrix6::zeros();
        for jj in 0..6 {
            let am = self.apply(&basis[jj]);
            for ii in 0..6 {
                c[(ii, jj)] = ddot(&am, &basis[ii]);
            }
        }
        c
    }

    /// Frobenius norm of the component array.
    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        s += self.a[i][j][k][l].powi(2);
                    }
                }
            }
        }
        s.sqrt()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut a = self.a;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        a[i][j][k][l] += other.a[i][j][k][l];
                    }
                }
            }
        }
        Self::new(a)
    }
}
