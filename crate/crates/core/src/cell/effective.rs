use nalgebra::{Matrix3, Matrix6, SymmetricEigen};

use super::problems::{BasisMatrix, CellSolutionSet, IN_PLANE};
use crate::error::{Error, Result};
use crate::fem::hex::{self, NQP};
use crate::fem::{ddot, ElasticityTensor4, Mat3};
use crate::geometry::CellMesh;

/// Four-index tensor over the in-plane indices.
pub type Tensor2d = [[[[f64; 2]; 2]; 2]; 2];

/// Homogenized coefficients of the plate model.
///
/// `b` pairs its first index pair with the bending strain and its second
/// with the membrane strain: `b[αβ][γδ] = (1/|Zˢ|) ∫ A(D χᴮ_αβ − y₃M_αβ) : (D χ_γδ + M_γδ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveModel {
    pub a: Tensor2d,
    pub b: Tensor2d,
    pub c: Tensor2d,
    pub solid_volume: f64,
}

fn expand(m: &[[f64; 3]; 3]) -> Tensor2d {
    let mut t = [[[[0.0; 2]; 2]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    t[a][b][c][d] = m[BasisMatrix::slot(a, b)][BasisMatrix::slot(c, d)];
                }
            }
        }
    }
    t
}

/// Quadratic form of `t` in the orthonormal basis (M₁₁, M₂₂, √2 M₁₂).
pub fn voigt3(t: &Tensor2d) -> Matrix3<f64> {
    let r = std::f64::consts::SQRT_2;
    let basis: [[[f64; 2]; 2]; 3] = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]], [[0.0, 0.5 * r], [0.5 * r, 0.0]]];
    Matrix3::from_fn(|p, q| {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        s += t[i][j][k][l] * basis[p][i][j] * basis[q][k][l];
                    }
                }
            }
        }
        s
    })
}

pub fn max_abs(t: &Tensor2d) -> f64 {
    t.iter().flatten().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Largest `|t_ijkl − t_klij|` relative to the largest entry.
pub fn major_asymmetry(t: &Tensor2d) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    worst = worst.max((t[i][j][k][l] - t[k][l][i][j]).abs());
                }
            }
        }
    }
    let m = max_abs(t);
    if m == 0.0 {
        0.0
    } else {
        worst / m
    }
}

impl EffectiveModel {
    /// 6×6 Gram matrix `[[a, bᵀ], [b, c]]` in the Voigt-type basis.
    pub fn gram(&self) -> Matrix6<f64> {
        let a = voigt3(&self.a);
        let b = voigt3(&self.b);
        let c = voigt3(&self.c);
        Matrix6::from_fn(|i, j| match (i < 3, j < 3) {
            (true, true) => a[(i, j)],
            (false, false) => c[(i - 3, j - 3)],
            (true, false) => b[(j - 3, i)],
            (false, true) => b[(i - 3, j)],
        })
    }

    pub fn min_eigen_a(&self) -> f64 {
        SymmetricEigen::new(voigt3(&self.a)).eigenvalues.min()
    }

    pub fn min_eigen_c(&self) -> f64 {
        SymmetricEigen::new(voigt3(&self.c)).eigenvalues.min()
    }
}

/// Strains `D χ + M` (membrane) and `D χᴮ − y₃ M` (bending) at every
/// quadrature point, indexed by in-plane slot.
fn total_strains(sols: &CellSolutionSet) -> (Vec<Vec<Mat3>>, Vec<Vec<Mat3>>) {
    let mesh = &sols.mesh;
    let g = &mesh.grid;
    let mut std_s = vec![Vec::with_capacity(mesh.elements.len() * NQP); 3];
    let mut bend_s = vec![Vec::with_capacity(mesh.elements.len() * NQP); 3];
    for (slot, basis) in IN_PLANE.iter().enumerate() {
        let m = basis.matrix();
        for (s, &e) in mesh.elements.iter().enumerate() {
            let x0 = g.elem_origin(e);
            for q in 0..NQP {
                let y3 = hex::qp_coords(q, x0, g.h)[2];
                let ds = sols.standard[slot].strain[s * NQP + q];
                let db = sols.bending[slot].strain[s * NQP + q];
                std_s[slot].push(std::array::from_fn(|i| std::array::from_fn(|j| ds[i][j] + m[i][j])));
                bend_s[slot].push(std::array::from_fn(|i| std::array::from_fn(|j| db[i][j] - y3 * m[i][j])));
            }
        }
    }
    (std_s, bend_s)
}

fn energy_products(tensor: &ElasticityTensor4, w: f64, left: &[Vec<Mat3>], right: &[Vec<Mat3>], vol: f64) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for p in 0..3 {
        let stress: Vec<Mat3> = left[p].iter().map(|e| tensor.apply(e)).collect();
        for q in 0..3 {
            let s: f64 = stress.iter().zip(&right[q]).map(|(a, b)| ddot(a, b)).sum();
            out[p][q] = w * s / vol;
        }
    }
    out
}

pub fn effective_tensors(mesh: &CellMesh, tensor: &ElasticityTensor4, sols: &CellSolutionSet) -> Result<EffectiveModel> {
    if mesh.grid != sols.mesh.grid || mesh.elements != sols.mesh.elements {
        return Err(Error::InconsistentMesh("cell solutions were computed on another mesh".into()));
    }
    let vol = mesh.solid_volume();
    let w = hex::reference().weights[0] * mesh.grid.h.powi(3);
    let (e_std, e_bend) = total_strains(sols);
    let a = energy_products(tensor, w, &e_std, &e_std, vol);
    let b = energy_products(tensor, w, &e_bend, &e_std, vol);
    let c = energy_products(tensor, w, &e_bend, &e_bend, vol);
    Ok(EffectiveModel { a: expand(&a), b: expand(&b), c: expand(&c), solid_volume: vol })
}

/// Membrane tensor obtained with χ = 0. The material is homogeneous in the
/// solid, so this is the in-plane restriction of A.
pub fn voigt_bound(tensor: &ElasticityTensor4) -> Tensor2d {
    let mut m = [[0.0; 3]; 3];
    for (p, bp) in IN_PLANE.iter().enumerate() {
        let s = tensor.apply(&bp.matrix());
        for (q, bq) in IN_PLANE.iter().enumerate() {
            m[p][q] = ddot(&s, &bq.matrix());
        }
    }
    expand(&m)
}
