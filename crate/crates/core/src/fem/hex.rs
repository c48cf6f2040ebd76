//! Trilinear hexahedron on a cube of side `h` with 2×2×2 Gauss quadrature.

use std::sync::OnceLock;

use super::tensor::{ElasticityTensor4, Mat3};
use crate::geometry::{Face, LOCAL_OFFSETS};

pub const NQP: usize = 8;

/// Shape data on the reference cube `[0,1]³`.
pub struct RefHex {
    /// Quadrature points in reference coordinates.
    pub points: [[f64; 3]; NQP],
    /// Weights summing to one (multiply by `h³`).
    pub weights: [f64; NQP],
    /// `n[q][a]` shape value of node `a` at point `q`.
    pub n: [[f64; 8]; NQP],
    /// `dn[q][a]` reference gradient of node `a` at point `q`.
    pub dn: [[[f64; 3]; 8]; NQP],
}

pub fn gauss2() -> [f64; 2] {
    let d = 0.5 / 3f64.sqrt();
    [0.5 - d, 0.5 + d]
}

pub fn shape(xi: [f64; 3]) -> [f64; 8] {
    let mut n = [0.0; 8];
    for (a, off) in LOCAL_OFFSETS.iter().enumerate() {
        let mut v = 1.0;
        for d in 0..3 {
            v *= if off[d] == 1 { xi[d] } else { 1.0 - xi[d] };
        }
        n[a] = v;
    }
    n
}

pub fn shape_grad(xi: [f64; 3]) -> [[f64; 3]; 8] {
    let mut g = [[0.0; 3]; 8];
    for (a, off) in LOCAL_OFFSETS.iter().enumerate() {
        let f: [f64; 3] = std::array::from_fn(|d| if off[d] == 1 { xi[d] } else { 1.0 - xi[d] });
        let s: [f64; 3] = std::array::from_fn(|d| if off[d] == 1 { 1.0 } else { -1.0 });
        g[a] = [s[0] * f[1] * f[2], f[0] * s[1] * f[2], f[0] * f[1] * s[2]];
    }
    g
}

pub fn reference() -> &'static RefHex {
    static REF: OnceLock<RefHex> = OnceLock::new();
    REF.get_or_init(|| {
        let g = gauss2();
        let mut points = [[0.0; 3]; NQP];
        let mut q = 0;
        for &a in &g {
            for &b in &g {
                for &c in &g {
                    points[q] = [a, b, c];
                    q += 1;
                }
            }
        }
        let n = std::array::from_fn(|q| shape(points[q]));
        let dn = std::array::from_fn(|q| shape_grad(points[q]));
        RefHex { points, weights: [0.125; NQP], n, dn }
    })
}

/// Symmetric gradient of the field `N_a e_i` for a physical gradient `g` of `N_a`.
#[inline]
pub fn sym_basis(g: &[f64; 3], i: usize) -> Mat3 {
    let mut d = [[0.0; 3]; 3];
    for j in 0..3 {
        d[i][j] += 0.5 * g[j];
        d[j][i] += 0.5 * g[j];
    }
    d
}

/// 24×24 stiffness `∫ A D(N_a e_i) : D(N_b e_j)`, dof index `3a + i`, row-major.
pub fn stiffness_matrix(tensor: &ElasticityTensor4, h: f64) -> Vec<f64> {
    let r = reference();
    let c = tensor.mandel_matrix();
    let mut k = vec![0.0; 24 * 24];
    for q in 0..NQP {
        let w = r.weights[q] * h * h * h;
        let mut b = [[0.0; 6]; 24];
        for a in 0..8 {
            let g = [r.dn[q][a][0] / h, r.dn[q][a][1] / h, r.dn[q][a][2] / h];
            for i in 0..3 {
                b[3 * a + i] = super::tensor::to_mandel(&sym_basis(&g, i));
            }
        }
        let mut cb = [[0.0; 6]; 24];
        for col in 0..24 {
            for ii in 0..6 {
                let mut s = 0.0;
                for jj in 0..6 {
                    s += c[(ii, jj)] * b[col][jj];
                }
                cb[col][ii] = s;
            }
        }
        for row in 0..24 {
            for col in 0..24 {
                let mut s = 0.0;
                for ii in 0..6 {
                    s += b[row][ii] * cb[col][ii];
                }
                k[row * 24 + col] += w * s;
            }
        }
    }
    k
}

/// 8×8 scalar mass `∫ N_a N_b`, row-major.
pub fn scalar_mass(h: f64) -> [f64; 64] {
    let r = reference();
    let mut m = [0.0; 64];
    for q in 0..NQP {
        let w = r.weights[q] * h * h * h;
        for a in 0..8 {
            for b in 0..8 {
                m[a * 8 + b] += w * r.n[q][a] * r.n[q][b];
            }
        }
    }
    m
}

/// 8×8 matrices `∫ ∂_d N_a ∂_d N_b` for d = 0, 1, 2.
pub fn directional_stiffness(h: f64) -> [[f64; 64]; 3] {
    let r = reference();
    let mut g = [[0.0; 64]; 3];
    for q in 0..NQP {
        let w = r.weights[q] * h * h * h;
        for d in 0..3 {
            for a in 0..8 {
                for b in 0..8 {
                    g[d][a * 8 + b] += w * r.dn[q][a][d] * r.dn[q][b][d] / (h * h);
                }
            }
        }
    }
    g
}

/// Full gradient `∇u_ij = ∂_j u_i` at quadrature point `q`.
#[inline]
pub fn gradient_at(q: usize, nodal: &[[f64; 3]; 8], h: f64) -> Mat3 {
    let r = reference();
    let mut g = [[0.0; 3]; 3];
    for a in 0..8 {
        for i in 0..3 {
            let u = nodal[a][i];
            if u == 0.0 {
                continue;
            }
            for j in 0..3 {
                g[i][j] += u * r.dn[q][a][j];
            }
        }
    }
    for row in g.iter_mut() {
        for v in row.iter_mut() {
            *v /= h;
        }
    }
    g
}

#[inline]
pub fn sym(g: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| 0.5 * (g[i][j] + g[j][i])))
}

/// Physical point of quadrature point `q` in an element with lower corner `x0`.
#[inline]
pub fn qp_coords(q: usize, x0: [f64; 3], h: f64) -> [f64; 3] {
    let p = reference().points[q];
    [x0[0] + h * p[0], x0[1] + h * p[1], x0[2] + h * p[2]]
}

/// 2×2 Gauss points on an element face: reference coordinates and weights
/// summing to one (multiply by `h²`).
pub fn face_quadrature(face: Face) -> [([f64; 3], f64); 4] {
    let g = gauss2();
    let side = if face.positive { 1.0 } else { 0.0 };
    let (t1, t2) = match face.axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let mut out = [([0.0; 3], 0.25); 4];
    let mut c = 0;
    for &a in &g {
        for &b in &g {
            let mut p = [0.0; 3];
            p[face.axis] = side;
            p[t1] = a;
            p[t2] = b;
            out[c] = (p, 0.25);
            c += 1;
        }
    }
    out
}
