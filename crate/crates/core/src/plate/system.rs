use super::element::{bfs_basis, bilinear_basis, gauss4x4, Jet};
use crate::cell::{EffectiveModel, Tensor2d};
use crate::fem::CsrMatrix;
use crate::geometry::PlateMesh;

/// Unknowns per free node: `[u₁, u₂, w, w_x, w_y, w_xy]`.
pub const DOFS_PER_NODE: usize = 6;
/// Element vector layout: 8 membrane entries (`2a + c`) then 16 bending
/// entries (`8 + 4a + d`).
pub const ELEM_DOFS: usize = 24;

/// Interleaved global numbering of membrane and bending unknowns.
///
/// Keeping all six values of a node adjacent keeps the band of the
/// coupled operator narrow.
#[derive(Debug, Clone)]
pub struct PlateLayout {
    pub mesh: PlateMesh,
}

impl PlateLayout {
    pub fn new(mesh: PlateMesh) -> Self {
        PlateLayout { mesh }
    }

    pub fn ndof(&self) -> usize {
        DOFS_PER_NODE * self.mesh.free_nodes.len()
    }

    /// Global index of value `k ∈ 0..6` at a node, `None` if clamped.
    pub fn dof(&self, node: usize, k: usize) -> Option<usize> {
        self.mesh.free_slot[node].map(|s| DOFS_PER_NODE * s + k)
    }

    pub fn elem_dofs(&self, e: usize) -> [Option<usize>; ELEM_DOFS] {
        let nodes = self.mesh.elem_nodes(e);
        let mut out = [None; ELEM_DOFS];
        for (a, &nd) in nodes.iter().enumerate() {
            for c in 0..2 {
                out[2 * a + c] = self.dof(nd, c);
            }
            for d in 0..4 {
                out[8 + 4 * a + d] = self.dof(nd, 2 + d);
            }
        }
        out
    }

    pub fn membrane_dofs(&self) -> Vec<usize> {
        (0..self.ndof()).filter(|i| i % DOFS_PER_NODE < 2).collect()
    }

    pub fn bending_dofs(&self) -> Vec<usize> {
        (0..self.ndof()).filter(|i| i % DOFS_PER_NODE >= 2).collect()
    }

    /// Element coefficient vector (clamped entries zero).
    pub fn gather(&self, x: &[f64], e: usize) -> [f64; ELEM_DOFS] {
        let d = self.elem_dofs(e);
        std::array::from_fn(|i| d[i].map_or(0.0, |g| x[g]))
    }

    /// Membrane displacement, its gradient `∂_j u_i`, and the bending jet at
    /// a point of the midsurface.
    pub fn eval(&self, x: &[f64], p: [f64; 2]) -> PlatePoint {
        let (e, xi) = self.mesh.locate(p);
        self.eval_local(&self.gather(x, e), xi)
    }

    pub fn eval_local(&self, c: &[f64; ELEM_DOFS], xi: [f64; 2]) -> PlatePoint {
        let h = self.mesh.h;
        let mut out = PlatePoint::default();
        for (a, (n, g)) in bilinear_basis(xi, h).iter().enumerate() {
            for comp in 0..2 {
                let v = c[2 * a + comp];
                out.u[comp] += v * n;
                out.grad_u[comp][0] += v * g[0];
                out.grad_u[comp][1] += v * g[1];
            }
        }
        for (k, jet) in bfs_basis(xi, h).iter().enumerate() {
            let v = c[8 + k];
            out.w += v * jet.value;
            out.grad_w[0] += v * jet.grad[0];
            out.grad_w[1] += v * jet.grad[1];
            out.hess_w[0][0] += v * jet.hess[0];
            out.hess_w[1][1] += v * jet.hess[1];
            out.hess_w[0][1] += v * jet.hess[2];
        }
        out.hess_w[1][0] = out.hess_w[0][1];
        out
    }
}

/// Macroscopic fields at one midsurface point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlatePoint {
    pub u: [f64; 2],
    pub grad_u: [[f64; 2]; 2],
    pub w: f64,
    pub grad_w: [f64; 2],
    pub hess_w: [[f64; 2]; 2],
}

impl PlatePoint {
    pub fn sym_grad_u(&self) -> [[f64; 2]; 2] {
        let g = &self.grad_u;
        [[g[0][0], 0.5 * (g[0][1] + g[1][0])], [0.5 * (g[0][1] + g[1][0]), g[1][1]]]
    }
}

/// Assembled macroscopic operators on the interleaved layout.
///
/// `stiffness` holds `[[K_aa, K_ab], [K_abᵀ, K_bb]]` and `mass` holds `M_b`
/// on the bending unknowns.
#[derive(Debug, Clone)]
pub struct PlateSystem {
    pub layout: PlateLayout,
    pub eff: EffectiveModel,
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
}

fn symmetrize(t: &Tensor2d) -> Tensor2d {
    let mut s = *t;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    s[i][j][k][l] = 0.5 * (t[i][j][k][l] + t[k][l][i][j]);
                }
            }
        }
    }
    s
}

fn contract(t: &Tensor2d, x: &[[f64; 2]; 2], y: &[[f64; 2]; 2]) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    s += t[i][j][k][l] * x[i][j] * y[k][l];
                }
            }
        }
    }
    s
}

fn hess_matrix(j: &Jet) -> [[f64; 2]; 2] {
    [[j.hess[0], j.hess[2]], [j.hess[2], j.hess[1]]]
}

/// Element stiffness (row-major 24×24) and bending mass (16×16) of one
/// `hx × hy` rectangle with constant coefficients.
///
/// The energy density is `a E:E + 2 b[∇²w, E] + c ∇²w:∇²w`, where `b`
/// contracts its first pair with the Hessian and its second with the
/// membrane strain; the coupling therefore enters both off-diagonal blocks
/// with the same orientation.
pub fn element_matrices(eff: &EffectiveModel, h: [f64; 2]) -> (Vec<f64>, Vec<f64>) {
    let a = symmetrize(&eff.a);
    let c = symmetrize(&eff.c);
    let b = eff.b;
    let mut k = vec![0.0; ELEM_DOFS * ELEM_DOFS];
    let mut m = vec![0.0; 16 * 16];
    let area = h[0] * h[1];
    for (xi, w) in gauss4x4() {
        let w = w * area;
        let lin = bilinear_basis(xi, h);
        let mut strains = [[[0.0; 2]; 2]; 8];
        for (a_, (_, g)) in lin.iter().enumerate() {
            for comp in 0..2 {
                let e = &mut strains[2 * a_ + comp];
                for j in 0..2 {
                    e[comp][j] += 0.5 * g[j];
                    e[j][comp] += 0.5 * g[j];
                }
            }
        }
        let jets = bfs_basis(xi, h);
        let hess: Vec<[[f64; 2]; 2]> = jets.iter().map(hess_matrix).collect();
        for p in 0..8 {
            for q in 0..8 {
                k[p * ELEM_DOFS + q] += w * contract(&a, &strains[q], &strains[p]);
            }
            for r in 0..16 {
                let v = w * contract(&b, &hess[r], &strains[p]);
                k[p * ELEM_DOFS + 8 + r] += v;
                k[(8 + r) * ELEM_DOFS + p] += v;
            }
        }
        for r in 0..16 {
            for s in 0..16 {
                k[(8 + r) * ELEM_DOFS + 8 + s] += w * contract(&c, &hess[s], &hess[r]);
                m[r * 16 + s] += w * jets[r].value * jets[s].value;
            }
        }
    }
    (k, m)
}

pub fn assemble_plate_system(mesh: &PlateMesh, eff: &EffectiveModel) -> PlateSystem {
    let layout = PlateLayout::new(mesh.clone());
    let n = layout.ndof();
    let all: Vec<[Option<usize>; ELEM_DOFS]> = (0..mesh.num_elements()).map(|e| layout.elem_dofs(e)).collect();
    let mut stiffness = CsrMatrix::from_element_pattern(n, all.iter().map(|d| &d[..]));
    let bend: Vec<[Option<usize>; 16]> = all.iter().map(|d| std::array::from_fn(|i| d[8 + i])).collect();
    let mut mass = CsrMatrix::from_element_pattern(n, bend.iter().map(|d| &d[..]));
    let (ke, me) = element_matrices(eff, mesh.h);
    for (d, b) in all.iter().zip(&bend) {
        stiffness.add_element(d, &ke, 1.0);
        mass.add_element(b, &me, 1.0);
    }
    PlateSystem { layout, eff: eff.clone(), stiffness, mass }
}

impl PlateSystem {
    pub fn ndof(&self) -> usize {
        self.layout.ndof()
    }

    /// Largest entry of the membrane–bending coupling block.
    pub fn coupling_max(&self) -> f64 {
        let k = &self.stiffness;
        let mut m = 0.0f64;
        for i in 0..k.n {
            for p in k.row_ptr[i]..k.row_ptr[i + 1] {
                if (i % DOFS_PER_NODE < 2) != (k.col[p] % DOFS_PER_NODE < 2) {
                    m = m.max(k.val[p].abs());
                }
            }
        }
        m
    }

    /// `∫ q V` for the bending test functions.
    pub fn bending_load(&self, q: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        let mesh = &self.layout.mesh;
        let mut r = vec![0.0; self.ndof()];
        let area = mesh.h[0] * mesh.h[1];
        for e in 0..mesh.num_elements() {
            let x0 = mesh.elem_origin(e);
            let d = self.layout.elem_dofs(e);
            for (xi, w) in gauss4x4() {
                let x = [x0[0] + xi[0] * mesh.h[0], x0[1] + xi[1] * mesh.h[1]];
                let v = q(x) * w * area;
                for (k, jet) in bfs_basis(xi, mesh.h).iter().enumerate() {
                    if let Some(g) = d[8 + k] {
                        r[g] += v * jet.value;
                    }
                }
            }
        }
        r
    }

    /// `(‖w − w_ref‖, ‖ũ − ũ_ref‖)` in L²(Σ) by 4×4 Gauss quadrature.
    pub fn l2_errors(&self, x: &[f64], reference: impl Fn([f64; 2]) -> ([f64; 2], f64)) -> (f64, f64) {
        let mesh = &self.layout.mesh;
        let area = mesh.h[0] * mesh.h[1];
        let (mut ew, mut eu) = (0.0, 0.0);
        for e in 0..mesh.num_elements() {
            let x0 = mesh.elem_origin(e);
            let c = self.layout.gather(x, e);
            for (xi, w) in gauss4x4() {
                let p = [x0[0] + xi[0] * mesh.h[0], x0[1] + xi[1] * mesh.h[1]];
                let v = self.layout.eval_local(&c, xi);
                let (u_ref, w_ref) = reference(p);
                ew += w * area * (v.w - w_ref).powi(2);
                eu += w * area * ((v.u[0] - u_ref[0]).powi(2) + (v.u[1] - u_ref[1]).powi(2));
            }
        }
        (ew.sqrt(), eu.sqrt())
    }

    pub fn l2_norms(&self, x: &[f64]) -> (f64, f64) {
        self.l2_errors(x, |_| ([0.0; 2], 0.0))
    }
}
