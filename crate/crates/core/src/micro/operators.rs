use rayon::prelude::*;

use crate::fem::hex::{self, NQP};
use crate::fem::{assemble_elasticity, assemble_mass, CsrMatrix, DofMap, ElasticityTensor4};
use crate::geometry::LayerMesh;
use crate::plate::LoadModel;

/// Free DOFs of the layer: active nodes minus the clamped lateral ones.
pub fn micro_dofs(lmesh: &LayerMesh) -> DofMap {
    DofMap::new(&lmesh.active, |i| i, |id| lmesh.dirichlet[id])
}

/// Layer operators with every term of the weak form multiplied by ε.
#[derive(Debug, Clone)]
pub struct MicroOperators {
    pub eps: f64,
    pub dofs: DofMap,
    /// `∫ u·φ`.
    pub mass: CsrMatrix,
    /// `ε⁻² ∫ A D(u):D(φ)`.
    pub stiffness: CsrMatrix,
    /// `∫ D(u):D(φ)`, used for the strain norms.
    pub sym_grad: CsrMatrix,
}

/// The solid is homogeneous, so sampling `A(x/ε)` through the cell index
/// gives the same tensor on every solid element.
pub fn assemble_micro(lmesh: &LayerMesh, tensor: &ElasticityTensor4) -> MicroOperators {
    let g = &lmesh.grid;
    let eps = lmesh.eps;
    let dofs = micro_dofs(lmesh);
    let mass = assemble_mass(g, &lmesh.elements, &dofs, 1.0);
    let stiffness = assemble_elasticity(g, &lmesh.elements, &dofs, tensor, 1.0 / (eps * eps));
    let sym_grad = assemble_elasticity(g, &lmesh.elements, &dofs, &ElasticityTensor4::identity_like(), 1.0);
    MicroOperators { eps, dofs, mass, stiffness, sym_grad }
}

impl MicroOperators {
    pub fn ndof(&self) -> usize {
        self.dofs.ndof
    }

    /// `‖u^c‖²` summed over the listed components.
    pub fn component_norm_sq(&self, x: &[f64], comps: &[usize]) -> f64 {
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| if comps.contains(&(i % 3)) { *v } else { 0.0 }).collect();
        self.mass.quad_form(&y)
    }
}

/// Right-hand side `ε⁻¹∫ f_ε·φ − ∫_Γε g_ε·φ` with `f_ε = (f¹, f², εf³)` at
/// `(t, x̄, x/ε, u³)` and `g_ε = (g¹, g², εg³)` at `(x̄, x/ε)`.
pub fn micro_rhs(lmesh: &LayerMesh, dofs: &DofMap, loads: &LoadModel, nodal: &[[f64; 3]], t: f64) -> Vec<f64> {
    let mut out = vec![0.0; dofs.ndof];
    if loads.is_zero() {
        return out;
    }
    let g = &lmesh.grid;
    let eps = lmesh.eps;
    let r = hex::reference();
    let scale = [1.0, 1.0, eps];
    let with_z = loads.depends_on_z();
    let vol: Vec<([usize; 8], [f64; 24])> = lmesh
        .elements
        .par_iter()
        .map(|&e| {
            let nodes = g.elem_nodes(e);
            let x0 = g.elem_origin(e);
            let mut local = [0.0; 24];
            for q in 0..NQP {
                let x = hex::qp_coords(q, x0, g.h);
                let y = lmesh.to_cell(x);
                let z = if with_z { (0..8).map(|a| r.n[q][a] * nodal[nodes[a]][2]).sum() } else { 0.0 };
                let vars = [t, x[0], x[1], y[0], y[1], y[2], z];
                let w = r.weights[q] * g.h.powi(3) / eps;
                for c in 0..3 {
                    if loads.f[c].is_zero() {
                        continue;
                    }
                    let f = w * scale[c] * loads.f[c].eval(&vars);
                    for a in 0..8 {
                        local[3 * a + c] += f * r.n[q][a];
                    }
                }
            }
            (nodes, local)
        })
        .collect();
    let surf: Vec<([usize; 8], [f64; 24])> = if loads.g.iter().all(|e| e.is_zero()) {
        Vec::new()
    } else {
        lmesh
            .gamma_faces
            .par_iter()
            .map(|&(e, face)| {
                let nodes = g.elem_nodes(e);
                let x0 = g.elem_origin(e);
                let mut local = [0.0; 24];
                for (p, w) in hex::face_quadrature(face) {
                    let x = [x0[0] + g.h * p[0], x0[1] + g.h * p[1], x0[2] + g.h * p[2]];
                    let y = lmesh.to_cell(x);
                    let vars = [t, x[0], x[1], y[0], y[1], y[2], 0.0];
                    let n = hex::shape(p);
                    for c in 0..3 {
                        if loads.g[c].is_zero() {
                            continue;
                        }
                        let v = w * g.h * g.h * scale[c] * loads.g[c].eval(&vars);
                        for a in 0..8 {
                            local[3 * a + c] -= v * n[a];
                        }
                    }
                }
                (nodes, local)
            })
            .collect()
    };
    for (nodes, local) in vol.iter().chain(&surf) {
        for (d, v) in dofs.elem_dofs(nodes).iter().zip(local) {
            if let Some(d) = d {
                out[*d] += v;
            }
        }
    }
    out
}
