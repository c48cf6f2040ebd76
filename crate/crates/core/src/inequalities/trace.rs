use super::korn::ConstantEstimate;
use crate::error::{Error, Result};
use crate::fem::{
    assemble_elasticity, dominant_generalized, BandedCholesky, CsrMatrix, DofMap, EigenOptions, ElasticityTensor4, Pencil,
};
use crate::geometry::{Face, LayerMesh};

/// Fields on the whole layer (solid and void) vanishing on the clamped
/// solid part of the lateral boundary.
pub fn trace_dofs(lmesh: &LayerMesh) -> DofMap {
    let all = vec![true; lmesh.grid.num_nodes()];
    DofMap::new(&all, |i| i, |id| lmesh.dirichlet[id])
}

/// `(T, K)`: `T = ∫_{∂Σ×(−ε,ε)} u·φ` and `K = ∫_Ω D(u):D(φ)` over every
/// element of the layer.
pub fn trace_operators(lmesh: &LayerMesh, dofs: &DofMap) -> (CsrMatrix, CsrMatrix) {
    let g = &lmesh.grid;
    let all: Vec<usize> = (0..g.num_elements()).collect();
    let k = assemble_elasticity(g, &all, dofs, &ElasticityTensor4::identity_like(), 1.0);
    let mut faces: Vec<(usize, Face)> = Vec::new();
    for &e in &all {
        let [i, j, _] = g.elem_ijk(e);
        if i == 0 {
            faces.push((e, Face { axis: 0, positive: false }));
        }
        if i + 1 == g.dims[0] {
            faces.push((e, Face { axis: 0, positive: true }));
        }
        if j == 0 {
            faces.push((e, Face { axis: 1, positive: false }));
        }
        if j + 1 == g.dims[1] {
            faces.push((e, Face { axis: 1, positive: true }));
        }
    }
    let face_dofs: Vec<[Option<usize>; 12]> = faces
        .iter()
        .map(|&(e, f)| {
            let nodes = g.elem_nodes(e);
            let local = f.local_nodes();
            std::array::from_fn(|p| dofs.dof(nodes[local[p / 3]], p % 3))
        })
        .collect();
    let mut t = CsrMatrix::from_element_pattern(dofs.ndof, face_dofs.iter().map(|d| &d[..]));
    let h2 = g.h * g.h;
    let mut fm = [0.0; 144];
    for (&(_, f), d) in faces.iter().zip(&face_dofs) {
        let local = f.local_nodes();
        let off = |a: usize| crate::geometry::LOCAL_OFFSETS[local[a]];
        for a in 0..4 {
            for b in 0..4 {
                let mut v = h2;
                for ax in 0..3 {
                    if ax == f.axis {
                        continue;
                    }
                    v *= if off(a)[ax] == off(b)[ax] { 1.0 / 3.0 } else { 1.0 / 6.0 };
                }
                for c in 0..3 {
                    fm[(3 * a + c) * 12 + 3 * b + c] = v;
                }
            }
        }
        t.add_element(d, &fm, 1.0);
    }
    (t, k)
}

/// `C(ε) = √μ_max · ε^{-1/2}` with `μ_max` the largest eigenvalue of
/// `T u = μ K u`, so that `‖u‖_{∂Σ×(−ε,ε)} ≤ C ε^{1/2} ‖D(u)‖_Ω`.
pub fn trace_constant(lmesh: &LayerMesh, opts: EigenOptions) -> Result<ConstantEstimate> {
    let dofs = trace_dofs(lmesh);
    let (t, k) = trace_operators(lmesh, &dofs);
    if t.val.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidInput(
            "the lateral boundary is fully clamped; the trace constant is zero for this geometry".into(),
        ));
    }
    let chol = BandedCholesky::factor(&k).map_err(|_| Error::NullspaceOverlap)?;
    let apply_s = |x: &[f64]| t.matvec(x);
    let apply_k = |x: &[f64]| k.matvec(x);
    let solve_k = |x: &[f64]| chol.solve(x);
    let pencil = Pencil { n: dofs.ndof, apply_s: &apply_s, apply_k: &apply_k, solve_k: &solve_k, project: None };
    let res = dominant_generalized(&pencil, opts)?;
    Ok(ConstantEstimate {
        constant: res.value.max(0.0).sqrt() / lmesh.eps.sqrt(),
        eigenvalue: res.value,
        residual: res.residual,
        iterations: res.iterations,
    })
}
