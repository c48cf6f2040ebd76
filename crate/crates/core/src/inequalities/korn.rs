use crate::error::{Error, Result};
use crate::fem::hex::{directional_stiffness, scalar_mass};
use crate::fem::{
    assemble_elasticity, assemble_uniform, min_generalized_eigenpair, vector_block, CsrMatrix, DofMap, EigenOptions,
    ElasticityTensor4,
};
use crate::geometry::LayerMesh;

/// Estimated constant with the eigen residual of the extremal pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantEstimate {
    pub constant: f64,
    pub eigenvalue: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Solid DOFs with the clamped lateral nodes removed.
pub fn clamped_solid_dofs(lmesh: &LayerMesh) -> DofMap {
    DofMap::new(&lmesh.active, |i| i, |id| lmesh.dirichlet[id])
}

/// `(A, B)` with `A = ∫ D(u):D(φ)` and `B` the ε-weighted norm
/// `ε⁻²(‖u¹‖² + ‖u²‖² + Σ_{i,j≤2} ‖∂_i u^j‖²) + ‖u³‖² + ‖∇u‖²` over the
/// solid part, both on the clamped solid DOFs.
pub fn korn_operators(lmesh: &LayerMesh, dofs: &DofMap) -> (CsrMatrix, CsrMatrix) {
    let g = &lmesh.grid;
    let eps = lmesh.eps;
    let w = 1.0 / (eps * eps);
    let a = assemble_elasticity(g, &lmesh.elements, dofs, &ElasticityTensor4::identity_like(), 1.0);
    let mut elem = vector_block(&scalar_mass(g.h), [w, w, 1.0]);
    let ds = directional_stiffness(g.h);
    for (d, block) in ds.iter().enumerate() {
        let in_plane = if d < 2 { 1.0 + w } else { 1.0 };
        let part = vector_block(block, [in_plane, in_plane, 1.0]);
        elem.iter_mut().zip(part).for_each(|(e, p)| *e += p);
    }
    let b = assemble_uniform(g, &lmesh.elements, dofs, &elem, 1.0);
    (a, b)
}

/// Best constant `C(ε)` in `√B(u) ≤ (C/ε) ‖D(u)‖` over fields vanishing on
/// the clamped lateral boundary: `C = ε λ_min^{-1/2}` for the pencil `(A, B)`.
pub fn korn_constant(lmesh: &LayerMesh, opts: EigenOptions) -> Result<ConstantEstimate> {
    if !lmesh.dirichlet.iter().any(|&d| d) {
        return Err(Error::InvalidInput("Korn constant needs a nonempty clamped boundary".into()));
    }
    let dofs = clamped_solid_dofs(lmesh);
    let (a, b) = korn_operators(lmesh, &dofs);
    let res = min_generalized_eigenpair(&a, &b, 0.0, opts)?;
    if !(res.value > 0.0) {
        return Err(Error::NullspaceOverlap);
    }
    Ok(ConstantEstimate {
        constant: lmesh.eps / res.value.sqrt(),
        eigenvalue: res.value,
        residual: res.residual,
        iterations: res.iterations,
    })
}
