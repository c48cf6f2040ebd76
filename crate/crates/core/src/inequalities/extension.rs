use crate::error::{Error, Result};
use crate::fem::hex::stiffness_matrix;
use crate::fem::{
    assemble_elasticity, assemble_mass, dot, mass_orthonormal_basis, project_out, BandedCholesky, CsrMatrix, DofMap,
    ElasticityTensor4, EigenOptions, Pencil, RigidDisplacement,
};
use crate::geometry::LayerMesh;

/// Energy-minimizing extension of solid fields into the voids of a layer.
///
/// Void nodes not touching the solid are the unknowns; every node of a
/// void element that also belongs to a solid element carries data. The
/// extension minimizes `∫_void |D(w)|²` hole by hole.
pub struct VoidExtension {
    /// Numbering of all nodes touched by void elements.
    pub void_dofs: DofMap,
    /// `∫_void D(u):D(φ)` on `void_dofs`.
    pub stiffness: CsrMatrix,
    /// Positions in `void_dofs` of unknown (void-only) values.
    pub interior: Vec<usize>,
    /// Positions in `void_dofs` of data (interface) values.
    pub interface: Vec<usize>,
    chol: Option<BandedCholesky>,
}

impl VoidExtension {
    pub fn new(lmesh: &LayerMesh) -> Result<Self> {
        let g = &lmesh.grid;
        let mut touched = vec![false; g.num_nodes()];
        for &e in &lmesh.void_elements {
            for nd in g.elem_nodes(e) {
                touched[nd] = true;
            }
        }
        let void_dofs = DofMap::plain(&touched);
        let ident = ElasticityTensor4::identity_like();
        let stiffness = assemble_elasticity(g, &lmesh.void_elements, &void_dofs, &ident, 1.0);
        let (mut interior, mut interface) = (Vec::new(), Vec::new());
        for (s, &nd) in void_dofs.slot_node.iter().enumerate() {
            let target = if lmesh.active[nd] { &mut interface } else { &mut interior };
            target.extend((0..3).map(|c| 3 * s + c));
        }
        let chol = if interior.is_empty() {
            None
        } else {
            Some(
                BandedCholesky::factor(&stiffness.submatrix(&interior))
                    .map_err(|e| Error::SolverFailure(format!("void extension operator: {e}")))?,
            )
        };
        Ok(VoidExtension { void_dofs, stiffness, interior, interface, chol })
    }

    /// Completes `x` (values on `void_dofs`, interface entries set) by
    /// solving for the interior entries.
    fn complete(&self, x: &mut [f64]) {
        let Some(chol) = &self.chol else { return };
        for &i in &self.interior {
            x[i] = 0.0;
        }
        let y = self.stiffness.matvec(x);
        let rhs: Vec<f64> = self.interior.iter().map(|&i| -y[i]).collect();
        for (&i, v) in self.interior.iter().zip(chol.solve(&rhs)) {
            x[i] = v;
        }
    }

    /// Extends nodal values given on solid (active) nodes to every node of
    /// the layer grid; solid values are returned unchanged.
    pub fn extend_nodal(&self, lmesh: &LayerMesh, nodal: &[[f64; 3]]) -> Vec<[f64; 3]> {
        let mut x = vec![0.0; self.void_dofs.ndof];
        for (s, &nd) in self.void_dofs.slot_node.iter().enumerate() {
            if lmesh.active[nd] {
                x[3 * s..3 * s + 3].copy_from_slice(&nodal[nd]);
            }
        }
        self.complete(&mut x);
        let mut out: Vec<[f64; 3]> = (0..nodal.len()).map(|id| if lmesh.active[id] { nodal[id] } else { [0.0; 3] }).collect();
        for (s, &nd) in self.void_dofs.slot_node.iter().enumerate() {
            if !lmesh.active[nd] {
                out[nd] = [x[3 * s], x[3 * s + 1], x[3 * s + 2]];
            }
        }
        out
    }

    /// `‖D(w)‖²_void` of the extension of `x` (values on `void_dofs`,
    /// interior entries ignored) together with the gradient `S x_I` of this
    /// energy with respect to the interface values.
    pub fn schur_apply(&self, x: &mut [f64]) -> (f64, Vec<f64>) {
        self.complete(x);
        let z = self.stiffness.matvec(x);
        (dot(x, &z), z)
    }
}

/// Extension of a nodal field on the solid part to the whole layer.
pub fn extend_field(lmesh: &LayerMesh, nodal: &[[f64; 3]]) -> Result<Vec<[f64; 3]>> {
    if nodal.len() != lmesh.grid.num_nodes() {
        return Err(Error::InconsistentMesh("field does not match the layer grid".into()));
    }
    if !lmesh.is_perforated() {
        return Ok(nodal.to_vec());
    }
    Ok(VoidExtension::new(lmesh)?.extend_nodal(lmesh, nodal))
}

/// `∫ D(u):D(u)` over the given elements for a nodal field.
pub fn sym_grad_energy(lmesh: &LayerMesh, elements: &[usize], nodal: &[[f64; 3]]) -> f64 {
    let g = &lmesh.grid;
    let k = stiffness_matrix(&ElasticityTensor4::identity_like(), g.h);
    let mut s = 0.0;
    for &e in elements {
        let nodes = g.elem_nodes(e);
        let u: Vec<f64> = nodes.iter().flat_map(|&nd| nodal[nd]).collect();
        for i in 0..24 {
            let row = &k[i * 24..(i + 1) * 24];
            s += u[i] * row.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    s
}

/// Estimated operator norm of the extension in the symmetric-gradient
/// seminorm.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionNorm {
    /// `sup ‖D(Ev)‖_{Ω} / ‖D(v)‖_{Ωˢ}` over fields modulo rigid motions.
    pub ratio: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// `√(1 + μ)` with `μ` the largest eigenvalue of `S v = μ K_s v`, where
/// `K_s` is the solid energy and `S` the void energy of the extension. Rigid
/// fields (the kernel of both) are projected out in a mass-orthonormal
/// basis.
pub fn extension_norm(lmesh: &LayerMesh, opts: EigenOptions) -> Result<ExtensionNorm> {
    if !lmesh.is_perforated() {
        return Ok(ExtensionNorm { ratio: 1.0, residual: 0.0, iterations: 0 });
    }
    let g = &lmesh.grid;
    let ext = VoidExtension::new(lmesh)?;
    let solid = DofMap::plain(&lmesh.active);
    let ident = ElasticityTensor4::identity_like();
    let ks = assemble_elasticity(g, &lmesh.elements, &solid, &ident, 1.0);
    let mass = assemble_mass(g, &lmesh.elements, &solid, 1.0);
    let gens = RigidDisplacement::generators().iter().map(|r| solid.interpolate(g, |x| r.eval(x))).collect();
    let basis = mass_orthonormal_basis(gens, &mass);
    // Slight mass shift makes the solid operator invertible; iterates are
    // projected, and the Rayleigh–Ritz step uses the unshifted pencil.
    let kd = ks.diagonal().iter().fold(0.0f64, |m, v| m.max(*v));
    let md = mass.diagonal().iter().fold(0.0f64, |m, v| m.max(*v));
    let shifted = ks.linear_combination(1.0, &mass, 1e-10 * kd / md);
    let chol = BandedCholesky::factor(&shifted).map_err(|e| Error::SolverFailure(format!("solid operator: {e}")))?;
    // Interface positions in the solid numbering.
    let map: Vec<(usize, usize)> = ext
        .interface
        .iter()
        .map(|&i| {
            let nd = ext.void_dofs.slot_node[i / 3];
            (i, solid.dof(nd, i % 3).expect("interface node is solid"))
        })
        .collect();
    let apply_s = |v: &[f64]| {
        let mut x = vec![0.0; ext.void_dofs.ndof];
        for &(i, s) in &map {
            x[i] = v[s];
        }
        let (_, z) = ext.schur_apply(&mut x);
        let mut out = vec![0.0; v.len()];
        for &(i, s) in &map {
            out[s] = z[i];
        }
        out
    };
    let apply_k = |v: &[f64]| ks.matvec(v);
    let solve_k = |v: &[f64]| chol.solve(v);
    let project = |v: &mut [f64]| project_out(&basis, &mass, v);
    let pencil = Pencil { n: solid.ndof, apply_s: &apply_s, apply_k: &apply_k, solve_k: &solve_k, project: Some(&project) };
    let res = crate::fem::dominant_generalized(&pencil, opts)?;
    Ok(ExtensionNorm { ratio: (1.0 + res.value.max(0.0)).sqrt(), residual: res.residual, iterations: res.iterations })
}
