use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::problems::{periodic_dofs, strain_field, translation_gauge};
use crate::error::{Error, Result};
use crate::fem::hex::{self, NQP};
use crate::fem::{assemble_elasticity, solve_spd_with, CgOptions, DofMap, ElasticityTensor4, FieldVector, Mat3};
use crate::geometry::CellMesh;

/// Split `ξ = D(p + q) + (ξ − D(p + q))` on the unperforated cell.
#[derive(Debug, Clone)]
pub struct HelmholtzSplit {
    /// Zero-Dirichlet part.
    pub p: FieldVector,
    /// Periodic, mean-zero part.
    pub q: FieldVector,
    pub potential: Vec<Mat3>,
    pub solenoidal: Vec<Mat3>,
}

/// Quadrature inner product of two tensor fields on the cell mesh.
pub fn l2_inner(mesh: &CellMesh, a: &[Mat3], b: &[Mat3]) -> f64 {
    let w = hex::reference().weights[0] * mesh.grid.h.powi(3);
    a.iter().zip(b).map(|(x, y)| crate::fem::ddot(x, y)).sum::<f64>() * w
}

/// Right-hand side `φ ↦ ∫ ξ : D(φ)`.
fn pairing_rhs(mesh: &CellMesh, dofs: &DofMap, xi: &[Mat3]) -> Vec<f64> {
    let g = &mesh.grid;
    let r = hex::reference();
    let mut b = vec![0.0; dofs.ndof];
    for (s, &e) in mesh.elements.iter().enumerate() {
        let ed = dofs.elem_dofs(&g.elem_nodes(e));
        for q in 0..NQP {
            let x = &xi[s * NQP + q];
            let w = r.weights[q] * g.h.powi(3);
            for a in 0..8 {
                for c in 0..3 {
                    if let Some(d) = ed[3 * a + c] {
                        b[d] += w * (0..3).map(|j| x[c][j] * r.dn[q][a][j] / g.h).sum::<f64>();
                    }
                }
            }
        }
    }
    b
}

pub fn helmholtz_decompose(mesh: &CellMesh, xi: &[Mat3], opts: CgOptions) -> Result<HelmholtzSplit> {
    if !mesh.geometry.is_full() {
        return Err(Error::InvalidInput("Helmholtz decomposition needs the unperforated cell".into()));
    }
    if xi.len() != mesh.elements.len() * NQP {
        return Err(Error::InconsistentMesh("tensor field size does not match the mesh".into()));
    }
    let mut scale = 0.0f64;
    let mut asym = 0.0f64;
    for x in xi {
        for i in 0..3 {
            for j in 0..3 {
                scale = scale.max(x[i][j].abs());
                asym = asym.max((x[i][j] - x[j][i]).abs());
            }
        }
    }
    if asym > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::AsymmetricInput(asym));
    }
    let ident = ElasticityTensor4::identity_like();
    let g = &mesh.grid;
    let n = mesh.n;
    let dir = DofMap::new(&mesh.active, |i| i, |id| {
        let [i, j, k] = g.node_ijk(id);
        i == 0 || j == 0 || k == 0 || i == n || j == n || k == 2 * n
    });
    let k_dir = assemble_elasticity(g, &mesh.elements, &dir, &ident, 1.0);
    let rhs_p = pairing_rhs(mesh, &dir, xi);
    let (p_coeffs, _) = solve_spd_with(&k_dir, &rhs_p, None, None, opts)
        .map_err(|e| Error::SolverFailure(format!("Dirichlet part: {e}")))?;
    let p = FieldVector::from_coeffs(&dir, p_coeffs);
    let dp = strain_field(mesh, &p);

    let per = periodic_dofs(mesh);
    let k_per = assemble_elasticity(g, &mesh.elements, &per, &ident, 1.0);
    let gauge = translation_gauge(mesh, &per);
    let rest: Vec<Mat3> = xi
        .iter()
        .zip(&dp)
        .map(|(x, d)| std::array::from_fn(|i| std::array::from_fn(|j| x[i][j] - d[i][j])))
        .collect();
    let rhs_q = pairing_rhs(mesh, &per, &rest);
    let (q_coeffs, _) = solve_spd_with(&k_per, &rhs_q, None, Some(&gauge), opts)
        .map_err(|e| Error::SolverFailure(format!("periodic part: {e}")))?;
    let q = FieldVector::from_coeffs(&per, q_coeffs);
    let dq = strain_field(mesh, &q);
    let potential: Vec<Mat3> = dp
        .iter()
        .zip(&dq)
        .map(|(a, b)| std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] + b[i][j])))
        .collect();
    let solenoidal = xi
        .iter()
        .zip(&potential)
        .map(|(x, d)| std::array::from_fn(|i| std::array::from_fn(|j| x[i][j] - d[i][j])))
        .collect();
    Ok(HelmholtzSplit { p, q, potential, solenoidal })
}

/// Worst-case relative defects of the split over a batch of random inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelmholtzCheck {
    pub fields: usize,
    pub gradients: usize,
    /// `‖ξ − D(p + q) − ξ_sol‖ / ‖ξ‖`, with `D(p + q)` recomputed from the potentials.
    pub reconstruction: f64,
    /// `|⟨ξ_sol, D(w)⟩| / (‖ξ_sol‖ ‖D(w)‖)` over random periodic `w`.
    pub orthogonality: f64,
    /// `‖potential(D(w)) − D(w)‖ / ‖D(w)‖`.
    pub idempotence: f64,
}

fn sub(a: &[Mat3], b: &[Mat3]) -> Vec<Mat3> {
    a.iter().zip(b).map(|(x, y)| std::array::from_fn(|i| std::array::from_fn(|j| x[i][j] - y[i][j]))).collect()
}

/// Decomposes `fields` random symmetric tensor fields (independent values at
/// every quadrature point) and tests them against `gradients` symmetric
/// gradients of random periodic displacements.
pub fn helmholtz_check(mesh: &CellMesh, fields: usize, gradients: usize, seed: u64, opts: CgOptions) -> Result<HelmholtzCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per = periodic_dofs(mesh);
    let grads: Vec<Vec<Mat3>> = (0..gradients.max(1))
        .map(|_| {
            let c: Vec<f64> = (0..per.ndof).map(|_| rng.gen::<f64>() - 0.5).collect();
            strain_field(mesh, &FieldVector::from_coeffs(&per, c))
        })
        .collect();
    let norm = |f: &[Mat3]| l2_inner(mesh, f, f).sqrt();
    let mut out = HelmholtzCheck { fields, gradients, reconstruction: 0.0, orthogonality: 0.0, idempotence: 0.0 };
    for _ in 0..fields {
        let xi: Vec<Mat3> = (0..mesh.elements.len() * NQP)
            .map(|_| {
                let mut m = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in i..3 {
                        m[i][j] = rng.gen::<f64>() * 2.0 - 1.0;
                        m[j][i] = m[i][j];
                    }
                }
                m
            })
            .collect();
        let split = helmholtz_decompose(mesh, &xi, opts)?;
        let dp = strain_field(mesh, &split.p);
        let dq = strain_field(mesh, &split.q);
        let rest = sub(&sub(&sub(&xi, &dp), &dq), &split.solenoidal);
        out.reconstruction = out.reconstruction.max(norm(&rest) / norm(&xi));
        let ns = norm(&split.solenoidal);
        for g in grads.iter().take(gradients) {
            let o = l2_inner(mesh, &split.solenoidal, g).abs() / (ns * norm(g)).max(f64::MIN_POSITIVE);
            out.orthogonality = out.orthogonality.max(o);
        }
    }
    for g in grads.iter().take(gradients.min(fields.max(1))) {
        let split = helmholtz_decompose(mesh, g, opts)?;
        out.idempotence = out.idempotence.max(norm(&sub(&split.potential, g)) / norm(g));
    }
    Ok(out)
}
