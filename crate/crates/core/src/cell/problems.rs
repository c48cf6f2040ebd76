use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::hex::{self, NQP};
use crate::fem::{
    assemble_elasticity, lumped_weights, solve_spd_with, CgOptions, CgStats, CsrMatrix, DofMap, ElasticityTensor4,
    FieldVector, Gauge, Mat3,
};
use crate::geometry::CellMesh;

/// `M_ij = (e_i ⊗ e_j + e_j ⊗ e_i) / 2` with zero-based indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisMatrix {
    pub i: usize,
    pub j: usize,
}

/// In-plane index pairs in storage order: 11, 22, 12.
pub const IN_PLANE: [BasisMatrix; 3] = [
    BasisMatrix { i: 0, j: 0 },
    BasisMatrix { i: 1, j: 1 },
    BasisMatrix { i: 0, j: 1 },
];

impl BasisMatrix {
    pub fn new(i: usize, j: usize) -> Self {
        BasisMatrix { i, j }
    }

    pub fn matrix(&self) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        m[self.i][self.j] += 0.5;
        m[self.j][self.i] += 0.5;
        m
    }

    /// Storage slot of an in-plane pair (symmetric in the indices).
    pub fn slot(i: usize, j: usize) -> usize {
        match (i.min(j), i.max(j)) {
            (0, 0) => 0,
            (1, 1) => 1,
            (0, 1) => 2,
            _ => panic!("not an in-plane pair: ({i}, {j})"),
        }
    }
}

/// Which cell problem: membrane forcing `+M` or bending forcing `−y₃ M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellLoad {
    Standard,
    Bending,
}

/// One solved cell problem.
#[derive(Debug, Clone)]
pub struct CellField {
    pub load: CellLoad,
    pub basis: BasisMatrix,
    pub field: FieldVector,
    pub stats: CgStats,
    /// `D_y(χ)` at the quadrature points, element by element.
    pub strain: Vec<Mat3>,
}

/// Periodic cell operator with the translation gauge.
pub struct CellProblem<'a> {
    pub mesh: &'a CellMesh,
    pub tensor: &'a ElasticityTensor4,
    pub dofs: DofMap,
    pub stiffness: CsrMatrix,
    pub gauge: Gauge,
    pub opts: CgOptions,
}

pub fn periodic_dofs(mesh: &CellMesh) -> DofMap {
    DofMap::new(&mesh.active, |id| mesh.periodic_map[id], |_| false)
}

/// Translations and their mean functionals over the solid.
pub fn translation_gauge(mesh: &CellMesh, dofs: &DofMap) -> Gauge {
    let lumped = lumped_weights(&mesh.grid, &mesh.elements, dofs);
    let kernel: Vec<Vec<f64>> = (0..3).map(|c| dofs.component_indicator(c)).collect();
    let weights = kernel.iter().map(|z| z.iter().zip(&lumped).map(|(a, b)| a * b).collect()).collect();
    Gauge { kernel, weights }
}

/// Symmetric gradients at the quadrature points of every solid element.
pub fn strain_field(mesh: &CellMesh, u: &FieldVector) -> Vec<Mat3> {
    let mut out = Vec::with_capacity(mesh.elements.len() * NQP);
    for &e in &mesh.elements {
        let vals = u.elem_values(&mesh.grid.elem_nodes(e));
        for q in 0..NQP {
            out.push(hex::sym(&hex::gradient_at(q, &vals, mesh.grid.h)));
        }
    }
    out
}

impl<'a> CellProblem<'a> {
    pub fn new(mesh: &'a CellMesh, tensor: &'a ElasticityTensor4, opts: CgOptions) -> Self {
        let dofs = periodic_dofs(mesh);
        let stiffness = assemble_elasticity(&mesh.grid, &mesh.elements, &dofs, tensor, 1.0);
        let gauge = translation_gauge(mesh, &dofs);
        CellProblem { mesh, tensor, dofs, stiffness, gauge, opts }
    }

    /// Forcing stress at a point of the cell.
    fn forcing(&self, load: CellLoad, basis: BasisMatrix, y3: f64) -> Mat3 {
        let am = self.tensor.apply(&basis.matrix());
        let s = match load {
            CellLoad::Standard => 1.0,
            CellLoad::Bending => -y3,
        };
        am.map(|r| r.map(|v| s * v))
    }

    /// Right-hand side `φ ↦ −∫ A F : D(φ)` with `F = M` or `F = −y₃ M`.
    pub fn rhs(&self, load: CellLoad, basis: BasisMatrix) -> Vec<f64> {
        let g = &self.mesh.grid;
        let r = hex::reference();
        let mut b = vec![0.0; self.dofs.ndof];
        for &e in &self.mesh.elements {
            let x0 = g.elem_origin(e);
            let dofs = self.dofs.elem_dofs(&g.elem_nodes(e));
            for q in 0..NQP {
                let y = hex::qp_coords(q, x0, g.h);
                let s = self.forcing(load, basis, y[2]);
                let w = r.weights[q] * g.h.powi(3);
                for a in 0..8 {
                    let grad: [f64; 3] = std::array::from_fn(|d| r.dn[q][a][d] / g.h);
                    for c in 0..3 {
                        if let Some(d) = dofs[3 * a + c] {
                            b[d] -= w * (0..3).map(|j| s[c][j] * grad[j]).sum::<f64>();
                        }
                    }
                }
            }
        }
        b
    }

    pub fn solve(&self, load: CellLoad, basis: BasisMatrix) -> Result<CellField> {
        let rhs = self.rhs(load, basis);
        let (x, stats) = solve_spd_with(&self.stiffness, &rhs, None, Some(&self.gauge), self.opts)
            .map_err(|e| Error::SolverFailure(format!("cell problem {load:?} {basis:?}: {e}")))?;
        let field = FieldVector::from_coeffs(&self.dofs, x);
        let strain = strain_field(self.mesh, &field);
        Ok(CellField { load, basis, field, stats, strain })
    }

    /// Weak residual `∫ A(D χ + F) : D(φ)` of a solution against a test
    /// field, relative to `‖rhs‖ ‖φ‖`.
    pub fn residual(&self, sol: &CellField, phi: &[f64]) -> f64 {
        let rhs = self.rhs(sol.load, sol.basis);
        let kx = self.stiffness.matvec(&sol.field.coeffs);
        let num: f64 = kx.iter().zip(&rhs).zip(phi).map(|((k, b), p)| (k - b) * p).sum();
        let scale = crate::fem::norm(&rhs) * crate::fem::norm(phi);
        if scale == 0.0 {
            num.abs()
        } else {
            num.abs() / scale
        }
    }
}

/// The six in-plane cell solutions on one mesh.
#[derive(Debug, Clone)]
pub struct CellSolutionSet {
    pub mesh: CellMesh,
    pub dofs: DofMap,
    /// Indexed by [`BasisMatrix::slot`].
    pub standard: Vec<CellField>,
    pub bending: Vec<CellField>,
}

impl CellSolutionSet {
    /// `D_y(χ)` at quadrature point `q` of the cell grid element `cell_elem`;
    /// zero in void elements.
    pub fn strain(&self, load: CellLoad, slot: usize, cell_elem: usize, q: usize) -> Mat3 {
        let set = match load {
            CellLoad::Standard => &self.standard,
            CellLoad::Bending => &self.bending,
        };
        match self.mesh.elem_slot[cell_elem] {
            Some(s) => set[slot].strain[s * NQP + q],
            None => [[0.0; 3]; 3],
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.standard.iter().chain(&self.bending).map(|f| f.stats.residual).fold(0.0, f64::max)
    }
}

pub fn solve_cell_standard(
    mesh: &CellMesh,
    tensor: &ElasticityTensor4,
    basis: BasisMatrix,
    opts: CgOptions,
) -> Result<CellField> {
    CellProblem::new(mesh, tensor, opts).solve(CellLoad::Standard, basis)
}

pub fn solve_cell_bending(
    mesh: &CellMesh,
    tensor: &ElasticityTensor4,
    basis: BasisMatrix,
    opts: CgOptions,
) -> Result<CellField> {
    CellProblem::new(mesh, tensor, opts).solve(CellLoad::Bending, basis)
}

/// Solves the six in-plane problems (three membrane, three bending)
/// concurrently on a shared operator.
pub fn solve_cell_problems(mesh: &CellMesh, tensor: &ElasticityTensor4, opts: CgOptions) -> Result<CellSolutionSet> {
    let problem = CellProblem::new(mesh, tensor, opts);
    let jobs: Vec<(CellLoad, BasisMatrix)> = [CellLoad::Standard, CellLoad::Bending]
        .iter()
        .flat_map(|&l| IN_PLANE.iter().map(move |&b| (l, b)))
        .collect();
    let mut fields: Vec<CellField> =
        jobs.par_iter().map(|&(l, b)| problem.solve(l, b)).collect::<Result<Vec<_>>>()?;
    let bending = fields.split_off(3);
    Ok(CellSolutionSet { mesh: mesh.clone(), dofs: problem.dofs, standard: fields, bending })
}
