use std::io::Write;

use rayon::prelude::*;

use super::operators::MicroOperators;
use super::stepper::{MicroState, MicroTrajectory};
use crate::cell::{coefficient, CellLoad, CellSolutionSet, IN_PLANE};
use crate::error::{Error, Result};
use crate::fem::hex::{self, NQP};
use crate::fem::Mat3;
use crate::geometry::LayerMesh;
use crate::plate::MacroField;

/// Scaled distances between a layer field and the two-scale limit at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoScaleRow {
    pub eps: f64,
    pub t: f64,
    /// `ε^{-1/2}‖u³ − u₀³‖`.
    pub err_u3: f64,
    /// `ε^{-1/2}‖u^α/ε − (ũ₁^α − y₃∂_α u₀³)‖`.
    pub err_u1: [f64; 2],
    /// `ε^{-1/2}‖ε⁻¹D(u) − (D_x̄ũ₁ − y₃∇²u₀³ + D_y u₂)‖`.
    pub err_symgrad: f64,
    pub apriori_v: f64,
    pub apriori_d: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TwoScaleReport {
    pub rows: Vec<TwoScaleRow>,
}

impl TwoScaleReport {
    pub const HEADER: &'static str = "eps,t,err_u3,err_u1_1,err_u1_2,err_symgrad,apriori_v,apriori_D";

    pub fn write_csv(&self, out: &mut impl Write, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(out, "{}", Self::HEADER)?;
        }
        for r in &self.rows {
            writeln!(
                out,
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                r.eps, r.t, r.err_u3, r.err_u1[0], r.err_u1[1], r.err_symgrad, r.apriori_v, r.apriori_d
            )?;
        }
        Ok(())
    }
}

fn embed(m: [[f64; 2]; 2]) -> Mat3 {
    [[m[0][0], m[0][1], 0.0], [m[1][0], m[1][1], 0.0], [0.0; 3]]
}

/// Displacement and strain errors `(err_u3, err_u1, err_symgrad)` of a nodal
/// layer field against a macroscopic field, by quadrature over the solid.
pub fn two_scale_distances(
    lmesh: &LayerMesh,
    nodal: &[[f64; 3]],
    macro_field: &dyn MacroField,
    sols: &CellSolutionSet,
) -> Result<(f64, [f64; 2], f64)> {
    let g = &lmesh.grid;
    if nodal.len() != g.num_nodes() {
        return Err(Error::InconsistentMesh("field does not match the layer grid".into()));
    }
    if sols.mesh.grid != lmesh.cell_grid {
        return Err(Error::InconsistentMesh("cell solutions use another resolution".into()));
    }
    let eps = lmesh.eps;
    let r = hex::reference();
    let parts: Vec<[f64; 4]> = lmesh
        .elements
        .par_iter()
        .map(|&e| {
            let nodes = g.elem_nodes(e);
            let x0 = g.elem_origin(e);
            let u: [[f64; 3]; 8] = std::array::from_fn(|a| nodal[nodes[a]]);
            let (_, ce) = lmesh.cell_index(e);
            let mut acc = [0.0; 4];
            for q in 0..NQP {
                let x = hex::qp_coords(q, x0, g.h);
                let y3 = x[2] / eps;
                let w = r.weights[q] * g.h.powi(3);
                let p = macro_field.at([x[0], x[1]]);
                let uq: [f64; 3] = std::array::from_fn(|c| (0..8).map(|a| r.n[q][a] * u[a][c]).sum());
                acc[0] += w * (uq[2] - p.w).powi(2);
                for d in 0..2 {
                    acc[1 + d] += w * (uq[d] / eps - (p.u[d] - y3 * p.grad_w[d])).powi(2);
                }
                let ee = p.sym_grad_u();
                let hh = p.hess_w;
                let du = hex::sym(&hex::gradient_at(q, &u, g.h));
                let mut limit = embed(ee);
                let bend = embed(hh);
                for i in 0..3 {
                    for j in 0..3 {
                        limit[i][j] -= y3 * bend[i][j];
                    }
                }
                for (slot, b) in IN_PLANE.iter().enumerate() {
                    let (cs, cb) = coefficient(b, &ee, &hh);
                    let ds = sols.strain(CellLoad::Standard, slot, ce, q);
                    let db = sols.strain(CellLoad::Bending, slot, ce, q);
                    for i in 0..3 {
                        for j in 0..3 {
                            limit[i][j] += cs * ds[i][j] + cb * db[i][j];
                        }
                    }
                }
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        s += (du[i][j] / eps - limit[i][j]).powi(2);
                    }
                }
                acc[3] += w * s;
            }
            acc
        })
        .collect();
    let mut tot = [0.0; 4];
    for p in parts {
        for k in 0..4 {
            tot[k] += p[k];
        }
    }
    let f = |v: f64| (v / eps).sqrt();
    Ok((f(tot[0]), [f(tot[1]), f(tot[2])], f(tot[3])))
}

/// Errors of a layer state against the plate solution at the same time.
pub fn two_scale_errors(
    lmesh: &LayerMesh,
    ops: &MicroOperators,
    micro: &MicroState,
    macro_t: f64,
    macro_field: &dyn MacroField,
    sols: &CellSolutionSet,
) -> Result<TwoScaleRow> {
    if (micro.t - macro_t).abs() > 1e-9 * macro_t.abs().max(1.0) {
        return Err(Error::TimeMismatch { micro: micro.t, macro_: macro_t });
    }
    let nodal = ops.dofs.expand(&micro.u);
    let (err_u3, err_u1, err_symgrad) = two_scale_distances(lmesh, &nodal, macro_field, sols)?;
    let (apriori_v, apriori_d) = micro.apriori(ops);
    Ok(TwoScaleRow { eps: ops.eps, t: micro.t, err_u3, err_u1, err_symgrad, apriori_v, apriori_d })
}

/// A priori quantities over a trajectory with their maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct AprioriTable {
    pub eps: f64,
    /// `(t, ε^{-1/2}‖∂_t u‖, ε^{-3/2}‖D(u)‖)`.
    pub rows: Vec<(f64, f64, f64)>,
    pub max_v: f64,
    pub max_d: f64,
}

pub fn apriori_check(traj: &MicroTrajectory) -> AprioriTable {
    let rows: Vec<(f64, f64, f64)> = traj.records.iter().map(|r| (r.t, r.apriori_v, r.apriori_d)).collect();
    let max_v = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let max_d = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    AprioriTable { eps: traj.eps, rows, max_v, max_d }
}
