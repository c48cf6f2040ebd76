use crate::error::{Error, Result};
use crate::fem::hex;
use crate::geometry::LayerMesh;
use crate::inequalities::extend_field;
use crate::plate::MacroField;

/// How void segments of a vertical line enter the moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMode {
    /// Integrate the energy-minimizing extension over the whole column.
    Extension,
    /// Integrate over the solid part only; void segments contribute zero.
    Zero,
}

/// `𝒰_ε = (1/2ε²)∫(u¹,u²)dx₃` and `ℛ_ε = (3/2ε³)∫x₃(u¹,u²)dx₃` at the
/// midsurface quadrature points of the layer grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentField {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub big_u: Vec<[f64; 2]>,
    pub big_r: Vec<[f64; 2]>,
}

pub fn plate_moments(lmesh: &LayerMesh, nodal: &[[f64; 3]], mode: MomentMode) -> Result<MomentField> {
    let g = &lmesh.grid;
    if nodal.len() != g.num_nodes() {
        return Err(Error::InconsistentMesh("field does not match the layer grid".into()));
    }
    let field = match mode {
        MomentMode::Extension => extend_field(lmesh, nodal)?,
        MomentMode::Zero => nodal.to_vec(),
    };
    let eps = lmesh.eps;
    let gp = hex::gauss2();
    let [nx, ny, nz] = g.dims;
    let mut out = MomentField { points: Vec::new(), weights: Vec::new(), big_u: Vec::new(), big_r: Vec::new() };
    for i in 0..nx {
        for j in 0..ny {
            if mode == MomentMode::Zero && (0..nz).all(|k| !lmesh.elem_solid[g.elem_id(i, j, k)]) {
                let c = g.elem_origin(g.elem_id(i, j, 0));
                return Err(Error::EmptyColumn(c[0] + 0.5 * g.h, c[1] + 0.5 * g.h));
            }
            for &a in &gp {
                for &b in &gp {
                    let mut m0 = [0.0; 2];
                    let mut m1 = [0.0; 2];
                    for k in 0..nz {
                        let e = g.elem_id(i, j, k);
                        if mode == MomentMode::Zero && !lmesh.elem_solid[e] {
                            continue;
                        }
                        let nodes = g.elem_nodes(e);
                        let x3 = g.elem_origin(e)[2];
                        for &c in &gp {
                            let n = hex::shape([a, b, c]);
                            let z = x3 + c * g.h;
                            let w = 0.5 * g.h;
                            for d in 0..2 {
                                let u: f64 = (0..8).map(|q| n[q] * field[nodes[q]][d]).sum();
                                m0[d] += w * u;
                                m1[d] += w * z * u;
                            }
                        }
                    }
                    let x0 = g.elem_origin(g.elem_id(i, j, 0));
                    out.points.push([x0[0] + a * g.h, x0[1] + b * g.h]);
                    out.weights.push(0.25 * g.h * g.h);
                    out.big_u.push(m0.map(|v| v / (2.0 * eps * eps)));
                    out.big_r.push(m1.map(|v| 1.5 * v / (eps * eps * eps)));
                }
            }
        }
    }
    Ok(out)
}

impl MomentField {
    /// `(‖𝒰_ε − ũ₁‖, ‖ℛ_ε + ∇u₀³‖)` in `L²(Σ)`.
    pub fn distance_to(&self, macro_field: &dyn MacroField) -> (f64, f64) {
        let mut s = (0.0, 0.0);
        for (k, &x) in self.points.iter().enumerate() {
            let p = macro_field.at(x);
            let w = self.weights[k];
            for d in 0..2 {
                s.0 += w * (self.big_u[k][d] - p.u[d]).powi(2);
                s.1 += w * (self.big_r[k][d] + p.grad_w[d]).powi(2);
            }
        }
        (s.0.sqrt(), s.1.sqrt())
    }
}
