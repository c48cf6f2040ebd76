use super::problems::{BasisMatrix, CellSolutionSet, IN_PLANE};
use crate::fem::FieldVector;

/// `u₂ = Σ_αβ [E_αβ χ_αβ + H_αβ χᴮ_αβ]` for a membrane strain `E` and a
/// Hessian `H` of the bending displacement at one midsurface point.
pub fn reconstruct_corrector(sols: &CellSolutionSet, membrane_strain: [[f64; 2]; 2], hessian: [[f64; 2]; 2]) -> FieldVector {
    let mut coeffs = vec![0.0; sols.dofs.ndof];
    for (slot, b) in IN_PLANE.iter().enumerate() {
        let (ce, ch) = coefficient(b, &membrane_strain, &hessian);
        for (c, (s, t)) in coeffs
            .iter_mut()
            .zip(sols.standard[slot].field.coeffs.iter().zip(&sols.bending[slot].field.coeffs))
        {
            *c += ce * s + ch * t;
        }
    }
    FieldVector::from_coeffs(&sols.dofs, coeffs)
}

/// Weights of `χ_αβ` and `χᴮ_αβ` in the symmetric sum; the off-diagonal
/// pair appears twice.
pub(crate) fn coefficient(b: &BasisMatrix, e: &[[f64; 2]; 2], h: &[[f64; 2]; 2]) -> (f64, f64) {
    if b.i == b.j {
        (e[b.i][b.i], h[b.i][b.i])
    } else {
        (e[b.i][b.j] + e[b.j][b.i], h[b.i][b.j] + h[b.j][b.i])
    }
}
