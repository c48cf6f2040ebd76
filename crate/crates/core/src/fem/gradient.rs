use super::dofs::FieldVector;
use super::hex::{self, NQP};
use super::tensor::Mat3;
use crate::geometry::HexGrid;

/// Split of the displacement gradient at every quadrature point.
///
/// Entries are stored element by element (in the order of the element
/// list), eight points each.
#[derive(Debug, Clone)]
pub struct GradientDecomposition {
    pub sym: Vec<Mat3>,
    pub skew: Vec<Mat3>,
    pub mean_skew: Mat3,
    /// `κ_ε`-scaled symmetric part: weights 1 on in-plane entries, `1/ε` on
    /// `i3` entries and `1/ε²` on the `33` entry.
    pub weighted: Option<Vec<Mat3>>,
    /// Quadrature weight times volume of each point.
    pub weights: Vec<f64>,
}

pub fn kappa_weight(i: usize, j: usize, eps: f64) -> f64 {
    match (i == 2, j == 2) {
        (false, false) => 1.0,
        (true, true) => 1.0 / (eps * eps),
        _ => 1.0 / eps,
    }
}

pub fn gradient_decomposition(grid: &HexGrid, elements: &[usize], u: &FieldVector, eps: Option<f64>) -> GradientDecomposition {
    let n = elements.len() * NQP;
    let mut sym = Vec::with_capacity(n);
    let mut skew = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut mean = [[0.0; 3]; 3];
    let mut vol = 0.0;
    let w = grid.h.powi(3) * hex::reference().weights[0];
    for &e in elements {
        let vals = u.elem_values(&grid.elem_nodes(e));
        for q in 0..NQP {
            let g = hex::gradient_at(q, &vals, grid.h);
            let s = hex::sym(&g);
            let r: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| 0.5 * (g[i][j] - g[j][i])));
            for i in 0..3 {
                for j in 0..3 {
                    mean[i][j] += w * r[i][j];
                }
            }
            vol += w;
            sym.push(s);
            skew.push(r);
            weights.push(w);
        }
    }
    if vol > 0.0 {
        for row in mean.iter_mut() {
            for v in row.iter_mut() {
                *v /= vol;
            }
        }
    }
    let weighted = eps.map(|eps| {
        sym.iter()
            .map(|s| std::array::from_fn(|i| std::array::from_fn(|j| kappa_weight(i, j, eps) * s[i][j])))
            .collect()
    });
    GradientDecomposition { sym, skew, mean_skew: mean, weighted, weights }
}
