use super::dofs::DofMap;
use super::hex;
use super::sparse::CsrMatrix;
use super::tensor::ElasticityTensor4;
use crate::geometry::HexGrid;

/// Sparsity pattern shared by every vector form on these elements.
pub fn vector_pattern(grid: &HexGrid, elements: &[usize], dofs: &DofMap) -> CsrMatrix {
    let lists: Vec<[Option<usize>; 24]> = elements.iter().map(|&e| dofs.elem_dofs(&grid.elem_nodes(e))).collect();
    CsrMatrix::from_element_pattern(dofs.ndof, lists.iter().map(|l| &l[..]))
}

/// Adds the same 24×24 element matrix on every listed element.
pub fn assemble_uniform(grid: &HexGrid, elements: &[usize], dofs: &DofMap, elem: &[f64], scale: f64) -> CsrMatrix {
    let mut m = vector_pattern(grid, elements, dofs);
    for &e in elements {
        m.add_element(&dofs.elem_dofs(&grid.elem_nodes(e)), elem, scale);
    }
    m
}

/// `(u, v) ↦ scale · ∫ A D(u) : D(v)` on the listed elements.
pub fn assemble_elasticity(
    grid: &HexGrid,
    elements: &[usize],
    dofs: &DofMap,
    tensor: &ElasticityTensor4,
    scale: f64,
) -> CsrMatrix {
    assemble_uniform(grid, elements, dofs, &hex::stiffness_matrix(tensor, grid.h), scale)
}

/// Expands an 8×8 scalar matrix to the 24×24 block-diagonal vector matrix.
pub fn vector_block(scalar: &[f64; 64], weights: [f64; 3]) -> Vec<f64> {
    let mut m = vec![0.0; 576];
    for a in 0..8 {
        for b in 0..8 {
            for c in 0..3 {
                m[(3 * a + c) * 24 + 3 * b + c] = weights[c] * scalar[a * 8 + b];
            }
        }
    }
    m
}

/// `(u, v) ↦ weight · ∫ u · v`.
pub fn assemble_mass(grid: &HexGrid, elements: &[usize], dofs: &DofMap, weight: f64) -> CsrMatrix {
    let elem = vector_block(&hex::scalar_mass(grid.h), [1.0; 3]);
    assemble_uniform(grid, elements, dofs, &elem, weight)
}

/// Lumped mass `∫ N_a` summed onto the free DOFs of each component.
pub fn lumped_weights(grid: &HexGrid, elements: &[usize], dofs: &DofMap) -> Vec<f64> {
    let w = grid.h.powi(3) / 8.0;
    let mut out = vec![0.0; dofs.ndof];
    for &e in elements {
        for d in dofs.elem_dofs(&grid.elem_nodes(e)).iter().flatten() {
            out[*d] += w;
        }
    }
    out
}
