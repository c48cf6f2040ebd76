use super::cell::{gamma_faces_of, solid_lists, CellGeometry};
use super::grid::{Face, HexGrid};
use crate::error::{Error, Result};

/// Rectangle `(lo, hi)` with integer corners describing the midsurface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extent {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Extent {
    pub fn unit() -> Self {
        Extent { lo: [0.0, 0.0], hi: [1.0, 1.0] }
    }

    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        Extent { lo, hi }
    }

    pub fn side(&self, d: usize) -> f64 {
        self.hi[d] - self.lo[d]
    }

    pub fn area(&self) -> f64 {
        self.side(0) * self.side(1)
    }

    pub(crate) fn validate_integer(&self) -> Result<[usize; 2]> {
        let mut out = [0; 2];
        for d in 0..2 {
            let ok = |v: f64| (v - v.round()).abs() < 1e-12;
            if !ok(self.lo[d]) || !ok(self.hi[d]) || self.hi[d] <= self.lo[d] {
                return Err(Error::InvalidInput(format!(
                    "midsurface corners must be integers with lo < hi, got {:?}",
                    self
                )));
            }
            out[d] = (self.hi[d] - self.lo[d]).round() as usize;
        }
        Ok(out)
    }
}

/// Returns `1/ε` if it is a positive integer (up to rounding).
pub fn reciprocal_integer(eps: f64) -> Result<usize> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::EpsilonNotReciprocalInteger(eps));
    }
    let inv = 1.0 / eps;
    let r = inv.round();
    if r < 1.0 || (inv - r).abs() > 1e-9 * r {
        return Err(Error::EpsilonNotReciprocalInteger(eps));
    }
    Ok(r as usize)
}

/// Hexahedral mesh of the thin perforated layer `Σ × (−ε, ε)`.
///
/// The grid spans the whole layer; `elem_solid` marks the elements inside the
/// tiled solid. Void elements are kept so that fields can be extended into
/// the holes.
#[derive(Debug, Clone)]
pub struct LayerMesh {
    pub eps: f64,
    pub extent: Extent,
    pub n: usize,
    pub cells: [usize; 2],
    pub grid: HexGrid,
    pub elem_solid: Vec<bool>,
    pub elements: Vec<usize>,
    pub elem_slot: Vec<Option<usize>>,
    pub void_elements: Vec<usize>,
    pub active: Vec<bool>,
    /// Active nodes on the lateral boundary (clamped part).
    pub dirichlet: Vec<bool>,
    pub gamma_faces: Vec<(usize, Face)>,
    /// Grid of the reference cell at the same resolution.
    pub cell_grid: HexGrid,
}

pub fn build_layer_mesh(geom: &CellGeometry, eps: f64, extent: Extent, n: usize) -> Result<LayerMesh> {
    if n == 0 || n % geom.m != 0 {
        return Err(Error::ResolutionIncompatible { n, m: geom.m });
    }
    let inv = reciprocal_integer(eps)?;
    let sides = extent.validate_integer()?;
    let cells = [sides[0] * inv, sides[1] * inv];
    let eps = 1.0 / inv as f64;
    let r = n / geom.m;
    let grid = HexGrid::new(
        [cells[0] * n, cells[1] * n, 2 * n],
        eps / n as f64,
        [extent.lo[0], extent.lo[1], -eps],
    );
    let mut elem_solid = vec![false; grid.num_elements()];
    for (e, s) in elem_solid.iter_mut().enumerate() {
        let [i, j, k] = grid.elem_ijk(e);
        *s = geom.is_solid((i % n) / r, (j % n) / r, k / r);
    }
    let (elements, elem_slot, active) = solid_lists(&grid, &elem_solid);
    let void_elements = (0..grid.num_elements()).filter(|&e| !elem_solid[e]).collect();
    let mut dirichlet = vec![false; grid.num_nodes()];
    for (id, d) in dirichlet.iter_mut().enumerate() {
        let [i, j, _] = grid.node_ijk(id);
        let lateral = i == 0 || j == 0 || i == grid.dims[0] || j == grid.dims[1];
        *d = lateral && active[id];
    }
    let gamma_faces = gamma_faces_of(&grid, &elem_solid);
    let cell_grid = HexGrid::new([n, n, 2 * n], 1.0 / n as f64, [0.0, 0.0, -1.0]);
    Ok(LayerMesh {
        eps,
        extent,
        n,
        cells,
        grid,
        elem_solid,
        elements,
        elem_slot,
        void_elements,
        active,
        dirichlet,
        gamma_faces,
        cell_grid,
    })
}

impl LayerMesh {
    pub fn num_cells(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn is_perforated(&self) -> bool {
        !self.void_elements.is_empty()
    }

    /// Cell index `k` and the matching element id in the reference cell grid.
    pub fn cell_index(&self, e: usize) -> ([usize; 2], usize) {
        let [i, j, k] = self.grid.elem_ijk(e);
        let n = self.n;
        ([i / n, j / n], self.cell_grid.elem_id(i % n, j % n, k))
    }

    /// Cell coordinates `y = x/ε` folded into the reference cell.
    pub fn to_cell(&self, x: [f64; 3]) -> [f64; 3] {
        let fold = |v: f64| v - v.floor();
        let s = 1.0 / self.eps;
        [
            fold((x[0] - self.extent.lo[0]) * s),
            fold((x[1] - self.extent.lo[1]) * s),
            x[2] * s,
        ]
    }

    /// Active nodes on the lateral boundary `∂Σ × (−ε, ε)`, whether or not clamped.
    pub fn lateral_node(&self, id: usize) -> bool {
        let [i, j, _] = self.grid.node_ijk(id);
        i == 0 || j == 0 || i == self.grid.dims[0] || j == self.grid.dims[1]
    }
}
