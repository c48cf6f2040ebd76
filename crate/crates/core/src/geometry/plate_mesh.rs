use super::layer::Extent;
use crate::error::{Error, Result};

/// Structured rectangular mesh of the midsurface.
///
/// Node `(i, j)` has id `i * (ny + 1) + j`. Each node carries four Hermite
/// bending values `(w, w_x, w_y, w_xy)` and two membrane values. Every
/// boundary node is clamped in all six.
#[derive(Debug, Clone)]
pub struct PlateMesh {
    pub extent: Extent,
    pub dims: [usize; 2],
    pub h: [f64; 2],
    pub clamped: Vec<bool>,
    /// Free node ids in increasing order.
    pub free_nodes: Vec<usize>,
    /// Node id to position in `free_nodes`.
    pub free_slot: Vec<Option<usize>>,
    /// True when no interior node exists.
    pub degenerate: bool,
}

pub const BENDING_DOFS_PER_NODE: usize = 4;
pub const MEMBRANE_DOFS_PER_NODE: usize = 2;

pub fn build_plate_mesh(extent: Extent, n_per_unit: usize) -> Result<PlateMesh> {
    if n_per_unit == 0 {
        return Err(Error::InvalidInput("plate resolution must be positive".into()));
    }
    let sides = extent.validate_integer()?;
    let dims = [sides[0] * n_per_unit, sides[1] * n_per_unit];
    let h = [extent.side(0) / dims[0] as f64, extent.side(1) / dims[1] as f64];
    let nn = (dims[0] + 1) * (dims[1] + 1);
    let mut clamped = vec![false; nn];
    let mut free_nodes = Vec::new();
    let mut free_slot = vec![None; nn];
    for id in 0..nn {
        let (i, j) = (id / (dims[1] + 1), id % (dims[1] + 1));
        if i == 0 || j == 0 || i == dims[0] || j == dims[1] {
            clamped[id] = true;
        } else {
            free_slot[id] = Some(free_nodes.len());
            free_nodes.push(id);
        }
    }
    let degenerate = free_nodes.is_empty();
    Ok(PlateMesh { extent, dims, h, clamped, free_nodes, free_slot, degenerate })
}

impl PlateMesh {
    pub fn num_nodes(&self) -> usize {
        (self.dims[0] + 1) * (self.dims[1] + 1)
    }

    pub fn num_elements(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    pub fn num_bending_dofs(&self) -> usize {
        BENDING_DOFS_PER_NODE * self.num_nodes()
    }

    pub fn node_id(&self, i: usize, j: usize) -> usize {
        i * (self.dims[1] + 1) + j
    }

    pub fn node_coords(&self, id: usize) -> [f64; 2] {
        let (i, j) = (id / (self.dims[1] + 1), id % (self.dims[1] + 1));
        [self.extent.lo[0] + i as f64 * self.h[0], self.extent.lo[1] + j as f64 * self.h[1]]
    }

    /// Element `(i, j)` with id `i * ny + j`; nodes ordered (0,0),(0,1),(1,0),(1,1).
    pub fn elem_nodes(&self, e: usize) -> [usize; 4] {
        let (i, j) = (e / self.dims[1], e % self.dims[1]);
        [self.node_id(i, j), self.node_id(i, j + 1), self.node_id(i + 1, j), self.node_id(i + 1, j + 1)]
    }

    pub fn elem_origin(&self, e: usize) -> [f64; 2] {
        let (i, j) = (e / self.dims[1], e % self.dims[1]);
        [self.extent.lo[0] + i as f64 * self.h[0], self.extent.lo[1] + j as f64 * self.h[1]]
    }

    /// Element containing `x` and local coordinates in `[0,1]²`.
    pub fn locate(&self, x: [f64; 2]) -> (usize, [f64; 2]) {
        let mut ij = [0usize; 2];
        let mut xi = [0.0; 2];
        for d in 0..2 {
            let s = (x[d] - self.extent.lo[d]) / self.h[d];
            let c = s.floor().clamp(0.0, (self.dims[d] - 1) as f64);
            ij[d] = c as usize;
            xi[d] = (s - c).clamp(0.0, 1.0);
        }
        (ij[0] * self.dims[1] + ij[1], xi)
    }

    /// Global indices of clamped bending DOFs.
    pub fn clamped_bending_dofs(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (id, &c) in self.clamped.iter().enumerate() {
            if c {
                out.extend((0..BENDING_DOFS_PER_NODE).map(|d| id * BENDING_DOFS_PER_NODE + d));
            }
        }
        out
    }
}
