use std::collections::VecDeque;

use sha2::{Digest, Sha256};

use super::grid::{Face, HexGrid};
use crate::error::{Error, Result};

/// How the solid part of the reference cell is described.
#[derive(Debug, Clone, PartialEq)]
pub enum Perforation {
    /// No hole: the solid fills the whole cell.
    Full,
    /// Axis-aligned box hole strictly inside `(0,1)² × (−1,1)`.
    BoxHole { lo: [f64; 3], hi: [f64; 3] },
    /// Hole centred on the vertical cell edges, repeated periodically. It
    /// cuts the lateral cell faces, so the tiled layer has holes on its
    /// lateral boundary.
    CornerHole { half_width: f64, half_height: f64 },
    /// Explicit solid mask over the `m × m × 2m` voxel grid, third index
    /// fastest.
    Mask { solid: Vec<bool> },
}

impl Perforation {
    pub fn default_box() -> Self {
        Perforation::BoxHole { lo: [0.25, 0.25, -0.5], hi: [0.75, 0.75, 0.5] }
    }

    fn rasterize(&self, m: usize) -> Result<Vec<bool>> {
        let n = m * m * 2 * m;
        let centre = |i: usize, j: usize, k: usize| {
            let v = 1.0 / m as f64;
            [(i as f64 + 0.5) * v, (j as f64 + 0.5) * v, -1.0 + (k as f64 + 0.5) * v]
        };
        let mut mask = vec![true; n];
        match self {
            Perforation::Full => {}
            Perforation::BoxHole { lo, hi } => {
                let inside = lo[0] > 0.0
                    && lo[1] > 0.0
                    && lo[2] > -1.0
                    && hi[0] < 1.0
                    && hi[1] < 1.0
                    && hi[2] < 1.0
                    && (0..3).all(|d| lo[d] < hi[d]);
                if !inside {
                    return Err(Error::InvalidInput(
                        "box hole must lie strictly inside the cell".into(),
                    ));
                }
                for (idx, s) in mask.iter_mut().enumerate() {
                    let c = centre(idx / (2 * m * m), (idx / (2 * m)) % m, idx % (2 * m));
                    if (0..3).all(|d| c[d] > lo[d] && c[d] < hi[d]) {
                        *s = false;
                    }
                }
            }
            Perforation::CornerHole { half_width, half_height } => {
                if !(*half_width > 0.0 && *half_width < 0.5 && *half_height > 0.0 && *half_height < 1.0)
                {
                    return Err(Error::InvalidInput(
                        "corner hole needs 0 < half_width < 0.5 and 0 < half_height < 1".into(),
                    ));
                }
                for (idx, s) in mask.iter_mut().enumerate() {
                    let c = centre(idx / (2 * m * m), (idx / (2 * m)) % m, idx % (2 * m));
                    let d1 = c[0].min(1.0 - c[0]);
                    let d2 = c[1].min(1.0 - c[1]);
                    if d1 < *half_width && d2 < *half_width && c[2].abs() < *half_height {
                        *s = false;
                    }
                }
            }
            Perforation::Mask { solid } => {
                if solid.len() != n {
                    return Err(Error::InvalidInput(format!(
                        "mask has {} voxels, expected {n} for m = {m}",
                        solid.len()
                    )));
                }
                mask.clone_from(solid);
            }
        }
        Ok(mask)
    }
}

/// Voxelized solid reference cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    pub m: usize,
    pub mask: Vec<bool>,
    /// Faces `(voxel id, face)` forming the interior solid boundary.
    pub gamma_faces: Vec<(usize, Face)>,
    pub solid_volume: f64,
}

impl CellGeometry {
    pub fn voxel_grid(&self) -> HexGrid {
        HexGrid::new([self.m, self.m, 2 * self.m], 1.0 / self.m as f64, [0.0, 0.0, -1.0])
    }

    pub fn is_solid(&self, i: usize, j: usize, k: usize) -> bool {
        self.mask[(i * self.m + j) * 2 * self.m + k]
    }

    pub fn solid_voxel_count(&self) -> usize {
        self.mask.iter().filter(|&&s| s).count()
    }

    pub fn is_full(&self) -> bool {
        self.mask.iter().all(|&s| s)
    }

    /// Area of the interior solid boundary.
    pub fn gamma_area(&self) -> f64 {
        let v = 1.0 / self.m as f64;
        self.gamma_faces.len() as f64 * v * v
    }

    /// SHA-256 of the resolution and mask bits, hex encoded.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.m as u64).to_le_bytes());
        let bytes: Vec<u8> = self.mask.iter().map(|&s| u8::from(s)).collect();
        hasher.update(&bytes);
        hex::encode(hasher.finalize())
    }
}

pub fn build_cell_geometry(spec: &Perforation, m: usize) -> Result<CellGeometry> {
    if m == 0 {
        return Err(Error::InvalidInput("mask resolution must be positive".into()));
    }
    let mask = spec.rasterize(m)?;
    let grid = HexGrid::new([m, m, 2 * m], 1.0 / m as f64, [0.0, 0.0, -1.0]);
    let count = mask.iter().filter(|&&s| s).count();
    if count == 0 {
        return Err(Error::EmptySolid);
    }
    for axis in 0..2 {
        for a in 0..m {
            for k in 0..2 * m {
                let (lo, hi) = if axis == 0 {
                    (grid.elem_id(0, a, k), grid.elem_id(m - 1, a, k))
                } else {
                    (grid.elem_id(a, 0, k), grid.elem_id(a, m - 1, k))
                };
                if mask[lo] != mask[hi] {
                    return Err(Error::PeriodicMismatch { axis: axis + 1 });
                }
            }
        }
    }
    let components = count_components(&grid, &mask);
    if components != 1 {
        return Err(Error::DisconnectedSolid { components });
    }
    let gamma_faces = gamma_faces_of(&grid, &mask);
    let v = 1.0 / m as f64;
    Ok(CellGeometry { m, mask, gamma_faces, solid_volume: count as f64 * v * v * v })
}

fn count_components(grid: &HexGrid, mask: &[bool]) -> usize {
    let mut label = vec![false; mask.len()];
    let mut components = 0;
    let mut queue = VecDeque::new();
    for start in 0..mask.len() {
        if !mask[start] || label[start] {
            continue;
        }
        components += 1;
        label[start] = true;
        queue.push_back(start);
        while let Some(e) = queue.pop_front() {
            for face in Face::ALL {
                if let Some(nb) = grid.neighbor(e, face) {
                    if mask[nb] && !label[nb] {
                        label[nb] = true;
                        queue.push_back(nb);
                    }
                }
            }
        }
    }
    components
}

/// Hexahedral mesh of the solid cell with lateral periodic identification.
#[derive(Debug, Clone)]
pub struct CellMesh {
    pub geometry: CellGeometry,
    pub n: usize,
    pub grid: HexGrid,
    pub elem_solid: Vec<bool>,
    /// Solid element ids in increasing order.
    pub elements: Vec<usize>,
    /// Grid element id to position in `elements`.
    pub elem_slot: Vec<Option<usize>>,
    /// Nodes touched by a solid element.
    pub active: Vec<bool>,
    /// Node to representative node (`i = n → 0`, `j = n → 0`).
    pub periodic_map: Vec<usize>,
    pub gamma_faces: Vec<(usize, Face)>,
}

pub fn build_cell_mesh(geom: &CellGeometry, n: usize) -> Result<CellMesh> {
    if n == 0 || n % geom.m != 0 {
        return Err(Error::ResolutionIncompatible { n, m: geom.m });
    }
    let r = n / geom.m;
    let grid = HexGrid::new([n, n, 2 * n], 1.0 / n as f64, [0.0, 0.0, -1.0]);
    let mut elem_solid = vec![false; grid.num_elements()];
    for (e, s) in elem_solid.iter_mut().enumerate() {
        let [i, j, k] = grid.elem_ijk(e);
        *s = geom.is_solid(i / r, j / r, k / r);
    }
    let (elements, elem_slot, active) = solid_lists(&grid, &elem_solid);
    let periodic_map = (0..grid.num_nodes())
        .map(|id| {
            let [i, j, k] = grid.node_ijk(id);
            grid.node_id(if i == n { 0 } else { i }, if j == n { 0 } else { j }, k)
        })
        .collect();
    let gamma_faces = gamma_faces_of(&grid, &elem_solid);
    Ok(CellMesh { geometry: geom.clone(), n, grid, elem_solid, elements, elem_slot, active, periodic_map, gamma_faces })
}

impl CellMesh {
    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// Number of distinct active nodes after periodic identification.
    pub fn unique_node_count(&self) -> usize {
        (0..self.grid.num_nodes())
            .filter(|&id| self.active[id] && self.periodic_map[id] == id)
            .count()
    }

    pub fn solid_volume(&self) -> f64 {
        self.elements.len() as f64 * self.grid.h.powi(3)
    }
}

pub(crate) fn solid_lists(grid: &HexGrid, elem_solid: &[bool]) -> (Vec<usize>, Vec<Option<usize>>, Vec<bool>) {
    let mut elements = Vec::new();
    let mut slot = vec![None; elem_solid.len()];
    let mut active = vec![false; grid.num_nodes()];
    for (e, &s) in elem_solid.iter().enumerate() {
        if s {
            slot[e] = Some(elements.len());
            elements.push(e);
            for nd in grid.elem_nodes(e) {
                active[nd] = true;
            }
        }
    }
    (elements, slot, active)
}

/// Faces of solid elements adjacent to void, plus top/bottom faces. Lateral
/// grid-boundary faces are never included.
pub(crate) fn gamma_faces_of(grid: &HexGrid, elem_solid: &[bool]) -> Vec<(usize, Face)> {
    let mut out = Vec::new();
    for (e, &s) in elem_solid.iter().enumerate() {
        if !s {
            continue;
        }
        for face in Face::ALL {
            match grid.neighbor(e, face) {
                Some(nb) if !elem_solid[nb] => out.push((e, face)),
                None if face.axis == 2 => out.push((e, face)),
                _ => {}
            }
        }
    }
    out
}
