/// Uniform structured grid of cubic hexahedra.
///
/// Nodes are numbered lexicographically with the third index fastest, so a
/// node `(i, j, k)` has id `(i * (ny + 1) + j) * (nz + 1) + k`. Elements follow
/// the same rule on `dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct HexGrid {
    pub dims: [usize; 3],
    pub h: f64,
    pub origin: [f64; 3],
}

/// Local node `a` of an element sits at offset `((a >> 2) & 1, (a >> 1) & 1, a & 1)`.
pub const LOCAL_OFFSETS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [0, 0, 1],
    [0, 1, 0],
    [0, 1, 1],
    [1, 0, 0],
    [1, 0, 1],
    [1, 1, 0],
    [1, 1, 1],
];

/// Element face: `axis` in 0..3 and `positive` selects the upper side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face {
    pub axis: usize,
    pub positive: bool,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face { axis: 0, positive: false },
        Face { axis: 0, positive: true },
        Face { axis: 1, positive: false },
        Face { axis: 1, positive: true },
        Face { axis: 2, positive: false },
        Face { axis: 2, positive: true },
    ];

    /// Local node indices (0..8) lying on this face.
    pub fn local_nodes(&self) -> [usize; 4] {
        let side = usize::from(self.positive);
        let mut out = [0; 4];
        let mut c = 0;
        for (a, off) in LOCAL_OFFSETS.iter().enumerate() {
            if off[self.axis] == side {
                out[c] = a;
                c += 1;
            }
        }
        out
    }

    pub fn normal(&self) -> [f64; 3] {
        let mut n = [0.0; 3];
        n[self.axis] = if self.positive { 1.0 } else { -1.0 };
        n
    }
}

impl HexGrid {
    pub fn new(dims: [usize; 3], h: f64, origin: [f64; 3]) -> Self {
        HexGrid { dims, h, origin }
    }

    pub fn num_nodes(&self) -> usize {
        (self.dims[0] + 1) * (self.dims[1] + 1) * (self.dims[2] + 1)
    }

    pub fn num_elements(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn node_id(&self, i: usize, j: usize, k: usize) -> usize {
        (i * (self.dims[1] + 1) + j) * (self.dims[2] + 1) + k
    }

    #[inline]
    pub fn node_ijk(&self, id: usize) -> [usize; 3] {
        let nz = self.dims[2] + 1;
        let ny = self.dims[1] + 1;
        [id / (ny * nz), (id / nz) % ny, id % nz]
    }

    #[inline]
    pub fn node_coords(&self, id: usize) -> [f64; 3] {
        let [i, j, k] = self.node_ijk(id);
        [
            self.origin[0] + i as f64 * self.h,
            self.origin[1] + j as f64 * self.h,
            self.origin[2] + k as f64 * self.h,
        ]
    }

    #[inline]
    pub fn elem_id(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    #[inline]
    pub fn elem_ijk(&self, id: usize) -> [usize; 3] {
        let nz = self.dims[2];
        let ny = self.dims[1];
        [id / (ny * nz), (id / nz) % ny, id % nz]
    }

    #[inline]
    pub fn elem_nodes(&self, e: usize) -> [usize; 8] {
        let [i, j, k] = self.elem_ijk(e);
        let mut out = [0; 8];
        for (a, off) in LOCAL_OFFSETS.iter().enumerate() {
            out[a] = self.node_id(i + off[0], j + off[1], k + off[2]);
        }
        out
    }

    /// Lower corner of element `e`.
    #[inline]
    pub fn elem_origin(&self, e: usize) -> [f64; 3] {
        let [i, j, k] = self.elem_ijk(e);
        [
            self.origin[0] + i as f64 * self.h,
            self.origin[1] + j as f64 * self.h,
            self.origin[2] + k as f64 * self.h,
        ]
    }

    /// Neighbour element across `face`, or `None` outside the grid.
    pub fn neighbor(&self, e: usize, face: Face) -> Option<usize> {
        let mut ijk = self.elem_ijk(e);
        if face.positive {
            if ijk[face.axis] + 1 >= self.dims[face.axis] {
                return None;
            }
            ijk[face.axis] += 1;
        } else {
            if ijk[face.axis] == 0 {
                return None;
            }
            ijk[face.axis] -= 1;
        }
        Some(self.elem_id(ijk[0], ijk[1], ijk[2]))
    }

    /// Element containing the point, clamped to the grid.
    pub fn locate(&self, x: [f64; 3]) -> (usize, [f64; 3]) {
        let mut ijk = [0usize; 3];
        let mut xi = [0.0; 3];
        for d in 0..3 {
            let s = (x[d] - self.origin[d]) / self.h;
            let mut c = s.floor();
            if c < 0.0 {
                c = 0.0;
            }
            if c as usize >= self.dims[d] {
                c = (self.dims[d] - 1) as f64;
            }
            ijk[d] = c as usize;
            xi[d] = (s - c).clamp(0.0, 1.0);
        }
        (self.elem_id(ijk[0], ijk[1], ijk[2]), xi)
    }
}
