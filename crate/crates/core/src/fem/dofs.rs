use crate::geometry::HexGrid;

/// Numbering of free vector DOFs (three components per node).
///
/// Periodic copies share the slot of their representative; fixed and
/// inactive nodes have no slot. Slots follow increasing representative id,
/// so the numbering is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub node_slot: Vec<Option<usize>>,
    /// Representative node id of each slot.
    pub slot_node: Vec<usize>,
    pub ndof: usize,
}

impl DofMap {
    pub fn new(active: &[bool], rep: impl Fn(usize) -> usize, fixed: impl Fn(usize) -> bool) -> Self {
        let nn = active.len();
        let mut rep_slot = vec![None; nn];
        let mut slot_node = Vec::new();
        for id in 0..nn {
            if active[id] && rep(id) == id && !fixed(id) {
                rep_slot[id] = Some(slot_node.len());
                slot_node.push(id);
            }
        }
        let node_slot = (0..nn).map(|id| if active[id] { rep_slot[rep(id)] } else { None }).collect();
        let ndof = 3 * slot_node.len();
        DofMap { node_slot, slot_node, ndof }
    }

    /// All active nodes free, no identification.
    pub fn plain(active: &[bool]) -> Self {
        Self::new(active, |i| i, |_| false)
    }

    #[inline]
    pub fn dof(&self, node: usize, comp: usize) -> Option<usize> {
        self.node_slot[node].map(|s| 3 * s + comp)
    }

    #[inline]
    pub fn elem_dofs(&self, nodes: &[usize; 8]) -> [Option<usize>; 24] {
        let mut out = [None; 24];
        for (a, &nd) in nodes.iter().enumerate() {
            if let Some(s) = self.node_slot[nd] {
                for c in 0..3 {
                    out[3 * a + c] = Some(3 * s + c);
                }
            }
        }
        out
    }

    /// Nodal values on every grid node (zero where no slot).
    pub fn expand(&self, coeffs: &[f64]) -> Vec<[f64; 3]> {
        assert_eq!(coeffs.len(), self.ndof);
        self.node_slot
            .iter()
            .map(|s| match s {
                Some(s) => [coeffs[3 * s], coeffs[3 * s + 1], coeffs[3 * s + 2]],
                None => [0.0; 3],
            })
            .collect()
    }

    /// Coefficients read from nodal values at the representative nodes.
    pub fn restrict(&self, nodal: &[[f64; 3]]) -> Vec<f64> {
        let mut out = vec![0.0; self.ndof];
        for (s, &nd) in self.slot_node.iter().enumerate() {
            out[3 * s..3 * s + 3].copy_from_slice(&nodal[nd]);
        }
        out
    }

    /// Coefficients interpolating `f` at the representative nodes.
    pub fn interpolate(&self, grid: &HexGrid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Vec<f64> {
        let mut out = vec![0.0; self.ndof];
        for (s, &nd) in self.slot_node.iter().enumerate() {
            out[3 * s..3 * s + 3].copy_from_slice(&f(grid.node_coords(nd)));
        }
        out
    }

    /// Indicator of component `c` (all its DOFs set to one).
    pub fn component_indicator(&self, c: usize) -> Vec<f64> {
        let mut z = vec![0.0; self.ndof];
        for s in 0..self.slot_node.len() {
            z[3 * s + c] = 1.0;
        }
        z
    }
}

/// Discrete vector field: free coefficients plus values on every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldVector {
    pub coeffs: Vec<f64>,
    pub nodal: Vec<[f64; 3]>,
}

impl FieldVector {
    pub fn from_coeffs(dofs: &DofMap, coeffs: Vec<f64>) -> Self {
        let nodal = dofs.expand(&coeffs);
        FieldVector { coeffs, nodal }
    }

    pub fn zeros(dofs: &DofMap) -> Self {
        Self::from_coeffs(dofs, vec![0.0; dofs.ndof])
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn elem_values(&self, nodes: &[usize; 8]) -> [[f64; 3]; 8] {
        std::array::from_fn(|a| self.nodal[nodes[a]])
    }
}
