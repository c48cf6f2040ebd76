//! Reference cell, layer and midsurface meshes.

mod cell;
mod dump;
mod grid;
mod layer;
mod plate_mesh;

pub use cell::{build_cell_geometry, build_cell_mesh, CellGeometry, CellMesh, Perforation};
pub use dump::{compact_nodes, read_mesh_dump, write_mesh_dump, DumpField, MeshDump, MESH_HEADER};
pub use grid::{Face, HexGrid, LOCAL_OFFSETS};
pub use layer::{build_layer_mesh, reciprocal_integer, Extent, LayerMesh};
pub use plate_mesh::{build_plate_mesh, PlateMesh, BENDING_DOFS_PER_NODE, MEMBRANE_DOFS_PER_NODE};
