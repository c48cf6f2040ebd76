use std::io::{self, BufRead, Write};

use super::grid::HexGrid;

pub const MESH_HEADER: &str = "PERFOLAYER-MESH v1";

/// Nodal field attached to a mesh dump.
#[derive(Debug, Clone, PartialEq)]
pub struct DumpField {
    pub name: String,
    pub ncomp: usize,
    /// One row per dumped node.
    pub values: Vec<Vec<f64>>,
}

/// Parsed content of a mesh dump.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshDump {
    pub nodes: Vec<[f64; 3]>,
    pub elements: Vec<[usize; 8]>,
    pub fields: Vec<DumpField>,
}

/// Node renumbering for the given elements: returns the used grid nodes in
/// increasing order and a grid→dump index map.
pub fn compact_nodes(grid: &HexGrid, elements: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut used = vec![false; grid.num_nodes()];
    for &e in elements {
        for nd in grid.elem_nodes(e) {
            used[nd] = true;
        }
    }
    let mut map = vec![usize::MAX; grid.num_nodes()];
    let mut list = Vec::new();
    for (id, &u) in used.iter().enumerate() {
        if u {
            map[id] = list.len();
            list.push(id);
        }
    }
    (list, map)
}

/// Writes `elements` of `grid` plus optional nodal fields given per grid node.
pub fn write_mesh_dump<W: Write>(
    out: &mut W,
    grid: &HexGrid,
    elements: &[usize],
    fields: &[(&str, &[[f64; 3]])],
) -> io::Result<()> {
    let (list, map) = compact_nodes(grid, elements);
    writeln!(out, "{MESH_HEADER}")?;
    writeln!(out, "{}", list.len())?;
    writeln!(out, "{}", elements.len())?;
    for &id in &list {
        let x = grid.node_coords(id);
        writeln!(out, "{:.17e} {:.17e} {:.17e}", x[0], x[1], x[2])?;
    }
    for &e in elements {
        let nodes = grid.elem_nodes(e);
        let line: Vec<String> = nodes.iter().map(|&nd| map[nd].to_string()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    for (name, values) in fields {
        writeln!(out, "field {name} 3")?;
        for &id in &list {
            let v = values[id];
            writeln!(out, "{:.17e} {:.17e} {:.17e}", v[0], v[1], v[2])?;
        }
    }
    Ok(())
}

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

pub fn read_mesh_dump<R: BufRead>(input: R) -> io::Result<MeshDump> {
    let mut lines = input.lines();
    let mut next = || -> io::Result<String> { lines.next().ok_or_else(|| bad("unexpected end of dump"))? };
    if next()?.trim() != MESH_HEADER {
        return Err(bad("missing header"));
    }
    let nn: usize = next()?.trim().parse().map_err(|_| bad("bad node count"))?;
    let ne: usize = next()?.trim().parse().map_err(|_| bad("bad element count"))?;
    let parse_row = |s: &str| -> io::Result<Vec<f64>> {
        s.split_whitespace().map(|t| t.parse::<f64>().map_err(|_| bad(format!("bad number {t}")))).collect()
    };
    let mut nodes = Vec::with_capacity(nn);
    for _ in 0..nn {
        let v = parse_row(&next()?)?;
        if v.len() != 3 {
            return Err(bad("node line needs 3 coordinates"));
        }
        nodes.push([v[0], v[1], v[2]]);
    }
    let mut elements = Vec::with_capacity(ne);
    for _ in 0..ne {
        let ids: Vec<usize> = next()?
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| bad("bad node index")))
            .collect::<io::Result<_>>()?;
        if ids.len() != 8 || ids.iter().any(|&i| i >= nn) {
            return Err(bad("element line needs 8 valid node indices"));
        }
        elements.push([ids[0], ids[1], ids[2], ids[3], ids[4], ids[5], ids[6], ids[7]]);
    }
    let mut fields = Vec::new();
    loop {
        let line = match next() {
            Ok(l) => l,
            Err(_) => break,
        };
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 || parts[0] != "field" {
            return Err(bad(format!("unexpected line: {line}")));
        }
        let ncomp: usize = parts[2].parse().map_err(|_| bad("bad field arity"))?;
        let mut values = Vec::with_capacity(nn);
        for _ in 0..nn {
            let v = parse_row(&next()?)?;
            if v.len() != ncomp {
                return Err(bad("field row has wrong arity"));
            }
            values.push(v);
        }
        fields.push(DumpField { name: parts[1].to_string(), ncomp, values });
    }
    Ok(MeshDump { nodes, elements, fields })
}
