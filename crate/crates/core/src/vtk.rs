//! Legacy ASCII VTK export of forest leaves.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::element::{Element, TreeShape, ROOT_LEN};
use crate::error::{AmrError, Result};
use crate::forest::{gather_leaves, CoarseMesh, Forest};
use crate::kernel::shape_kernel;
use crate::procgroup::Comm;

pub const VTK_TETRA: u8 = 10;
pub const VTK_HEXAHEDRON: u8 = 12;
pub const VTK_PYRAMID: u8 = 14;

/// Our hex corners are in tensor order; VTK walks the bottom and top faces cyclically.
const HEX_TO_VTK: [usize; 8] = [0, 1, 3, 2, 4, 5, 7, 6];

fn cell_type(shape: TreeShape, e: &Element) -> u8 {
    match shape {
        TreeShape::Hexahedron => VTK_HEXAHEDRON,
        _ if e.is_pyramid() => VTK_PYRAMID,
        _ => VTK_TETRA,
    }
}

/// Write `(owner, tree, element)` leaves, given in global forest order, as an unstructured
/// grid. Each tree is mapped to the unit cube; cells do not share points.
pub fn write_vtk<W: Write>(cmesh: &CoarseMesh, leaves: &[(usize, usize, Element)], out: W) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    let corners: Vec<Vec<[i64; 3]>> = leaves
        .iter()
        .map(|(_, t, e)| {
            let v = shape_kernel(cmesh.shape(*t)).vertex_coords(e);
            match cmesh.shape(*t) {
                TreeShape::Hexahedron => HEX_TO_VTK.iter().map(|&i| v[i]).collect(),
                _ => v.to_vec(),
            }
        })
        .collect();
    let num_points: usize = corners.iter().map(Vec::len).sum();

    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "forest leaves")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {num_points} double")?;
    let scale = f64::from(ROOT_LEN);
    for p in corners.iter().flatten() {
        writeln!(out, "{} {} {}", p[0] as f64 / scale, p[1] as f64 / scale, p[2] as f64 / scale)?;
    }
    writeln!(out, "CELLS {} {}", leaves.len(), leaves.len() + num_points)?;
    let mut next = 0;
    for c in &corners {
        write!(out, "{}", c.len())?;
        for i in next..next + c.len() {
            write!(out, " {i}")?;
        }
        writeln!(out)?;
        next += c.len();
    }
    writeln!(out, "CELL_TYPES {}", leaves.len())?;
    for (_, t, e) in leaves {
        writeln!(out, "{}", cell_type(cmesh.shape(*t), e))?;
    }
    writeln!(out, "CELL_DATA {}", leaves.len())?;
    let columns: [(&str, Box<dyn Fn(usize) -> u64>); 5] = [
        ("owner", Box::new(|i| leaves[i].0 as u64)),
        ("tree", Box::new(|i| leaves[i].1 as u64)),
        ("level", Box::new(|i| u64::from(leaves[i].2.level))),
        ("type", Box::new(|i| u64::from(leaves[i].2.etype))),
        ("sfc_rank", Box::new(|i| i as u64)),
    ];
    for (name, value) in &columns {
        writeln!(out, "SCALARS {name} int 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for i in 0..leaves.len() {
            writeln!(out, "{}", value(i))?;
        }
    }
    out.flush()
}

/// Collective: gather all leaves and let rank 0 write them to `path`.
pub fn export_vtk(forest: &Forest, comm: &mut Comm<'_>, path: &Path) -> Result<()> {
    let leaves = gather_leaves(forest, comm)?;
    if comm.rank() == 0 {
        write_vtk(forest.cmesh(), &leaves, File::create(path)?)?;
    }
    Ok(())
}

/// Point count, cell count and cell types read back from a file written by [`write_vtk`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VtkSummary {
    pub num_points: usize,
    pub cell_types: Vec<u8>,
}

impl VtkSummary {
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: &str| AmrError::Domain(format!("vtk: {m}"));
        let mut lines = text.lines();
        let count = |prefix: &str, lines: &mut std::str::Lines<'_>| -> Result<usize> {
            let line = lines.find(|l| l.starts_with(prefix)).ok_or_else(|| bad(&format!("missing {prefix}")))?;
            line.split_whitespace().nth(1).and_then(|n| n.parse().ok()).ok_or_else(|| bad(&format!("bad {prefix} line")))
        };
        let num_points = count("POINTS", &mut lines)?;
        let num_cells = count("CELL_TYPES", &mut lines)?;
        let cell_types = lines
            .by_ref()
            .take(num_cells)
            .map(|l| l.trim().parse::<u8>().map_err(|_| bad("bad cell type")))
            .collect::<Result<Vec<_>>>()?;
        if cell_types.len() != num_cells {
            return Err(bad("truncated CELL_TYPES"));
        }
        Ok(VtkSummary { num_points, cell_types })
    }

    pub fn count_of(&self, cell_type: u8) -> usize {
        self.cell_types.iter().filter(|&&t| t == cell_type).count()
    }
}
