use std::fmt::Write as _;

use super::{CoarseMesh, Forest};
use crate::element::{Element, TreeShape, MAX_LEVEL};
use crate::error::Result;
use crate::kernel::{shape_kernel, ElementKernel};
use crate::procgroup::{Comm, PayloadReader, PayloadWriter};

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn leaf_hash(tree: usize, e: &Element) -> u64 {
    let mut h = mix(tree as u64);
    for v in [e.level as u64, e.x as u32 as u64, e.y as u32 as u64, e.z as u32 as u64, e.etype as u64] {
        h = mix(h ^ v);
    }
    h
}

/// Order-independent hash of all leaves; unchanged by repartitioning.
pub fn forest_checksum(forest: &Forest, comm: &mut Comm<'_>) -> Result<u64> {
    let local = forest.leaves().fold(0u64, |acc, (t, e)| acc.wrapping_add(leaf_hash(t, e)));
    comm.allreduce_wrapping_sum(local)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestStats {
    pub num_trees: usize,
    pub global_leaves: u64,
    pub per_rank: Vec<u64>,
    /// Leaves per tree shape, in [`TreeShape::ALL`] order.
    pub per_shape: [u64; 3],
    /// Leaves that are pyramids, tetrahedra and hexahedra respectively.
    pub per_element_shape: [u64; 3],
    pub min_level: u8,
    pub max_level: u8,
}

impl ForestStats {
    pub fn imbalance(&self) -> u64 {
        let max = self.per_rank.iter().max().copied().unwrap_or(0);
        let min = self.per_rank.iter().min().copied().unwrap_or(0);
        max - min
    }

    /// `key value` lines.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "trees {}", self.num_trees);
        let _ = writeln!(s, "leaves {}", self.global_leaves);
        let _ = writeln!(s, "ranks {}", self.per_rank.len());
        for (q, n) in self.per_rank.iter().enumerate() {
            let _ = writeln!(s, "rank_leaves.{q} {n}");
        }
        for (shape, n) in TreeShape::ALL.iter().zip(self.per_shape) {
            let _ = writeln!(s, "tree_shape_leaves.{shape} {n}");
        }
        for (name, n) in ["pyramid", "tet", "hex"].iter().zip(self.per_element_shape) {
            let _ = writeln!(s, "element_shape_leaves.{name} {n}");
        }
        let _ = writeln!(s, "min_level {}", self.min_level);
        let _ = writeln!(s, "max_level {}", self.max_level);
        let _ = writeln!(s, "imbalance {}", self.imbalance());
        s
    }
}

pub fn forest_stats(forest: &Forest, comm: &mut Comm<'_>) -> Result<ForestStats> {
    let mut per_shape = [0u64; 3];
    let mut per_elem = [0u64; 3];
    let (mut lo, mut hi) = (MAX_LEVEL, 0u8);
    for t in forest.trees() {
        let si = TreeShape::ALL.iter().position(|&s| s == t.shape).expect("known shape");
        per_shape[si] += t.leaves.len() as u64;
        for e in &t.leaves {
            let ei = match t.shape {
                TreeShape::Hexahedron => 2,
                _ if e.is_pyramid() => 0,
                _ => 1,
            };
            per_elem[ei] += 1;
            lo = lo.min(e.level);
            hi = hi.max(e.level);
        }
    }
    let mut w = PayloadWriter::new();
    for v in per_shape.iter().chain(&per_elem) {
        w.u64(*v);
    }
    w.u8(lo).u8(hi).u64(forest.num_local_leaves() as u64);
    let all = comm.allgather(w.finish())?;
    let mut stats = ForestStats {
        num_trees: forest.cmesh.num_trees(),
        global_leaves: forest.num_global_leaves(),
        per_rank: Vec::with_capacity(all.len()),
        per_shape: [0; 3],
        per_element_shape: [0; 3],
        min_level: MAX_LEVEL,
        max_level: 0,
    };
    for b in &all {
        let mut r = PayloadReader::new(b);
        for i in 0..3 {
            stats.per_shape[i] += r.u64()?;
        }
        for i in 0..3 {
            stats.per_element_shape[i] += r.u64()?;
        }
        let (l, h, n) = (r.u8()?, r.u8()?, r.u64()?);
        if n > 0 {
            stats.min_level = stats.min_level.min(l);
            stats.max_level = stats.max_level.max(h);
        }
        stats.per_rank.push(n);
    }
    Ok(stats)
}

/// Interval of level-`MAX_LEVEL` linear ids covered by `e`.
fn max_level_interval(k: &dyn ElementKernel, e: &Element) -> Result<(u128, u128)> {
    let mut start = 0u128;
    let mut a = *e;
    while a.level > 0 {
        let p = k.parent(&a)?;
        for i in 0..k.local_index(&a)? {
            start += k.num_descendants_at_level(&k.child(&p, i)?, MAX_LEVEL)?;
        }
        a = p;
    }
    Ok((start, start + k.num_descendants_at_level(e, MAX_LEVEL)?))
}

/// Check that `leaves`, given in forest order as `(tree, element)`, tile every tree of
/// `cmesh` exactly once. Returns a description of the first defect.
pub fn check_cover(cmesh: &CoarseMesh, leaves: &[(usize, Element)]) -> std::result::Result<(), String> {
    let mut i = 0;
    for t in 0..cmesh.num_trees() {
        let k = shape_kernel(cmesh.shape(t));
        let total = k.num_descendants_at_level(&k.root(), MAX_LEVEL).map_err(|e| e.to_string())?;
        let mut next = 0u128;
        while i < leaves.len() && leaves[i].0 == t {
            let (a, b) = max_level_interval(k, &leaves[i].1).map_err(|e| format!("tree {t}: {e}"))?;
            if a != next {
                return Err(format!("tree {t}: leaf {:?} starts at {a}, expected {next}", leaves[i].1));
            }
            next = b;
            i += 1;
        }
        if next != total {
            return Err(format!("tree {t}: leaves cover {next} of {total} finest elements"));
        }
    }
    if i != leaves.len() {
        return Err(format!("leaf {i} of tree {} is out of order", leaves[i].0));
    }
    Ok(())
}
