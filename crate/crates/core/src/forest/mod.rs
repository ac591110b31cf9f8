//! Distributed forests of refinement trees over a [`procgroup`](crate::procgroup) run.
//!
//! Every rank holds the leaves of a consecutive range of trees, sorted along the
//! space-filling curve, plus replicated offset arrays describing all other ranks.

mod adapt;
pub mod cmesh;
mod ghost;
mod new;
mod partition;
mod stats;

use std::sync::Arc;

pub use adapt::{forest_adapt, AdaptAction, AdaptContext};
pub use cmesh::CoarseMesh;
pub use ghost::{forest_ghost, Ghost, GhostLayer};
pub use new::{element_owner, forest_new, ideal_offset, uniform_bounds, UniformBounds};
pub use partition::forest_partition;
pub use stats::{check_cover, forest_checksum, forest_stats, ForestStats};

use crate::element::{Element, Position, TreeShape, MAX_LEVEL};
use crate::error::{AmrError, Result};
use crate::kernel::shape_kernel;
use crate::procgroup::{Comm, PayloadReader, PayloadWriter};

/// Leaves of one tree held by this rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalTree {
    pub id: usize,
    pub shape: TreeShape,
    pub leaves: Vec<Element>,
}

/// Replicated per-rank summary used to locate elements on other ranks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Descriptor {
    count: u64,
    first_tree: usize,
    last_tree: usize,
    first: Option<Position>,
}

/// The part of a distributed forest held by one rank.
#[derive(Debug, Clone)]
pub struct Forest {
    cmesh: Arc<CoarseMesh>,
    rank: usize,
    size: usize,
    trees: Vec<LocalTree>,
    first_tree: usize,
    element_offsets: Vec<u64>,
    tree_offsets: Vec<u64>,
    first_positions: Vec<Option<Position>>,
}

impl Forest {
    /// Assemble a rank-local forest and exchange the replicated offsets. Every rank of the
    /// group must call this. `first_tree` is only used when `trees` is empty.
    pub(crate) fn assemble(cmesh: Arc<CoarseMesh>, trees: Vec<LocalTree>, first_tree: usize, comm: &mut Comm<'_>) -> Result<Self> {
        let trees: Vec<LocalTree> = trees.into_iter().filter(|t| !t.leaves.is_empty()).collect();
        let mut f = Forest {
            cmesh,
            rank: comm.rank(),
            size: comm.size(),
            first_tree,
            trees,
            element_offsets: Vec::new(),
            tree_offsets: Vec::new(),
            first_positions: Vec::new(),
        };
        f.exchange_offsets(comm)?;
        Ok(f)
    }

    /// Build a forest from explicit local leaves given as `(tree, element)` in forest order.
    /// Every rank of the group must call this; a rank may pass no leaves.
    pub fn from_leaves(cmesh: Arc<CoarseMesh>, leaves: Vec<(usize, Element)>, comm: &mut Comm<'_>) -> Result<Self> {
        for w in leaves.windows(2) {
            let ((ta, a), (tb, b)) = (&w[0], &w[1]);
            let ordered = ta < tb || (ta == tb && shape_kernel(cmesh.shape(*ta)).last_key(a) < shape_kernel(cmesh.shape(*tb)).first_key(b));
            if !ordered {
                return Err(AmrError::Domain(format!("leaves {a:?} and {b:?} are not in forest order")));
            }
        }
        if let Some(&(t, _)) = leaves.iter().find(|(t, _)| *t >= cmesh.num_trees()) {
            return Err(AmrError::Domain(format!("tree {t} does not exist")));
        }
        let first = leaves.first().map_or(cmesh.num_trees(), |l| l.0);
        let trees = group_into_trees(&cmesh, leaves);
        Self::assemble(cmesh, trees, first, comm)
    }

    fn local_descriptor(&self) -> Descriptor {
        let count = self.num_local_leaves() as u64;
        match (self.trees.first(), self.trees.last()) {
            (Some(a), Some(b)) => Descriptor {
                count,
                first_tree: a.id,
                last_tree: b.id,
                first: Some(Position { tree: a.id as u64, key: shape_kernel(a.shape).first_key(&a.leaves[0]) }),
            },
            _ => Descriptor { count: 0, first_tree: self.first_tree, last_tree: self.first_tree.wrapping_sub(1), first: None },
        }
    }

    fn exchange_offsets(&mut self, comm: &mut Comm<'_>) -> Result<()> {
        let d = self.local_descriptor();
        let mut w = PayloadWriter::new();
        w.u64(d.count).u64(d.first_tree as u64).u64(d.last_tree as u64);
        match d.first {
            Some(p) => w.u8(1).u64(p.tree).u128(p.key),
            None => w.u8(0),
        };
        let all = comm.allgather(w.finish())?;
        let mut desc = Vec::with_capacity(all.len());
        for b in &all {
            let mut r = PayloadReader::new(b);
            let count = r.u64()?;
            let first_tree = r.u64()? as usize;
            let last_tree = r.u64()? as usize;
            let first = if r.u8()? == 1 { Some(Position { tree: r.u64()?, key: r.u128()? }) } else { None };
            desc.push(Descriptor { count, first_tree, last_tree, first });
        }
        let k = self.cmesh.num_trees();
        let p = desc.len();

        let mut offsets = vec![0u64; p + 1];
        for q in 0..p {
            offsets[q + 1] = offsets[q] + desc[q].count;
        }

        // An empty rank points at the first tree of the next non-empty rank, or past the end.
        let mut next_first = k;
        let mut firsts = vec![k; p];
        for q in (0..p).rev() {
            if desc[q].count > 0 {
                next_first = desc[q].first_tree;
            }
            firsts[q] = if desc[q].count > 0 { desc[q].first_tree } else { next_first };
        }
        self.first_tree = firsts[self.rank];

        // Each tree is counted by the lowest rank that holds part of it.
        let mut tree_offsets = vec![k as u64; p + 1];
        let mut prev_last: Option<usize> = None;
        let mut owned_first = vec![None; p];
        for q in 0..p {
            if desc[q].count == 0 {
                continue;
            }
            let shared = prev_last == Some(desc[q].first_tree);
            owned_first[q] = Some(desc[q].first_tree + shared as usize);
            prev_last = Some(desc[q].last_tree);
        }
        for q in (0..p).rev() {
            tree_offsets[q] = owned_first[q].map(|t| t as u64).unwrap_or(tree_offsets[q + 1]).min(tree_offsets[q + 1]);
        }

        self.element_offsets = offsets;
        self.tree_offsets = tree_offsets;
        self.first_positions = desc.iter().map(|d| d.first).collect();
        Ok(())
    }

    pub fn cmesh(&self) -> &Arc<CoarseMesh> {
        &self.cmesh
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn trees(&self) -> &[LocalTree] {
        &self.trees
    }

    /// First local tree; for an empty rank, the first tree of the next non-empty rank (or the
    /// number of trees if there is none).
    pub fn first_local_tree(&self) -> usize {
        self.first_tree
    }

    /// Last local tree, `first_local_tree() - 1` on an empty rank.
    pub fn last_local_tree(&self) -> isize {
        match self.trees.last() {
            Some(t) => t.id as isize,
            None => self.first_tree as isize - 1,
        }
    }

    pub fn num_local_leaves(&self) -> usize {
        self.trees.iter().map(|t| t.leaves.len()).sum()
    }

    pub fn num_global_leaves(&self) -> u64 {
        *self.element_offsets.last().expect("offsets exchanged")
    }

    /// Global index of the first leaf of every rank, with the total count appended.
    pub fn element_offsets(&self) -> &[u64] {
        &self.element_offsets
    }

    /// Number of trees owned by lower ranks, with the number of trees appended.
    pub fn tree_offsets(&self) -> &[u64] {
        &self.tree_offsets
    }

    pub fn leaves(&self) -> impl Iterator<Item = (usize, &Element)> + '_ {
        self.trees.iter().flat_map(|t| t.leaves.iter().map(move |e| (t.id, e)))
    }

    /// The rank holding curve position `pos`, i.e. the last non-empty rank starting at or
    /// before it.
    pub fn owner_of(&self, pos: Position) -> Option<usize> {
        let mut owner = None;
        for (q, first) in self.first_positions.iter().enumerate() {
            match first {
                Some(f) if *f <= pos => owner = Some(q),
                Some(_) => break,
                None => {}
            }
        }
        owner
    }

    /// Ranks holding leaves that overlap `e` in tree `tree`, in ascending order.
    pub fn owners_of_element(&self, tree: usize, e: &Element) -> Vec<usize> {
        let k = shape_kernel(self.cmesh.shape(tree));
        let lo = Position { tree: tree as u64, key: k.first_key(e) };
        let hi = Position { tree: tree as u64, key: k.last_key(e) };
        let (Some(a), Some(b)) = (self.owner_of(lo), self.owner_of(hi)) else { return Vec::new() };
        (a..=b).filter(|&q| self.first_positions[q].is_some()).collect()
    }

    /// Local leaves of `tree` whose curve range intersects that of `e`: either one leaf
    /// containing `e` or the leaves inside `e`.
    pub fn local_overlap(&self, tree: usize, e: &Element) -> &[Element] {
        let Some(t) = self.trees.iter().find(|t| t.id == tree) else { return &[] };
        let k = shape_kernel(t.shape);
        let (lo, hi) = (k.first_key(e), k.last_key(e));
        let start = t.leaves.partition_point(|l| k.last_key(l) < lo);
        let end = t.leaves.partition_point(|l| k.first_key(l) <= hi);
        &t.leaves[start..end.max(start)]
    }
}

/// Same-level face neighbor of `e` in tree `tree`, following coarse-mesh links across
/// tree boundaries. Returns `(tree, neighbor, dual face)` or `None` on the domain boundary.
pub fn forest_face_neighbor(cmesh: &CoarseMesh, tree: usize, e: &Element, f: usize) -> Result<Option<(usize, Element, usize)>> {
    let k = shape_kernel(cmesh.shape(tree));
    if let Some(n) = k.face_neighbor(e, f)? {
        return Ok(Some((tree, n.neighbor, n.dual_face)));
    }
    let Some(rf) = k.root_face(e, f)? else {
        return Err(AmrError::Domain(format!("face {f} of {e:?} has no neighbor but is not on the tree boundary")));
    };
    let Some((t2, rf2)) = cmesh.link(tree, rf) else { return Ok(None) };
    let face = k.collapse_to_face(e, f)?;
    let (n, nf) = shape_kernel(cmesh.shape(t2)).extrude_from_face(&face, rf2)?;
    Ok(Some((t2, n, nf)))
}

pub(crate) fn write_element(w: &mut PayloadWriter, tree: usize, e: &Element) {
    w.u64(tree as u64).i32(e.x).i32(e.y).i32(e.z).u8(e.level).u8(e.etype).i8(e.min_tet_level);
}

pub(crate) fn read_element(r: &mut PayloadReader<'_>) -> Result<(usize, Element)> {
    let tree = r.u64()? as usize;
    let (x, y, z) = (r.i32()?, r.i32()?, r.i32()?);
    let (level, etype, mtl) = (r.u8()?, r.u8()?, r.i8()?);
    if level > MAX_LEVEL {
        return Err(AmrError::Payload(format!("element level {level} out of range")));
    }
    Ok((tree, Element::new(x, y, z, level, etype, mtl)))
}

/// Group a sequence of `(tree, element)` pairs in forest order into local trees.
pub(crate) fn group_into_trees(cmesh: &CoarseMesh, leaves: impl IntoIterator<Item = (usize, Element)>) -> Vec<LocalTree> {
    let mut trees: Vec<LocalTree> = Vec::new();
    for (t, e) in leaves {
        match trees.last_mut() {
            Some(lt) if lt.id == t => lt.leaves.push(e),
            _ => trees.push(LocalTree { id: t, shape: cmesh.shape(t), leaves: vec![e] }),
        }
    }
    trees
}

/// Every leaf of the forest on every rank, in global order, with its owner rank.
pub fn gather_leaves(forest: &Forest, comm: &mut Comm<'_>) -> Result<Vec<(usize, usize, Element)>> {
    let mut w = PayloadWriter::new();
    for (t, e) in forest.leaves() {
        write_element(&mut w, t, e);
    }
    let all = comm.allgather(w.finish())?;
    let mut out = Vec::new();
    for (q, b) in all.iter().enumerate() {
        let mut r = PayloadReader::new(b);
        while !r.is_empty() {
            let (t, e) = read_element(&mut r)?;
            out.push((q, t, e));
        }
    }
    Ok(out)
}
