use std::collections::BTreeSet;

use super::{forest_face_neighbor, read_element, write_element, Forest};
use crate::element::Element;
use crate::error::Result;
use crate::kernel::shape_kernel;
use crate::procgroup::{Comm, PayloadReader, PayloadWriter};

const TAG_GHOSTS: u64 = 3;

/// A remote leaf adjacent across a face to a local leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ghost {
    pub owner: usize,
    pub tree: usize,
    pub element: Element,
}

/// Remote face neighbors of this rank, sorted by owner and then by forest order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GhostLayer {
    pub ghosts: Vec<Ghost>,
}

impl GhostLayer {
    pub fn len(&self) -> usize {
        self.ghosts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ghosts.is_empty()
    }
}

/// Whether the local leaf `l` of tree `lt` has a face on which `e` (tree `te`) lies across.
/// `l` must be no larger than `e` and lie inside one of `e`'s same-level face neighbors.
fn small_leaf_touches(forest: &Forest, lt: usize, l: &Element, te: usize, e: &Element) -> Result<bool> {
    let k = shape_kernel(forest.cmesh.shape(lt));
    let ke = shape_kernel(forest.cmesh.shape(te));
    for g in 0..k.num_faces(l) {
        if let Some((t, n, _)) = forest_face_neighbor(&forest.cmesh, lt, l, g)? {
            if t == te && ke.is_ancestor(e, &n) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Whether the remote leaf `e` of tree `te` shares a face with some local leaf.
fn touches_local(forest: &Forest, te: usize, e: &Element) -> Result<bool> {
    let k = shape_kernel(forest.cmesh.shape(te));
    for f in 0..k.num_faces(e) {
        let Some((tn, n, _)) = forest_face_neighbor(&forest.cmesh, te, e, f)? else { continue };
        let kn = shape_kernel(forest.cmesh.shape(tn));
        for l in forest.local_overlap(tn, &n) {
            if kn.is_ancestor(l, &n) || small_leaf_touches(forest, tn, l, te, e)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Collect the remote leaves that share a face with a local leaf.
///
/// Every rank sends each of its leaves to the owners of the leaves overlapping that leaf's
/// same-level face neighbors. Send counts are exchanged first so that every rank knows
/// whom to expect, and receivers keep only the candidates that actually touch them.
pub fn forest_ghost(forest: &Forest, comm: &mut Comm<'_>) -> Result<GhostLayer> {
    let (me, size) = (forest.rank, forest.size);
    let mut outgoing: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); size];
    for (ti, tree) in forest.trees.iter().enumerate() {
        let k = shape_kernel(tree.shape);
        for (li, e) in tree.leaves.iter().enumerate() {
            for f in 0..k.num_faces(e) {
                let Some((tn, n, _)) = forest_face_neighbor(&forest.cmesh, tree.id, e, f)? else { continue };
                for q in forest.owners_of_element(tn, &n) {
                    if q != me {
                        outgoing[q].insert((ti, li));
                    }
                }
            }
        }
    }

    let mut w = PayloadWriter::new();
    for set in &outgoing {
        w.u64(set.len() as u64);
    }
    let counts = comm.allgather(w.finish())?;
    for (q, set) in outgoing.iter().enumerate() {
        if set.is_empty() {
            continue;
        }
        let mut w = PayloadWriter::new();
        for &(ti, li) in set {
            let t = &forest.trees[ti];
            write_element(&mut w, t.id, &t.leaves[li]);
        }
        comm.send(q, TAG_GHOSTS, w.finish())?;
    }

    let mut ghosts = Vec::new();
    for (p, row) in counts.iter().enumerate() {
        let mut r = PayloadReader::new(row);
        let mut n = 0;
        for _ in 0..=me {
            n = r.u64()?;
        }
        if p == me || n == 0 {
            continue;
        }
        let msg = comm.recv(p, TAG_GHOSTS)?;
        let mut r = PayloadReader::new(&msg);
        while !r.is_empty() {
            let (t, e) = read_element(&mut r)?;
            if touches_local(forest, t, &e)? {
                ghosts.push(Ghost { owner: p, tree: t, element: e });
            }
        }
    }
    ghosts.sort_by(|a, b| {
        let k = shape_kernel(forest.cmesh.shape(a.tree));
        (a.owner, a.tree).cmp(&(b.owner, b.tree)).then_with(|| k.compare(&a.element, &b.element))
    });
    Ok(GhostLayer { ghosts })
}
