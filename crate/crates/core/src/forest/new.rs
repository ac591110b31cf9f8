use std::sync::Arc;

use super::{CoarseMesh, Forest, LocalTree};
use crate::element::MAX_LEVEL;
use crate::error::{AmrError, Result};
use crate::kernel::shape_kernel;
use crate::procgroup::{Comm, PayloadReader, PayloadWriter};

const TAG_BOUNDS: u64 = 1;

/// Global index of the first element of rank `q` in an equal partition of `n` elements.
#[inline]
pub fn ideal_offset(q: usize, n: u128, p: usize) -> u128 {
    q as u128 * n / p as u128
}

/// The rank that element `e` belongs to under [`ideal_offset`]. Requires `e < n`.
#[inline]
pub fn element_owner(e: u128, n: u128, p: usize) -> usize {
    debug_assert!(e < n);
    p - 1 - (p as u128 * (n - 1 - e) / n) as usize
}

/// One rank's share of a uniformly refined forest. Element ids are tree-local linear ids
/// and inclusive. An empty rank has `last_tree == first_tree - 1` and zero element ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformBounds {
    pub first_tree: usize,
    pub first_element: u128,
    pub last_tree: isize,
    pub last_element: u128,
}

impl UniformBounds {
    pub fn is_empty(&self) -> bool {
        self.last_tree < self.first_tree as isize
    }

    pub(crate) fn empty(first_tree: usize) -> Self {
        UniformBounds { first_tree, first_element: 0, last_tree: first_tree as isize - 1, last_element: 0 }
    }
}

fn tree_counts(cmesh: &CoarseMesh, level: u8) -> Result<Vec<u128>> {
    if level > MAX_LEVEL {
        return Err(AmrError::LevelOutOfRange { level: level as u32, max: MAX_LEVEL as u32 });
    }
    cmesh
        .shapes()
        .iter()
        .map(|&s| {
            let k = shape_kernel(s);
            k.num_descendants_at_level(&k.root(), level)
        })
        .collect()
}

/// Compute this rank's bounds of an equal partition of the uniform level-`level` forest.
///
/// Each rank first counts the elements of an equal share of the trees and learns the global
/// element offset of that share by a prefix scan. It then tells every rank whose first or
/// last element falls inside its share where that element sits. A receiver hears from the
/// holder of its first element and, if different, from the holder of its last one.
pub fn uniform_bounds(cmesh: &CoarseMesh, level: u8, comm: &mut Comm<'_>) -> Result<UniformBounds> {
    let counts = tree_counts(cmesh, level)?;
    let n_global: u128 = counts.iter().sum();
    if n_global > u64::MAX as u128 {
        return Err(AmrError::Domain(format!("{n_global} elements do not fit a 64-bit element count")));
    }
    let k = cmesh.num_trees();
    let (p, size) = (comm.rank(), comm.size());
    let (t0, t1) = (p * k / size, (p + 1) * k / size);
    let n_local: u128 = counts[t0..t1].iter().sum();

    let c_local = comm.exclusive_prefix_scan(n_local as u64)? as u128;
    let mut c: Vec<u128> = comm.allgather_u64(c_local as u64)?.into_iter().map(u128::from).collect();
    c.push(n_global);
    let n = n_global;
    let o = |q: usize| ideal_offset(q, n, size);

    // First global element of each of my trees, with the end appended.
    let mut tree_first = Vec::with_capacity(t1 - t0 + 1);
    let mut acc = c_local;
    for &cnt in &counts[t0..t1] {
        tree_first.push(acc);
        acc += cnt;
    }
    tree_first.push(acc);
    let locate = |e: u128| -> (usize, u128) {
        let i = tree_first.partition_point(|&f| f <= e) - 1;
        (t0 + i, e - tree_first[i])
    };

    if n_local > 0 {
        let (begin, end) = (c_local, c_local + n_local);
        let first_at_or_after = (0..size).find(|&q| o(q) >= begin).unwrap_or(size);
        let q_lo = element_owner(begin, n, size).min(first_at_or_after);
        let q_hi = element_owner(end - 1, n, size);
        for q in q_lo..=q_hi {
            let (oq, oq1) = (o(q), o(q + 1));
            let has_first = (begin..end).contains(&oq);
            let has_last = oq1 > oq && (begin..end).contains(&(oq1 - 1));
            if !has_first && !has_last {
                continue;
            }
            let mut w = PayloadWriter::new();
            w.u8(has_first as u8 | (has_last as u8) << 1);
            if has_first {
                let (t, id) = locate(oq);
                w.u64(t as u64).u128(id);
            }
            if has_last {
                let (t, id) = locate(oq1 - 1);
                w.u64(t as u64).u128(id);
            }
            comm.send(q, TAG_BOUNDS, w.finish())?;
        }
    }

    let (oq, oq1) = (o(p), o(p + 1));
    if oq == n {
        return Ok(UniformBounds::empty(k));
    }
    let holder = |e: u128| c[..size].partition_point(|&ci| ci <= e) - 1;
    let s_first = holder(oq);
    let mut senders = vec![s_first];
    if oq1 > oq && holder(oq1 - 1) != s_first {
        senders.push(holder(oq1 - 1));
    }
    let mut first = None;
    let mut last = None;
    for s in senders {
        let msg = comm.recv(s, TAG_BOUNDS)?;
        let mut r = PayloadReader::new(&msg);
        let flags = r.u8()?;
        if flags & 1 != 0 {
            first = Some((r.u64()? as usize, r.u128()?));
        }
        if flags & 2 != 0 {
            last = Some((r.u64()? as usize, r.u128()?));
        }
    }
    let (ft, fe) = first.ok_or_else(|| AmrError::Payload("no sender reported the first element".into()))?;
    if oq1 == oq {
        return Ok(UniformBounds::empty(ft));
    }
    let (lt, le) = last.ok_or_else(|| AmrError::Payload("no sender reported the last element".into()))?;
    Ok(UniformBounds { first_tree: ft, first_element: fe, last_tree: lt as isize, last_element: le })
}

/// Create the uniformly refined forest of depth `level`, equally partitioned.
pub fn forest_new(cmesh: Arc<CoarseMesh>, level: u8, comm: &mut Comm<'_>) -> Result<Forest> {
    let b = uniform_bounds(&cmesh, level, comm)?;
    let mut trees = Vec::new();
    if !b.is_empty() {
        for t in b.first_tree..=b.last_tree as usize {
            let shape = cmesh.shape(t);
            let k = shape_kernel(shape);
            let total = k.num_descendants_at_level(&k.root(), level)?;
            let start = if t == b.first_tree { b.first_element } else { 0 };
            let stop = if t as isize == b.last_tree { b.last_element } else { total - 1 };
            let count = (stop - start + 1) as usize;
            let mut leaves = Vec::with_capacity(count);
            let mut e = k.element_from_linear_id(level, start)?;
            leaves.push(e);
            for _ in 1..count {
                e = k.successor(&e)?;
                leaves.push(e);
            }
            trees.push(LocalTree { id: t, shape, leaves });
        }
    }
    Forest::assemble(cmesh, trees, b.first_tree, comm)
}
