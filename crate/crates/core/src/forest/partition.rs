use super::{group_into_trees, read_element, write_element, Forest};
use crate::error::Result;
use crate::forest::new::ideal_offset;
use crate::procgroup::{Comm, PayloadReader, PayloadWriter};

const TAG_LEAVES: u64 = 2;

/// Redistribute the leaves so that rank `q` holds global leaves `[O_q, O_{q+1})`.
/// Ranks only exchange leaves whose owner changes; everything else stays in place.
pub fn forest_partition(forest: &Forest, comm: &mut Comm<'_>) -> Result<Forest> {
    let (me, size) = (forest.rank, forest.size);
    let off = &forest.element_offsets;
    let n = forest.num_global_leaves() as u128;
    let target = |q: usize| ideal_offset(q, n, size) as u64;
    let overlap = |src: usize, dst: usize| -> (u64, u64) {
        let lo = off[src].max(target(dst));
        let hi = off[src + 1].min(target(dst + 1));
        (lo, hi.max(lo))
    };

    let local: Vec<(usize, &crate::element::Element)> = forest.leaves().collect();
    let mut kept = Vec::new();
    for q in 0..size {
        let (lo, hi) = overlap(me, q);
        if lo == hi {
            continue;
        }
        let range = (lo - off[me]) as usize..(hi - off[me]) as usize;
        if q == me {
            kept = local[range].iter().map(|&(t, e)| (t, *e)).collect();
            continue;
        }
        let mut w = PayloadWriter::new();
        for &(t, e) in &local[range] {
            write_element(&mut w, t, e);
        }
        comm.send(q, TAG_LEAVES, w.finish())?;
    }

    let mut received = Vec::new();
    for p in 0..size {
        let (lo, hi) = overlap(p, me);
        if lo == hi {
            continue;
        }
        if p == me {
            received.append(&mut kept);
            continue;
        }
        let msg = comm.recv(p, TAG_LEAVES)?;
        let mut r = PayloadReader::new(&msg);
        while !r.is_empty() {
            received.push(read_element(&mut r)?);
        }
    }
    let trees = group_into_trees(&forest.cmesh, received);
    Forest::assemble(forest.cmesh.clone(), trees, forest.first_tree, comm)
}
