//! Per-operation microbenchmarks of the element kernels.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use crate::element::{Element, TreeShape};
use crate::error::Result;
use crate::kernel::shape_kernel;

pub const OPERATIONS: [&str; 4] = ["child", "parent", "face_neighbor", "sfc_index"];

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub shape: TreeShape,
    pub operation: &'static str,
    pub iterations: u64,
    pub ns_per_op: f64,
}

/// Time every operation on every tree shape, `iterations` calls each, cycling through the
/// elements of a uniform level-`level` refinement.
pub fn run_bench(iterations: u64, level: u8) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for shape in TreeShape::ALL {
        let k = shape_kernel(shape);
        let mut sample: Vec<Element> = vec![k.first_descendant(&k.root(), level)?];
        let total = k.num_descendants_at_level(&k.root(), level)?;
        for _ in 1..total.min(4096) {
            let next = k.successor(sample.last().expect("non-empty"))?;
            sample.push(next);
        }
        for op in OPERATIONS {
            let start = Instant::now();
            let mut acc = 0u64;
            for i in 0..iterations {
                let e = &sample[i as usize % sample.len()];
                acc = acc.wrapping_add(match op {
                    "child" => k.child(black_box(e), i as usize % k.num_children(e))?.x as u64,
                    "parent" if e.level > 0 => k.parent(black_box(e))?.x as u64,
                    "parent" => 0,
                    "face_neighbor" => k.face_neighbor(black_box(e), i as usize % k.num_faces(e))?.map_or(0, |n| n.dual_face as u64),
                    _ => k.sfc_index(black_box(e)) as u64,
                });
            }
            black_box(acc);
            let ns = start.elapsed().as_nanos() as f64 / iterations.max(1) as f64;
            rows.push(BenchRow { shape, operation: op, iterations, ns_per_op: ns });
        }
    }
    Ok(rows)
}

/// Tab-separated table with a header line.
pub fn to_tsv(rows: &[BenchRow]) -> String {
    let mut s = String::from("shape\toperation\titerations\tns_per_op\n");
    for r in rows {
        let _ = writeln!(s, "{}\t{}\t{}\t{:.2}", r.shape, r.operation, r.iterations, r.ns_per_op);
    }
    s
}
