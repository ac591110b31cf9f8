//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any criterion fails.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use hybrid_amr::bench::{run_bench, to_tsv, OPERATIONS};
use hybrid_amr::forest::{
    check_cover, element_owner, forest_adapt, forest_checksum, forest_ghost, forest_new, forest_partition, gather_leaves, ideal_offset,
    uniform_bounds, AdaptAction, CoarseMesh, Forest,
};
use hybrid_amr::neighbor::{extrudes_to_pyramid, tet_touches_pyramid};
use hybrid_amr::procgroup::run;
use hybrid_amr::reference::{
    corner_walk_is_pyramid, enumerate, face_element_from_polygon, face_polygon, ghost_oracle, interleave6, polygon_on_root_face,
    pyramid_leaf_count_recursive, serial_uniform_bounds, NeighborOracle,
};
use hybrid_amr::sfc::{morton6, theta};
use hybrid_amr::{cube_len, shape_kernel, Element, TreeShape, ROOT_LEN};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LEAF_COUNT_BUDGET: Duration = Duration::from_secs(10);
const BOUNDS_BUDGET: Duration = Duration::from_secs(60);
const SCALE_BUDGET: Duration = Duration::from_secs(60);
const SCALE_MIN_LEAVES: u64 = 1_000_000;
const PARTITION_PROBES: usize = 10_000;
const MAX_BALANCE_GAP: u64 = 1;
const SEED: u64 = 0x5eed;

/// Collects violations; only the first few are kept for the report.
#[derive(Default)]
struct Audit {
    checks: u64,
    violations: u64,
    first: Vec<String>,
}

impl Audit {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations += 1;
            if self.first.len() < 3 {
                self.first.push(what());
            }
        }
    }

    fn finish(self, summary: String) -> Result<String, String> {
        if self.violations == 0 {
            Ok(format!("{summary}, {} checks", self.checks))
        } else {
            Err(format!("{} of {} checks violated; {}", self.violations, self.checks, self.first.join("; ")))
        }
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn leaf_count_law() -> Result<String, String> {
    let start = Instant::now();
    let tree = enumerate(TreeShape::Pyramid, 5).map_err(err)?;
    let k = shape_kernel(TreeShape::Pyramid);
    let mut a = Audit::default();
    for (l, level) in tree.levels.iter().enumerate() {
        let n = level.len() as u128;
        let closed = 2 * 8u128.pow(l as u32) - 6u128.pow(l as u32);
        a.check(n == closed, || format!("level {l}: {n} leaves, closed form {closed}"));
        a.check(n == pyramid_leaf_count_recursive(l as u32), || format!("level {l}: recursion disagrees"));
        let counted = k.num_descendants_at_level(&k.root(), l as u8).unwrap_or(0);
        a.check(n == counted, || format!("level {l}: kernel count {counted}"));
    }
    let t = start.elapsed();
    a.check(t < LEAF_COUNT_BUDGET, || format!("took {t:?}"));
    a.finish(format!("counts {:?} in {:.2?}", tree.leaf_counts(), t))
}

fn sfc_axioms() -> Result<String, String> {
    let tree = enumerate(TreeShape::Pyramid, 4).map_err(err)?;
    let k = shape_kernel(TreeShape::Pyramid);
    let idx: Vec<Vec<u128>> = tree.levels.iter().map(|l| l.iter().map(|e| k.sfc_index(e)).collect()).collect();
    let mut a = Audit::default();

    for (l, ids) in idx.iter().enumerate() {
        let distinct: HashSet<_> = ids.iter().collect();
        a.check(distinct.len() == ids.len(), || format!("level {l}: {} distinct of {}", distinct.len(), ids.len()));
    }

    // Ancestor index of every element at every coarser level, following the parent links.
    let ancestor_at = |mut l: usize, mut i: usize, target: usize| {
        while l > target {
            i = tree.parents[l][i];
            l -= 1;
        }
        i
    };
    for l in 1..idx.len() {
        for i in 0..idx[l].len() {
            for m in 0..l {
                let p = ancestor_at(l, i, m);
                a.check(idx[m][p] <= idx[l][i], || format!("level {l} element {i} precedes its level-{m} ancestor"));
            }
        }
    }

    for m in 0..idx.len() {
        let mut order: Vec<usize> = (0..idx[m].len()).collect();
        order.sort_by_key(|&i| idx[m][i]);
        let mut next = vec![u128::MAX; idx[m].len()];
        for w in order.windows(2) {
            next[w[0]] = idx[m][w[1]];
        }
        for l in m + 1..idx.len() {
            for i in 0..idx[l].len() {
                let p = ancestor_at(l, i, m);
                let d = idx[l][i];
                a.check(idx[m][p] <= d && d < next[p], || format!("level {l} element {i} escapes the range of its level-{m} ancestor"));
            }
        }
    }
    a.finish(format!("{} elements through level 4", idx.iter().map(Vec::len).sum::<usize>()))
}

fn theta_embedding() -> Result<String, String> {
    let tree = enumerate(TreeShape::Pyramid, 4).map_err(err)?;
    let k = shape_kernel(TreeShape::Pyramid);
    let mut a = Audit::default();
    for (l, level) in tree.levels.iter().enumerate() {
        for (i, e) in level.iter().enumerate() {
            let oracle = tree.theta(l, i);
            let th = theta(e);
            a.check(th.coords == oracle, || format!("{e:?}: theta {:?}, oracle {oracle:?}", th.coords));
            a.check(k.sfc_index(e) == interleave6(&oracle), || format!("{e:?}: index differs from the 6D interleave"));
            a.check(morton6(&th) == k.sfc_index(e), || format!("{e:?}: morton6 differs from the index"));
            if l > 0 {
                let p = &tree.levels[l - 1][tree.parents[l][i]];
                a.check(th.is_child_of(&theta(p)), || format!("{e:?}: theta is not a 6D child of its parent's theta"));
                a.check(k.parent(e).ok() == Some(*p) && theta(&k.parent(e).unwrap_or(*p)) == theta(p), || format!("{e:?}: parent does not commute"));
            }
        }
    }
    a.finish("levels 0..=4".into())
}

fn round_trips() -> Result<String, String> {
    let mut a = Audit::default();
    for shape in TreeShape::ALL {
        let tree = enumerate(shape, 4).map_err(err)?;
        let k = shape_kernel(shape);
        for level in &tree.levels[..4] {
            for e in level {
                for c in 0..k.num_children(e) {
                    let ch = k.child(e, c).map_err(err)?;
                    a.check(k.parent(&ch).ok() == Some(*e), || format!("{shape}: parent(child({e:?}, {c})) differs"));
                    a.check(k.local_index(&ch).ok() == Some(c), || format!("{shape}: local index of child {c} of {e:?}"));
                }
            }
        }
        for (l, level) in tree.levels[..=3].iter().enumerate() {
            let mut sorted = level.clone();
            sorted.sort_by(|x, y| k.compare(x, y));
            for (id, e) in sorted.iter().enumerate() {
                a.check(k.linear_id(e) == id as u128, || format!("{shape}: linear id of {e:?}"));
                a.check(k.element_from_linear_id(l as u8, id as u128).ok() == Some(*e), || format!("{shape}: element {id} at level {l}"));
                if id + 1 < sorted.len() {
                    a.check(k.successor(e).ok() == Some(sorted[id + 1]), || format!("{shape}: successor of {e:?}"));
                }
            }
        }
    }
    a.finish("three shapes".into())
}

fn neighbor_equivalence() -> Result<String, String> {
    let mut a = Audit::default();
    let (mut pairs, mut touch_pairs) = (0u64, 0u64);
    for shape in TreeShape::ALL {
        let tree = enumerate(shape, 3).map_err(err)?;
        let k = shape_kernel(shape);
        for l in 0..=3 {
            let oracle = NeighborOracle::new(&tree, l);
            for e in oracle.elements() {
                for f in 0..k.num_faces(e) {
                    pairs += 1;
                    let want = oracle.neighbor(e, f);
                    let got = k.face_neighbor(e, f).map_err(err)?.map(|n| (n.neighbor, n.dual_face));
                    a.check(got == want, || format!("{shape} {e:?} face {f}: kernel {got:?}, oracle {want:?}"));
                    let tet_in_pyramid_tree = shape == TreeShape::Pyramid && (e.etype == 0 || e.etype == 3);
                    if let (true, Some((n, _))) = (tet_in_pyramid_tree, want) {
                        touch_pairs += 1;
                        let touches = tet_touches_pyramid(e, f).map_err(err)?;
                        a.check(touches == n.is_pyramid(), || format!("{e:?} face {f}: touch test {touches}, oracle neighbor {n:?}"));
                    }
                }
            }
        }
    }
    a.finish(format!("{pairs} element-face pairs, {touch_pairs} interior pyramid-touch pairs"))
}

fn boundary_theorems() -> Result<String, String> {
    let mut a = Audit::default();
    let mut triangles = 0u64;
    for l in 0..=5u8 {
        let h = cube_len(l);
        for u in (0..ROOT_LEN).step_by(h as usize) {
            for v in (0..=u).step_by(h as usize) {
                triangles += 1;
                a.check(extrudes_to_pyramid(u, v) == corner_walk_is_pyramid(u, v, l), || format!("triangle ({u}, {v}) at level {l}"));
            }
        }
    }

    // Every type-0 boundary triangle of the enumerated tree is a pyramid face exactly when
    // the corner walk says so.
    let tree = enumerate(TreeShape::Pyramid, 4).map_err(err)?;
    for (l, level) in tree.levels.iter().enumerate() {
        for e in level {
            for f in 0..shape_kernel(TreeShape::Pyramid).num_faces(e) {
                let Some((rf, uv)) = polygon_on_root_face(TreeShape::Pyramid, &face_polygon(TreeShape::Pyramid, e, f)) else { continue };
                if rf == 4 {
                    continue;
                }
                let Some(fe) = face_element_from_polygon(&uv, l as u8) else { continue };
                if fe.ftype == 0 {
                    a.check(e.is_pyramid() == corner_walk_is_pyramid(fe.x, fe.y, l as u8), || format!("{e:?} face {f}"));
                }
            }
        }
    }

    let mut boundary = 0u64;
    for shape in TreeShape::ALL {
        let tree = enumerate(shape, 3).map_err(err)?;
        let k = shape_kernel(shape);
        for (l, level) in tree.levels.iter().enumerate() {
            for e in level {
                for f in 0..k.num_faces(e) {
                    let oracle = polygon_on_root_face(shape, &face_polygon(shape, e, f));
                    let rf = k.root_face(e, f).map_err(err)?;
                    a.check(rf == oracle.as_ref().map(|o| o.0), || format!("{shape} {e:?} face {f}: root face {rf:?}"));
                    let (Some(rf), Some((_, uv))) = (rf, oracle) else { continue };
                    boundary += 1;
                    let face = k.collapse_to_face(e, f).map_err(err)?;
                    let want = face_element_from_polygon(&uv, l as u8);
                    a.check(Some(face) == want, || format!("{shape} {e:?} face {f}: collapsed to {face:?}, oracle {want:?}"));
                    let back = k.extrude_from_face(&face, rf).map_err(err)?;
                    a.check(back == (*e, f), || format!("{shape} {e:?} face {f}: extruded to {back:?}"));
                }
            }
        }
    }
    a.finish(format!("{triangles} type-0 triangles to level 5, {boundary} boundary faces to level 3"))
}

fn partition_math() -> Result<String, String> {
    let mut a = Audit::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..PARTITION_PROBES {
        let n: u128 = rng.gen_range(1..=1_000_000);
        let p: usize = rng.gen_range(1..=512);
        let e: u128 = rng.gen_range(0..n);
        let q = element_owner(e, n, p);
        a.check(q < p && ideal_offset(q, n, p) <= e && e < ideal_offset(q + 1, n, p), || format!("N={n} P={p} E={e}: owner {q}"));
        let r = rng.gen_range(0..=p);
        a.check(ideal_offset(r, n, p) == r as u128 * n / p as u128, || format!("N={n} P={p}: offset {r}"));
    }

    // Everything on rank 0, then partition.
    let cmesh = Arc::new(CoarseMesh::builtin("pyramid").map_err(err)?);
    let tree = enumerate(TreeShape::Pyramid, 2).map_err(err)?;
    let k = shape_kernel(TreeShape::Pyramid);
    let mut all: Vec<Element> = tree.levels[2].clone();
    all.sort_by(|x, y| k.compare(x, y));
    let (counts, _) = run(4, |comm| {
        let mine = if comm.rank() == 0 { all.iter().map(|e| (0, *e)).collect() } else { Vec::new() };
        let f = Forest::from_leaves(cmesh.clone(), mine, comm)?;
        Ok(forest_partition(&f, comm)?.num_local_leaves())
    })
    .map_err(err)?;
    a.check(counts == vec![23; 4], || format!("92 leaves from rank 0 went to {counts:?}"));

    // Randomly refined hybrid forests.
    for (mesh, p) in [("hybrid", 3), ("hybrid40", 8), ("pyramids8", 5), ("tet2", 2)] {
        let cmesh = Arc::new(CoarseMesh::builtin(mesh).map_err(err)?);
        let (res, _) = run(p, |comm| {
            let f = forest_new(cmesh.clone(), 1, comm)?;
            let mut rng = ChaCha8Rng::seed_from_u64(SEED + comm.rank() as u64);
            let f = forest_adapt(&f, 2, comm, |_| if rng.gen_bool(0.3) { AdaptAction::Refine } else { AdaptAction::Keep })?;
            let f = forest_partition(&f, comm)?;
            Ok((f.num_local_leaves() as u64, gather_leaves(&f, comm)?))
        })
        .map_err(err)?;
        let counts: Vec<u64> = res.iter().map(|r| r.0).collect();
        let gap = counts.iter().max().unwrap_or(&0) - counts.iter().min().unwrap_or(&0);
        a.check(gap <= MAX_BALANCE_GAP, || format!("{mesh} P={p}: counts {counts:?}"));
        let leaves: Vec<_> = res[0].1.iter().map(|(_, t, e)| (*t, *e)).collect();
        a.check(check_cover(&cmesh, &leaves).is_ok(), || format!("{mesh} P={p}: partitioned leaves do not tile the mesh"));
    }
    a.finish(format!("{PARTITION_PROBES} probes, balance gap at most {MAX_BALANCE_GAP}"))
}

fn uniform_bounds_equivalence() -> Result<String, String> {
    let start = Instant::now();
    let mut a = Audit::default();
    let (mut runs, mut with_empty, mut with_shared) = (0, 0, 0);
    for name in CoarseMesh::BUILTIN_NAMES {
        let cmesh = CoarseMesh::builtin(name).map_err(err)?;
        for level in 0..=3u8 {
            for p in 1..=16usize {
                runs += 1;
                let want = serial_uniform_bounds(&cmesh, level, p).map_err(err)?;
                let (got, _) = run(p, |comm| uniform_bounds(&cmesh, level, comm)).map_err(err)?;
                a.check(got == want, || format!("{name} level {level} P={p}"));
                with_empty += want.iter().any(|b| b.is_empty()) as usize;
                with_shared += want.windows(2).any(|w| !w[0].is_empty() && !w[1].is_empty() && w[0].last_tree == w[1].first_tree as isize) as usize;
            }
        }
    }
    let t = start.elapsed();
    a.check(t < BOUNDS_BUDGET, || format!("took {t:?}"));
    a.finish(format!("{runs} configurations ({with_empty} with empty ranks, {with_shared} with shared trees) in {t:.2?}"))
}

type GhostSet = BTreeSet<(usize, usize, Element)>;

fn ghost_case(cmesh: &Arc<CoarseMesh>, level: u8, p: usize, refine: bool) -> Result<(Vec<GhostSet>, Vec<(usize, usize, Element)>), String> {
    let (res, _) = run(p, |comm| {
        let mut f = forest_new(cmesh.clone(), level, comm)?;
        if refine {
            f = forest_adapt(&f, 1, comm, |c| if c.element.etype % 2 == 0 { AdaptAction::Refine } else { AdaptAction::Keep })?;
            f = forest_partition(&f, comm)?;
        }
        let g = forest_ghost(&f, comm)?;
        let set: GhostSet = g.ghosts.iter().map(|g| (g.owner, g.tree, g.element)).collect();
        Ok((set, gather_leaves(&f, comm)?))
    })
    .map_err(err)?;
    let leaves = res[0].1.clone();
    Ok((res.into_iter().map(|r| r.0).collect(), leaves))
}

fn ghost_symmetry() -> Result<String, String> {
    let mut a = Audit::default();
    let mut total = 0usize;
    let mut cases: Vec<(&str, u8, bool)> = Vec::new();
    for mesh in ["hex2", "tet2", "pyramid2", "hybrid", "hybrid40"] {
        for level in 0..=2 {
            cases.push((mesh, level, false));
        }
    }
    cases.extend([("hybrid", 1, true), ("pyramid2", 1, true), ("pyramids8", 1, true)]);
    for (mesh, level, refine) in cases {
        let cmesh = Arc::new(CoarseMesh::builtin(mesh).map_err(err)?);
        for p in [2, 4, 8] {
            let (got, leaves) = ghost_case(&cmesh, level, p, refine)?;
            let want = ghost_oracle(&cmesh, &leaves, p);
            for q in 0..p {
                total += got[q].len();
                a.check(got[q] == want[q], || {
                    let extra = got[q].difference(&want[q]).count();
                    let missing = want[q].difference(&got[q]).count();
                    format!("{mesh} level {level} refined {refine} P={p} rank {q}: {extra} extra, {missing} missing")
                });
                for r in 0..p {
                    let q_sees_r = got[q].iter().any(|g| g.0 == r);
                    let r_sees_q = got[r].iter().any(|g| g.0 == q);
                    a.check(q_sees_r == r_sees_q, || format!("{mesh} level {level} P={p}: ranks {q} and {r} disagree"));
                }
            }
        }
    }
    a.finish(format!("{total} ghosts compared"))
}

fn checksum_invariance() -> Result<String, String> {
    let mut a = Audit::default();
    for mesh in ["pyramids8", "hybrid", "hybrid40"] {
        let cmesh = Arc::new(CoarseMesh::builtin(mesh).map_err(err)?);
        let mut sums = Vec::new();
        for p in [1, 2, 4, 8] {
            let (res, _) = run(p, |comm| {
                let f = forest_new(cmesh.clone(), 1, comm)?;
                let f = forest_adapt(&f, 1, comm, |c| if matches!(c.element.etype, 0 | 2 | 4 | 6) { AdaptAction::Refine } else { AdaptAction::Keep })?;
                let before = forest_checksum(&f, comm)?;
                let g = forest_partition(&f, comm)?;
                Ok((before, forest_checksum(&g, comm)?))
            })
            .map_err(err)?;
            let (before, after) = res[0];
            a.check(res.iter().all(|r| *r == (before, after)), || format!("{mesh} P={p}: ranks disagree"));
            a.check(before == after, || format!("{mesh} P={p}: checksum changed by partition"));
            sums.push(before);
        }
        a.check(sums.windows(2).all(|w| w[0] == w[1]), || format!("{mesh}: checksums differ across P: {sums:x?}"));
    }
    a.finish("P in {1, 2, 4, 8}".into())
}

fn desk_scale() -> Result<String, String> {
    let mut a = Audit::default();
    let cmesh = Arc::new(CoarseMesh::builtin("hybrid40").map_err(err)?);
    let start = Instant::now();
    let (res, _) = run(8, |comm| {
        let f = forest_new(cmesh.clone(), 5, comm)?;
        let created = f.num_global_leaves();
        let mut i = 0usize;
        let f = forest_adapt(&f, 1, comm, |_| {
            i += 1;
            if i % 2 == 0 {
                AdaptAction::Refine
            } else {
                AdaptAction::Keep
            }
        })?;
        let f = forest_partition(&f, comm)?;
        Ok((created, f.num_global_leaves(), f.num_local_leaves() as u64))
    })
    .map_err(err)?;
    let t = start.elapsed();
    let (created, adapted, _) = res[0];
    a.check(created >= SCALE_MIN_LEAVES, || format!("only {created} leaves created"));
    a.check(t < SCALE_BUDGET, || format!("took {t:?}"));
    let counts: Vec<u64> = res.iter().map(|r| r.2).collect();
    a.check(counts.iter().max().unwrap_or(&0) - counts.iter().min().unwrap_or(&0) <= MAX_BALANCE_GAP, || format!("counts {counts:?}"));

    let iterations = 20_000;
    let rows = run_bench(iterations, 3).map_err(err)?;
    let tsv = to_tsv(&rows);
    let lines: Vec<&str> = tsv.lines().collect();
    a.check(lines.len() == 1 + TreeShape::ALL.len() * OPERATIONS.len(), || format!("{} table lines", lines.len()));
    for line in &lines[1..] {
        let cols: Vec<&str> = line.split('\t').collect();
        let ok = cols.len() == 4 && cols[2].parse::<u64>() == Ok(iterations) && cols[3].parse::<f64>().is_ok();
        a.check(ok, || format!("bad row {line:?}"));
    }
    let mean = |shape: TreeShape| {
        let r: Vec<f64> = rows.iter().filter(|r| r.shape == shape).map(|r| r.ns_per_op).collect();
        r.iter().sum::<f64>() / r.len() as f64
    };
    a.finish(format!(
        "{created} leaves created, {adapted} after adapt, in {t:.2?}; mean ns/op hex {:.1}, tet {:.1}, pyramid {:.1}",
        mean(TreeShape::Hexahedron),
        mean(TreeShape::Tetrahedron),
        mean(TreeShape::Pyramid)
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Result<String, String>); 11] = [
        ("leaf-count law", leaf_count_law),
        ("sfc axioms", sfc_axioms),
        ("theta embedding", theta_embedding),
        ("round trips", round_trips),
        ("neighbor oracle equivalence", neighbor_equivalence),
        ("boundary theorems", boundary_theorems),
        ("partition math", partition_math),
        ("uniform bounds equivalence", uniform_bounds_equivalence),
        ("ghost symmetry", ghost_symmetry),
        ("checksum invariance", checksum_invariance),
        ("desk-scale performance", desk_scale),
    ];
    let filter: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if filter.is_some_and(|n| n != i + 1) {
            continue;
        }
        match f() {
            Ok(detail) => println!("criterion {:2} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:2} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
