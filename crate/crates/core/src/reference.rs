//! Brute-force ground truth for tests: explicit enumeration, geometric face matching and
//! serial partition arithmetic. Nothing here is used by the library itself.

use std::collections::{BTreeSet, HashMap};

use crate::element::{cube_len, Element, FaceElement, TreeShape, MAX_LEVEL, ROOT_LEN};
use crate::error::{AmrError, Result};
use crate::forest::{CoarseMesh, UniformBounds};
use crate::kernel::shape_kernel;

/// Deepest tree [`enumerate`] builds.
pub const MAX_ENUMERATION_DEPTH: u8 = 5;

/// Every element of one tree down to a depth, built only with `child`.
#[derive(Debug, Clone)]
pub struct EnumeratedTree {
    pub shape: TreeShape,
    /// `levels[l]` lists the level-`l` elements in the order they were generated.
    pub levels: Vec<Vec<Element>>,
    /// `parents[l][i]` is the index in `levels[l - 1]` of the parent of `levels[l][i]`.
    pub parents: Vec<Vec<usize>>,
    /// Child number of each element within its parent.
    pub child_numbers: Vec<Vec<usize>>,
}

pub fn enumerate(shape: TreeShape, depth: u8) -> Result<EnumeratedTree> {
    if depth > MAX_ENUMERATION_DEPTH {
        return Err(AmrError::Domain(format!("enumeration depth {depth} exceeds {MAX_ENUMERATION_DEPTH}")));
    }
    let k = shape_kernel(shape);
    let mut t = EnumeratedTree { shape, levels: vec![vec![k.root()]], parents: vec![vec![]], child_numbers: vec![vec![]] };
    for l in 0..depth as usize {
        let (mut next, mut par, mut num) = (Vec::new(), Vec::new(), Vec::new());
        for (i, e) in t.levels[l].iter().enumerate() {
            for c in 0..k.num_children(e) {
                next.push(k.child(e, c)?);
                par.push(i);
                num.push(c);
            }
        }
        t.levels.push(next);
        t.parents.push(par);
        t.child_numbers.push(num);
    }
    Ok(t)
}

impl EnumeratedTree {
    pub fn depth(&self) -> u8 {
        (self.levels.len() - 1) as u8
    }

    pub fn leaf_counts(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// Ancestor types of `levels[level][i]` from level 1 to `level`, read off the parent links.
    pub fn ancestor_types(&self, level: usize, i: usize) -> Vec<u8> {
        let mut types = vec![0u8; level + 1];
        let (mut l, mut j) = (level, i);
        while l > 0 {
            types[l] = self.levels[l][j].etype;
            j = self.parents[l][j];
            l -= 1;
        }
        types[0] = self.levels[0][0].etype;
        types
    }

    /// The 6D cube `(b2, b1, b0, x, y, z)` of `levels[level][i]`, with the type bit planes
    /// assembled from the parent links.
    pub fn theta(&self, level: usize, i: usize) -> [u32; 6] {
        let types = self.ancestor_types(level, i);
        let mut b = [0u32; 3];
        for (l, &t) in types.iter().enumerate().skip(1) {
            let bit = MAX_LEVEL as usize - l;
            for (plane, slot) in b.iter_mut().enumerate() {
                *slot |= (((t >> (2 - plane)) & 1) as u32) << bit;
            }
        }
        let e = &self.levels[level][i];
        [b[0], b[1], b[2], e.x as u32, e.y as u32, e.z as u32]
    }
}

/// Interleave `(b2, b1, b0, x, y, z)` bit by bit, most significant level first, in the
/// order `z, y, x, b2, b1, b0` within each level.
pub fn interleave6(c: &[u32; 6]) -> u128 {
    let mut idx = 0u128;
    for bit in (0..MAX_LEVEL as u32).rev() {
        for k in [5, 4, 3, 0, 1, 2] {
            idx = (idx << 1) | ((c[k] >> bit) & 1) as u128;
        }
    }
    idx
}

/// Leaf count of a uniformly refined pyramid by the refinement recursion: six pyramids
/// and four tetrahedra per pyramid.
pub fn pyramid_leaf_count_recursive(depth: u32) -> u128 {
    if depth == 0 {
        1
    } else {
        6 * pyramid_leaf_count_recursive(depth - 1) + 4 * 8u128.pow(depth - 1)
    }
}

/// Corner indices of face `f`, in cyclic order.
pub fn face_corners(shape: TreeShape, e: &Element, f: usize) -> &'static [usize] {
    const TET: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];
    const PYRAMID: [&[usize]; 5] = [&[0, 3, 4], &[1, 2, 4], &[0, 1, 4], &[2, 3, 4], &[0, 1, 2, 3]];
    const HEX: [[usize; 4]; 6] = [[0, 2, 6, 4], [1, 3, 7, 5], [0, 1, 5, 4], [2, 3, 7, 6], [0, 1, 3, 2], [4, 5, 7, 6]];
    match shape {
        TreeShape::Hexahedron => &HEX[f],
        _ if e.is_pyramid() => PYRAMID[f],
        _ => &TET[f],
    }
}

pub fn face_polygon(shape: TreeShape, e: &Element, f: usize) -> Vec<[i64; 3]> {
    let v = shape_kernel(shape).vertex_coords(e);
    face_corners(shape, e, f).iter().map(|&i| v[i]).collect()
}

fn sorted(mut p: Vec<[i64; 3]>) -> Vec<[i64; 3]> {
    p.sort_unstable();
    p
}

/// Same-level face matching by exact vertex sets over one level of an enumerated tree.
pub struct NeighborOracle<'a> {
    tree: &'a EnumeratedTree,
    level: usize,
    by_face: HashMap<Vec<[i64; 3]>, Vec<(usize, usize)>>,
    index: HashMap<Element, usize>,
}

impl<'a> NeighborOracle<'a> {
    pub fn new(tree: &'a EnumeratedTree, level: usize) -> Self {
        let k = shape_kernel(tree.shape);
        let mut by_face: HashMap<_, Vec<(usize, usize)>> = HashMap::new();
        let mut index = HashMap::new();
        for (i, e) in tree.levels[level].iter().enumerate() {
            index.insert(*e, i);
            for f in 0..k.num_faces(e) {
                by_face.entry(sorted(face_polygon(tree.shape, e, f))).or_default().push((i, f));
            }
        }
        NeighborOracle { tree, level, by_face, index }
    }

    pub fn elements(&self) -> &'a [Element] {
        &self.tree.levels[self.level]
    }

    /// The element sharing face `f` of `e` and its face number, or `None` on the boundary.
    /// Panics if the face is shared more than twice, which would mean a broken tree.
    pub fn neighbor(&self, e: &Element, f: usize) -> Option<(Element, usize)> {
        let i = self.index[e];
        let key = sorted(face_polygon(self.tree.shape, e, f));
        let matches: Vec<_> = self.by_face[&key].iter().filter(|&&(j, _)| j != i).collect();
        assert!(matches.len() <= 1, "face {f} of {e:?} is shared by {} elements", matches.len() + 1);
        matches.first().map(|&&(j, g)| (self.tree.levels[self.level][j], g))
    }
}

/// 2D coordinates of `p` in root face `rf` of a tree of the given shape, if it lies there.
pub fn root_face_coords(shape: TreeShape, rf: usize, p: [i64; 3]) -> Option<[i64; 2]> {
    let h = ROOT_LEN as i64;
    let [x, y, z] = p;
    let (on, uv) = match (shape, rf) {
        (TreeShape::Hexahedron, 0) => (x == 0, [y, z]),
        (TreeShape::Hexahedron, 1) => (x == h, [y, z]),
        (TreeShape::Hexahedron, 2) => (y == 0, [x, z]),
        (TreeShape::Hexahedron, 3) => (y == h, [x, z]),
        (TreeShape::Hexahedron, 4) => (z == 0, [x, y]),
        (TreeShape::Hexahedron, _) => (z == h, [x, y]),
        (TreeShape::Tetrahedron, 0) => (x == h, [z, y]),
        (TreeShape::Tetrahedron, 1) => (x == z, [x, y]),
        (TreeShape::Tetrahedron, 2) => (y == z, [x, y]),
        (TreeShape::Tetrahedron, _) => (y == 0, [x, z]),
        (TreeShape::Pyramid, 0) => (x == z, [y, z]),
        (TreeShape::Pyramid, 1) => (x == h, [y, z]),
        (TreeShape::Pyramid, 2) => (y == z, [x, z]),
        (TreeShape::Pyramid, 3) => (y == h, [x, z]),
        (TreeShape::Pyramid, _) => (z == 0, [x, y]),
    };
    on.then_some(uv)
}

/// The root face a face polygon lies on and its 2D image.
pub fn polygon_on_root_face(shape: TreeShape, poly: &[[i64; 3]]) -> Option<(usize, Vec<[i64; 2]>)> {
    (0..shape.num_faces()).find_map(|rf| {
        let uv: Option<Vec<_>> = poly.iter().map(|&p| root_face_coords(shape, rf, p)).collect();
        uv.map(|uv| (rf, uv))
    })
}

/// Read a 2D face polygon as a face element: a square, or a right triangle of type 0
/// (below the diagonal) or 1 (above it).
pub fn face_element_from_polygon(uv: &[[i64; 2]], level: u8) -> Option<FaceElement> {
    let h = cube_len(level) as i64;
    let mut s = uv.to_vec();
    s.sort_unstable();
    let [a, b] = s[0];
    let at = |dx, dy| [a + dx * h, b + dy * h];
    match s.len() {
        4 if s == vec![at(0, 0), at(0, 1), at(1, 0), at(1, 1)] => Some(FaceElement::quad(a as i32, b as i32, level)),
        3 if s == vec![at(0, 0), at(1, 0), at(1, 1)] => Some(FaceElement::triangle(a as i32, b as i32, level, 0)),
        3 if s == vec![at(0, 0), at(0, 1), at(1, 1)] => Some(FaceElement::triangle(a as i32, b as i32, level, 1)),
        _ => None,
    }
}

/// A type-0 boundary triangle belongs to a pyramid exactly when it and all its triangle
/// ancestors are corner children of type 0.
pub fn corner_walk_is_pyramid(u: i32, v: i32, level: u8) -> bool {
    let mut t = 0u8;
    for j in (1..=level).rev() {
        let h = cube_len(j);
        let (bu, bv) = ((u & h != 0) as u8, (v & h != 0) as u8);
        if t != 0 {
            return false;
        }
        // The parent type: a type-0 child in the upper-left cube is the middle child of a
        // type-1 parent; other cubes keep the type for corners.
        t = match (bu, bv) {
            (0, 1) => 1,
            (1, 0) => 0,
            _ => t,
        };
    }
    t == 0
}

/// The equal partition computed directly from the global tree sizes.
pub fn serial_uniform_bounds(cmesh: &CoarseMesh, level: u8, p: usize) -> Result<Vec<UniformBounds>> {
    let counts: Vec<u128> = cmesh
        .shapes()
        .iter()
        .map(|&s| {
            let k = shape_kernel(s);
            k.num_descendants_at_level(&k.root(), level)
        })
        .collect::<Result<_>>()?;
    let n: u128 = counts.iter().sum();
    let k = counts.len();
    let locate = |e: u128| {
        let mut acc = 0u128;
        for (t, &c) in counts.iter().enumerate() {
            if e < acc + c {
                return (t, e - acc);
            }
            acc += c;
        }
        unreachable!("element {e} beyond {n}")
    };
    Ok((0..p)
        .map(|q| {
            let (lo, hi) = (q as u128 * n / p as u128, (q as u128 + 1) * n / p as u128);
            if lo == n {
                return UniformBounds { first_tree: k, first_element: 0, last_tree: k as isize - 1, last_element: 0 };
            }
            let (ft, fe) = locate(lo);
            if lo == hi {
                return UniformBounds { first_tree: ft, first_element: 0, last_tree: ft as isize - 1, last_element: 0 };
            }
            let (lt, le) = locate(hi - 1);
            UniformBounds { first_tree: ft, first_element: fe, last_tree: lt as isize, last_element: le }
        })
        .collect())
}

fn sub(a: [i64; 3], b: [i64; 3]) -> [i128; 3] {
    [(a[0] - b[0]) as i128, (a[1] - b[1]) as i128, (a[2] - b[2]) as i128]
}

fn cross(a: [i128; 3], b: [i128; 3]) -> [i128; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [i128; 3], b: [i128; 3]) -> i128 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normal(poly: &[[i64; 3]]) -> [i128; 3] {
    cross(sub(poly[1], poly[0]), sub(poly[2], poly[0]))
}

fn plane_key(poly: &[[i64; 3]]) -> ([i128; 3], i128) {
    let mut n = normal(poly);
    let g = n.iter().fold(0i128, |g, &c| gcd(g, c.abs()));
    for c in &mut n {
        *c /= g;
    }
    if n.iter().find(|&&c| c != 0).is_some_and(|&c| c < 0) {
        n = n.map(|c| -c);
    }
    let p = poly[0].map(|c| c as i128);
    (n, dot(n, p))
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Whether every corner of `inner` lies in the closed convex polygon `outer` (coplanar).
fn contains3(outer: &[[i64; 3]], inner: &[[i64; 3]]) -> bool {
    let n = normal(outer);
    inner.iter().all(|&q| {
        (0..outer.len()).all(|i| {
            let (a, b) = (outer[i], outer[(i + 1) % outer.len()]);
            dot(cross(sub(b, a), sub(q, a)), n) >= 0
        })
    })
}

fn contains2(outer: &[[i64; 2]], inner: &[[i64; 2]]) -> bool {
    let cr = |o: [i64; 2], a: [i64; 2], b: [i64; 2]| (a[0] - o[0]) as i128 * (b[1] - o[1]) as i128 - (a[1] - o[1]) as i128 * (b[0] - o[0]) as i128;
    let orient = cr(outer[0], outer[1], outer[2]).signum();
    inner.iter().all(|&q| (0..outer.len()).all(|i| cr(outer[i], outer[(i + 1) % outer.len()], q) * orient >= 0))
}

/// Per rank, the set of `(owner, tree, element)` remote leaves that share a face (a piece
/// of positive area) with one of its leaves. Faces on linked root faces are compared in
/// the two-dimensional root-face coordinates, identified by the identity map.
pub fn ghost_oracle(cmesh: &CoarseMesh, leaves: &[(usize, usize, Element)], ranks: usize) -> Vec<BTreeSet<(usize, usize, Element)>> {
    type Key3 = (usize, [i128; 3], i128);
    let mut planes: HashMap<Key3, Vec<(usize, Vec<[i64; 3]>)>> = HashMap::new();
    let mut interfaces: HashMap<(usize, usize), Vec<(usize, Vec<[i64; 2]>)>> = HashMap::new();
    for (i, &(_, t, ref e)) in leaves.iter().enumerate() {
        let shape = cmesh.shape(t);
        let k = shape_kernel(shape);
        for f in 0..k.num_faces(e) {
            let poly = face_polygon(shape, e, f);
            if let Some((rf, uv)) = polygon_on_root_face(shape, &poly) {
                if let Some((t2, rf2)) = cmesh.link(t, rf) {
                    let key = (t, rf).min((t2, rf2));
                    let side = ((t, rf) != key) as usize;
                    // Keep the two sides apart by tagging the index parity in the list.
                    interfaces.entry(key).or_default().push((2 * i + side, uv));
                }
                continue;
            }
            let (n, d) = plane_key(&poly);
            planes.entry((t, n, d)).or_default().push((i, poly));
        }
    }
    let mut adjacent = BTreeSet::new();
    for faces in planes.values() {
        for (a, (i, pa)) in faces.iter().enumerate() {
            for (j, pb) in &faces[a + 1..] {
                if i != j && (contains3(pa, pb) || contains3(pb, pa)) {
                    adjacent.insert((*i.min(j), *i.max(j)));
                }
            }
        }
    }
    for faces in interfaces.values() {
        for (a, (i, pa)) in faces.iter().enumerate() {
            for (j, pb) in &faces[a + 1..] {
                if i % 2 != j % 2 && (contains2(pa, pb) || contains2(pb, pa)) {
                    let (i, j) = (i / 2, j / 2);
                    adjacent.insert((i.min(j), i.max(j)));
                }
            }
        }
    }
    let mut ghosts = vec![BTreeSet::new(); ranks];
    for (i, j) in adjacent {
        let (a, b) = (&leaves[i], &leaves[j]);
        if a.0 != b.0 {
            ghosts[b.0].insert(*a);
            ghosts[a.0].insert(*b);
        }
    }
    ghosts
}
