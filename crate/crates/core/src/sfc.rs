//! Pyramidal refinement trees: child/parent, the pyramid index and its 6D cube embedding.
//!
//! A pyramidal tree contains pyramids (types 6 and 7) and tetrahedra (types 0 to 5). The
//! type-6 pyramid with anchor `a` and edge `h` has corners `C0 = a`, `C1 = a + h e_x`,
//! `C2 = a + h (e_x + e_y)`, `C3 = a + h e_y` and apex `C4 = a + h (1, 1, 1)`. The type-7
//! pyramid is its image under `(x, y, z) -> (1 - y, 1 - x, 1 - z)` inside the sub-cube.

use crate::element::{cube_len, Element, FaceElement, FaceShape, NeighborResult, TreeShape, Vertices, MAX_LEVEL};
use crate::error::{domain, AmrError, Result};
use crate::kernel::{fill_digits, ElementKernel};
use crate::neighbor;
use crate::standard::tet;

/// Cube id of each child of a type-6 / type-7 pyramid, by child number.
pub(crate) const PYRAMID_CHILD_CUBE_ID: [[u8; 10]; 2] = [[0, 1, 1, 2, 2, 3, 3, 3, 3, 7], [0, 4, 4, 4, 4, 5, 5, 6, 6, 7]];

/// Type of each child of a type-6 / type-7 pyramid, by child number.
pub(crate) const PYRAMID_CHILD_TYPE: [[u8; 10]; 2] = [[6, 3, 6, 0, 6, 0, 3, 6, 7, 6], [7, 0, 3, 6, 7, 3, 7, 0, 7, 7]];

const NO_PARENT: u8 = u8::MAX;

/// Type of the pyramid parent of a child with the given cube id and type, the inverse of
/// the two child tables. Tetrahedra are resolved by the z bit of their cube id.
pub(crate) const PYRAMID_PARENT_TYPE: [[u8; 8]; 8] = {
    let mut t = [[NO_PARENT; 8]; 8];
    let mut p = 0;
    while p < 2 {
        let mut c = 0;
        while c < 10 {
            t[PYRAMID_CHILD_CUBE_ID[p][c] as usize][PYRAMID_CHILD_TYPE[p][c] as usize] = 6 + p as u8;
            c += 1;
        }
        p += 1;
    }
    t
};

/// Child number of a child of a pyramid, by cube id and type.
const PYRAMID_CHILD_NUMBER: [[u8; 8]; 8] = {
    let mut t = [[NO_PARENT; 8]; 8];
    let mut p = 0;
    while p < 2 {
        let mut c = 0;
        while c < 10 {
            t[PYRAMID_CHILD_CUBE_ID[p][c] as usize][PYRAMID_CHILD_TYPE[p][c] as usize] = c as u8;
            c += 1;
        }
        p += 1;
    }
    t
};

/// Unit corners of the type-6 pyramid.
const PYRAMID6_CORNERS: [[i64; 3]; 5] = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [1, 1, 1]];

/// 3-bit position of `e`'s sub-cube at level `j` inside its level `j - 1` sub-cube.
pub fn cube_id(e: &Element, j: u8) -> Result<u8> {
    if j == 0 || j > e.level {
        return domain(format!("cube id level {j} outside 1..={}", e.level));
    }
    Ok(e.cube_id_at(j))
}

pub fn num_children(e: &Element) -> usize {
    if e.is_pyramid() {
        10
    } else {
        8
    }
}

/// Child of a pyramid-tree element by child number (which equals the SFC rank).
pub fn child(e: &Element, i: usize) -> Result<Element> {
    if e.level >= MAX_LEVEL {
        return Err(AmrError::LevelOutOfRange { level: e.level as u32 + 1, max: MAX_LEVEL as u32 });
    }
    let n = num_children(e);
    if i >= n {
        return Err(AmrError::ChildOutOfRange { index: i, count: n });
    }
    if !e.is_pyramid() {
        return Ok(tet::child_unchecked(e, i));
    }
    let p = (e.etype - 6) as usize;
    let cid = PYRAMID_CHILD_CUBE_ID[p][i] as i32;
    let t = PYRAMID_CHILD_TYPE[p][i];
    let h = cube_len(e.level + 1);
    let level = e.level + 1;
    let mtl = if t >= 6 { -1 } else { level as i8 };
    Ok(Element::new(e.x + h * (cid & 1), e.y + h * ((cid >> 1) & 1), e.z + h * ((cid >> 2) & 1), level, t, mtl))
}

/// Parent type of a pyramid-tree element whose parent is a pyramid.
#[inline]
fn pyramid_parent_type(cid: u8, t: u8) -> u8 {
    if t < 6 {
        if cid & 4 == 0 {
            6
        } else {
            7
        }
    } else {
        PYRAMID_PARENT_TYPE[cid as usize][t as usize]
    }
}

/// Whether the parent of `e` is a pyramid.
#[inline]
fn has_pyramid_parent(e: &Element) -> bool {
    e.is_pyramid() || e.min_tet_level as i32 == e.level as i32
}

pub fn parent(e: &Element) -> Result<Element> {
    if e.level == 0 {
        return domain("the root has no parent");
    }
    if !has_pyramid_parent(e) {
        return Ok(tet::parent_unchecked(e));
    }
    let cid = e.cube_id_at(e.level);
    let t = pyramid_parent_type(cid, e.etype);
    if t == NO_PARENT {
        return domain(format!("{e:?} is not a child of any pyramid"));
    }
    let mask = !cube_len(e.level);
    Ok(Element::new(e.x & mask, e.y & mask, e.z & mask, e.level - 1, t, -1))
}

/// SFC rank of `e` among its siblings.
pub fn local_index(e: &Element) -> Result<usize> {
    if e.level == 0 {
        return domain("the root has no local index");
    }
    if !has_pyramid_parent(e) {
        return Ok(tet::local_index_unchecked(e));
    }
    let n = PYRAMID_CHILD_NUMBER[e.cube_id_at(e.level) as usize][e.etype as usize];
    if n == NO_PARENT {
        return domain(format!("{e:?} is not a child of any pyramid"));
    }
    Ok(n as usize)
}

/// Types of `e` and its ancestors, indexed by level (entry 0 is the root type).
fn ancestor_types(e: &Element) -> [u8; MAX_LEVEL as usize + 1] {
    let mut types = [0u8; MAX_LEVEL as usize + 1];
    let mut a = *e;
    types[a.level as usize] = a.etype;
    while a.level > 0 {
        a = parent(&a).expect("valid pyramid-tree element");
        types[a.level as usize] = a.etype;
    }
    types
}

/// The pyramid index: per level `j`, the 6-bit digit `(cube_id_j << 3) | type_j`.
pub fn sfc_index(e: &Element) -> u128 {
    let mut idx = 0u128;
    let mut t = e.etype;
    let mut j = e.level;
    if !e.is_pyramid() {
        let mtl = e.min_tet_level.max(0) as u8;
        let (digits, top) = tet::index_digits_down_to(e, mtl);
        idx = digits;
        t = top;
        j = mtl;
    }
    while j > 0 {
        let cid = e.cube_id_at(j);
        idx |= (((cid as u128) << 3) | t as u128) << (6 * (MAX_LEVEL - j) as u32);
        t = pyramid_parent_type(cid, t);
        j -= 1;
    }
    idx
}

/// The type tuple `B` and its bit planes. Entry `i` belongs to level `MAX_LEVEL - i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TypeTuples {
    pub b: [u8; MAX_LEVEL as usize],
    pub b0: [u8; MAX_LEVEL as usize],
    pub b1: [u8; MAX_LEVEL as usize],
    pub b2: [u8; MAX_LEVEL as usize],
}

pub fn type_tuples(e: &Element) -> TypeTuples {
    let types = ancestor_types(e);
    let mut tt = TypeTuples { b: [0; 21], b0: [0; 21], b1: [0; 21], b2: [0; 21] };
    for j in 1..=e.level {
        let i = (MAX_LEVEL - j) as usize;
        let t = types[j as usize];
        tt.b[i] = t;
        tt.b0[i] = t & 1;
        tt.b1[i] = (t >> 1) & 1;
        tt.b2[i] = (t >> 2) & 1;
    }
    tt
}

/// The image of an element under the embedding into 6D cubes.
/// Coordinates are ordered `(b2, b1, b0, x, y, z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Theta {
    pub coords: [u32; 6],
    pub level: u8,
}

impl Theta {
    /// Whether `self` is one of the 64 children of the 6D cube `p`.
    pub fn is_child_of(&self, p: &Theta) -> bool {
        if self.level != p.level + 1 {
            return false;
        }
        let h = cube_len(self.level) as u32;
        let low = h - 1;
        self.coords.iter().zip(&p.coords).all(|(&c, &pc)| c & low == 0 && (c == pc || c == pc + h))
    }
}

pub fn theta(e: &Element) -> Theta {
    let tt = type_tuples(e);
    let plane = |bits: &[u8; 21]| bits.iter().enumerate().fold(0u32, |acc, (i, &b)| acc | (b as u32) << i);
    Theta { coords: [plane(&tt.b2), plane(&tt.b1), plane(&tt.b0), e.x as u32, e.y as u32, e.z as u32], level: e.level }
}

/// Bit offset of each `Theta` coordinate inside a 6-bit level digit.
const MORTON6_OFFSET: [u32; 6] = [2, 1, 0, 3, 4, 5];

/// Plain 6D Morton interleave: per level, from most to least significant bit,
/// `z, y, x, b2, b1, b0`.
pub fn morton6(t: &Theta) -> u128 {
    let mut idx = 0u128;
    for i in 0..MAX_LEVEL as u32 {
        for (k, &c) in t.coords.iter().enumerate() {
            idx |= (((c >> i) & 1) as u128) << (6 * i + MORTON6_OFFSET[k]);
        }
    }
    idx
}

pub fn compare(a: &Element, b: &Element) -> std::cmp::Ordering {
    sfc_index(a).cmp(&sfc_index(b)).then(a.level.cmp(&b.level))
}

/// Reflexive ancestor test.
pub fn is_ancestor(a: &Element, d: &Element) -> bool {
    if a.level > d.level {
        return false;
    }
    let mask = !(cube_len(a.level) - 1);
    if (d.x & mask, d.y & mask, d.z & mask) != (a.x, a.y, a.z) {
        return false;
    }
    let mut x = *d;
    while x.level > a.level {
        x = parent(&x).expect("level above root");
    }
    x == *a
}

pub fn num_descendants_at_level(e: &Element, level: u8) -> Result<u128> {
    if level < e.level || level > MAX_LEVEL {
        return domain(format!("level {level} is not a descendant level of a level {} element", e.level));
    }
    let d = (level - e.level) as u32;
    Ok(if e.is_pyramid() { 2 * 8u128.pow(d) - 6u128.pow(d) } else { 8u128.pow(d) })
}

pub fn vertex_coords(e: &Element) -> Vertices {
    let a = e.anchor().map(|c| c as i64);
    let h = e.len() as i64;
    if !e.is_pyramid() {
        return tet::vertices(e.anchor(), e.len(), e.etype).into_iter().collect();
    }
    PYRAMID6_CORNERS
        .iter()
        .map(|&[x, y, z]| {
            let u = if e.etype == 6 { [x, y, z] } else { [1 - y, 1 - x, 1 - z] };
            [a[0] + h * u[0], a[1] + h * u[1], a[2] + h * u[2]]
        })
        .collect()
}

/// Strict interior test for a pyramid of type `t` on a point relative to its anchor,
/// scaled so the cube edge is `size`.
#[inline]
pub(crate) fn pyramid_region_contains(t: u8, q: [i64; 3], size: i64) -> bool {
    if !q.iter().all(|&c| 0 < c && c < size) {
        return false;
    }
    if t == 6 {
        q[2] < q[0] && q[2] < q[1]
    } else {
        q[2] > q[0] && q[2] > q[1]
    }
}

/// Five times the centroid of a pyramid, or four times that of a tetrahedron, with the
/// matching scale.
pub(crate) fn interior_point(e: &Element) -> ([i64; 3], i64) {
    let v = vertex_coords(e);
    let mut p = [0i64; 3];
    for c in &v {
        for d in 0..3 {
            p[d] += c[d];
        }
    }
    (p, v.len() as i64)
}

/// Recover `min_tet_level` of a tetrahedron of a pyramidal tree from its geometry, by
/// descending from the root pyramid. `None` if no such tetrahedron exists in the tree.
pub fn locate_min_tet_level(x: i32, y: i32, z: i32, level: u8, etype: u8) -> Option<i8> {
    if etype >= 6 || level == 0 {
        return None;
    }
    let target = Element::new(x, y, z, level, etype, 0);
    let (p, s) = interior_point(&target);
    let mut t = 6u8;
    for j in 1..=level {
        let cid = target.cube_id_at(j);
        let h = cube_len(j);
        let mask = !(cube_len(j) - 1);
        let anchor = [x & mask, y & mask, z & mask].map(|c| c as i64);
        let q = [p[0] - s * anchor[0], p[1] - s * anchor[1], p[2] - s * anchor[2]];
        let size = s * h as i64;
        let row = (t - 6) as usize;
        let next = (0..10)
            .filter(|&c| PYRAMID_CHILD_CUBE_ID[row][c] == cid)
            .map(|c| PYRAMID_CHILD_TYPE[row][c])
            .find(|&ct| if ct >= 6 { pyramid_region_contains(ct, q, size) } else { tet::region_contains(ct, q, size) })?;
        if next < 6 {
            return Some(j as i8);
        }
        t = next;
    }
    None
}

/// Kernel for a tree whose root is the type-6 pyramid of the reference cube.
#[derive(Clone, Copy, Debug, Default)]
pub struct PyramidKernel;

impl ElementKernel for PyramidKernel {
    fn shape(&self) -> TreeShape {
        TreeShape::Pyramid
    }

    fn root(&self) -> Element {
        Element::new(0, 0, 0, 0, 6, -1)
    }

    fn num_children(&self, e: &Element) -> usize {
        num_children(e)
    }

    fn num_faces(&self, e: &Element) -> usize {
        if e.is_pyramid() {
            5
        } else {
            4
        }
    }

    fn child(&self, e: &Element, i: usize) -> Result<Element> {
        child(e, i)
    }

    fn parent(&self, e: &Element) -> Result<Element> {
        parent(e)
    }

    fn local_index(&self, e: &Element) -> Result<usize> {
        local_index(e)
    }

    fn sfc_index(&self, e: &Element) -> u128 {
        sfc_index(e)
    }

    fn num_descendants_at_level(&self, e: &Element, level: u8) -> Result<u128> {
        num_descendants_at_level(e, level)
    }

    fn vertex_coords(&self, e: &Element) -> Vertices {
        vertex_coords(e)
    }

    fn face_shape(&self, e: &Element, f: usize) -> Result<FaceShape> {
        neighbor::face_shape(e, f)
    }

    fn face_neighbor(&self, e: &Element, f: usize) -> Result<Option<NeighborResult>> {
        neighbor::face_neighbor_same_tree(e, f)
    }

    fn root_face(&self, e: &Element, f: usize) -> Result<Option<usize>> {
        neighbor::root_face(e, f)
    }

    fn collapse_to_face(&self, e: &Element, f: usize) -> Result<FaceElement> {
        neighbor::collapse_to_face(e, f)
    }

    fn extrude_from_face(&self, face: &FaceElement, root_face: usize) -> Result<(Element, usize)> {
        neighbor::extrude_from_face(face, root_face)
    }

    fn compare(&self, a: &Element, b: &Element) -> std::cmp::Ordering {
        compare(a, b)
    }

    fn is_ancestor(&self, a: &Element, d: &Element) -> bool {
        is_ancestor(a, d)
    }

    fn first_key(&self, e: &Element) -> u128 {
        fill_digits(sfc_index(e), e.level, e.etype as u128, 6)
    }

    fn last_key(&self, e: &Element) -> u128 {
        fill_digits(sfc_index(e), e.level, 56 + e.etype as u128, 6)
    }
}
