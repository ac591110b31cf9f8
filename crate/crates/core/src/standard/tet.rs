//! Bey-refined tetrahedra with the tetrahedral Morton (TM) index.
//!
//! A type-`t` tetrahedron with anchor `a` and edge length `h` has corners
//! `a`, `a + h e_i`, `a + h (e_i + e_j)` and `a + h (1, 1, 1)` with `i = t / 2` and
//! `j = (i + 2)` for even `t`, `(i + 1)` for odd `t` (mod 3). Face `f` is opposite corner `f`.
//! Children are numbered in Bey's order internally and exposed by SFC rank.

use crate::element::{cube_len, Element, FaceElement, FaceShape, NeighborResult, TreeShape, Vertices, MAX_LEVEL, ROOT_LEN};
use crate::error::{domain, AmrError, Result};
use crate::kernel::{check_face, fill_digits, ElementKernel};

/// Type of Bey child `b` of a type-`t` parent: `TYPE_OF_CHILD[t][b]`.
pub(crate) const TYPE_OF_CHILD: [[u8; 8]; 6] = [
    [0, 0, 0, 0, 4, 5, 2, 1],
    [1, 1, 1, 1, 3, 2, 5, 0],
    [2, 2, 2, 2, 0, 1, 4, 3],
    [3, 3, 3, 3, 5, 4, 1, 2],
    [4, 4, 4, 4, 2, 3, 0, 5],
    [5, 5, 5, 5, 1, 0, 3, 4],
];

/// Cube id of Bey child `b` of a type-`t` parent.
pub(crate) const CHILD_CUBE_ID: [[u8; 8]; 6] = [
    [0, 1, 5, 7, 1, 1, 5, 5],
    [0, 1, 3, 7, 1, 1, 3, 3],
    [0, 2, 3, 7, 2, 2, 3, 3],
    [0, 2, 6, 7, 2, 2, 6, 6],
    [0, 4, 6, 7, 4, 4, 6, 6],
    [0, 4, 5, 7, 4, 4, 5, 5],
];

/// Parent type of a child with the given cube id and type: `PARENT_TYPE[cid][t]`.
pub(crate) const PARENT_TYPE: [[u8; 6]; 8] = [
    [0, 1, 2, 3, 4, 5],
    [0, 1, 1, 1, 0, 0],
    [2, 2, 2, 3, 3, 3],
    [1, 1, 2, 2, 2, 1],
    [5, 5, 4, 4, 4, 5],
    [0, 0, 0, 5, 5, 5],
    [4, 3, 3, 3, 4, 4],
    [0, 1, 2, 3, 4, 5],
];

/// Bey child number of a child with the given cube id and type: `CUBE_ID_TO_BEY[cid][t]`.
pub(crate) const CUBE_ID_TO_BEY: [[u8; 6]; 8] = [
    [0, 0, 0, 0, 0, 0],
    [1, 1, 5, 4, 4, 5],
    [4, 5, 1, 1, 5, 4],
    [7, 2, 2, 7, 6, 6],
    [5, 4, 4, 5, 1, 1],
    [2, 7, 6, 6, 7, 2],
    [6, 6, 7, 2, 2, 7],
    [3, 3, 3, 3, 3, 3],
];

pub(crate) const BEY_TO_LOCAL: [[u8; 8]; 6] = [
    [0, 1, 4, 7, 2, 3, 6, 5],
    [0, 1, 5, 7, 3, 2, 6, 4],
    [0, 3, 4, 7, 1, 2, 6, 5],
    [0, 1, 6, 7, 3, 2, 4, 5],
    [0, 3, 5, 7, 1, 2, 4, 6],
    [0, 3, 6, 7, 2, 1, 4, 5],
];

pub(crate) const LOCAL_TO_BEY: [[u8; 8]; 6] = [
    [0, 1, 4, 5, 2, 7, 6, 3],
    [0, 1, 5, 4, 7, 2, 6, 3],
    [0, 4, 5, 1, 2, 7, 6, 3],
    [0, 1, 5, 4, 6, 7, 2, 3],
    [0, 4, 5, 1, 6, 2, 7, 3],
    [0, 5, 4, 1, 6, 7, 2, 3],
];

/// Same-level neighbor across face `f` of a type-`t` tetrahedron:
/// (neighbor type, anchor shift in cube lengths, dual face).
pub(crate) const FACE_NEIGHBOR: [[(u8, [i32; 3], u8); 4]; 6] = [
    [(4, [1, 0, 0], 3), (5, [0, 0, 0], 1), (1, [0, 0, 0], 2), (2, [0, -1, 0], 0)],
    [(3, [1, 0, 0], 3), (2, [0, 0, 0], 1), (0, [0, 0, 0], 2), (5, [0, 0, -1], 0)],
    [(0, [0, 1, 0], 3), (1, [0, 0, 0], 1), (3, [0, 0, 0], 2), (4, [0, 0, -1], 0)],
    [(5, [0, 1, 0], 3), (4, [0, 0, 0], 1), (2, [0, 0, 0], 2), (1, [-1, 0, 0], 0)],
    [(2, [0, 0, 1], 3), (3, [0, 0, 0], 1), (5, [0, 0, 0], 2), (0, [-1, 0, 0], 0)],
    [(1, [0, 0, 1], 3), (0, [0, 0, 0], 1), (4, [0, 0, 0], 2), (3, [0, -1, 0], 0)],
];

/// The axes `(i, j, k)` such that a type-`t` tetrahedron is `{q_i >= q_j >= q_k}` in its cube.
#[inline]
pub(crate) fn axes(t: u8) -> (usize, usize, usize) {
    let i = (t / 2) as usize;
    let j = (i + if t % 2 == 0 { 2 } else { 1 }) % 3;
    (i, j, 3 - i - j)
}

pub(crate) fn vertices(anchor: [i32; 3], h: i32, t: u8) -> [[i64; 3]; 4] {
    let (i, j, _) = axes(t);
    let a = anchor.map(|c| c as i64);
    let h = h as i64;
    let mut v1 = a;
    v1[i] += h;
    let mut v2 = v1;
    v2[j] += h;
    [a, v1, v2, a.map(|c| c + h)]
}

/// Strict interior test of a point `q` given relative to the anchor, scaled so the cube
/// edge has length `size`.
#[inline]
pub(crate) fn region_contains(t: u8, q: [i64; 3], size: i64) -> bool {
    let (i, j, k) = axes(t);
    q.iter().all(|&c| 0 < c && c < size) && q[i] > q[j] && q[j] > q[k]
}

/// Four times the centroid.
pub(crate) fn interior_point(e: &Element) -> [i64; 3] {
    let v = vertices(e.anchor(), e.len(), e.etype);
    let mut p = [0i64; 3];
    for c in v {
        for d in 0..3 {
            p[d] += c[d];
        }
    }
    p
}

/// Child with local index `i`; `min_tet_level` is inherited.
pub(crate) fn child_unchecked(e: &Element, i: usize) -> Element {
    let t = e.etype as usize;
    let b = LOCAL_TO_BEY[t][i] as usize;
    let cid = CHILD_CUBE_ID[t][b] as i32;
    let h = cube_len(e.level + 1);
    Element::new(
        e.x + h * (cid & 1),
        e.y + h * ((cid >> 1) & 1),
        e.z + h * ((cid >> 2) & 1),
        e.level + 1,
        TYPE_OF_CHILD[t][b],
        e.min_tet_level,
    )
}

/// Tetrahedral parent; `min_tet_level` is kept.
pub(crate) fn parent_unchecked(e: &Element) -> Element {
    let cid = e.cube_id_at(e.level);
    let mask = !cube_len(e.level);
    Element::new(
        e.x & mask,
        e.y & mask,
        e.z & mask,
        e.level - 1,
        PARENT_TYPE[cid as usize][e.etype as usize],
        e.min_tet_level,
    )
}

pub(crate) fn local_index_unchecked(e: &Element) -> usize {
    let cid = e.cube_id_at(e.level) as usize;
    let pt = PARENT_TYPE[cid][e.etype as usize] as usize;
    BEY_TO_LOCAL[pt][CUBE_ID_TO_BEY[cid][e.etype as usize] as usize] as usize
}

/// Same-level tetrahedral neighbor, without any root containment check.
pub(crate) fn neighbor_unchecked(e: &Element, f: usize) -> (Element, usize) {
    let (t, d, g) = FACE_NEIGHBOR[e.etype as usize][f];
    let h = e.len();
    (Element::new(e.x + d[0] * h, e.y + d[1] * h, e.z + d[2] * h, e.level, t, e.min_tet_level), g as usize)
}

/// Digits of the TM-index from `e.level` up to (excluding) `stop_level`, together with the
/// type of the ancestor at `stop_level`.
pub(crate) fn index_digits_down_to(e: &Element, stop_level: u8) -> (u128, u8) {
    let mut t = e.etype;
    let mut idx = 0u128;
    for j in ((stop_level + 1)..=e.level).rev() {
        let cid = e.cube_id_at(j);
        idx |= (((cid as u128) << 3) | t as u128) << (6 * (MAX_LEVEL - j) as u32);
        t = PARENT_TYPE[cid as usize][t as usize];
    }
    (idx, t)
}

/// Kernel for a tree whose root is the type-0 tetrahedron of the reference cube.
#[derive(Clone, Copy, Debug, Default)]
pub struct TetKernel;

/// Root face touched by face `f` of a type-`t` tetrahedron, if the element sits on it.
/// Root faces: 0 is `x = L`, 1 is `x = z`, 2 is `y = z`, 3 is `y = 0`.
fn on_root_face(e: &Element, f: usize) -> Option<usize> {
    let h = e.len();
    match (e.etype, f) {
        (0, 0) | (1, 0) if e.x + h == ROOT_LEN => Some(0),
        (0, 1) | (2, 2) if e.x == e.z => Some(1),
        (0, 2) | (4, 1) if e.y == e.z => Some(2),
        (0, 3) | (5, 3) if e.y == 0 => Some(3),
        _ => None,
    }
}

/// Type and face of the tetrahedron extruded from a type-1 triangle, per root face.
const EXTRUDE_TYPE1: [(u8, usize); 4] = [(1, 0), (2, 2), (4, 1), (5, 3)];

impl ElementKernel for TetKernel {
    fn shape(&self) -> TreeShape {
        TreeShape::Tetrahedron
    }

    fn root(&self) -> Element {
        Element::new(0, 0, 0, 0, 0, 0)
    }

    fn num_children(&self, _e: &Element) -> usize {
        8
    }

    fn num_faces(&self, _e: &Element) -> usize {
        4
    }

    fn child(&self, e: &Element, i: usize) -> Result<Element> {
        if e.level >= MAX_LEVEL {
            return Err(AmrError::LevelOutOfRange { level: e.level as u32 + 1, max: MAX_LEVEL as u32 });
        }
        if i >= 8 {
            return Err(AmrError::ChildOutOfRange { index: i, count: 8 });
        }
        Ok(child_unchecked(e, i))
    }

    fn parent(&self, e: &Element) -> Result<Element> {
        if e.level == 0 {
            return domain("the root has no parent");
        }
        Ok(parent_unchecked(e))
    }

    fn local_index(&self, e: &Element) -> Result<usize> {
        if e.level == 0 {
            return domain("the root has no local index");
        }
        Ok(local_index_unchecked(e))
    }

    fn sfc_index(&self, e: &Element) -> u128 {
        index_digits_down_to(e, 0).0
    }

    fn num_descendants_at_level(&self, e: &Element, level: u8) -> Result<u128> {
        if level < e.level || level > MAX_LEVEL {
            return domain(format!("level {level} is not a descendant level of a level {} element", e.level));
        }
        Ok(1u128 << (3 * (level - e.level) as u32))
    }

    fn vertex_coords(&self, e: &Element) -> Vertices {
        vertices(e.anchor(), e.len(), e.etype).into_iter().collect()
    }

    fn face_shape(&self, _e: &Element, f: usize) -> Result<FaceShape> {
        check_face(f, 4)?;
        Ok(FaceShape::Triangle)
    }

    fn face_neighbor(&self, e: &Element, f: usize) -> Result<Option<NeighborResult>> {
        check_face(f, 4)?;
        let (n, g) = neighbor_unchecked(e, f);
        if n.anchor().iter().any(|&c| !(0..ROOT_LEN).contains(&c)) {
            return Ok(None);
        }
        let p = interior_point(&n);
        if !region_contains(0, p, 4 * ROOT_LEN as i64) {
            return Ok(None);
        }
        Ok(Some(NeighborResult { neighbor: n, dual_face: g, same_tree: true }))
    }

    fn root_face(&self, e: &Element, f: usize) -> Result<Option<usize>> {
        check_face(f, 4)?;
        Ok(on_root_face(e, f))
    }

    fn collapse_to_face(&self, e: &Element, f: usize) -> Result<FaceElement> {
        let rf = self.root_face(e, f)?.ok_or(AmrError::NotOnRootFace { face: f })?;
        let (u, v) = match rf {
            0 => (e.z, e.y),
            1 | 2 => (e.x, e.y),
            _ => (e.x, e.z),
        };
        Ok(FaceElement::triangle(u, v, e.level, if e.etype == 0 { 0 } else { 1 }))
    }

    fn extrude_from_face(&self, face: &FaceElement, root_face: usize) -> Result<(Element, usize)> {
        check_face(root_face, 4)?;
        if face.shape != FaceShape::Triangle || !face.is_inside_root() {
            return domain(format!("{face:?} is not a face element of tetrahedron root face {root_face}"));
        }
        let h = cube_len(face.level);
        let (u, v) = (face.x, face.y);
        let anchor = match root_face {
            0 => [ROOT_LEN - h, v, u],
            1 => [u, v, u],
            2 => [u, v, v],
            _ => [u, 0, v],
        };
        let (t, f) = if face.ftype == 0 { (0, root_face) } else { EXTRUDE_TYPE1[root_face] };
        Ok((Element::new(anchor[0], anchor[1], anchor[2], face.level, t, 0), f))
    }

    fn first_key(&self, e: &Element) -> u128 {
        fill_digits(self.sfc_index(e), e.level, e.etype as u128, 6)
    }

    fn last_key(&self, e: &Element) -> u128 {
        fill_digits(self.sfc_index(e), e.level, 56 + e.etype as u128, 6)
    }
}
