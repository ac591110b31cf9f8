//! Face arithmetic inside pyramidal trees: same-tree neighbors, the pyramid-touch test for
//! tetrahedra, and collapse/extrusion at the root boundary.
//!
//! Root faces of the pyramid tree: 0 is the plane `x = z`, 1 is `x = L`, 2 is `y = z`,
//! 3 is `y = L` and 4 is the base `z = 0`. Face coordinates `(u, v)` are `(y, z)` on faces
//! 0 and 1, `(x, z)` on faces 2 and 3 and `(x, y)` on the base.

use crate::element::{cube_len, Element, FaceElement, FaceShape, NeighborResult, ROOT_LEN};
use crate::error::{domain, AmrError, Result};
use crate::kernel::check_face;
use crate::sfc::{self, interior_point, locate_min_tet_level, pyramid_region_contains};
use crate::standard::tet;

/// Same-level neighbor of a pyramid across face `f`: (type, anchor shift, dual face).
const PYRAMID_NEIGHBOR: [[(u8, [i32; 3], u8); 5]; 2] = [
    [(3, [0, 0, 0], 2), (3, [1, 0, 0], 3), (0, [0, 0, 0], 2), (0, [0, 1, 0], 3), (7, [0, 0, -1], 4)],
    [(3, [0, 0, 0], 1), (3, [0, -1, 0], 0), (0, [0, 0, 0], 1), (0, [-1, 0, 0], 0), (6, [0, 0, 1], 4)],
];

/// Pyramid neighbor of a type-0 / type-3 tetrahedron across face `f`, when it has one.
const TET_PYRAMID_NEIGHBOR: [[(u8, [i32; 3], u8); 4]; 2] = [
    [(7, [1, 0, 0], 3), (7, [0, 0, 0], 2), (6, [0, 0, 0], 2), (6, [0, -1, 0], 3)],
    [(7, [0, 1, 0], 1), (7, [0, 0, 0], 0), (6, [0, 0, 0], 0), (6, [-1, 0, 0], 1)],
];

pub fn face_shape(e: &Element, f: usize) -> Result<FaceShape> {
    check_face(f, if e.is_pyramid() { 5 } else { 4 })?;
    Ok(if e.is_pyramid() && f == 4 { FaceShape::Quadrilateral } else { FaceShape::Triangle })
}

/// The one face of a tetrahedral child of a pyramid that lies on the parent's boundary and
/// therefore does not meet a pyramidal sibling.
pub fn non_valid_face(a: &Element) -> Result<usize> {
    if a.is_pyramid() || a.level == 0 || a.min_tet_level as i32 != a.level as i32 {
        return domain(format!("{a:?} is not a tetrahedral child of a pyramid"));
    }
    let cid = a.cube_id_at(a.level);
    match (cid, a.etype) {
        (1, 3) | (2, 0) => Ok(1),
        (3, 0) | (3, 3) => Ok(0),
        (4, 0) | (4, 3) => Ok(3),
        (5, 3) | (6, 0) => Ok(2),
        _ => domain(format!("{a:?} is not a tetrahedral child of a pyramid")),
    }
}

/// Whether the same-level neighbor of the type-0/3 tetrahedron `t` across face `f` is a
/// pyramid. Constant-time valid-face check first, then the walk over tetrahedral ancestors.
pub fn tet_touches_pyramid(t: &Element, f: usize) -> Result<bool> {
    check_face(f, 4)?;
    if t.etype != 0 && t.etype != 3 {
        return domain(format!("pyramid touch test needs a type 0 or 3 tetrahedron, got type {}", t.etype));
    }
    if t.min_tet_level < 1 || t.min_tet_level as u8 > t.level {
        return domain(format!("{t:?} is not a tetrahedron of a pyramidal tree"));
    }
    let mtl = t.min_tet_level as u8;
    let h = cube_len(mtl);
    let mask = !(h - 1);
    let a = Element::new(t.x & mask, t.y & mask, t.z & mask, mtl, 0, t.min_tet_level);
    // The ancestor keeps t's type only if every step is a corner child; checked below.
    let a = Element { etype: t.etype, ..a };
    if non_valid_face(&a).map(|g| g == f).unwrap_or(true) {
        return Ok(false);
    }
    let mut ty = t.etype;
    for l in ((mtl + 1)..=t.level).rev() {
        let cid = t.cube_id_at(l) as usize;
        let bey = tet::CUBE_ID_TO_BEY[cid][ty as usize] as usize;
        if bey >= 4 || bey == f {
            return Ok(false);
        }
        ty = tet::PARENT_TYPE[cid][ty as usize];
    }
    Ok(true)
}

fn shifted(e: &Element, d: [i32; 3], t: u8, mtl: i8) -> Element {
    let h = e.len();
    Element::new(e.x + d[0] * h, e.y + d[1] * h, e.z + d[2] * h, e.level, t, mtl)
}

fn inside_root(n: &Element) -> bool {
    if n.anchor().iter().any(|&c| !(0..ROOT_LEN).contains(&c)) {
        return false;
    }
    let (p, s) = interior_point(n);
    pyramid_region_contains(6, p, s * ROOT_LEN as i64)
}

/// Same-level neighbor inside the pyramidal tree, `None` across the root boundary.
pub fn face_neighbor_same_tree(e: &Element, f: usize) -> Result<Option<NeighborResult>> {
    let (mut n, dual) = if e.is_pyramid() {
        check_face(f, 5)?;
        let (t, d, g) = PYRAMID_NEIGHBOR[(e.etype - 6) as usize][f];
        (shifted(e, d, t, -1), g as usize)
    } else {
        check_face(f, 4)?;
        if (e.etype == 0 || e.etype == 3) && tet_touches_pyramid(e, f)? {
            let (t, d, g) = TET_PYRAMID_NEIGHBOR[(e.etype / 3) as usize][f];
            (shifted(e, d, t, -1), g as usize)
        } else {
            tet::neighbor_unchecked(e, f)
        }
    };
    if !inside_root(&n) {
        return Ok(None);
    }
    if !n.is_pyramid() {
        match locate_min_tet_level(n.x, n.y, n.z, n.level, n.etype) {
            Some(m) => n.min_tet_level = m,
            None => return domain(format!("neighbor {n:?} of {e:?} is not an element of the tree")),
        }
    }
    Ok(Some(NeighborResult { neighbor: n, dual_face: dual, same_tree: true }))
}

/// Root face that face `f` of `e` lies on, if any.
pub fn root_face(e: &Element, f: usize) -> Result<Option<usize>> {
    check_face(f, if e.is_pyramid() { 5 } else { 4 })?;
    let h = e.len();
    let on = |rf: usize| -> bool {
        match rf {
            0 => e.x == e.z,
            1 => e.x + h == ROOT_LEN,
            2 => e.y == e.z,
            3 => e.y + h == ROOT_LEN,
            _ => e.z == 0,
        }
    };
    let rf = match (e.etype, f) {
        (6, f) => Some(f),
        (0, 0) | (1, 0) => Some(1),
        (0, 1) | (2, 2) => Some(0),
        (1, 2) | (3, 1) => Some(2),
        (2, 0) | (3, 0) => Some(3),
        _ => None,
    };
    Ok(rf.filter(|&rf| on(rf)))
}

pub fn collapse_to_face(e: &Element, f: usize) -> Result<FaceElement> {
    let rf = root_face(e, f)?.ok_or(AmrError::NotOnRootFace { face: f })?;
    let (u, v) = match rf {
        0 | 1 => (e.y, e.z),
        2 | 3 => (e.x, e.z),
        _ => return Ok(FaceElement::quad(e.x, e.y, e.level)),
    };
    let ftype = if e.etype == 0 || e.etype == 3 { 1 } else { 0 };
    Ok(FaceElement::triangle(u, v, e.level, ftype))
}

/// The bitwise criterion: a type-0 boundary triangle at `(u, v)` extrudes to a pyramid
/// exactly when every set bit of `v` is also set in `u`.
#[inline]
pub fn extrudes_to_pyramid(u: i32, v: i32) -> bool {
    v == u & v
}

const EXTRUDE_TYPE1: [(u8, usize); 4] = [(0, 1), (0, 0), (3, 1), (3, 0)];
const EXTRUDE_TYPE0_TET: [(u8, usize); 4] = [(2, 2), (1, 0), (1, 2), (2, 0)];

pub fn extrude_from_face(face: &FaceElement, root_face: usize) -> Result<(Element, usize)> {
    check_face(root_face, 5)?;
    let expected = if root_face == 4 { FaceShape::Quadrilateral } else { FaceShape::Triangle };
    if face.shape != expected || !face.is_inside_root() {
        return domain(format!("{face:?} is not a face element of pyramid root face {root_face}"));
    }
    let (u, v, level) = (face.x, face.y, face.level);
    if root_face == 4 {
        return Ok((Element::new(u, v, 0, level, 6, -1), 4));
    }
    let h = cube_len(level);
    let [x, y, z] = match root_face {
        0 => [v, u, v],
        1 => [ROOT_LEN - h, u, v],
        2 => [u, v, v],
        _ => [u, ROOT_LEN - h, v],
    };
    if face.ftype == 0 && extrudes_to_pyramid(u, v) {
        return Ok((Element::new(x, y, z, level, 6, -1), root_face));
    }
    let (t, f) = if face.ftype == 1 { EXTRUDE_TYPE1[root_face] } else { EXTRUDE_TYPE0_TET[root_face] };
    let mtl = locate_min_tet_level(x, y, z, level, t)
        .ok_or_else(|| AmrError::Domain(format!("{face:?} on root face {root_face} extrudes outside the tree")))?;
    Ok((Element::new(x, y, z, level, t, mtl), f))
}

/// Whether `e` belongs to the pyramidal tree (used by tests and validation).
pub fn is_valid_element(e: &Element) -> bool {
    if e.level > crate::element::MAX_LEVEL {
        return false;
    }
    let low = e.len() - 1;
    if e.anchor().iter().any(|&c| !(0..ROOT_LEN).contains(&c) || c & low != 0) {
        return false;
    }
    if e.is_pyramid() {
        if e.min_tet_level != -1 || e.etype > 7 {
            return false;
        }
        let mut a = *e;
        while a.level > 0 {
            match sfc::parent(&a) {
                Ok(p) => a = p,
                Err(_) => return false,
            }
        }
        return a.etype == 6;
    }
    locate_min_tet_level(e.x, e.y, e.z, e.level, e.etype) == Some(e.min_tet_level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sfc::child;

    #[test]
    fn pyramid_base_neighbor_is_inverted_pyramid() {
        let r = Element::new(0, 0, 0, 0, 6, -1);
        let top = child(&r, 9).unwrap();
        let n = face_neighbor_same_tree(&top, 4).unwrap().unwrap();
        assert_eq!(n.neighbor.etype, 7);
        assert_eq!(n.neighbor.z, top.z - top.len());
        assert_eq!(n.dual_face, 4);
        assert!(face_neighbor_same_tree(&r, 4).unwrap().is_none());
    }

    #[test]
    fn valid_faces_of_child_one() {
        let r = Element::new(0, 0, 0, 0, 6, -1);
        let t = child(&r, 1).unwrap();
        assert!(!tet_touches_pyramid(&t, 1).unwrap());
        for f in [0, 2, 3] {
            assert!(tet_touches_pyramid(&t, f).unwrap());
        }
    }

    #[test]
    fn zero_triangle_extrudes_to_pyramid() {
        for level in 0..4 {
            let (e, f) = extrude_from_face(&FaceElement::triangle(0, 0, level, 0), 2).unwrap();
            assert!(e.is_pyramid());
            assert_eq!(f, 2);
        }
    }
}
