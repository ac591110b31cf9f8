//! The per-shape element interface and the algorithms that only need its primitives.

use std::cmp::Ordering;

use crate::element::{Element, FaceElement, FaceShape, NeighborResult, TreeShape, Vertices, MAX_LEVEL};
use crate::error::{domain, AmrError, Result};
use crate::sfc::PyramidKernel;
use crate::standard::{HexKernel, TetKernel};

/// Element arithmetic for one tree shape.
///
/// Child numbers passed to [`ElementKernel::child`] are local (SFC) indices: child `i` is the
/// `i`-th child along the space-filling curve.
pub trait ElementKernel: Send + Sync {
    fn shape(&self) -> TreeShape;
    fn root(&self) -> Element;
    fn num_children(&self, e: &Element) -> usize;
    fn num_faces(&self, e: &Element) -> usize;
    fn child(&self, e: &Element, i: usize) -> Result<Element>;
    fn parent(&self, e: &Element) -> Result<Element>;
    /// Rank of `e` among its siblings in SFC order.
    fn local_index(&self, e: &Element) -> Result<usize>;
    /// SFC index of `e`, padded with zero digits below its level.
    fn sfc_index(&self, e: &Element) -> u128;
    fn num_descendants_at_level(&self, e: &Element, level: u8) -> Result<u128>;
    fn vertex_coords(&self, e: &Element) -> Vertices;
    fn face_shape(&self, e: &Element, f: usize) -> Result<FaceShape>;
    /// Same-level neighbor across face `f` inside the tree, `None` at the root boundary.
    fn face_neighbor(&self, e: &Element, f: usize) -> Result<Option<NeighborResult>>;
    /// The root face that face `f` of `e` lies on, if any.
    fn root_face(&self, e: &Element, f: usize) -> Result<Option<usize>>;
    /// Collapse face `f` of `e` (which must lie on the root boundary) to a face element in
    /// the coordinates of that root face.
    fn collapse_to_face(&self, e: &Element, f: usize) -> Result<FaceElement>;
    /// The element of this tree that has `face` as its face on `root_face`, and the number
    /// of that face.
    fn extrude_from_face(&self, face: &FaceElement, root_face: usize) -> Result<(Element, usize)>;

    fn compare(&self, a: &Element, b: &Element) -> Ordering {
        self.sfc_index(a).cmp(&self.sfc_index(b)).then(a.level.cmp(&b.level))
    }

    fn ancestor(&self, e: &Element, level: u8) -> Result<Element> {
        if level > e.level {
            return domain(format!("ancestor level {level} exceeds element level {}", e.level));
        }
        let mut a = *e;
        while a.level > level {
            a = self.parent(&a)?;
        }
        Ok(a)
    }

    /// Reflexive: every element is its own ancestor.
    fn is_ancestor(&self, a: &Element, d: &Element) -> bool {
        a.level <= d.level && self.ancestor(d, a.level).map(|x| x == *a).unwrap_or(false)
    }

    /// Rank of `e` among all elements of its level in this tree.
    fn linear_id(&self, e: &Element) -> u128 {
        let mut chain = Vec::with_capacity(e.level as usize + 1);
        let mut a = *e;
        chain.push(a);
        while a.level > 0 {
            a = self.parent(&a).expect("non-root element has a parent");
            chain.push(a);
        }
        let mut id = 0u128;
        for w in chain.windows(2).rev() {
            let (c, p) = (&w[0], &w[1]);
            let li = self.local_index(c).expect("non-root element has a local index");
            for k in 0..li {
                let sib = self.child(p, k).expect("sibling in range");
                id += self.num_descendants_at_level(&sib, e.level).expect("level ordered");
            }
        }
        id
    }

    fn element_from_linear_id(&self, level: u8, id: u128) -> Result<Element> {
        if level > MAX_LEVEL {
            return Err(AmrError::LevelOutOfRange { level: level as u32, max: MAX_LEVEL as u32 });
        }
        let root = self.root();
        let total = self.num_descendants_at_level(&root, level)?;
        if id >= total {
            return domain(format!("linear id {id} out of range for {total} elements at level {level}"));
        }
        let mut e = root;
        let mut rest = id;
        while e.level < level {
            let n = self.num_children(&e);
            let mut next = None;
            for k in 0..n {
                let c = self.child(&e, k)?;
                let cnt = self.num_descendants_at_level(&c, level)?;
                if rest < cnt {
                    next = Some(c);
                    break;
                }
                rest -= cnt;
            }
            e = next.expect("linear id inside the subtree");
        }
        Ok(e)
    }

    fn first_descendant(&self, e: &Element, level: u8) -> Result<Element> {
        check_descendant_level(e, level)?;
        let mut d = *e;
        while d.level < level {
            d = self.child(&d, 0)?;
        }
        Ok(d)
    }

    fn last_descendant(&self, e: &Element, level: u8) -> Result<Element> {
        check_descendant_level(e, level)?;
        let mut d = *e;
        while d.level < level {
            let n = self.num_children(&d);
            d = self.child(&d, n - 1)?;
        }
        Ok(d)
    }

    /// The element following `e` on the same level.
    fn successor(&self, e: &Element) -> Result<Element> {
        let level = e.level;
        let mut a = *e;
        while a.level > 0 {
            let p = self.parent(&a)?;
            let li = self.local_index(&a)?;
            if li + 1 < self.num_children(&p) {
                let sib = self.child(&p, li + 1)?;
                return self.first_descendant(&sib, level);
            }
            a = p;
        }
        domain("successor of the last element of its level")
    }

    /// True iff `elems` are exactly the children of one parent, in SFC order.
    fn is_family(&self, elems: &[Element]) -> bool {
        let Some(first) = elems.first() else { return false };
        if first.level == 0 {
            return false;
        }
        let Ok(p) = self.parent(first) else { return false };
        let n = self.num_children(&p);
        elems.len() == n && elems.iter().enumerate().all(|(i, e)| self.child(&p, i).map(|c| c == *e).unwrap_or(false))
    }

    /// SFC index of the first `MAX_LEVEL` descendant.
    fn first_key(&self, e: &Element) -> u128 {
        let d = self.first_descendant(e, MAX_LEVEL).expect("level in range");
        self.sfc_index(&d)
    }

    /// SFC index of the last `MAX_LEVEL` descendant.
    fn last_key(&self, e: &Element) -> u128 {
        let d = self.last_descendant(e, MAX_LEVEL).expect("level in range");
        self.sfc_index(&d)
    }
}

fn check_descendant_level(e: &Element, level: u8) -> Result<()> {
    if level > MAX_LEVEL {
        return Err(AmrError::LevelOutOfRange { level: level as u32, max: MAX_LEVEL as u32 });
    }
    if level < e.level {
        return domain(format!("descendant level {level} below element level {}", e.level));
    }
    Ok(())
}

static HEX: HexKernel = HexKernel;
static TET: TetKernel = TetKernel;
static PYRAMID: PyramidKernel = PyramidKernel;

/// The element kernel for a tree shape.
pub fn shape_kernel(shape: TreeShape) -> &'static dyn ElementKernel {
    match shape {
        TreeShape::Hexahedron => &HEX,
        TreeShape::Tetrahedron => &TET,
        TreeShape::Pyramid => &PYRAMID,
    }
}

/// Pad a partial SFC index below `level` with the same 6-bit digit on every lower level.
pub(crate) fn fill_digits(index: u128, level: u8, digit: u128, bits: u32) -> u128 {
    let mut k = index;
    for j in (level + 1)..=MAX_LEVEL {
        k |= digit << (bits * (MAX_LEVEL - j) as u32);
    }
    k
}

pub(crate) fn check_face(f: usize, count: usize) -> Result<()> {
    if f >= count {
        Err(AmrError::FaceOutOfRange { face: f, count })
    } else {
        Ok(())
    }
}
