use crate::element::{cube_len, Element, FaceElement, FaceShape, NeighborResult, TreeShape, Vertices, MAX_LEVEL, ROOT_LEN};
use crate::error::{domain, AmrError, Result};
use crate::kernel::{check_face, fill_digits, ElementKernel};

/// Plain 3D Morton kernel. Faces are numbered x-, x+, y-, y+, z-, z+.
#[derive(Clone, Copy, Debug, Default)]
pub struct HexKernel;

const FACE_AXIS: [usize; 6] = [0, 0, 1, 1, 2, 2];
/// The two in-face coordinates of each face, as (u, v) axes.
const FACE_UV: [(usize, usize); 6] = [(1, 2), (1, 2), (0, 2), (0, 2), (0, 1), (0, 1)];

impl ElementKernel for HexKernel {
    fn shape(&self) -> TreeShape {
        TreeShape::Hexahedron
    }

    fn root(&self) -> Element {
        Element::new(0, 0, 0, 0, 0, 0)
    }

    fn num_children(&self, _e: &Element) -> usize {
        8
    }

    fn num_faces(&self, _e: &Element) -> usize {
        6
    }

    fn child(&self, e: &Element, i: usize) -> Result<Element> {
        if e.level >= MAX_LEVEL {
            return Err(AmrError::LevelOutOfRange { level: e.level as u32 + 1, max: MAX_LEVEL as u32 });
        }
        if i >= 8 {
            return Err(AmrError::ChildOutOfRange { index: i, count: 8 });
        }
        let h = cube_len(e.level + 1);
        Ok(Element::new(
            e.x + h * (i & 1) as i32,
            e.y + h * ((i >> 1) & 1) as i32,
            e.z + h * ((i >> 2) & 1) as i32,
            e.level + 1,
            0,
            0,
        ))
    }

    fn parent(&self, e: &Element) -> Result<Element> {
        if e.level == 0 {
            return domain("the root has no parent");
        }
        let mask = !cube_len(e.level);
        Ok(Element::new(e.x & mask, e.y & mask, e.z & mask, e.level - 1, 0, 0))
    }

    fn local_index(&self, e: &Element) -> Result<usize> {
        if e.level == 0 {
            return domain("the root has no local index");
        }
        Ok(e.cube_id_at(e.level) as usize)
    }

    fn sfc_index(&self, e: &Element) -> u128 {
        (1..=e.level).fold(0u128, |acc, j| acc | (e.cube_id_at(j) as u128) << (3 * (MAX_LEVEL - j) as u32))
    }

    fn num_descendants_at_level(&self, e: &Element, level: u8) -> Result<u128> {
        if level < e.level || level > MAX_LEVEL {
            return domain(format!("level {level} is not a descendant level of a level {} element", e.level));
        }
        Ok(1u128 << (3 * (level - e.level) as u32))
    }

    fn vertex_coords(&self, e: &Element) -> Vertices {
        let h = e.len() as i64;
        (0..8)
            .map(|i| {
                [
                    e.x as i64 + h * (i & 1) as i64,
                    e.y as i64 + h * ((i >> 1) & 1) as i64,
                    e.z as i64 + h * ((i >> 2) & 1) as i64,
                ]
            })
            .collect()
    }

    fn face_shape(&self, _e: &Element, f: usize) -> Result<FaceShape> {
        check_face(f, 6)?;
        Ok(FaceShape::Quadrilateral)
    }

    fn face_neighbor(&self, e: &Element, f: usize) -> Result<Option<NeighborResult>> {
        check_face(f, 6)?;
        let h = e.len();
        let mut c = e.anchor();
        c[FACE_AXIS[f]] += if f % 2 == 0 { -h } else { h };
        if c.iter().any(|&v| !(0..ROOT_LEN).contains(&v)) {
            return Ok(None);
        }
        Ok(Some(NeighborResult {
            neighbor: Element::new(c[0], c[1], c[2], e.level, 0, 0),
            dual_face: f ^ 1,
            same_tree: true,
        }))
    }

    fn root_face(&self, e: &Element, f: usize) -> Result<Option<usize>> {
        check_face(f, 6)?;
        let c = e.anchor()[FACE_AXIS[f]];
        let on = if f % 2 == 0 { c == 0 } else { c + e.len() == ROOT_LEN };
        Ok(on.then_some(f))
    }

    fn collapse_to_face(&self, e: &Element, f: usize) -> Result<FaceElement> {
        if self.root_face(e, f)?.is_none() {
            return Err(AmrError::NotOnRootFace { face: f });
        }
        let a = e.anchor();
        let (u, v) = FACE_UV[f];
        Ok(FaceElement::quad(a[u], a[v], e.level))
    }

    fn extrude_from_face(&self, face: &FaceElement, root_face: usize) -> Result<(Element, usize)> {
        check_face(root_face, 6)?;
        if face.shape != FaceShape::Quadrilateral || !face.is_inside_root() {
            return domain(format!("{face:?} is not a face element of hexahedron root face {root_face}"));
        }
        let h = cube_len(face.level);
        let mut a = [0i32; 3];
        let (u, v) = FACE_UV[root_face];
        a[u] = face.x;
        a[v] = face.y;
        a[FACE_AXIS[root_face]] = if root_face % 2 == 0 { 0 } else { ROOT_LEN - h };
        Ok((Element::new(a[0], a[1], a[2], face.level, 0, 0), root_face))
    }

    fn first_key(&self, e: &Element) -> u128 {
        self.sfc_index(e)
    }

    fn last_key(&self, e: &Element) -> u128 {
        fill_digits(self.sfc_index(e), e.level, 7, 3)
    }

    fn ancestor(&self, e: &Element, level: u8) -> Result<Element> {
        if level > e.level {
            return domain(format!("ancestor level {level} exceeds element level {}", e.level));
        }
        let mask = !(cube_len(level) - 1);
        Ok(Element::new(e.x & mask, e.y & mask, e.z & mask, level, 0, 0))
    }
}
