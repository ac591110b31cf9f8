//! Element, face element and tree-shape value types shared by all kernels.

use std::fmt;

use arrayvec::ArrayVec;

/// Maximal refinement level. Anchor coordinates live in `[0, 2^MAX_LEVEL)`.
pub const MAX_LEVEL: u8 = 21;

/// Edge length of every root element in integer reference coordinates.
pub const ROOT_LEN: i32 = 1 << MAX_LEVEL;

/// Edge length of the enclosing sub-cube of an element at `level`.
#[inline]
pub fn cube_len(level: u8) -> i32 {
    debug_assert!(level <= MAX_LEVEL);
    1 << (MAX_LEVEL - level)
}

/// Corner coordinates of an element, 4 (tet), 5 (pyramid) or 8 (hex) entries.
pub type Vertices = ArrayVec<[i64; 3], 8>;

/// Shape of a coarse-mesh tree, i.e. of its root element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeShape {
    Hexahedron,
    Tetrahedron,
    Pyramid,
}

impl TreeShape {
    pub const ALL: [TreeShape; 3] = [TreeShape::Hexahedron, TreeShape::Tetrahedron, TreeShape::Pyramid];

    pub fn name(self) -> &'static str {
        match self {
            TreeShape::Hexahedron => "hex",
            TreeShape::Tetrahedron => "tet",
            TreeShape::Pyramid => "pyramid",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "hex" | "hexahedron" => Some(TreeShape::Hexahedron),
            "tet" | "tetrahedron" => Some(TreeShape::Tetrahedron),
            "pyramid" | "pyra" => Some(TreeShape::Pyramid),
            _ => None,
        }
    }

    /// Number of faces of the root element.
    pub fn num_faces(self) -> usize {
        match self {
            TreeShape::Hexahedron => 6,
            TreeShape::Tetrahedron => 4,
            TreeShape::Pyramid => 5,
        }
    }

    /// Shape of root face `f`.
    pub fn face_shape(self, f: usize) -> FaceShape {
        match (self, f) {
            (TreeShape::Hexahedron, _) | (TreeShape::Pyramid, 4) => FaceShape::Quadrilateral,
            _ => FaceShape::Triangle,
        }
    }
}

impl fmt::Display for TreeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Shape of a (two-dimensional) face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FaceShape {
    Triangle,
    Quadrilateral,
}

/// A volume element inside one refinement tree.
///
/// `etype` is 0..=5 for tetrahedra and 6/7 for pyramids. Hexahedra carry type 0.
/// `min_tet_level` is the level of the lowest tetrahedral ancestor inside a pyramidal
/// tree and -1 for pyramids. Elements of pure hexahedral or tetrahedral trees carry 0.
/// The derived `Ord` is a plain field order for use in sets; curve order comes from the
/// kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    pub x: i32,
    pub y: i32,
    pub z: i32,
    pub level: u8,
    pub etype: u8,
    pub min_tet_level: i8,
}

impl Element {
    pub const fn new(x: i32, y: i32, z: i32, level: u8, etype: u8, min_tet_level: i8) -> Self {
        Element { x, y, z, level, etype, min_tet_level }
    }

    #[inline]
    pub fn is_pyramid(&self) -> bool {
        self.etype >= 6
    }

    #[inline]
    pub fn anchor(&self) -> [i32; 3] {
        [self.x, self.y, self.z]
    }

    /// Edge length of the enclosing sub-cube.
    #[inline]
    pub fn len(&self) -> i32 {
        cube_len(self.level)
    }

    /// Three-bit position of the sub-cube at level `j` inside its level `j - 1` parent cube.
    /// Bit 0 is x, bit 1 is y, bit 2 is z.
    #[inline]
    pub(crate) fn cube_id_at(&self, j: u8) -> u8 {
        if j == 0 {
            return 0;
        }
        let h = cube_len(j);
        (((self.x & h) != 0) as u8) | ((((self.y & h) != 0) as u8) << 1) | ((((self.z & h) != 0) as u8) << 2)
    }
}

/// A face element on the boundary of a root element, expressed in the two-dimensional
/// coordinates of that root face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FaceElement {
    pub shape: FaceShape,
    pub x: i32,
    pub y: i32,
    pub level: u8,
    /// Triangle type (0 or 1). Quadrilaterals have no type and carry 0.
    pub ftype: u8,
}

impl FaceElement {
    pub fn triangle(x: i32, y: i32, level: u8, ftype: u8) -> Self {
        FaceElement { shape: FaceShape::Triangle, x, y, level, ftype }
    }

    pub fn quad(x: i32, y: i32, level: u8) -> Self {
        FaceElement { shape: FaceShape::Quadrilateral, x, y, level, ftype: 0 }
    }

    /// Whether the face element lies inside the reference root face (a type-0 triangle or
    /// the unit square, scaled to `ROOT_LEN`).
    pub fn is_inside_root(&self) -> bool {
        if self.level > MAX_LEVEL {
            return false;
        }
        let h = cube_len(self.level);
        let in_range = |c: i32| (0..ROOT_LEN).contains(&c) && c % h == 0;
        if !in_range(self.x) || !in_range(self.y) {
            return false;
        }
        match self.shape {
            FaceShape::Quadrilateral => self.ftype == 0,
            FaceShape::Triangle => match self.ftype {
                0 => self.x >= self.y,
                1 => self.x >= self.y + h,
                _ => false,
            },
        }
    }
}

/// Same-level face neighbor of an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NeighborResult {
    pub neighbor: Element,
    /// Face of the neighbor that touches the query element.
    pub dual_face: usize,
    pub same_tree: bool,
}

/// Position of an element on the space-filling curve of its tree: the index of its first
/// descendant at `MAX_LEVEL`. Ordering by `(tree, key)` is the global forest order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub tree: u64,
    pub key: u128,
}
