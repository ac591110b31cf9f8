//! Coarse meshes: trees with a root shape and face-to-face links.
//!
//! Text format, one record per line:
//!
//! ```text
//! # comment
//! tree 0 hex
//! tree 1 pyramid
//! link 0 5 1 4
//! ```
//!
//! A link joins face `5` of tree `0` with face `4` of tree `1` in both directions, with the
//! identity map between the two root-face coordinate systems. An optional trailing
//! `orientation 0` is accepted; any other orientation is rejected.

use std::fmt::Write as _;

use crate::element::TreeShape;
use crate::error::{AmrError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoarseMesh {
    shapes: Vec<TreeShape>,
    links: Vec<Vec<Option<(usize, usize)>>>,
}

fn parse_err(line: usize, message: impl Into<String>) -> AmrError {
    AmrError::CmeshParse { line, message: message.into() }
}

impl CoarseMesh {
    /// A mesh of unconnected trees.
    pub fn new(shapes: Vec<TreeShape>) -> Self {
        let links = shapes.iter().map(|s| vec![None; s.num_faces()]).collect();
        CoarseMesh { shapes, links }
    }

    /// Join face `fa` of tree `a` with face `fb` of tree `b`.
    pub fn add_link(&mut self, a: usize, fa: usize, b: usize, fb: usize) -> Result<()> {
        let k = self.shapes.len();
        for (t, f) in [(a, fa), (b, fb)] {
            if t >= k {
                return Err(AmrError::CmeshInvalid(format!("link {a}:{fa} - {b}:{fb} refers to missing tree {t}")));
            }
            let nf = self.shapes[t].num_faces();
            if f >= nf {
                return Err(AmrError::CmeshInvalid(format!(
                    "link {a}:{fa} - {b}:{fb}: tree {t} ({}) has only {nf} faces",
                    self.shapes[t]
                )));
            }
        }
        if (a, fa) == (b, fb) {
            return Err(AmrError::CmeshInvalid(format!("face {fa} of tree {a} is linked to itself")));
        }
        let (sa, sb) = (self.shapes[a].face_shape(fa), self.shapes[b].face_shape(fb));
        if sa != sb {
            return Err(AmrError::CmeshInvalid(format!(
                "link {a}:{fa} - {b}:{fb} joins a {sa:?} face with a {sb:?} face"
            )));
        }
        for ((t, f), other) in [((a, fa), (b, fb)), ((b, fb), (a, fa))] {
            match self.links[t][f] {
                Some(o) if o != other => {
                    return Err(AmrError::CmeshInvalid(format!(
                        "face {f} of tree {t} is linked to both {}:{} and {}:{}",
                        o.0, o.1, other.0, other.1
                    )))
                }
                _ => {}
            }
        }
        self.links[a][fa] = Some((b, fb));
        self.links[b][fb] = Some((a, fa));
        Ok(())
    }

    pub fn num_trees(&self) -> usize {
        self.shapes.len()
    }

    pub fn shape(&self, tree: usize) -> TreeShape {
        self.shapes[tree]
    }

    pub fn shapes(&self) -> &[TreeShape] {
        &self.shapes
    }

    /// The tree and face across face `face` of `tree`, or `None` on the domain boundary.
    pub fn link(&self, tree: usize, face: usize) -> Option<(usize, usize)> {
        self.links[tree].get(face).copied().flatten()
    }

    pub fn num_boundary_faces(&self, tree: usize) -> usize {
        self.links[tree].iter().filter(|l| l.is_none()).count()
    }

    /// Checks that every link is involutive and joins faces of equal shape.
    pub fn validate(&self) -> Result<()> {
        for (t, faces) in self.links.iter().enumerate() {
            for (f, l) in faces.iter().enumerate() {
                let Some((u, g)) = *l else { continue };
                if u >= self.shapes.len() || g >= self.shapes[u].num_faces() {
                    return Err(AmrError::CmeshInvalid(format!("face {f} of tree {t} links to missing face {g} of tree {u}")));
                }
                if self.links[u][g] != Some((t, f)) {
                    return Err(AmrError::CmeshInvalid(format!("link {t}:{f} -> {u}:{g} is not involutive")));
                }
                if self.shapes[t].face_shape(f) != self.shapes[u].face_shape(g) {
                    return Err(AmrError::CmeshInvalid(format!("link {t}:{f} -> {u}:{g} joins faces of different shape")));
                }
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut shapes: Vec<Option<TreeShape>> = Vec::new();
        let mut links = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| s.parse::<usize>().map_err(|_| parse_err(line_no, format!("expected a non-negative integer, got {s:?}")));
            match tok[0] {
                "tree" => {
                    if tok.len() != 3 {
                        return Err(parse_err(line_no, "expected `tree <id> <hex|tet|pyramid>`"));
                    }
                    let id = num(tok[1])?;
                    let shape = TreeShape::from_name(tok[2]).ok_or_else(|| parse_err(line_no, format!("unknown tree shape {:?}", tok[2])))?;
                    if shapes.len() <= id {
                        shapes.resize(id + 1, None);
                    }
                    if shapes[id].replace(shape).is_some() {
                        return Err(parse_err(line_no, format!("tree {id} declared twice")));
                    }
                }
                "link" => {
                    let orientation_ok = match tok.len() {
                        5 => true,
                        7 if tok[5] == "orientation" => tok[6] == "0",
                        _ => return Err(parse_err(line_no, "expected `link <tree> <face> <tree> <face>`")),
                    };
                    if !orientation_ok {
                        return Err(parse_err(line_no, format!("only identity orientation is supported, got {}", tok[6])));
                    }
                    links.push((line_no, num(tok[1])?, num(tok[2])?, num(tok[3])?, num(tok[4])?));
                }
                other => return Err(parse_err(line_no, format!("unknown record {other:?}"))),
            }
        }
        let shapes = shapes
            .into_iter()
            .enumerate()
            .map(|(id, s)| s.ok_or_else(|| AmrError::CmeshInvalid(format!("tree ids must be dense, tree {id} is missing"))))
            .collect::<Result<Vec<_>>>()?;
        if shapes.is_empty() {
            return Err(AmrError::CmeshInvalid("the mesh has no trees".into()));
        }
        let mut mesh = CoarseMesh::new(shapes);
        for (line, a, fa, b, fb) in links {
            mesh.add_link(a, fa, b, fb).map_err(|e| match e {
                AmrError::CmeshInvalid(m) => parse_err(line, m),
                other => other,
            })?;
        }
        Ok(mesh)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (t, shape) in self.shapes.iter().enumerate() {
            let _ = writeln!(s, "tree {t} {shape}");
        }
        for (t, faces) in self.links.iter().enumerate() {
            for (f, l) in faces.iter().enumerate() {
                if let Some((u, g)) = *l {
                    if (t, f) < (u, g) {
                        let _ = writeln!(s, "link {t} {f} {u} {g}");
                    }
                }
            }
        }
        s
    }

    pub const BUILTIN_NAMES: [&'static str; 9] = ["hex", "tet", "pyramid", "hex2", "tet2", "pyramid2", "pyramids8", "hybrid", "hybrid40"];

    /// Built-in meshes, see [`CoarseMesh::BUILTIN_NAMES`].
    pub fn builtin(name: &str) -> Result<Self> {
        use TreeShape::*;
        let mut m;
        match name {
            "hex" => m = CoarseMesh::new(vec![Hexahedron]),
            "tet" => m = CoarseMesh::new(vec![Tetrahedron]),
            "pyramid" => m = CoarseMesh::new(vec![Pyramid]),
            "hex2" => {
                m = CoarseMesh::new(vec![Hexahedron; 2]);
                m.add_link(0, 1, 1, 0)?;
            }
            "tet2" => {
                m = CoarseMesh::new(vec![Tetrahedron; 2]);
                m.add_link(0, 0, 1, 0)?;
            }
            "pyramid2" => {
                m = CoarseMesh::new(vec![Pyramid; 2]);
                m.add_link(0, 1, 1, 0)?;
            }
            "pyramids8" => {
                m = CoarseMesh::new(vec![Pyramid; 8]);
                for t in (0..8).step_by(2) {
                    m.add_link(t, 4, t + 1, 4)?;
                }
                for t in 0..7 {
                    m.add_link(t, 1, t + 1, 0)?;
                    m.add_link(t, 3, t + 1, 2)?;
                }
            }
            "hybrid" => {
                m = CoarseMesh::new(vec![Hexahedron, Pyramid, Tetrahedron, Tetrahedron]);
                m.add_link(0, 5, 1, 4)?;
                m.add_link(1, 1, 2, 1)?;
                m.add_link(1, 3, 3, 0)?;
                m.add_link(2, 2, 3, 3)?;
            }
            "hybrid40" => {
                let mut shapes = vec![Hexahedron, Hexahedron, Pyramid, Pyramid];
                shapes.extend(std::iter::repeat(Tetrahedron).take(36));
                m = CoarseMesh::new(shapes);
                m.add_link(0, 1, 1, 0)?;
                m.add_link(0, 5, 2, 4)?;
                m.add_link(1, 5, 3, 4)?;
                for f in 0..4 {
                    m.add_link(2, f, 4 + f, 0)?;
                    m.add_link(3, f, 8 + f, 0)?;
                }
                for t in 4..39 {
                    m.add_link(t, 1, t + 1, 2)?;
                }
                for t in (4..40).step_by(2) {
                    m.add_link(t, 3, t + 1, 3)?;
                }
            }
            other => {
                return Err(AmrError::CmeshInvalid(format!(
                    "unknown builtin mesh {other:?}, expected one of {}",
                    Self::BUILTIN_NAMES.join(", ")
                )))
            }
        }
        m.validate()?;
        Ok(m)
    }
}
