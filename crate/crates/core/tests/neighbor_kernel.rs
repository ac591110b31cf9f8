use hybrid_amr::neighbor::{collapse_to_face, extrude_from_face, face_neighbor_same_tree, face_shape, non_valid_face, tet_touches_pyramid};
use hybrid_amr::reference::{enumerate, face_element_from_polygon, face_polygon, polygon_on_root_face, NeighborOracle};
use hybrid_amr::{cube_len, shape_kernel, Element, FaceElement, FaceShape, TreeShape, MAX_LEVEL};
use proptest::prelude::*;

const H1: i32 = 1 << 20;

fn root6() -> Element {
    Element::new(0, 0, 0, 0, 6, -1)
}

#[test]
fn face_shape_examples() {
    assert_eq!(face_shape(&root6(), 4).unwrap(), FaceShape::Quadrilateral);
    assert_eq!(face_shape(&root6(), 0).unwrap(), FaceShape::Triangle);
    assert_eq!(face_shape(&Element::new(0, 0, 0, 1, 2, 1), 3).unwrap(), FaceShape::Triangle);
    assert!(face_shape(&root6(), 5).is_err());
}

#[test]
fn child_one_has_one_non_valid_face() {
    let t = Element::new(H1, 0, 0, 1, 3, 1);
    assert_eq!(non_valid_face(&t).unwrap(), 1);
    assert!(!tet_touches_pyramid(&t, 1).unwrap());
    for f in [0, 2, 3] {
        assert!(tet_touches_pyramid(&t, f).unwrap());
    }
    assert!(tet_touches_pyramid(&Element::new(0, 0, 0, 1, 2, 1), 0).is_err());
}

#[test]
fn pyramid_neighbor_examples() {
    let k = shape_kernel(TreeShape::Pyramid);
    let c9 = k.child(&root6(), 9).unwrap();
    let h = c9.len();
    let n = face_neighbor_same_tree(&c9, 4).unwrap().unwrap();
    assert_eq!((n.neighbor, n.dual_face), (Element::new(c9.x, c9.y, c9.z - h, 1, 7, -1), 4));
    let c2 = k.child(&root6(), 2).unwrap();
    let n = face_neighbor_same_tree(&c2, 0).unwrap().unwrap();
    assert_eq!((n.neighbor.anchor(), n.neighbor.etype, n.dual_face), (c2.anchor(), 3, 2));
    assert!(face_neighbor_same_tree(&c9, 0).unwrap().is_none());
    // Faces of the root lie on the tree boundary.
    for f in 0..5 {
        assert!(face_neighbor_same_tree(&root6(), f).unwrap().is_none());
    }
}

#[test]
fn neighbors_are_reciprocal_and_follow_the_shape_law() {
    let tree = enumerate(TreeShape::Pyramid, 3).unwrap();
    for level in &tree.levels {
        for e in level {
            for f in 0..if e.is_pyramid() { 5 } else { 4 } {
                let Some(n) = face_neighbor_same_tree(e, f).unwrap() else { continue };
                let back = face_neighbor_same_tree(&n.neighbor, n.dual_face).unwrap().unwrap();
                assert_eq!((back.neighbor, back.dual_face), (*e, f));
                if e.is_pyramid() {
                    if f == 4 {
                        assert!(n.neighbor.is_pyramid() && n.neighbor.etype != e.etype);
                    } else {
                        assert!(matches!(n.neighbor.etype, 0 | 3));
                    }
                }
            }
        }
    }
}

#[test]
fn valid_faces_of_tetrahedral_children() {
    let tree = enumerate(TreeShape::Pyramid, 3).unwrap();
    for level in &tree.levels[1..] {
        for t in level.iter().filter(|e| !e.is_pyramid() && e.min_tet_level as u8 == e.level) {
            let nv = non_valid_face(t).unwrap();
            let failing: Vec<usize> = (0..4).filter(|&f| !tet_touches_pyramid(t, f).unwrap()).collect();
            assert_eq!(failing, vec![nv], "{t:?}");
        }
    }
}

#[test]
fn pyramid_touch_matches_the_oracle_to_level_four() {
    let tree = enumerate(TreeShape::Pyramid, 4).unwrap();
    for l in 1..=4 {
        let oracle = NeighborOracle::new(&tree, l);
        for t in oracle.elements().iter().filter(|e| matches!(e.etype, 0 | 3)) {
            for f in 0..4 {
                if let Some((n, _)) = oracle.neighbor(t, f) {
                    assert_eq!(tet_touches_pyramid(t, f).unwrap(), n.is_pyramid(), "{t:?} face {f}");
                }
            }
        }
    }
}

#[test]
fn collapse_examples() {
    assert_eq!(collapse_to_face(&root6(), 4).unwrap(), FaceElement::quad(0, 0, 0));
    // Child 1 meets a pyramidal sibling across face 0 and the root face y = z across face 1.
    assert!(collapse_to_face(&Element::new(H1, 0, 0, 1, 3, 1), 0).is_err());
    assert_eq!(collapse_to_face(&Element::new(H1, 0, 0, 1, 3, 1), 1).unwrap(), FaceElement::triangle(H1, 0, 1, 1));
    assert_eq!(shape_kernel(TreeShape::Pyramid).root_face(&Element::new(H1, 0, 0, 1, 3, 1), 1).unwrap(), Some(2));
    // Tetrahedra of type 0 or 3 collapse to type-1 triangles.
    let tree = enumerate(TreeShape::Pyramid, 2).unwrap();
    for e in tree.levels.iter().flatten().filter(|e| !e.is_pyramid()) {
        for f in 0..4 {
            if let Ok(face) = collapse_to_face(e, f) {
                assert_eq!(face.ftype == 1, matches!(e.etype, 0 | 3), "{e:?} face {f}");
            }
        }
    }
}

#[test]
fn extrude_examples() {
    for l in 0..=4 {
        let (e, f) = extrude_from_face(&FaceElement::triangle(0, 0, l, 0), 2).unwrap();
        assert!(e.is_pyramid() && f == 2);
    }
    // The only level-1 triangle of type 1 sits at (h, 0).
    let (e, _) = extrude_from_face(&FaceElement::triangle(H1, 0, 1, 1), 0).unwrap();
    assert_eq!((e.is_pyramid(), e.etype), (false, 0));
    assert!(extrude_from_face(&FaceElement::triangle(0, H1, 1, 0), 0).is_err());
    assert!(extrude_from_face(&FaceElement::quad(0, 0, 0), 1).is_err());
}

#[test]
fn level_two_triangles_on_face_two_match_the_geometry() {
    let tree = enumerate(TreeShape::Pyramid, 2).unwrap();
    let mut seen = 0;
    for e in &tree.levels[2] {
        for f in 0..if e.is_pyramid() { 5 } else { 4 } {
            let Some((2, uv)) = polygon_on_root_face(TreeShape::Pyramid, &face_polygon(TreeShape::Pyramid, e, f)) else { continue };
            let face = face_element_from_polygon(&uv, 2).unwrap();
            if face.ftype == 0 {
                seen += 1;
                assert_eq!(extrude_from_face(&face, 2).unwrap(), (*e, f));
            }
        }
    }
    // A level-2 triangle split into 16 has 10 triangles of type 0.
    assert_eq!(seen, 10);
}

fn path() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..10, 1..=MAX_LEVEL as usize)
}

fn descend(path: &[usize]) -> Element {
    let k = shape_kernel(TreeShape::Pyramid);
    path.iter().fold(k.root(), |e, &c| k.child(&e, c % k.num_children(&e)).unwrap())
}

proptest! {
    #[test]
    fn deep_neighbors_are_reciprocal(p in path(), f in 0usize..5) {
        let e = descend(&p);
        let f = f % if e.is_pyramid() { 5 } else { 4 };
        match face_neighbor_same_tree(&e, f).unwrap() {
            Some(n) => {
                prop_assert!(hybrid_amr::neighbor::is_valid_element(&n.neighbor));
                let back = face_neighbor_same_tree(&n.neighbor, n.dual_face).unwrap().unwrap();
                prop_assert_eq!((back.neighbor, back.dual_face), (e, f));
            }
            None => {
                let rf = shape_kernel(TreeShape::Pyramid).root_face(&e, f).unwrap();
                prop_assert!(rf.is_some());
                let face = collapse_to_face(&e, f).unwrap();
                prop_assert_eq!(extrude_from_face(&face, rf.unwrap()).unwrap(), (e, f));
            }
        }
    }

    #[test]
    fn deep_boundary_triangles_follow_the_bitwise_rule(level in 1u8..=MAX_LEVEL, a in any::<u32>(), b in any::<u32>(), rf in 0usize..4) {
        let h = cube_len(level);
        let n = 1u32 << level;
        let (i, j) = (a % n, b % n);
        let (u, v) = (i.max(j) as i32 * h, i.min(j) as i32 * h);
        let (e, f) = extrude_from_face(&FaceElement::triangle(u, v, level, 0), rf).unwrap();
        prop_assert_eq!(e.is_pyramid(), v & u == v);
        prop_assert_eq!(collapse_to_face(&e, f).unwrap(), FaceElement::triangle(u, v, level, 0));
    }
}
