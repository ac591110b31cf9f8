use super::{Forest, LocalTree};
use crate::element::{Element, TreeShape, MAX_LEVEL};
use crate::error::Result;
use crate::kernel::shape_kernel;
use crate::procgroup::Comm;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptAction {
    Refine,
    Keep,
    Coarsen,
}

/// What the adapt callback sees for one leaf.
#[derive(Debug, Clone, Copy)]
pub struct AdaptContext<'a> {
    pub tree: usize,
    pub shape: TreeShape,
    pub element: &'a Element,
    /// The complete family starting at `element`, when it is present on this rank.
    pub family: Option<&'a [Element]>,
}

/// Refine or coarsen leaves in one pass over every local tree.
///
/// Leaves are visited in curve order. When a leaf starts a complete family held by this
/// rank the callback sees that family and may return [`AdaptAction::Coarsen`]; coarsening
/// requested for any other leaf is ignored. Refinement past the maximal level is ignored.
/// `repeat` runs that many passes.
pub fn forest_adapt<F>(forest: &Forest, repeat: usize, comm: &mut Comm<'_>, mut callback: F) -> Result<Forest>
where
    F: FnMut(&AdaptContext<'_>) -> AdaptAction,
{
    let mut trees = forest.trees.clone();
    for _ in 0..repeat {
        trees = trees.into_iter().map(|t| adapt_tree(t, &mut callback)).collect();
    }
    Forest::assemble(forest.cmesh.clone(), trees, forest.first_tree, comm)
}

fn adapt_tree<F>(tree: LocalTree, callback: &mut F) -> LocalTree
where
    F: FnMut(&AdaptContext<'_>) -> AdaptAction,
{
    let k = shape_kernel(tree.shape);
    let leaves = &tree.leaves;
    let mut out = Vec::with_capacity(leaves.len());
    let mut i = 0;
    while i < leaves.len() {
        let e = &leaves[i];
        let family = (e.level > 0 && k.local_index(e).ok() == Some(0))
            .then(|| {
                let parent = k.parent(e).ok()?;
                let n = k.num_children(&parent);
                let fam = leaves.get(i..i + n)?;
                k.is_family(fam).then_some(fam)
            })
            .flatten();
        let ctx = AdaptContext { tree: tree.id, shape: tree.shape, element: e, family };
        match callback(&ctx) {
            AdaptAction::Coarsen if family.is_some() => {
                out.push(k.parent(e).expect("family has a parent"));
                i += family.map_or(1, <[Element]>::len);
                continue;
            }
            AdaptAction::Refine if e.level < MAX_LEVEL => {
                out.extend((0..k.num_children(e)).map(|c| k.child(e, c).expect("child below maximal level")));
            }
            _ => out.push(*e),
        }
        i += 1;
    }
    LocalTree { leaves: out, ..tree }
}
