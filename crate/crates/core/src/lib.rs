//! Forest-of-trees adaptive mesh refinement for hybrid meshes of hexahedra, tetrahedra and
//! pyramids, with a space-filling curve for pyramidal refinement trees.

pub mod bench;
pub mod element;
pub mod error;
pub mod forest;
pub mod kernel;
pub mod neighbor;
pub mod procgroup;
pub mod reference;
pub mod sfc;
pub mod standard;
pub mod vtk;

pub use element::{cube_len, Element, FaceElement, FaceShape, NeighborResult, Position, TreeShape, Vertices, MAX_LEVEL, ROOT_LEN};
pub use error::{AmrError, Result};
pub use kernel::{shape_kernel, ElementKernel};
pub use procgroup::{Comm, GroupError, GroupRun};
