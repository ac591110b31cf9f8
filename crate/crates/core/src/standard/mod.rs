//! Kernels for pure hexahedral (3D Morton) and pure tetrahedral (Bey/TM-index) trees.

mod hex;
pub(crate) mod tet;

pub use hex::HexKernel;
pub use tet::TetKernel;
