//! Fixed-spectrum analysis of multi-channel linear systems.
//!
//! The crate decides which eigenvalues of `A` cannot be moved by any
//! decentralized static output feedback (the fixed modes), using a rank
//! test on bordered matrix pencils, and cross-checks every verdict against
//! randomized feedback and against the generic rank of the closed loop.
//! The generic-rank tools (matroid intersection, subset min-formula and
//! parameter sampling) are exposed on their own in [`grank`].

pub mod campaign;
pub mod cli;
pub mod error;
pub mod fixed;
pub mod grank;
pub mod instances;
pub mod io;
pub mod linalg;
pub mod sampling;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, RankTolerance};
pub use num_complex::Complex64;
