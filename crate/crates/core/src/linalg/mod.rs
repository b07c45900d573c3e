//! Complex linear algebra used by the quantum model.
//!
//! Dense matrices are row-major. Sparse matrices are CSR with sorted column
//! indices and no duplicate entries.

mod csr;
mod dense;
mod eigen;
mod ordering;
mod sparse_lu;

pub use csr::CsrMatrix;
pub use dense::{DenseLu, DenseMatrix};
pub use eigen::{hermitian_eigen, is_positive_semidefinite, HermitianEigen};
pub use ordering::minimum_degree;
pub use sparse_lu::SparseLu;

use crate::C64;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };
