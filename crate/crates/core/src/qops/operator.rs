use alloc::vec::Vec;

use crate::linalg::{CsrMatrix, DenseMatrix};
use crate::math::sqrt;
use crate::{Error, Result, C64};

/// A square complex operator in either dense or CSR storage.
///
/// Operations between two sparse operands stay sparse; anything involving a
/// dense operand produces a dense result.
#[derive(Debug, Clone, PartialEq)]
pub enum QOperator {
    Dense(DenseMatrix),
    Sparse(CsrMatrix),
}

impl QOperator {
    pub fn from_dense(m: DenseMatrix) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::InvalidInput(alloc::format!(
                "operator must be square with dim ≥ 1, got {}×{}",
                m.rows(),
                m.cols()
            )));
        }
        Ok(Self::Dense(m))
    }

    pub fn from_sparse(m: CsrMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidInput(alloc::format!(
                "operator must be square with dim ≥ 1, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self::Sparse(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self::Sparse(CsrMatrix::identity(dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::Sparse(CsrMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Dense(d) => d.rows(),
            Self::Sparse(s) => s.nrows(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match self {
            Self::Dense(d) => d[(i, j)],
            Self::Sparse(s) => s.get(i, j),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Self::Sparse(_))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Self::Dense(d) => d.clone(),
            Self::Sparse(s) => s.to_dense(),
        }
    }

    /// Sparse copy; dense operators drop their exact zeros.
    pub fn to_sparse(&self) -> CsrMatrix {
        match self {
            Self::Dense(d) => CsrMatrix::from_dense(d, 0.0),
            Self::Sparse(s) => s.clone(),
        }
    }

    pub fn dagger(&self) -> Self {
        match self {
            Self::Dense(d) => Self::Dense(d.adjoint()),
            Self::Sparse(s) => Self::Sparse(s.adjoint()),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        match self {
            Self::Dense(d) => Self::Dense(d.scale(s)),
            Self::Sparse(m) => Self::Sparse(m.scale(s)),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (Self::Sparse(a), Self::Sparse(b)) => Ok(Self::Sparse(a.add(b)?)),
            _ => Ok(Self::Dense(self.to_dense().add(&other.to_dense())?)),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (Self::Sparse(a), Self::Sparse(b)) => Ok(Self::Sparse(a.matmul(b)?)),
            _ => Ok(Self::Dense(self.to_dense().matmul(&other.to_dense())?)),
        }
    }

    /// max |A − A†|
    pub fn hermitian_defect(&self) -> f64 {
        match self {
            Self::Dense(d) => d.hermitian_defect(),
            Self::Sparse(s) => s.hermitian_defect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_dense().max_abs_diff(&other.to_dense())
    }
}

/// Kronecker product; `a` is the slow index.
pub fn kron(a: &QOperator, b: &QOperator) -> QOperator {
    match (a, b) {
        (QOperator::Sparse(x), QOperator::Sparse(y)) => QOperator::Sparse(x.kron(y)),
        _ => {
            let (x, y) = (a.to_dense(), b.to_dense());
            let (n1, n2) = (x.rows(), y.rows());
            QOperator::Dense(DenseMatrix::from_fn(n1 * n2, n1 * n2, |i, j| {
                x[(i / n2, j / n2)] * y[(i % n2, j % n2)]
            }))
        }
    }
}

/// Left-to-right Kronecker product of all factors (first factor slowest).
pub fn kron_all(factors: &[QOperator]) -> Option<QOperator> {
    let mut it = factors.iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, f| kron(&acc, f)))
}

pub fn dagger(a: &QOperator) -> QOperator {
    a.dagger()
}

/// Annihilation operator truncated at `cutoff` photons (dimension `cutoff + 1`).
pub fn annihilator(cutoff: usize) -> QOperator {
    let t: Vec<(usize, usize, C64)> = (1..=cutoff)
        .map(|n| (n - 1, n, C64::new(sqrt(n as f64), 0.0)))
        .collect();
    QOperator::Sparse(
        CsrMatrix::from_triplets(cutoff + 1, cutoff + 1, &t).expect("indices in range"),
    )
}
