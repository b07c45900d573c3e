use alloc::vec::Vec;

use crate::linalg::{hermitian_eigen, is_positive_semidefinite, DenseMatrix};
use crate::qops::QOperator;
use crate::{Error, Result, C64};

/// A density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DenseMatrix,
}

impl DensityMatrix {
    pub const TRACE_TOL: f64 = 1e-10;
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = 1e-8;

    /// Validates trace, Hermiticity and positivity.
    pub fn new(m: DenseMatrix) -> Result<Self> {
        let rho = Self { m };
        rho.check(Self::TRACE_TOL, Self::HERMITIAN_TOL, Self::POSITIVITY_TOL)?;
        Ok(rho)
    }

    /// No validation; used for propagated states whose invariants are checked
    /// by the caller.
    pub fn new_unchecked(m: DenseMatrix) -> Self {
        Self { m }
    }

    /// `|index⟩⟨index|`.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidInput("basis index out of range".into()));
        }
        let mut m = DenseMatrix::zeros(dim, dim);
        m[(index, index)] = C64::new(1.0, 0.0);
        Ok(Self { m })
    }

    /// `|ψ⟩⟨ψ|` with `ψ` normalized.
    pub fn from_ket(psi: &[C64]) -> Result<Self> {
        let norm = crate::math::sqrt(psi.iter().map(|z| z.norm_sqr()).sum::<f64>());
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidInput("state vector has zero or invalid norm".into()));
        }
        let n = psi.len();
        Ok(Self {
            m: DenseMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj() / (norm * norm)),
        })
    }

    /// Uniform mixture over the listed basis states.
    pub fn mixture(dim: usize, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() || indices.iter().any(|&i| i >= dim) {
            return Err(Error::InvalidInput("invalid mixture support".into()));
        }
        let mut m = DenseMatrix::zeros(dim, dim);
        let w = 1.0 / indices.len() as f64;
        for &i in indices {
            m[(i, i)] += C64::new(w, 0.0);
        }
        Ok(Self { m })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let all: Vec<usize> = (0..dim).collect();
        Self::mixture(dim, &all).expect("non-empty")
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.m
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.m.hermitian_defect()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eigen(&self.m)?.values[0])
    }

    pub fn is_positive(&self, tol: f64) -> bool {
        is_positive_semidefinite(&self.m, tol)
    }

    pub fn check(&self, trace_tol: f64, herm_tol: f64, pos_tol: f64) -> Result<()> {
        if self.m.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("density matrix has non-finite entries".into()));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > trace_tol {
            return Err(Error::Domain(alloc::format!("trace {tr} differs from 1")));
        }
        let hd = self.hermitian_defect();
        if hd > herm_tol {
            return Err(Error::Domain(alloc::format!("not Hermitian (defect {hd:.3e})")));
        }
        if !self.is_positive(pos_tol) {
            return Err(Error::Domain("density matrix is not positive semidefinite".into()));
        }
        Ok(())
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    pub fn expect(&self, op: &QOperator) -> Result<C64> {
        expect(op, self)
    }
}

/// `Tr(O ρ)`.
pub fn expect(op: &QOperator, rho: &DensityMatrix) -> Result<C64> {
    let d = rho.dim();
    if op.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: op.dim(),
        });
    }
    let m = rho.matrix();
    let mut acc = C64::new(0.0, 0.0);
    match op {
        QOperator::Sparse(s) => {
            for i in 0..d {
                for (j, v) in s.row(i) {
                    acc += v * m[(j, i)];
                }
            }
        }
        QOperator::Dense(a) => {
            for i in 0..d {
                for j in 0..d {
                    acc += a[(i, j)] * m[(j, i)];
                }
            }
        }
    }
    Ok(acc)
}
