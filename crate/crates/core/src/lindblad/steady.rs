use alloc::vec;
use alloc::vec::Vec;

use super::liouvillian::{component_labels, sector_of};
use super::{DensityMatrix, Liouvillian};
use crate::linalg::{minimum_degree, CsrMatrix, DenseMatrix, SparseLu};
use crate::{Error, Result, C64};

const NONE: usize = usize::MAX;
const RESIDUAL_TOL: f64 = 1e-9;
const PIVOT_RATIO_MIN: f64 = 1e-13;

/// Steady state `Lρ = 0, Tr ρ = 1` by a bordered sparse LU solve.
///
/// Only the connected blocks of `L` that contain populations are solved; the
/// remaining coherences decouple and vanish in a unique steady state. The
/// fill-reducing ordering is computed once and reused by
/// [`SteadyStateSolver::solve_shifted`], which handles families
/// `L + s·diag(d)` such as a cavity-detuning scan.
#[derive(Debug, Clone)]
pub struct SteadyStateSolver {
    dim: usize,
    sector: Vec<usize>,
    /// bordered sector matrix of the analyzed Liouvillian
    base: CsrMatrix,
    /// rows of `base` taken verbatim from L (all but the border row)
    border: usize,
    /// value slot of each sector diagonal in `base` (NONE on the border row)
    diag_slot: Vec<usize>,
    order: Vec<usize>,
    norm: f64,
}

impl SteadyStateSolver {
    pub fn new(l: &Liouvillian) -> Result<Self> {
        let d = l.hilbert_dim();
        let n = l.superop_dim();
        let labels = component_labels(l.matrix());
        let sector = sector_of(&labels, (0..d).map(|i| i + i * d));
        let mut pos = vec![NONE; n];
        for (k, &g) in sector.iter().enumerate() {
            pos[g] = k;
        }
        let border = pos[0];
        let sub = l.matrix().principal_submatrix(&sector);

        let m = sector.len();
        let mut indptr = Vec::with_capacity(m + 1);
        let mut indices = Vec::with_capacity(sub.nnz() + d);
        let mut values = Vec::with_capacity(sub.nnz() + d);
        let mut diag_slot = vec![NONE; m];
        indptr.push(0);
        let mut trace_cols: Vec<usize> = (0..d).map(|i| pos[i + i * d]).collect();
        trace_cols.sort_unstable();
        for r in 0..m {
            if r == border {
                for &c in &trace_cols {
                    indices.push(c);
                    values.push(C64::new(1.0, 0.0));
                }
            } else {
                for (c, v) in sub.row(r) {
                    if c == r {
                        diag_slot[r] = indices.len();
                    }
                    indices.push(c);
                    values.push(v);
                }
                if diag_slot[r] == NONE {
                    return Err(Error::InvalidInput(
                        "superoperator diagonal is not stored".into(),
                    ));
                }
            }
            indptr.push(indices.len());
        }
        let base = CsrMatrix::from_raw(m, m, indptr, indices, values)?;
        let order = minimum_degree(&base);
        Ok(Self {
            dim: d,
            sector,
            base,
            border,
            diag_slot,
            order,
            norm: l.matrix().norm_inf(),
        })
    }

    /// Unknowns actually solved for.
    pub fn sector_len(&self) -> usize {
        self.sector.len()
    }

    pub fn solve(&self) -> Result<DensityMatrix> {
        self.solve_matrix(self.base.clone(), self.norm)
    }

    /// Steady state of `L + s·diag(shift)` where `L` is the analyzed
    /// Liouvillian and `shift` has one entry per superoperator index.
    pub fn solve_shifted(&self, shift: &[C64], s: f64) -> Result<DensityMatrix> {
        let n = self.dim * self.dim;
        if shift.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: shift.len(),
            });
        }
        let mut a = self.base.clone();
        let mut extra = 0.0f64;
        {
            let vals = a.values_mut();
            for (k, &g) in self.sector.iter().enumerate() {
                if k != self.border {
                    let dv = shift[g] * s;
                    vals[self.diag_slot[k]] += dv;
                    extra = extra.max(dv.norm());
                }
            }
        }
        self.solve_matrix(a, self.norm + extra)
    }

    fn solve_matrix(&self, a: CsrMatrix, norm: f64) -> Result<DensityMatrix> {
        let m = self.sector.len();
        let lu = match SparseLu::factor(&a, &self.order, 0.1) {
            Ok(lu) => lu,
            Err(Error::Singular { .. }) => SparseLu::factor(&a, &self.order, 1.0)?,
            Err(e) => return Err(e),
        };
        let ratio = lu.pivot_ratio();
        if !(ratio > PIVOT_RATIO_MIN) {
            return Err(Error::Solver {
                reason: "steady state is not unique (numerically singular system)".into(),
                residual: ratio,
                tolerance: PIVOT_RATIO_MIN,
            });
        }
        let mut b = vec![C64::new(0.0, 0.0); m];
        b[self.border] = C64::new(1.0, 0.0);
        let mut x = lu.solve(&b)?;
        let tol = RESIDUAL_TOL * norm.max(1.0);
        let mut res = f64::INFINITY;
        for _ in 0..4 {
            let mut r = a.matvec(&x)?;
            for (ri, bi) in r.iter_mut().zip(&b) {
                *ri = *bi - *ri;
            }
            res = r.iter().fold(0.0, |acc, z| acc.max(z.norm()));
            if res < tol {
                break;
            }
            let dx = lu.solve(&r)?;
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += *di;
            }
        }
        if !(res < tol) {
            return Err(Error::Solver {
                reason: "residual above tolerance after refinement".into(),
                residual: res,
                tolerance: tol,
            });
        }
        let d = self.dim;
        let mut full = vec![C64::new(0.0, 0.0); d * d];
        for (k, &g) in self.sector.iter().enumerate() {
            full[g] = x[k];
        }
        let rho = DenseMatrix::from_column_stacked(d, d, &full)?.hermitian_part();
        let rho = DensityMatrix::new_unchecked(rho);
        rho.check(
            DensityMatrix::TRACE_TOL,
            DensityMatrix::HERMITIAN_TOL,
            DensityMatrix::POSITIVITY_TOL,
        )
        .map_err(|e| Error::Solver {
            reason: alloc::format!("steady state is unphysical: {e}"),
            residual: res,
            tolerance: tol,
        })?;
        Ok(rho)
    }
}

/// One-shot steady state.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    SteadyStateSolver::new(l)?.solve()
}
