use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{CsrMatrix, DenseMatrix};
use crate::qops::QOperator;
use crate::{Error, Result, C64};

#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    matrix: CsrMatrix,
}

impl Liouvillian {
    /// `L ρ = −i[H, ρ] + Σ_k (C_k ρ C_k† − ½{C_k†C_k, ρ})`.
    ///
    /// The stored pattern always contains the full diagonal (possibly as
    /// explicit zeros) so diagonal shifts never change the sparsity.
    pub fn assemble(h: &QOperator, collapse: &[QOperator]) -> Result<Self> {
        let d = h.dim();
        for c in collapse {
            if c.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: c.dim(),
                });
            }
        }
        let hs = h.to_sparse();
        let cs: Vec<CsrMatrix> = collapse.iter().map(QOperator::to_sparse).collect();
        let mut k = CsrMatrix::zeros(d, d);
        for c in &cs {
            k = k.add(&c.adjoint().matmul(c)?)?;
        }
        // A = −iH − K/2, L = I⊗A + Ā⊗I + Σ C̄⊗C
        let a = hs
            .scale(C64::new(0.0, -1.0))
            .add_scaled(&k, C64::new(-0.5, 0.0))?;

        let n = d * d;
        let mut t: Vec<(usize, usize, C64)> =
            Vec::with_capacity(2 * d * a.nnz() + n + cs.iter().map(|c| c.nnz() * c.nnz()).sum::<usize>());
        for idx in 0..n {
            t.push((idx, idx, C64::new(0.0, 0.0)));
        }
        for i in 0..d {
            for (kk, v) in a.row(i) {
                let vc = v.conj();
                for j in 0..d {
                    // (I⊗A): row i + j·d, col kk + j·d
                    t.push((i + j * d, kk + j * d, v));
                    // (Ā⊗I): row j + i·d, col j + kk·d
                    t.push((j + i * d, j + kk * d, vc));
                }
            }
        }
        for c in &cs {
            for j in 0..d {
                for (l, cjl) in c.row(j) {
                    let cjl = cjl.conj();
                    for i in 0..d {
                        for (kk, cik) in c.row(i) {
                            t.push((i + j * d, kk + l * d, cjl * cik));
                        }
                    }
                }
            }
        }
        let matrix = CsrMatrix::from_triplets(n, n, &t)?;
        Ok(Self { dim: d, matrix })
    }

    /// Wraps an existing superoperator on a `dim`-dimensional Hilbert space.
    pub fn from_matrix(dim: usize, matrix: CsrMatrix) -> Result<Self> {
        let n = dim * dim;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows(),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn hilbert_dim(&self) -> usize {
        self.dim
    }

    pub fn superop_dim(&self) -> usize {
        self.dim * self.dim
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho: &DenseMatrix) -> Result<DenseMatrix> {
        if rho.rows() != self.dim || rho.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.rows(),
            });
        }
        let y = self.matrix.matvec(&rho.column_stacked())?;
        DenseMatrix::from_column_stacked(self.dim, self.dim, &y)
    }

    /// max over columns of |Σ_i L[(i,i), col]|, relative to ‖L‖∞.
    pub fn trace_defect(&self) -> f64 {
        let n = self.superop_dim();
        let mut sums = vec![C64::new(0.0, 0.0); n];
        for i in 0..self.dim {
            for (c, v) in self.matrix.row(i + i * self.dim) {
                sums[c] += v;
            }
        }
        let norm = self.matrix.norm_inf().max(f64::MIN_POSITIVE);
        sums.iter().fold(0.0f64, |m, s| m.max(s.norm())) / norm
    }

    /// `L + s·diag(shift)`, keeping the sparsity pattern.
    pub fn with_diagonal_shift(&self, shift: &[C64], s: f64) -> Result<Self> {
        let n = self.superop_dim();
        if shift.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: shift.len(),
            });
        }
        let mut m = self.matrix.clone();
        for (i, &c) in shift.iter().enumerate() {
            if c != C64::new(0.0, 0.0) {
                let p = m.position(i, i).ok_or_else(|| {
                    Error::InvalidInput("superoperator diagonal is not stored".into())
                })?;
                m.values_mut()[p] += c * s;
            }
        }
        Ok(Self {
            dim: self.dim,
            matrix: m,
        })
    }
}

/// Superoperator diagonal of `ρ ↦ −i[D, ρ]` for a diagonal operator `D`.
///
/// `Liouvillian::with_diagonal_shift(&commutator_diagonal(D), s)` is the
/// Liouvillian of `H + s·D`.
pub fn commutator_diagonal(d: &QOperator) -> Result<Vec<C64>> {
    let n = d.dim();
    let s = d.to_sparse();
    let mut diag = vec![0.0; n];
    for i in 0..n {
        for (j, v) in s.row(i) {
            if i == j {
                diag[i] = v.re;
                if v.im != 0.0 {
                    return Err(Error::InvalidInput("operator is not Hermitian".into()));
                }
            } else if v != C64::new(0.0, 0.0) {
                return Err(Error::InvalidInput("operator is not diagonal".into()));
            }
        }
    }
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            out.push(C64::new(0.0, -(diag[i] - diag[j])));
        }
    }
    Ok(out)
}

/// Connected components of the symmetrized pattern, as one label per index.
pub(crate) fn component_labels(m: &CsrMatrix) -> Vec<usize> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for (j, v) in m.row(i) {
            if i != j && v != C64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}

/// Sorted indices of every component that contains one of `seeds`.
pub(crate) fn sector_of(labels: &[usize], seeds: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut hit = vec![false; labels.len()];
    for s in seeds {
        hit[labels[s]] = true;
    }
    (0..labels.len()).filter(|&i| hit[labels[i]]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn direct(h: &DenseMatrix, cs: &[DenseMatrix], rho: &DenseMatrix) -> DenseMatrix {
        let mi = c(0.0, -1.0);
        let comm = h.matmul(rho).unwrap().sub(&rho.matmul(h).unwrap()).unwrap();
        let mut out = comm.scale(mi);
        for ck in cs {
            let cd = ck.adjoint();
            let ckc = cd.matmul(ck).unwrap();
            let jump = ck.matmul(rho).unwrap().matmul(&cd).unwrap();
            let anti = ckc.matmul(rho).unwrap().add(&rho.matmul(&ckc).unwrap()).unwrap();
            out = out.add(&jump).unwrap().sub(&anti.scale(c(0.5, 0.0))).unwrap();
        }
        out
    }

    fn sample(d: usize, seed: u64) -> (DenseMatrix, Vec<DenseMatrix>, DenseMatrix) {
        let mut s = seed;
        let mut rnd = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let g = DenseMatrix::from_fn(d, d, |_, _| c(rnd(), rnd()));
        let h = g.add(&g.adjoint()).unwrap();
        let cs = (0..2)
            .map(|_| DenseMatrix::from_fn(d, d, |_, _| c(rnd(), rnd())))
            .collect();
        let rho = DenseMatrix::from_fn(d, d, |_, _| c(rnd(), rnd()));
        (h, cs, rho)
    }

    #[test]
    fn matches_direct_form() {
        for (d, seed) in [(2, 1), (3, 7), (5, 11)] {
            let (h, cs, rho) = sample(d, seed);
            let qc: Vec<QOperator> = cs.iter().map(|m| QOperator::from_dense(m.clone()).unwrap()).collect();
            let l = Liouvillian::assemble(&QOperator::from_dense(h.clone()).unwrap(), &qc).unwrap();
            let got = l.apply(&rho).unwrap();
            let want = direct(&h, &cs, &rho);
            assert!(got.max_abs_diff(&want) < 1e-12 * want.max_abs().max(1.0));
            assert!(l.trace_defect() < 1e-14);
        }
    }

    #[test]
    fn diagonal_shift_equals_modified_hamiltonian() {
        let (h, cs, rho) = sample(3, 5);
        let dvals = [0.0, 1.0, 2.0];
        let dm = DenseMatrix::from_fn(3, 3, |i, j| if i == j { c(dvals[i], 0.0) } else { c(0.0, 0.0) });
        let qc: Vec<QOperator> = cs.iter().map(|m| QOperator::from_dense(m.clone()).unwrap()).collect();
        let l0 = Liouvillian::assemble(&QOperator::from_dense(h.clone()).unwrap(), &qc).unwrap();
        let shift = commutator_diagonal(&QOperator::from_dense(dm.clone()).unwrap()).unwrap();
        let l1 = l0.with_diagonal_shift(&shift, 0.7).unwrap();
        let h2 = h.add(&dm.scale(c(0.7, 0.0))).unwrap();
        let l2 = Liouvillian::assemble(&QOperator::from_dense(h2).unwrap(), &qc).unwrap();
        assert!(l1.apply(&rho).unwrap().max_abs_diff(&l2.apply(&rho).unwrap()) < 1e-12);
        assert_eq!(l1.matrix().nnz(), l0.matrix().nnz());
    }

    #[test]
    fn zero_hamiltonian_keeps_diagonal_pattern() {
        let l = Liouvillian::assemble(&QOperator::zeros(3), &[]).unwrap();
        assert_eq!(l.matrix().nnz(), 9);
        assert_eq!(l.matrix().max_abs(), 0.0);
    }

    #[test]
    fn rejects_mismatched_collapse() {
        let r = Liouvillian::assemble(&QOperator::zeros(3), &[QOperator::zeros(2)]);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }
}
