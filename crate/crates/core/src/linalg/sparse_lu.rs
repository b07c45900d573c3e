//! Left-looking sparse LU with threshold partial pivoting.
//!
//! Each column is computed by a sparse triangular solve whose nonzero pattern
//! comes from a depth-first reach through the graph of `L`
//! (Gilbert–Peierls). Columns are taken in a caller-supplied order; within a
//! column the diagonal is kept as pivot whenever it is within `pivot_tol` of
//! the largest candidate.

use alloc::vec;
use alloc::vec::Vec;

use super::{CsrMatrix, ONE, ZERO};
use crate::{Error, Result, C64};

const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
struct Csc {
    colptr: Vec<usize>,
    rowind: Vec<usize>,
    values: Vec<C64>,
}

impl Csc {
    fn with_capacity(n: usize, nnz: usize) -> Self {
        let mut colptr = Vec::with_capacity(n + 1);
        colptr.push(0);
        Self {
            colptr,
            rowind: Vec::with_capacity(nnz),
            values: Vec::with_capacity(nnz),
        }
    }

    #[inline]
    fn push(&mut self, i: usize, v: C64) {
        self.rowind.push(i);
        self.values.push(v);
    }

    #[inline]
    fn close_column(&mut self) {
        self.colptr.push(self.rowind.len());
    }
}

#[derive(Debug, Clone)]
pub struct SparseLu {
    n: usize,
    l: Csc,
    u: Csc,
    pinv: Vec<usize>,
    q: Vec<usize>,
}

impl SparseLu {
    /// Factors `A(:, order)`; `order` is usually from [`super::minimum_degree`].
    pub fn factor(a: &CsrMatrix, order: &[usize], pivot_tol: f64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.ncols(),
            });
        }
        if order.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: order.len(),
            });
        }
        // rows of Aᵀ are the columns of A
        let at = a.transpose();
        let guess = 4 * a.nnz() + n;
        let mut l = Csc::with_capacity(n, guess);
        let mut u = Csc::with_capacity(n, guess);
        let mut pinv = vec![NONE; n];
        let mut x = vec![ZERO; n];
        let mut xi = vec![0usize; n];
        let mut stack = vec![0usize; n];
        let mut child_pos = vec![0usize; n];
        let mut mark = vec![NONE; n];

        for (k, &col) in order.iter().enumerate() {
            // pattern of L \ A(:,col) in topological order: xi[top..n]
            let mut top = n;
            for (i, _) in at.row(col) {
                if mark[i] != k {
                    top = reach_dfs(
                        i,
                        k,
                        &l,
                        &pinv,
                        &mut mark,
                        top,
                        &mut xi,
                        &mut stack,
                        &mut child_pos,
                    );
                }
            }
            for &i in &xi[top..n] {
                x[i] = ZERO;
            }
            for (i, v) in at.row(col) {
                x[i] = v;
            }
            for p in top..n {
                let j = xi[p];
                let jc = pinv[j];
                if jc == NONE {
                    continue;
                }
                let xj = x[j];
                if xj == ZERO {
                    continue;
                }
                // L(:,jc): unit diagonal stored first
                for q in l.colptr[jc] + 1..l.colptr[jc + 1] {
                    x[l.rowind[q]] -= l.values[q] * xj;
                }
            }

            let mut ipiv = NONE;
            let mut best = -1.0;
            for &i in &xi[top..n] {
                if pinv[i] == NONE {
                    let t = x[i].norm();
                    if t > best {
                        best = t;
                        ipiv = i;
                    }
                } else {
                    u.push(pinv[i], x[i]);
                }
            }
            if ipiv == NONE || best <= 0.0 {
                return Err(Error::Singular { column: k });
            }
            if pinv[col] == NONE && mark[col] == k && x[col].norm() >= best * pivot_tol {
                ipiv = col;
            }
            let pivot = x[ipiv];
            u.push(k, pivot);
            u.close_column();
            pinv[ipiv] = k;
            l.push(ipiv, ONE);
            for &i in &xi[top..n] {
                if pinv[i] == NONE {
                    l.push(i, x[i] / pivot);
                }
                x[i] = ZERO;
            }
            l.close_column();
        }
        for r in l.rowind.iter_mut() {
            *r = pinv[*r];
        }
        Ok(Self {
            n,
            l,
            u,
            pinv,
            q: order.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of L and U together.
    pub fn fill(&self) -> usize {
        self.l.values.len() + self.u.values.len()
    }

    /// min |U_kk| / max |U_kk|; tiny values flag a numerically singular matrix.
    pub fn pivot_ratio(&self) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for j in 0..self.n {
            let d = self.u.values[self.u.colptr[j + 1] - 1].norm();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if hi == 0.0 {
            0.0
        } else {
            lo / hi
        }
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let mut y = vec![ZERO; n];
        for i in 0..n {
            y[self.pinv[i]] = b[i];
        }
        for j in 0..n {
            let yj = y[j];
            if yj == ZERO {
                continue;
            }
            for p in self.l.colptr[j] + 1..self.l.colptr[j + 1] {
                y[self.l.rowind[p]] -= self.l.values[p] * yj;
            }
        }
        for j in (0..n).rev() {
            let end = self.u.colptr[j + 1] - 1;
            y[j] /= self.u.values[end];
            let yj = y[j];
            if yj == ZERO {
                continue;
            }
            for p in self.u.colptr[j]..end {
                y[self.u.rowind[p]] -= self.u.values[p] * yj;
            }
        }
        let mut x = vec![ZERO; n];
        for k in 0..n {
            x[self.q[k]] = y[k];
        }
        Ok(x)
    }
}

/// Non-recursive DFS from `start` through the graph of the partial `L`,
/// pushing finished nodes onto `xi[..top]` (so `xi[top..]` ends up in
/// topological order).
#[allow(clippy::too_many_arguments)]
fn reach_dfs(
    start: usize,
    stamp: usize,
    l: &Csc,
    pinv: &[usize],
    mark: &mut [usize],
    mut top: usize,
    xi: &mut [usize],
    stack: &mut [usize],
    child_pos: &mut [usize],
) -> usize {
    let mut head = 0usize;
    stack[0] = start;
    while head != usize::MAX {
        let j = stack[head];
        let jc = pinv[j];
        if mark[j] != stamp {
            mark[j] = stamp;
            child_pos[head] = if jc == NONE { 0 } else { l.colptr[jc] + 1 };
        }
        let mut done = true;
        if jc != NONE {
            let end = l.colptr[jc + 1];
            let mut p = child_pos[head];
            while p < end {
                let i = l.rowind[p];
                p += 1;
                if mark[i] != stamp {
                    child_pos[head] = p;
                    head += 1;
                    stack[head] = i;
                    done = false;
                    break;
                }
            }
            if done {
                child_pos[head] = end;
            }
        }
        if done {
            top -= 1;
            xi[top] = j;
            head = head.wrapping_sub(1);
        }
    }
    top
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{minimum_degree, DenseMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(n: usize, density: f64, seed: u64) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j || rng.random::<f64>() < density {
                    t.push((i, j, C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)));
                }
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn sparse_matches_dense_solution() {
        for seed in 0..5 {
            let a = random_sparse(40, 0.08, seed);
            let b: Vec<C64> = (0..40).map(|i| C64::new(i as f64, 1.0)).collect();
            let order = minimum_degree(&a);
            let xs = SparseLu::factor(&a, &order, 0.1).unwrap().solve(&b).unwrap();
            let xd = DenseMatrix::lu(&a.to_dense()).unwrap().solve(&b).unwrap();
            let r = a.matvec(&xs).unwrap();
            for i in 0..40 {
                assert!((xs[i] - xd[i]).norm() < 1e-9 * (1.0 + xd[i].norm()));
                assert!((r[i] - b[i]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_diagonal_needs_pivoting() {
        // [[0, 1], [1, 0]]
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, ONE), (1, 0, ONE)]).unwrap();
        let x = SparseLu::factor(&a, &[0, 1], 0.1)
            .unwrap()
            .solve(&[C64::new(2.0, 0.0), C64::new(3.0, 0.0)])
            .unwrap();
        assert_eq!(x, vec![C64::new(3.0, 0.0), C64::new(2.0, 0.0)]);
    }

    #[test]
    fn singular_detected() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, ONE), (1, 0, ONE)]).unwrap();
        assert!(matches!(
            SparseLu::factor(&a, &[0, 1], 0.1),
            Err(Error::Singular { .. })
        ));
    }
}
