//! Hermitian eigenproblems (cyclic complex Jacobi) and a cheap
//! positive-semidefiniteness test.

use alloc::vec::Vec;

use super::{DenseMatrix, ZERO};
use crate::math::sqrt;
use crate::{Error, Result, C64};

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: DenseMatrix,
}

/// Eigen-decomposition of the Hermitian part of `a`.
pub fn hermitian_eigen(a: &DenseMatrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: a.cols(),
        });
    }
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = DenseMatrix::identity(n);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if sqrt(off) <= 1e-15 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r; // e^{iφ}
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta >= 0.0 {
                    1.0 / (theta + sqrt(theta * theta + 1.0))
                } else {
                    -1.0 / (-theta + sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                let e = phase.conj(); // e^{-iφ}
                // J = [[c, s], [-s e, c e]] acting on columns p, q
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = e * (-s);
                let jqq = e * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * jpp + akq * jqp;
                    m[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    m[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = idx.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, c| v[(r, idx[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// True when the smallest eigenvalue of the Hermitian part of `a` is greater
/// than `-tol`, decided by attempting a Cholesky factorization of `A + tol·I`.
pub fn is_positive_semidefinite(a: &DenseMatrix, tol: f64) -> bool {
    if !a.is_square() {
        return false;
    }
    let n = a.rows();
    let mut l = a.hermitian_part();
    for i in 0..n {
        l[(i, i)] += tol;
    }
    for j in 0..n {
        let mut d = l[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let d = sqrt(d);
        l[(j, j)] = C64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = l[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DenseMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        a.hermitian_part()
    }

    #[test]
    fn reconstructs_random_hermitian() {
        let a = random_hermitian(12, 3);
        let e = hermitian_eigen(&a).unwrap();
        let d = DenseMatrix::from_fn(12, 12, |i, j| {
            if i == j {
                C64::new(e.values[i], 0.0)
            } else {
                ZERO
            }
        });
        let rec = e
            .vectors
            .matmul(&d)
            .unwrap()
            .matmul(&e.vectors.adjoint())
            .unwrap();
        assert!(rec.max_abs_diff(&a) < 1e-12);
        let gram = e.vectors.adjoint().matmul(&e.vectors).unwrap();
        assert!(gram.max_abs_diff(&DenseMatrix::identity(12)) < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn psd_test_agrees_with_eigenvalues() {
        let a = random_hermitian(8, 11);
        let lmin = hermitian_eigen(&a).unwrap().values[0];
        assert!(lmin < 0.0);
        assert!(!is_positive_semidefinite(&a, -lmin * 0.5));
        assert!(is_positive_semidefinite(&a, -lmin * 1.5));
    }
}
