//! Fill-reducing ordering for the sparse LU.
//!
//! Exact minimum degree on the symmetrized pattern `A + Aᵀ`, eliminating one
//! node at a time on a dense bitset graph. Quadratic memory in the number of
//! unknowns, which is fine for the few thousand unknowns of a Liouvillian
//! sector. Ties go to the smallest index so the ordering is deterministic.

use alloc::vec;
use alloc::vec::Vec;

use super::CsrMatrix;

struct BitGraph {
    words: usize,
    bits: Vec<u64>,
}

impl BitGraph {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self {
            words,
            bits: vec![0; words * n],
        }
    }

    #[inline]
    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    #[inline]
    fn clear(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] &= !(1 << (j % 64));
    }

    fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    fn neighbours(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, &word) in self.row(i).iter().enumerate() {
            let mut b = word;
            while b != 0 {
                let t = b.trailing_zeros() as usize;
                out.push(w * 64 + t);
                b &= b - 1;
            }
        }
        out
    }

    /// row(dst) |= row(src)
    fn union_into(&mut self, dst: usize, src: usize) {
        let w = self.words;
        if dst == src {
            return;
        }
        let (a, b) = if dst < src {
            let (lo, hi) = self.bits.split_at_mut(src * w);
            (&mut lo[dst * w..dst * w + w], &hi[..w])
        } else {
            let (lo, hi) = self.bits.split_at_mut(dst * w);
            (&mut hi[..w], &lo[src * w..src * w + w])
        };
        for (x, y) in a.iter_mut().zip(b) {
            *x |= *y;
        }
    }
}

/// Elimination order (a permutation of `0..n`) for a square matrix.
pub fn minimum_degree(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let mut g = BitGraph::new(n);
    for i in 0..n {
        for (j, _) in a.row(i) {
            if i != j {
                g.set(i, j);
                g.set(j, i);
            }
        }
    }
    let mut degree: Vec<usize> = (0..n).map(|i| g.degree(i)).collect();
    let mut eliminated = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best = usize::MAX;
        let mut v = 0;
        for i in 0..n {
            if !eliminated[i] && degree[i] < best {
                best = degree[i];
                v = i;
            }
        }
        eliminated[v] = true;
        order.push(v);
        let nbrs = g.neighbours(v);
        for &u in &nbrs {
            g.union_into(u, v);
            g.clear(u, u);
            g.clear(u, v);
        }
        for &u in &nbrs {
            degree[u] = g.degree(u);
        }
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    #[test]
    fn order_is_a_permutation() {
        let t: Vec<_> = (0..20)
            .flat_map(|i| [(i, i, C64::new(1.0, 0.0)), (i, (i * 7 + 3) % 20, C64::new(1.0, 0.0))])
            .collect();
        let a = CsrMatrix::from_triplets(20, 20, &t).unwrap();
        let mut o = minimum_degree(&a);
        o.sort_unstable();
        assert_eq!(o, (0..20).collect::<Vec<_>>());
    }

    #[test]
    fn arrow_matrix_hub_goes_last() {
        // node 0 is connected to everything; eliminating it first would fill
        // the whole matrix
        let mut t = Vec::new();
        for i in 0..10 {
            t.push((i, i, C64::new(1.0, 0.0)));
            t.push((0, i, C64::new(1.0, 0.0)));
            t.push((i, 0, C64::new(1.0, 0.0)));
        }
        let a = CsrMatrix::from_triplets(10, 10, &t).unwrap();
        let o = minimum_degree(&a);
        assert_ne!(o[0], 0);
        assert!(o[8] == 0 || o[9] == 0);
    }
}
