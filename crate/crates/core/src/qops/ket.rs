use alloc::vec::Vec;

use crate::{Error, Result};

/// Basis label of the composite atom ⊗ mode₁ ⊗ … space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KetIndex {
    pub atom_index: usize,
    pub fock_indices: Vec<usize>,
}

/// Shape of the composite space. The flattening puts the atom index slowest,
/// then the cavity modes in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompositeSpace {
    pub atom_dim: usize,
    pub fock_cutoff: usize,
    pub modes: usize,
}

impl CompositeSpace {
    pub fn new(atom_dim: usize, fock_cutoff: usize, modes: usize) -> Result<Self> {
        if atom_dim == 0 {
            return Err(Error::InvalidInput("atom dimension must be ≥ 1".into()));
        }
        Ok(Self {
            atom_dim,
            fock_cutoff,
            modes,
        })
    }

    /// Levels per mode, `cutoff + 1`.
    pub fn fock_levels(&self) -> usize {
        self.fock_cutoff + 1
    }

    /// Dimension of the field part, `(cutoff + 1)^modes`.
    pub fn field_dim(&self) -> usize {
        self.fock_levels().pow(self.modes as u32)
    }

    pub fn dim(&self) -> usize {
        self.atom_dim * self.field_dim()
    }

    pub fn flatten(&self, ket: &KetIndex) -> Result<usize> {
        if ket.atom_index >= self.atom_dim {
            return Err(Error::InvalidInput(alloc::format!(
                "atom index {} ≥ {}",
                ket.atom_index,
                self.atom_dim
            )));
        }
        if ket.fock_indices.len() != self.modes {
            return Err(Error::DimensionMismatch {
                expected: self.modes,
                found: ket.fock_indices.len(),
            });
        }
        let mut idx = ket.atom_index;
        for &n in &ket.fock_indices {
            if n > self.fock_cutoff {
                return Err(Error::InvalidInput(alloc::format!(
                    "Fock index {n} above cutoff {}",
                    self.fock_cutoff
                )));
            }
            idx = idx * self.fock_levels() + n;
        }
        Ok(idx)
    }

    pub fn unflatten(&self, mut idx: usize) -> Result<KetIndex> {
        if idx >= self.dim() {
            return Err(Error::InvalidInput(alloc::format!(
                "composite index {idx} ≥ {}",
                self.dim()
            )));
        }
        let levels = self.fock_levels();
        let mut fock = alloc::vec![0; self.modes];
        for slot in fock.iter_mut().rev() {
            *slot = idx % levels;
            idx /= levels;
        }
        Ok(KetIndex {
            atom_index: idx,
            fock_indices: fock,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn atom_index_is_slowest() {
        let s = CompositeSpace::new(18, 1, 2).unwrap();
        assert_eq!(s.dim(), 72);
        let k = KetIndex {
            atom_index: 1,
            fock_indices: alloc::vec![0, 1],
        };
        assert_eq!(s.flatten(&k).unwrap(), 5);
        assert!(s
            .flatten(&KetIndex {
                atom_index: 0,
                fock_indices: alloc::vec![2, 0]
            })
            .is_err());
    }

    proptest! {
        #[test]
        fn flatten_round_trip(atom in 1usize..20, cutoff in 0usize..4, modes in 0usize..3, seed in 0usize..10_000) {
            let s = CompositeSpace::new(atom, cutoff, modes).unwrap();
            let idx = seed % s.dim();
            let ket = s.unflatten(idx).unwrap();
            prop_assert_eq!(s.flatten(&ket).unwrap(), idx);
        }
    }
}
