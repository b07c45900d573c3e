use alloc::vec::Vec;

use crate::qops::HalfInt;

/// Fine-structure terms of ⁴⁰Ca⁺ that take part in the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    S12,
    P12,
    D32,
    P32,
    D52,
}

impl Term {
    pub const ALL: [Term; 5] = [Term::S12, Term::P12, Term::D32, Term::P32, Term::D52];

    pub fn j(self) -> HalfInt {
        match self {
            Term::S12 | Term::P12 => HalfInt::from_twice(1),
            Term::D32 | Term::P32 => HalfInt::from_twice(3),
            Term::D52 => HalfInt::from_twice(5),
        }
    }

    /// Pure-LS Landé factor.
    pub fn lande_g(self) -> f64 {
        match self {
            Term::S12 => 2.0,
            Term::P12 => 2.0 / 3.0,
            Term::D32 => 4.0 / 5.0,
            Term::P32 => 4.0 / 3.0,
            Term::D52 => 6.0 / 5.0,
        }
    }

    pub fn multiplicity(self) -> usize {
        (self.j().twice() + 1) as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Term::S12 => "S1/2",
            Term::P12 => "P1/2",
            Term::D32 => "D3/2",
            Term::P32 => "P3/2",
            Term::D52 => "D5/2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub term: Term,
    pub j: HalfInt,
    pub mj: HalfInt,
    pub lande_g: f64,
}

/// The 18 sublevels, grouped by term in [`Term::ALL`] order with ascending mJ.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicBasis {
    levels: Vec<Level>,
}

impl Default for AtomicBasis {
    fn default() -> Self {
        Self::calcium40()
    }
}

impl AtomicBasis {
    pub fn calcium40() -> Self {
        let levels = Term::ALL
            .iter()
            .flat_map(|&term| {
                term.j().projections().map(move |mj| Level {
                    term,
                    j: term.j(),
                    mj,
                    lande_g: term.lande_g(),
                })
            })
            .collect();
        Self { levels }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, i: usize) -> &Level {
        &self.levels[i]
    }

    pub fn index_of(&self, term: Term, mj: HalfInt) -> Option<usize> {
        self.levels
            .iter()
            .position(|l| l.term == term && l.mj == mj)
    }

    /// Indices of all sublevels of `term`.
    pub fn manifold(&self, term: Term) -> impl Iterator<Item = usize> + '_ {
        self.levels
            .iter()
            .enumerate()
            .filter(move |(_, l)| l.term == term)
            .map(|(i, _)| i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eighteen_levels_with_expected_multiplicities() {
        let b = AtomicBasis::calcium40();
        assert_eq!(b.len(), 18);
        let counts: Vec<usize> = Term::ALL.iter().map(|&t| b.manifold(t).count()).collect();
        assert_eq!(counts, [2, 2, 4, 4, 6]);
        assert_eq!(b.level(0).mj, HalfInt::from_twice(-1));
        assert_eq!(b.index_of(Term::D52, HalfInt::from_twice(5)), Some(17));
    }

    #[test]
    fn lande_factors() {
        let g: Vec<f64> = Term::ALL.iter().map(|t| t.lande_g()).collect();
        assert_eq!(g, [2.0, 2.0 / 3.0, 0.8, 4.0 / 3.0, 1.2]);
    }
}
