//! Lindblad master equation on column-stacked density matrices.
//!
//! `vec(ρ)` stacks columns, so `ρ_ij` sits at index `i + j·dim` and
//! `vec(AρB) = (Bᵀ ⊗ A)·vec(ρ)`.

mod density;
mod evolve;
mod liouvillian;
mod steady;

pub use density::{expect, DensityMatrix};
pub use evolve::{evolve, evolve_observables, evolve_with, EvolveOptions};
pub use liouvillian::{commutator_diagonal, Liouvillian};
pub use steady::{steady_state, SteadyStateSolver};
