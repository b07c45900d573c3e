//! The ⁴⁰Ca⁺ ion with its 18 Zeeman sublevels, three lasers (397, 850 and
//! 854 nm) and a cavity on the 866 nm P₁/₂ ↔ D₃/₂ transition.
//!
//! Frame convention: every operator is written in the frame rotating with
//! the lasers and the cavity. Relative to S₁/₂ the bare manifold energies are
//!
//! | manifold | energy |
//! |----------|--------|
//! | S₁/₂ | 0 |
//! | P₁/₂ | −Δ₃₉₇ |
//! | D₃/₂ | −Δ₃₉₇ |
//! | P₃/₂ | −Δ₃₉₇ − Δ₈₅₀ |
//! | D₅/₂ | −Δ₃₉₇ − Δ₈₅₀ + Δ₈₅₄ |
//!
//! and each cavity photon carries `Δ_cav`, so `|D₃/₂, n = 1⟩` sits at
//! `−(Δ₃₉₇ − Δ_cav)` and is degenerate with `|S₁/₂, 0⟩` on the Raman
//! resonance `Δ₃₉₇ = Δ_cav`. Detunings are positive for blue detuning.

mod basis;
mod model;
mod params;

pub use basis::{AtomicBasis, Level, Term};
pub use model::{
    build_collapse_ops, build_hamiltonian, cavity_emission_observable, cavity_number_operator,
    composite_space, manifold_projector, transition_operator, uv_fluorescence_observable,
    zeeman_shift,
};
pub use params::{
    cooperativity, AtomicRates, Laser, LaserParams, Polarization, RabiNormalization,
    SystemParams,
};
