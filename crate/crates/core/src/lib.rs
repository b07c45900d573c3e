//! Simulation core for the cavity-modified emission of a single trapped
//! ⁴⁰Ca⁺ ion coupled to a fiber Fabry–Pérot cavity.
//!
//! The crate is `no_std` (with `alloc`) and contains everything that is pure
//! computation:
//!
//! * [`linalg`]: dense and CSR complex matrices, sparse LU, Hermitian eigenvalues.
//! * [`qops`]: quantum operators, Kronecker products, Clebsch–Gordan coefficients.
//! * [`atom`]: the 18-level ion + cavity model (Hamiltonian, collapse operators,
//!   observables).
//! * [`lindblad`]: Liouvillian assembly, steady states and time evolution.
//! * [`effective`]: the closed-form three-level rate model.
//! * [`experiments`]: shelving transients, cavity scans, broadening, fits,
//!   the (ḡ₀, σ) inversion and the repumper-detuning suppression sweep.
//!
//! File formats, configuration parsing and the command-line driver live in the
//! companion `purcell` crate.
#![cfg_attr(not(test), no_std)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod atom;
pub mod effective;
mod error;
pub mod experiments;
pub mod exec;
pub mod lindblad;
pub mod linalg;
pub(crate) mod math;
pub mod qops;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
