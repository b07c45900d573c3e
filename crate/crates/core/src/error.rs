use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

/// A polyline in the (ḡ₀, σ) plane, stored as (ḡ₀ in rad/s, σ in rad/s).
pub type Polyline = Vec<(f64, f64)>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate system: {0}")]
    Degenerate(String),

    #[error("singular matrix at pivot {column}")]
    Singular { column: usize },

    #[error("steady-state solver failed: {reason} (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    Solver {
        reason: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("step size underflow at t = {time:.6e} s (h = {step:.3e} s)")]
    Stiffness { time: f64, step: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("analysis failed: {0}")]
    Analysis(String),

    #[error("no contour intersection inside the grid ({} τ segments, {} δ segments)", .tau_contour.len(), .delta_contour.len())]
    Inversion {
        tau_contour: Box<Vec<Polyline>>,
        delta_contour: Box<Vec<Polyline>>,
    },

    #[error("at grid point {index} (Δ_cav = {detuning:.6e} rad/s): {source}")]
    AtGridPoint {
        index: usize,
        detuning: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = core::result::Result<T, Error>;
