//! Measurement pipelines on top of the full model: shelving transients,
//! cavity-detuning scans with inhomogeneous broadening, the (ḡ₀, σ)
//! inversion and the repumper-detuning suppression sweep.

mod contour;
mod fit;
mod inversion;
mod model;
mod quadrature;
mod scan;
mod spline;
mod suppression;
mod transient;

pub use contour::{contour_lines, intersections, GridView};
pub(crate) use fit::initial_tau_estimate;
pub use fit::{fit_exponential, fit_lorentzian, ExpFit, LorentzFit};
pub use inversion::{
    forward_observables, invert_parameters, invert_parameters_with, DeltaSurface, InversionGrid,
    InversionOptions, InversionResult, Surfaces,
};
pub use model::CavityModel;
pub use quadrature::{gauss_hermite, normal_nodes};
pub use scan::{
    analyze_scan, broaden, cavity_scan, cavity_scan_with, max_suppression, pearson, raman_grid,
    ScanAnalysis, ScanModel, ScanOptions, Spectrum, SpectrumKind,
};
pub use suppression::{suppression_sweep, suppression_sweep_with, SuppressionPoint};
pub use transient::{
    calibrate_omega397, shelving_transient, shelving_transient_with, switched_off,
    CalibrationOptions, ShelvingModel, Transient, TransientOptions,
};
