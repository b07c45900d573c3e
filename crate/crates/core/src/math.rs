//! Scalar math routed through `libm` so the crate builds without `std`.

pub(crate) use libm::{ceil, exp, fabs as abs, log, nextafter, pow, sqrt};

