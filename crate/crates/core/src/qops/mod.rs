//! Quantum operators on the composite atom ⊗ cavity space and the
//! angular-momentum algebra needed to couple Zeeman sublevels.

mod cg;
mod halfint;
mod ket;
mod operator;

pub use cg::{clebsch_gordan, clebsch_gordan_f64};
pub use halfint::HalfInt;
pub use ket::{CompositeSpace, KetIndex};
pub use operator::{annihilator, dagger, kron, kron_all, QOperator};
