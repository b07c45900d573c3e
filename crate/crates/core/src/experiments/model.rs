use alloc::vec::Vec;

use crate::atom::{self, SystemParams};
use crate::lindblad::{commutator_diagonal, DensityMatrix, Liouvillian, SteadyStateSolver};
use crate::{Result, C64};

/// The full model at fixed parameters, evaluated at arbitrary cavity
/// detunings by shifting the Liouvillian diagonal.
#[derive(Debug, Clone)]
pub struct CavityModel {
    params: SystemParams,
    base: Liouvillian,
    shift: Vec<C64>,
    solver: SteadyStateSolver,
}

impl CavityModel {
    pub fn new(p: &SystemParams) -> Result<Self> {
        p.validate()?;
        let mut q = p.clone();
        q.delta_cav = 0.0;
        let base = Liouvillian::assemble(&atom::build_hamiltonian(&q)?, &atom::build_collapse_ops(&q)?)?;
        let shift = commutator_diagonal(&atom::cavity_number_operator(&q)?)?;
        let solver = SteadyStateSolver::new(&base)?;
        Ok(Self {
            params: p.clone(),
            base,
            shift,
            solver,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn steady_state(&self, delta_cav: f64) -> Result<DensityMatrix> {
        self.solver.solve_shifted(&self.shift, delta_cav)
    }

    pub fn liouvillian(&self, delta_cav: f64) -> Result<Liouvillian> {
        self.base.with_diagonal_shift(&self.shift, delta_cav)
    }
}
