use alloc::vec::Vec;

use super::{AtomicBasis, Laser, Level, Polarization, RabiNormalization, SystemParams, Term};
use crate::linalg::CsrMatrix;
use crate::math::sqrt;
use crate::qops::{annihilator, clebsch_gordan, CompositeSpace, HalfInt, QOperator};
use crate::{Error, Result, C64};

/// mJ · g_J · (μ_B/ħ) · B, in rad/s.
pub fn zeeman_shift(level: &Level, b_field: f64, zeeman_unit: f64) -> f64 {
    level.mj.value() * level.lande_g * zeeman_unit * b_field
}

pub fn composite_space(p: &SystemParams) -> Result<CompositeSpace> {
    p.mode_polarizations()?;
    CompositeSpace::new(AtomicBasis::calcium40().len(), p.fock_cutoff, p.cavity_modes)
}

fn cg(lower: Term, ml: HalfInt, q: i32, upper: Term, mu: HalfInt) -> f64 {
    clebsch_gordan(lower.j(), ml, HalfInt::ONE, HalfInt::from_int(q), upper.j(), mu)
        .expect("sublevels of the basis are valid angular momenta")
}

/// Σ_m ⟨J_l m; 1 q | J_u m+q⟩ |upper, m+q⟩⟨lower, m| on the bare atom.
pub fn transition_operator(lower: Term, upper: Term, q: i32) -> CsrMatrix {
    let basis = AtomicBasis::calcium40();
    let dq = HalfInt::from_int(q);
    let mut t = Vec::new();
    for l in basis.manifold(lower) {
        let ml = basis.level(l).mj;
        let mu = ml.add(dq);
        if let Some(u) = basis.index_of(upper, mu) {
            let c = cg(lower, ml, q, upper, mu);
            if c != 0.0 {
                t.push((u, l, C64::new(c, 0.0)));
            }
        }
    }
    CsrMatrix::from_triplets(basis.len(), basis.len(), &t).expect("indices in range")
}

fn strongest_cg(lower: Term, upper: Term) -> f64 {
    (-1..=1)
        .map(|q| transition_operator(lower, upper, q).max_abs())
        .fold(0.0, f64::max)
}

fn channel_scale(norm: RabiNormalization, lower: Term, upper: Term) -> f64 {
    match norm {
        RabiNormalization::ReducedMatrixElement => 1.0,
        RabiNormalization::StrongestChannel => 1.0 / strongest_cg(lower, upper),
    }
}

/// Raising operator of `lower → upper` projected on `pol` (atom only).
fn polarized_raising(lower: Term, upper: Term, pol: &Polarization) -> Result<CsrMatrix> {
    let mut acc = CsrMatrix::zeros(18, 18);
    for q in -1..=1 {
        let e = pol.component(q);
        if e.norm() > 0.0 {
            acc = acc.add_scaled(&transition_operator(lower, upper, q), e)?;
        }
    }
    Ok(acc)
}

fn on_composite(atom: &CsrMatrix, space: &CompositeSpace) -> CsrMatrix {
    atom.kron(&CsrMatrix::identity(space.field_dim()))
}

fn mode_annihilator(space: &CompositeSpace, mode: usize) -> CsrMatrix {
    let levels = space.fock_levels();
    let a = annihilator(space.fock_cutoff).to_sparse();
    let mut field = CsrMatrix::identity(1);
    for k in 0..space.modes {
        let f = if k == mode {
            a.clone()
        } else {
            CsrMatrix::identity(levels)
        };
        field = field.kron(&f);
    }
    CsrMatrix::identity(space.atom_dim).kron(&field)
}

fn manifold_energy(p: &SystemParams, term: Term) -> f64 {
    let (d397, d850, d854) = (
        p.laser_397.detuning,
        p.laser_850.detuning,
        p.laser_854.detuning,
    );
    match term {
        Term::S12 => 0.0,
        Term::P12 | Term::D32 => -d397,
        Term::P32 => -d397 - d850,
        Term::D52 => -d397 - d850 + d854,
    }
}

/// Rotating-frame Hamiltonian on atom ⊗ cavity modes (rad/s).
pub fn build_hamiltonian(p: &SystemParams) -> Result<QOperator> {
    p.validate()?;
    let space = composite_space(p)?;
    let basis = AtomicBasis::calcium40();

    let diag: Vec<C64> = basis
        .levels()
        .iter()
        .map(|l| C64::new(manifold_energy(p, l.term) + zeeman_shift(l, p.b_field, p.zeeman_unit), 0.0))
        .collect();
    let mut atom = CsrMatrix::diagonal(&diag);

    for laser in [Laser::L397, Laser::L850, Laser::L854] {
        let lp = p.laser(laser);
        if lp.rabi == 0.0 {
            continue;
        }
        let (lower, upper) = laser.transition();
        let scale = 0.5 * lp.rabi * channel_scale(p.normalization, lower, upper);
        let x = polarized_raising(lower, upper, &lp.polarization)?.scale(C64::new(scale, 0.0));
        atom = atom.add(&x)?.add(&x.adjoint())?;
    }
    let mut h = on_composite(&atom, &space);

    let pols = p.mode_polarizations()?;
    if p.g_bar != 0.0 {
        let g = p.g_bar * channel_scale(p.normalization, Term::D32, Term::P12);
        for (k, pol) in pols.iter().enumerate() {
            // absorbing a cavity photon: |P₁/₂, m+q⟩⟨D₃/₂, m| a_k
            let raise = on_composite(&polarized_raising(Term::D32, Term::P12, pol)?, &space);
            let x = raise
                .matmul(&mode_annihilator(&space, k))?
                .scale(C64::new(g, 0.0));
            h = h.add(&x)?.add(&x.adjoint())?;
        }
    }
    let n = cavity_number_operator(p)?.to_sparse();
    h = h.add_scaled(&n, C64::new(p.delta_cav, 0.0))?;
    QOperator::from_sparse(h)
}

/// Σ_k a_k† a_k on the composite space.
pub fn cavity_number_operator(p: &SystemParams) -> Result<QOperator> {
    let space = composite_space(p)?;
    let mut n = CsrMatrix::zeros(space.dim(), space.dim());
    for k in 0..space.modes {
        let a = mode_annihilator(&space, k);
        n = n.add(&a.adjoint().matmul(&a)?)?;
    }
    QOperator::from_sparse(n)
}

/// Spontaneous emission, one operator per (channel, q), and cavity loss
/// √(2κ)·a_k. Channels with zero rate are left out.
pub fn build_collapse_ops(p: &SystemParams) -> Result<Vec<QOperator>> {
    let space = composite_space(p)?;
    let mut ops = Vec::new();
    for (upper, lower, rate) in p.decay.channels() {
        if !(rate >= 0.0) {
            return Err(Error::Configuration("decay rates must be ≥ 0".into()));
        }
        if rate == 0.0 {
            continue;
        }
        for q in -1..=1 {
            let lowering = transition_operator(lower, upper, q).transpose();
            if lowering.max_abs() == 0.0 {
                continue;
            }
            let c = on_composite(&lowering, &space).scale(C64::new(sqrt(rate), 0.0));
            ops.push(QOperator::from_sparse(c)?);
        }
    }
    if p.kappa > 0.0 {
        for k in 0..space.modes {
            let a = mode_annihilator(&space, k).scale(C64::new(sqrt(2.0 * p.kappa), 0.0));
            ops.push(QOperator::from_sparse(a)?);
        }
    }
    Ok(ops)
}

/// Projector onto every sublevel of `term` (any photon number).
pub fn manifold_projector(p: &SystemParams, term: Term) -> Result<QOperator> {
    let space = composite_space(p)?;
    let basis = AtomicBasis::calcium40();
    let d: Vec<C64> = basis
        .levels()
        .iter()
        .map(|l| C64::new(if l.term == term { 1.0 } else { 0.0 }, 0.0))
        .collect();
    QOperator::from_sparse(on_composite(&CsrMatrix::diagonal(&d), &space))
}

/// UV photon emission rate: Γ₁·P(P₁/₂) [+ Γ(P₃/₂→S₁/₂)·P(P₃/₂) at 393 nm].
pub fn uv_fluorescence_observable(p: &SystemParams, include_393: bool) -> Result<QOperator> {
    let mut op = manifold_projector(p, Term::P12)?.scale(C64::new(p.decay.p12_s12, 0.0));
    if include_393 {
        let p32 = manifold_projector(p, Term::P32)?.scale(C64::new(p.decay.p32_s12, 0.0));
        op = op.add(&p32)?;
    }
    Ok(op)
}

/// Photon emission rate through the cavity, Σ_k 2κ·a_k†a_k.
pub fn cavity_emission_observable(p: &SystemParams) -> Result<QOperator> {
    Ok(cavity_number_operator(p)?.scale(C64::new(2.0 * p.kappa, 0.0)))
}
