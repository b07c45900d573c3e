use purcell_core::atom::{self, AtomicBasis, SystemParams, Term};
use purcell_core::lindblad::{evolve_with, expect, steady_state, DensityMatrix, EvolveOptions, Liouvillian};
use purcell_core::linalg::DenseMatrix;
use purcell_core::qops::HalfInt;
use purcell_core::units::mhz_2pi;
use purcell_core::C64;

fn liouvillian(p: &SystemParams) -> Liouvillian {
    Liouvillian::assemble(&atom::build_hamiltonian(p).unwrap(), &atom::build_collapse_ops(p).unwrap()).unwrap()
}

fn emission(p: &SystemParams, rho: &DensityMatrix) -> f64 {
    expect(&atom::cavity_emission_observable(p).unwrap(), rho).unwrap().re
}

fn uv(p: &SystemParams, rho: &DensityMatrix) -> f64 {
    expect(&atom::uv_fluorescence_observable(p, true).unwrap(), rho).unwrap().re
}

fn atomic_populations(p: &SystemParams, rho: &DensityMatrix) -> Vec<f64> {
    let f = atom::composite_space(p).unwrap().field_dim();
    let pops = rho.populations();
    (0..18).map(|a| (0..f).map(|k| pops[a * f + k]).sum()).collect()
}

#[test]
fn steady_state_satisfies_invariants_across_detunings() {
    let p = SystemParams::measured_defaults();
    for d in [-40.0, -11.4, 0.0, 25.0] {
        let mut q = p.clone();
        q.delta_cav = mhz_2pi(d);
        let rho = steady_state(&liouvillian(&q)).unwrap();
        assert!((rho.trace() - 1.0).norm() < 1e-10);
        assert!(rho.hermitian_defect() < 1e-10);
        assert!(rho.min_eigenvalue().unwrap() > -1e-8);
    }
}

#[test]
fn mirror_symmetry_under_field_reversal() {
    let p = SystemParams::measured_defaults();
    let mut q = p.clone();
    q.b_field = -p.b_field;
    let a = atomic_populations(&p, &steady_state(&liouvillian(&p)).unwrap());
    let b = atomic_populations(&q, &steady_state(&liouvillian(&q)).unwrap());
    let basis = AtomicBasis::calcium40();
    for (i, level) in basis.levels().iter().enumerate() {
        let j = basis.index_of(level.term, level.mj.neg()).unwrap();
        assert!((a[i] - b[j]).abs() < 1e-9, "{i} vs {j}");
    }
}

#[test]
fn field_breaks_mirror_symmetry() {
    let mut p = SystemParams::measured_defaults();
    p.b_field = 5e-4;
    let rho = steady_state(&liouvillian(&p)).unwrap();
    let pops = atomic_populations(&p, &rho);
    let basis = AtomicBasis::calcium40();
    let up = basis.index_of(Term::S12, HalfInt::HALF).unwrap();
    let down = basis.index_of(Term::S12, HalfInt::HALF.neg()).unwrap();
    assert!((pops[up] - pops[down]).abs() > 1e-6);
}

#[test]
fn uncoupled_cavity_emits_nothing() {
    let mut p = SystemParams::measured_defaults();
    p.g_bar = 0.0;
    let rho = steady_state(&liouvillian(&p)).unwrap();
    assert!(emission(&p, &rho).abs() < 1e-12);
}

#[test]
fn mode_count_irrelevant_without_coupling() {
    let mut two = SystemParams::measured_defaults();
    two.g_bar = 0.0;
    let mut one = two.clone();
    one.cavity_modes = 1;
    let r2 = steady_state(&liouvillian(&two)).unwrap();
    let r1 = steady_state(&liouvillian(&one)).unwrap();
    let (a, b) = (atomic_populations(&two, &r2), atomic_populations(&one, &r1));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-10);
    }
    assert!((uv(&two, &r2) / uv(&one, &r1) - 1.0).abs() < 1e-10);
}

#[test]
fn fock_cutoff_two_changes_emission_by_under_two_percent() {
    let p = SystemParams::measured_defaults();
    let mut q = p.clone();
    q.fock_cutoff = 2;
    let a = emission(&p, &steady_state(&liouvillian(&p)).unwrap());
    let b = emission(&q, &steady_state(&liouvillian(&q)).unwrap());
    assert!((a / b - 1.0).abs() < 0.02, "{a} vs {b}");
}

#[test]
fn emission_grows_with_coupling() {
    let mut last = 0.0;
    for g in [2.0, 4.0, 6.0, 8.0] {
        let mut p = SystemParams::measured_defaults();
        p.g_bar = mhz_2pi(g);
        let e = emission(&p, &steady_state(&liouvillian(&p)).unwrap());
        assert!(e > last, "ḡ₀/2π = {g}: {e} ≤ {last}");
        last = e;
    }
}

fn s_mixture(p: &SystemParams) -> DensityMatrix {
    let f = atom::composite_space(p).unwrap().field_dim();
    let seeds: Vec<usize> = AtomicBasis::calcium40().manifold(Term::S12).map(|a| a * f).collect();
    DensityMatrix::mixture(atom::composite_space(p).unwrap().dim(), &seeds).unwrap()
}

#[test]
fn long_evolution_reaches_steady_state() {
    let p = SystemParams::measured_defaults();
    let l = liouvillian(&p);
    let opts = EvolveOptions {
        rtol: 1e-9,
        atol: 1e-12,
        ..EvolveOptions::default()
    };
    let out = evolve_with(&s_mixture(&p), &l, &[0.0, 50e-6], &opts).unwrap();
    let rho_ss = steady_state(&l).unwrap();
    let diff = out[1].matrix().max_abs_diff(rho_ss.matrix());
    assert!(diff < 1e-6, "{diff}");
}

#[test]
fn steady_state_is_a_fixed_point() {
    let p = SystemParams::measured_defaults();
    let l = liouvillian(&p);
    let rho = steady_state(&l).unwrap();
    let out = evolve_with(&rho, &l, &[0.0, 10e-6], &EvolveOptions::default()).unwrap();
    assert!(out[1].matrix().max_abs_diff(rho.matrix()) < 1e-8);
}

/// Bordered dense solve of `Lρ = 0, Tr ρ = 1` on the full superoperator.
fn dense_steady_state(l: &Liouvillian) -> DenseMatrix {
    let n = l.superop_dim();
    let d = l.hilbert_dim();
    let mut a = DenseMatrix::zeros(n, n);
    for r in 0..n {
        for (c, v) in l.matrix().row(r) {
            a[(r, c)] = v;
        }
    }
    for c in 0..n {
        a[(0, c)] = C64::new(0.0, 0.0);
    }
    for i in 0..d {
        a[(0, i + i * d)] = C64::new(1.0, 0.0);
    }
    let mut b = vec![C64::new(0.0, 0.0); n];
    b[0] = C64::new(1.0, 0.0);
    let x = a.lu().unwrap().solve(&b).unwrap();
    DenseMatrix::from_column_stacked(d, d, &x).unwrap()
}

#[test]
fn sparse_solver_matches_dense_solve() {
    let mut p = SystemParams::measured_defaults();
    p.cavity_modes = 1;
    let l = liouvillian(&p);
    let sparse = steady_state(&l).unwrap();
    let dense = dense_steady_state(&l);
    assert!(sparse.matrix().max_abs_diff(&dense) < 1e-9);
}

#[test]
fn single_mode_polarization_must_be_transverse() {
    let mut p = SystemParams::measured_defaults();
    p.cavity_modes = 1;
    p.cavity_polarization = Some(purcell_core::atom::Polarization::pi());
    assert!(p.validate().is_err());
}
