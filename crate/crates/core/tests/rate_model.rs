use proptest::prelude::*;
use purcell_core::atom::SystemParams;
use purcell_core::effective::{effective_rates_from_full, normalized_fluorescence_eq1, steady_populations, RateParams};
use purcell_core::units::mhz_2pi;

fn exact_ratio(r: &RateParams) -> f64 {
    steady_populations(r, true).unwrap()[1] / steady_populations(r, false).unwrap()[1]
}

fn rates(gamma1: f64, gamma2: f64, v: f64, w: f64, pump: f64) -> RateParams {
    RateParams {
        gamma1,
        gamma2,
        gamma2_prime: gamma2 / v,
        gamma3: w * gamma2 / v,
        pump,
    }
}

proptest! {
    #[test]
    fn closed_form_within_two_percent_in_validity_regime(
        gamma1 in 1e7f64..1e9,
        ratio in 1e-4f64..0.02,
        v in 0.02f64..=1.0,
        w in 0.0f64..10.0,
        pump_scale in 0.01f64..100.0,
    ) {
        let gamma2 = ratio * gamma1;
        let pump = pump_scale * gamma1;
        let r = rates(gamma1, gamma2, v, w, pump);
        prop_assume!(gamma1 + pump > 50.0 * r.gamma2.max(r.gamma2_prime));
        let approx = normalized_fluorescence_eq1(v, w, gamma1, pump).unwrap();
        let exact = exact_ratio(&r);
        prop_assert!((approx / exact - 1.0).abs() < 0.02, "{approx} vs {exact}");
    }

    #[test]
    fn populations_are_a_distribution(
        g1 in 0.0f64..1e9, g2 in 0.0f64..1e8, g2p in 0.0f64..1e8, g3 in 0.0f64..1e7, pump in 1e3f64..1e9,
    ) {
        let r = RateParams { gamma1: g1, gamma2: g2, gamma2_prime: g2p, gamma3: g3, pump };
        for prime in [false, true] {
            if let Ok(n) = steady_populations(&r, prime) {
                prop_assert_eq!(n.iter().sum::<f64>(), 1.0);
                prop_assert!(n.iter().all(|x| (0.0..=1.0).contains(x)));
            }
        }
    }
}

/// Γ₁ + V > 50·Γ₂ alone does not bound the error once Γ₂′ ≫ Γ₂.
#[test]
fn cavity_enhanced_leak_needs_its_own_bound() {
    let (gamma1, gamma2, pump) = (1.355e8, 9.32e6 / 20.0, 1.5e7);
    assert!(gamma1 + pump > 50.0 * gamma2);
    let r = rates(gamma1, gamma2, 0.01, 0.05, pump);
    assert!(gamma1 + pump < 50.0 * r.gamma2_prime);
    let err = (normalized_fluorescence_eq1(0.01, 0.05, gamma1, pump).unwrap() / exact_ratio(&r) - 1.0).abs();
    assert!(err > 0.02, "{err}");
}

#[test]
fn rates_from_full_model() {
    let p = SystemParams::measured_defaults();
    let r = effective_rates_from_full(&p).unwrap();
    assert_eq!(r.gamma1, p.decay.p12_s12);
    assert_eq!(r.gamma2, p.decay.p12_d32);
    assert!(r.pump > 0.0 && r.gamma3 > 0.0);
    // the cavity enhances the P₁/₂ → D₃/₂ leak
    assert!(r.gamma2_prime > 2.0 * r.gamma2);
    let f = normalized_fluorescence_eq1(r.v(), r.w(), r.gamma1, r.pump).unwrap();
    assert!(f > 0.0 && f < 1.0);
}

#[test]
fn uncoupled_cavity_leaves_leak_unchanged() {
    let mut p = SystemParams::measured_defaults();
    p.g_bar = 0.0;
    let r = effective_rates_from_full(&p).unwrap();
    assert!((r.gamma2_prime / r.gamma2 - 1.0).abs() < 0.10, "{}", r.gamma2_prime / r.gamma2);
}

#[test]
fn dark_repumpers_give_no_repump_rate() {
    let mut p = SystemParams::measured_defaults();
    p.laser_850.rabi = 0.0;
    p.laser_854.rabi = 0.0;
    assert_eq!(effective_rates_from_full(&p).unwrap().gamma3, 0.0);
}

#[test]
fn detuned_repumper_lowers_w_and_deepens_suppression() {
    let p = SystemParams::measured_defaults();
    let mut q = p.clone();
    q.laser_850.detuning = mhz_2pi(-20.0);
    let (a, b) = (effective_rates_from_full(&p).unwrap(), effective_rates_from_full(&q).unwrap());
    assert!(b.gamma3 < a.gamma3);
    assert!(b.w() < a.w());
    let fa = normalized_fluorescence_eq1(a.v(), a.w(), a.gamma1, a.pump).unwrap();
    let fb = normalized_fluorescence_eq1(b.v(), b.w(), b.gamma1, b.pump).unwrap();
    assert!(fb < fa);
}
