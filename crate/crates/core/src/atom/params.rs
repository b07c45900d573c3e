use crate::math::sqrt;
use crate::units::{mhz_2pi, BOHR_MAGNETON_ANGULAR, GAUSS};
use crate::{Error, Result, C64};

use super::Term;

/// Field polarization in the spherical basis (σ⁻, π, σ⁺) relative to the
/// magnetic field axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarization {
    pub sigma_minus: C64,
    pub pi: C64,
    pub sigma_plus: C64,
}

impl Polarization {
    pub const fn new(sigma_minus: C64, pi: C64, sigma_plus: C64) -> Self {
        Self {
            sigma_minus,
            pi,
            sigma_plus,
        }
    }

    pub const fn pi() -> Self {
        Self::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    pub const fn sigma_plus() -> Self {
        Self::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    pub const fn sigma_minus() -> Self {
        Self::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0))
    }

    /// Linear polarization perpendicular to the field axis, (σ⁺ + σ⁻)/√2.
    pub fn horizontal() -> Self {
        let h = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new(h, C64::new(0.0, 0.0), h)
    }

    /// Component for Δm = q.
    pub fn component(&self, q: i32) -> C64 {
        match q {
            -1 => self.sigma_minus,
            0 => self.pi,
            1 => self.sigma_plus,
            _ => C64::new(0.0, 0.0),
        }
    }

    pub fn norm(&self) -> f64 {
        sqrt(self.sigma_minus.norm_sqr() + self.pi.norm_sqr() + self.sigma_plus.norm_sqr())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserParams {
    /// Rabi frequency, rad/s.
    pub rabi: f64,
    /// Laser minus transition frequency, rad/s.
    pub detuning: f64,
    pub polarization: Polarization,
}

/// The three driving lasers and the transitions they address.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Laser {
    /// S₁/₂ ↔ P₁/₂
    L397,
    /// D₃/₂ ↔ P₃/₂
    L850,
    /// D₅/₂ ↔ P₃/₂
    L854,
}

impl Laser {
    /// (lower, upper) terms.
    pub fn transition(self) -> (Term, Term) {
        match self {
            Laser::L397 => (Term::S12, Term::P12),
            Laser::L850 => (Term::D32, Term::P32),
            Laser::L854 => (Term::D52, Term::P32),
        }
    }
}

/// Spontaneous decay rates (population, s⁻¹) of the two P manifolds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicRates {
    /// P₁/₂ → S₁/₂ (Γ₁)
    pub p12_s12: f64,
    /// P₁/₂ → D₃/₂ (Γ₂)
    pub p12_d32: f64,
    pub p32_s12: f64,
    pub p32_d32: f64,
    pub p32_d52: f64,
}

impl AtomicRates {
    /// τ(P₁/₂) = 6.904 ns with D₃/₂ branching 0.06435; τ(P₃/₂) = 6.639 ns with
    /// branching 0.9347 / 0.00661 / 0.0587 to S₁/₂ / D₃/₂ / D₅/₂.
    pub const CALCIUM40: AtomicRates = AtomicRates {
        p12_s12: 1.35523e8,
        p12_d32: 9.3207e6,
        p32_s12: 1.40789e8,
        p32_d32: 9.956e5,
        p32_d52: 8.8417e6,
    };

    pub fn p12_total(&self) -> f64 {
        self.p12_s12 + self.p12_d32
    }

    pub fn p32_total(&self) -> f64 {
        self.p32_s12 + self.p32_d32 + self.p32_d52
    }

    /// Every (upper, lower, rate) channel.
    pub fn channels(&self) -> [(Term, Term, f64); 5] {
        [
            (Term::P12, Term::S12, self.p12_s12),
            (Term::P12, Term::D32, self.p12_d32),
            (Term::P32, Term::S12, self.p32_s12),
            (Term::P32, Term::D32, self.p32_d32),
            (Term::P32, Term::D52, self.p32_d52),
        ]
    }
}

/// How a Rabi frequency (or ḡ₀) is distributed over the Zeeman channels of a
/// transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RabiNormalization {
    /// Channel coupling = Ω · ⟨J_l m; 1 q | J_u m+q⟩.
    #[default]
    ReducedMatrixElement,
    /// Channel coupling = Ω · CG / max|CG|, so Ω is the Rabi frequency of the
    /// strongest channel of the transition.
    StrongestChannel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub laser_397: LaserParams,
    pub laser_850: LaserParams,
    pub laser_854: LaserParams,
    /// Spatially averaged coupling ḡ₀, rad/s.
    pub g_bar: f64,
    /// Cavity field decay rate (HWHM), rad/s.
    pub kappa: f64,
    /// Standard deviation of the cavity detuning distribution, rad/s.
    pub sigma_inhom: f64,
    /// Cavity minus 866 nm resonance frequency, rad/s.
    pub delta_cav: f64,
    /// Tesla.
    pub b_field: f64,
    /// μ_B/ħ, rad s⁻¹ T⁻¹.
    pub zeeman_unit: f64,
    pub decay: AtomicRates,
    pub fock_cutoff: usize,
    /// 2: degenerate σ⁺ and σ⁻ modes along the field axis. 1: a single mode
    /// with [`SystemParams::cavity_polarization`].
    pub cavity_modes: usize,
    pub cavity_polarization: Option<Polarization>,
    pub normalization: RabiNormalization,
}

impl SystemParams {
    /// Measured laser parameters, ḡ₀ = 2π·5.3 MHz, σ = 2π·3.1 MHz, Raman
    /// resonant cavity, B = 0.78 G.
    pub fn measured_defaults() -> Self {
        Self {
            laser_397: LaserParams {
                rabi: mhz_2pi(18.2),
                detuning: mhz_2pi(-11.4),
                polarization: Polarization::pi(),
            },
            laser_850: LaserParams {
                rabi: mhz_2pi(6.5),
                detuning: mhz_2pi(-1.1),
                polarization: Polarization::horizontal(),
            },
            laser_854: LaserParams {
                rabi: mhz_2pi(8.9),
                detuning: mhz_2pi(24.8),
                polarization: Polarization::horizontal(),
            },
            g_bar: mhz_2pi(5.3),
            kappa: mhz_2pi(4.2),
            sigma_inhom: mhz_2pi(3.1),
            delta_cav: mhz_2pi(-11.4),
            b_field: 0.78 * GAUSS,
            zeeman_unit: BOHR_MAGNETON_ANGULAR,
            decay: AtomicRates::CALCIUM40,
            fock_cutoff: 1,
            cavity_modes: 2,
            cavity_polarization: None,
            normalization: RabiNormalization::ReducedMatrixElement,
        }
    }

    pub fn laser(&self, laser: Laser) -> &LaserParams {
        match laser {
            Laser::L397 => &self.laser_397,
            Laser::L850 => &self.laser_850,
            Laser::L854 => &self.laser_854,
        }
    }

    pub fn laser_mut(&mut self, laser: Laser) -> &mut LaserParams {
        match laser {
            Laser::L397 => &mut self.laser_397,
            Laser::L850 => &mut self.laser_850,
            Laser::L854 => &mut self.laser_854,
        }
    }

    /// Amplitude (dipole) decay rate of P₁/₂, γ = (Γ₁ + Γ₂)/2.
    pub fn gamma(&self) -> f64 {
        0.5 * self.decay.p12_total()
    }

    /// C = ḡ₀² / (2κγ)
    pub fn cooperativity(&self) -> f64 {
        cooperativity(self.g_bar, self.kappa, self.gamma())
    }

    /// Polarization vector of each cavity mode, in mode order.
    pub fn mode_polarizations(&self) -> Result<alloc::vec::Vec<Polarization>> {
        match (self.cavity_modes, self.cavity_polarization) {
            (2, None) => Ok(alloc::vec![Polarization::sigma_plus(), Polarization::sigma_minus()]),
            (2, Some(_)) => Err(Error::Configuration(
                "two cavity modes are fixed to σ⁺/σ⁻; a mode polarization only applies to one mode"
                    .into(),
            )),
            (1, pol) => {
                let pol = pol.unwrap_or_else(Polarization::horizontal);
                if pol.pi.norm() > 1e-12 {
                    return Err(Error::Configuration(
                        "a mode along the field axis has no π component".into(),
                    ));
                }
                if (pol.norm() - 1.0).abs() > 1e-12 {
                    return Err(Error::Configuration("mode polarization must be normalized".into()));
                }
                Ok(alloc::vec![pol])
            }
            (n, _) => Err(Error::Configuration(alloc::format!(
                "cavity_modes must be 1 or 2, got {n}"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.g_bar,
            self.kappa,
            self.sigma_inhom,
            self.delta_cav,
            self.b_field,
            self.zeeman_unit,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::Configuration("non-finite parameter".into()));
        }
        for (name, l) in [
            ("397", &self.laser_397),
            ("850", &self.laser_850),
            ("854", &self.laser_854),
        ] {
            if !l.rabi.is_finite() || !l.detuning.is_finite() || l.rabi < 0.0 {
                return Err(Error::Configuration(alloc::format!(
                    "laser {name}: Rabi frequency must be finite and ≥ 0"
                )));
            }
            if (l.polarization.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::Configuration(alloc::format!(
                    "laser {name}: polarization must have unit norm"
                )));
            }
        }
        if self.kappa <= 0.0 {
            return Err(Error::Configuration("kappa must be > 0".into()));
        }
        if self.g_bar < 0.0 || self.sigma_inhom < 0.0 {
            return Err(Error::Configuration("g_bar and sigma must be ≥ 0".into()));
        }
        let rates = self.decay.channels();
        if rates.iter().any(|&(_, _, r)| !(r >= 0.0) || !r.is_finite()) {
            return Err(Error::Configuration("decay rates must be finite and ≥ 0".into()));
        }
        if self.fock_cutoff < 1 {
            return Err(Error::Configuration("fock_cutoff must be ≥ 1".into()));
        }
        self.mode_polarizations()?;
        Ok(())
    }
}

/// C = ḡ₀² / (2κγ)
pub fn cooperativity(g_bar: f64, kappa: f64, gamma: f64) -> f64 {
    g_bar * g_bar / (2.0 * kappa * gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = SystemParams::measured_defaults();
        p.validate().unwrap();
        assert!((p.laser_397.polarization.norm() - 1.0).abs() < 1e-12);
        assert!((p.laser_850.polarization.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn default_cooperativity() {
        let c = SystemParams::measured_defaults().cooperativity();
        assert!((c - 0.30).abs() < 0.03, "C = {c}");
    }

    #[test]
    fn validation_errors() {
        let mut p = SystemParams::measured_defaults();
        p.kappa = -1.0;
        assert!(p.validate().is_err());
        let mut p = SystemParams::measured_defaults();
        p.fock_cutoff = 0;
        assert!(p.validate().is_err());
        let mut p = SystemParams::measured_defaults();
        p.cavity_modes = 3;
        assert!(matches!(p.validate(), Err(Error::Configuration(_))));
        let mut p = SystemParams::measured_defaults();
        p.cavity_polarization = Some(Polarization::sigma_plus());
        assert!(matches!(p.validate(), Err(Error::Configuration(_))));
        let mut p = SystemParams::measured_defaults();
        p.cavity_modes = 1;
        p.cavity_polarization = Some(Polarization::pi());
        assert!(matches!(p.validate(), Err(Error::Configuration(_))));
    }
}
