//! Unit conventions.
//!
//! Internally every frequency is an angular frequency in rad/s and every time
//! is in seconds. Human-facing values follow the "2π·X MHz" habit: a number
//! `X` in MHz stands for the angular frequency `2π·X·10⁶ rad/s`.

use core::f64::consts::PI;

/// μ_B / ħ in rad s⁻¹ T⁻¹ (CODATA 2018: μ_B/h = 13.996 244 936 GHz/T).
pub const BOHR_MAGNETON_ANGULAR: f64 = 2.0 * PI * 13.996_244_936_1e9;

/// One gauss in tesla.
pub const GAUSS: f64 = 1e-4;

/// `2π·mhz·10⁶`.
#[inline]
pub fn mhz_2pi(mhz: f64) -> f64 {
    2.0 * PI * mhz * 1e6
}

/// Inverse of [`mhz_2pi`].
#[inline]
pub fn to_mhz_2pi(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e6)
}

#[inline]
pub fn ns(t: f64) -> f64 {
    t * 1e-9
}

#[inline]
pub fn to_ns(t: f64) -> f64 {
    t * 1e9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mhz_round_trip() {
        assert_eq!(to_mhz_2pi(mhz_2pi(1.0)), 1.0);
        assert!((mhz_2pi(4.2) - 2.638_937_829e7).abs() < 1.0);
    }
}
