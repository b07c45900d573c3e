use core::fmt;

use crate::{Error, Result};

/// A half-integer quantum number stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);
    pub const ONE: HalfInt = HalfInt(2);

    pub const fn from_twice(twice: i32) -> Self {
        Self(twice)
    }

    pub const fn from_int(n: i32) -> Self {
        Self(2 * n)
    }

    /// Rejects anything that is not an integer multiple of 1/2.
    pub fn from_f64(x: f64) -> Result<Self> {
        let t = x * 2.0;
        let r = libm::round(t);
        if !x.is_finite() || libm::fabs(t - r) > 1e-9 || libm::fabs(r) > 1e6 {
            return Err(Error::InvalidInput(alloc::format!(
                "{x} is not a half-integer"
            )));
        }
        Ok(Self(r as i32))
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub const fn neg(self) -> Self {
        Self(-self.0)
    }

    pub const fn add(self, other: Self) -> Self {
        Self(self.0 + other.0)
    }

    pub const fn sub(self, other: Self) -> Self {
        Self(self.0 - other.0)
    }

    /// The projections −j, −j+1, …, j.
    pub fn projections(self) -> impl Iterator<Item = HalfInt> {
        let j = self.0;
        (-j..=j).step_by(2).map(HalfInt)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_half_integers() {
        assert_eq!(HalfInt::from_f64(1.5).unwrap(), HalfInt::from_twice(3));
        assert_eq!(HalfInt::from_f64(-2.0).unwrap(), HalfInt::from_int(-2));
        assert!(HalfInt::from_f64(0.3).is_err());
        assert!(HalfInt::from_f64(f64::NAN).is_err());
    }

    #[test]
    fn projections_cover_multiplet() {
        let m: alloc::vec::Vec<_> = HalfInt::from_twice(3).projections().map(|m| m.twice()).collect();
        assert_eq!(m, [-3, -1, 1, 3]);
        assert_eq!(alloc::format!("{}", HalfInt::from_twice(-3)), "-3/2");
    }
}
