use std::fmt;
use std::ops::{Add, Mul, Neg};

use num_traits::{One, Zero};

use crate::rational::{format_rational, Q};
use crate::signs::SignBit;

/// Coefficient ring of a graded space.
pub trait Scalar:
    Clone + fmt::Debug + PartialEq + Zero + One + Neg<Output = Self> + Send + Sync + 'static
{
    const RING: &'static str;

    fn from_rational(q: &Q) -> Result<Self, String>;

    fn to_text(&self) -> String;

    fn signed(self, s: SignBit) -> Self {
        if s.is_minus() {
            -self
        } else {
            self
        }
    }
}

impl Scalar for Q {
    const RING: &'static str = "Q";

    fn from_rational(q: &Q) -> Result<Self, String> {
        Ok(*q)
    }

    fn to_text(&self) -> String {
        format_rational(self)
    }
}

/// The field with two elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct F2(pub bool);

// Addition and multiplication in 𝔽₂ are xor and and.
#[allow(clippy::suspicious_arithmetic_impl)]
impl Add for F2 {
    type Output = F2;
    fn add(self, rhs: F2) -> F2 {
        F2(self.0 ^ rhs.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for F2 {
    type Output = F2;
    fn mul(self, rhs: F2) -> F2 {
        F2(self.0 & rhs.0)
    }
}

impl Neg for F2 {
    type Output = F2;
    fn neg(self) -> F2 {
        self
    }
}

impl Zero for F2 {
    fn zero() -> F2 {
        F2(false)
    }
    fn is_zero(&self) -> bool {
        !self.0
    }
}

impl One for F2 {
    fn one() -> F2 {
        F2(true)
    }
}

impl Scalar for F2 {
    const RING: &'static str = "F2";

    fn from_rational(q: &Q) -> Result<Self, String> {
        if q.denom() % 2 == 0 {
            return Err(format!("{} has an even denominator", format_rational(q)));
        }
        Ok(F2(q.numer().rem_euclid(2) == 1))
    }

    fn to_text(&self) -> String {
        u8::from(self.0).to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f2_arithmetic() {
        assert_eq!(F2(true) + F2(true), F2(false));
        assert_eq!(-F2(true), F2(true));
        assert_eq!(F2::from_rational(&Q::new(3, 5)).unwrap(), F2(true));
        assert!(F2::from_rational(&Q::new(1, 2)).is_err());
    }
}
