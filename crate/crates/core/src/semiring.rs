//! Coefficient semirings.
//!
//! Two instances are provided: exact nonnegative rationals ([`Rational`]) and
//! booleans ([`Boolean`]). Both have fractions: for every positive integer `n`
//! there is an element `1/n` with `n * (1/n) = 1`.

use std::fmt;
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub trait Semiring:
    Clone + PartialEq + Eq + Hash + fmt::Debug + fmt::Display + Send + Sync
{
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn is_zero(&self) -> bool;

    /// Image of a natural number under `n ↦ 1 + … + 1`. Need not be injective.
    fn from_nat(n: u64) -> Self;

    /// The fraction `1/n`. Panics when `n == 0`.
    fn recip_nat(n: u64) -> Self;

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// `n!` as a semiring element.
    fn factorial(n: u64) -> Self {
        (1..=n).fold(Self::one(), |acc, i| acc.mul(&Self::from_nat(i)))
    }

    /// `1/n!`.
    fn inv_factorial(n: u64) -> Self {
        (1..=n).fold(Self::one(), |acc, i| acc.mul(&Self::recip_nat(i)))
    }

    /// Parse the textual form produced by `Display`.
    fn parse(text: &str) -> Option<Self>;

    /// Short identifier used on the command line.
    fn name() -> &'static str;
}

/// Exact nonnegative rational number.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        let r = BigRational::new(BigInt::from(numer), BigInt::from(denom));
        assert!(!r.is_negative(), "coefficients are nonnegative");
        Rational(r)
    }

    pub fn integer(n: i64) -> Self {
        Rational::new(n, 1)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Semiring for Rational {
    fn zero() -> Self {
        Rational(BigRational::zero())
    }
    fn one() -> Self {
        Rational(BigRational::one())
    }
    fn add(&self, other: &Self) -> Self {
        Rational(&self.0 + &other.0)
    }
    fn mul(&self, other: &Self) -> Self {
        Rational(&self.0 * &other.0)
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn from_nat(n: u64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }
    fn recip_nat(n: u64) -> Self {
        assert!(n > 0, "1/0 does not exist");
        Rational(BigRational::new(BigInt::one(), BigInt::from(n)))
    }
    fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        let (p, q) = match text.split_once('/') {
            Some((p, q)) => (
                p.trim().parse::<BigInt>().ok()?,
                q.trim().parse::<BigInt>().ok()?,
            ),
            None => (text.parse::<BigInt>().ok()?, BigInt::one()),
        };
        if q.is_zero() || p.is_negative() || q.is_negative() {
            return None;
        }
        Some(Rational(BigRational::new(p, q)))
    }
    fn name() -> &'static str {
        "rat"
    }
}

/// The boolean semiring: `or` as addition, `and` as multiplication.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Boolean(pub bool);

impl fmt::Display for Boolean {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.0 { "1" } else { "0" })
    }
}

impl Semiring for Boolean {
    fn zero() -> Self {
        Boolean(false)
    }
    fn one() -> Self {
        Boolean(true)
    }
    fn add(&self, other: &Self) -> Self {
        Boolean(self.0 || other.0)
    }
    fn mul(&self, other: &Self) -> Self {
        Boolean(self.0 && other.0)
    }
    fn is_zero(&self) -> bool {
        !self.0
    }
    fn from_nat(n: u64) -> Self {
        Boolean(n > 0)
    }
    fn recip_nat(n: u64) -> Self {
        assert!(n > 0, "1/0 does not exist");
        Boolean(true)
    }
    fn parse(text: &str) -> Option<Self> {
        match text.trim() {
            "0" | "false" => Some(Boolean(false)),
            "1" | "true" => Some(Boolean(true)),
            _ => None,
        }
    }
    fn name() -> &'static str {
        "bool"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laws<C: Semiring>(elems: &[C]) {
        for a in elems {
            for b in elems {
                assert_eq!(a.add(b), b.add(a));
                assert_eq!(a.mul(b), b.mul(a));
                for c in elems {
                    assert_eq!(a.add(b).add(c), a.add(&b.add(c)));
                    assert_eq!(a.mul(b).mul(c), a.mul(&b.mul(c)));
                    assert_eq!(a.mul(&b.add(c)), a.mul(b).add(&a.mul(c)));
                }
            }
            assert_eq!(a.add(&C::zero()), *a);
            assert_eq!(a.mul(&C::one()), *a);
            assert!(a.mul(&C::zero()).is_zero());
        }
    }

    #[test]
    fn rational_laws() {
        laws(&[
            Rational::zero(),
            Rational::one(),
            Rational::new(1, 2),
            Rational::new(7, 3),
        ]);
    }

    #[test]
    fn boolean_laws() {
        laws(&[Boolean(false), Boolean(true)]);
    }

    #[test]
    fn fractions_exist() {
        for n in 1..10 {
            assert!(Rational::from_nat(n).mul(&Rational::recip_nat(n)).is_one());
            assert!(Boolean::from_nat(n).mul(&Boolean::recip_nat(n)).is_one());
        }
    }

    #[test]
    fn factorials() {
        assert_eq!(Rational::factorial(4), Rational::integer(24));
        assert_eq!(Rational::inv_factorial(3), Rational::new(1, 6));
        assert_eq!(Boolean::factorial(5), Boolean(true));
    }

    #[test]
    fn rational_text() {
        assert_eq!(Rational::new(2, 4).to_string(), "1/2");
        assert_eq!(Rational::integer(3).to_string(), "3");
        assert_eq!(Rational::parse("3/6"), Some(Rational::new(1, 2)));
        assert_eq!(Rational::parse("-1"), None);
        assert_eq!(Rational::parse("1/0"), None);
    }
}
