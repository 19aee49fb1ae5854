//! Scalar types the operator algebra is generic over.
//!
//! Every quantity in the diagonal framework is a dyadic rational, so the
//! exact scalar is [`Dyadic`]. Floating point and arbitrary rationals are
//! supported through the same [`Scalar`] trait for reporting and
//! cross-checks.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Ring operations plus exact scaling by powers of two.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    /// Embeds a dyadic rational. Exact for `Dyadic` and `BigRational`.
    fn from_dyadic(value: Dyadic) -> Self;

    /// Returns `self * 2^exp`.
    fn mul_pow2(&self, exp: i32) -> Self;

    fn to_f64(&self) -> f64;

    fn is_negative_value(&self) -> bool {
        *self < Self::zero()
    }

    fn from_i64(value: i64) -> Self {
        Self::from_dyadic(Dyadic::from_int(value as i128))
    }
}

/// An exact rational of the form `num / 2^exp`.
///
/// Always kept canonical: `num` is odd unless the value is an integer
/// (`exp == 0`), and zero is stored as `0 / 2^0`. Structural equality is
/// therefore value equality.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    num: i128,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };
    pub const HALF: Dyadic = Dyadic { num: 1, exp: 1 };

    pub fn new(num: i128, exp: u32) -> Self {
        let mut d = Dyadic { num, exp };
        d.normalize();
        d
    }

    pub fn from_int(value: i128) -> Self {
        Dyadic { num: value, exp: 0 }
    }

    /// `2^-exp`.
    pub fn recip_pow2(exp: u32) -> Self {
        Dyadic { num: 1, exp }
    }

    pub fn numerator(&self) -> i128 {
        self.num
    }

    /// Base-2 logarithm of the (canonical) denominator.
    pub fn log2_denominator(&self) -> u32 {
        self.exp
    }

    pub fn is_integer(&self) -> bool {
        self.exp == 0
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::one() << self.exp as usize)
    }

    /// Converts a rational whose reduced denominator is a power of two.
    pub fn from_rational(value: &BigRational) -> Option<Self> {
        let den = value.denom();
        if !den.is_positive() || (den & (den - BigInt::one())) != BigInt::zero() {
            return None;
        }
        let exp = den.bits().checked_sub(1)? as u32;
        let num = value.numer().to_i128()?;
        Some(Dyadic::new(num, exp))
    }

    fn normalize(&mut self) {
        if self.num == 0 {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().min(self.exp);
        self.num >>= tz;
        self.exp -= tz;
    }

    /// Numerator rescaled to denominator `2^exp`; `exp` must be at least `self.exp`.
    fn numerator_at(&self, exp: u32) -> i128 {
        let shift = exp - self.exp;
        checked_shl(self.num, shift)
    }
}

fn checked_shl(value: i128, shift: u32) -> i128 {
    if value == 0 {
        return 0;
    }
    if shift >= 127 || value.unsigned_abs().leading_zeros() <= shift {
        panic!("dyadic overflow: {value} << {shift}");
    }
    value << shift
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else if self.exp < 127 {
            write!(f, "{}/{}", self.num, 1u128 << self.exp)
        } else {
            write!(f, "{}/2^{}", self.num, self.exp)
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.max(other.exp);
        self.numerator_at(exp).cmp(&other.numerator_at(exp))
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        let exp = self.exp.max(rhs.exp);
        let num = self.numerator_at(exp).checked_add(rhs.numerator_at(exp)).expect("dyadic overflow in addition");
        Dyadic::new(num, exp)
    }
}

impl AddAssign for Dyadic {
    fn add_assign(&mut self, rhs: Dyadic) {
        *self = *self + rhs;
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;

    fn sub(self, rhs: Dyadic) -> Dyadic {
        self + (-rhs)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;

    fn neg(self) -> Dyadic {
        Dyadic { num: self.num.checked_neg().expect("dyadic overflow in negation"), exp: self.exp }
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;

    fn mul(self, rhs: Dyadic) -> Dyadic {
        let num = self.num.checked_mul(rhs.num).expect("dyadic overflow in multiplication");
        let exp = self.exp.checked_add(rhs.exp).expect("dyadic exponent overflow");
        Dyadic::new(num, exp)
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::ZERO, |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Dyadic> for Dyadic {
    fn sum<I: Iterator<Item = &'a Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::ZERO, |acc, x| acc + *x)
    }
}

impl Zero for Dyadic {
    fn zero() -> Self {
        Dyadic::ZERO
    }

    fn is_zero(&self) -> bool {
        self.num == 0
    }
}

impl One for Dyadic {
    fn one() -> Self {
        Dyadic::ONE
    }
}

impl From<i64> for Dyadic {
    fn from(value: i64) -> Self {
        Dyadic::from_int(value as i128)
    }
}

impl Scalar for Dyadic {
    fn from_dyadic(value: Dyadic) -> Self {
        value
    }

    fn mul_pow2(&self, exp: i32) -> Self {
        if self.num == 0 {
            return Dyadic::ZERO;
        }
        if exp >= 0 {
            let up = exp as u32;
            if self.exp >= up {
                Dyadic::new(self.num, self.exp - up)
            } else {
                Dyadic::new(checked_shl(self.num, up - self.exp), 0)
            }
        } else {
            let down = exp.unsigned_abs();
            Dyadic::new(self.num, self.exp.checked_add(down).expect("dyadic exponent overflow"))
        }
    }

    fn to_f64(&self) -> f64 {
        self.num as f64 * 2f64.powi(-(self.exp as i32))
    }
}

impl Scalar for f64 {
    fn from_dyadic(value: Dyadic) -> Self {
        value.to_f64()
    }

    fn mul_pow2(&self, exp: i32) -> Self {
        self * 2f64.powi(exp)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_dyadic(value: Dyadic) -> Self {
        value.to_f64() as f32
    }

    fn mul_pow2(&self, exp: i32) -> Self {
        self * 2f32.powi(exp)
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for BigRational {
    fn from_dyadic(value: Dyadic) -> Self {
        value.to_rational()
    }

    fn mul_pow2(&self, exp: i32) -> Self {
        let factor = BigInt::one() << exp.unsigned_abs() as usize;
        if exp >= 0 {
            self * BigRational::from_integer(factor)
        } else {
            self / BigRational::from_integer(factor)
        }
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_form() {
        assert_eq!(Dyadic::new(4, 3), Dyadic::new(1, 1));
        assert_eq!(Dyadic::new(0, 9), Dyadic::ZERO);
        assert_eq!(Dyadic::new(6, 0).log2_denominator(), 0);
        assert_eq!(Dyadic::new(3, 2).to_string(), "3/4");
        assert_eq!(Dyadic::new(-8, 0).to_string(), "-8");
    }

    #[test]
    fn pow2_scaling() {
        let eighth = Dyadic::recip_pow2(3);
        assert_eq!(eighth.mul_pow2(3), Dyadic::ONE);
        assert_eq!(eighth.mul_pow2(6), Dyadic::from_int(8));
        assert_eq!(Dyadic::from_int(3).mul_pow2(-2), Dyadic::new(3, 2));
    }

    #[test]
    fn rational_conversion() {
        let d = Dyadic::new(-5, 4);
        assert_eq!(Dyadic::from_rational(&d.to_rational()), Some(d));
        let third = BigRational::new(1.into(), 3.into());
        assert_eq!(Dyadic::from_rational(&third), None);
    }

    #[test]
    fn float_and_rational_scalars_agree() {
        let d = Dyadic::new(7, 5);
        assert_eq!(<f64 as Scalar>::from_dyadic(d), 7.0 / 32.0);
        assert_eq!(BigRational::from_dyadic(d).mul_pow2(5), BigRational::from_integer(7.into()));
    }

    fn dyadic() -> impl Strategy<Value = Dyadic> {
        (-1_000_000i128..1_000_000, 0u32..40).prop_map(|(n, e)| Dyadic::new(n, e))
    }

    proptest! {
        #[test]
        fn field_ops_match_big_rationals(a in dyadic(), b in dyadic()) {
            let (ra, rb) = (a.to_rational(), b.to_rational());
            prop_assert_eq!((a + b).to_rational(), &ra + &rb);
            prop_assert_eq!((a - b).to_rational(), &ra - &rb);
            prop_assert_eq!((a * b).to_rational(), &ra * &rb);
            prop_assert_eq!(a.cmp(&b), ra.cmp(&rb));
        }
    }
}
