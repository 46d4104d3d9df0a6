//! Exact positive rationals, the multiplicative group of conversion ratios
//! and prefix values.
//!
//! [`PosRatio`] is generic over its integer backing. The crate root exports
//! [`crate::Ratio`], backed by arbitrary-precision integers, which is what
//! every registry-driven computation uses. Fixed-width backings are useful
//! for small hand-checked computations but overflow silently in release
//! builds.

use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::FromPrimitive;

use crate::error::NumericError;

/// Integer types that can back a [`PosRatio`].
pub trait Magnitude:
    Integer + Clone + Hash + fmt::Debug + fmt::Display + FromPrimitive + Send + Sync + 'static
{
}

impl<T> Magnitude for T where
    T: Integer + Clone + Hash + fmt::Debug + fmt::Display + FromPrimitive + Send + Sync + 'static
{
}

/// A strictly positive rational number in lowest terms.
///
/// Equality is field-wise equality, which coincides with numeric equality
/// because the representation is canonical.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PosRatio<T> {
    num: T,
    den: T,
}

impl<T: Magnitude> PosRatio<T> {
    /// Builds `num/den` in reduced form. Both parts must be at least one.
    pub fn new(num: T, den: T) -> Result<Self, NumericError> {
        if num <= T::zero() || den <= T::zero() {
            return Err(NumericError::InvalidRatio {
                num: num.to_string(),
                den: den.to_string(),
            });
        }
        Ok(Self::reduced(num, den))
    }

    fn reduced(num: T, den: T) -> Self {
        let g = num.gcd(&den);
        if g.is_one() {
            Self { num, den }
        } else {
            Self {
                num: num / g.clone(),
                den: den / g,
            }
        }
    }

    pub fn one() -> Self {
        Self {
            num: T::one(),
            den: T::one(),
        }
    }

    pub fn from_integer(n: T) -> Result<Self, NumericError> {
        Self::new(n, T::one())
    }

    pub fn numer(&self) -> &T {
        &self.num
    }

    pub fn denom(&self) -> &T {
        &self.den
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.den.is_one()
    }

    pub fn inv(&self) -> Self {
        Self {
            num: self.den.clone(),
            den: self.num.clone(),
        }
    }

    /// Exact product. Cross-cancels before multiplying so intermediate values
    /// never exceed the size of the reduced result.
    pub fn mul(&self, other: &Self) -> Self {
        let g1 = self.num.gcd(&other.den);
        let g2 = other.num.gcd(&self.den);
        let num = (self.num.clone() / g1.clone()) * (other.num.clone() / g2.clone());
        let den = (self.den.clone() / g2) * (other.den.clone() / g1);
        Self { num, den }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, exp: i64) -> Self {
        if exp == 0 {
            return Self::one();
        }
        let base = if exp < 0 { self.inv() } else { self.clone() };
        let e = exp.unsigned_abs() as usize;
        // powers of coprime integers stay coprime
        Self {
            num: num_traits::pow(base.num, e),
            den: num_traits::pow(base.den, e),
        }
    }

    /// Decimal rendering with `digits` fractional places.
    ///
    /// If the expansion terminates within `digits` places it is printed in
    /// full without trailing zeros and marked exact; otherwise it is rounded
    /// half-to-even at `digits` places.
    pub fn to_decimal(&self, digits: usize) -> Decimal {
        let ten = T::from_u8(10).expect("ten is representable");
        let two = T::from_u8(2).expect("two is representable");
        let (int_part, mut rem) = self.num.div_rem(&self.den);
        let mut frac = Vec::with_capacity(digits);
        for _ in 0..digits {
            if rem.is_zero() {
                break;
            }
            let (d, r) = (rem * ten.clone()).div_rem(&self.den);
            frac.push(d);
            rem = r;
        }
        let exact = rem.is_zero();
        if !exact {
            // round half to even on the last kept digit
            let twice = rem * two.clone();
            let round_up = match twice.cmp(&self.den) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => {
                    let last = frac.last().cloned().unwrap_or_else(|| int_part.clone());
                    last.is_odd()
                }
            };
            if round_up {
                return Decimal::from_digits(increment(int_part, frac, &ten), false);
            }
        }
        Decimal::from_digits((int_part, frac), exact)
    }
}

fn increment<T: Magnitude>(int_part: T, mut frac: Vec<T>, ten: &T) -> (T, Vec<T>) {
    for d in frac.iter_mut().rev() {
        let bumped = d.clone() + T::one();
        if &bumped == ten {
            *d = T::zero();
        } else {
            *d = bumped;
            return (int_part, frac);
        }
    }
    (int_part + T::one(), frac)
}

/// Result of [`PosRatio::to_decimal`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decimal {
    pub text: String,
    pub exact: bool,
}

impl Decimal {
    fn from_digits<T: Magnitude>((int_part, frac): (T, Vec<T>), exact: bool) -> Self {
        let mut text = int_part.to_string();
        let mut frac_text: String = frac.iter().map(|d| d.to_string()).collect();
        if exact {
            while frac_text.ends_with('0') {
                frac_text.pop();
            }
        }
        if !frac_text.is_empty() {
            text.push('.');
            text.push_str(&frac_text);
        }
        Self { text, exact }
    }
}

/// Inexact renderings carry a leading `~`.
impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exact {
            f.write_str(&self.text)
        } else {
            write!(f, "~{}", self.text)
        }
    }
}

impl<T: Magnitude> fmt::Display for PosRatio<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for PosRatio<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}/{:?}", self.num, self.den)
    }
}

impl<T: Magnitude> PartialOrd for PosRatio<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Numeric order.
impl<T: Magnitude> Ord for PosRatio<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num.clone() * other.den.clone()).cmp(&(other.num.clone() * self.den.clone()))
    }
}

impl<T: Magnitude> Default for PosRatio<T> {
    fn default() -> Self {
        Self::one()
    }
}

impl<T: Magnitude> std::ops::Mul for PosRatio<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        PosRatio::mul(&self, &rhs)
    }
}

impl<'a, T: Magnitude> std::ops::Mul<&'a PosRatio<T>> for &'a PosRatio<T> {
    type Output = PosRatio<T>;
    fn mul(self, rhs: &'a PosRatio<T>) -> PosRatio<T> {
        PosRatio::mul(self, rhs)
    }
}

impl<T: Magnitude> std::ops::Div for PosRatio<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        PosRatio::div(&self, &rhs)
    }
}

fn parse_natural<T: Magnitude>(text: &str, whole: &str) -> Result<T, NumericError> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(NumericError::Syntax(whole.to_string()));
    }
    T::from_str_radix(text, 10).map_err(|_| NumericError::Syntax(whole.to_string()))
}

/// Accepts `p/q`, `n`, `B^E` (integer base at least two, signed exponent)
/// and plain decimals `d.ddd`.
impl<T: Magnitude> FromStr for PosRatio<T> {
    type Err = NumericError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        if let Some((num, den)) = text.split_once('/') {
            return Self::new(
                parse_natural(num.trim(), text)?,
                parse_natural(den.trim(), text)?,
            );
        }
        if let Some((base, exp)) = text.split_once('^') {
            let base: T = parse_natural(base.trim(), text)?;
            if base < T::from_u8(2).expect("two is representable") {
                return Err(NumericError::Syntax(text.to_string()));
            }
            let exp: i64 = exp
                .trim()
                .parse()
                .map_err(|_| NumericError::Syntax(text.to_string()))?;
            return Ok(Self::from_integer(base)?.pow(exp));
        }
        if let Some((int_part, frac_part)) = text.split_once('.') {
            let digits = format!("{int_part}{frac_part}");
            if int_part.is_empty() || frac_part.is_empty() {
                return Err(NumericError::Syntax(text.to_string()));
            }
            let num: T = parse_natural(&digits, text)?;
            let ten = Self::from_integer(T::from_u8(10).expect("ten is representable"))?;
            let scale = ten.pow(frac_part.len() as i64);
            return Ok(Self::new(num, T::one())?.div(&scale));
        }
        Self::new(parse_natural(text, text)?, T::one())
    }
}

/// The multiplicative group of positive rationals as a [`crate::abelian::Group`].
#[derive(Clone, Copy, Debug, Default)]
pub struct RatioGroup;

impl<T: Magnitude> crate::abelian::Group<PosRatio<T>> for RatioGroup {
    fn neutral(&self) -> PosRatio<T> {
        PosRatio::one()
    }
    fn combine(&self, a: &PosRatio<T>, b: &PosRatio<T>) -> PosRatio<T> {
        a.mul(b)
    }
    fn invert(&self, a: &PosRatio<T>) -> PosRatio<T> {
        a.inv()
    }
    fn pow(&self, a: &PosRatio<T>, z: i64) -> PosRatio<T> {
        a.pow(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use proptest::prelude::*;

    type R = PosRatio<BigUint>;

    fn r(n: u64, d: u64) -> R {
        R::new(BigUint::from(n), BigUint::from(d)).unwrap()
    }

    fn big(s: &str) -> BigUint {
        s.parse().unwrap()
    }

    #[test]
    fn make_reduces() {
        assert_eq!(r(45359237, 100000).to_string(), "45359237/100000");
        assert_eq!(r(7, 7), R::one());
        let x = r(10, 4);
        assert_eq!((x.numer(), x.denom()), (&BigUint::from(5u8), &BigUint::from(2u8)));
    }

    #[test]
    fn make_rejects_zero() {
        assert!(R::new(BigUint::from(0u8), BigUint::from(1u8)).is_err());
        assert!(R::new(BigUint::from(1u8), BigUint::from(0u8)).is_err());
        assert!(PosRatio::<i64>::new(-2, 3).is_err());
        assert!(PosRatio::<i64>::new(2, -3).is_err());
    }

    #[test]
    fn products() {
        assert_eq!(r(2, 3).mul(&r(3, 2)), R::one());
        // 45359237 * 980665 = 44482216152605 by long multiplication
        let expected = R::new(big("44482216152605"), big("10000000000")).unwrap();
        assert_eq!(r(45359237, 100000).mul(&r(980665, 100000)), expected);
        assert_eq!(R::one().mul(&r(5, 9)), r(5, 9));
    }

    #[test]
    fn powers() {
        assert_eq!(r(1, 10).pow(3), r(1, 1000));
        assert_eq!(r(17, 3).pow(0), R::one());
        assert_eq!(r(2, 5).pow(-1), r(5, 2));
    }

    #[test]
    fn decimals() {
        let mco = R::new(big("44482216152605"), big("10000000000000")).unwrap();
        let d = mco.to_decimal(13);
        assert_eq!(d.text, "4.4482216152605");
        assert!(d.exact);
        assert_eq!(mco.to_decimal(15).text, "4.4482216152605");
        assert_eq!(R::one().to_decimal(5), Decimal { text: "1".into(), exact: true });
        let third = r(1, 3).to_decimal(4);
        assert_eq!(third.text, "0.3333");
        assert!(!third.exact);
        assert_eq!(third.to_string(), "~0.3333");
    }

    #[test]
    fn decimal_rounding_half_even() {
        assert_eq!(r(2, 3).to_decimal(2).text, "0.67");
        // 1/8 = 0.125 -> half-even at 2 places keeps the 2
        assert_eq!(r(1, 8).to_decimal(2).text, "0.12");
        assert_eq!(r(3, 8).to_decimal(2).text, "0.38");
        assert_eq!(r(999, 1000).to_decimal(2).text, "1.00");
        assert_eq!(r(5, 2).to_decimal(0).text, "2");
        assert_eq!(r(7, 2).to_decimal(0).text, "4");
    }

    #[test]
    fn parse_forms() {
        assert_eq!("3/6".parse::<R>().unwrap(), r(1, 2));
        assert_eq!("12".parse::<R>().unwrap(), r(12, 1));
        assert_eq!("10^-3".parse::<R>().unwrap(), r(1, 1000));
        assert_eq!("2^10".parse::<R>().unwrap(), r(1024, 1));
        assert_eq!("453.59237".parse::<R>().unwrap(), r(45359237, 100000));
        assert_eq!("0.5".parse::<R>().unwrap(), r(1, 2));
        for bad in ["", "0", "1/0", "1^3", "-2", ".5", "5.", "a/b", "10^x", "0.000"] {
            assert!(bad.parse::<R>().is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn fixed_width_backing() {
        let a = PosRatio::<u64>::new(6, 4).unwrap();
        assert_eq!(a.to_string(), "3/2");
        assert_eq!(a.pow(2).mul(&a.inv()), a);
    }

    fn arb_ratio() -> impl Strategy<Value = R> {
        (1u64..5000, 1u64..5000).prop_map(|(n, d)| r(n, d))
    }

    proptest! {
        #[test]
        fn group_laws(a in arb_ratio(), b in arb_ratio(), c in arb_ratio()) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&R::one()), a.clone());
            prop_assert_eq!(a.mul(&a.pow(-1)), R::one());
        }

        #[test]
        fn pow_adds_exponents(a in arb_ratio(), m in -6i64..6, n in -6i64..6) {
            prop_assert_eq!(a.pow(m + n), a.pow(m).mul(&a.pow(n)));
        }

        #[test]
        fn canonical_reduction(p in 1u64..10_000, q in 1u64..10_000, k in 1u64..1000) {
            prop_assert_eq!(r(k * p, k * q), r(p, q));
        }
    }
}
