use std::cmp::Ordering;
use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number with arbitrary-precision numerator and denominator.
pub type Rational = BigRational;

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Field arithmetic the simplex and elimination routines are generic over.
///
/// Sign tests go through `is_zero`/`is_positive`/`is_negative` so that the
/// floating-point implementation can apply its tolerance in one place.
pub trait Scalar: Clone + Debug + Display + PartialEq + Send + Sync + 'static {
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_rational(&self) -> Rational;
    fn to_f64(&self) -> f64;

    fn is_zero(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool;

    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;

    /// Three-way comparison; equal within tolerance counts as `Equal`.
    fn compare(&self, other: &Self) -> Ordering {
        let d = self.sub(other);
        if d.is_positive() {
            Ordering::Greater
        } else if d.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }

    /// Reduced cost large enough to enter the basis.
    fn is_improving(&self) -> bool {
        self.is_positive()
    }

    /// Large enough to pivot on.
    fn is_pivot_candidate(&self) -> bool {
        self.is_positive()
    }

    /// `self - factor * other`, the elimination kernel.
    fn sub_mul(&self, factor: &Self, other: &Self) -> Self {
        self.sub(&factor.mul(other))
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        int(v)
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn compare(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
}

/// Absolute tolerance of the floating-point mode.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Smallest pivot entry and smallest entering reduced cost of the
/// floating-point simplex.
pub const FLOAT_PIVOT_TOLERANCE: f64 = 1e-7;

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).unwrap_or_else(Zero::zero)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        self.abs() <= FLOAT_TOLERANCE
    }
    fn is_positive(&self) -> bool {
        *self > FLOAT_TOLERANCE
    }
    fn is_negative(&self) -> bool {
        *self < -FLOAT_TOLERANCE
    }
    fn is_improving(&self) -> bool {
        *self > FLOAT_PIVOT_TOLERANCE
    }
    fn is_pivot_candidate(&self) -> bool {
        *self > FLOAT_PIVOT_TOLERANCE
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
}

/// Parses `p`, `p/q`, or a decimal such as `-0.25` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let mut num: BigInt = digits.parse().ok()?;
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Some(Rational::new(num, den));
    }
    s.parse::<BigInt>().ok().map(Rational::from_integer)
}

/// Decimal rendering for formats that do not accept fractions. Exact when the
/// denominator divides a power of ten, otherwise rounded to 17 significant
/// digits.
pub fn to_decimal(r: &Rational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut den = r.denom().clone();
    let mut scale = 0usize;
    for p in [2u32, 5] {
        let p = BigInt::from(p);
        while (&den % &p).is_zero() {
            den /= &p;
        }
    }
    if den.is_one() {
        let mut pow = BigInt::one();
        while !(&pow % r.denom()).is_zero() {
            pow *= 10;
            scale += 1;
        }
        let scaled = r.numer() * (&pow / r.denom());
        let negative = scaled.is_negative();
        let digits = scaled.abs().to_string();
        let digits = format!("{digits:0>width$}", width = scale + 1);
        let (whole, frac) = digits.split_at(digits.len() - scale);
        let frac = frac.trim_end_matches('0');
        let sign = if negative { "-" } else { "" };
        return if frac.is_empty() {
            format!("{sign}{whole}")
        } else {
            format!("{sign}{whole}.{frac}")
        };
    }
    format!("{:.17e}", Scalar::to_f64(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rational_forms() {
        assert_eq!(parse_rational("3"), Some(int(3)));
        assert_eq!(parse_rational("-2/4"), Some(rational(-1, 2)));
        assert_eq!(parse_rational("0.25"), Some(rational(1, 4)));
        assert_eq!(parse_rational("-1.5"), Some(rational(-3, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&int(-7)), "-7");
        assert_eq!(to_decimal(&rational(1, 2)), "0.5");
        assert_eq!(to_decimal(&rational(-3, 40)), "-0.075");
        assert!(to_decimal(&rational(1, 3)).starts_with("3.33333"));
        for (p, q) in [(1, 8), (-9, 20), (123, 1000), (5, 1)] {
            assert_eq!(parse_rational(&to_decimal(&rational(p, q))), Some(rational(p, q)));
        }
    }

    #[test]
    fn float_tolerance() {
        assert!(Scalar::is_zero(&1e-12f64));
        assert!(!Scalar::is_positive(&1e-12f64));
        assert_eq!(Scalar::compare(&1.0f64, &(1.0 + 1e-12)), Ordering::Equal);
        assert_eq!(Scalar::compare(&rational(1, 3), &rational(1, 2)), Ordering::Less);
    }
}
