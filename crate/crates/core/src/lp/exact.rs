//! Exact rational scalar with a machine-word fast path.
//!
//! Simplex tableaux over partial probabilities keep small numerators and
//! denominators, so most operations finish in `i128` without allocating.
//! Values that do not fit fall back to [`BigRational`].

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use super::scalar::{Rational, Scalar};

/// Exact rational in canonical form: `Small` whenever numerator and
/// denominator fit in `i64` (denominator positive, gcd 1), `Big` otherwise.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum ExactRational {
    Small(i64, i64),
    Big(Box<BigRational>),
}

fn fits(v: i128) -> Option<i64> {
    if v.unsigned_abs() <= i64::MAX as u128 {
        Some(v as i64)
    } else {
        None
    }
}

/// Binary gcd of nonzero arguments.
fn gcd64(mut a: u64, mut b: u64) -> u64 {
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

impl ExactRational {
    fn from_parts(num: i128, den: i128) -> Self {
        debug_assert!(den != 0);
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        if num == 0 {
            return ExactRational::Small(0, 1);
        }
        if let (Some(n), Some(d)) = (fits(num), fits(den)) {
            if d == 1 {
                return ExactRational::Small(n, 1);
            }
            let g = gcd64(n.unsigned_abs(), d as u64) as i64;
            return ExactRational::Small(n / g, d / g);
        }
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        match (fits(num), fits(den)) {
            (Some(n), Some(d)) => ExactRational::Small(n, d),
            _ => ExactRational::Big(Box::new(BigRational::new_raw(BigInt::from(num), BigInt::from(den)))),
        }
    }

    fn from_big(r: BigRational) -> Self {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN && d != i64::MIN => ExactRational::Small(n, d),
            _ => ExactRational::Big(Box::new(r)),
        }
    }

    fn big(&self) -> BigRational {
        match self {
            ExactRational::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            ExactRational::Big(r) => (**r).clone(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match self {
            ExactRational::Small(_, d) => *d == 1,
            ExactRational::Big(r) => r.is_integer(),
        }
    }

    fn signum(&self) -> i32 {
        match self {
            ExactRational::Small(n, _) => n.signum() as i32,
            ExactRational::Big(r) => {
                if Signed::is_positive(&**r) {
                    1
                } else if Signed::is_negative(&**r) {
                    -1
                } else {
                    0
                }
            }
        }
    }
}

impl fmt::Debug for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactRational::Small(n, 1) => write!(f, "{n}"),
            ExactRational::Small(n, d) => write!(f, "{n}/{d}"),
            ExactRational::Big(r) => write!(f, "{r}"),
        }
    }
}

impl PartialOrd for ExactRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExactRational::Small(a, b), ExactRational::Small(c, d)) => {
                (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
            }
            _ => self.big().cmp(&other.big()),
        }
    }
}

impl From<&Rational> for ExactRational {
    fn from(r: &Rational) -> Self {
        ExactRational::from_big(r.clone())
    }
}

impl From<ExactRational> for Rational {
    fn from(r: ExactRational) -> Self {
        match r {
            ExactRational::Small(..) => r.big(),
            ExactRational::Big(b) => *b,
        }
    }
}

impl Scalar for ExactRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        ExactRational::Small(0, 1)
    }
    fn one() -> Self {
        ExactRational::Small(1, 1)
    }
    fn from_i64(v: i64) -> Self {
        ExactRational::from_parts(v as i128, 1)
    }
    fn from_rational(r: &Rational) -> Self {
        r.into()
    }
    fn to_rational(&self) -> Rational {
        self.big()
    }
    fn to_f64(&self) -> f64 {
        match self {
            ExactRational::Small(n, d) => *n as f64 / *d as f64,
            ExactRational::Big(r) => ToPrimitive::to_f64(&**r).unwrap_or(f64::NAN),
        }
    }
    fn is_zero(&self) -> bool {
        matches!(self, ExactRational::Small(0, _))
    }
    fn is_positive(&self) -> bool {
        self.signum() > 0
    }
    fn is_negative(&self) -> bool {
        self.signum() < 0
    }
    fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (ExactRational::Small(a, b), ExactRational::Small(c, d)) => {
                if b == d {
                    ExactRational::from_parts(*a as i128 + *c as i128, *b as i128)
                } else {
                    let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                    ExactRational::from_parts(a * d + c * b, b * d)
                }
            }
            _ => ExactRational::from_big(self.big() + other.big()),
        }
    }
    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
    fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (ExactRational::Small(a, b), ExactRational::Small(c, d)) => {
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                ExactRational::from_parts(a * c, b * d)
            }
            _ => ExactRational::from_big(self.big() * other.big()),
        }
    }
    fn div(&self, other: &Self) -> Self {
        assert!(!other.is_zero(), "division by zero");
        match (self, other) {
            (ExactRational::Small(a, b), ExactRational::Small(c, d)) => {
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                ExactRational::from_parts(a * d, b * c)
            }
            _ => ExactRational::from_big(self.big() / other.big()),
        }
    }
    fn neg(&self) -> Self {
        match self {
            ExactRational::Small(n, d) => ExactRational::Small(-n, *d),
            ExactRational::Big(r) => ExactRational::from_big(-(**r).clone()),
        }
    }
    fn compare(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn sub_mul(&self, factor: &Self, other: &Self) -> Self {
        const LIMIT: u64 = 1 << 31;
        let small = |v: i64| v.unsigned_abs() < LIMIT;
        match (self, factor, other) {
            (ExactRational::Small(a, b), ExactRational::Small(c, d), ExactRational::Small(e, f))
                if [*a, *b, *c, *d, *e, *f].into_iter().all(small) =>
            {
                let (a, b, c, d, e, f) = (*a as i128, *b as i128, *c as i128, *d as i128, *e as i128, *f as i128);
                if b == 1 && d == 1 && f == 1 {
                    return ExactRational::from_parts(a - c * e, 1);
                }
                let df = d * f;
                if b == df {
                    ExactRational::from_parts(a - c * e, b)
                } else {
                    ExactRational::from_parts(a * df - c * e * b, b * df)
                }
            }
            _ => self.sub(&factor.mul(other)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{int, rational};

    fn x(n: i64, d: i64) -> ExactRational {
        ExactRational::from_rational(&rational(n, d))
    }

    #[test]
    fn small_arithmetic_matches_big() {
        let vals = [(1, 2), (-3, 4), (5, 1), (0, 1), (7, 9), (-11, 6)];
        for &(a, b) in &vals {
            for &(c, d) in &vals {
                let (p, q) = (x(a, b), x(c, d));
                let (bp, bq) = (rational(a, b), rational(c, d));
                assert_eq!(p.add(&q).to_rational(), &bp + &bq);
                assert_eq!(p.sub(&q).to_rational(), &bp - &bq);
                assert_eq!(p.mul(&q).to_rational(), &bp * &bq);
                if c != 0 {
                    assert_eq!(p.div(&q).to_rational(), &bp / &bq);
                }
                assert_eq!(p.cmp(&q), bp.cmp(&bq));
            }
        }
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = ExactRational::from_i64(i64::MAX);
        let sq = big.mul(&big);
        assert!(matches!(sq, ExactRational::Big(_)));
        assert_eq!(sq.to_rational(), int(i64::MAX) * int(i64::MAX));
        let back = sq.div(&big);
        assert_eq!(back, big);
        assert!(matches!(back, ExactRational::Small(..)));
        assert_eq!(back.sub(&big), <ExactRational as Scalar>::zero());
    }
}
