//! Literals, requirements and the global-variable labeling of the addition
//! and multiplication environments.
//!
//! Every index here is 1-based: `X_1` is the first global variable of an
//! environment. A literal is the signed index, `k` for `X_k = 1` and `-k` for
//! `X_k = 0`, and a requirement is the conjunction of up to three literals
//! whose conditional probability is one unknown of the linear program.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Position of a Boolean variable in an environment's global list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GlobalIndex(u32);

impl GlobalIndex {
    pub fn new(value: u32) -> Result<Self> {
        if value == 0 || value > i32::MAX as u32 {
            return Err(Error::range("global index", format!("{value} is not in 1..=2^31-1")));
        }
        Ok(GlobalIndex(value))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn positive(self) -> Literal {
        Literal(self.0 as i32)
    }

    #[inline]
    pub fn negative(self) -> Literal {
        Literal(-(self.0 as i32))
    }

    #[inline]
    pub fn literal(self, value: bool) -> Literal {
        if value {
            self.positive()
        } else {
            self.negative()
        }
    }
}

impl fmt::Display for GlobalIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}", self.0)
    }
}

/// A variable or its negation, serialized as the signed index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub struct Literal(i32);

impl Literal {
    #[inline]
    pub fn new(index: GlobalIndex, positive: bool) -> Self {
        index.literal(positive)
    }

    pub fn from_signed(value: i64) -> Result<Self> {
        if value == 0 || value.unsigned_abs() > i32::MAX as u64 {
            return Err(Error::range("literal", format!("{value} is not a nonzero 32-bit index")));
        }
        Ok(Literal(value as i32))
    }

    #[inline]
    pub fn signed(self) -> i32 {
        self.0
    }

    #[inline]
    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    #[inline]
    pub fn index(self) -> GlobalIndex {
        GlobalIndex(self.var())
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    #[inline]
    pub fn negated(self) -> Self {
        Literal(-self.0)
    }

    /// Truth value of the literal under a value of its variable.
    #[inline]
    pub fn holds(self, var_value: bool) -> bool {
        var_value == self.is_positive()
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<i64> for Literal {
    type Error = Error;
    fn try_from(value: i64) -> Result<Self> {
        Literal::from_signed(value)
    }
}

impl From<Literal> for i64 {
    fn from(lit: Literal) -> i64 {
        lit.0 as i64
    }
}

impl FromStr for Literal {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let value: i64 = s
            .trim()
            .parse()
            .map_err(|_| Error::parse(0, format!("`{s}` is not a signed integer literal")))?;
        Literal::from_signed(value)
    }
}

/// Conjunction of one to three literals over distinct variables, stored in
/// ascending variable order.
///
/// Requirements order first by length, then lexicographically on their signed
/// literals. Unknown tables and universal equations are built in this order.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Requirement {
    lits: [Literal; 3],
    len: u8,
}

const FILLER: Literal = Literal(0);

impl Requirement {
    /// Canonicalizes a set of literals into a requirement.
    pub fn new(literals: &[Literal]) -> Result<Self> {
        if literals.is_empty() || literals.len() > 3 {
            return Err(Error::Arity(literals.len()));
        }
        let mut lits = [FILLER; 3];
        lits[..literals.len()].copy_from_slice(literals);
        let len = literals.len();
        lits[..len].sort_unstable_by_key(|l| l.var());
        for w in lits[..len].windows(2) {
            if w[0].var() == w[1].var() {
                return Err(Error::DuplicateVariable(w[0].var()));
            }
        }
        Ok(Requirement {
            lits,
            len: len as u8,
        })
    }

    #[inline]
    pub fn single(lit: Literal) -> Self {
        Requirement {
            lits: [lit, FILLER, FILLER],
            len: 1,
        }
    }

    /// Infallible constructor for literal sets known to be valid.
    pub(crate) fn of(literals: &[Literal]) -> Self {
        Requirement::new(literals).expect("encoder produced an invalid requirement")
    }

    #[inline]
    pub fn literals(&self) -> &[Literal] {
        &self.lits[..self.len as usize]
    }

    #[inline]
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_positive(&self) -> bool {
        self.literals().iter().all(|l| l.is_positive())
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.literals().contains(&lit)
    }

    /// True when every literal of `other` is a literal of `self`.
    pub fn implies(&self, other: &Requirement) -> bool {
        other.literals().iter().all(|l| self.contains(*l))
    }

    /// The requirement with one literal dropped, `None` if nothing would remain.
    pub fn without(&self, lit: Literal) -> Option<Requirement> {
        if self.len == 1 || !self.contains(lit) {
            return None;
        }
        let mut lits = [FILLER; 3];
        let mut len = 0;
        for l in self.literals() {
            if *l != lit {
                lits[len] = *l;
                len += 1;
            }
        }
        Some(Requirement {
            lits,
            len: len as u8,
        })
    }

    /// The requirement with `lit` added, if its variable is not already present.
    pub fn with(&self, lit: Literal) -> Result<Requirement> {
        let mut lits = self.literals().to_vec();
        lits.push(lit);
        Requirement::new(&lits)
    }

    /// The positive requirement over the same variables.
    pub fn positive_support(&self) -> Requirement {
        let mut r = *self;
        for l in &mut r.lits[..self.len as usize] {
            *l = l.index().positive();
        }
        r
    }

    /// Every requirement reachable by dropping literals or flipping their
    /// polarity, the empty conjunction excluded. Includes `self`.
    pub fn variants(&self) -> Vec<Requirement> {
        let vars: Vec<GlobalIndex> = self.literals().iter().map(|l| l.index()).collect();
        let d = vars.len();
        let mut out = Vec::with_capacity(3usize.pow(d as u32) - 1);
        for subset in 1u32..(1 << d) {
            let chosen: Vec<GlobalIndex> = (0..d)
                .filter(|b| subset & (1 << b) != 0)
                .map(|b| vars[b])
                .collect();
            for signs in 0u32..(1 << chosen.len()) {
                let lits: Vec<Literal> = chosen
                    .iter()
                    .enumerate()
                    .map(|(b, v)| v.literal(signs & (1 << b) == 0))
                    .collect();
                out.push(Requirement::of(&lits));
            }
        }
        out.sort();
        out
    }

    /// Truth value under a complete assignment (`values[k - 1]` is `X_k`).
    pub fn holds(&self, values: &[bool]) -> bool {
        self.literals()
            .iter()
            .all(|l| l.holds(values[l.var() as usize - 1]))
    }
}

/// Canonical form of a literal sequence; see [`Requirement::new`].
pub fn canonicalize(literals: &[Literal]) -> Result<Requirement> {
    Requirement::new(literals)
}

impl Ord for Requirement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.literals().cmp(other.literals()))
    }
}

impl PartialOrd for Requirement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, l) in self.literals().iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Requirement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(|| Error::parse(0, format!("`{s}` is not of the form (k1;k2;k3)")))?;
        let lits = body
            .split(';')
            .map(str::parse)
            .collect::<Result<Vec<Literal>>>()?;
        Requirement::new(&lits)
    }
}

impl Serialize for Requirement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Requirement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Bits of the two-operand addition `S = U + V`.
///
/// `S(n)` is the top sum bit, which is the final carry `R(n)`; both map to the
/// same global variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdditionVar {
    U(u32),
    V(u32),
    S(u32),
    R(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AdditionLayout {
    n: u32,
}

impl AdditionLayout {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 || n > (i32::MAX as u32) / 4 {
            return Err(Error::range("bit width", format!("n = {n}")));
        }
        Ok(AdditionLayout { n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn variable_count(&self) -> u32 {
        4 * self.n
    }

    pub fn index(&self, var: AdditionVar) -> Result<GlobalIndex> {
        let n = self.n;
        let k = match var {
            AdditionVar::U(i) if i < n => i + 1,
            AdditionVar::V(i) if i < n => i + n + 1,
            AdditionVar::S(i) if i < n => i + 2 * n + 1,
            AdditionVar::S(i) if i == n => 4 * n,
            AdditionVar::R(i) if (1..=n).contains(&i) => i + 3 * n,
            _ => return Err(Error::range("addition variable", format!("{var:?} with n = {n}"))),
        };
        Ok(GlobalIndex(k))
    }

    /// Role of a global variable; the top sum bit is reported as `R(n)`.
    pub fn role(&self, k: GlobalIndex) -> Result<AdditionVar> {
        let n = self.n;
        let k = k.get();
        let role = match k {
            _ if k == 0 => None,
            _ if k <= n => Some(AdditionVar::U(k - 1)),
            _ if k <= 2 * n => Some(AdditionVar::V(k - n - 1)),
            _ if k <= 3 * n => Some(AdditionVar::S(k - 2 * n - 1)),
            _ if k <= 4 * n => Some(AdditionVar::R(k - 3 * n)),
            _ => None,
        };
        role.ok_or_else(|| Error::range("global index", format!("{k} with n = {n}")))
    }

}

/// Bits of the multiplication `A x B = C`, computed as the addition of `m`
/// shifted partial products.
///
/// `U0(i)` are the bits of the unshifted first term; `U`, `S` and `R` carry the
/// step `t` in `1..m` and the absolute bit position `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MultiplicationVar {
    U0(u32),
    U { t: u32, i: u32 },
    S { t: u32, i: u32 },
    R { t: u32, i: u32 },
    A(u32),
    B(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiplicationLayout {
    n: u32,
    m: u32,
}

impl MultiplicationLayout {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        if n < 2 || m < 2 {
            return Err(Error::range("bit widths", format!("n = {n}, m = {m}; both must be at least 2")));
        }
        if (n as u64) * (m as u64) * 3 + m as u64 >= i32::MAX as u64 {
            return Err(Error::range("bit widths", format!("n = {n}, m = {m} overflow the index space")));
        }
        Ok(MultiplicationLayout { n, m })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Variables of the shifted addition alone.
    pub fn shifted_variable_count(&self) -> u32 {
        3 * self.n * self.m - 2 * self.n
    }

    pub fn variable_count(&self) -> u32 {
        3 * self.n * self.m - self.n + self.m
    }

    pub fn index(&self, var: MultiplicationVar) -> Result<GlobalIndex> {
        use MultiplicationVar::*;
        let (n, m) = (self.n, self.m);
        let step_ok = |t: u32| (1..m).contains(&t);
        let k = match var {
            U0(i) if i < n => Some(i + 1),
            U { t, i } if step_ok(t) && (t..t + n).contains(&i) => Some(n * (3 * t - 2) + i - t + 1),
            S { t, i } if step_ok(t) && (t..t + n).contains(&i) => Some(n * (3 * t - 1) + i - t + 1),
            R { t, i } if step_ok(t) && (t + 1..=t + n).contains(&i) => Some(3 * n * t + i - t),
            A(i) if i < n => Some(i + 3 * n * m - 2 * n + 1),
            B(t) if t < m => Some(t + 3 * n * m - n + 1),
            _ => None,
        };
        k.map(GlobalIndex)
            .ok_or_else(|| Error::range("multiplication variable", format!("{var:?} with n = {n}, m = {m}")))
    }

    /// Bit `i` of the `t`-th partial product `A * b_t * 2^t`, i.e. `U_{t,t+i}`.
    pub fn partial_product_bit(&self, t: u32, i: u32) -> Result<GlobalIndex> {
        if t == 0 {
            self.index(MultiplicationVar::U0(i))
        } else {
            self.index(MultiplicationVar::U { t, i: t + i })
        }
    }

    /// Global variable holding bit `j` of the product `C`.
    pub fn product_bit(&self, j: u32) -> Result<GlobalIndex> {
        let (n, m) = (self.n, self.m);
        let k = if j == 0 {
            1
        } else if j < m {
            3 * n * j - n + 1
        } else if j <= m + n - 2 {
            3 * n * m - 4 * n - m + 2 + j
        } else if j == m + n - 1 {
            3 * n * m - 2 * n
        } else {
            return Err(Error::range("product bit", format!("j = {j} with n = {n}, m = {m}")));
        };
        Ok(GlobalIndex(k))
    }

    pub fn role(&self, k: GlobalIndex) -> Result<MultiplicationVar> {
        use MultiplicationVar::*;
        let (n, m) = (self.n, self.m);
        let k = k.get();
        let err = || Error::range("global index", format!("{k} with n = {n}, m = {m}"));
        if k == 0 || k > self.variable_count() {
            return Err(err());
        }
        if k <= n {
            return Ok(U0(k - 1));
        }
        if k <= self.shifted_variable_count() {
            let q = k - n - 1;
            let t = q / (3 * n) + 1;
            let r = q % (3 * n);
            return Ok(if r < n {
                U { t, i: t + r }
            } else if r < 2 * n {
                S { t, i: t + r - n }
            } else {
                R { t, i: t + 1 + r - 2 * n }
            });
        }
        let a0 = 3 * n * m - 2 * n + 1;
        let b0 = 3 * n * m - n + 1;
        if k < b0 {
            Ok(A(k - a0))
        } else {
            Ok(B(k - b0))
        }
    }

}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(v: i64) -> Literal {
        Literal::from_signed(v).unwrap()
    }

    fn req(v: &[i64]) -> Requirement {
        Requirement::new(&v.iter().map(|x| lit(*x)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn canonical_form_sorts_by_variable() {
        let r = canonicalize(&[lit(7), lit(-2)]).unwrap();
        assert_eq!(r.to_string(), "(-2;7)");
        assert_eq!(canonicalize(&[lit(5)]).unwrap().to_string(), "(5)");
        assert_eq!(req(&[4, 2, 7]), req(&[2, 4, 7]));
    }

    #[test]
    fn canonicalize_rejects_bad_input() {
        assert!(matches!(
            canonicalize(&[lit(2), lit(-2)]),
            Err(Error::DuplicateVariable(2))
        ));
        assert!(matches!(canonicalize(&[]), Err(Error::Arity(0))));
        assert!(matches!(
            canonicalize(&[lit(1), lit(2), lit(3), lit(4)]),
            Err(Error::Arity(4))
        ));
    }

    #[test]
    fn requirement_round_trips_through_text() {
        let r: Requirement = "(2;-4;7)".parse().unwrap();
        assert_eq!(r, req(&[-4, 2, 7]));
        assert_eq!(r.to_string(), "(2;-4;7)");
        assert!("(2;2)".parse::<Requirement>().is_err());
        assert!("2;3".parse::<Requirement>().is_err());
    }

    #[test]
    fn variant_counts() {
        assert_eq!(req(&[1]).variants(), vec![req(&[-1]), req(&[1])]);
        let pair = req(&[1, 3]).variants();
        assert_eq!(pair.len(), 8);
        assert_eq!(pair.iter().filter(|r| r.len() == 2).count(), 4);
        let triple = req(&[2, 4, 7]).variants();
        assert_eq!(triple.len(), 26);
        assert_eq!(triple.iter().filter(|r| r.len() == 3).count(), 8);
        assert_eq!(triple.iter().filter(|r| r.len() == 2).count(), 12);
        assert_eq!(triple.iter().filter(|r| r.len() == 1).count(), 6);
    }

    #[test]
    fn removal_and_support() {
        let r = req(&[2, -4, 7]);
        assert_eq!(r.without(lit(-4)), Some(req(&[2, 7])));
        assert_eq!(r.without(lit(4)), None);
        assert_eq!(req(&[5]).without(lit(5)), None);
        assert_eq!(r.positive_support(), req(&[2, 4, 7]));
        assert!(r.implies(&req(&[-4, 7])));
        assert!(!r.implies(&req(&[4])));
    }

    #[test]
    fn ordering_is_by_length_then_signed_literals() {
        let mut v = vec![req(&[1, 3]), req(&[2]), req(&[-1]), req(&[-1, 3])];
        v.sort();
        assert_eq!(v, vec![req(&[-1]), req(&[2]), req(&[-1, 3]), req(&[1, 3])]);
    }

    #[test]
    fn addition_labels() {
        let n2 = AdditionLayout::new(2).unwrap();
        assert_eq!(n2.index(AdditionVar::S(0)).unwrap().get(), 5);
        assert_eq!(n2.index(AdditionVar::U(0)).unwrap().get(), 1);
        assert_eq!(n2.index(AdditionVar::S(2)).unwrap().get(), 8);
        assert_eq!(n2.index(AdditionVar::R(2)).unwrap().get(), 8);
        assert_eq!(n2.index(AdditionVar::R(1)).unwrap().get(), 7);
        assert_eq!(n2.index(AdditionVar::V(1)).unwrap().get(), 4);
        assert!(n2.index(AdditionVar::R(0)).is_err());
        assert!(n2.index(AdditionVar::U(2)).is_err());
        assert!(n2.index(AdditionVar::S(3)).is_err());
        assert!(AdditionLayout::new(0).is_err());
    }

    #[test]
    fn shifted_labels_match_worked_layout() {
        let l = MultiplicationLayout::new(2, 3).unwrap();
        let ix = |v| l.index(v).unwrap().get();
        use MultiplicationVar::*;
        assert_eq!(ix(U { t: 1, i: 2 }), 4);
        assert_eq!(ix(R { t: 2, i: 4 }), 14);
        assert_eq!(ix(S { t: 1, i: 1 }), 5);
        assert_eq!(ix(U0(1)), 2);
        assert_eq!(ix(U { t: 2, i: 3 }), 10);
        assert_eq!(ix(R { t: 1, i: 3 }), 8);
        assert_eq!(ix(S { t: 2, i: 2 }), 11);
        assert!(l.index(U { t: 0, i: 0 }).is_err());
        assert!(l.index(U { t: 3, i: 3 }).is_err());
        assert!(l.index(R { t: 1, i: 1 }).is_err());
    }

    #[test]
    fn factor_and_product_labels() {
        let l = MultiplicationLayout::new(2, 3).unwrap();
        use MultiplicationVar::*;
        assert_eq!(l.index(A(0)).unwrap().get(), 15);
        assert_eq!(l.index(A(1)).unwrap().get(), 16);
        assert_eq!(l.index(B(0)).unwrap().get(), 17);
        assert_eq!(l.index(B(2)).unwrap().get(), 19);
        assert!(l.index(B(3)).is_err());
        let c: Vec<u32> = (0..5).map(|j| l.product_bit(j).unwrap().get()).collect();
        assert_eq!(c, vec![1, 5, 11, 12, 14]);
        assert!(l.product_bit(5).is_err());
        for (n, m) in [(3, 2), (5, 4), (7, 4)] {
            let l = MultiplicationLayout::new(n, m).unwrap();
            assert_eq!(l.index(A(n - 1)).unwrap().get(), 3 * n * m - n);
            assert_eq!(l.product_bit(0).unwrap().get(), 1);
        }
    }

    #[test]
    fn product_bits_are_the_final_sum_bits() {
        use MultiplicationVar::*;
        for n in 2..6 {
            for m in 2..6 {
                let l = MultiplicationLayout::new(n, m).unwrap();
                assert_eq!(l.product_bit(0).unwrap(), l.index(U0(0)).unwrap());
                for j in 1..m {
                    assert_eq!(l.product_bit(j).unwrap(), l.index(S { t: j, i: j }).unwrap());
                }
                for j in m..m + n - 1 {
                    assert_eq!(l.product_bit(j).unwrap(), l.index(S { t: m - 1, i: j }).unwrap());
                }
                assert_eq!(
                    l.product_bit(m + n - 1).unwrap(),
                    l.index(R { t: m - 1, i: m - 1 + n }).unwrap()
                );
            }
        }
    }

    #[test]
    fn layouts_are_bijective() {
        for n in 1..8 {
            let l = AdditionLayout::new(n).unwrap();
            for k in 1..=l.variable_count() {
                let k = GlobalIndex::new(k).unwrap();
                assert_eq!(l.index(l.role(k).unwrap()).unwrap(), k);
            }
            assert!(l.role(GlobalIndex::new(4 * n + 1).unwrap()).is_err());
        }
        for n in 2..7 {
            for m in 2..7 {
                let l = MultiplicationLayout::new(n, m).unwrap();
                for k in 1..=l.variable_count() {
                    let k = GlobalIndex::new(k).unwrap();
                    assert_eq!(l.index(l.role(k).unwrap()).unwrap(), k, "n={n} m={m}");
                }
            }
        }
    }
}
