//! The multiplication environment `A x B = C`: the shifted addition of the
//! partial products `A * b_t * 2^t`, the AND gates defining them, and the
//! factoring data equations.

use num_bigint::BigUint;

use crate::addition::data_equations;
use crate::circuit::{structural_equations, Gate};
use crate::error::{Error, Result};
use crate::model::{GlobalIndex, Literal, MultiplicationLayout, MultiplicationVar, Requirement};
use crate::system::{Environment, Equation, LpSystem, SystemCounts};
use crate::universal::for_each_universal_of;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplicationSpec {
    pub n: u32,
    pub m: u32,
    pub data: Vec<(Literal, bool)>,
}

impl MultiplicationSpec {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        MultiplicationLayout::new(n, m)?;
        Ok(MultiplicationSpec {
            n,
            m,
            data: Vec::new(),
        })
    }

    pub fn layout(&self) -> MultiplicationLayout {
        MultiplicationLayout::new(self.n, self.m).expect("validated widths")
    }

    pub fn fix(&mut self, lit: Literal, value: bool) -> &mut Self {
        self.data.push((lit, value));
        self
    }

    fn fix_bits(&mut self, value: &BigUint, bits: u32, name: &str, index: impl Fn(u32) -> Result<GlobalIndex>) -> Result<&mut Self> {
        if value.bits() > bits as u64 {
            return Err(Error::range("operand", format!("{name} = {value} needs more than {bits} bits")));
        }
        for j in 0..bits {
            let k = index(j)?;
            self.fix(k.positive(), value.bit(j as u64));
        }
        Ok(self)
    }

    pub fn with_a(&mut self, value: &BigUint) -> Result<&mut Self> {
        let l = self.layout();
        self.fix_bits(value, self.n, "A", |i| l.index(MultiplicationVar::A(i)))
    }

    pub fn with_b(&mut self, value: &BigUint) -> Result<&mut Self> {
        let l = self.layout();
        self.fix_bits(value, self.m, "B", |t| l.index(MultiplicationVar::B(t)))
    }

    /// Fixes all `m + n` bits of the product, padding with zeros.
    pub fn with_c(&mut self, value: &BigUint) -> Result<&mut Self> {
        let l = self.layout();
        self.fix_bits(value, self.n + self.m, "C", |j| l.product_bit(j))
    }

    pub fn data_equations(&self) -> Result<Vec<Equation>> {
        data_equations(&self.data, self.layout().variable_count())
    }
}

/// Dimensions chosen for factoring `C` of bit length `c`: `n = c - 1` and
/// `m = floor((c + 1) / 2)`. Any factorization with `1 < B < C` then has
/// `A < 2^n` and `B < 2^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoringSpec {
    pub c_value: BigUint,
    pub bits: u32,
    pub n: u32,
    pub m: u32,
}

impl FactoringSpec {
    pub fn new(c_value: &BigUint) -> Result<Self> {
        if *c_value <= BigUint::from(3u32) {
            return Err(Error::range("number to factor", format!("{c_value} must exceed 3")));
        }
        let bits = c_value.bits() as u32;
        Ok(FactoringSpec {
            c_value: c_value.clone(),
            bits,
            n: bits - 1,
            m: bits.div_ceil(2),
        })
    }

    pub fn from_u64(c: u64) -> Result<Self> {
        FactoringSpec::new(&BigUint::from(c))
    }

    pub fn layout(&self) -> MultiplicationLayout {
        MultiplicationLayout::new(self.n, self.m).expect("n, m >= 2 for C > 3")
    }

    pub fn multiplication_spec(&self) -> MultiplicationSpec {
        let mut spec = MultiplicationSpec::new(self.n, self.m).expect("n, m >= 2 for C > 3");
        spec.with_c(&self.c_value).expect("C fits in n + m bits");
        spec
    }
}

/// The `m + n` equations fixing the product bits to those of `C`.
pub fn factoring_data(spec: &FactoringSpec) -> Vec<Equation> {
    spec.multiplication_spec()
        .data_equations()
        .expect("product bits are distinct variables")
}

pub(crate) fn shifted_gates(l: &MultiplicationLayout) -> Vec<Gate> {
    use MultiplicationVar::*;
    let (n, m) = (l.n(), l.m());
    let ix = |v| l.index(v).expect("role in range");
    let mut gates = Vec::new();
    for t in 1..m {
        for i in t..t + n {
            let u = ix(U { t, i });
            let sum = ix(S { t, i });
            let carry = ix(R { t, i: i + 1 });
            // Addend already accumulated at position i before step t.
            let prev = if t == 1 {
                (i < n).then(|| ix(U0(i)))
            } else if i < t + n - 1 {
                Some(ix(S { t: t - 1, i }))
            } else {
                Some(ix(R { t: t - 1, i }))
            };
            let carry_in = (i > t).then(|| ix(R { t, i }));
            gates.push(match (prev, carry_in) {
                (Some(a), Some(c)) => Gate::Full { a, b: u, c, sum, carry },
                (Some(a), None) => Gate::Half { a, b: u, sum, carry },
                (None, Some(c)) => Gate::Half { a: u, b: c, sum, carry },
                (None, None) => unreachable!("every position has two addends"),
            });
        }
    }
    gates
}

pub(crate) fn product_gates(l: &MultiplicationLayout) -> Vec<Gate> {
    let mut gates = Vec::new();
    for t in 0..l.m() {
        for i in 0..l.n() {
            gates.push(Gate::And {
                a: l.index(MultiplicationVar::A(i)).expect("A in range"),
                b: l.index(MultiplicationVar::B(t)).expect("B in range"),
                out: l.partial_product_bit(t, i).expect("partial product in range"),
            });
        }
    }
    gates
}

/// The `2n(m - 1)` equations of the shifted addition.
pub fn shifted_structural(n: u32, m: u32) -> Result<Vec<Equation>> {
    let l = MultiplicationLayout::new(n, m)?;
    Ok(structural_equations(&shifted_gates(&l)))
}

/// The `mn` equations `P(U_{t,t+i}) = P(A_i ; B_t)`.
pub fn product_structural(n: u32, m: u32) -> Result<Vec<Equation>> {
    let l = MultiplicationLayout::new(n, m)?;
    Ok(structural_equations(&product_gates(&l)))
}

fn singletons(count: u32) -> impl Iterator<Item = Requirement> {
    (1..=count).map(|k| Requirement::single(GlobalIndex::new(k).expect("nonzero").positive()))
}

/// Positive unknowns of the shifted addition alone, `7mn - 3m - 6n` of them.
pub fn shifted_positive_unknowns(n: u32, m: u32) -> Result<Vec<Requirement>> {
    let l = MultiplicationLayout::new(n, m)?;
    let mut out: Vec<Requirement> = singletons(l.shifted_variable_count()).collect();
    for g in shifted_gates(&l) {
        out.extend(g.positive_unknowns());
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Positive unknowns of the full multiplication, `8mn - 2m - 5n` of them.
pub fn multiplication_positive_unknowns(n: u32, m: u32) -> Result<Vec<Requirement>> {
    let l = MultiplicationLayout::new(n, m)?;
    let mut out: Vec<Requirement> = singletons(l.variable_count()).collect();
    for g in shifted_gates(&l).iter().chain(product_gates(&l).iter()) {
        out.extend(g.positive_unknowns());
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Streams data, shifted-addition structural, product structural and
/// universal equations in build order.
pub fn for_each_multiplication_equation(
    spec: &MultiplicationSpec,
    mut sink: impl FnMut(Equation),
) -> Result<()> {
    for eq in spec.data_equations()? {
        sink(eq);
    }
    for eq in shifted_structural(spec.n, spec.m)? {
        sink(eq);
    }
    for eq in product_structural(spec.n, spec.m)? {
        sink(eq);
    }
    for r in multiplication_positive_unknowns(spec.n, spec.m)? {
        for_each_universal_of(&r, &mut sink)?;
    }
    Ok(())
}

pub fn build_multiplication(spec: &MultiplicationSpec) -> Result<LpSystem> {
    let mut sys = LpSystem::new(Environment::Multiplication {
        n: spec.n,
        m: spec.m,
    });
    for_each_multiplication_equation(spec, |eq| sys.push_equation(&eq))?;
    Ok(sys)
}

pub fn build_factoring(spec: &FactoringSpec) -> Result<LpSystem> {
    build_multiplication(&spec.multiplication_spec())
}

/// Closed-form counts of the rough multiplication system.
pub fn multiplication_counts(n: u32, m: u32, data: u64) -> SystemCounts {
    let (n, m) = (n as u64, m as u64);
    SystemCounts {
        unknowns: 30 * m * n - 14 * m - 22 * n,
        positive_unknowns: 8 * m * n - 2 * m - 5 * n,
        equations: data + 34 * m * n - 19 * m - 27 * n,
        data,
        structural: 3 * m * n - 2 * n,
        universal: 31 * m * n - 19 * m - 25 * n,
        extra: 0,
    }
}

/// Closed-form counts of the shifted addition without data.
pub fn shifted_counts(n: u32, m: u32) -> SystemCounts {
    let (n, m) = (n as u64, m as u64);
    SystemCounts {
        unknowns: 26 * m * n - 16 * m - 24 * n,
        positive_unknowns: 7 * m * n - 3 * m - 6 * n,
        equations: 29 * m * n - 20 * m - 26 * n,
        data: 0,
        structural: 2 * n * (m - 1),
        universal: 27 * m * n - 20 * m - 24 * n,
        extra: 0,
    }
}

/// Counts of the factoring system for an integer of `bits` bits.
pub fn factoring_counts(bits: u32) -> Result<SystemCounts> {
    if bits < 3 {
        return Err(Error::range("bit length", format!("{bits} < 3")));
    }
    let (n, m) = (bits - 1, bits.div_ceil(2));
    Ok(multiplication_counts(n, m, (n + m) as u64))
}

/// Counts a streamed build without materializing the system: unknowns are
/// distinct requirements across all equations.
pub fn count_by_streaming(spec: &MultiplicationSpec) -> Result<SystemCounts> {
    let mut seen = std::collections::HashSet::new();
    let mut c = SystemCounts::default();
    for_each_multiplication_equation(spec, |eq| {
        c.bump(eq.kind);
        for r in eq.requirements() {
            if seen.insert(r) && r.is_positive() {
                c.positive_unknowns += 1;
            }
        }
    })?;
    c.unknowns = seen.len() as u64;
    Ok(c)
}
