//! The addition environment `S = U + V` over `n`-bit operands.

use std::collections::BTreeMap;

use crate::circuit::{structural_equations, Gate};
use crate::error::{Error, Result};
use crate::model::{AdditionLayout, AdditionVar, GlobalIndex, Literal, Requirement};
use crate::system::{ConstraintKind, Environment, Equation, LpSystem, SystemCounts};
use crate::universal::for_each_universal_of;

/// Bit width plus fixed literals. Each entry `(lit, value)` states
/// `P(lit) = value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditionSpec {
    pub n: u32,
    pub data: Vec<(Literal, bool)>,
}

impl AdditionSpec {
    pub fn new(n: u32) -> Result<Self> {
        AdditionLayout::new(n)?;
        Ok(AdditionSpec { n, data: Vec::new() })
    }

    pub fn layout(&self) -> AdditionLayout {
        AdditionLayout::new(self.n).expect("validated width")
    }

    pub fn fix(&mut self, lit: Literal, value: bool) -> &mut Self {
        self.data.push((lit, value));
        self
    }

    pub fn fix_var(&mut self, var: AdditionVar, value: bool) -> Result<&mut Self> {
        let k = self.layout().index(var)?;
        Ok(self.fix(k.positive(), value))
    }

    /// Fixes the `n` bits of `U`.
    pub fn with_u(&mut self, value: u64) -> Result<&mut Self> {
        self.fix_operand(value, self.n, "U", AdditionVar::U)
    }

    pub fn with_v(&mut self, value: u64) -> Result<&mut Self> {
        self.fix_operand(value, self.n, "V", AdditionVar::V)
    }

    /// Fixes the `n + 1` bits of `S`.
    pub fn with_s(&mut self, value: u64) -> Result<&mut Self> {
        self.fix_operand(value, self.n + 1, "S", AdditionVar::S)
    }

    fn fix_operand(
        &mut self,
        value: u64,
        bits: u32,
        name: &'static str,
        role: fn(u32) -> AdditionVar,
    ) -> Result<&mut Self> {
        if bits < 64 && value >> bits != 0 {
            return Err(Error::range("operand", format!("{name} = {value} needs more than {bits} bits")));
        }
        for i in 0..bits {
            let bit = i < 64 && (value >> i) & 1 == 1;
            self.fix_var(role(i), bit)?;
        }
        Ok(self)
    }

    /// Data equations `P(lit) = 0`, one per fixed variable, ascending index.
    pub fn data_equations(&self) -> Result<Vec<Equation>> {
        data_equations(&self.data, self.layout().variable_count())
    }
}

/// Normalizes fixed literals into zero-right-hand-side equations.
pub(crate) fn data_equations(data: &[(Literal, bool)], variables: u32) -> Result<Vec<Equation>> {
    let mut fixed: BTreeMap<u32, bool> = BTreeMap::new();
    for (lit, value) in data {
        let k = lit.var();
        if k > variables {
            return Err(Error::range("data literal", format!("{lit} exceeds {variables} variables")));
        }
        let var_value = lit.is_positive() == *value;
        if let Some(prev) = fixed.insert(k, var_value) {
            if prev != var_value {
                return Err(Error::ContradictoryData(k));
            }
        }
    }
    Ok(fixed
        .into_iter()
        .map(|(k, v)| {
            let zero = GlobalIndex::new(k).expect("nonzero index").literal(!v);
            Equation::new(ConstraintKind::Data, &[(1, Requirement::single(zero))], 0)
        })
        .collect())
}

pub(crate) fn addition_gates(n: u32) -> Vec<Gate> {
    let l = AdditionLayout::new(n).expect("validated width");
    let ix = |v| l.index(v).expect("role in range");
    let mut gates = vec![Gate::Half {
        a: ix(AdditionVar::U(0)),
        b: ix(AdditionVar::V(0)),
        sum: ix(AdditionVar::S(0)),
        carry: ix(AdditionVar::R(1)),
    }];
    for i in 1..n {
        gates.push(Gate::Full {
            a: ix(AdditionVar::U(i)),
            b: ix(AdditionVar::V(i)),
            c: ix(AdditionVar::R(i)),
            sum: ix(AdditionVar::S(i)),
            carry: ix(AdditionVar::R(i + 1)),
        });
    }
    gates
}

/// The `2n` structural equations: a half adder on bit 0, full adders above.
pub fn addition_structural(n: u32) -> Result<Vec<Equation>> {
    AdditionLayout::new(n)?;
    Ok(structural_equations(&addition_gates(n)))
}

/// The `8n - 3` positive unknowns, sorted.
pub fn addition_positive_unknowns(n: u32) -> Result<Vec<Requirement>> {
    let l = AdditionLayout::new(n)?;
    let mut out: Vec<Requirement> = (1..=l.variable_count())
        .map(|k| Requirement::single(GlobalIndex::new(k).expect("nonzero").positive()))
        .collect();
    for g in addition_gates(n) {
        out.extend(g.positive_unknowns());
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Streams data, structural and universal equations in build order.
pub fn for_each_addition_equation(spec: &AdditionSpec, mut sink: impl FnMut(Equation)) -> Result<()> {
    for eq in spec.data_equations()? {
        sink(eq);
    }
    for eq in addition_structural(spec.n)? {
        sink(eq);
    }
    for r in addition_positive_unknowns(spec.n)? {
        for_each_universal_of(&r, &mut sink)?;
    }
    Ok(())
}

pub fn build_addition(spec: &AdditionSpec) -> Result<LpSystem> {
    let mut sys = LpSystem::new(Environment::Addition { n: spec.n });
    for_each_addition_equation(spec, |eq| sys.push_equation(&eq))?;
    Ok(sys)
}

/// Closed-form counts of the rough addition system with `data` data equations.
pub fn addition_counts(n: u32, data: u64) -> SystemCounts {
    let n = n as u64;
    SystemCounts {
        unknowns: 28 * n - 16,
        positive_unknowns: 8 * n - 3,
        equations: data + 30 * n - 20,
        data,
        structural: 2 * n,
        universal: 28 * n - 20,
        extra: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(eqs: &[Equation]) -> Vec<String> {
        eqs.iter().map(|e| e.to_string()).collect()
    }

    #[test]
    fn one_bit_structural() {
        assert_eq!(
            strings(&addition_structural(1).unwrap()),
            ["P(3) -P(-1;2) -P(1;-2) = 0", "P(4) -P(1;2) = 0"]
        );
    }

    #[test]
    fn two_bit_structural() {
        assert_eq!(
            strings(&addition_structural(2).unwrap()),
            [
                "P(5) -P(-1;3) -P(1;-3) = 0",
                "P(6) -P(-2;-4;7) -P(-2;4;-7) -P(2;-4;-7) -P(2;4;7) = 0",
                "P(7) -P(1;3) = 0",
                "P(8) -P(-2;4;7) -P(2;-4;7) -P(2;4;-7) -P(2;4;7) = 0",
            ]
        );
    }

    #[test]
    fn three_bit_middle_sum() {
        let eqs = addition_structural(3).unwrap();
        assert_eq!(eqs.len(), 6);
        assert_eq!(
            eqs[2].to_string(),
            "P(9) -P(-3;-6;11) -P(-3;6;-11) -P(3;-6;-11) -P(3;6;11) = 0"
        );
    }

    #[test]
    fn data_normalization() {
        let mut spec = AdditionSpec::new(2).unwrap();
        spec.with_u(2).unwrap().with_v(3).unwrap();
        assert_eq!(
            strings(&spec.data_equations().unwrap()),
            ["P(1) = 0", "P(-2) = 0", "P(-3) = 0", "P(-4) = 0"]
        );
        let mut spec = AdditionSpec::new(1).unwrap();
        spec.fix("-2".parse().unwrap(), false);
        spec.fix("3".parse().unwrap(), true);
        assert_eq!(strings(&spec.data_equations().unwrap()), ["P(-2) = 0", "P(-3) = 0"]);
    }

    #[test]
    fn contradictory_data() {
        let mut spec = AdditionSpec::new(2).unwrap();
        spec.fix("1".parse().unwrap(), true);
        spec.fix("-1".parse().unwrap(), true);
        assert!(matches!(build_addition(&spec), Err(Error::ContradictoryData(1))));
        let mut spec = AdditionSpec::new(2).unwrap();
        spec.fix("1".parse().unwrap(), true);
        spec.fix("-1".parse().unwrap(), false);
        assert!(build_addition(&spec).is_ok());
        let mut spec = AdditionSpec::new(2).unwrap();
        spec.fix("9".parse().unwrap(), true);
        assert!(matches!(build_addition(&spec), Err(Error::Range { .. })));
        assert!(AdditionSpec::new(2).unwrap().with_u(4).is_err());
    }

    #[test]
    fn positive_unknowns() {
        let p = addition_positive_unknowns(2).unwrap();
        assert_eq!(p.len(), 13);
        assert!(p.contains(&"(1;3)".parse().unwrap()));
        assert!(p.contains(&"(2;4;7)".parse().unwrap()));
        assert_eq!(addition_positive_unknowns(3).unwrap().len(), 21);
        assert_eq!(addition_positive_unknowns(1).unwrap().len(), 5);
    }

    #[test]
    fn worked_totals() {
        let mut spec = AdditionSpec::new(2).unwrap();
        spec.with_u(2).unwrap().with_v(3).unwrap();
        let c = build_addition(&spec).unwrap().counts();
        assert_eq!((c.unknowns, c.equations, c.universal), (40, 44, 36));
        assert_eq!(c, addition_counts(2, 4));

        let mut spec = AdditionSpec::new(1).unwrap();
        spec.with_u(0).unwrap().with_v(1).unwrap();
        let c = build_addition(&spec).unwrap().counts();
        assert_eq!((c.unknowns, c.equations), (12, 12));

        let mut spec = AdditionSpec::new(1).unwrap();
        spec.with_s(0).unwrap().with_u(1).unwrap();
        let c = build_addition(&spec).unwrap().counts();
        assert_eq!((c.unknowns, c.equations), (12, 13));
    }

    #[test]
    fn one_bit_column_order() {
        let mut spec = AdditionSpec::new(1).unwrap();
        spec.with_u(0).unwrap().with_v(1).unwrap();
        let sys = build_addition(&spec).unwrap();
        let labels: Vec<String> = sys.labels().iter().map(|l| l.unwrap().to_string()).collect();
        assert_eq!(
            labels,
            [
                "(1)", "(-2)", "(3)", "(-1;2)", "(1;-2)", "(4)", "(1;2)", "(-1)", "(2)", "(-3)",
                "(-4)", "(-1;-2)"
            ]
        );
    }
}
