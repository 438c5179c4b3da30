use std::collections::BTreeSet;

use proptest::prelude::*;

use bayes_arith::addition::{build_addition, AdditionSpec};
use bayes_arith::lp::{
    int, parse_native, rank, write_native, ExactRational, LpSolver, RankMethod, Rational, SimplexOptions,
};
use bayes_arith::model::{AdditionLayout, AdditionVar, GlobalIndex, Literal, Requirement};
use bayes_arith::oracle::{addition_assignment, lift};
use bayes_arith::presolve::{presolve, PresolveOutcome, Slot};
use bayes_arith::system::{ConstraintKind, Environment, LinearConstraint, LpSystem};

fn literals() -> impl Strategy<Value = Vec<Literal>> {
    proptest::sample::subsequence((1u32..40).collect::<Vec<_>>(), 1..=3)
        .prop_flat_map(|vars| {
            let k = vars.len();
            (Just(vars), proptest::collection::vec(any::<bool>(), k))
        })
        .prop_map(|(vars, signs)| {
            vars.into_iter()
                .zip(signs)
                .map(|(v, s)| GlobalIndex::new(v).unwrap().literal(s))
                .collect()
        })
}

proptest! {
    #[test]
    fn canonical_form_ignores_order(lits in literals(), seed in any::<u64>()) {
        let base = Requirement::new(&lits).unwrap();
        let mut shuffled = lits.clone();
        let k = shuffled.len();
        shuffled.rotate_left((seed as usize) % k);
        if seed & 1 == 1 {
            shuffled.reverse();
        }
        prop_assert_eq!(Requirement::new(&shuffled).unwrap(), base);
        prop_assert_eq!(base.to_string().parse::<Requirement>().unwrap(), base);
        let vars: Vec<u32> = base.literals().iter().map(|l| l.var()).collect();
        prop_assert!(vars.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn duplicate_variables_are_rejected(lits in literals(), flip in any::<bool>()) {
        let mut with_dup = lits.clone();
        let first = lits[0];
        with_dup.push(if flip { first.negated() } else { first });
        if with_dup.len() <= 3 {
            prop_assert!(Requirement::new(&with_dup).is_err());
        }
    }

    #[test]
    fn variants_are_closed(lits in literals()) {
        let r = Requirement::new(&lits).unwrap().positive_support();
        let vs = r.variants();
        let set: BTreeSet<Requirement> = vs.iter().copied().collect();
        prop_assert_eq!(set.len(), vs.len());
        prop_assert_eq!(vs.len(), 3usize.pow(r.len() as u32) - 1);
        prop_assert!(set.contains(&r));
        for v in &vs {
            prop_assert!(r.implies(&v.positive_support()));
            for w in v.positive_support().variants() {
                prop_assert!(set.contains(&w));
            }
        }
    }
}

fn random_system() -> impl Strategy<Value = LpSystem> {
    (1usize..12).prop_flat_map(|vars| {
        let row = (
            proptest::collection::vec((0..vars, -3i64..=3, 1i64..=4), 1..5),
            -5i64..=5,
            0usize..4,
        );
        (
            Just(vars),
            proptest::collection::vec(row, 0..10),
            proptest::collection::vec(any::<bool>(), vars),
        )
    })
    .prop_map(|(vars, rows, labelled)| {
        let mut sys = LpSystem::new(Environment::Generic);
        for (id, named) in labelled.into_iter().enumerate() {
            let label = named.then(|| Requirement::single(GlobalIndex::new(id as u32 + 1).unwrap().positive()));
            sys.add_unknown(label).unwrap();
        }
        let kinds = [ConstraintKind::Data, ConstraintKind::Structural, ConstraintKind::Universal, ConstraintKind::Extra];
        for (terms, rhs, kind) in rows {
            let terms = terms
                .into_iter()
                .map(|(id, num, den)| (id, Rational::new(num.into(), den.into())))
                .collect();
            sys.push(LinearConstraint::new(kinds[kind], terms, int(rhs))).unwrap();
        }
        assert_eq!(sys.num_unknowns(), vars);
        sys
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn native_format_round_trips(sys in random_system()) {
        let mut buf = Vec::new();
        write_native(&sys, &mut buf).unwrap();
        let back = parse_native(buf.as_slice()).unwrap();
        prop_assert_eq!(back.num_unknowns(), sys.num_unknowns());
        prop_assert_eq!(back.labels(), sys.labels());
        prop_assert_eq!(back.constraints(), sys.constraints());
    }

    #[test]
    fn dense_and_sparse_rank_agree(sys in random_system()) {
        prop_assert_eq!(rank(&sys, RankMethod::Dense), rank(&sys, RankMethod::Sparse));
    }

    #[test]
    fn exact_and_float_feasibility_agree(sys in random_system()) {
        let exact = LpSolver::<ExactRational>::new(&sys, SimplexOptions::default()).unwrap().is_feasible();
        let float = LpSolver::<f64>::new(&sys, SimplexOptions::default()).unwrap().is_feasible();
        prop_assert_eq!(exact, float);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// The grade-school point survives presolve: fixed unknowns take their
    /// lifted values and the rest satisfy the reduced system.
    #[test]
    fn presolve_keeps_the_deterministic_point(n in 1u32..=3, u in 0u64..8, v in 0u64..8, fix_s in any::<bool>()) {
        let (u, v) = (u % (1 << n), v % (1 << n));
        let mut spec = AdditionSpec::new(n).unwrap();
        spec.with_u(u).unwrap().with_v(v).unwrap();
        if fix_s {
            spec.with_s(u + v).unwrap();
        }
        let sys = build_addition(&spec).unwrap();
        let layout = AdditionLayout::new(n).unwrap();
        let point = lift(&addition_assignment(&layout, u, v), &sys).unwrap();
        prop_assert!(sys.is_satisfied_by(&point));
        let PresolveOutcome::Reduced { reduction, .. } = presolve(&sys) else {
            return Err(TestCaseError::fail("presolve rejected a satisfiable system"));
        };
        for (id, slot) in reduction.map.iter().enumerate() {
            if let Slot::Fixed(value) = slot {
                prop_assert_eq!(value, &point[id], "unknown {}", id);
            }
        }
        let reduced = reduction.restrict(&point);
        prop_assert!(reduction.system.is_satisfied_by(&reduced));
        prop_assert_eq!(reduction.expand(&reduced), point);
    }

    /// Fixing the sum to a wrong value is caught by presolve or by phase I.
    #[test]
    fn wrong_sum_is_infeasible(n in 1u32..=3, u in 0u64..8, v in 0u64..8, delta in 1u64..15) {
        let (u, v) = (u % (1 << n), v % (1 << n));
        let wrong = (u + v + delta) % (1 << (n + 1));
        prop_assume!(wrong != u + v);
        let mut spec = AdditionSpec::new(n).unwrap();
        spec.with_u(u).unwrap().with_v(v).unwrap().with_s(wrong).unwrap();
        let sys = build_addition(&spec).unwrap();
        let by_presolve = matches!(presolve(&sys), PresolveOutcome::ProvedInfeasible { .. });
        let by_simplex = !LpSolver::<ExactRational>::new(&sys, SimplexOptions::default()).unwrap().is_feasible();
        prop_assert!(by_presolve && by_simplex);
    }
}

#[test]
fn addition_layout_roles_invert() {
    for n in 1..=6 {
        let layout = AdditionLayout::new(n).unwrap();
        for k in 1..=layout.variable_count() {
            let g = GlobalIndex::new(k).unwrap();
            let role = layout.role(g).unwrap();
            assert_eq!(layout.index(role).unwrap(), g);
        }
        assert!(matches!(layout.role(GlobalIndex::new(1).unwrap()).unwrap(), AdditionVar::U(0)));
    }
}
