use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use super::*;
use crate::alphabet::Sequence;
use crate::table::{Context, Defect, SymbolicTable};

fn v(i: u32) -> VarId {
    VarId(i)
}

fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

fn var(i: u32) -> ValExpr {
    ValExpr::var(v(i))
}

fn konst(n: i64) -> ValExpr {
    ValExpr::constant(int(n))
}

fn c(l: ValExpr, r: Relation, rhs: ValExpr) -> Constraint {
    Constraint::new(l, r, rhs)
}

/// Every assignment of `vars` over `domain`.
fn all_assignments(vars: &[VarId], domain: &[Rational]) -> Vec<BTreeMap<VarId, Rational>> {
    let mut out = vec![BTreeMap::new()];
    for x in vars {
        out = out
            .into_iter()
            .flat_map(|a| {
                domain.iter().map(move |d| {
                    let mut b = a.clone();
                    b.insert(*x, d.clone());
                    b
                })
            })
            .collect();
    }
    out
}

/// Independent check of every hard constraint of `s` on `a`.
fn feasible(s: &Solver, vars: &[VarId], a: &BTreeMap<VarId, Rational>) -> bool {
    let var_set: BTreeSet<VarId> = vars.iter().copied().collect();
    s.assertions().all(|c| c.holds(a) == Some(true))
        && s.nogoods().all(|n| !n.0.iter().all(|(x, val)| &a[x] == val))
        && s.blocks().filter(|(_, b)| b.active(&var_set)).all(|(_, b)| {
            let induced = EquivClassSet::from_assignment(
                &b.classes.vars().map(|x| (x, a[&x].clone())).collect(),
            );
            induced != b.classes
        })
}

fn ve(unknown: &[(VarId, VarId)], a: &BTreeMap<VarId, Rational>) -> u64 {
    unknown.iter().filter(|(x, y)| a[x] == a[y]).count() as u64
}

#[test]
fn ve_example() {
    let mut s = Solver::new([int(0), int(2)]).unwrap();
    s.assert(c(var(0), Relation::Eq, konst(0)));
    s.assert(c(var(1), Relation::Gt, var(0)));
    let vars = [v(0), v(1), v(2)];
    let sol = s.solve_ve(&vars, &[(v(1), v(2)), (v(2), v(1))]).unwrap().unwrap();
    assert_eq!(sol.ve, 2);
    assert_eq!(
        sol.values.values().cloned().collect::<Vec<_>>(),
        vec![int(0), int(2), int(2)]
    );
    assert_eq!(sol.classes.classes(), vec![vec![v(0)], vec![v(1), v(2)]]);
    assert_eq!(s.metrics().solves, 1);
}

#[test]
fn contradiction_is_unsat() {
    let mut s = Solver::new([int(0), int(2)]).unwrap();
    s.assert(c(var(0), Relation::Eq, konst(0)));
    s.assert(c(var(0), Relation::Eq, konst(2)));
    assert!(s.solve_ve(&[v(0)], &[]).unwrap().is_none());
    assert!(s.check_sat(&[v(0)]).unwrap().is_none());
}

#[test]
fn no_unknowns_gives_any_model() {
    let mut s = Solver::new([int(0), int(1)]).unwrap();
    s.assert(c(var(0), Relation::Lt, var(1)));
    let sol = s.solve_ve(&[v(0), v(1)], &[]).unwrap().unwrap();
    assert_eq!(sol.ve, 0);
    assert!(feasible(&s, &[v(0), v(1)], &sol.values));
}

#[test]
fn unknown_variable_is_an_error() {
    let mut s = Solver::new([int(0)]).unwrap();
    s.assert(c(var(5), Relation::Eq, konst(0)));
    assert!(s.check_sat(&[v(0)]).is_err());
}

#[test]
fn enumeration_examples() {
    let mut s = Solver::new([int(0), int(1)]).unwrap();
    assert_eq!(s.enumerate_models(&[v(0)], &[v(0)], None).unwrap().len(), 2);

    let mut s = Solver::new([int(0), int(2)]).unwrap();
    s.assert(c(var(0), Relation::Lt, var(1)));
    let models = s.enumerate_models(&[v(0), v(1)], &[v(0), v(1)], None).unwrap();
    assert_eq!(models, vec![BTreeMap::from([(v(0), int(0)), (v(1), int(2))])]);
    // the nogoods were scoped
    assert_eq!(s.nogoods().count(), 0);

    s.assert(c(var(0), Relation::Gt, konst(5)));
    assert!(s.enumerate_models(&[v(0), v(1)], &[v(0)], None).unwrap().is_empty());
}

#[test]
fn scopes_restore_assertions() {
    let mut s = Solver::new([int(0), int(1)]).unwrap();
    s.push();
    s.assert(c(var(0), Relation::Eq, konst(0)));
    s.push();
    s.assert(c(var(0), Relation::Eq, konst(1)));
    assert!(s.check_sat(&[v(0)]).unwrap().is_none());
    s.pop().unwrap();
    assert_eq!(s.check_sat(&[v(0)]).unwrap().unwrap().values[&v(0)], int(0));
    s.pop().unwrap();
    assert_eq!(s.assertions().count(), 0);
    assert!(matches!(s.pop(), Err(Error::EmptyScope)));
}

#[test]
fn blocks_depend_on_variable_count() {
    let mut s = Solver::new([int(0), int(1)]).unwrap();
    let all = EquivClassSet::from_classes([vec![v(0), v(1), v(2)]]).unwrap();
    s.block_conjecture(all.clone(), 3);
    let vars3 = [v(0), v(1), v(2)];
    let unknown = [(v(0), v(1)), (v(1), v(2)), (v(0), v(2))];
    let sol = s.solve_ve(&vars3, &unknown).unwrap().unwrap();
    assert_ne!(sol.classes, all);
    assert_eq!(sol.ve, 1);
    let vars5 = [v(0), v(1), v(2), v(3), v(4)];
    let sol = s.solve_ve(&vars5, &unknown).unwrap().unwrap();
    assert_eq!(sol.ve, 3);

    // every pattern blocked: nothing left at this size
    let mut s = Solver::new([int(0), int(1)]).unwrap();
    s.block_conjecture(EquivClassSet::from_classes([vec![v(0), v(1)]]).unwrap(), 2);
    let id = s.block_conjecture(EquivClassSet::from_classes([vec![v(0)], vec![v(1)]]).unwrap(), 2);
    assert!(s.solve_ve(&[v(0), v(1)], &[]).unwrap().is_none());
    s.remove_block(id);
    assert!(s.solve_ve(&[v(0), v(1)], &[]).unwrap().is_some());
}

#[test]
fn product_constraints_are_exact() {
    let dom = [Rational::new(1, 2), int(1), int(2)];
    let mut s = Solver::new(dom.clone()).unwrap();
    let mono = |vs: &[u32]| ValExpr::Monomial {
        coeff: Rational::one(),
        powers: vs.iter().map(|i| (v(*i), 1)).collect(),
    };
    s.assert(c(var(0), Relation::Eq, konst(1)));
    s.assert(c(mono(&[0, 1, 2]), Relation::Eq, mono(&[0])));
    s.assert(c(mono(&[0, 1]), Relation::Gt, mono(&[0])));
    let models = s.enumerate_models(&[v(0), v(1), v(2)], &[v(1), v(2)], None).unwrap();
    assert_eq!(
        models,
        vec![BTreeMap::from([(v(1), int(2)), (v(2), Rational::new(1, 2))])]
    );
    let mut s = Solver::new([int(-1), int(1)]).unwrap();
    s.assert(c(mono(&[0]), Relation::Eq, konst(1)));
    assert!(s.check_sat(&[v(0)]).is_err());
}

#[test]
fn partition_constraints_fix_the_pattern() {
    let cls = EquivClassSet::from_classes([vec![v(0), v(2)], vec![v(1)]]).unwrap();
    let mut s = Solver::new([int(0), int(1), int(2)]).unwrap();
    s.assert_all(partition_constraints(&cls));
    for m in s.enumerate_models(&[v(0), v(1), v(2)], &[v(0), v(1), v(2)], None).unwrap() {
        assert_eq!(EquivClassSet::from_assignment(&m), cls);
    }
}

#[test]
fn smtlib_dump() {
    let mut s = Solver::new([int(0), Rational::new(-1, 2)]).unwrap();
    s.assert(c(var(0), Relation::Ne, var(1)));
    s.assert_nogood(Nogood(vec![(v(0), int(0))]));
    let text = s.to_smtlib(&[v(0), v(1)], &[(v(0), v(1))]);
    assert!(text.starts_with("(set-logic QF_LRA)\n"), "{text}");
    assert!(text.contains("(declare-const v1 Real)"));
    assert!(text.contains("(assert (or (= v0 (- (/ 1.0 2.0))) (= v0 0.0)))"), "{text}");
    assert!(text.contains("(assert (not (= v0 v1)))"));
    assert!(text.contains("(assert (not (= v0 0.0)))"));
    assert!(text.contains("(assert-soft (= v0 v1))"));
    assert!(text.ends_with("(check-sat)\n(get-model)\n"));
}

fn parity_table() -> (SymbolicTable, Context) {
    let mut ctx = Context::new();
    let mut t = SymbolicTable::new(1, &mut ctx);
    t.repair(&Defect::Closedness(Sequence::from_indices(&[0])), &mut ctx);
    (t, ctx)
}

#[test]
fn cc_prefers_closed_consistent_small_tables() {
    let (t, _) = parity_table();
    let rows = RowStructure::from_table(&t).unwrap();
    assert_eq!(rows.pair_count(), 3);
    let vars = t.vars();
    let mut s = Solver::new([int(0), int(1)]).unwrap();
    s.assert(c(var(0), Relation::Eq, konst(0)));
    let sol = s.solve_cc_ve(&vars, &[], &rows).unwrap().unwrap();
    let score = sol.cc.unwrap();
    // every row equal: closed, consistent, one state
    assert!(score.closed && score.consistent);
    assert_eq!(score.merged, 3);
    assert_eq!(score.value(), 3 + 2 * 4);
}

fn regime_ok(score: CcScore) -> bool {
    let n = score.pairs;
    let v = score.value();
    score.merged <= n
        && match (score.closed, score.consistent) {
            (false, _) => v <= n,
            (true, false) => (n + 1..=2 * n + 1).contains(&v),
            (true, true) => (2 * n + 2..=3 * n + 2).contains(&v),
        }
}

#[test]
fn cc_regimes_match_the_table() {
    // S = {ε, a, b}, E = {ε} over {a, b}: 3 upper and 4 lower rows
    let mut ctx = Context::new();
    let mut t = SymbolicTable::new(2, &mut ctx);
    t.repair(&Defect::Closedness(Sequence::from_indices(&[0])), &mut ctx);
    t.repair(&Defect::Closedness(Sequence::from_indices(&[1])), &mut ctx);
    let rows = RowStructure::from_table(&t).unwrap();
    let vars = t.vars();
    assert_eq!(vars.len(), 7);
    for a in all_assignments(&vars, &[int(0), int(1)]) {
        let score = cc_score(&rows, &a);
        assert!(regime_ok(score), "{score:?}");
        let u = t.unify(&EquivClassSet::from_assignment(&a)).unwrap();
        assert_eq!(score.closed, u.closedness_defect().unwrap().is_none());
        if score.closed {
            assert_eq!(score.consistent, u.consistency_defect().unwrap().is_none());
        }
    }
}

#[derive(Clone, Debug)]
struct Instance {
    nvars: u32,
    domain: Vec<i64>,
    constraints: Vec<(Vec<(u32, i64)>, i64, u8)>,
    unknown: Vec<(u32, u32)>,
    nogoods: Vec<Vec<(u32, usize)>>,
}

fn instance() -> impl Strategy<Value = Instance> {
    (1u32..=8, prop_oneof![Just(vec![0, 2]), Just(vec![-1, 0, 2]), Just(vec![0, 1, 2])]).prop_flat_map(
        |(n, domain)| {
            let d = domain.len();
            let term = (0..n, -2i64..=2);
            let cons = proptest::collection::vec(
                (proptest::collection::vec(term, 1..4), -2i64..=2, 0u8..4),
                0..6,
            );
            let unknown = proptest::collection::vec((0..n, 0..n), 0..10);
            let nogoods =
                proptest::collection::vec(proptest::collection::vec((0..n, 0..d), 1..3), 0..3);
            (Just(n), Just(domain), cons, unknown, nogoods).prop_map(
                |(nvars, domain, constraints, unknown, nogoods)| Instance {
                    nvars,
                    domain,
                    constraints,
                    unknown: unknown.into_iter().filter(|(a, b)| a != b).collect(),
                    nogoods,
                },
            )
        },
    )
}

fn build(inst: &Instance) -> (Solver, Vec<VarId>, Vec<(VarId, VarId)>) {
    let domain: Vec<Rational> = inst.domain.iter().map(|x| int(*x)).collect();
    let mut s = Solver::new(domain.clone()).unwrap();
    for (terms, k, r) in &inst.constraints {
        let mut map = BTreeMap::new();
        for (x, c) in terms {
            let e: &mut Rational = map.entry(v(*x)).or_insert_with(Rational::zero);
            *e = &*e + &int(*c);
        }
        let lhs = ValExpr::Linear {
            terms: map,
            constant: Rational::zero(),
        };
        let rel = [Relation::Lt, Relation::Eq, Relation::Gt, Relation::Ne][*r as usize];
        s.assert(c(lhs, rel, konst(*k)));
    }
    for n in &inst.nogoods {
        s.assert_nogood(Nogood(n.iter().map(|(x, k)| (v(*x), domain[*k].clone())).collect()));
    }
    let vars: Vec<VarId> = (0..inst.nvars).map(v).collect();
    let unknown = inst.unknown.iter().map(|(a, b)| (v(*a), v(*b))).collect();
    (s, vars, unknown)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ve_is_optimal(inst in instance()) {
        let (mut s, vars, unknown) = build(&inst);
        let domain = s.domain().to_vec();
        let best = all_assignments(&vars, &domain)
            .into_iter()
            .filter(|a| feasible(&s, &vars, a))
            .map(|a| ve(&unknown, &a))
            .max();
        let got = s.solve_ve(&vars, &unknown).unwrap();
        prop_assert_eq!(got.as_ref().map(|g| g.ve), best);
        if let Some(g) = got {
            prop_assert!(feasible(&s, &vars, &g.values));
            prop_assert_eq!(ve(&unknown, &g.values), g.ve);
            prop_assert_eq!(EquivClassSet::from_assignment(&g.values), g.classes);
        }
    }

    #[test]
    fn enumeration_matches_exhaustive(inst in instance(), nfree in 1usize..4) {
        let (mut s, vars, _) = build(&inst);
        let free: Vec<VarId> = vars.iter().copied().take(nfree).collect();
        let domain = s.domain().to_vec();
        let mut expected: Vec<BTreeMap<VarId, Rational>> = all_assignments(&vars, &domain)
            .into_iter()
            .filter(|a| feasible(&s, &vars, a))
            .map(|a| free.iter().map(|x| (*x, a[x].clone())).collect())
            .collect();
        expected.sort_by(|a, b| a.values().cmp(b.values()));
        expected.dedup();
        let got = s.enumerate_models(&vars, &free, None).unwrap();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn blocks_exclude_exactly_their_pattern(inst in instance(), pick in 0usize..64) {
        let (mut s, vars, unknown) = build(&inst);
        let domain = s.domain().to_vec();
        let feasible_all: Vec<_> = all_assignments(&vars, &domain)
            .into_iter()
            .filter(|a| feasible(&s, &vars, a))
            .collect();
        prop_assume!(!feasible_all.is_empty());
        let blocked = EquivClassSet::from_assignment(&feasible_all[pick % feasible_all.len()]);
        s.block_conjecture(blocked.clone(), vars.len());
        let best = feasible_all
            .iter()
            .filter(|a| EquivClassSet::from_assignment(a) != blocked)
            .map(|a| ve(&unknown, a))
            .max();
        let got = s.solve_ve(&vars, &unknown).unwrap();
        prop_assert_eq!(got.as_ref().map(|g| g.ve), best);
        if let Some(g) = got {
            prop_assert_ne!(g.classes, blocked);
        }
    }

    #[test]
    fn cc_is_lexicographically_optimal(inst in instance()) {
        // rows over the first variables: upper rows [v0], [v1]; lower rows the rest
        prop_assume!(inst.nvars >= 3);
        let (mut s, vars, unknown) = build(&inst);
        let rows = RowStructure {
            upper: vec![vec![v(0)], vec![v(1)]],
            lower: (2..inst.nvars).map(|i| vec![v(i)]).collect(),
            succ: vec![vec![RowRef::Upper(1)], vec![RowRef::Lower(0)]],
        };
        let domain = s.domain().to_vec();
        let best = all_assignments(&vars, &domain)
            .into_iter()
            .filter(|a| feasible(&s, &vars, a))
            .map(|a| (cc_score(&rows, &a).value(), ve(&unknown, &a)))
            .max();
        let got = s.solve_cc_ve(&vars, &unknown, &rows).unwrap();
        prop_assert_eq!(got.as_ref().map(|g| (g.cc.unwrap().value(), g.ve)), best);
        if let Some(g) = got {
            prop_assert!(regime_ok(g.cc.unwrap()));
        }
    }
}

#[test]
fn products_over_zero_are_rejected() {
    let mut s = Solver::new([int(2), int(0)]).unwrap();
    let mono = ValExpr::Monomial {
        coeff: Rational::one(),
        powers: BTreeMap::from([(v(0), 1)]),
    };
    s.assert(c(mono, Relation::Gt, konst(0)));
    assert!(matches!(s.check_sat(&[v(0)]), Err(Error::Config(_))));
}
