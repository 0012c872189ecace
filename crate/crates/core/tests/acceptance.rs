//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.
//!
//! Every learner run here is oracle-instrumented, so the learner also
//! records any step at which the target's true labels violate a constraint.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use quintic::automaton::{check_label_equivalence, is_isomorphic, minimize};
use quintic::bench::load_corpus;
use quintic::inference::{
    gather_constraints, infer_relation, partition_pairs, Constraint, Relation, ValExpr,
};
use quintic::learner::RunLimits;
use quintic::solver::{cc_score, RowRef, RowStructure, Solver};
use quintic::table::{Context, SymbolicTable, VarId};
use quintic::teacher::{PreferenceAnswer, SimulatedTeacher};
use quintic::{
    run_quintic, run_remap, FinalResult, LearnerConfig, Outcome, QuantitativeAutomaton, Rational,
    Sequence, ValuationKind, Variant,
};

/// Per-run wall-clock cap.
const RUN_LIMIT: Duration = Duration::from_secs(120);
const INFERENCE_LIMIT: Duration = Duration::from_secs(10);
const SOLVER_LIMIT: Duration = Duration::from_secs(60);
const SOLVER_INSTANCES: usize = 200;
/// Step limit for the ablation run with iterative deepening off.
const STRESS_STEPS: u64 = 100;
const STRESS_TARGET: &str = "product_stress";

type Verdict = Result<String, String>;

struct Run {
    target: String,
    variant: Variant,
    elapsed: Duration,
    /// `Err` holds a panic message or a learner error.
    result: Result<FinalResult, String>,
}

fn corpus() -> Vec<(String, QuantitativeAutomaton)> {
    load_corpus(&Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")).expect("corpus loads")
}

fn guarded<F: FnOnce() -> quintic::Result<FinalResult>>(f: F) -> Result<FinalResult, String> {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(r)) => Ok(r),
        Ok(Err(e)) => Err(e.to_string()),
        Err(p) => Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into())),
    }
}

fn learn(target: &QuantitativeAutomaton, cfg: &LearnerConfig) -> (Duration, Result<FinalResult, String>) {
    let start = Instant::now();
    let mut teacher = SimulatedTeacher::new(target.clone());
    let result = guarded(|| run_quintic(&mut teacher, cfg));
    (start.elapsed(), result)
}

fn instrumented(target: &QuantitativeAutomaton, variant: Variant) -> LearnerConfig {
    LearnerConfig {
        oracle: Some(target.clone()),
        limits: RunLimits {
            time_limit_ms: Some(RUN_LIMIT.as_millis() as u64),
            ..RunLimits::default()
        },
        ..variant.config().expect("learner variant")
    }
}

fn main_runs(corpus: &[(String, QuantitativeAutomaton)]) -> Vec<Run> {
    let mut runs = Vec::new();
    for (name, target) in corpus {
        for variant in Variant::QUINTIC {
            let (elapsed, result) = learn(target, &instrumented(target, variant));
            runs.push(Run {
                target: name.clone(),
                variant,
                elapsed,
                result,
            });
        }
    }
    runs
}

fn check_all(failures: Vec<String>, ok: String) -> Verdict {
    if failures.is_empty() {
        Ok(ok)
    } else {
        Err(failures.join("; "))
    }
}

fn learned(run: &Run) -> Result<&QuantitativeAutomaton, String> {
    match &run.result {
        Ok(r) => match &r.outcome {
            Outcome::Learned(a) => Ok(a),
            Outcome::BudgetExceeded(why) => Err(format!("budget exceeded: {why}")),
        },
        Err(e) => Err(e.clone()),
    }
}

fn end_to_end(runs: &[Run], corpus: &[(String, QuantitativeAutomaton)]) -> Verdict {
    let valuations: BTreeSet<&str> = corpus.iter().map(|(_, t)| t.valuation().name()).collect();
    let mut failures = Vec::new();
    if corpus.len() < 8 || valuations.len() < 4 {
        failures.push(format!("corpus has {} targets over {} valuations", corpus.len(), valuations.len()));
    }
    for (name, t) in corpus {
        if !(1..=5).contains(&t.num_states()) {
            failures.push(format!("{name} has {} states", t.num_states()));
        }
    }
    let targets: BTreeMap<&str, &QuantitativeAutomaton> = corpus.iter().map(|(n, t)| (n.as_str(), t)).collect();
    let mut slowest = Duration::ZERO;
    for run in runs {
        slowest = slowest.max(run.elapsed);
        if run.elapsed > RUN_LIMIT {
            failures.push(format!("{} {} took {:?}", run.target, run.variant, run.elapsed));
        }
        match learned(run) {
            Ok(a) => match check_label_equivalence(a, targets[run.target.as_str()]) {
                Ok(None) => {}
                Ok(Some(c)) => failures.push(format!("{} {}: differs on {:?}", run.target, run.variant, c.sequence)),
                Err(e) => failures.push(format!("{} {}: {e}", run.target, run.variant)),
            },
            Err(e) => failures.push(format!("{} {}: {e}", run.target, run.variant)),
        }
    }
    check_all(
        failures,
        format!("{} runs equivalent to their targets, slowest {:.2?}", runs.len(), slowest),
    )
}

fn minimality(runs: &[Run], corpus: &[(String, QuantitativeAutomaton)]) -> Verdict {
    let targets: BTreeMap<&str, &QuantitativeAutomaton> = corpus.iter().map(|(n, t)| (n.as_str(), t)).collect();
    let mut failures = Vec::new();
    for run in runs {
        let Ok(a) = learned(run) else { continue };
        let want = minimize(targets[run.target.as_str()]).num_states();
        if a.num_states() != want {
            failures.push(format!("{} {}: {} states, minimal {want}", run.target, run.variant, a.num_states()));
        }
    }
    check_all(failures, "every learned machine has the minimal state count".into())
}

// Inference rules against a brute-force grid. The grid values are the
// parent values V(s), V(s') and the cell labels T(t), T(t'); each point
// yields the answer signs (X, Y, X', Y') and the true relation of the labels.

fn sgn(r: &Rational) -> i8 {
    r.signum()
}

/// Sign tuples realized on the grid, each with the label relations seen.
fn realize(
    grid: &[Rational],
    tuple: impl Fn(&Rational, &Rational, &Rational, &Rational) -> [i8; 4],
) -> BTreeMap<[i8; 4], BTreeSet<i8>> {
    let mut out: BTreeMap<[i8; 4], BTreeSet<i8>> = BTreeMap::new();
    for p in grid {
        for pp in grid {
            for t in grid {
                for tp in grid {
                    out.entry(tuple(p, pp, t, tp)).or_default().insert(sgn(&(t - tp)));
                }
            }
        }
    }
    out
}

fn seq(s: &str) -> Sequence {
    Sequence::from_indices(&s.bytes().map(|b| (b - b'a') as u32).collect::<Vec<_>>())
}

/// Checks every realized tuple; returns (decided, open) counts.
fn grid_verdicts(
    realized: &BTreeMap<[i8; 4], BTreeSet<i8>>,
    t: &Sequence,
    tp: &Sequence,
    valuation: &ValuationKind,
    tight: bool,
    failures: &mut Vec<String>,
) -> (usize, usize) {
    let (s, sp) = (t.parent().unwrap(), tp.parent().unwrap());
    let (mut decided, mut open) = (0, 0);
    for (k, rels) in realized {
        let mut answers: HashMap<(Sequence, Sequence), PreferenceAnswer> = HashMap::new();
        for ((a, b), x) in [((t, tp), k[0]), ((&s, &sp), k[1]), ((t, &s), k[2]), ((tp, &sp), k[3])] {
            answers.insert((a.clone(), b.clone()), PreferenceAnswer::from_sign(x));
            answers.insert((b.clone(), a.clone()), PreferenceAnswer::from_sign(-x));
        }
        let verdict = infer_relation(t, tp, |a, b| answers.get(&(a.clone(), b.clone())).copied(), valuation);
        match verdict.relation() {
            Some(r) => {
                decided += 1;
                if let Some(bad) = rels.iter().find(|x| !r.holds((**x).cmp(&0))) {
                    failures.push(format!("{} {k:?}: said {r} but sign {bad} occurs", valuation.name()));
                }
            }
            None => {
                open += 1;
                if tight && rels.len() < 2 {
                    failures.push(format!("{} {k:?}: unknown but only {rels:?} occurs", valuation.name()));
                }
            }
        }
    }
    (decided, open)
}

fn inference_rules() -> Verdict {
    let start = Instant::now();
    let mut failures = Vec::new();
    let ints: Vec<Rational> = (-2..=2).map(Rational::from_integer).collect();
    let positives: Vec<Rational> = [(1, 4), (1, 2), (1, 1), (2, 1), (4, 1)]
        .iter()
        .map(|(n, d)| Rational::new(*n, *d))
        .collect();
    let one = Rational::one();
    let (t, tp) = (seq("ab"), seq("ba"));
    let mut tuples = 0;
    let mut tally = |r: &BTreeMap<[i8; 4], BTreeSet<i8>>, t: &Sequence, tp: &Sequence, v: &ValuationKind, tight, f: &mut Vec<String>| {
        tuples += r.len();
        grid_verdicts(r, t, tp, v, tight, f)
    };

    let cls = realize(&ints, |p, pp, t, tp| [sgn(&(t - tp)), sgn(&(p - pp)), sgn(&(t - p)), sgn(&(tp - pp))]);
    let (d, o) = tally(&cls, &t, &tp, &ValuationKind::Classification, true, &mut failures);
    if o != 0 {
        failures.push(format!("classification left {o} of {} tuples open", d + o));
    }
    let sum = realize(&ints, |p, pp, t, tp| [sgn(&(&(p + t) - &(pp + tp))), sgn(&(p - pp)), sgn(t), sgn(tp)]);
    tally(&sum, &t, &tp, &ValuationKind::Sum, true, &mut failures);
    let product = realize(&positives, |p, pp, t, tp| {
        [sgn(&(&(p * t) - &(pp * tp))), sgn(&(p - pp)), sgn(&(t - &one)), sgn(&(tp - &one))]
    });
    tally(&product, &t, &tp, &ValuationKind::Product, true, &mut failures);

    // discounted: parents over disjoint letters so the four pairs never coincide
    for gamma in [Rational::new(1, 2), Rational::new(1, 3), Rational::new(2, 3)] {
        let val = ValuationKind::discounted(gamma.clone()).unwrap();
        for (l, lp) in [(1, 1), (2, 2), (0, 1), (1, 0), (0, 2), (2, 1), (1, 3)] {
            let w = gamma.pow(l as i32 + 1);
            let wp = gamma.pow(lp as i32 + 1);
            let r = realize(&ints, |p, pp, t, tp| {
                [sgn(&(&(p + &(&w * t)) - &(pp + &(&wp * tp)))), sgn(&(p - pp)), sgn(t), sgn(tp)]
            });
            let t = seq(&"a".repeat(l)).push(quintic::Symbol(1));
            let tp = seq(&"c".repeat(lp)).push(quintic::Symbol(1));
            tally(&r, &t, &tp, &val, gamma == Rational::new(1, 2), &mut failures);
        }
    }
    let elapsed = start.elapsed();
    if elapsed > INFERENCE_LIMIT {
        failures.push(format!("took {elapsed:?}"));
    }
    check_all(
        failures,
        format!("{tuples} realized tuples checked in {elapsed:.2?}; unknowns tight except discounted γ ≠ 1/2 (soundness only)"),
    )
}

fn all_sequences(k: u32, max_len: usize) -> Vec<Sequence> {
    let mut out = vec![Sequence::empty()];
    let mut frontier = out.clone();
    for _ in 0..max_len {
        frontier = frontier
            .iter()
            .flat_map(|s| (0..k).map(move |a| s.push(quintic::Symbol(a))))
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

/// Tables grown by counterexample expansion with every sequence up to
/// length 2, one pair partition per table.
fn pair_ledgers(target: &QuantitativeAutomaton) -> quintic::Result<Vec<(usize, usize, usize)>> {
    let mut ctx = Context::new();
    let mut table = SymbolicTable::new(target.input().len(), &mut ctx);
    let mut teacher = SimulatedTeacher::new(target.clone());
    let mut out = Vec::new();
    for c in all_sequences(target.input().len() as u32, 2) {
        table.expand_with_counterexample(&c, &mut ctx);
        let cs = gather_constraints(&table, &mut teacher)?;
        let part = partition_pairs(&table, &cs, target.valuation());
        out.push((table.var_count(), part.known.len(), part.unknown.len()));
    }
    Ok(out)
}

fn pair_ledger(runs: &[Run], corpus: &[(String, QuantitativeAutomaton)]) -> Verdict {
    let mut failures = Vec::new();
    let mut tables = 0;
    for (name, target) in corpus {
        match pair_ledgers(target) {
            Ok(ledgers) => {
                for (m, k, u) in ledgers {
                    tables += 1;
                    if k + u != m * (m - 1) {
                        failures.push(format!("{name}: |K| + |U| = {k} + {u} with m = {m}"));
                    }
                }
            }
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    // the learner asserts the same identity at every position it enters
    for run in runs {
        if let Err(e) = &run.result {
            if e.contains("assertion") {
                failures.push(format!("{} {}: {e}", run.target, run.variant));
            }
        }
    }
    check_all(
        failures,
        format!("{tables} grown tables plus every position of {} learner runs", runs.len()),
    )
}

// Random solver instances against exhaustive enumeration.

struct Instance {
    vars: Vec<VarId>,
    domain: Vec<Rational>,
    constraints: Vec<Constraint>,
    unknown: Vec<(VarId, VarId)>,
}

fn random_instance(rng: &mut StdRng) -> Instance {
    let n = rng.gen_range(1..=8u32);
    let vars: Vec<VarId> = (0..n).map(VarId).collect();
    let pool = [-1i64, 0, 1, 2, 3];
    let size = rng.gen_range(1..=3);
    let mut domain: Vec<Rational> = Vec::new();
    while domain.len() < size {
        let v = Rational::from_integer(pool[rng.gen_range(0..pool.len())]);
        if !domain.contains(&v) {
            domain.push(v);
        }
    }
    let relations = [Relation::Lt, Relation::Eq, Relation::Gt, Relation::Ne];
    let mut constraints = Vec::new();
    for _ in 0..rng.gen_range(0..6) {
        let rel = relations[rng.gen_range(0..4)];
        let positive = domain.iter().all(|d| d.is_positive());
        let lhs = if positive && rng.gen_bool(0.5) {
            let mut powers = BTreeMap::new();
            for _ in 0..rng.gen_range(1..3) {
                *powers.entry(vars[rng.gen_range(0..vars.len())]).or_insert(0) += 1;
            }
            ValExpr::Monomial {
                coeff: Rational::one(),
                powers,
            }
        } else {
            let mut terms = BTreeMap::new();
            for _ in 0..rng.gen_range(1..4) {
                let c = Rational::from_integer(rng.gen_range(-2..=2));
                let e = terms.entry(vars[rng.gen_range(0..vars.len())]).or_insert_with(Rational::zero);
                *e = &*e + &c;
            }
            ValExpr::Linear {
                terms,
                constant: Rational::zero(),
            }
        };
        constraints.push(Constraint::new(lhs, rel, ValExpr::constant(Rational::from_integer(rng.gen_range(-2..=2)))));
    }
    let mut unknown = Vec::new();
    for _ in 0..rng.gen_range(0..10) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            unknown.push((VarId(a), VarId(b)));
        }
    }
    Instance {
        vars,
        domain,
        constraints,
        unknown,
    }
}

fn assignments(vars: &[VarId], domain: &[Rational]) -> Vec<BTreeMap<VarId, Rational>> {
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

/// Closedness and consistency computed straight from row values.
fn regime(rows: &RowStructure, a: &BTreeMap<VarId, Rational>) -> (u64, bool, bool) {
    let vals = |r: RowRef| -> Vec<&Rational> { rows.row(r).iter().map(|v| &a[v]).collect() };
    let all: Vec<RowRef> = (0..rows.upper.len())
        .map(RowRef::Upper)
        .chain((0..rows.lower.len()).map(RowRef::Lower))
        .collect();
    let mut merged = 0;
    for (i, x) in all.iter().enumerate() {
        for y in &all[i + 1..] {
            merged += u64::from(vals(*x) == vals(*y));
        }
    }
    let closed = (0..rows.lower.len())
        .all(|l| (0..rows.upper.len()).any(|u| vals(RowRef::Lower(l)) == vals(RowRef::Upper(u))));
    let consistent = (0..rows.upper.len()).all(|i| {
        (0..rows.upper.len()).all(|j| {
            vals(RowRef::Upper(i)) != vals(RowRef::Upper(j))
                || rows.succ[i].iter().zip(&rows.succ[j]).all(|(x, y)| vals(*x) == vals(*y))
        })
    });
    (merged, closed, consistent)
}

fn solver_optimality() -> Verdict {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut failures = Vec::new();
    let (mut sat, mut scored) = (0, 0);
    for i in 0..SOLVER_INSTANCES {
        let inst = random_instance(&mut rng);
        let mut solver = Solver::new(inst.domain.clone()).unwrap();
        solver.assert_all(inst.constraints.iter().cloned());
        let feasible: Vec<_> = assignments(&inst.vars, &inst.domain)
            .into_iter()
            .filter(|a| inst.constraints.iter().all(|c| c.holds(a) == Some(true)))
            .collect();
        let ve = |a: &BTreeMap<VarId, Rational>| inst.unknown.iter().filter(|(x, y)| a[x] == a[y]).count() as u64;
        let best = feasible.iter().map(ve).max();
        sat += usize::from(best.is_some());
        match solver.solve_ve(&inst.vars, &inst.unknown) {
            Ok(got) => {
                if got.as_ref().map(|g| g.ve) != best {
                    failures.push(format!(
                        "instance {i}: VE {:?}, exhaustive {best:?}; domain {:?} constraints [{}]",
                        got.map(|g| (g.ve, g.values)),
                        inst.domain,
                        inst.constraints.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
                    ));
                } else if let Some(g) = got {
                    if !inst.constraints.iter().all(|c| c.holds(&g.values) == Some(true)) || ve(&g.values) != g.ve {
                        failures.push(format!("instance {i}: returned model is wrong"));
                    }
                }
            }
            Err(e) => failures.push(format!("instance {i}: {e}")),
        }

        // rows [v0], [v1] upper with successors v1 and v2; the rest lower
        if inst.vars.len() < 3 {
            continue;
        }
        scored += 1;
        let rows = RowStructure {
            upper: vec![vec![inst.vars[0]], vec![inst.vars[1]]],
            lower: inst.vars[2..].iter().map(|v| vec![*v]).collect(),
            succ: vec![vec![RowRef::Upper(1)], vec![RowRef::Lower(0)]],
        };
        let (u, l) = (rows.upper.len() as u64, rows.lower.len() as u64);
        let n = (u * (u - 1) + l * l.saturating_sub(1)) / 2 + u * l;
        for a in &feasible {
            let score = cc_score(&rows, a);
            let (merged, closed, consistent) = regime(&rows, a);
            let v = score.value();
            let in_regime = match (closed, consistent) {
                (false, _) => v <= n,
                (true, false) => (n + 1..=2 * n + 1).contains(&v),
                (true, true) => (2 * n + 2..=3 * n + 2).contains(&v),
            };
            if score.pairs != n || score.merged != merged || merged > n || !in_regime {
                failures.push(format!("instance {i}: score {score:?} vs M={merged} closed={closed} consistent={consistent} N={n}"));
                break;
            }
        }
        let best_cc = feasible.iter().map(|a| (cc_score(&rows, a).value(), ve(a))).max();
        match solver.solve_cc_ve(&inst.vars, &inst.unknown, &rows) {
            Ok(got) => {
                let got = got.map(|g| (g.cc.map_or(0, |c| c.value()), g.ve));
                if got != best_cc {
                    failures.push(format!("instance {i}: CC-VE {got:?}, exhaustive {best_cc:?}"));
                }
            }
            Err(e) => failures.push(format!("instance {i}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    if elapsed > SOLVER_LIMIT {
        failures.push(format!("took {elapsed:?}"));
    }
    check_all(
        failures,
        format!("{SOLVER_INSTANCES} instances ({sat} satisfiable, {scored} with CC rows) in {elapsed:.2?}"),
    )
}

fn classification_has_no_unknowns(runs: &[Run], corpus: &[(String, QuantitativeAutomaton)]) -> Verdict {
    let mut failures = Vec::new();
    let mut checked = 0;
    for (name, target) in corpus.iter().filter(|(_, t)| matches!(t.valuation(), ValuationKind::Classification)) {
        match pair_ledgers(target) {
            Ok(ls) => {
                for (_, _, u) in ls {
                    if u != 0 {
                        failures.push(format!("{name}: {u} unknown pairs in a grown table"));
                    }
                }
            }
            Err(e) => failures.push(format!("{name}: {e}")),
        }
        for run in runs.iter().filter(|r| &r.target == name) {
            if let Ok(r) = &run.result {
                checked += 1;
                if r.metrics.unknown_pair_count != 0 {
                    failures.push(format!("{name} {}: unknown_pair_count {}", run.variant, r.metrics.unknown_pair_count));
                }
            }
        }
    }
    check_all(failures, format!("{checked} classification runs with unknown_pair_count = 0"))
}

fn baseline_parity(runs: &[Run], corpus: &[(String, QuantitativeAutomaton)]) -> Verdict {
    let mut failures = Vec::new();
    let mut lines = Vec::new();
    for (name, target) in corpus.iter().filter(|(_, t)| matches!(t.valuation(), ValuationKind::Classification)) {
        let mut teacher = SimulatedTeacher::new(target.clone());
        let remap = match guarded(|| run_remap(&mut teacher)) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("{name}: REMAP {e}"));
                continue;
            }
        };
        let Some(q) = runs.iter().find(|r| &r.target == name && r.variant == Variant::SVe) else {
            continue;
        };
        let (Some(ra), Ok(qa)) = (remap.learned(), learned(q)) else {
            failures.push(format!("{name}: a learner failed"));
            continue;
        };
        let q = q.result.as_ref().unwrap();
        if !is_isomorphic(ra, qa) {
            failures.push(format!("{name}: machines differ"));
        }
        if remap.metrics.backtracks != 0 {
            failures.push(format!("{name}: REMAP backtracked {} times", remap.metrics.backtracks));
        }
        if q.metrics.pref_queries < remap.metrics.pref_queries {
            failures.push(format!(
                "{name}: QUINTIC asked {} preferences, REMAP {}",
                q.metrics.pref_queries, remap.metrics.pref_queries
            ));
        }
        lines.push(format!("{name} {}≥{}", q.metrics.pref_queries, remap.metrics.pref_queries));
    }
    check_all(failures, format!("prefs QUINTIC≥REMAP: {}", lines.join(", ")))
}

fn feedback_strength(runs: &[Run]) -> Verdict {
    let mut failures = Vec::new();
    let mut pairs = 0;
    for (strong, weak) in [(Variant::SVe, Variant::WVe), (Variant::SCcVe, Variant::WCcVe)] {
        for s in runs.iter().filter(|r| r.variant == strong) {
            let Some(w) = runs.iter().find(|r| r.variant == weak && r.target == s.target) else { continue };
            pairs += 1;
            match (learned(s), learned(w)) {
                (Ok(a), Ok(b)) if is_isomorphic(a, b) => {}
                (Ok(_), Ok(_)) => failures.push(format!("{} {strong}/{weak}: not isomorphic", s.target)),
                _ => failures.push(format!("{} {strong}/{weak}: a run failed", s.target)),
            }
        }
    }
    check_all(failures, format!("{pairs} strong/weak pairs isomorphic"))
}

fn soundness(runs: &[Run]) -> Verdict {
    let mut failures = Vec::new();
    for run in runs {
        if let Ok(r) = &run.result {
            if let Some(v) = r.violations.first() {
                failures.push(format!("{} {}: {v} ({} total)", run.target, run.variant, r.violations.len()));
            }
        }
    }
    check_all(failures, format!("true labels satisfied every checked constraint in {} runs", runs.len()))
}

fn ablations(runs: &[Run], corpus: &[(String, QuantitativeAutomaton)]) -> Verdict {
    let mut failures = Vec::new();
    let mut more_solves = Vec::new();
    for (name, target) in corpus {
        let cfg = LearnerConfig {
            cex_expansion_enabled: false,
            ..instrumented(target, Variant::SVe)
        };
        let (elapsed, result) = learn(target, &cfg);
        let run = Run {
            target: name.clone(),
            variant: Variant::SVe,
            elapsed,
            result,
        };
        match learned(&run) {
            Ok(a) if check_label_equivalence(a, target).ok().flatten().is_none() => {}
            Ok(_) => failures.push(format!("{name}: wrong machine without expansion")),
            Err(e) => failures.push(format!("{name}: without expansion {e}")),
        }
        if elapsed > RUN_LIMIT {
            failures.push(format!("{name}: without expansion took {elapsed:?}"));
        }
        let base = runs.iter().find(|r| &r.target == name && r.variant == Variant::SVe);
        if let (Ok(off), Some(Ok(on))) = (&run.result, base.map(|b| &b.result)) {
            if off.metrics.maxsmt_solves >= on.metrics.maxsmt_solves {
                more_solves.push(format!("{name} {}≥{}", off.metrics.maxsmt_solves, on.metrics.maxsmt_solves));
            }
        }
    }
    if more_solves.is_empty() {
        failures.push("no target needed at least as many solves without expansion".into());
    }

    let stress = corpus.iter().find(|(n, _)| n == STRESS_TARGET);
    let stress_note = match stress {
        None => {
            failures.push(format!("{STRESS_TARGET} missing from the corpus"));
            String::new()
        }
        Some((_, target)) => {
            if !matches!(target.valuation(), ValuationKind::Product) {
                failures.push(format!("{STRESS_TARGET} is not a product target"));
            }
            let cfg = LearnerConfig {
                ids_enabled: false,
                limits: RunLimits {
                    max_steps: Some(STRESS_STEPS),
                    ..RunLimits::default()
                },
                ..LearnerConfig::default()
            };
            match learn(target, &cfg).1 {
                Ok(FinalResult {
                    outcome: Outcome::BudgetExceeded(why),
                    ..
                }) => why,
                Ok(_) => {
                    failures.push(format!("{STRESS_TARGET} learned without deepening"));
                    String::new()
                }
                Err(e) => {
                    failures.push(format!("{STRESS_TARGET}: {e}"));
                    String::new()
                }
            }
        }
    };
    check_all(
        failures,
        format!(
            "all targets learned without expansion; solves ≥ default on {}; {STRESS_TARGET} without deepening: {stress_note}",
            more_solves.join(", ")
        ),
    )
}

fn main() {
    let corpus = corpus();
    let runs = main_runs(&corpus);
    let criteria: Vec<(&str, Verdict)> = vec![
        ("1 end-to-end learning", end_to_end(&runs, &corpus)),
        ("2 minimality", minimality(&runs, &corpus)),
        ("3 inference-rule soundness", inference_rules()),
        ("4 pair ledger |K|+|U| = m(m-1)", pair_ledger(&runs, &corpus)),
        ("5 solver optimality and CC regimes", solver_optimality()),
        ("6 classification has no unknown pairs", classification_has_no_unknowns(&runs, &corpus)),
        ("7 REMAP parity", baseline_parity(&runs, &corpus)),
        ("8 strong and weak feedback agree", feedback_strength(&runs)),
        ("9 soundness under the true labels", soundness(&runs)),
        ("10 ablations", ablations(&runs, &corpus)),
    ];
    let mut failed = 0;
    for (name, verdict) in &criteria {
        match verdict {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
