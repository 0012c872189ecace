//! The REMAP baseline for classification targets.
//!
//! Under classification a cell's value is its own label, so a preference
//! answer between two cells is an exact comparison of their variables. REMAP
//! therefore unifies greedily: variables compared equal share a class and
//! no merge is ever guessed, so nothing needs to be undone. Unlike the main
//! learner it keeps `E` free of prefix closure; a consistency repair adds
//! only the distinguishing suffix `σ·e`.

use std::collections::{BTreeMap, BTreeSet};

use super::{FinalResult, FeedbackRecord, Outcome, RunMetrics, SearchStats, Transcript};
use crate::alphabet::{Sequence, Symbol};
use crate::automaton::{minimize, ValuationKind};
use crate::error::{Error, Result};
use crate::inference::{Constraint, Relation, ValExpr};
use crate::rational::Rational;
use crate::solver::Solver;
use crate::table::{Context, EquivClassSet, VarId};
use crate::teacher::{FeedbackMode, FeedbackRelation, PreferenceAnswer, Teacher};

struct Table {
    k: u32,
    s: BTreeSet<Sequence>,
    /// Suffixes in insertion order.
    e: Vec<Sequence>,
}

impl Table {
    fn rows(&self) -> Vec<Sequence> {
        let mut rows: BTreeSet<Sequence> = self.s.clone();
        for s in &self.s {
            for a in 0..self.k {
                rows.insert(s.push(Symbol(a)));
            }
        }
        rows.into_iter().collect()
    }

    fn lower(&self) -> Vec<Sequence> {
        self.rows().into_iter().filter(|r| !self.s.contains(r)).collect()
    }

    fn cells(&self) -> BTreeSet<Sequence> {
        self.rows()
            .iter()
            .flat_map(|r| self.e.iter().map(move |e| r.concat(e)))
            .collect()
    }
}

struct Unified<'a> {
    table: &'a Table,
    classes: EquivClassSet,
    gamma: BTreeMap<Sequence, VarId>,
}

impl Unified<'_> {
    fn cell(&self, s: &Sequence, e: &Sequence) -> VarId {
        let v = self.gamma[&s.concat(e)];
        self.classes.rep(v).unwrap_or(v)
    }

    fn row(&self, s: &Sequence) -> Vec<VarId> {
        self.table.e.iter().map(|e| self.cell(s, e)).collect()
    }

    fn unclosed(&self) -> Option<Sequence> {
        let upper: BTreeSet<Vec<VarId>> = self.table.s.iter().map(|s| self.row(s)).collect();
        self.table.lower().into_iter().find(|l| !upper.contains(&self.row(l)))
    }

    /// A suffix `σ·e` telling apart two upper rows that look equal.
    fn inconsistent(&self) -> Option<Sequence> {
        let s: Vec<&Sequence> = self.table.s.iter().collect();
        for (i, s1) in s.iter().enumerate() {
            for s2 in &s[i + 1..] {
                if self.row(s1) != self.row(s2) {
                    continue;
                }
                for a in 0..self.table.k {
                    let (t1, t2) = (s1.push(Symbol(a)), s2.push(Symbol(a)));
                    for e in &self.table.e {
                        if self.cell(&t1, e) != self.cell(&t2, e) {
                            return Some(Sequence::from_symbols([Symbol(a)]).concat(e));
                        }
                    }
                }
            }
        }
        None
    }
}

/// Learns a classification target with strong feedback and no backtracking.
pub fn run_remap<T: Teacher + ?Sized>(teacher: &mut T) -> Result<FinalResult> {
    if !matches!(teacher.valuation(), ValuationKind::Classification) {
        return Err(Error::Config(format!(
            "REMAP handles classification targets only, not {}",
            teacher.valuation().name()
        )));
    }
    let input = teacher.input().clone();
    let output = teacher.output().clone();
    let valuation = teacher.valuation().clone();
    let mut solver = Solver::new(output.sorted_values())?;
    let mut ctx = Context::new();
    let mut table = Table {
        k: input.len() as u32,
        s: BTreeSet::from([Sequence::empty()]),
        e: vec![Sequence::empty()],
    };
    let mut records: Vec<FeedbackRecord> = Vec::new();
    let mut metrics = RunMetrics::default();
    let mut stats = SearchStats::default();
    let mut transcript = Transcript::new();
    loop {
        stats.steps += 1;
        let cells: Vec<Sequence> = table.cells().into_iter().collect();
        let gamma: BTreeMap<Sequence, VarId> = cells.iter().map(|c| (c.clone(), ctx.var(c))).collect();
        // greedy unification from the equalities among the answers
        let mut order: BTreeMap<VarId, BTreeMap<VarId, PreferenceAnswer>> = BTreeMap::new();
        let mut comparisons = 0u64;
        for (i, a) in cells.iter().enumerate() {
            for b in &cells[i + 1..] {
                let fresh = teacher.log().cached(a, b).is_none();
                let ans = teacher.pref_query(a, b)?;
                if fresh {
                    transcript.record(
                        "pref",
                        &[("s1", input.format(a)), ("s2", input.format(b)), ("answer", ans.to_string())],
                    );
                }
                comparisons += 1;
                order.entry(gamma[a]).or_default().insert(gamma[b], ans);
            }
        }
        metrics.inequality_count = metrics.inequality_count.max(comparisons);
        metrics.variable_count = metrics.variable_count.max(gamma.len() as u64);
        let mut buckets: Vec<Vec<VarId>> = Vec::new();
        for v in gamma.values() {
            let home = buckets.iter_mut().find(|b| {
                let r = b[0];
                let (lo, hi) = if r < *v { (r, *v) } else { (*v, r) };
                order[&lo][&hi] == PreferenceAnswer::Equal
            });
            match home {
                Some(b) => b.push(*v),
                None => buckets.push(vec![*v]),
            }
        }
        let classes = EquivClassSet::from_classes(buckets)?;
        let unified = Unified {
            table: &table,
            classes,
            gamma: gamma.clone(),
        };
        if let Some(l) = unified.unclosed() {
            transcript.record("repair", &[("kind", "closedness".into()), ("row", input.format(&l))]);
            table.s.insert(l);
            continue;
        }
        if let Some(e) = unified.inconsistent() {
            transcript.record("repair", &[("kind", "consistency".into()), ("suffix", input.format(&e))]);
            table.e.push(e);
            continue;
        }

        // hypothesis: one state per distinct upper row
        let mut index: BTreeMap<Vec<VarId>, usize> = BTreeMap::new();
        let mut access: Vec<Sequence> = Vec::new();
        for s in &table.s {
            let r = unified.row(s);
            if !index.contains_key(&r) {
                index.insert(r, access.len());
                access.push(s.clone());
            }
        }
        let delta: Vec<Vec<usize>> = access
            .iter()
            .map(|s| (0..table.k).map(|a| index[&unified.row(&s.push(Symbol(a)))]).collect())
            .collect();
        let labels: Vec<VarId> = access.iter().map(|s| unified.cell(s, &Sequence::empty())).collect();
        stats.hypotheses += 1;
        transcript.record("hypothesis", &[("states", access.len().to_string())]);

        // labels: the least assignment respecting the order and the feedback
        let reps: Vec<VarId> = unified.classes.representatives().into_iter().collect();
        solver.push();
        for (i, a) in reps.iter().enumerate() {
            for b in &reps[i + 1..] {
                let (lo, hi) = if a < b { (*a, *b) } else { (*b, *a) };
                solver.assert(Constraint::new(
                    ValExpr::var(lo),
                    Relation::from_answer(order[&lo][&hi]),
                    ValExpr::var(hi),
                ));
            }
        }
        for r in &records {
            let v = unified.cell(&r.sequence, &Sequence::empty());
            solver.assert(Constraint::new(ValExpr::var(v), Relation::Eq, ValExpr::constant(r.value.clone())));
        }
        let model = solver.next_model(&reps, &labels);
        solver.pop()?;
        let Some(model) = model? else {
            return Err(Error::Teacher("no labeling satisfies the preference answers".into()));
        };
        let values: Vec<Rational> = labels.iter().map(|v| model.values[v].clone()).collect();
        let hyp = crate::automaton::QuantitativeAutomaton::from_values(
            input.clone(),
            output.clone(),
            delta,
            &values,
            valuation.clone(),
        )?;
        let ans = teacher.equiv_query(&hyp, FeedbackMode::Strong)?;
        metrics.equiv_queries += 1;
        if ans.correct {
            transcript.record("equiv", &[("states", access.len().to_string()), ("result", "accepted".into())]);
            let sm = solver.metrics();
            metrics.pref_queries = teacher.log().pref_count as u64;
            metrics.maxsmt_solves = sm.solves;
            metrics.solver_time_ms = sm.time.as_secs_f64() * 1000.0;
            stats.conjectures = stats.hypotheses;
            return Ok(FinalResult {
                outcome: Outcome::Learned(minimize(&hyp)),
                metrics,
                stats,
                transcript,
                violations: Vec::new(),
            });
        }
        let record = FeedbackRecord::from_answer(&ans)?;
        if record.relation != FeedbackRelation::Eq {
            return Err(Error::Teacher("REMAP needs strong feedback".into()));
        }
        transcript.record(
            "equiv",
            &[
                ("states", access.len().to_string()),
                ("result", "refuted".into()),
                ("cex", input.format(&record.sequence)),
                ("feedback", format!("{}{}", record.relation, record.value)),
            ],
        );
        table.s.extend(record.sequence.prefixes());
        records.push(record);
    }
}
