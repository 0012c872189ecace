//! The learning loop and the REMAP baseline.
//!
//! [`run_quintic`] keeps a stack of conjectures. Each frame fixes a merge
//! pattern 𝓔 over the variables of one table; deeper frames come from
//! repairing or expanding that table and must keep the pattern of the frame
//! below on the old variables. A refuted frame is blocked and replaced by
//! the next best pattern at the same table. When a table has no pattern left
//! the table is grown and the search resumes at the larger size.
//!
//! Every frame and every forced expansion costs one unit of a budget `M`.
//! When all chains within the budget are exhausted the stack is cleared and
//! the search restarts from the root table with `M + 1` (iterative
//! deepening). Preference answers and feedback records survive restarts;
//! blocks do not, since a pattern refuted for lack of budget may be the one
//! a deeper search needs.

mod remap;
mod transcript;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use remap::run_remap;
pub use transcript::Transcript;

use crate::alphabet::{InputAlphabet, OutputAlphabet, Sequence};
use crate::automaton::{
    check_label_equivalence, minimize, QuantitativeAutomaton, ValuationKind,
};
use crate::error::{Error, Result};
use crate::inference::{
    fold_expression, gather_constraints, ground_truth, partition_pairs, val_expression, Constraint,
    ConstraintSet, PairPartition, Relation, ValExpr,
};
use crate::rational::Rational;
use crate::solver::{
    known_constraints, partition_constraints, BlockId, Nogood, RowStructure, Solution, Solver,
};
use crate::table::{Context, EquivClassSet, SymbolicHypothesis, SymbolicTable, VarId};
use crate::teacher::{
    EquivalenceAnswer, FeedbackMode, FeedbackRelation, PreferenceAnswer, QueryLog, Teacher,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Objective {
    /// Maximize equal unknown pairs.
    Ve,
    /// Maximize the closedness/consistency score, then VE.
    CcVe,
}

/// The four learner configurations compared in the benchmarks, plus the
/// baseline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "S-VE")]
    SVe,
    #[serde(rename = "W-VE")]
    WVe,
    #[serde(rename = "S-CC-VE")]
    SCcVe,
    #[serde(rename = "W-CC-VE")]
    WCcVe,
    #[serde(rename = "REMAP")]
    Remap,
}

impl Variant {
    pub const QUINTIC: [Variant; 4] = [Variant::SVe, Variant::WVe, Variant::SCcVe, Variant::WCcVe];

    pub fn name(self) -> &'static str {
        match self {
            Variant::SVe => "S-VE",
            Variant::WVe => "W-VE",
            Variant::SCcVe => "S-CC-VE",
            Variant::WCcVe => "W-CC-VE",
            Variant::Remap => "REMAP",
        }
    }

    /// Learner settings for the variant; `None` for the baseline.
    pub fn config(self) -> Option<LearnerConfig> {
        let (feedback, objective) = match self {
            Variant::SVe => (FeedbackMode::Strong, Objective::Ve),
            Variant::WVe => (FeedbackMode::Weak, Objective::Ve),
            Variant::SCcVe => (FeedbackMode::Strong, Objective::CcVe),
            Variant::WCcVe => (FeedbackMode::Weak, Objective::CcVe),
            Variant::Remap => return None,
        };
        Some(LearnerConfig {
            feedback,
            objective,
            ..LearnerConfig::default()
        })
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Variant::SVe, Variant::WVe, Variant::SCcVe, Variant::WCcVe, Variant::Remap]
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown variant {s:?}")))
    }
}

/// Guards against runs that do not terminate. Hitting one yields
/// [`Outcome::BudgetExceeded`], not an error.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLimits {
    /// Search steps: conjectures, backtracks, repairs and hypothesis tests.
    pub max_steps: Option<u64>,
    /// Largest table, in variables.
    pub max_vars: Option<usize>,
    pub time_limit_ms: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct LearnerConfig {
    pub feedback: FeedbackMode,
    pub objective: Objective,
    pub ids_enabled: bool,
    pub cex_expansion_enabled: bool,
    /// Starting budget `M0`, at least 1.
    pub initial_budget: u32,
    /// Concrete hypotheses tested per symbolic hypothesis.
    pub enumeration_cap: Option<usize>,
    pub limits: RunLimits,
    /// The hidden target, for instrumented runs only: every solve is checked
    /// against its true labels and findings land in
    /// [`FinalResult::violations`]. The learner never reads it otherwise.
    pub oracle: Option<QuantitativeAutomaton>,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            feedback: FeedbackMode::Strong,
            objective: Objective::Ve,
            ids_enabled: true,
            cex_expansion_enabled: true,
            initial_budget: 1,
            enumeration_cap: None,
            limits: RunLimits::default(),
            oracle: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Distinct preference queries.
    pub pref_queries: u64,
    pub equiv_queries: u64,
    /// Largest constraint store `|C|`.
    pub inequality_count: u64,
    /// Largest table, in variables.
    pub variable_count: u64,
    /// Largest objective: ordered pairs with unknown relation.
    pub unknown_pair_count: u64,
    pub maxsmt_solves: u64,
    pub solver_time_ms: f64,
    pub backtracks: u64,
}

/// Search counters beyond the reported metrics.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub conjectures: u64,
    pub forced_expansions: u64,
    pub restarts: u64,
    pub hypotheses: u64,
    pub steps: u64,
    pub max_depth: usize,
    /// Budget `M` of the last iteration.
    pub final_budget: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// A minimal machine the teacher accepted.
    Learned(QuantitativeAutomaton),
    BudgetExceeded(String),
}

#[derive(Clone, Debug)]
pub struct FinalResult {
    pub outcome: Outcome,
    pub metrics: RunMetrics,
    pub stats: SearchStats,
    pub transcript: Transcript,
    /// Soundness findings of an instrumented run; always empty otherwise.
    pub violations: Vec<String>,
}

impl FinalResult {
    pub fn learned(&self) -> Option<&QuantitativeAutomaton> {
        match &self.outcome {
            Outcome::Learned(a) => Some(a),
            Outcome::BudgetExceeded(_) => None,
        }
    }
}

/// What an equivalence query taught about a counterexample `c`: `Val(c) = v`
/// (strong) or `Val(c) ≠ v` (weak).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeedbackRecord {
    pub sequence: Sequence,
    pub relation: FeedbackRelation,
    pub value: Rational,
}

impl FeedbackRecord {
    fn from_answer(ans: &EquivalenceAnswer) -> Result<Self> {
        match (&ans.counterexample, &ans.feedback) {
            (Some(c), Some(fb)) => Ok(FeedbackRecord {
                sequence: c.clone(),
                relation: fb.relation,
                value: fb.value.clone(),
            }),
            _ => Err(Error::Teacher(
                "refutation without counterexample and feedback".into(),
            )),
        }
    }

    fn constraint(&self, expr: ValExpr) -> Constraint {
        let r = match self.relation {
            FeedbackRelation::Eq => Relation::Eq,
            FeedbackRelation::Ne => Relation::Ne,
        };
        Constraint::new(expr, r, ValExpr::constant(self.value.clone()))
    }
}

/// Each record as a constraint over `h`'s label variables along the run of
/// its sequence.
pub fn resolve_feedback(
    h: &SymbolicHypothesis,
    records: &[FeedbackRecord],
    valuation: &ValuationKind,
) -> Vec<Constraint> {
    records
        .iter()
        .map(|r| r.constraint(fold_expression(&h.label_run(&r.sequence), valuation)))
        .collect()
}

/// The records whose sequence and all its prefixes are table variables,
/// encoded over those variables. These hold whatever the hypothesis.
pub fn table_feedback(
    gamma: &BTreeMap<Sequence, VarId>,
    records: &[FeedbackRecord],
    valuation: &ValuationKind,
) -> Result<Vec<Constraint>> {
    records
        .iter()
        .filter(|r| r.sequence.prefixes().iter().all(|p| gamma.contains_key(p)))
        .map(|r| Ok(r.constraint(val_expression(&r.sequence, gamma, valuation)?)))
        .collect()
}

/// Learns a minimal machine from `teacher`.
pub fn run_quintic<T: Teacher + ?Sized>(
    teacher: &mut T,
    config: &LearnerConfig,
) -> Result<FinalResult> {
    if config.initial_budget == 0 {
        return Err(Error::Config("initial budget must be at least 1".into()));
    }
    let mut session = Session::new(teacher, config)?;
    let outcome = match session.learn() {
        Ok(a) => Outcome::Learned(a),
        Err(Halt::Budget(reason)) => {
            session.transcript.record("budget-exceeded", &[("reason", reason.clone())]);
            Outcome::BudgetExceeded(reason)
        }
        Err(Halt::Failed(e)) => return Err(e),
    };
    Ok(session.finish(outcome))
}

/// SMT-LIB text of the first conjecture problem over the table whose upper
/// rows are the prefixes of `rows`: every preference, inferred relation and
/// domain as hard constraints, unknown pairs as soft equalities.
pub fn export_position<T: Teacher + ?Sized>(teacher: &mut T, rows: &[Sequence]) -> Result<String> {
    let cfg = LearnerConfig::default();
    let mut session = Session::new(teacher, &cfg)?;
    let mut table = session.root.clone();
    for r in rows {
        table.expand_with_counterexample(r, &mut session.ctx);
    }
    let part = match session.enter_position(&table, None) {
        Ok(p) => p,
        Err(Halt::Failed(e)) => return Err(e),
        Err(Halt::Budget(m)) => return Err(Error::LimitReached(m)),
    };
    let unknown = part.unordered_unknown();
    let text = session.solver.to_smtlib(&table.vars(), &unknown);
    session.solver.pop()?;
    Ok(text)
}

/// Why the search stopped early.
enum Halt {
    Budget(String),
    Failed(Error),
}

impl From<Error> for Halt {
    fn from(e: Error) -> Self {
        match e {
            Error::LimitReached(m) => Halt::Budget(m),
            e => Halt::Failed(e),
        }
    }
}

type Step<T> = std::result::Result<T, Halt>;

/// One search position: a table and the pattern it must keep.
struct Frame {
    /// The table as created, never unified.
    table: SymbolicTable,
    keep: Option<EquivClassSet>,
    classes: EquivClassSet,
    /// Blocks of the patterns already refuted here.
    tried: Vec<BlockId>,
    forced: u32,
}

enum Tested {
    Correct(QuantitativeAutomaton),
    Refuted(Vec<Sequence>),
}

/// Teacher wrapper that writes fresh preference queries to the transcript.
struct Logged<'a, T: ?Sized> {
    inner: &'a mut T,
    transcript: &'a mut Transcript,
}

impl<T: Teacher + ?Sized> Teacher for Logged<'_, T> {
    fn input(&self) -> &InputAlphabet {
        self.inner.input()
    }

    fn output(&self) -> &OutputAlphabet {
        self.inner.output()
    }

    fn valuation(&self) -> &ValuationKind {
        self.inner.valuation()
    }

    fn pref_query(&mut self, s1: &Sequence, s2: &Sequence) -> Result<PreferenceAnswer> {
        let fresh = self.inner.log().cached(s1, s2).is_none();
        let a = self.inner.pref_query(s1, s2)?;
        if fresh {
            let input = self.inner.input();
            self.transcript.record(
                "pref",
                &[("s1", input.format(s1)), ("s2", input.format(s2)), ("answer", a.to_string())],
            );
        }
        Ok(a)
    }

    fn equiv_query(
        &mut self,
        hypothesis: &QuantitativeAutomaton,
        mode: FeedbackMode,
    ) -> Result<EquivalenceAnswer> {
        self.inner.equiv_query(hypothesis, mode)
    }

    fn log(&self) -> &QueryLog {
        self.inner.log()
    }
}

struct Session<'a, T: Teacher + ?Sized> {
    teacher: &'a mut T,
    cfg: &'a LearnerConfig,
    valuation: ValuationKind,
    input: InputAlphabet,
    output: OutputAlphabet,
    ctx: Context,
    solver: Solver,
    frames: Vec<Frame>,
    /// The top frame's table unified under its pattern.
    table: SymbolicTable,
    /// Table of the last abandoned root frame; restarts begin here.
    root: SymbolicTable,
    records: Vec<FeedbackRecord>,
    counterexamples: BTreeSet<Sequence>,
    budget_m: u32,
    budget: u64,
    metrics: RunMetrics,
    stats: SearchStats,
    transcript: Transcript,
    violations: Vec<String>,
    deadline: Option<Instant>,
}

impl<'a, T: Teacher + ?Sized> Session<'a, T> {
    fn new(teacher: &'a mut T, cfg: &'a LearnerConfig) -> Result<Self> {
        let valuation = teacher.valuation().clone();
        let input = teacher.input().clone();
        let output = teacher.output().clone();
        let mut solver = Solver::new(output.sorted_values())?;
        let deadline = cfg
            .limits
            .time_limit_ms
            .map(|ms| Instant::now() + Duration::from_millis(ms));
        solver.set_deadline(deadline);
        let mut ctx = Context::new();
        let root = SymbolicTable::new(input.len(), &mut ctx);
        Ok(Session {
            teacher,
            cfg,
            valuation,
            input,
            output,
            ctx,
            solver,
            frames: Vec::new(),
            table: root.clone(),
            root,
            records: Vec::new(),
            counterexamples: BTreeSet::new(),
            budget_m: cfg.initial_budget,
            budget: Self::budget_for(cfg, cfg.initial_budget),
            metrics: RunMetrics::default(),
            stats: SearchStats::default(),
            transcript: Transcript::new(),
            violations: Vec::new(),
            deadline,
        })
    }

    fn budget_for(cfg: &LearnerConfig, m: u32) -> u64 {
        if cfg.ids_enabled {
            u64::from(m)
        } else {
            u64::MAX
        }
    }

    fn finish(self, outcome: Outcome) -> FinalResult {
        let sm = self.solver.metrics();
        let mut metrics = self.metrics;
        metrics.pref_queries = self.teacher.log().pref_count as u64;
        metrics.maxsmt_solves = sm.solves;
        metrics.solver_time_ms = sm.time.as_secs_f64() * 1000.0;
        let mut stats = self.stats;
        stats.final_budget = self.budget_m;
        FinalResult {
            outcome,
            metrics,
            stats,
            transcript: self.transcript,
            violations: self.violations,
        }
    }

    fn fmt(&self, s: &Sequence) -> String {
        self.input.format(s)
    }

    /// Counts a step and enforces the run limits.
    fn step(&mut self) -> Step<()> {
        self.stats.steps += 1;
        let l = &self.cfg.limits;
        if l.max_steps.is_some_and(|m| self.stats.steps > m) {
            return Err(Halt::Budget(format!("step limit {} reached", self.stats.steps - 1)));
        }
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(Halt::Budget("time limit reached".into()));
        }
        Ok(())
    }

    fn gather(&mut self, table: &SymbolicTable) -> Result<ConstraintSet> {
        let mut logged = Logged {
            inner: &mut *self.teacher,
            transcript: &mut self.transcript,
        };
        gather_constraints(table, &mut logged)
    }

    /// Pushes a solver scope holding every hard constraint of a position:
    /// preferences, inferred relations, table-level feedback and the kept
    /// pattern. Returns the pair partition for the objective.
    fn enter_position(
        &mut self,
        table: &SymbolicTable,
        keep: Option<&EquivClassSet>,
    ) -> Step<PairPartition> {
        let m = table.var_count();
        if self.cfg.limits.max_vars.is_some_and(|max| m > max) {
            return Err(Halt::Budget(format!("table grew to {m} variables")));
        }
        let cs = self.gather(table)?;
        let part = partition_pairs(table, &cs, &self.valuation);
        assert_eq!(part.total(), m * m.saturating_sub(1), "K and U must cover every ordered pair");
        let mt = &mut self.metrics;
        mt.inequality_count = mt.inequality_count.max(cs.len() as u64);
        mt.variable_count = mt.variable_count.max(m as u64);
        mt.unknown_pair_count = mt.unknown_pair_count.max(part.unknown.len() as u64);
        let known = known_constraints(&part);
        let feedback = table_feedback(table.gamma(), &self.records, &self.valuation)?;
        self.audit_position(table, &cs, &known, &feedback)?;
        self.solver.push();
        self.solver.assert_all(cs.constraints().cloned());
        self.solver.assert_all(known);
        self.solver.assert_all(feedback);
        if let Some(k) = keep {
            self.solver.assert_all(partition_constraints(k));
        }
        Ok(part)
    }

    /// Best pattern at a position, or `None` with a flag telling whether
    /// any pattern would exist without the blocks.
    fn solve_position(
        &mut self,
        table: &SymbolicTable,
        keep: Option<&EquivClassSet>,
    ) -> Step<(Option<Solution>, bool)> {
        let part = self.enter_position(table, keep)?;
        let vars = table.vars();
        let unknown = part.unordered_unknown();
        let found = match self.cfg.objective {
            Objective::Ve => self.solver.solve_ve(&vars, &unknown),
            Objective::CcVe => {
                let rows = RowStructure::from_table(table)?;
                self.solver.solve_cc_ve(&vars, &unknown, &rows)
            }
        };
        let out = match found {
            Ok(Some(sol)) => Ok((Some(sol), true)),
            Ok(None) => self.solver.check_sat_unblocked(&vars).map(|s| (None, s.is_some())),
            Err(e) => Err(e),
        };
        self.solver.pop()?;
        Ok(out?)
    }

    fn learn(&mut self) -> Step<QuantitativeAutomaton> {
        let root = self.root.clone();
        self.descend(root)?;
        loop {
            self.step()?;
            if let Some(defect) = self.table.defect()? {
                let mut t = self.table.clone();
                t.repair(&defect, &mut self.ctx);
                self.transcript.record(
                    "repair",
                    &[
                        ("kind", match defect {
                            crate::table::Defect::Closedness(_) => "closedness".into(),
                            crate::table::Defect::Consistency(_) => "consistency".into(),
                        }),
                        ("vars", t.var_count().to_string()),
                    ],
                );
                self.descend(t)?;
                continue;
            }
            let h = self.table.build_symbolic_hypothesis()?;
            self.stats.hypotheses += 1;
            self.transcript.record(
                "hypothesis",
                &[
                    ("states", h.num_states().to_string()),
                    ("depth", self.frames.len().to_string()),
                ],
            );
            if !self.hypothesis_satisfiable(&h)? {
                self.transcript.record("unsat", &[]);
                self.fail_top()?;
                continue;
            }
            match self.test_hypotheses(&h)? {
                Tested::Correct(a) => return Ok(minimize(&a)),
                Tested::Refuted(cexs) => {
                    let restarts = self.stats.restarts;
                    self.fail_top()?;
                    if self.stats.restarts != restarts || !self.cfg.cex_expansion_enabled {
                        continue;
                    }
                    let mut t = self.table.clone();
                    for c in &cexs {
                        t.expand_with_counterexample(c, &mut self.ctx);
                    }
                    if t.upper() != self.table.upper() {
                        self.transcript
                            .record("expand", &[("vars", t.var_count().to_string())]);
                        self.descend(t.raw())?;
                    }
                }
            }
        }
    }

    /// Opens a position at `table` below the top frame.
    fn descend(&mut self, table: SymbolicTable) -> Step<()> {
        self.step()?;
        if self.budget == 0 {
            self.transcript.record("cut", &[("depth", self.frames.len().to_string())]);
            return self.fail_top();
        }
        let keep = self.frames.last().map(|f| f.classes.clone());
        let (found, _) = self.solve_position(&table, keep.as_ref())?;
        match found {
            Some(sol) => {
                self.push_frame(table, keep, sol.classes)?;
                Ok(())
            }
            None if self.frames.is_empty() => Err(Halt::Failed(Error::Teacher(
                "no labeling satisfies the preference answers".into(),
            ))),
            None => self.fail_top(),
        }
    }

    fn push_frame(
        &mut self,
        table: SymbolicTable,
        keep: Option<EquivClassSet>,
        classes: EquivClassSet,
    ) -> Step<()> {
        self.budget -= 1;
        self.stats.conjectures += 1;
        self.table = table.unify(&classes)?;
        self.frames.push(Frame {
            table,
            keep,
            classes,
            tried: Vec::new(),
            forced: 0,
        });
        self.stats.max_depth = self.stats.max_depth.max(self.frames.len());
        self.log_conjecture();
        Ok(())
    }

    fn log_conjecture(&mut self) {
        let f = self.frames.last().expect("frame");
        let fields = [
            ("depth", self.frames.len().to_string()),
            ("vars", f.table.var_count().to_string()),
            ("classes", f.classes.len().to_string()),
            ("budget", self.budget.min(u64::from(u32::MAX)).to_string()),
        ];
        self.transcript.record("conjecture", &fields);
    }

    /// Refutes the top conjecture and moves to the next candidate: another
    /// pattern at the same position, a grown table, an ancestor's next
    /// pattern, or a restart with a larger budget.
    fn fail_top(&mut self) -> Step<()> {
        loop {
            self.step()?;
            let Some(top) = self.frames.last() else {
                return self.restart();
            };
            let (classes, m) = (top.classes.clone(), top.table.var_count());
            self.audit_block(&top.table.clone(), &classes)?;
            let id = self.solver.block_conjecture(classes, m);
            self.metrics.backtracks += 1;
            self.frames.last_mut().expect("frame").tried.push(id);
            self.transcript.record(
                "backtrack",
                &[("depth", self.frames.len().to_string()), ("vars", m.to_string())],
            );
            loop {
                let top = self.frames.last().expect("frame");
                let (table, keep) = (top.table.clone(), top.keep.clone());
                let (found, feasible) = self.solve_position(&table, keep.as_ref())?;
                if let Some(sol) = found {
                    self.stats.conjectures += 1;
                    self.table = table.unify(&sol.classes)?;
                    self.frames.last_mut().expect("frame").classes = sol.classes;
                    self.log_conjecture();
                    return Ok(());
                }
                if !feasible || self.budget == 0 {
                    break;
                }
                // every pattern at this size is refuted: grow the table
                self.step()?;
                let top = self.frames.last_mut().expect("frame");
                top.table.force_expand(&mut self.ctx);
                top.forced += 1;
                let vars = top.table.var_count();
                self.budget -= 1;
                self.stats.forced_expansions += 1;
                self.transcript.record("force-expand", &[("vars", vars.to_string())]);
            }
            let f = self.frames.pop().expect("frame");
            for id in &f.tried {
                self.solver.remove_block(*id);
            }
            self.budget = self.budget.saturating_add(1 + u64::from(f.forced));
            if self.frames.is_empty() {
                self.root = f.table;
            }
            self.transcript.record("abandon", &[("depth", (self.frames.len() + 1).to_string())]);
        }
    }

    fn restart(&mut self) -> Step<()> {
        self.stats.restarts += 1;
        if self.cfg.ids_enabled {
            self.budget_m += 1;
        }
        self.budget = Self::budget_for(self.cfg, self.budget_m);
        self.solver.clear_blocks();
        let mut root = self.root.clone();
        if self.cfg.cex_expansion_enabled {
            for c in &self.counterexamples {
                root.expand_with_counterexample(c, &mut self.ctx);
            }
        }
        self.transcript.record(
            "restart",
            &[("budget", self.budget_m.to_string()), ("vars", root.var_count().to_string())],
        );
        self.descend(root)
    }

    /// Constraints a hypothesis must meet: the position's, the full pattern
    /// and the feedback resolved through `h`.
    fn enter_hypothesis(&mut self, h: &SymbolicHypothesis) -> Step<Vec<VarId>> {
        let top = self.frames.last().expect("a hypothesis needs a conjecture");
        let (table, classes) = (top.table.clone(), top.classes.clone());
        self.enter_position(&table, Some(&classes))?;
        self.solver.assert_all(resolve_feedback(h, &self.records, &self.valuation));
        Ok(table.vars())
    }

    fn hypothesis_satisfiable(&mut self, h: &SymbolicHypothesis) -> Step<bool> {
        self.audit_hypothesis(h)?;
        let vars = self.enter_hypothesis(h)?;
        let sat = self.solver.check_sat(&vars);
        self.solver.pop()?;
        Ok(sat?.is_some())
    }

    fn test_hypotheses(&mut self, h: &SymbolicHypothesis) -> Step<Tested> {
        let vars = self.enter_hypothesis(h)?;
        let out = self.enumerate(h, &vars);
        self.solver.pop()?;
        out
    }

    fn enumerate(&mut self, h: &SymbolicHypothesis, vars: &[VarId]) -> Step<Tested> {
        let free = h.label_vars();
        let mut cexs = Vec::new();
        let mut tested = 0usize;
        loop {
            if self.cfg.enumeration_cap.is_some_and(|cap| tested >= cap) {
                self.transcript.record("enumeration-cap", &[("tested", tested.to_string())]);
                break;
            }
            self.step()?;
            let Some(sol) = self.solver.next_model(vars, &free)? else { break };
            tested += 1;
            let hyp = h.instantiate(&sol.values, &self.input, &self.output, &self.valuation)?;
            let ans = self.teacher.equiv_query(&hyp, self.cfg.feedback)?;
            self.metrics.equiv_queries += 1;
            if ans.correct {
                self.transcript.record(
                    "equiv",
                    &[("states", h.num_states().to_string()), ("result", "accepted".into())],
                );
                return Ok(Tested::Correct(hyp));
            }
            let record = FeedbackRecord::from_answer(&ans)?;
            self.transcript.record(
                "equiv",
                &[
                    ("states", h.num_states().to_string()),
                    ("result", "refuted".into()),
                    ("cex", self.fmt(&record.sequence)),
                    ("feedback", format!("{}{}", record.relation, record.value)),
                ],
            );
            let gamma = self.table.gamma().clone();
            let fresh = std::slice::from_ref(&record);
            self.solver.assert_all(resolve_feedback(h, fresh, &self.valuation));
            let table_level = table_feedback(&gamma, fresh, &self.valuation)?;
            self.audit_constraints(&gamma, &table_level, "feedback")?;
            self.solver.assert_all(table_level);
            self.solver.assert_nogood(Nogood(
                free.iter().map(|v| (*v, sol.values[v].clone())).collect(),
            ));
            self.counterexamples.insert(record.sequence.clone());
            cexs.push(record.sequence.clone());
            self.records.push(record);
        }
        Ok(Tested::Refuted(cexs))
    }

    // Instrumented checks. Each compares the search state with the hidden
    // target's true labels and records what does not hold.

    fn truth(&self, gamma: &BTreeMap<Sequence, VarId>) -> Result<Option<BTreeMap<VarId, Rational>>> {
        self.cfg
            .oracle
            .as_ref()
            .map(|o| ground_truth(gamma, o))
            .transpose()
    }

    fn audit_constraints(
        &mut self,
        gamma: &BTreeMap<Sequence, VarId>,
        cs: &[Constraint],
        what: &str,
    ) -> Result<()> {
        let Some(truth) = self.truth(gamma)? else { return Ok(()) };
        for c in cs {
            if c.holds(&truth) != Some(true) {
                self.violations.push(format!("true labels violate {what} constraint {c}"));
            }
        }
        Ok(())
    }

    fn audit_position(
        &mut self,
        table: &SymbolicTable,
        cs: &ConstraintSet,
        known: &[Constraint],
        feedback: &[Constraint],
    ) -> Result<()> {
        if self.cfg.oracle.is_none() {
            return Ok(());
        }
        let gamma = table.gamma().clone();
        let prefs: Vec<Constraint> = cs.constraints().cloned().collect();
        self.audit_constraints(&gamma, &prefs, "preference")?;
        self.audit_constraints(&gamma, known, "inferred")?;
        self.audit_constraints(&gamma, feedback, "feedback")
    }

    /// The hypothesis of `table` under its true pattern, when that table is
    /// closed and consistent, and whether it equals the target.
    fn true_hypothesis(
        &self,
        table: &SymbolicTable,
    ) -> Result<Option<(EquivClassSet, BTreeMap<VarId, Rational>, bool)>> {
        let (Some(oracle), Some(truth)) = (&self.cfg.oracle, self.truth(table.gamma())?) else {
            return Ok(None);
        };
        let classes = EquivClassSet::from_assignment(&truth);
        let unified = table.unify(&classes)?;
        if unified.defect()?.is_some() {
            return Ok(None);
        }
        let h = unified.build_symbolic_hypothesis()?;
        let a = h.instantiate(&truth, &self.input, &self.output, &self.valuation)?;
        let correct = check_label_equivalence(oracle, &a)?.is_none();
        Ok(Some((classes, truth, correct)))
    }

    fn audit_block(&mut self, table: &SymbolicTable, classes: &EquivClassSet) -> Result<()> {
        if let Some((truth_classes, _, true)) = self.true_hypothesis(table)? {
            if &truth_classes == classes {
                self.violations.push(format!(
                    "blocked the true pattern of a {}-variable table whose hypothesis is correct",
                    table.var_count()
                ));
            }
        }
        Ok(())
    }

    fn audit_hypothesis(&mut self, h: &SymbolicHypothesis) -> Result<()> {
        let top = self.frames.last().expect("frame");
        let (table, classes) = (top.table.clone(), top.classes.clone());
        if let Some((truth_classes, truth, true)) = self.true_hypothesis(&table)? {
            if truth_classes == classes {
                for c in resolve_feedback(h, &self.records, &self.valuation) {
                    if c.holds(&truth) != Some(true) {
                        self.violations
                            .push(format!("true labels violate resolved feedback {c}"));
                    }
                }
            }
        }
        Ok(())
    }
}
