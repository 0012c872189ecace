//! Exact finite-domain solving with soft objectives.
//!
//! Every variable ranges over the output alphabet's values, so satisfiability
//! and optimization are decided by branch-and-bound over finite domains with
//! exact constraint evaluation. Nothing here needs a general SMT backend;
//! [`smtlib`] can still dump a solver state for cross-checking with one.
//!
//! Hard constraints come from three places: scoped assertions
//! ([`Solver::assert`], [`Solver::push`], [`Solver::pop`]), nogoods that block
//! concrete value tuples, and conjecture blocks ([`Solver::block_conjecture`])
//! that forbid a merge pattern while the table has at most `m` variables.
//!
//! Objectives:
//!
//! - VE: number of listed unknown pairs assigned equal values.
//! - CC then VE: first the closedness/consistency score of the unified table
//!   (see [`cc`]), then VE among the maximizers.

pub mod cc;
mod search;
pub mod smtlib;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::inference::{Constraint, PairPartition, Relation, ValExpr};
use crate::rational::Rational;
use crate::table::{EquivClassSet, VarId};

pub use cc::{cc_score, CcScore, RowRef, RowStructure};

/// Forbids a tuple of concrete values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nogood(pub Vec<(VarId, Rational)>);

#[derive(Clone, Debug, Default)]
struct Frame {
    constraints: Vec<Constraint>,
    nogoods: Vec<Nogood>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId(u64);

/// A refuted merge pattern, excluded while the solve has at most `m`
/// variables and all of the pattern's variables are present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub classes: EquivClassSet,
    pub m: usize,
}

impl Block {
    pub fn active(&self, vars: &BTreeSet<VarId>) -> bool {
        vars.len() <= self.m && self.classes.vars().all(|v| vars.contains(&v))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolverMetrics {
    pub solves: u64,
    pub time: Duration,
    pub nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    /// Λ over every solved variable.
    pub values: BTreeMap<VarId, Rational>,
    /// 𝓔: variables sharing a value, represented by their least member.
    pub classes: EquivClassSet,
    /// Unknown pairs assigned equal.
    pub ve: u64,
    /// CC score, when the CC objective was used.
    pub cc: Option<CcScore>,
}

#[derive(Clone, Debug)]
pub struct Solver {
    domain: Vec<Rational>,
    frames: Vec<Frame>,
    blocks: BTreeMap<BlockId, Block>,
    next_block: u64,
    metrics: SolverMetrics,
    node_limit: Option<u64>,
    deadline: Option<Instant>,
}

impl Solver {
    /// Values are sorted and deduplicated; at most 64 are supported.
    pub fn new(domain: impl IntoIterator<Item = Rational>) -> Result<Self> {
        let set: BTreeSet<Rational> = domain.into_iter().collect();
        if set.is_empty() || set.len() > 64 {
            return Err(Error::Config(format!(
                "solver domain must have 1 to 64 values, got {}",
                set.len()
            )));
        }
        Ok(Solver {
            domain: set.into_iter().collect(),
            frames: vec![Frame::default()],
            blocks: BTreeMap::new(),
            next_block: 0,
            metrics: SolverMetrics::default(),
            node_limit: None,
            deadline: None,
        })
    }

    pub fn domain(&self) -> &[Rational] {
        &self.domain
    }

    /// Abort a single solve after this many search nodes.
    pub fn set_node_limit(&mut self, limit: Option<u64>) {
        self.node_limit = limit;
    }

    /// Abort any solve after this instant.
    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    pub fn metrics(&self) -> SolverMetrics {
        self.metrics
    }

    pub fn assert(&mut self, c: Constraint) {
        self.frames.last_mut().expect("base frame").constraints.push(c);
    }

    pub fn assert_all(&mut self, cs: impl IntoIterator<Item = Constraint>) {
        for c in cs {
            self.assert(c);
        }
    }

    pub fn assert_nogood(&mut self, n: Nogood) {
        self.frames.last_mut().expect("base frame").nogoods.push(n);
    }

    pub fn push(&mut self) {
        self.frames.push(Frame::default());
    }

    pub fn pop(&mut self) -> Result<()> {
        if self.frames.len() <= 1 {
            return Err(Error::EmptyScope);
        }
        self.frames.pop();
        Ok(())
    }

    /// Number of pushed scopes.
    pub fn depth(&self) -> usize {
        self.frames.len() - 1
    }

    pub fn assertions(&self) -> impl Iterator<Item = &Constraint> {
        self.frames.iter().flat_map(|f| f.constraints.iter())
    }

    pub fn nogoods(&self) -> impl Iterator<Item = &Nogood> {
        self.frames.iter().flat_map(|f| f.nogoods.iter())
    }

    pub fn block_conjecture(&mut self, classes: EquivClassSet, m: usize) -> BlockId {
        let id = BlockId(self.next_block);
        self.next_block += 1;
        self.blocks.insert(id, Block { classes, m });
        id
    }

    pub fn remove_block(&mut self, id: BlockId) -> Option<Block> {
        self.blocks.remove(&id)
    }

    pub fn clear_blocks(&mut self) {
        self.blocks.clear();
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&BlockId, &Block)> {
        self.blocks.iter()
    }

    fn run(&mut self, vars: &[VarId], mode: search::Mode<'_>) -> Result<Option<Solution>> {
        self.run_with(vars, mode, true)
    }

    fn run_with(
        &mut self,
        vars: &[VarId],
        mode: search::Mode<'_>,
        use_blocks: bool,
    ) -> Result<Option<Solution>> {
        let start = Instant::now();
        let var_set: BTreeSet<VarId> = vars.iter().copied().collect();
        let blocks: Vec<&EquivClassSet> = self
            .blocks
            .values()
            .filter(|b| use_blocks && b.active(&var_set))
            .map(|b| &b.classes)
            .collect();
        let constraints: Vec<&Constraint> = self.assertions().collect();
        let nogoods: Vec<&Nogood> = self.nogoods().collect();
        let problem = search::Problem::build(&self.domain, &var_set, &constraints, &nogoods, &blocks)?;
        let limits = search::Limits {
            nodes: self.node_limit,
            deadline: self.deadline,
        };
        let outcome = problem.solve(mode, limits);
        self.metrics.solves += 1;
        self.metrics.time += start.elapsed();
        let (found, nodes) = outcome?;
        self.metrics.nodes += nodes;
        Ok(found.map(|(values, ve, cc)| {
            let values: BTreeMap<VarId, Rational> = values
                .into_iter()
                .map(|(v, k)| (v, self.domain[k].clone()))
                .collect();
            Solution {
                classes: EquivClassSet::from_assignment(&values),
                values,
                ve,
                cc,
            }
        }))
    }

    /// Any assignment satisfying every hard constraint.
    pub fn check_sat(&mut self, vars: &[VarId]) -> Result<Option<Solution>> {
        self.run(vars, search::Mode::Satisfy { first: &[] })
    }

    /// Like [`Solver::check_sat`] with every block ignored: tells a pattern
    /// space that is exhausted apart from one that is infeasible.
    pub fn check_sat_unblocked(&mut self, vars: &[VarId]) -> Result<Option<Solution>> {
        self.run_with(vars, search::Mode::Satisfy { first: &[] }, false)
    }

    /// Maximizes the number of `unknown` pairs assigned equal.
    pub fn solve_ve(
        &mut self,
        vars: &[VarId],
        unknown: &[(VarId, VarId)],
    ) -> Result<Option<Solution>> {
        self.run(vars, search::Mode::Optimize { unknown, rows: None })
    }

    /// Maximizes the CC score of `rows`, then VE.
    pub fn solve_cc_ve(
        &mut self,
        vars: &[VarId],
        unknown: &[(VarId, VarId)],
        rows: &RowStructure,
    ) -> Result<Option<Solution>> {
        self.run(
            vars,
            search::Mode::Optimize {
                unknown,
                rows: Some(rows),
            },
        )
    }

    /// Least satisfying assignment of `free` in lexicographic order (by
    /// VarId, then ascending value) that extends to all of `vars`.
    pub fn next_model(&mut self, vars: &[VarId], free: &[VarId]) -> Result<Option<Solution>> {
        let mut free = free.to_vec();
        free.sort();
        free.dedup();
        self.run(vars, search::Mode::Satisfy { first: &free })
    }

    /// All satisfying assignments of `free`, each blocked after it is found.
    /// The nogoods live in a private scope and are gone on return.
    pub fn enumerate_models(
        &mut self,
        vars: &[VarId],
        free: &[VarId],
        limit: Option<usize>,
    ) -> Result<Vec<BTreeMap<VarId, Rational>>> {
        self.push();
        let out = self.enumerate_in_scope(vars, free, limit);
        self.pop()?;
        out
    }

    fn enumerate_in_scope(
        &mut self,
        vars: &[VarId],
        free: &[VarId],
        limit: Option<usize>,
    ) -> Result<Vec<BTreeMap<VarId, Rational>>> {
        let mut out = Vec::new();
        while limit.is_none_or(|l| out.len() < l) {
            let Some(sol) = self.next_model(vars, free)? else { break };
            let model: BTreeMap<VarId, Rational> = free
                .iter()
                .map(|v| (*v, sol.values[v].clone()))
                .collect();
            self.assert_nogood(Nogood(model.clone().into_iter().collect()));
            out.push(model);
        }
        Ok(out)
    }
}

/// `v = rep(v)` for every member and `rep ≠ rep'` for every pair of
/// representatives: keeps the merge pattern of `classes` fixed.
pub fn partition_constraints(classes: &EquivClassSet) -> Vec<Constraint> {
    let mut out = Vec::new();
    for v in classes.vars() {
        let r = classes.rep(v).expect("covered");
        if r != v {
            out.push(Constraint::new(ValExpr::var(v), Relation::Eq, ValExpr::var(r)));
        }
    }
    let reps: Vec<VarId> = classes.representatives().into_iter().collect();
    for (i, a) in reps.iter().enumerate() {
        for b in &reps[i + 1..] {
            out.push(Constraint::new(ValExpr::var(*a), Relation::Ne, ValExpr::var(*b)));
        }
    }
    out
}

/// The known relations of `partition` as binary constraints, one per
/// unordered pair.
pub fn known_constraints(partition: &PairPartition) -> Vec<Constraint> {
    partition
        .known
        .iter()
        .filter(|((a, b), _)| a < b)
        .map(|((a, b), r)| Constraint::new(ValExpr::var(*a), *r, ValExpr::var(*b)))
        .collect()
}

#[cfg(test)]
mod tests;
