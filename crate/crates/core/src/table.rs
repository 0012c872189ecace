//! The symbolic observation table ⟨S, E, T; C, Γ⟩.
//!
//! Rows are indexed by the prefix-closed set `S` (upper rows) and by
//! `S·Σᴵ \ S` (lower rows); columns by the prefix-closed suffix set `E`. Every
//! cell `s·e` holds the variable `Γ[s·e]`. Variables are interned once per
//! sequence in a [`Context`] that outlives table snapshots, so the same
//! sequence keeps the same [`VarId`] across backtracking.
//!
//! A table becomes *unified* under an [`EquivClassSet`]: cells then read as
//! class representatives and two rows are equal when their representative
//! vectors are.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use crate::alphabet::{InputAlphabet, OutputAlphabet, Sequence, Symbol};
use crate::automaton::{QuantitativeAutomaton, ValuationKind};
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// The context Γ: one variable per sequence, numbered in creation order.
#[derive(Clone, Debug, Default)]
pub struct Context {
    seqs: Vec<Sequence>,
    index: HashMap<Sequence, VarId>,
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    /// The variable of `s`, created on first use.
    pub fn var(&mut self, s: &Sequence) -> VarId {
        if let Some(v) = self.index.get(s) {
            return *v;
        }
        let v = VarId(self.seqs.len() as u32);
        self.seqs.push(s.clone());
        self.index.insert(s.clone(), v);
        v
    }

    pub fn get(&self, s: &Sequence) -> Option<VarId> {
        self.index.get(s).copied()
    }

    pub fn sequence(&self, v: VarId) -> &Sequence {
        &self.seqs[v.index()]
    }

    pub fn len(&self) -> usize {
        self.seqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seqs.is_empty()
    }
}

/// A partition of variables into classes, each with a representative (its
/// least member).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EquivClassSet {
    rep: BTreeMap<VarId, VarId>,
}

impl EquivClassSet {
    pub fn singletons(vars: impl IntoIterator<Item = VarId>) -> Self {
        EquivClassSet {
            rep: vars.into_iter().map(|v| (v, v)).collect(),
        }
    }

    /// Builds the partition from explicit classes. Classes must be disjoint.
    pub fn from_classes(classes: impl IntoIterator<Item = Vec<VarId>>) -> Result<Self> {
        let mut rep = BTreeMap::new();
        for class in classes {
            let Some(&r) = class.iter().min() else { continue };
            for v in class {
                if rep.insert(v, r).is_some() {
                    return Err(Error::Table(format!("{v} appears in two classes")));
                }
            }
        }
        Ok(EquivClassSet { rep })
    }

    /// Buckets variables by assigned value: one class per distinct value.
    pub fn from_assignment<T: Ord + Clone>(assignment: &BTreeMap<VarId, T>) -> Self {
        let mut first: BTreeMap<T, VarId> = BTreeMap::new();
        let mut rep = BTreeMap::new();
        for (v, x) in assignment {
            let r = *first.entry(x.clone()).or_insert(*v);
            rep.insert(*v, r);
        }
        EquivClassSet { rep }
    }

    pub fn rep(&self, v: VarId) -> Option<VarId> {
        self.rep.get(&v).copied()
    }

    pub fn covers(&self, v: VarId) -> bool {
        self.rep.contains_key(&v)
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.rep.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.rep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rep.is_empty()
    }

    pub fn same_class(&self, a: VarId, b: VarId) -> bool {
        matches!((self.rep(a), self.rep(b)), (Some(x), Some(y)) if x == y)
    }

    /// Classes in order of their representatives, members ascending.
    pub fn classes(&self) -> Vec<Vec<VarId>> {
        let mut by_rep: BTreeMap<VarId, Vec<VarId>> = BTreeMap::new();
        for (v, r) in &self.rep {
            by_rep.entry(*r).or_default().push(*v);
        }
        by_rep.into_values().collect()
    }

    pub fn representatives(&self) -> BTreeSet<VarId> {
        self.rep.values().copied().collect()
    }

    /// The partition induced on a subset of the variables.
    pub fn restrict(&self, vars: &BTreeSet<VarId>) -> Self {
        let classes = self
            .classes()
            .into_iter()
            .map(|c| c.into_iter().filter(|v| vars.contains(v)).collect::<Vec<_>>());
        Self::from_classes(classes).expect("restriction of a partition is a partition")
    }
}

impl fmt::Display for EquivClassSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .classes()
            .iter()
            .map(|c| {
                let names: Vec<String> = c.iter().map(ToString::to_string).collect();
                format!("{{{}}}", names.join(","))
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Witness that two equal upper rows have different successors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyDefect {
    pub s1: Sequence,
    pub s2: Sequence,
    pub sigma: Symbol,
    pub e: Sequence,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Defect {
    /// A lower row matching no upper row.
    Closedness(Sequence),
    Consistency(ConsistencyDefect),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicTable {
    alphabet_size: u32,
    s: BTreeSet<Sequence>,
    e: BTreeSet<Sequence>,
    gamma: BTreeMap<Sequence, VarId>,
    classes: Option<EquivClassSet>,
}

impl SymbolicTable {
    /// The initial table `S = E = {ε}` with its cells materialized.
    pub fn new(alphabet_size: usize, ctx: &mut Context) -> Self {
        let mut t = SymbolicTable {
            alphabet_size: alphabet_size as u32,
            s: BTreeSet::from([Sequence::empty()]),
            e: BTreeSet::from([Sequence::empty()]),
            gamma: BTreeMap::new(),
            classes: None,
        };
        t.materialize(ctx);
        t
    }

    fn symbols(&self) -> impl Iterator<Item = Symbol> {
        (0..self.alphabet_size).map(Symbol)
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size as usize
    }

    pub fn upper(&self) -> &BTreeSet<Sequence> {
        &self.s
    }

    pub fn suffixes(&self) -> &BTreeSet<Sequence> {
        &self.e
    }

    /// `S·Σᴵ \ S` in length-lex order.
    pub fn lower(&self) -> Vec<Sequence> {
        let mut out = BTreeSet::new();
        for s in &self.s {
            for a in self.symbols() {
                let t = s.push(a);
                if !self.s.contains(&t) {
                    out.insert(t);
                }
            }
        }
        out.into_iter().collect()
    }

    /// Upper rows followed by lower rows.
    pub fn all_rows(&self) -> Vec<Sequence> {
        let mut v: Vec<Sequence> = self.s.iter().cloned().collect();
        v.extend(self.lower());
        v
    }

    /// Every sequence with a variable, length-lex ordered.
    pub fn sequences(&self) -> impl Iterator<Item = &Sequence> {
        self.gamma.keys()
    }

    pub fn gamma(&self) -> &BTreeMap<Sequence, VarId> {
        &self.gamma
    }

    pub fn var_of(&self, s: &Sequence) -> Option<VarId> {
        self.gamma.get(s).copied()
    }

    /// Variables of the table, ascending.
    pub fn vars(&self) -> Vec<VarId> {
        let mut v: Vec<VarId> = self.gamma.values().copied().collect();
        v.sort();
        v
    }

    pub fn var_set(&self) -> BTreeSet<VarId> {
        self.gamma.values().copied().collect()
    }

    pub fn var_count(&self) -> usize {
        self.gamma.len()
    }

    pub fn classes(&self) -> Option<&EquivClassSet> {
        self.classes.as_ref()
    }

    pub fn is_unified(&self) -> bool {
        self.classes.is_some()
    }

    /// Registers a variable for every cell `(S ∪ S·Σᴵ)·E` and every prefix of one.
    fn materialize(&mut self, ctx: &mut Context) {
        let rows = self.all_rows();
        let mut fresh = false;
        for r in &rows {
            for e in &self.e {
                let t = r.concat(e);
                for p in t.prefixes() {
                    if !self.gamma.contains_key(&p) {
                        let v = ctx.var(&p);
                        self.gamma.insert(p, v);
                        fresh = true;
                    }
                }
            }
        }
        if fresh {
            self.classes = None;
        }
    }

    /// Same table with cells read as raw variables.
    pub fn raw(&self) -> SymbolicTable {
        let mut t = self.clone();
        t.classes = None;
        t
    }

    /// Same table with cells read through the representatives of `classes`.
    pub fn unify(&self, classes: &EquivClassSet) -> Result<SymbolicTable> {
        if let Some(v) = self.gamma.values().find(|v| !classes.covers(**v)) {
            return Err(Error::Table(format!("partition does not cover {v}")));
        }
        let mut t = self.clone();
        t.classes = Some(classes.restrict(&self.var_set()));
        Ok(t)
    }

    /// `T(s·e)`: the representative of `Γ[s·e]`, or the variable itself when
    /// the table is not unified.
    pub fn cell(&self, s: &Sequence, e: &Sequence) -> Result<VarId> {
        let t = s.concat(e);
        let v = self
            .gamma
            .get(&t)
            .copied()
            .ok_or_else(|| Error::MissingVariable(format!("{t:?}")))?;
        Ok(match &self.classes {
            Some(c) => c.rep(v).unwrap_or(v),
            None => v,
        })
    }

    pub fn row(&self, s: &Sequence) -> Result<Vec<VarId>> {
        self.e.iter().map(|e| self.cell(s, e)).collect()
    }

    pub fn closedness_defect(&self) -> Result<Option<Sequence>> {
        let upper: BTreeSet<Vec<VarId>> = self
            .s
            .iter()
            .map(|s| self.row(s))
            .collect::<Result<_>>()?;
        for l in self.lower() {
            if !upper.contains(&self.row(&l)?) {
                return Ok(Some(l));
            }
        }
        Ok(None)
    }

    pub fn consistency_defect(&self) -> Result<Option<ConsistencyDefect>> {
        let upper: Vec<&Sequence> = self.s.iter().collect();
        let rows: Vec<Vec<VarId>> = upper.iter().map(|s| self.row(s)).collect::<Result<_>>()?;
        for i in 0..upper.len() {
            for j in i + 1..upper.len() {
                if rows[i] != rows[j] {
                    continue;
                }
                for sigma in self.symbols() {
                    let (a, b) = (upper[i].push(sigma), upper[j].push(sigma));
                    for e in &self.e {
                        if self.cell(&a, e)? != self.cell(&b, e)? {
                            return Ok(Some(ConsistencyDefect {
                                s1: upper[i].clone(),
                                s2: upper[j].clone(),
                                sigma,
                                e: e.clone(),
                            }));
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    /// First closedness defect, else first consistency defect.
    pub fn defect(&self) -> Result<Option<Defect>> {
        if let Some(l) = self.closedness_defect()? {
            return Ok(Some(Defect::Closedness(l)));
        }
        Ok(self.consistency_defect()?.map(Defect::Consistency))
    }

    /// Closedness: promote the lower row into `S`. Consistency: add `σ·e` and
    /// all its prefixes to `E`. New cells get fresh variables and the table is
    /// no longer unified.
    pub fn repair(&mut self, defect: &Defect, ctx: &mut Context) {
        match defect {
            Defect::Closedness(l) => {
                self.s.insert(l.clone());
            }
            Defect::Consistency(d) => {
                let suffix = Sequence::from_symbols([d.sigma]).concat(&d.e);
                for p in suffix.prefixes() {
                    self.e.insert(p);
                }
            }
        }
        self.materialize(ctx);
    }

    /// `S := S ∪ prefixes(c)`.
    pub fn expand_with_counterexample(&mut self, c: &Sequence, ctx: &mut Context) {
        let before = self.s.len();
        self.s.extend(c.prefixes());
        if self.s.len() != before {
            self.materialize(ctx);
        }
    }

    /// Promotes lower rows in length-lex order until the table gains a
    /// variable. Returns the promoted rows.
    pub fn force_expand(&mut self, ctx: &mut Context) -> Vec<Sequence> {
        let before = self.gamma.len();
        let mut promoted = Vec::new();
        while self.gamma.len() == before {
            let l = self.lower().into_iter().next().expect("S·Σᴵ \\ S is never empty");
            self.s.insert(l.clone());
            self.materialize(ctx);
            promoted.push(l);
        }
        promoted
    }

    /// Builds the hypothesis of a unified, closed and consistent table.
    pub fn build_symbolic_hypothesis(&self) -> Result<SymbolicHypothesis> {
        if let Some(l) = self.closedness_defect()? {
            return Err(Error::Table(format!("table is not closed: lower row {l:?}")));
        }
        if let Some(d) = self.consistency_defect()? {
            return Err(Error::Table(format!(
                "table is not consistent: rows {:?} and {:?} differ after {:?}",
                d.s1,
                d.s2,
                d.sigma
            )));
        }
        let mut index: BTreeMap<Vec<VarId>, usize> = BTreeMap::new();
        let mut access = Vec::new();
        let mut rows = Vec::new();
        for s in &self.s {
            let r = self.row(s)?;
            if !index.contains_key(&r) {
                index.insert(r.clone(), access.len());
                access.push(s.clone());
                rows.push(r);
            }
        }
        let mut delta = Vec::with_capacity(access.len());
        let mut labels = Vec::with_capacity(access.len());
        for s in &access {
            let mut out = Vec::new();
            for a in self.symbols() {
                out.push(index[&self.row(&s.push(a))?]);
            }
            delta.push(out);
            labels.push(self.cell(s, &Sequence::empty())?);
        }
        Ok(SymbolicHypothesis {
            access,
            rows,
            delta,
            labels,
        })
    }

    /// Text grid of cells (representatives when unified), then Γ and classes.
    pub fn dump(&self, input: &InputAlphabet) -> String {
        let col: Vec<String> = self.e.iter().map(|e| input.format(e)).collect();
        let fmt_row = |s: &Sequence| -> String {
            let cells: Vec<String> = self
                .e
                .iter()
                .map(|e| self.cell(s, e).map_or("?".into(), |v| v.to_string()))
                .collect();
            format!("{:<8}| {}", input.format(s), cells.join(" "))
        };
        let mut out = format!("{:<8}| {}\n", "", col.join(" "));
        for s in &self.s {
            out.push_str(&fmt_row(s));
            out.push('\n');
        }
        out.push_str("--------+\n");
        for l in self.lower() {
            out.push_str(&fmt_row(&l));
            out.push('\n');
        }
        let g: Vec<String> = self
            .gamma
            .iter()
            .map(|(s, v)| format!("{}={v}", input.format(s)))
            .collect();
        let _ = writeln!(out, "Γ: {}", g.join(" "));
        if let Some(c) = &self.classes {
            let _ = writeln!(out, "classes: {c}");
        }
        out
    }
}

/// Machine read off a unified, closed and consistent table: one state per
/// distinct upper row, labels still symbolic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicHypothesis {
    /// Length-lex least upper row sequence reaching each state; state 0 is ε.
    pub access: Vec<Sequence>,
    pub rows: Vec<Vec<VarId>>,
    pub delta: Vec<Vec<usize>>,
    /// `L̃(q) = T(s·ε)` for the access sequence `s` of `q`.
    pub labels: Vec<VarId>,
}

impl SymbolicHypothesis {
    pub fn num_states(&self) -> usize {
        self.access.len()
    }

    /// States visited by `c`, starting with the initial state.
    pub fn run(&self, c: &Sequence) -> Vec<usize> {
        let mut q = 0;
        let mut out = vec![q];
        for a in c.symbols() {
            q = self.delta[q][a.index()];
            out.push(q);
        }
        out
    }

    /// Label variables along the run of `c`.
    pub fn label_run(&self, c: &Sequence) -> Vec<VarId> {
        self.run(c).into_iter().map(|q| self.labels[q]).collect()
    }

    /// Distinct label variables, ascending.
    pub fn label_vars(&self) -> Vec<VarId> {
        let set: BTreeSet<VarId> = self.labels.iter().copied().collect();
        set.into_iter().collect()
    }

    /// Concrete machine with `L = Λ ∘ L̃`.
    pub fn instantiate(
        &self,
        values: &BTreeMap<VarId, Rational>,
        input: &InputAlphabet,
        output: &OutputAlphabet,
        valuation: &ValuationKind,
    ) -> Result<QuantitativeAutomaton> {
        let labels = self
            .labels
            .iter()
            .map(|v| {
                values
                    .get(v)
                    .cloned()
                    .ok_or_else(|| Error::MissingVariable(v.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        QuantitativeAutomaton::from_values(
            input.clone(),
            output.clone(),
            self.delta.clone(),
            &labels,
            valuation.clone(),
        )
    }
}
