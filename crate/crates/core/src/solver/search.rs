//! Branch-and-bound over bitmask domains.
//!
//! Variables merged by equality constraints share a slot. Linear constraints
//! are compiled to scaled `i128` value tables and filtered by bounds.
//! Monomial constraints (products over a positive domain) are filtered in log
//! space with a safety margin and checked exactly once all their slots are
//! fixed.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::cc::{score_with, CcScore, RowRef, RowStructure};
use super::Nogood;
use crate::error::{Error, Result};
use crate::inference::{Constraint, Relation, ValExpr};
use crate::rational::Rational;
use crate::table::{EquivClassSet, VarId};

pub(crate) enum Mode<'a> {
    /// Stop at the first model; branch on the `first` variables before any
    /// other, in order, so models come out lexicographically.
    Satisfy { first: &'a [VarId] },
    Optimize {
        unknown: &'a [(VarId, VarId)],
        rows: Option<&'a RowStructure>,
    },
}

pub(crate) struct Limits {
    pub nodes: Option<u64>,
    pub deadline: Option<Instant>,
}

/// Best assignment (VarId to domain index), its VE count and CC score.
pub(crate) type Found = (BTreeMap<VarId, usize>, u64, Option<CcScore>);

enum Compiled {
    /// `Σ table[j][value(slot j)] + constant R 0`.
    Linear {
        slots: Vec<usize>,
        table: Vec<Vec<i128>>,
        constant: i128,
        rel: Relation,
    },
    /// `Π value(slot j)^exps[j] R target`.
    Monomial {
        slots: Vec<usize>,
        logs: Vec<Vec<f64>>,
        exact: Vec<Vec<BigRational>>,
        target: BigRational,
        log_target: f64,
        rel: Relation,
    },
    /// Not all of `slots[j] = vals[j]`.
    Nogood { slots: Vec<usize>, vals: Vec<usize> },
}

impl Compiled {
    fn slots(&self) -> &[usize] {
        match self {
            Compiled::Linear { slots, .. }
            | Compiled::Monomial { slots, .. }
            | Compiled::Nogood { slots, .. } => slots,
        }
    }
}

pub(crate) struct Problem {
    nvals: usize,
    slot_of: BTreeMap<VarId, usize>,
    /// Least variable of each slot; slots are numbered in this order.
    slot_key: Vec<VarId>,
    cons: Vec<Compiled>,
    watch: Vec<Vec<usize>>,
    /// Each block as class member slots; matches when classes are internally
    /// equal and pairwise distinct.
    blocks: Vec<Vec<Vec<usize>>>,
    infeasible: bool,
}

fn bit(k: usize) -> u64 {
    1u64 << k
}

fn fixed(d: u64) -> Option<usize> {
    (d.count_ones() == 1).then(|| d.trailing_zeros() as usize)
}

fn values(d: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |k| d & bit(*k) != 0)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

/// A side of a constraint in one of the two supported shapes.
enum Shape {
    Lin(BTreeMap<VarId, BigRational>, BigRational),
    Mono(BigRational, BTreeMap<VarId, i64>),
}

fn shape(e: &ValExpr) -> Shape {
    match e {
        ValExpr::Linear { terms, constant } => Shape::Lin(
            terms
                .iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(v, c)| (*v, c.as_big().clone()))
                .collect(),
            constant.as_big().clone(),
        ),
        ValExpr::Monomial { coeff, powers } => Shape::Mono(
            coeff.as_big().clone(),
            powers.iter().filter(|(_, p)| **p != 0).map(|(v, p)| (*v, *p as i64)).collect(),
        ),
    }
}

/// A single term `c·x` or a constant, viewed as a monomial.
fn as_mono(s: &Shape) -> Option<(BigRational, BTreeMap<VarId, i64>)> {
    match s {
        Shape::Mono(c, p) => Some((c.clone(), p.clone())),
        Shape::Lin(t, k) if t.is_empty() => Some((k.clone(), BTreeMap::new())),
        Shape::Lin(t, k) if t.len() == 1 && k.is_zero() => {
            let (v, c) = t.iter().next().expect("one term");
            Some((c.clone(), BTreeMap::from([(*v, 1)])))
        }
        Shape::Lin(..) => None,
    }
}

/// Normalized form of a constraint before slot mapping.
enum Normal {
    Const(bool),
    /// `Σ terms + constant R 0`.
    Lin(BTreeMap<VarId, BigRational>, BigRational, Relation),
    /// `Π x^p R target`, target > 0.
    Mono(BTreeMap<VarId, i64>, BigRational, Relation),
}

fn normalize(c: &Constraint) -> Result<Normal> {
    let (l, r) = (shape(&c.lhs), shape(&c.rhs));
    let rel = c.relation;
    if let (Shape::Lin(lt, lk), Shape::Lin(rt, rk)) = (&l, &r) {
        let mut terms = lt.clone();
        for (v, c) in rt {
            let e = terms.entry(*v).or_insert_with(BigRational::zero);
            *e -= c;
        }
        terms.retain(|_, c| !c.is_zero());
        let k = lk - rk;
        if terms.is_empty() {
            return Ok(Normal::Const(rel_holds(rel, &k, &BigRational::zero())));
        }
        return Ok(Normal::Lin(terms, k, rel));
    }
    let (Some((a, p)), Some((b, q))) = (as_mono(&l), as_mono(&r)) else {
        return Err(Error::Config(format!("cannot mix linear and product forms in `{c}`")));
    };
    // Π values are positive, so only the coefficient signs matter when they differ
    let (sa, sb) = (sgn(&a), sgn(&b));
    if sa <= 0 || sb <= 0 {
        if sa == sb && sa < 0 {
            return normalize_mono(-a, p, -b, q, rel.flip());
        }
        return Ok(Normal::Const(rel.holds(sa.cmp(&sb))));
    }
    normalize_mono(a, p, b, q, rel)
}

fn normalize_mono(
    a: BigRational,
    p: BTreeMap<VarId, i64>,
    b: BigRational,
    q: BTreeMap<VarId, i64>,
    rel: Relation,
) -> Result<Normal> {
    let mut exps = p;
    for (v, e) in q {
        *exps.entry(v).or_insert(0) -= e;
    }
    exps.retain(|_, e| *e != 0);
    let target = b / a;
    if exps.is_empty() {
        return Ok(Normal::Const(rel_holds(rel, &BigRational::one(), &target)));
    }
    Ok(Normal::Mono(exps, target, rel))
}

fn sgn(x: &BigRational) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

fn rel_holds(rel: Relation, a: &BigRational, b: &BigRational) -> bool {
    rel.holds(a.cmp(b))
}

fn to_i128(x: &BigInt) -> Result<i128> {
    x.to_i128().ok_or(Error::Overflow("linear constraint"))
}

impl Problem {
    pub(crate) fn build(
        domain: &[Rational],
        vars: &BTreeSet<VarId>,
        constraints: &[&Constraint],
        nogoods: &[&Nogood],
        blocks: &[&EquivClassSet],
    ) -> Result<Problem> {
        let var_list: Vec<VarId> = vars.iter().copied().collect();
        let index: BTreeMap<VarId, usize> =
            var_list.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let lookup = |v: &VarId| -> Result<usize> {
            index
                .get(v)
                .copied()
                .ok_or_else(|| Error::MissingVariable(format!("{v} is not among the solved variables")))
        };
        let positive = domain.iter().all(|d| d.is_positive());

        let mut normals = Vec::with_capacity(constraints.len());
        let mut infeasible = false;
        let mut uf = UnionFind((0..var_list.len()).collect());
        for c in constraints {
            for v in c.vars() {
                lookup(&v)?;
            }
            // normalizing products assumes every value is positive
            let product = |e: &ValExpr| matches!(e, ValExpr::Monomial { powers, .. } if !powers.is_empty());
            if !positive && (product(&c.lhs) || product(&c.rhs)) {
                return Err(Error::Config("product constraints need a positive value domain".into()));
            }
            let n = normalize(c)?;
            match &n {
                Normal::Const(false) => infeasible = true,
                Normal::Lin(t, k, Relation::Eq) if t.len() == 2 && k.is_zero() => {
                    let mut it = t.iter();
                    let ((x, cx), (y, cy)) = (it.next().unwrap(), it.next().unwrap());
                    if (cx + cy).is_zero() {
                        uf.union(lookup(x)?, lookup(y)?);
                    }
                }
                Normal::Mono(t, target, Relation::Eq) if t.len() == 2 && target.is_one() => {
                    let mut it = t.iter();
                    let ((x, ex), (y, ey)) = (it.next().unwrap(), it.next().unwrap());
                    if ex + ey == 0 {
                        uf.union(lookup(x)?, lookup(y)?);
                    }
                }
                Normal::Mono(..) if !positive => {
                    return Err(Error::Config(
                        "product constraints need a positive value domain".into(),
                    ));
                }
                _ => {}
            }
            normals.push(n);
        }

        // slots numbered by their least variable
        let mut root_slot: BTreeMap<usize, usize> = BTreeMap::new();
        let mut slot_key = Vec::new();
        let mut slot_of = BTreeMap::new();
        for (i, v) in var_list.iter().enumerate() {
            let r = uf.find(i);
            let s = *root_slot.entry(r).or_insert_with(|| {
                slot_key.push(*v);
                slot_key.len() - 1
            });
            slot_of.insert(*v, s);
        }
        let nslots = slot_key.len();
        let nvals = domain.len();
        let dom_big: Vec<BigRational> = domain.iter().map(|d| d.as_big().clone()).collect();

        let mut cons = Vec::new();
        for n in normals {
            match n {
                Normal::Const(_) => {}
                Normal::Lin(terms, k, rel) => {
                    let mut by_slot: BTreeMap<usize, BigRational> = BTreeMap::new();
                    for (v, c) in terms {
                        *by_slot.entry(slot_of[&v]).or_insert_with(BigRational::zero) += c;
                    }
                    by_slot.retain(|_, c| !c.is_zero());
                    if by_slot.is_empty() {
                        if !rel_holds(rel, &k, &BigRational::zero()) {
                            infeasible = true;
                        }
                        continue;
                    }
                    let entries: Vec<Vec<BigRational>> = by_slot
                        .values()
                        .map(|c| dom_big.iter().map(|d| c * d).collect())
                        .collect();
                    let mut scale = k.denom().clone();
                    for row in &entries {
                        for e in row {
                            scale = scale.lcm(e.denom());
                        }
                    }
                    let scaled = |x: &BigRational| -> Result<i128> {
                        to_i128(&(x.numer() * (&scale / x.denom())))
                    };
                    let table = entries
                        .iter()
                        .map(|row| row.iter().map(scaled).collect::<Result<Vec<_>>>())
                        .collect::<Result<Vec<_>>>()?;
                    let constant = scaled(&k)?;
                    let mut span: i128 = constant.checked_abs().ok_or(Error::Overflow("linear constraint"))?;
                    for row in &table {
                        let m = row.iter().map(|x| x.abs()).max().unwrap_or(0);
                        span = span.checked_add(m).ok_or(Error::Overflow("linear constraint"))?;
                    }
                    if span > i128::MAX / 4 {
                        return Err(Error::Overflow("linear constraint"));
                    }
                    cons.push(Compiled::Linear {
                        slots: by_slot.keys().copied().collect(),
                        table,
                        constant,
                        rel,
                    });
                }
                Normal::Mono(exps, target, rel) => {
                    let mut by_slot: BTreeMap<usize, i64> = BTreeMap::new();
                    for (v, e) in exps {
                        *by_slot.entry(slot_of[&v]).or_insert(0) += e;
                    }
                    by_slot.retain(|_, e| *e != 0);
                    if by_slot.is_empty() {
                        if !rel_holds(rel, &BigRational::one(), &target) {
                            infeasible = true;
                        }
                        continue;
                    }
                    let mut logs = Vec::new();
                    let mut exact = Vec::new();
                    for e in by_slot.values() {
                        let e32 = i32::try_from(*e).map_err(|_| Error::Overflow("product exponent"))?;
                        exact.push(
                            domain
                                .iter()
                                .map(|d| d.pow(e32).as_big().clone())
                                .collect::<Vec<_>>(),
                        );
                        logs.push(domain.iter().map(|d| *e as f64 * d.to_f64().ln()).collect());
                    }
                    let log_target = Rational::from(target.clone()).to_f64().ln();
                    cons.push(Compiled::Monomial {
                        slots: by_slot.keys().copied().collect(),
                        logs,
                        exact,
                        target,
                        log_target,
                        rel,
                    });
                }
            }
        }

        for n in nogoods {
            let mut pairs: BTreeMap<usize, usize> = BTreeMap::new();
            let mut never = false;
            for (v, x) in &n.0 {
                lookup(v)?;
                let s = slot_of[v];
                let Some(k) = domain.iter().position(|d| d == x) else {
                    never = true;
                    break;
                };
                if pairs.insert(s, k).is_some_and(|old| old != k) {
                    never = true;
                    break;
                }
            }
            if never {
                continue;
            }
            if pairs.is_empty() {
                infeasible = true;
                continue;
            }
            cons.push(Compiled::Nogood {
                slots: pairs.keys().copied().collect(),
                vals: pairs.values().copied().collect(),
            });
        }

        let mut block_slots = Vec::new();
        'blocks: for b in blocks {
            let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
            let mut classes = Vec::new();
            for (ci, class) in b.classes().into_iter().enumerate() {
                let mut slots = BTreeSet::new();
                for v in class {
                    let s = slot_of[&v];
                    if seen.insert(s, ci).is_some_and(|c| c != ci) {
                        // merged slots can never be told apart, so the pattern cannot occur
                        continue 'blocks;
                    }
                    slots.insert(s);
                }
                classes.push(slots.into_iter().collect());
            }
            block_slots.push(classes);
        }

        let mut watch = vec![Vec::new(); nslots];
        for (i, c) in cons.iter().enumerate() {
            for s in c.slots() {
                watch[*s].push(i);
            }
        }
        Ok(Problem {
            nvals,
            slot_of,
            slot_key,
            cons,
            watch,
            blocks: block_slots,
            infeasible,
        })
    }

    fn full(&self) -> u64 {
        if self.nvals == 64 {
            u64::MAX
        } else {
            bit(self.nvals) - 1
        }
    }

    /// Filters `dom[slot]` to `keep`; returns `None` on wipeout, else whether
    /// the domain changed.
    fn restrict(dom: &mut [u64], slot: usize, keep: u64) -> Option<bool> {
        let new = dom[slot] & keep;
        if new == 0 {
            return None;
        }
        let changed = new != dom[slot];
        dom[slot] = new;
        Some(changed)
    }

    /// Runs one constraint; returns changed slots, or `None` on conflict.
    fn filter(&self, c: &Compiled, dom: &mut [u64]) -> Option<Vec<usize>> {
        let mut changed = Vec::new();
        match c {
            Compiled::Linear {
                slots,
                table,
                constant,
                rel,
            } => {
                let mins: Vec<i128> = slots
                    .iter()
                    .zip(table)
                    .map(|(s, t)| values(dom[*s]).map(|k| t[k]).min().expect("nonempty"))
                    .collect();
                let maxs: Vec<i128> = slots
                    .iter()
                    .zip(table)
                    .map(|(s, t)| values(dom[*s]).map(|k| t[k]).max().expect("nonempty"))
                    .collect();
                let lo: i128 = mins.iter().sum::<i128>() + constant;
                let hi: i128 = maxs.iter().sum::<i128>() + constant;
                let unfixed = slots.iter().filter(|s| fixed(dom[**s]).is_none()).count();
                match rel {
                    Relation::Lt if lo >= 0 => return None,
                    Relation::Gt if hi <= 0 => return None,
                    Relation::Eq if lo > 0 || hi < 0 => return None,
                    Relation::Ne if unfixed == 0 && lo == 0 => return None,
                    Relation::Ne if unfixed > 1 => return Some(changed),
                    _ => {}
                }
                for (j, s) in slots.iter().enumerate() {
                    let (rlo, rhi) = (lo - mins[j], hi - maxs[j]);
                    let mut keep = 0u64;
                    for k in values(dom[*s]) {
                        let (a, b) = (rlo + table[j][k], rhi + table[j][k]);
                        let ok = match rel {
                            Relation::Lt => a < 0,
                            Relation::Gt => b > 0,
                            Relation::Eq => a <= 0 && b >= 0,
                            // at most one slot is free here, so rlo = rhi
                            Relation::Ne => fixed(dom[*s]).is_some() || a != 0,
                        };
                        if ok {
                            keep |= bit(k);
                        }
                    }
                    if Self::restrict(dom, *s, keep)? {
                        changed.push(*s);
                    }
                }
            }
            Compiled::Monomial {
                slots,
                logs,
                exact,
                target,
                log_target,
                rel,
            } => {
                if slots.iter().all(|s| fixed(dom[*s]).is_some()) {
                    let mut p = BigRational::one();
                    for (j, s) in slots.iter().enumerate() {
                        p *= &exact[j][fixed(dom[*s]).expect("fixed")];
                    }
                    return rel_holds(*rel, &p, target).then_some(changed);
                }
                if *rel == Relation::Ne {
                    return Some(changed);
                }
                let mins: Vec<f64> = slots
                    .iter()
                    .zip(logs)
                    .map(|(s, t)| values(dom[*s]).map(|k| t[k]).fold(f64::INFINITY, f64::min))
                    .collect();
                let maxs: Vec<f64> = slots
                    .iter()
                    .zip(logs)
                    .map(|(s, t)| values(dom[*s]).map(|k| t[k]).fold(f64::NEG_INFINITY, f64::max))
                    .collect();
                let lo: f64 = mins.iter().sum();
                let hi: f64 = maxs.iter().sum();
                let eps = 1e-9 * (1.0 + lo.abs().max(hi.abs()) + log_target.abs());
                for (j, s) in slots.iter().enumerate() {
                    let (rlo, rhi) = (lo - mins[j], hi - maxs[j]);
                    let mut keep = 0u64;
                    for k in values(dom[*s]) {
                        let (a, b) = (rlo + logs[j][k], rhi + logs[j][k]);
                        // remove only values that are infeasible beyond rounding error
                        let dead = match rel {
                            Relation::Lt => a > log_target + eps,
                            Relation::Gt => b < log_target - eps,
                            Relation::Eq => a > log_target + eps || b < log_target - eps,
                            Relation::Ne => false,
                        };
                        if !dead {
                            keep |= bit(k);
                        }
                    }
                    if Self::restrict(dom, *s, keep)? {
                        changed.push(*s);
                    }
                }
            }
            Compiled::Nogood { slots, vals } => {
                let mut open = None;
                for (s, k) in slots.iter().zip(vals) {
                    if dom[*s] & bit(*k) == 0 {
                        return Some(changed);
                    }
                    if fixed(dom[*s]).is_none() {
                        if open.is_some() {
                            return Some(changed);
                        }
                        open = Some((*s, *k));
                    }
                }
                let (s, k) = open?;
                if Self::restrict(dom, s, !bit(k))? {
                    changed.push(s);
                }
            }
        }
        Some(changed)
    }

    /// Propagates to a fixpoint from `seeds`; `false` on conflict.
    fn propagate(&self, dom: &mut [u64], seeds: impl IntoIterator<Item = usize>) -> bool {
        let mut queue: Vec<usize> = Vec::new();
        let mut queued = vec![false; self.cons.len()];
        for c in seeds {
            if !queued[c] {
                queued[c] = true;
                queue.push(c);
            }
        }
        while let Some(c) = queue.pop() {
            queued[c] = false;
            let Some(changed) = self.filter(&self.cons[c], dom) else {
                return false;
            };
            for s in changed {
                for w in &self.watch[s] {
                    if !queued[*w] {
                        queued[*w] = true;
                        queue.push(*w);
                    }
                }
            }
        }
        true
    }

    fn block_hit(&self, dom: &[u64]) -> bool {
        self.blocks.iter().any(|classes| {
            let mut class_vals = BTreeSet::new();
            for class in classes {
                let v = fixed(dom[class[0]]).expect("leaf");
                if class.iter().any(|s| fixed(dom[*s]) != Some(v)) {
                    return false;
                }
                if !class_vals.insert(v) {
                    return false;
                }
            }
            true
        })
    }

    pub(crate) fn solve(&self, mode: Mode<'_>, limits: Limits) -> Result<(Option<Found>, u64)> {
        let mut search = Search {
            p: self,
            limits,
            nodes: 0,
            best: None,
            best_key: None,
            first_slots: Vec::new(),
            pairs: Vec::new(),
            pairs_const: 0,
            rows: None,
            optimize: false,
        };
        match mode {
            Mode::Satisfy { first } => {
                for v in first {
                    let s = *self
                        .slot_of
                        .get(v)
                        .ok_or_else(|| Error::MissingVariable(v.to_string()))?;
                    if !search.first_slots.contains(&s) {
                        search.first_slots.push(s);
                    }
                }
            }
            Mode::Optimize { unknown, rows } => {
                search.optimize = true;
                for (a, b) in unknown {
                    let sa = *self.slot_of.get(a).ok_or_else(|| Error::MissingVariable(a.to_string()))?;
                    let sb = *self.slot_of.get(b).ok_or_else(|| Error::MissingVariable(b.to_string()))?;
                    if sa == sb {
                        search.pairs_const += 1;
                    } else {
                        search.pairs.push((sa, sb));
                    }
                }
                if let Some(r) = rows {
                    search.rows = Some(SlotRows::new(r, &self.slot_of)?);
                }
            }
        }
        if self.infeasible {
            return Ok((None, 0));
        }
        let mut dom = vec![self.full(); self.slot_key.len()];
        if !self.propagate(&mut dom, 0..self.cons.len()) {
            return Ok((None, 1));
        }
        search.dfs(dom)?;
        let nodes = search.nodes;
        let found = search.best.map(|(dom, ve, cc)| {
            let values = self
                .slot_of
                .iter()
                .map(|(v, s)| (*v, fixed(dom[*s]).expect("leaf")))
                .collect();
            (values, ve, cc)
        });
        Ok((found, nodes))
    }
}

/// Rows over slots, for CC scoring and bounding.
struct SlotRows {
    rows: RowStructure,
    upper: Vec<Vec<usize>>,
    lower: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum PairStatus {
    Equal,
    Distinct,
    Maybe,
}

impl SlotRows {
    fn new(rows: &RowStructure, slot_of: &BTreeMap<VarId, usize>) -> Result<Self> {
        let map = |r: &Vec<VarId>| -> Result<Vec<usize>> {
            r.iter()
                .map(|v| slot_of.get(v).copied().ok_or_else(|| Error::MissingVariable(v.to_string())))
                .collect()
        };
        Ok(SlotRows {
            rows: rows.clone(),
            upper: rows.upper.iter().map(map).collect::<Result<_>>()?,
            lower: rows.lower.iter().map(map).collect::<Result<_>>()?,
        })
    }

    fn slots(&self, r: RowRef) -> &[usize] {
        match r {
            RowRef::Upper(i) => &self.upper[i],
            RowRef::Lower(i) => &self.lower[i],
        }
    }

    fn status(&self, dom: &[u64], a: RowRef, b: RowRef) -> PairStatus {
        let mut all_equal = true;
        for (x, y) in self.slots(a).iter().zip(self.slots(b)) {
            if x == y {
                continue;
            }
            if dom[*x] & dom[*y] == 0 {
                return PairStatus::Distinct;
            }
            match (fixed(dom[*x]), fixed(dom[*y])) {
                (Some(p), Some(q)) if p == q => {}
                _ => all_equal = false,
            }
        }
        if all_equal {
            PairStatus::Equal
        } else {
            PairStatus::Maybe
        }
    }

    /// Optimistic CC score of any completion of `dom`.
    fn bound(&self, dom: &[u64]) -> u64 {
        let st = |a, b| self.status(dom, a, b);
        let n = self.rows.pair_count();
        let merged = self
            .rows
            .pairs()
            .into_iter()
            .filter(|(a, b)| st(*a, *b) != PairStatus::Distinct)
            .count() as u64;
        let closed = (0..self.lower.len()).all(|l| {
            (0..self.upper.len()).any(|u| st(RowRef::Lower(l), RowRef::Upper(u)) != PairStatus::Distinct)
        });
        if !closed {
            return merged;
        }
        let mut consistent = true;
        'outer: for i in 0..self.upper.len() {
            for j in i + 1..self.upper.len() {
                if st(RowRef::Upper(i), RowRef::Upper(j)) == PairStatus::Equal
                    && self.rows.succ[i]
                        .iter()
                        .zip(&self.rows.succ[j])
                        .any(|(a, b)| st(*a, *b) == PairStatus::Distinct)
                {
                    consistent = false;
                    break 'outer;
                }
            }
        }
        merged + (n + 1) + if consistent { n + 1 } else { 0 }
    }

    fn score(&self, dom: &[u64]) -> CcScore {
        score_with(&self.rows, |a, b| self.status(dom, a, b) == PairStatus::Equal)
    }
}

struct Search<'p> {
    p: &'p Problem,
    limits: Limits,
    nodes: u64,
    best: Option<(Vec<u64>, u64, Option<CcScore>)>,
    best_key: Option<(u64, u64)>,
    first_slots: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    pairs_const: u64,
    rows: Option<SlotRows>,
    optimize: bool,
}

impl Search<'_> {
    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if let Some(l) = self.limits.nodes {
            if self.nodes > l {
                return Err(Error::LimitReached(format!("solver node limit {l}")));
            }
        }
        if self.nodes % 256 == 0 {
            if let Some(d) = self.limits.deadline {
                if Instant::now() >= d {
                    return Err(Error::LimitReached("solver deadline".into()));
                }
            }
        }
        Ok(())
    }

    /// Optimistic (CC, VE) for completions of `dom`.
    fn bound(&self, dom: &[u64]) -> (u64, u64) {
        let ve = self.pairs_const
            + self
                .pairs
                .iter()
                .filter(|(a, b)| dom[*a] & dom[*b] != 0)
                .count() as u64;
        let cc = self.rows.as_ref().map_or(0, |r| r.bound(dom));
        (cc, ve)
    }

    fn choose(&self, dom: &[u64]) -> Option<usize> {
        if let Some(s) = self.first_slots.iter().find(|s| fixed(dom[**s]).is_none()) {
            return Some(*s);
        }
        (0..dom.len())
            .filter(|s| fixed(dom[*s]).is_none())
            .min_by_key(|s| (dom[*s].count_ones(), *s))
    }

    /// Returns `true` when the search can stop.
    fn dfs(&mut self, dom: Vec<u64>) -> Result<bool> {
        self.tick()?;
        if self.optimize {
            if let Some(best) = self.best_key {
                if self.bound(&dom) <= best {
                    return Ok(false);
                }
            }
        }
        let Some(slot) = self.choose(&dom) else {
            if self.p.block_hit(&dom) {
                return Ok(false);
            }
            let cc = self.rows.as_ref().map(|r| r.score(&dom));
            let ve = self.bound(&dom).1;
            self.best_key = Some((cc.map_or(0, |c| c.value()), ve));
            self.best = Some((dom, ve, cc));
            return Ok(!self.optimize);
        };
        for k in values(dom[slot]) {
            let mut child = dom.clone();
            child[slot] = bit(k);
            if !self.p.propagate(&mut child, self.p.watch[slot].iter().copied()) {
                continue;
            }
            if self.dfs(child)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}
