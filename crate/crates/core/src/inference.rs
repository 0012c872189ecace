//! From preference answers to constraints and variable relations.
//!
//! Every pair of table sequences is compared once by the teacher and encoded
//! as `Val(s1) R Val(s2)`, with `Val` unrolled into a [`ValExpr`] over the
//! variables of the prefixes. Separately, [`infer_relation`] decides how two
//! *cell* variables relate from four preference answers; pairs it cannot
//! decide are the unknown pairs the solver tries to merge.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::alphabet::Sequence;
use crate::automaton::{QuantitativeAutomaton, ValuationKind};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::table::{SymbolicTable, VarId};
use crate::teacher::{PreferenceAnswer, Teacher};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Lt,
    Eq,
    Gt,
    Ne,
}

impl Relation {
    pub fn from_ordering(o: Ordering) -> Self {
        match o {
            Ordering::Less => Relation::Lt,
            Ordering::Equal => Relation::Eq,
            Ordering::Greater => Relation::Gt,
        }
    }

    pub fn from_answer(a: PreferenceAnswer) -> Self {
        Self::from_ordering(a.value().cmp(&0))
    }

    /// The relation with its sides swapped.
    pub fn flip(self) -> Self {
        match self {
            Relation::Lt => Relation::Gt,
            Relation::Gt => Relation::Lt,
            r => r,
        }
    }

    pub fn holds(self, o: Ordering) -> bool {
        match self {
            Relation::Lt => o == Ordering::Less,
            Relation::Eq => o == Ordering::Equal,
            Relation::Gt => o == Ordering::Greater,
            Relation::Ne => o != Ordering::Equal,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Eq => "=",
            Relation::Gt => ">",
            Relation::Ne => "!=",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A closed form of `Val` over variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ValExpr {
    /// `Σ cᵢ·xᵢ + k`.
    Linear {
        terms: BTreeMap<VarId, Rational>,
        constant: Rational,
    },
    /// `k · Π xᵢ^pᵢ`.
    Monomial {
        coeff: Rational,
        powers: BTreeMap<VarId, u32>,
    },
}

impl ValExpr {
    pub fn var(v: VarId) -> Self {
        ValExpr::Linear {
            terms: BTreeMap::from([(v, Rational::one())]),
            constant: Rational::zero(),
        }
    }

    pub fn constant(k: Rational) -> Self {
        ValExpr::Linear {
            terms: BTreeMap::new(),
            constant: k,
        }
    }

    /// Variables with a nonzero coefficient or exponent, ascending.
    pub fn vars(&self) -> Vec<VarId> {
        match self {
            ValExpr::Linear { terms, .. } => terms.keys().copied().collect(),
            ValExpr::Monomial { powers, .. } => powers.keys().copied().collect(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.vars().is_empty()
    }

    /// Value under `values`; `None` when a variable is unassigned.
    pub fn eval(&self, values: &BTreeMap<VarId, Rational>) -> Option<Rational> {
        match self {
            ValExpr::Linear { terms, constant } => {
                let mut acc = constant.clone();
                for (v, c) in terms {
                    acc = acc + c * values.get(v)?;
                }
                Some(acc)
            }
            ValExpr::Monomial { coeff, powers } => {
                let mut acc = coeff.clone();
                for (v, p) in powers {
                    acc = acc * values.get(v)?.pow(*p as i32);
                }
                Some(acc)
            }
        }
    }
}

impl fmt::Display for ValExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValExpr::Linear { terms, constant } => {
                let mut parts: Vec<String> = terms
                    .iter()
                    .map(|(v, c)| if c.is_one() { v.to_string() } else { format!("{c}·{v}") })
                    .collect();
                if !constant.is_zero() || parts.is_empty() {
                    parts.push(constant.to_string());
                }
                f.write_str(&parts.join(" + "))
            }
            ValExpr::Monomial { coeff, powers } => {
                let mut parts: Vec<String> = Vec::new();
                if !coeff.is_one() || powers.is_empty() {
                    parts.push(coeff.to_string());
                }
                for (v, p) in powers {
                    parts.push(if *p == 1 { v.to_string() } else { format!("{v}^{p}") });
                }
                f.write_str(&parts.join("·"))
            }
        }
    }
}

/// `lhs R rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub lhs: ValExpr,
    pub relation: Relation,
    pub rhs: ValExpr,
}

impl Constraint {
    pub fn new(lhs: ValExpr, relation: Relation, rhs: ValExpr) -> Self {
        Constraint { lhs, relation, rhs }
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.lhs.vars().into_iter().chain(self.rhs.vars()).collect()
    }

    pub fn holds(&self, values: &BTreeMap<VarId, Rational>) -> Option<bool> {
        let (l, r) = (self.lhs.eval(values)?, self.rhs.eval(values)?);
        Some(self.relation.holds(l.cmp(&r)))
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.relation, self.rhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RelationVerdict {
    Less,
    Equal,
    Greater,
    Unknown,
}

impl RelationVerdict {
    fn from_sign(z: i8) -> Self {
        match z.signum() {
            -1 => RelationVerdict::Less,
            0 => RelationVerdict::Equal,
            _ => RelationVerdict::Greater,
        }
    }

    pub fn relation(self) -> Option<Relation> {
        match self {
            RelationVerdict::Less => Some(Relation::Lt),
            RelationVerdict::Equal => Some(Relation::Eq),
            RelationVerdict::Greater => Some(Relation::Gt),
            RelationVerdict::Unknown => None,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            RelationVerdict::Less => RelationVerdict::Greater,
            RelationVerdict::Greater => RelationVerdict::Less,
            v => v,
        }
    }
}

/// `Val` of a run whose successive labels are `labels` (the first one is the
/// initial label).
pub fn fold_expression(labels: &[VarId], valuation: &ValuationKind) -> ValExpr {
    match valuation {
        ValuationKind::Sum => {
            let mut terms = BTreeMap::new();
            for v in labels {
                let c: &mut Rational = terms.entry(*v).or_insert_with(Rational::zero);
                *c = &*c + &Rational::one();
            }
            ValExpr::Linear {
                terms,
                constant: Rational::zero(),
            }
        }
        ValuationKind::DiscountedSum { gamma } => {
            let mut terms = BTreeMap::new();
            let mut w = Rational::one();
            for v in labels {
                let c: &mut Rational = terms.entry(*v).or_insert_with(Rational::zero);
                *c = &*c + &w;
                w = &w * gamma;
            }
            ValExpr::Linear {
                terms,
                constant: Rational::zero(),
            }
        }
        ValuationKind::Product => {
            let mut powers = BTreeMap::new();
            for v in labels {
                *powers.entry(*v).or_insert(0) += 1;
            }
            ValExpr::Monomial {
                coeff: Rational::one(),
                powers,
            }
        }
        ValuationKind::Classification => match labels.last() {
            Some(v) => ValExpr::var(*v),
            None => ValExpr::constant(Rational::zero()),
        },
    }
}

/// `Val(t)` unrolled over the variables of the prefixes of `t`.
pub fn val_expression(
    t: &Sequence,
    gamma: &BTreeMap<Sequence, VarId>,
    valuation: &ValuationKind,
) -> Result<ValExpr> {
    let vars = t
        .prefixes()
        .iter()
        .map(|p| {
            gamma
                .get(p)
                .copied()
                .ok_or_else(|| Error::MissingVariable(format!("prefix {p:?} of {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fold_expression(&vars, valuation))
}

/// One answered preference query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefFact {
    pub s1: Sequence,
    pub s2: Sequence,
    pub answer: PreferenceAnswer,
}

/// The constraint store C: raw preference facts and their encodings.
#[derive(Clone, Debug, Default)]
pub struct ConstraintSet {
    /// `Γ[ε] = identity`, absent for classification.
    pub anchor: Option<Constraint>,
    pub facts: Vec<PrefFact>,
    /// Encodings of `facts`, index-aligned.
    pub encoded: Vec<Constraint>,
    lookup: HashMap<(Sequence, Sequence), PreferenceAnswer>,
}

impl ConstraintSet {
    /// Anchor followed by the encoded preferences.
    pub fn constraints(&self) -> impl Iterator<Item = &Constraint> {
        self.anchor.iter().chain(self.encoded.iter())
    }

    pub fn len(&self) -> usize {
        self.encoded.len() + usize::from(self.anchor.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pref(&self, a: &Sequence, b: &Sequence) -> Option<PreferenceAnswer> {
        if a == b {
            return Some(PreferenceAnswer::Equal);
        }
        self.lookup.get(&(a.clone(), b.clone())).copied()
    }

    /// Whether every constraint holds under `values`.
    pub fn satisfied_by(&self, values: &BTreeMap<VarId, Rational>) -> bool {
        self.constraints().all(|c| c.holds(values) == Some(true))
    }
}

/// Queries every unordered pair of table sequences and encodes the answers.
pub fn gather_constraints<T: Teacher + ?Sized>(
    table: &SymbolicTable,
    teacher: &mut T,
) -> Result<ConstraintSet> {
    let valuation = teacher.valuation().clone();
    let gamma = table.gamma();
    let seqs: Vec<&Sequence> = gamma.keys().collect();
    let mut set = ConstraintSet {
        anchor: valuation.identity().map(|id| {
            Constraint::new(
                ValExpr::var(gamma[&Sequence::empty()]),
                Relation::Eq,
                ValExpr::constant(id),
            )
        }),
        ..ConstraintSet::default()
    };
    let exprs = seqs
        .iter()
        .map(|s| val_expression(s, gamma, &valuation))
        .collect::<Result<Vec<_>>>()?;
    for i in 0..seqs.len() {
        for j in i + 1..seqs.len() {
            let answer = teacher.pref_query(seqs[i], seqs[j])?;
            set.lookup.insert((seqs[i].clone(), seqs[j].clone()), answer);
            set.lookup.insert((seqs[j].clone(), seqs[i].clone()), answer.flip());
            set.facts.push(PrefFact {
                s1: seqs[i].clone(),
                s2: seqs[j].clone(),
                answer,
            });
            set.encoded.push(Constraint::new(
                exprs[i].clone(),
                Relation::from_answer(answer),
                exprs[j].clone(),
            ));
        }
    }
    Ok(set)
}

fn z(x: i8, y: i8) -> i8 {
    (x - y).signum()
}

fn sum_rule(x: i8, y: i8, xp: i8, yp: i8) -> RelationVerdict {
    if (x + y).abs() != 2 {
        RelationVerdict::from_sign(z(x, y))
    } else if (xp + yp).abs() != 2 {
        RelationVerdict::from_sign(z(xp, yp))
    } else {
        RelationVerdict::Unknown
    }
}

/// Relation between `T(t)` and `T(t')` for two cell sequences, decided from
/// cached preference answers. Missing answers yield `Unknown`.
///
/// With `t = s·σ`, `t' = s'·σ'` the inputs are `X = pref(t, t')`,
/// `Y = pref(s, s')`, `X' = pref(t, s)` and `Y' = pref(t', s')`. For the
/// discounted sum with `|s| ≠ |s'|`, after the `(X', Y')` test fails the
/// `(X, Y)` signs still decide some cases through the weights `γ^{|s|+1}` and
/// `γ^{|s'|+1}`: for instance when both labels are positive, the heavier one
/// being no larger in total forces it to be the smaller label.
pub fn infer_relation(
    t: &Sequence,
    tp: &Sequence,
    pref: impl Fn(&Sequence, &Sequence) -> Option<PreferenceAnswer>,
    valuation: &ValuationKind,
) -> RelationVerdict {
    let p = |a: &Sequence, b: &Sequence| pref(a, b).map(PreferenceAnswer::value);
    let unknown = RelationVerdict::Unknown;
    if t == tp {
        return RelationVerdict::Equal;
    }
    if let ValuationKind::Classification = valuation {
        return p(t, tp).map_or(unknown, RelationVerdict::from_sign);
    }
    // T(ε) is the identity, so comparing with it reduces to one step
    match (t.parent(), tp.parent()) {
        (None, None) => RelationVerdict::Equal,
        (Some(s), None) => p(t, &s).map_or(unknown, RelationVerdict::from_sign),
        (None, Some(sp)) => p(tp, &sp).map_or(unknown, |x| RelationVerdict::from_sign(-x)),
        (Some(s), Some(sp)) => {
            let (Some(x), Some(y), Some(xp), Some(yp)) =
                (p(t, tp), p(&s, &sp), p(t, &s), p(tp, &sp))
            else {
                return unknown;
            };
            match valuation {
                ValuationKind::DiscountedSum { gamma } if s.len() != sp.len() => {
                    if (xp + yp).abs() != 2 {
                        return RelationVerdict::from_sign(z(xp, yp));
                    }
                    if (x + y).abs() == 2 {
                        return unknown;
                    }
                    let d = z(x, y);
                    let w = gamma.pow(s.len() as i32 + 1);
                    let wp = gamma.pow(sp.len() as i32 + 1);
                    let heavier = w > wp;
                    match (xp, heavier) {
                        (1, true) if d <= 0 => RelationVerdict::Less,
                        (1, false) if d >= 0 => RelationVerdict::Greater,
                        (-1, true) if d >= 0 => RelationVerdict::Greater,
                        (-1, false) if d <= 0 => RelationVerdict::Less,
                        _ => unknown,
                    }
                }
                _ => sum_rule(x, y, xp, yp),
            }
        }
    }
}

/// Known relations K and unknown pairs U over ordered pairs of distinct
/// variables; `|K| + |U| = m(m−1)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PairPartition {
    pub known: BTreeMap<(VarId, VarId), Relation>,
    pub unknown: BTreeSet<(VarId, VarId)>,
}

impl PairPartition {
    pub fn total(&self) -> usize {
        self.known.len() + self.unknown.len()
    }

    /// Unknown pairs with `a < b`.
    pub fn unordered_unknown(&self) -> Vec<(VarId, VarId)> {
        self.unknown.iter().filter(|(a, b)| a < b).copied().collect()
    }
}

pub fn partition_pairs(
    table: &SymbolicTable,
    constraints: &ConstraintSet,
    valuation: &ValuationKind,
) -> PairPartition {
    let vars: Vec<(&Sequence, VarId)> = table.gamma().iter().map(|(s, v)| (s, *v)).collect();
    let mut out = PairPartition::default();
    for (i, (t, u)) in vars.iter().enumerate() {
        for (tp, v) in &vars[i + 1..] {
            let verdict = infer_relation(t, tp, |a, b| constraints.pref(a, b), valuation);
            match verdict.relation() {
                Some(r) => {
                    out.known.insert((*u, *v), r);
                    out.known.insert((*v, *u), r.flip());
                }
                None => {
                    out.unknown.insert((*u, *v));
                    out.unknown.insert((*v, *u));
                }
            }
        }
    }
    out
}

/// The hidden target's label for each variable: `Γ[t] ↦ L(δ(q₀, t))`.
pub fn ground_truth(
    gamma: &BTreeMap<Sequence, VarId>,
    target: &QuantitativeAutomaton,
) -> Result<BTreeMap<VarId, Rational>> {
    gamma
        .iter()
        .map(|(s, v)| Ok((*v, target.label_value(target.run(s)?).clone())))
        .collect()
}
