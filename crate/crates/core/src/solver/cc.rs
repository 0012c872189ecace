//! The closedness/consistency (CC) score.
//!
//! For an assignment, rows compare equal when all their cells get equal
//! values. With `U` upper rows and `L` lower rows:
//!
//! - `M` counts equal row pairs among the `N = (U(U−1) + L(L−1))/2 + UL`
//!   unordered pairs (more merges, fewer states);
//! - `C₁` holds when every lower row equals some upper row;
//! - `C₂` holds when equal upper rows have equal successors;
//! - the score is `M + 1[C₁]·((N+1)·1[C₂] + (N+1))`.
//!
//! So non-closed assignments score in `[0, N]`, closed but inconsistent ones
//! in `[N+1, 2N+1]` and closed consistent ones in `[2N+2, 3N+2]`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::table::{SymbolicTable, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowRef {
    Upper(usize),
    Lower(usize),
}

/// Cell variables of every row (raw, not representatives) plus the
/// successor of each upper row under each input symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowStructure {
    pub upper: Vec<Vec<VarId>>,
    pub lower: Vec<Vec<VarId>>,
    pub succ: Vec<Vec<RowRef>>,
}

impl RowStructure {
    pub fn from_table(t: &SymbolicTable) -> Result<Self> {
        let raw = |s: &crate::alphabet::Sequence| -> Result<Vec<VarId>> {
            t.suffixes()
                .iter()
                .map(|e| {
                    let c = s.concat(e);
                    t.var_of(&c)
                        .ok_or_else(|| Error::MissingVariable(format!("{c:?}")))
                })
                .collect()
        };
        let upper_seqs: Vec<_> = t.upper().iter().cloned().collect();
        let lower_seqs = t.lower();
        let index: BTreeMap<_, RowRef> = upper_seqs
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), RowRef::Upper(i)))
            .chain(lower_seqs.iter().enumerate().map(|(i, s)| (s.clone(), RowRef::Lower(i))))
            .collect();
        let k = t.alphabet_size() as u32;
        let succ = upper_seqs
            .iter()
            .map(|s| (0..k).map(|a| index[&s.push(crate::Symbol(a))]).collect())
            .collect();
        Ok(RowStructure {
            upper: upper_seqs.iter().map(raw).collect::<Result<_>>()?,
            lower: lower_seqs.iter().map(raw).collect::<Result<_>>()?,
            succ,
        })
    }

    pub fn row(&self, r: RowRef) -> &[VarId] {
        match r {
            RowRef::Upper(i) => &self.upper[i],
            RowRef::Lower(i) => &self.lower[i],
        }
    }

    /// Number of unordered row pairs, `N`.
    pub fn pair_count(&self) -> u64 {
        let (u, l) = (self.upper.len() as u64, self.lower.len() as u64);
        (u * u.saturating_sub(1) + l * l.saturating_sub(1)) / 2 + u * l
    }

    /// All unordered row pairs in a fixed order.
    pub fn pairs(&self) -> Vec<(RowRef, RowRef)> {
        let rows: Vec<RowRef> = (0..self.upper.len())
            .map(RowRef::Upper)
            .chain((0..self.lower.len()).map(RowRef::Lower))
            .collect();
        let mut out = Vec::new();
        for (i, a) in rows.iter().enumerate() {
            for b in &rows[i + 1..] {
                out.push((*a, *b));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CcScore {
    pub merged: u64,
    pub closed: bool,
    pub consistent: bool,
    pub pairs: u64,
}

impl CcScore {
    pub fn value(&self) -> u64 {
        let bonus = self.pairs + 1;
        self.merged
            + if self.closed {
                bonus + if self.consistent { bonus } else { 0 }
            } else {
                0
            }
    }
}

/// Score under an equality test on rows.
pub(crate) fn score_with(rows: &RowStructure, eq: impl Fn(RowRef, RowRef) -> bool) -> CcScore {
    let merged = rows.pairs().into_iter().filter(|(a, b)| eq(*a, *b)).count() as u64;
    let closed = (0..rows.lower.len())
        .all(|l| (0..rows.upper.len()).any(|u| eq(RowRef::Lower(l), RowRef::Upper(u))));
    let mut consistent = true;
    'outer: for i in 0..rows.upper.len() {
        for j in i + 1..rows.upper.len() {
            if eq(RowRef::Upper(i), RowRef::Upper(j))
                && rows.succ[i].iter().zip(&rows.succ[j]).any(|(a, b)| !eq(*a, *b))
            {
                consistent = false;
                break 'outer;
            }
        }
    }
    CcScore {
        merged,
        closed,
        consistent,
        pairs: rows.pair_count(),
    }
}

/// Score of a full assignment.
pub fn cc_score(rows: &RowStructure, values: &BTreeMap<VarId, Rational>) -> CcScore {
    score_with(rows, |a, b| {
        rows.row(a)
            .iter()
            .zip(rows.row(b))
            .all(|(x, y)| values.get(x) == values.get(y))
    })
}
