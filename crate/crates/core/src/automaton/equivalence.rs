use std::collections::{HashMap, VecDeque};

use super::QuantitativeAutomaton;
use crate::alphabet::Sequence;
use crate::error::{Error, Result};
use crate::rational::Rational;

/// A word on which two machines disagree, with both values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub sequence: Sequence,
    /// Value under the first (target) machine.
    pub target_value: Rational,
    /// Value under the second (hypothesis) machine.
    pub hypothesis_value: Rational,
}

/// Breadth-first traversal of the product machine. Returns the length-lex
/// least word reaching a pair of states with different labels, or `None`
/// when the machines are label-equivalent.
pub fn check_label_equivalence(
    a1: &QuantitativeAutomaton,
    a2: &QuantitativeAutomaton,
) -> Result<Option<Counterexample>> {
    if a1.input() != a2.input() {
        return Err(Error::AlphabetMismatch(
            "machines have different input alphabets".into(),
        ));
    }
    if !a1.valuation().same_as(a2.valuation()) {
        return Err(Error::ValuationMismatch(format!(
            "{} vs {}",
            a1.valuation().name(),
            a2.valuation().name()
        )));
    }
    let start = (a1.initial(), a2.initial());
    let mut parent: HashMap<(usize, usize), Option<((usize, usize), u32)>> = HashMap::new();
    parent.insert(start, None);
    let mut queue = VecDeque::from([start]);
    while let Some(pair) = queue.pop_front() {
        if a1.label_value(pair.0) != a2.label_value(pair.1) {
            let sequence = access_word(&parent, pair);
            let target_value = a1.evaluate(&sequence)?;
            let hypothesis_value = a2.evaluate(&sequence)?;
            debug_assert_ne!(target_value, hypothesis_value);
            return Ok(Some(Counterexample {
                sequence,
                target_value,
                hypothesis_value,
            }));
        }
        for a in a1.input().symbols() {
            let next = (a1.successor(pair.0, a), a2.successor(pair.1, a));
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(next) {
                e.insert(Some((pair, a.0)));
                queue.push_back(next);
            }
        }
    }
    Ok(None)
}

fn access_word(
    parent: &HashMap<(usize, usize), Option<((usize, usize), u32)>>,
    mut pair: (usize, usize),
) -> Sequence {
    let mut rev = Vec::new();
    while let Some(Some((p, a))) = parent.get(&pair) {
        rev.push(*a);
        pair = *p;
    }
    rev.reverse();
    Sequence::from_indices(&rev)
}
