use std::collections::HashMap;

use super::QuantitativeAutomaton;
use crate::rational::Rational;

/// Moore-style partition refinement. Unreachable states are dropped and the
/// surviving blocks are numbered in breadth-first order from the initial state.
pub fn minimize(a: &QuantitativeAutomaton) -> QuantitativeAutomaton {
    let reachable = a.reachable();
    let k = a.input().len();

    // block id per reachable state, starting from the label partition
    let mut block: HashMap<usize, usize> = HashMap::new();
    {
        let mut ids: HashMap<u32, usize> = HashMap::new();
        for &q in &reachable {
            let n = ids.len();
            let id = *ids.entry(a.label(q).0).or_insert(n);
            block.insert(q, id);
        }
    }
    loop {
        let mut ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let mut next = HashMap::new();
        for &q in &reachable {
            let sig: Vec<usize> = (0..k).map(|i| block[&a.delta_table()[q][i]]).collect();
            let n = ids.len();
            let id = *ids.entry((block[&q], sig)).or_insert(n);
            next.insert(q, id);
        }
        let before = block.values().copied().max().map_or(0, |m| m + 1);
        let after = ids.len();
        block = next;
        if after == before {
            break;
        }
    }

    // renumber blocks in BFS order of their first reachable member
    let mut number: HashMap<usize, usize> = HashMap::new();
    let mut rep: Vec<usize> = Vec::new();
    for &q in &reachable {
        let b = block[&q];
        if let std::collections::hash_map::Entry::Vacant(e) = number.entry(b) {
            e.insert(rep.len());
            rep.push(q);
        }
    }
    let delta: Vec<Vec<usize>> = rep
        .iter()
        .map(|&q| {
            (0..k)
                .map(|i| number[&block[&a.delta_table()[q][i]]])
                .collect()
        })
        .collect();
    let labels = rep.iter().map(|&q| a.label(q)).collect();
    let names = rep.iter().map(|&q| a.state_name(q).to_string()).collect();
    QuantitativeAutomaton::new(
        a.input().clone(),
        a.output().clone(),
        names,
        0,
        delta,
        labels,
        a.valuation().clone(),
    )
    .expect("minimized machine keeps the original invariants")
}

/// Breadth-first numbering of the reachable part: transition table and label
/// values. Two machines are isomorphic iff their canonical forms are equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub delta: Vec<Vec<usize>>,
    pub labels: Vec<Rational>,
}

pub fn canonical_form(a: &QuantitativeAutomaton) -> CanonicalForm {
    let order = a.reachable();
    let index: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    CanonicalForm {
        delta: order
            .iter()
            .map(|&q| {
                a.delta_table()[q]
                    .iter()
                    .map(|t| index[t])
                    .collect()
            })
            .collect(),
        labels: order.iter().map(|&q| a.label_value(q).clone()).collect(),
    }
}

/// Isomorphism of the reachable parts (same input alphabet order assumed).
pub fn is_isomorphic(a: &QuantitativeAutomaton, b: &QuantitativeAutomaton) -> bool {
    a.input() == b.input() && canonical_form(a) == canonical_form(b)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::*;
    use super::*;
    use crate::alphabet::{InputAlphabet, OutputAlphabet};

    fn sum_machine(delta: Vec<Vec<usize>>, labels: &[i64]) -> QuantitativeAutomaton {
        QuantitativeAutomaton::from_values(
            InputAlphabet::new(["a", "b"]).unwrap(),
            OutputAlphabet::from_values([Rational::zero(), Rational::from_integer(2)]).unwrap(),
            delta,
            &labels.iter().map(|&v| Rational::from_integer(v)).collect::<Vec<_>>(),
            ValuationKind::Sum,
        )
        .unwrap()
    }

    #[test]
    fn duplicate_state_is_merged() {
        // q1 and q2 both labelled 2 and behave identically
        let a = sum_machine(vec![vec![1, 0], vec![2, 0], vec![1, 0]], &[0, 2, 2]);
        let m = minimize(&a);
        assert_eq!(m.num_states(), 2);
        assert!(check_label_equivalence(&a, &m).unwrap().is_none());
    }

    #[test]
    fn minimal_machine_is_kept() {
        let g2 = g2();
        let m = minimize(&g2);
        assert_eq!(m.num_states(), 2);
        assert!(is_isomorphic(&g2, &m));
    }

    #[test]
    fn unreachable_state_is_dropped() {
        let a = sum_machine(vec![vec![1, 0], vec![1, 0], vec![2, 2]], &[0, 2, 0]);
        let m = minimize(&a);
        assert_eq!(m.num_states(), 2);
        assert!(!m.state_names().iter().any(|n| n == "q2"));
    }

    #[test]
    fn minimize_is_idempotent() {
        let a = sum_machine(vec![vec![1, 2], vec![2, 0], vec![1, 0]], &[0, 2, 2]);
        let once = minimize(&a);
        let twice = minimize(&once);
        assert_eq!(canonical_form(&once), canonical_form(&twice));
    }
}
