//! Deterministic quantitative automata.
//!
//! A machine is a total Moore-style transition structure whose states carry
//! labels from the output alphabet. The valuation folds the labels visited by
//! a run into a single rational:
//!
//! | kind | value of a run with labels `l0 … lk` |
//! |------|---------------------------------------|
//! | `Sum` | `l0 + … + lk` |
//! | `DiscountedSum(γ)` | `Σ γ^i · li` |
//! | `Product` | `l0 · … · lk` |
//! | `Classification` | `lk` |
//!
//! For the three arithmetic valuations the initial state must carry the
//! identity label (0, or 1 for products) so that the closed form agrees with
//! the recursive definition used by the learner, `Val(ε) = 0` (resp. 1).
//!
//! Equivalence between machines is checked on labels: two machines whose
//! reachable product never pairs different labels assign equal values to every
//! word. Conversely, at the first label divergence along a word the two values
//! differ, since every earlier term agrees and the diverging term has a
//! non-zero weight (γ > 0, and product labels are positive). Label equivalence
//! and value equivalence therefore coincide for the machines accepted here.

mod equivalence;
mod format;
mod minimize;

pub use equivalence::{check_label_equivalence, Counterexample};
pub use format::{parse, serialize, to_dot, AutomatonFile};
pub use minimize::{canonical_form, is_isomorphic, minimize, CanonicalForm};

use crate::alphabet::{InputAlphabet, OutputAlphabet, Sequence, Symbol};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// The fold applied to the label sequence of a run.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ValuationKind {
    Sum,
    DiscountedSum { gamma: Rational },
    Product,
    Classification,
}

impl ValuationKind {
    pub fn discounted(gamma: Rational) -> Result<Self> {
        if !gamma.is_positive() || gamma >= Rational::one() {
            return Err(Error::InvalidAutomaton(format!(
                "discount factor {gamma} must lie strictly between 0 and 1"
            )));
        }
        Ok(ValuationKind::DiscountedSum { gamma })
    }

    /// Label of the initial state required by the recursive value definition.
    pub fn identity(&self) -> Option<Rational> {
        match self {
            ValuationKind::Sum | ValuationKind::DiscountedSum { .. } => Some(Rational::zero()),
            ValuationKind::Product => Some(Rational::one()),
            ValuationKind::Classification => None,
        }
    }

    /// Short name used in file formats and reports.
    pub fn name(&self) -> &'static str {
        match self {
            ValuationKind::Sum => "sum",
            ValuationKind::DiscountedSum { .. } => "discounted_sum",
            ValuationKind::Product => "product",
            ValuationKind::Classification => "classification",
        }
    }

    /// True when the two kinds are the same valuation (including γ).
    pub fn same_as(&self, other: &ValuationKind) -> bool {
        self == other
    }

    /// Folds a label sequence (one label per visited state) into a value.
    pub fn fold(&self, labels: &[Rational]) -> Rational {
        match self {
            ValuationKind::Sum => labels.iter().cloned().sum(),
            ValuationKind::DiscountedSum { gamma } => {
                let mut weight = Rational::one();
                let mut total = Rational::zero();
                for l in labels {
                    total = total + &weight * l;
                    weight = &weight * gamma;
                }
                total
            }
            ValuationKind::Product => labels.iter().cloned().product(),
            ValuationKind::Classification => labels.last().cloned().unwrap_or_else(Rational::zero),
        }
    }
}

/// A deterministic quantitative automaton with a total transition function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantitativeAutomaton {
    input: InputAlphabet,
    output: OutputAlphabet,
    state_names: Vec<String>,
    initial: usize,
    delta: Vec<Vec<usize>>,
    labels: Vec<Symbol>,
    valuation: ValuationKind,
}

impl QuantitativeAutomaton {
    /// Builds a machine from index-based parts. `delta[q][σ]` is the successor
    /// of state `q` under input symbol `σ`; `labels[q]` indexes `output`.
    pub fn new(
        input: InputAlphabet,
        output: OutputAlphabet,
        state_names: Vec<String>,
        initial: usize,
        delta: Vec<Vec<usize>>,
        labels: Vec<Symbol>,
        valuation: ValuationKind,
    ) -> Result<Self> {
        let n = state_names.len();
        if n == 0 {
            return Err(Error::InvalidAutomaton("no states".into()));
        }
        if initial >= n {
            return Err(Error::InvalidAutomaton("initial state out of range".into()));
        }
        if delta.len() != n || labels.len() != n {
            return Err(Error::InvalidAutomaton(
                "transition and label tables must have one row per state".into(),
            ));
        }
        for (q, row) in delta.iter().enumerate() {
            if row.len() != input.len() {
                return Err(Error::InvalidAutomaton(format!(
                    "partial transition function at state `{}`",
                    state_names[q]
                )));
            }
            if let Some(t) = row.iter().find(|&&t| t >= n) {
                return Err(Error::InvalidAutomaton(format!(
                    "transition from `{}` to unknown state #{t}",
                    state_names[q]
                )));
            }
        }
        if let Some(l) = labels.iter().find(|l| l.index() >= output.len()) {
            return Err(Error::InvalidAutomaton(format!(
                "label #{} is not an output symbol",
                l.0
            )));
        }
        if let ValuationKind::DiscountedSum { gamma } = &valuation {
            ValuationKind::discounted(gamma.clone())?;
        }
        if valuation == ValuationKind::Product && !output.all_positive() {
            return Err(Error::InvalidAutomaton(
                "product valuation requires positive output values".into(),
            ));
        }
        if let Some(id) = valuation.identity() {
            if output.value(labels[initial]) != &id {
                return Err(Error::InvalidAutomaton(format!(
                    "{} valuation requires the initial state to be labelled {id}",
                    valuation.name()
                )));
            }
        }
        Ok(QuantitativeAutomaton {
            input,
            output,
            state_names,
            initial,
            delta,
            labels,
            valuation,
        })
    }

    /// Convenience constructor: states named `q0…`, labels given as values
    /// that must belong to `output`.
    pub fn from_values(
        input: InputAlphabet,
        output: OutputAlphabet,
        delta: Vec<Vec<usize>>,
        label_values: &[Rational],
        valuation: ValuationKind,
    ) -> Result<Self> {
        let labels = label_values
            .iter()
            .map(|v| {
                output
                    .symbol_of_value(v)
                    .ok_or_else(|| Error::InvalidAutomaton(format!("label {v} not in Σᴼ")))
            })
            .collect::<Result<Vec<_>>>()?;
        let names = (0..delta.len()).map(|i| format!("q{i}")).collect();
        Self::new(input, output, names, 0, delta, labels, valuation)
    }

    pub fn input(&self) -> &InputAlphabet {
        &self.input
    }

    pub fn output(&self) -> &OutputAlphabet {
        &self.output
    }

    pub fn valuation(&self) -> &ValuationKind {
        &self.valuation
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.state_names[q]
    }

    pub fn successor(&self, q: usize, a: Symbol) -> usize {
        self.delta[q][a.index()]
    }

    pub fn label(&self, q: usize) -> Symbol {
        self.labels[q]
    }

    pub fn label_value(&self, q: usize) -> &Rational {
        self.output.value(self.labels[q])
    }

    /// State reached from the initial state by `s`.
    pub fn run(&self, s: &Sequence) -> Result<usize> {
        self.input.check(s)?;
        Ok(s
            .symbols()
            .iter()
            .fold(self.initial, |q, &a| self.successor(q, a)))
    }

    /// States visited by `s`, starting with the initial state.
    pub fn trace(&self, s: &Sequence) -> Result<Vec<usize>> {
        self.input.check(s)?;
        let mut q = self.initial;
        let mut out = Vec::with_capacity(s.len() + 1);
        out.push(q);
        for &a in s.symbols() {
            q = self.successor(q, a);
            out.push(q);
        }
        Ok(out)
    }

    /// Label values along the run of `s` (`|s| + 1` entries).
    pub fn output_sequence(&self, s: &Sequence) -> Result<Vec<Rational>> {
        Ok(self
            .trace(s)?
            .into_iter()
            .map(|q| self.label_value(q).clone())
            .collect())
    }

    /// Value of `s` under the machine's valuation.
    pub fn evaluate(&self, s: &Sequence) -> Result<Rational> {
        Ok(self.valuation.fold(&self.output_sequence(s)?))
    }

    /// States reachable from the initial state, in breadth-first order.
    pub fn reachable(&self) -> Vec<usize> {
        let mut seen = vec![false; self.num_states()];
        let mut order = vec![self.initial];
        seen[self.initial] = true;
        let mut i = 0;
        while i < order.len() {
            let q = order[i];
            for a in self.input.symbols() {
                let t = self.successor(q, a);
                if !seen[t] {
                    seen[t] = true;
                    order.push(t);
                }
            }
            i += 1;
        }
        order
    }

    pub(crate) fn delta_table(&self) -> &[Vec<usize>] {
        &self.delta
    }

    pub(crate) fn state_names(&self) -> &[String] {
        &self.state_names
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    fn seq(a: &QuantitativeAutomaton, s: &str) -> Sequence {
        a.input().parse(s).unwrap()
    }

    #[test]
    fn output_sequences_follow_delta() {
        let g2 = g2();
        let two = Rational::from_integer(2);
        assert_eq!(g2.output_sequence(&seq(&g2, "")).unwrap(), vec![Rational::zero()]);
        assert_eq!(
            g2.output_sequence(&seq(&g2, "ab")).unwrap(),
            vec![Rational::zero(), two.clone(), Rational::zero()]
        );
        assert_eq!(
            g2.output_sequence(&seq(&g2, "aa")).unwrap(),
            vec![Rational::zero(), two.clone(), two]
        );
    }

    #[test]
    fn evaluate_each_valuation() {
        let g2 = g2();
        assert_eq!(g2.evaluate(&seq(&g2, "aa")).unwrap(), Rational::from_integer(4));
        let g4 = g4();
        assert_eq!(g4.evaluate(&seq(&g4, "aaa")).unwrap(), Rational::new(5, 4));
        let g3 = g3();
        assert_eq!(g3.evaluate(&seq(&g3, "aa")).unwrap(), Rational::new(1, 4));
        let g1 = g1();
        assert_eq!(g1.evaluate(&seq(&g1, "aa")).unwrap(), Rational::zero());
    }

    #[test]
    fn foreign_symbol_is_rejected() {
        let g1 = g1();
        assert!(g1.evaluate(&Sequence::from_indices(&[1])).is_err());
    }

    #[test]
    fn identity_label_is_enforced() {
        let r = QuantitativeAutomaton::from_values(
            InputAlphabet::new(["a"]).unwrap(),
            OutputAlphabet::from_values([Rational::zero(), Rational::one()]).unwrap(),
            vec![vec![0]],
            &[Rational::one()],
            ValuationKind::Sum,
        );
        assert!(r.is_err());
    }

    #[test]
    fn gamma_range_is_enforced() {
        assert!(ValuationKind::discounted(Rational::one()).is_err());
        assert!(ValuationKind::discounted(Rational::zero()).is_err());
        assert!(ValuationKind::discounted(Rational::new(9, 10)).is_ok());
    }

    /// The recursive definition: Val(ε) = T(ε); Val(s·σ) = γ^{|s·σ|}·T(s·σ) + Val(s)
    /// (γ = 1 for sums), Val(s·σ) = T(s·σ)·Val(s) for products, Val(s) = T(s)
    /// for classification.
    fn recursive_val(kind: &ValuationKind, labels: &[Rational]) -> Rational {
        let mut val = labels[0].clone();
        for (i, t) in labels.iter().enumerate().skip(1) {
            val = match kind {
                ValuationKind::Sum => t + &val,
                ValuationKind::DiscountedSum { gamma } => &(&gamma.pow(i as i32) * t) + &val,
                ValuationKind::Product => t * &val,
                ValuationKind::Classification => t.clone(),
            };
        }
        val
    }

    fn machine_strategy() -> impl Strategy<Value = (QuantitativeAutomaton, Vec<u32>)> {
        (1usize..5, 1usize..4, 0usize..4).prop_flat_map(|(n, k, kind)| {
            let delta = proptest::collection::vec(proptest::collection::vec(0..n, k), n);
            let labels = proptest::collection::vec(0usize..3, n);
            let word = proptest::collection::vec(0..k as u32, 0..9);
            (delta, labels, word).prop_map(move |(delta, labels, word)| {
                let names: Vec<String> = (0..k).map(|i| format!("s{i}")).collect();
                let input = InputAlphabet::new(names).unwrap();
                let (values, valuation) = match kind {
                    0 => (vec![0, 1, 3], ValuationKind::Sum),
                    1 => (
                        vec![0, -1, 2],
                        ValuationKind::discounted(Rational::new(1, 3)).unwrap(),
                    ),
                    2 => (vec![1, 2, 5], ValuationKind::Product),
                    _ => (vec![0, 1, 2], ValuationKind::Classification),
                };
                let values: Vec<Rational> = values
                    .into_iter()
                    .map(|v| {
                        if kind == 2 && v == 5 {
                            Rational::new(1, 2)
                        } else {
                            Rational::from_integer(v)
                        }
                    })
                    .collect();
                let output = OutputAlphabet::from_values(values.clone()).unwrap();
                let mut label_vals: Vec<Rational> =
                    labels.iter().map(|&l| values[l].clone()).collect();
                label_vals[0] = values[0].clone();
                let a = QuantitativeAutomaton::from_values(input, output, delta, &label_vals, valuation)
                    .unwrap();
                (a, word)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn closed_form_matches_recursion((a, word) in machine_strategy()) {
            let s = Sequence::from_indices(&word);
            let labels = a.output_sequence(&s).unwrap();
            prop_assert_eq!(a.evaluate(&s).unwrap(), recursive_val(a.valuation(), &labels));
        }
    }
}
