//! Teachers answer preference and equivalence queries about a hidden target.
//!
//! [`SimulatedTeacher`] evaluates a known machine. [`InteractiveTeacher`]
//! forwards the questions to a person on a console, [`ReplayTeacher`] answers
//! from a recorded session and [`Recorder`] writes such a session.

mod interactive;
mod replay;

use std::collections::HashMap;
use std::fmt;

pub use interactive::InteractiveTeacher;
pub use replay::{Recorder, ReplayTeacher};

use crate::alphabet::{InputAlphabet, OutputAlphabet, Sequence};
use crate::automaton::{check_label_equivalence, QuantitativeAutomaton, ValuationKind};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Sign of `V(s1) − V(s2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PreferenceAnswer {
    Less = -1,
    Equal = 0,
    Greater = 1,
}

impl PreferenceAnswer {
    pub fn from_sign(sign: i8) -> Self {
        match sign.signum() {
            1 => PreferenceAnswer::Greater,
            0 => PreferenceAnswer::Equal,
            _ => PreferenceAnswer::Less,
        }
    }

    pub fn compare(a: &Rational, b: &Rational) -> Self {
        match a.cmp(b) {
            std::cmp::Ordering::Less => PreferenceAnswer::Less,
            std::cmp::Ordering::Equal => PreferenceAnswer::Equal,
            std::cmp::Ordering::Greater => PreferenceAnswer::Greater,
        }
    }

    pub fn value(self) -> i8 {
        self as i8
    }

    pub fn flip(self) -> Self {
        Self::from_sign(-self.value())
    }

    pub fn symbol(self) -> &'static str {
        match self {
            PreferenceAnswer::Less => "<",
            PreferenceAnswer::Equal => "=",
            PreferenceAnswer::Greater => ">",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text.trim() {
            ">" => Some(PreferenceAnswer::Greater),
            "<" => Some(PreferenceAnswer::Less),
            "=" => Some(PreferenceAnswer::Equal),
            _ => None,
        }
    }
}

impl fmt::Display for PreferenceAnswer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum FeedbackMode {
    /// The counterexample comes with its true value: `Val(c) = V(c)`.
    Strong,
    /// The counterexample only refutes the hypothesis value: `Val(c) ≠ H(c)`.
    Weak,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeedbackRelation {
    Eq,
    Ne,
}

impl fmt::Display for FeedbackRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeedbackRelation::Eq => "=",
            FeedbackRelation::Ne => "!=",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Feedback {
    pub relation: FeedbackRelation,
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceAnswer {
    pub correct: bool,
    pub counterexample: Option<Sequence>,
    pub feedback: Option<Feedback>,
}

impl EquivalenceAnswer {
    pub fn accepted() -> Self {
        EquivalenceAnswer {
            correct: true,
            counterexample: None,
            feedback: None,
        }
    }

    /// Packages a counterexample with feedback of the requested strength.
    /// `true_value` is `V(c)`; the weak form uses the hypothesis value instead.
    pub fn refuted(
        c: Sequence,
        true_value: Rational,
        hypothesis: &QuantitativeAutomaton,
        mode: FeedbackMode,
    ) -> Result<Self> {
        let feedback = match mode {
            FeedbackMode::Strong => Feedback {
                relation: FeedbackRelation::Eq,
                value: true_value,
            },
            FeedbackMode::Weak => Feedback {
                relation: FeedbackRelation::Ne,
                value: hypothesis.evaluate(&c)?,
            },
        };
        Ok(EquivalenceAnswer {
            correct: false,
            counterexample: Some(c),
            feedback: Some(feedback),
        })
    }
}

/// Query counters and the preference cache shared by all teachers.
#[derive(Clone, Debug, Default)]
pub struct QueryLog {
    pub pref_count: usize,
    pub equiv_count: usize,
    pref_cache: HashMap<(Sequence, Sequence), PreferenceAnswer>,
}

impl QueryLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Cached answer for `(s1, s2)`, using antisymmetry for the swapped pair.
    pub fn cached(&self, s1: &Sequence, s2: &Sequence) -> Option<PreferenceAnswer> {
        if s1 == s2 {
            return Some(PreferenceAnswer::Equal);
        }
        if s1 < s2 {
            self.pref_cache.get(&(s1.clone(), s2.clone())).copied()
        } else {
            self.pref_cache
                .get(&(s2.clone(), s1.clone()))
                .map(|a| a.flip())
        }
    }

    /// Returns the cached answer or calls `ask` once and records the result.
    /// Identical sequences are answered `Equal` without asking or counting.
    pub fn pref(
        &mut self,
        s1: &Sequence,
        s2: &Sequence,
        ask: impl FnOnce() -> Result<PreferenceAnswer>,
    ) -> Result<PreferenceAnswer> {
        if let Some(a) = self.cached(s1, s2) {
            return Ok(a);
        }
        let answer = ask()?;
        self.pref_count += 1;
        if s1 < s2 {
            self.pref_cache.insert((s1.clone(), s2.clone()), answer);
        } else {
            self.pref_cache.insert((s2.clone(), s1.clone()), answer.flip());
        }
        Ok(answer)
    }

    /// All cached pairs as `(s1, s2, answer)` with `s1 < s2`, length-lex sorted.
    pub fn entries(&self) -> Vec<(Sequence, Sequence, PreferenceAnswer)> {
        let mut v: Vec<_> = self
            .pref_cache
            .iter()
            .map(|((a, b), x)| (a.clone(), b.clone(), *x))
            .collect();
        v.sort();
        v
    }
}

/// What a learner may ask.
pub trait Teacher {
    fn input(&self) -> &InputAlphabet;
    fn output(&self) -> &OutputAlphabet;
    fn valuation(&self) -> &ValuationKind;
    fn pref_query(&mut self, s1: &Sequence, s2: &Sequence) -> Result<PreferenceAnswer>;
    fn equiv_query(
        &mut self,
        hypothesis: &QuantitativeAutomaton,
        mode: FeedbackMode,
    ) -> Result<EquivalenceAnswer>;
    fn log(&self) -> &QueryLog;
}

/// Checks that a hypothesis is over the same alphabets and valuation.
pub(crate) fn check_compatible(
    teacher: &dyn Teacher,
    hypothesis: &QuantitativeAutomaton,
) -> Result<()> {
    if hypothesis.input() != teacher.input() {
        return Err(Error::AlphabetMismatch(
            "hypothesis input alphabet differs from the teacher's".into(),
        ));
    }
    if hypothesis.output().sorted_values() != teacher.output().sorted_values() {
        return Err(Error::AlphabetMismatch(
            "hypothesis output alphabet differs from the teacher's".into(),
        ));
    }
    if !hypothesis.valuation().same_as(teacher.valuation()) {
        return Err(Error::ValuationMismatch(format!(
            "{} vs {}",
            hypothesis.valuation().name(),
            teacher.valuation().name()
        )));
    }
    Ok(())
}

/// Answers from a hidden target machine. Values are computed with
/// [`QuantitativeAutomaton::evaluate`]; the structure is never revealed.
#[derive(Clone, Debug)]
pub struct SimulatedTeacher {
    target: QuantitativeAutomaton,
    log: QueryLog,
}

impl SimulatedTeacher {
    pub fn new(target: QuantitativeAutomaton) -> Self {
        SimulatedTeacher {
            target,
            log: QueryLog::new(),
        }
    }

    /// The hidden machine. Only for instrumentation and tests.
    pub fn target(&self) -> &QuantitativeAutomaton {
        &self.target
    }
}

impl Teacher for SimulatedTeacher {
    fn input(&self) -> &InputAlphabet {
        self.target.input()
    }

    fn output(&self) -> &OutputAlphabet {
        self.target.output()
    }

    fn valuation(&self) -> &ValuationKind {
        self.target.valuation()
    }

    fn pref_query(&mut self, s1: &Sequence, s2: &Sequence) -> Result<PreferenceAnswer> {
        let target = &self.target;
        self.log.pref(s1, s2, || {
            Ok(PreferenceAnswer::compare(
                &target.evaluate(s1)?,
                &target.evaluate(s2)?,
            ))
        })
    }

    fn equiv_query(
        &mut self,
        hypothesis: &QuantitativeAutomaton,
        mode: FeedbackMode,
    ) -> Result<EquivalenceAnswer> {
        check_compatible(self, hypothesis)?;
        self.log.equiv_count += 1;
        match check_label_equivalence(&self.target, hypothesis)? {
            None => Ok(EquivalenceAnswer::accepted()),
            Some(cex) => {
                EquivalenceAnswer::refuted(cex.sequence, cex.target_value, hypothesis, mode)
            }
        }
    }

    fn log(&self) -> &QueryLog {
        &self.log
    }
}
