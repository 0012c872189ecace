//! Session files: one query and its answer per line, tab separated.
//!
//! ```text
//! pref	aa	ab	>
//! equiv	cex	ab	=	2
//! equiv	ok
//! ```
//!
//! An `equiv cex` line stores the feedback relation and value as given. A
//! strong (`=`) record can be replayed in either mode; a weak (`!=`) record
//! only in weak mode.

#![allow(clippy::tabs_in_doc_comments)]

use std::collections::{HashMap, VecDeque};
use std::io::Write;

use super::{
    EquivalenceAnswer, Feedback, FeedbackMode, FeedbackRelation, PreferenceAnswer, QueryLog,
    Teacher,
};
use crate::alphabet::{InputAlphabet, OutputAlphabet, Sequence};
use crate::automaton::{QuantitativeAutomaton, ValuationKind};
use crate::error::{Error, ParseError, Result};

/// Wraps a teacher and writes every fresh query with its answer.
pub struct Recorder<T, W> {
    inner: T,
    out: W,
}

impl<T: Teacher, W: Write> Recorder<T, W> {
    pub fn new(inner: T, out: W) -> Self {
        Recorder { inner, out }
    }

    pub fn into_parts(self) -> (T, W) {
        (self.inner, self.out)
    }
}

impl<T: Teacher, W: Write> Teacher for Recorder<T, W> {
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
        let before = self.inner.log().pref_count;
        let answer = self.inner.pref_query(s1, s2)?;
        if self.inner.log().pref_count > before {
            let input = self.inner.input();
            writeln!(
                self.out,
                "pref\t{}\t{}\t{}",
                input.format(s1),
                input.format(s2),
                answer
            )?;
        }
        Ok(answer)
    }

    fn equiv_query(
        &mut self,
        hypothesis: &QuantitativeAutomaton,
        mode: FeedbackMode,
    ) -> Result<EquivalenceAnswer> {
        let answer = self.inner.equiv_query(hypothesis, mode)?;
        match (&answer.counterexample, &answer.feedback) {
            (Some(c), Some(f)) => writeln!(
                self.out,
                "equiv\tcex\t{}\t{}\t{}",
                self.inner.input().format(c),
                f.relation,
                f.value
            )?,
            _ => writeln!(self.out, "equiv\tok")?,
        }
        Ok(answer)
    }

    fn log(&self) -> &QueryLog {
        self.inner.log()
    }
}

#[derive(Clone, Debug)]
enum RecordedEquiv {
    Ok,
    Cex(Sequence, Feedback),
}

/// Deterministic teacher answering from a session file. Preference answers
/// are looked up by pair; equivalence answers are consumed in order.
#[derive(Clone, Debug)]
pub struct ReplayTeacher {
    input: InputAlphabet,
    output: OutputAlphabet,
    valuation: ValuationKind,
    prefs: HashMap<(Sequence, Sequence), PreferenceAnswer>,
    equivs: VecDeque<RecordedEquiv>,
    log: QueryLog,
}

impl ReplayTeacher {
    pub fn parse(
        text: &str,
        input: InputAlphabet,
        output: OutputAlphabet,
        valuation: ValuationKind,
    ) -> Result<Self> {
        let mut prefs = HashMap::new();
        let mut equivs = VecDeque::new();
        for (i, line) in text.lines().enumerate() {
            let loc = || format!("line {}", i + 1);
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let bad = |m: &str| Error::Parse(ParseError::new(loc(), m));
            match fields.as_slice() {
                ["pref", s1, s2, a] => {
                    let s1 = input.parse(s1).map_err(|e| bad(&e.to_string()))?;
                    let s2 = input.parse(s2).map_err(|e| bad(&e.to_string()))?;
                    let a = PreferenceAnswer::parse(a).ok_or_else(|| bad("answer must be > < ="))?;
                    prefs.insert((s2.clone(), s1.clone()), a.flip());
                    prefs.insert((s1, s2), a);
                }
                ["equiv", "ok"] => equivs.push_back(RecordedEquiv::Ok),
                ["equiv", "cex", c, rel, v] => {
                    let c = input.parse(c).map_err(|e| bad(&e.to_string()))?;
                    let relation = match *rel {
                        "=" => FeedbackRelation::Eq,
                        "!=" => FeedbackRelation::Ne,
                        _ => return Err(bad("relation must be = or !=")),
                    };
                    let value = v.parse().map_err(|e: Error| bad(&e.to_string()))?;
                    equivs.push_back(RecordedEquiv::Cex(c, Feedback { relation, value }));
                }
                _ => return Err(bad("unrecognized record")),
            }
        }
        Ok(ReplayTeacher {
            input,
            output,
            valuation,
            prefs,
            equivs,
            log: QueryLog::new(),
        })
    }
}

impl Teacher for ReplayTeacher {
    fn input(&self) -> &InputAlphabet {
        &self.input
    }

    fn output(&self) -> &OutputAlphabet {
        &self.output
    }

    fn valuation(&self) -> &ValuationKind {
        &self.valuation
    }

    fn pref_query(&mut self, s1: &Sequence, s2: &Sequence) -> Result<PreferenceAnswer> {
        let prefs = &self.prefs;
        let input = &self.input;
        self.log.pref(s1, s2, || {
            prefs.get(&(s1.clone(), s2.clone())).copied().ok_or_else(|| {
                Error::Teacher(format!(
                    "no recorded answer for pref {} {}",
                    input.format(s1),
                    input.format(s2)
                ))
            })
        })
    }

    fn equiv_query(
        &mut self,
        hypothesis: &QuantitativeAutomaton,
        mode: FeedbackMode,
    ) -> Result<EquivalenceAnswer> {
        super::check_compatible(self, hypothesis)?;
        self.log.equiv_count += 1;
        match self.equivs.pop_front() {
            None => Err(Error::Teacher("session has no more equivalence answers".into())),
            Some(RecordedEquiv::Ok) => Ok(EquivalenceAnswer::accepted()),
            Some(RecordedEquiv::Cex(c, f)) => match (f.relation, mode) {
                (FeedbackRelation::Eq, _) => EquivalenceAnswer::refuted(c, f.value, hypothesis, mode),
                (FeedbackRelation::Ne, FeedbackMode::Weak) => Ok(EquivalenceAnswer {
                    correct: false,
                    counterexample: Some(c),
                    feedback: Some(f),
                }),
                (FeedbackRelation::Ne, FeedbackMode::Strong) => Err(Error::Teacher(
                    "recorded weak feedback cannot answer a strong query".into(),
                )),
            },
        }
    }

    fn log(&self) -> &QueryLog {
        &self.log
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::fixtures::*;
    use crate::teacher::SimulatedTeacher;

    #[test]
    fn record_then_replay() {
        let g = g2();
        let mut rec = Recorder::new(SimulatedTeacher::new(g.clone()), Vec::new());
        let aa = g.input().parse("aa").unwrap();
        let ab = g.input().parse("ab").unwrap();
        rec.pref_query(&aa, &ab).unwrap();
        rec.pref_query(&ab, &aa).unwrap();
        let wrong = QuantitativeAutomaton::from_values(
            g.input().clone(),
            g.output().clone(),
            vec![vec![0, 0]],
            &[crate::Rational::zero()],
            ValuationKind::Sum,
        )
        .unwrap();
        rec.equiv_query(&wrong, FeedbackMode::Strong).unwrap();
        rec.equiv_query(&g, FeedbackMode::Strong).unwrap();
        let (_, out) = rec.into_parts();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "pref\taa\tab\t>\nequiv\tcex\ta\t=\t2/1\nequiv\tok\n");

        let mut replay =
            ReplayTeacher::parse(&text, g.input().clone(), g.output().clone(), ValuationKind::Sum)
                .unwrap();
        assert_eq!(replay.pref_query(&ab, &aa).unwrap(), PreferenceAnswer::Less);
        let weak = replay.equiv_query(&wrong, FeedbackMode::Weak).unwrap();
        assert_eq!(weak.feedback.unwrap().relation, FeedbackRelation::Ne);
        assert!(replay.equiv_query(&g, FeedbackMode::Strong).unwrap().correct);
        assert!(replay.equiv_query(&g, FeedbackMode::Strong).is_err());
        assert!(replay.pref_query(&aa, &Sequence::empty()).is_err());
    }

    #[test]
    fn bad_line_reports_location() {
        let g = g2();
        let e = ReplayTeacher::parse(
            "pref\ta\tb\t>\npref\ta\tb\n",
            g.input().clone(),
            g.output().clone(),
            ValuationKind::Sum,
        )
        .unwrap_err()
        .to_string();
        assert!(e.contains("line 2"), "{e}");
    }
}
