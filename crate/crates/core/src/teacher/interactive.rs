//! Console teacher.
//!
//! Preference prompt, answered with `>`, `<` or `=`:
//!
//! ```text
//! pref? aa ab [>,<,=]:
//! ```
//!
//! Equivalence prompt, answered with `ok` or `cex <seq> <value>`, where the
//! value is the teacher's value of the counterexample (optional in weak mode):
//!
//! ```text
//! equiv? hypothesis written to /tmp/h3.dot [ok | cex <seq> <value>]:
//! ```

use std::io::{BufRead, Write};
use std::path::PathBuf;

use super::{check_compatible, EquivalenceAnswer, FeedbackMode, PreferenceAnswer, QueryLog, Teacher};
use crate::alphabet::{InputAlphabet, OutputAlphabet, Sequence};
use crate::automaton::{to_dot, QuantitativeAutomaton, ValuationKind};
use crate::error::{Error, Result};
use crate::rational::Rational;

pub struct InteractiveTeacher<R, W> {
    input: InputAlphabet,
    output: OutputAlphabet,
    valuation: ValuationKind,
    reader: R,
    writer: W,
    log: QueryLog,
    max_retries: usize,
    dot_dir: Option<PathBuf>,
}

impl<R: BufRead, W: Write> InteractiveTeacher<R, W> {
    pub fn new(
        input: InputAlphabet,
        output: OutputAlphabet,
        valuation: ValuationKind,
        reader: R,
        writer: W,
    ) -> Self {
        InteractiveTeacher {
            input,
            output,
            valuation,
            reader,
            writer,
            log: QueryLog::new(),
            max_retries: 3,
            dot_dir: None,
        }
    }

    /// Number of malformed answers tolerated per question.
    pub fn with_max_retries(mut self, n: usize) -> Self {
        self.max_retries = n;
        self
    }

    /// Write hypotheses as DOT files into `dir` instead of printing them.
    pub fn with_dot_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.dot_dir = Some(dir.into());
        self
    }

    fn read_line(&mut self) -> Result<String> {
        let mut line = String::new();
        if self.reader.read_line(&mut line)? == 0 {
            return Err(Error::Teacher("input closed".into()));
        }
        Ok(line.trim().to_string())
    }

    /// Prompts until `parse` accepts the answer or the retries run out.
    fn ask<T>(
        &mut self,
        prompt: &str,
        mut parse: impl FnMut(&Self, &str) -> std::result::Result<T, String>,
    ) -> Result<T> {
        for _ in 0..=self.max_retries {
            write!(self.writer, "{prompt}")?;
            self.writer.flush()?;
            let line = self.read_line()?;
            match parse(self, &line) {
                Ok(v) => return Ok(v),
                Err(msg) => writeln!(self.writer, "invalid answer: {msg}")?,
            }
        }
        Err(Error::Teacher(format!(
            "no valid answer after {} attempts",
            self.max_retries + 1
        )))
    }

    fn parse_equiv(
        &self,
        line: &str,
        hypothesis: &QuantitativeAutomaton,
        mode: FeedbackMode,
    ) -> std::result::Result<EquivalenceAnswer, String> {
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            ["ok"] => Ok(EquivalenceAnswer::accepted()),
            ["cex", seq, rest @ ..] if rest.len() <= 1 => {
                let c = self.input.parse(seq).map_err(|e| e.to_string())?;
                let value = match (rest.first(), mode) {
                    (Some(v), _) => v.parse::<Rational>().map_err(|e| e.to_string())?,
                    (None, FeedbackMode::Weak) => Rational::zero(),
                    (None, FeedbackMode::Strong) => {
                        return Err("strong feedback needs the value of the counterexample".into())
                    }
                };
                EquivalenceAnswer::refuted(c, value, hypothesis, mode).map_err(|e| e.to_string())
            }
            _ => Err("expected `ok` or `cex <seq> <value>`".into()),
        }
    }
}

impl<R: BufRead, W: Write> Teacher for InteractiveTeacher<R, W> {
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
        self.input.check(s1)?;
        self.input.check(s2)?;
        if let Some(a) = self.log.cached(s1, s2) {
            return Ok(a);
        }
        let prompt = format!(
            "pref? {} {} [>,<,=]: ",
            self.input.format(s1),
            self.input.format(s2)
        );
        let answer = self.ask(&prompt, |_, line| {
            PreferenceAnswer::parse(line).ok_or_else(|| "expected one of > < =".to_string())
        })?;
        self.log.pref(s1, s2, || Ok(answer))
    }

    fn equiv_query(
        &mut self,
        hypothesis: &QuantitativeAutomaton,
        mode: FeedbackMode,
    ) -> Result<EquivalenceAnswer> {
        check_compatible(self, hypothesis)?;
        self.log.equiv_count += 1;
        let dot = to_dot(hypothesis);
        let shown = match &self.dot_dir {
            Some(dir) => {
                let path = dir.join(format!("h{}.dot", self.log.equiv_count));
                std::fs::write(&path, &dot)?;
                format!("hypothesis written to {}", path.display())
            }
            None => {
                writeln!(self.writer, "{dot}")?;
                "hypothesis above".to_string()
            }
        };
        let prompt = format!("equiv? {shown} [ok | cex <seq> <value>]: ");
        self.ask(&prompt, |t, line| t.parse_equiv(line, hypothesis, mode))
    }

    fn log(&self) -> &QueryLog {
        &self.log
    }
}
