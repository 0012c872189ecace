//! Automaton files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "valuation": { "kind": "discounted_sum", "gamma": "1/2" },
//!   "input_alphabet": ["a", "b"],
//!   "output_alphabet": { "zero": "0/1", "two": "2/1" },
//!   "states": ["q0", "q1"],
//!   "initial": "q0",
//!   "labels": { "q0": "zero", "q1": "two" },
//!   "transitions": { "q0": { "a": "q1", "b": "q0" }, "q1": { "a": "q1", "b": "q0" } }
//! }
//! ```
//!
//! `kind` is one of `sum`, `discounted_sum`, `product`, `classification`.
//! Values are `n/d` strings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{QuantitativeAutomaton, ValuationKind};
use crate::alphabet::{InputAlphabet, OutputAlphabet};
use crate::error::{Error, ParseError, Result};
use crate::rational::Rational;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValuationSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Rational>,
}

/// Serde mirror of the file layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonFile {
    pub version: u32,
    pub valuation: ValuationSpec,
    pub input_alphabet: Vec<String>,
    pub output_alphabet: BTreeMap<String, Rational>,
    pub states: Vec<String>,
    pub initial: String,
    pub labels: BTreeMap<String, String>,
    pub transitions: BTreeMap<String, BTreeMap<String, String>>,
}

fn err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse(ParseError::new(location, message))
}

impl AutomatonFile {
    pub fn from_automaton(a: &QuantitativeAutomaton) -> Self {
        let names = a.state_names();
        let input = a.input();
        AutomatonFile {
            version: FORMAT_VERSION,
            valuation: ValuationSpec {
                kind: a.valuation().name().to_string(),
                gamma: match a.valuation() {
                    ValuationKind::DiscountedSum { gamma } => Some(gamma.clone()),
                    _ => None,
                },
            },
            input_alphabet: input.names().to_vec(),
            output_alphabet: a
                .output()
                .entries()
                .map(|(n, v)| (n.to_string(), v.clone()))
                .collect(),
            states: names.to_vec(),
            initial: names[a.initial()].clone(),
            labels: (0..a.num_states())
                .map(|q| (names[q].clone(), a.output().name(a.label(q)).to_string()))
                .collect(),
            transitions: (0..a.num_states())
                .map(|q| {
                    let row = input
                        .symbols()
                        .map(|s| (input.name(s).to_string(), names[a.successor(q, s)].clone()))
                        .collect();
                    (names[q].clone(), row)
                })
                .collect(),
        }
    }

    pub fn into_automaton(self) -> Result<QuantitativeAutomaton> {
        if self.version != FORMAT_VERSION {
            return Err(err(
                "version",
                format!("unsupported version {} (expected {FORMAT_VERSION})", self.version),
            ));
        }
        let valuation = match (self.valuation.kind.as_str(), self.valuation.gamma) {
            ("sum", None) => ValuationKind::Sum,
            ("product", None) => ValuationKind::Product,
            ("classification", None) => ValuationKind::Classification,
            ("discounted_sum", Some(g)) => {
                ValuationKind::discounted(g).map_err(|e| err("valuation.gamma", e.to_string()))?
            }
            ("discounted_sum", None) => {
                return Err(err("valuation", "discounted_sum requires gamma"));
            }
            (k @ ("sum" | "product" | "classification"), Some(_)) => {
                return Err(err("valuation.gamma", format!("{k} takes no gamma")));
            }
            (k, _) => return Err(err("valuation.kind", format!("unknown valuation `{k}`"))),
        };
        let input = InputAlphabet::new(self.input_alphabet.clone())
            .map_err(|e| err("input_alphabet", e.to_string()))?;
        let output = OutputAlphabet::new(self.output_alphabet.clone())
            .map_err(|e| err("output_alphabet", e.to_string()))?;
        if self.states.is_empty() {
            return Err(err("states", "no states"));
        }
        let index = |name: &str, loc: &str| -> Result<usize> {
            self.states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| err(loc.to_string(), format!("unknown state `{name}`")))
        };
        for (i, s) in self.states.iter().enumerate() {
            if self.states[..i].contains(s) {
                return Err(err(format!("states[{i}]"), format!("duplicate state `{s}`")));
            }
        }
        let initial = index(&self.initial, "initial")?;
        let mut labels = Vec::with_capacity(self.states.len());
        let mut delta = Vec::with_capacity(self.states.len());
        for q in &self.states {
            let l = self
                .labels
                .get(q)
                .ok_or_else(|| err(format!("labels.{q}"), "missing label"))?;
            let sym = output
                .symbol(l)
                .map_err(|_| err(format!("labels.{q}"), format!("label `{l}` is not in Σᴼ")))?;
            labels.push(sym);

            let row = self.transitions.get(q).ok_or_else(|| {
                err(
                    format!("transitions.{q}"),
                    "partial transition function: state has no transitions",
                )
            })?;
            for sym in row.keys() {
                if input.symbol(sym).is_err() {
                    return Err(err(
                        format!("transitions.{q}.{sym}"),
                        format!("unknown input symbol `{sym}`"),
                    ));
                }
            }
            let mut out = Vec::with_capacity(input.len());
            for a in input.names() {
                let t = row.get(a).ok_or_else(|| {
                    err(
                        format!("transitions.{q}"),
                        format!("partial transition function: missing symbol `{a}`"),
                    )
                })?;
                out.push(index(t, &format!("transitions.{q}.{a}"))?);
            }
            delta.push(out);
        }
        for q in self.labels.keys() {
            if !self.states.contains(q) {
                return Err(err(format!("labels.{q}"), format!("unknown state `{q}`")));
            }
        }
        for q in self.transitions.keys() {
            if !self.states.contains(q) {
                return Err(err(format!("transitions.{q}"), format!("unknown state `{q}`")));
            }
        }
        QuantitativeAutomaton::new(input, output, self.states, initial, delta, labels, valuation)
            .map_err(|e| err("automaton", e.to_string()))
    }
}

/// Parses an automaton file.
pub fn parse(text: &str) -> Result<QuantitativeAutomaton> {
    let file: AutomatonFile = serde_json::from_str(text).map_err(|e| {
        err(
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    file.into_automaton()
}

/// Pretty-printed JSON with a trailing newline.
pub fn serialize(a: &QuantitativeAutomaton) -> String {
    let mut s = serde_json::to_string_pretty(&AutomatonFile::from_automaton(a))
        .expect("automaton file serializes");
    s.push('\n');
    s
}

/// Graphviz rendering; each state is annotated `name / label`.
pub fn to_dot(a: &QuantitativeAutomaton) -> String {
    let mut out = String::from("digraph automaton {\n  rankdir=LR;\n  __start [shape=point];\n");
    let _ = writeln!(out, "  __start -> \"{}\";", a.state_name(a.initial()));
    for q in 0..a.num_states() {
        let _ = writeln!(
            out,
            "  \"{}\" [shape=circle, label=\"{} / {}\"];",
            a.state_name(q),
            a.state_name(q),
            a.output().name(a.label(q))
        );
    }
    for q in 0..a.num_states() {
        // group parallel edges into one labelled arrow
        let mut edges: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
        for s in a.input().symbols() {
            edges.entry(a.successor(q, s)).or_default().push(a.input().name(s));
        }
        for (t, syms) in edges {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{}\"];",
                a.state_name(q),
                a.state_name(t),
                syms.join(",")
            );
        }
    }
    out.push_str("}\n");
    out
}
