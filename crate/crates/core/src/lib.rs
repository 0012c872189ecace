//! Active learning of minimal deterministic quantitative automata.
//!
//! A learner asks a teacher two kinds of questions: which of two input
//! sequences it prefers, and whether a candidate machine is correct. From the
//! answers it builds a symbolic observation table whose cells are variables,
//! conjectures which variables are equal with a finite-domain MaxSMT search,
//! and backtracks over conjectures under an iterative-deepening budget until
//! the teacher accepts a hypothesis.
//!
//! Module map:
//!
//! - [`rational`], [`alphabet`]: exact values, symbols and sequences.
//! - [`automaton`]: machines, valuations, minimization, equivalence, file format.
//! - [`teacher`]: simulated, interactive and replaying teachers.
//! - [`table`]: the symbolic observation table.
//! - [`inference`]: value expressions, gathered constraints, relation inference.
//! - [`solver`]: the exact finite-domain solver with VE and CC objectives.
//! - [`learner`]: the learning loop, plus the REMAP baseline.
//! - [`bench`]: experiment matrices, aggregation and report emission.

pub mod alphabet;
pub mod automaton;
pub mod bench;
pub mod error;
pub mod inference;
pub mod learner;
pub mod rational;
pub mod solver;
pub mod table;
pub mod teacher;

pub use alphabet::{InputAlphabet, OutputAlphabet, Sequence, Symbol};
pub use automaton::{QuantitativeAutomaton, ValuationKind};
pub use learner::{run_quintic, run_remap, FinalResult, LearnerConfig, Outcome, RunMetrics, Variant};
pub use error::{Error, ParseError, Result};
pub use rational::Rational;
