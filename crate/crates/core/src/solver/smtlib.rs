//! SMT-LIB v2 dump of a solver state, for differential testing against an
//! external solver. Domains become disjunctions, blocks and nogoods become
//! negated conjunctions, and unknown pairs become `assert-soft` terms.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::Solver;
use crate::inference::{Constraint, Relation, ValExpr};
use crate::rational::Rational;
use crate::table::VarId;

fn num(r: &Rational) -> String {
    let abs = r.abs();
    let body = if abs.denominator().to_string() == "1" {
        format!("{}.0", abs.numerator())
    } else {
        format!("(/ {}.0 {}.0)", abs.numerator(), abs.denominator())
    };
    if r.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

fn expr(e: &ValExpr) -> String {
    match e {
        ValExpr::Linear { terms, constant } => {
            let mut parts: Vec<String> = terms
                .iter()
                .map(|(v, c)| if c.is_one() { v.to_string() } else { format!("(* {} {v})", num(c)) })
                .collect();
            if !constant.is_zero() || parts.is_empty() {
                parts.push(num(constant));
            }
            if parts.len() == 1 {
                parts.pop().expect("one part")
            } else {
                format!("(+ {})", parts.join(" "))
            }
        }
        ValExpr::Monomial { coeff, powers } => {
            let mut parts: Vec<String> = Vec::new();
            if !coeff.is_one() || powers.is_empty() {
                parts.push(num(coeff));
            }
            for (v, p) in powers {
                for _ in 0..*p {
                    parts.push(v.to_string());
                }
            }
            if parts.len() == 1 {
                parts.pop().expect("one part")
            } else {
                format!("(* {})", parts.join(" "))
            }
        }
    }
}

pub fn constraint(c: &Constraint) -> String {
    let (l, r) = (expr(&c.lhs), expr(&c.rhs));
    match c.relation {
        Relation::Lt => format!("(< {l} {r})"),
        Relation::Eq => format!("(= {l} {r})"),
        Relation::Gt => format!("(> {l} {r})"),
        Relation::Ne => format!("(not (= {l} {r}))"),
    }
}

fn conj(parts: Vec<String>) -> String {
    match parts.len() {
        0 => "true".into(),
        1 => parts.into_iter().next().expect("one part"),
        _ => format!("(and {})", parts.join(" ")),
    }
}

impl Solver {
    /// The hard constraints active for a solve over `vars`, plus one soft
    /// equality per unknown pair.
    pub fn to_smtlib(&self, vars: &[VarId], unknown: &[(VarId, VarId)]) -> String {
        let var_set: BTreeSet<VarId> = vars.iter().copied().collect();
        let nonlinear = self
            .assertions()
            .any(|c| matches!(c.lhs, ValExpr::Monomial { .. }) || matches!(c.rhs, ValExpr::Monomial { .. }));
        let mut out = String::new();
        let _ = writeln!(out, "(set-logic {})", if nonlinear { "QF_NRA" } else { "QF_LRA" });
        for v in &var_set {
            let _ = writeln!(out, "(declare-const {v} Real)");
            let alts: Vec<String> = self.domain().iter().map(|d| format!("(= {v} {})", num(d))).collect();
            let _ = writeln!(out, "(assert (or {}))", alts.join(" "));
        }
        let mut seen = BTreeSet::new();
        for c in self.assertions() {
            let line = constraint(c);
            if seen.insert(line.clone()) {
                let _ = writeln!(out, "(assert {line})");
            }
        }
        for n in self.nogoods() {
            let eqs = n.0.iter().map(|(v, x)| format!("(= {v} {})", num(x))).collect();
            let _ = writeln!(out, "(assert (not {}))", conj(eqs));
        }
        for (_, b) in self.blocks().filter(|(_, b)| b.active(&var_set)) {
            let classes = b.classes.classes();
            let mut parts = Vec::new();
            for c in &classes {
                for v in &c[1..] {
                    parts.push(format!("(= {} {v})", c[0]));
                }
            }
            for (i, a) in classes.iter().enumerate() {
                for b in &classes[i + 1..] {
                    parts.push(format!("(not (= {} {}))", a[0], b[0]));
                }
            }
            let _ = writeln!(out, "(assert (not {}))", conj(parts));
        }
        for (a, b) in unknown {
            let _ = writeln!(out, "(assert-soft (= {a} {b}))");
        }
        out.push_str("(check-sat)\n(get-model)\n");
        out
    }
}
