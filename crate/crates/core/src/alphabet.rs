//! Input and output alphabets, symbols and sequences.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Index of a symbol inside its alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(pub u32);

impl Symbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A finite word over an input alphabet. The empty sequence is ε.
///
/// Sequences order length-lexicographically: shorter first, then by symbol
/// index. Every deterministic tie-break in the crate relies on this order.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Sequence(Vec<Symbol>);

impl Sequence {
    pub fn empty() -> Self {
        Sequence(Vec::new())
    }

    pub fn from_symbols(symbols: impl IntoIterator<Item = Symbol>) -> Self {
        Sequence(symbols.into_iter().collect())
    }

    /// Shorthand for tests and examples: `Sequence::from_indices(&[0, 1])`.
    pub fn from_indices(indices: &[u32]) -> Self {
        Sequence(indices.iter().map(|&i| Symbol(i)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn last(&self) -> Option<Symbol> {
        self.0.last().copied()
    }

    /// The `j`-length prefix.
    pub fn prefix(&self, j: usize) -> Sequence {
        Sequence(self.0[..j].to_vec())
    }

    /// All prefixes in increasing length order: `[ε, s_{:1}, …, s]`.
    pub fn prefixes(&self) -> Vec<Sequence> {
        (0..=self.len()).map(|j| self.prefix(j)).collect()
    }

    /// The sequence without its last symbol; `None` for ε.
    pub fn parent(&self) -> Option<Sequence> {
        if self.is_empty() {
            None
        } else {
            Some(self.prefix(self.len() - 1))
        }
    }

    pub fn concat(&self, other: &Sequence) -> Sequence {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Sequence(v)
    }

    pub fn push(&self, symbol: Symbol) -> Sequence {
        let mut v = self.0.clone();
        v.push(symbol);
        Sequence(v)
    }

    pub fn is_prefix_of(&self, other: &Sequence) -> bool {
        other.0.starts_with(&self.0)
    }
}

/// Free-function form of [`Sequence::prefixes`].
pub fn prefixes(s: &Sequence) -> Vec<Sequence> {
    s.prefixes()
}

impl Ord for Sequence {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Sequence {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "ε");
        }
        let parts: Vec<String> = self.0.iter().map(|s| s.0.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// The ordered set Σᴵ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputAlphabet {
    names: Vec<String>,
}

impl InputAlphabet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidAlphabet("input alphabet is empty".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || n.chars().any(|c| c.is_whitespace() || c == '.') {
                return Err(Error::InvalidAlphabet(format!(
                    "symbol name `{n}` must be non-empty without whitespace or '.'"
                )));
            }
            if n == "ε" || n == "eps" {
                return Err(Error::InvalidAlphabet(format!("`{n}` is reserved for ε")));
            }
            if names[..i].contains(n) {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol `{n}`")));
            }
        }
        Ok(InputAlphabet { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.names.len() as u32).map(Symbol)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, s: Symbol) -> &str {
        &self.names[s.index()]
    }

    pub fn symbol(&self, name: &str) -> Result<Symbol> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| Symbol(i as u32))
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn contains(&self, s: Symbol) -> bool {
        s.index() < self.names.len()
    }

    pub fn check(&self, seq: &Sequence) -> Result<()> {
        match seq.symbols().iter().find(|s| !self.contains(**s)) {
            Some(s) => Err(Error::UnknownSymbol(format!("#{}", s.0))),
            None => Ok(()),
        }
    }

    fn single_char(&self) -> bool {
        self.names.iter().all(|n| n.chars().count() == 1)
    }

    /// Text form: concatenated symbols when every name is one character
    /// (`ab`), otherwise dot-separated (`up.down`). ε prints as `ε`.
    pub fn format(&self, seq: &Sequence) -> String {
        if seq.is_empty() {
            return "ε".to_string();
        }
        let sep = if self.single_char() { "" } else { "." };
        seq.symbols()
            .iter()
            .map(|s| self.name(*s))
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Inverse of [`format`](Self::format); also accepts `eps`, `-` and the
    /// empty string for ε.
    pub fn parse(&self, text: &str) -> Result<Sequence> {
        let text = text.trim();
        if text.is_empty() || text == "ε" || text == "eps" || text == "-" {
            return Ok(Sequence::empty());
        }
        if text.contains('.') || !self.single_char() {
            return text
                .split('.')
                .map(|p| self.symbol(p))
                .collect::<Result<Vec<_>>>()
                .map(Sequence);
        }
        text.chars()
            .map(|c| self.symbol(&c.to_string()))
            .collect::<Result<Vec<_>>>()
            .map(Sequence)
    }
}

/// The set Σᴼ: named symbols, each carrying a distinct rational value.
/// Symbols are numbered in ascending value order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputAlphabet {
    names: Vec<String>,
    values: Vec<Rational>,
}

impl OutputAlphabet {
    pub fn new<S: Into<String>>(entries: impl IntoIterator<Item = (S, Rational)>) -> Result<Self> {
        let mut entries: Vec<(String, Rational)> =
            entries.into_iter().map(|(n, v)| (n.into(), v)).collect();
        entries.sort_by(|a, b| a.1.cmp(&b.1));
        let (names, values): (Vec<String>, Vec<Rational>) = entries.into_iter().unzip();
        if names.is_empty() {
            return Err(Error::InvalidAlphabet("output alphabet is empty".into()));
        }
        for i in 0..names.len() {
            if names[..i].contains(&names[i]) {
                return Err(Error::InvalidAlphabet(format!(
                    "duplicate output symbol `{}`",
                    names[i]
                )));
            }
            if values[..i].contains(&values[i]) {
                return Err(Error::InvalidAlphabet(format!(
                    "duplicate output value {}",
                    values[i]
                )));
            }
        }
        Ok(OutputAlphabet { names, values })
    }

    /// Output alphabet whose symbol names are the values' own text.
    pub fn from_values(values: impl IntoIterator<Item = Rational>) -> Result<Self> {
        Self::new(values.into_iter().map(|v| (value_name(&v), v)))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.names.len() as u32).map(Symbol)
    }

    pub fn name(&self, s: Symbol) -> &str {
        &self.names[s.index()]
    }

    pub fn value(&self, s: Symbol) -> &Rational {
        &self.values[s.index()]
    }

    pub fn symbol(&self, name: &str) -> Result<Symbol> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| Symbol(i as u32))
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn symbol_of_value(&self, v: &Rational) -> Option<Symbol> {
        self.values
            .iter()
            .position(|x| x == v)
            .map(|i| Symbol(i as u32))
    }

    pub fn contains_value(&self, v: &Rational) -> bool {
        self.values.contains(v)
    }

    /// All values in ascending order; the finite domain of every variable.
    pub fn sorted_values(&self) -> Vec<Rational> {
        self.values.clone()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &Rational)> {
        self.names.iter().map(String::as_str).zip(self.values.iter())
    }

    pub fn all_positive(&self) -> bool {
        self.values.iter().all(Rational::is_positive)
    }
}

/// Short display name for a value: `2` for integers, `1/2` otherwise.
pub fn value_name(v: &Rational) -> String {
    if v.denominator() == &num_bigint::BigInt::from(1) {
        v.numerator().to_string()
    } else {
        v.to_string()
    }
}
