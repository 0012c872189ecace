//! Line-oriented log of a learning session.
//!
//! One event per line: the event kind, then `key=value` fields in a fixed
//! order per kind. Values never contain whitespace.

use std::fmt;
use std::io::{self, Write};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    lines: Vec<String>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, kind: &str, fields: &[(&str, String)]) {
        let mut line = kind.to_string();
        for (k, v) in fields {
            line.push(' ');
            line.push_str(k);
            line.push('=');
            line.extend(v.chars().map(|c| if c.is_whitespace() { '_' } else { c }));
        }
        self.lines.push(line);
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Events of one kind.
    pub fn events<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a String> + 'a {
        self.lines
            .iter()
            .filter(move |l| l.split(' ').next() == Some(kind))
    }

    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        for l in &self.lines {
            writeln!(w, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_keep_order_and_lose_whitespace() {
        let mut t = Transcript::new();
        t.record("pref", &[("s1", "ab".into()), ("s2", "ε".into()), ("answer", ">".into())]);
        t.record("note", &[("text", "two words".into())]);
        assert_eq!(t.to_string(), "pref s1=ab s2=ε answer=>\nnote text=two_words\n");
        assert_eq!(t.events("pref").count(), 1);
    }
}
