//! Finite alphabets of edge labels.
//!
//! An alphabet is declared once per query file and shared by every regex,
//! automaton, query and generated database in that universe. Letters are
//! short identifiers; `%`-prefixed names (`%marker`) are reserved for letters
//! introduced by the tools themselves.

use std::fmt;
use std::sync::Arc;

/// Index of a letter within its [`Alphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub u16);

/// An ordered finite set of letters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Alphabet {
    names: Arc<Vec<String>>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        debug_assert!(
            names.iter().collect::<std::collections::BTreeSet<_>>().len() == names.len(),
            "duplicate letters in alphabet"
        );
        Alphabet { names: Arc::new(names) }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.names.len()).map(|i| Symbol(i as u16))
    }

    pub fn name(&self, sym: Symbol) -> &str {
        &self.names[sym.0 as usize]
    }

    pub fn lookup(&self, name: &str) -> Option<Symbol> {
        self.names.iter().position(|n| n == name).map(|i| Symbol(i as u16))
    }

    /// Longest declared letter that is a prefix of `text`. Lets regexes over
    /// single-character alphabets be written without separators (`aa`) while
    /// still supporting multi-character letter names.
    pub fn longest_prefix(&self, text: &str) -> Option<(Symbol, usize)> {
        let mut best: Option<(Symbol, usize)> = None;
        for (i, n) in self.names.iter().enumerate() {
            if text.starts_with(n.as_str()) && best.map_or(true, |(_, l)| n.len() > l) {
                best = Some((Symbol(i as u16), n.len()));
            }
        }
        best
    }

    /// A copy of this alphabet with `name` appended (no-op if present).
    pub fn with_letter(&self, name: &str) -> Alphabet {
        if self.lookup(name).is_some() {
            return self.clone();
        }
        let mut names = (*self.names).clone();
        names.push(name.to_string());
        Alphabet { names: Arc::new(names) }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "alphabet {};", self.names.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn longest_prefix_prefers_longer_names() {
        let ab = Alphabet::new(["a", "ab", "b"]);
        assert_eq!(ab.longest_prefix("abc"), Some((Symbol(1), 2)));
        assert_eq!(ab.longest_prefix("ba"), Some((Symbol(2), 1)));
        assert_eq!(ab.longest_prefix("ca"), None);
    }
}
