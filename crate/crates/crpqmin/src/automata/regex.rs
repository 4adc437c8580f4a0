//! Regular expression syntax trees, parsing and printing.
//!
//! The grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term ('|' term)*
//! term   := factor ('.'? factor)*
//! factor := atom ('+' | '*' | '?')*
//! atom   := LETTER | '%eps' | '%any' | '(' expr ')'
//! ```
//!
//! Letters are resolved against the declared alphabet with longest-prefix
//! matching, so `aa` over `{a}` reads as the concatenation `a.a`, while an
//! alphabet that declares a two-character letter `aa` keeps it atomic. `%any`
//! matches any single declared letter and `%eps` the empty word.

use crate::alphabet::{Alphabet, Symbol};
use crate::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Regex {
    Letter(Symbol),
    Epsilon,
    Empty,
    AnyLetter,
    Concat(Vec<Regex>),
    Union(Vec<Regex>),
    Star(Box<Regex>),
    Plus(Box<Regex>),
    Opt(Box<Regex>),
}

impl Regex {
    pub fn concat(parts: Vec<Regex>) -> Regex {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Regex::Epsilon => {}
                Regex::Empty => return Regex::Empty,
                Regex::Concat(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Regex::Epsilon,
            1 => out.pop().unwrap(),
            _ => Regex::Concat(out),
        }
    }

    pub fn union(parts: Vec<Regex>) -> Regex {
        let mut out: Vec<Regex> = Vec::new();
        for p in parts {
            match p {
                Regex::Empty => {}
                Regex::Union(inner) => {
                    for q in inner {
                        if !out.contains(&q) {
                            out.push(q);
                        }
                    }
                }
                other => {
                    if !out.contains(&other) {
                        out.push(other);
                    }
                }
            }
        }
        match out.len() {
            0 => Regex::Empty,
            1 => out.pop().unwrap(),
            _ => Regex::Union(out),
        }
    }

    pub fn star(inner: Regex) -> Regex {
        match inner {
            Regex::Empty | Regex::Epsilon => Regex::Epsilon,
            Regex::Star(i) => Regex::Star(i),
            Regex::Plus(i) | Regex::Opt(i) => Regex::Star(i),
            other => Regex::Star(Box::new(other)),
        }
    }

    pub fn plus(inner: Regex) -> Regex {
        match inner {
            Regex::Empty => Regex::Empty,
            Regex::Epsilon => Regex::Epsilon,
            Regex::Star(i) => Regex::Star(i),
            Regex::Plus(i) => Regex::Plus(i),
            Regex::Opt(i) => Regex::Star(i),
            other => Regex::Plus(Box::new(other)),
        }
    }

    pub fn opt(inner: Regex) -> Regex {
        match inner {
            Regex::Empty | Regex::Epsilon => Regex::Epsilon,
            Regex::Star(i) => Regex::Star(i),
            Regex::Plus(i) => Regex::Star(i),
            Regex::Opt(i) => Regex::Opt(i),
            other => Regex::Opt(Box::new(other)),
        }
    }

    pub fn word(symbols: &[Symbol]) -> Regex {
        Regex::concat(symbols.iter().map(|&s| Regex::Letter(s)).collect())
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Regex::Letter(_) | Regex::Epsilon | Regex::Empty | Regex::AnyLetter => 1,
            Regex::Concat(cs) | Regex::Union(cs) => 1 + cs.iter().map(Regex::size).sum::<usize>(),
            Regex::Star(c) | Regex::Plus(c) | Regex::Opt(c) => 1 + c.size(),
        }
    }

    /// Number of letter occurrences (`%any` counts as one).
    pub fn occurrence_count(&self) -> usize {
        match self {
            Regex::Letter(_) | Regex::AnyLetter => 1,
            Regex::Epsilon | Regex::Empty => 0,
            Regex::Concat(cs) | Regex::Union(cs) => cs.iter().map(Regex::occurrence_count).sum(),
            Regex::Star(c) | Regex::Plus(c) | Regex::Opt(c) => c.occurrence_count(),
        }
    }

    /// Render against `alphabet`; the output reparses to an equal AST.
    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> RegexDisplay<'a> {
        RegexDisplay { regex: self, alphabet }
    }
}

pub struct RegexDisplay<'a> {
    regex: &'a Regex,
    alphabet: &'a Alphabet,
}

impl fmt::Display for RegexDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_regex(f, self.regex, self.alphabet, 0)
    }
}

/// prec: 0 = union context, 1 = concat context, 2 = postfix/atom context.
fn write_regex(f: &mut fmt::Formatter<'_>, r: &Regex, ab: &Alphabet, prec: u8) -> fmt::Result {
    let own = match r {
        Regex::Union(_) => 0,
        Regex::Concat(_) => 1,
        _ => 2,
    };
    if own < prec {
        write!(f, "(")?;
    }
    match r {
        Regex::Letter(s) => write!(f, "{}", ab.name(*s))?,
        Regex::Epsilon => write!(f, "%eps")?,
        Regex::Empty => write!(f, "%empty")?,
        Regex::AnyLetter => write!(f, "%any")?,
        Regex::Union(cs) => {
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    write!(f, "|")?;
                }
                write_regex(f, c, ab, 1)?;
            }
        }
        Regex::Concat(cs) => {
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    write!(f, ".")?;
                }
                write_regex(f, c, ab, 2)?;
            }
        }
        Regex::Star(c) => {
            write_regex(f, c, ab, 2)?;
            write!(f, "*")?;
        }
        Regex::Plus(c) => {
            write_regex(f, c, ab, 2)?;
            write!(f, "+")?;
        }
        Regex::Opt(c) => {
            write_regex(f, c, ab, 2)?;
            write!(f, "?")?;
        }
    }
    if own < prec {
        write!(f, ")")?;
    }
    Ok(())
}

fn is_letter_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '#' || c == '@'
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    alphabet: &'a Alphabet,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && (self.bytes[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn expr(&mut self) -> Result<Regex> {
        let mut terms = vec![self.term()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            terms.push(self.term()?);
        }
        Ok(Regex::union(terms))
    }

    fn term(&mut self) -> Result<Regex> {
        let mut factors = vec![self.factor()?];
        loop {
            match self.peek() {
                Some('.') => {
                    self.pos += 1;
                    factors.push(self.factor()?);
                }
                Some(c) if c == '(' || c == '%' || is_letter_char(c) => {
                    factors.push(self.factor()?);
                }
                _ => break,
            }
        }
        Ok(Regex::concat(factors))
    }

    fn factor(&mut self) -> Result<Regex> {
        let mut r = self.atom()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    r = Regex::plus(r);
                }
                Some('*') => {
                    self.pos += 1;
                    r = Regex::star(r);
                }
                Some('?') => {
                    self.pos += 1;
                    r = Regex::opt(r);
                }
                _ => break,
            }
        }
        Ok(r)
    }

    fn atom(&mut self) -> Result<Regex> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let r = self.expr()?;
                if self.peek() == Some(')') {
                    self.pos += 1;
                    Ok(r)
                } else {
                    Err(Error::Syntax { position: self.pos, message: "expected `)`".into() })
                }
            }
            Some('%') => {
               let start = self.pos;
                self.pos += 1;
                let rest: String = self.text[self.pos..]
                    .chars()
                    .take_while(|&c| c.is_ascii_alphanumeric() || c == '_')
                    .collect();
                self.pos += rest.len();
                match rest.as_str() {
                    "eps" => Ok(Regex::Epsilon),
                    "empty" => Ok(Regex::Empty),
                    "any" => Ok(Regex::AnyLetter),
                    _ => {
                        let name = format!("%{rest}");
                        match self.alphabet.lookup(&name) {
                            Some(sym) => Ok(Regex::Letter(sym)),
                            None => Err(Error::UnknownLetter { letter: name, position: start }),
                        }
                    }
                }
            }
            Some(c) if is_letter_char(c) => {
                // A run of letter characters is split by longest-prefix
                // matching against the alphabet; `aa` over {a} is two letters.
                let start = self.pos;
                let run: String =
                    self.text[self.pos..].chars().take_while(|&c| is_letter_char(c)).collect();
                let mut letters = Vec::new();
                let mut off = 0;
                while off < run.len() {
                    match self.alphabet.longest_prefix(&run[off..]) {
                        Some((sym, len)) => {
                            letters.push(Regex::Letter(sym));
                            off += len;
                        }
                        None => {
                            return Err(Error::UnknownLetter {
                                letter: run[off..].to_string(),
                                position: start + off,
                            })
                        }
                    }
                }
                self.pos += run.len();
                // Postfix operators bind to the last letter of the run.
                if letters.len() > 1 {
                    let last = letters.pop().unwrap();
                    let mut tail = last;
                    loop {
                        match self.peek() {
                            Some('+') => {
                                self.pos += 1;
                                tail = Regex::plus(tail);
                            }
                            Some('*') => {
                                self.pos += 1;
                                tail = Regex::star(tail);
                            }
                            Some('?') => {
                                self.pos += 1;
                                tail = Regex::opt(tail);
                            }
                            _ => break,
                        }
                    }
                    letters.push(tail);
                    Ok(Regex::concat(letters))
                } else {
                    Ok(letters.pop().unwrap())
                }
            }
            Some(c) => Err(Error::Syntax {
                position: self.pos,
                message: format!("unexpected character `{c}`"),
            }),
            None => {
                Err(Error::Syntax { position: self.pos, message: "unexpected end of regex".into() })
            }
        }
    }
}

/// Parse `text` over `alphabet`.
pub fn parse_regex(text: &str, alphabet: &Alphabet) -> Result<Regex> {
    let mut p = Parser { text, bytes: text.as_bytes(), pos: 0, alphabet };
    let r = p.expr()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(Error::Syntax {
            position: p.pos,
            message: "trailing input after regex".into(),
        });
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"])
    }

    #[test]
    fn parses_concat_union_postfix() {
        let a = Regex::Letter(Symbol(0));
        let b = Regex::Letter(Symbol(1));
        let r = parse_regex("a+ . (a|b)", &ab()).unwrap();
        assert_eq!(
            r,
            Regex::Concat(vec![
                Regex::Plus(Box::new(a.clone())),
                Regex::Union(vec![a.clone(), b.clone()])
            ])
        );
    }

    #[test]
    fn parses_any_star() {
        let r = parse_regex("%any*", &ab()).unwrap();
        assert_eq!(r, Regex::Star(Box::new(Regex::AnyLetter)));
    }

    #[test]
    fn letter_runs_split_into_single_letters() {
        let a = Regex::Letter(Symbol(0));
        let r = parse_regex("(aa)+", &ab()).unwrap();
        assert_eq!(r, Regex::Plus(Box::new(Regex::Concat(vec![a.clone(), a.clone()]))));
        // Postfix inside a run binds to the last letter only.
        let r2 = parse_regex("ab*", &ab()).unwrap();
        assert_eq!(
            r2,
            Regex::Concat(vec![a.clone(), Regex::Star(Box::new(Regex::Letter(Symbol(1))))])
        );
    }

    #[test]
    fn unknown_letters_are_reported_with_position() {
        match parse_regex("ac", &ab()) {
            Err(Error::UnknownLetter { letter, position }) => {
                assert_eq!(letter, "c");
                assert_eq!(position, 1);
            }
            other => panic!("expected unknown letter, got {other:?}"),
        }
    }

    #[test]
    fn display_round_trips() {
        let ab = ab();
        for text in ["a+.(a|b)", "(a.a)+", "%any*", "%eps", "a?.b*|a", "((a|b).a)+"] {
            let r = parse_regex(text, &ab).unwrap();
            let printed = r.display(&ab).to_string();
            let back = parse_regex(&printed, &ab).unwrap();
            assert_eq!(r, back, "round trip failed for {text} -> {printed}");
        }
    }
}
