//! The query data model: atoms, CRPQs, unions, and the text format.
//!
//! A query file declares an alphabet, one or more named queries and
//! optionally a union combining them:
//!
//! ```text
//! alphabet a, b;
//! query q1(x, y) { x -[a+]-> y; x -[(aa)+]-> y; }
//! query q2(x, y) { x -[(aa)+]-> y; }
//! union { q1 | q2 }
//! ```
//!
//! Variables are interned per query; atom order is preserved so that
//! serialized output is reproducible. Output variables may repeat, which is
//! how equality between output positions is expressed.

use crate::alphabet::{Alphabet, Symbol};
use crate::automata::nfa::{compile_nfa, Nfa};
use crate::automata::regex::{parse_regex, Regex};
use crate::multigraph::Multigraph;
use crate::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Index of a variable within its query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

/// An atom label: a regular language carrying both its syntax and its
/// compiled position automaton. The automaton is always compiled from the
/// regex, so the two views never disagree.
#[derive(Debug, Clone)]
pub struct Label {
    regex: Regex,
    nfa: Arc<Nfa>,
}

impl Label {
    pub fn from_regex(regex: Regex, alphabet: &Alphabet) -> Label {
        let nfa = Arc::new(compile_nfa(&regex, alphabet));
        Label { regex, nfa }
    }

    pub fn letter(sym: Symbol, alphabet: &Alphabet) -> Label {
        Label::from_regex(Regex::Letter(sym), alphabet)
    }

    pub fn any_star(alphabet: &Alphabet) -> Label {
        Label::from_regex(Regex::star(Regex::AnyLetter), alphabet)
    }

    pub fn regex(&self) -> &Regex {
        &self.regex
    }

    pub fn nfa(&self) -> &Nfa {
        &self.nfa
    }

    /// The single letter, if this label is syntactically a one-letter word.
    pub fn as_letter(&self) -> Option<Symbol> {
        match &self.regex {
            Regex::Letter(s) => Some(*s),
            _ => None,
        }
    }
}

impl PartialEq for Label {
    fn eq(&self, other: &Self) -> bool {
        self.regex == other.regex
    }
}
impl Eq for Label {}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub src: VarId,
    pub label: Label,
    pub dst: VarId,
}

/// A conjunctive regular path query.
#[derive(Debug, Clone)]
pub struct Crpq {
    pub name: String,
    alphabet: Alphabet,
    var_names: Vec<String>,
    pub outputs: Vec<VarId>,
    pub atoms: Vec<Atom>,
}

impl Crpq {
    pub fn new(
        name: impl Into<String>,
        alphabet: Alphabet,
        var_names: Vec<String>,
        outputs: Vec<VarId>,
        atoms: Vec<Atom>,
    ) -> Crpq {
        let q = Crpq { name: name.into(), alphabet, var_names, outputs, atoms };
        debug_assert!(q.outputs.iter().all(|v| (v.0 as usize) < q.var_names.len()));
        debug_assert!(q
            .atoms
            .iter()
            .all(|a| (a.src.0 as usize) < q.var_names.len()
                && (a.dst.0 as usize) < q.var_names.len()));
        q
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn var_count(&self) -> usize {
        self.var_names.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> {
        (0..self.var_names.len() as u32).map(VarId)
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.var_names[v.0 as usize]
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn lookup_var(&self, name: &str) -> Option<VarId> {
        self.var_names.iter().position(|n| n == name).map(|i| VarId(i as u32))
    }

    pub fn arity(&self) -> usize {
        self.outputs.len()
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_output(&self, v: VarId) -> bool {
        self.outputs.contains(&v)
    }

    /// True iff every atom label is syntactically a single letter.
    pub fn is_cq(&self) -> bool {
        self.atoms.iter().all(|a| a.label.as_letter().is_some())
    }

    /// In- and out-degrees counting atom multiplicities.
    pub fn degrees(&self) -> Vec<(usize, usize)> {
        let mut deg = vec![(0usize, 0usize); self.var_count()];
        for a in &self.atoms {
            deg[a.src.0 as usize].1 += 1;
            deg[a.dst.0 as usize].0 += 1;
        }
        deg
    }

    /// A variable is internal when it is not an output and has in-degree and
    /// out-degree exactly one.
    pub fn internal_vars(&self) -> Vec<bool> {
        let deg = self.degrees();
        (0..self.var_count())
            .map(|i| {
                let v = VarId(i as u32);
                !self.is_output(v) && deg[i] == (1, 1)
            })
            .collect()
    }

    /// The directed multigraph left after forgetting the labels: one vertex
    /// per variable, one edge per atom.
    pub fn underlying_graph(&self) -> Multigraph {
        Multigraph::new(
            self.var_count(),
            self.atoms.iter().map(|a| (a.src.0 as usize, a.dst.0 as usize)).collect(),
        )
    }

    /// Rename to `name`, keeping everything else.
    pub fn named(mut self, name: impl Into<String>) -> Crpq {
        self.name = name.into();
        self
    }
}

/// A union of CRPQs of equal output arity.
#[derive(Debug, Clone)]
pub struct Ucrpq {
    pub disjuncts: Vec<Crpq>,
}

impl Ucrpq {
    pub fn new(disjuncts: Vec<Crpq>) -> Result<Ucrpq> {
        let mut it = disjuncts.iter();
        if let Some(first) = it.next() {
            for d in it {
                if d.arity() != first.arity() {
                    return Err(Error::ArityMismatch { left: first.arity(), right: d.arity() });
                }
                if d.alphabet() != first.alphabet() {
                    return Err(Error::AlphabetMismatch);
                }
            }
        } else {
            return Err(Error::Input("a union needs at least one query".into()));
        }
        Ok(Ucrpq { disjuncts })
    }

    pub fn single(q: Crpq) -> Ucrpq {
        Ucrpq { disjuncts: vec![q] }
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.disjuncts[0].alphabet()
    }

    pub fn arity(&self) -> usize {
        self.disjuncts[0].arity()
    }

    /// Maximum atom count over the disjuncts.
    pub fn max_atoms(&self) -> usize {
        self.disjuncts.iter().map(Crpq::atom_count).max().unwrap_or(0)
    }

    /// Maximum variable count over the disjuncts.
    pub fn max_vars(&self) -> usize {
        self.disjuncts.iter().map(Crpq::var_count).max().unwrap_or(0)
    }

    /// Maximum NFA state count over all atom labels.
    pub fn max_nfa_states(&self) -> usize {
        self.disjuncts
            .iter()
            .flat_map(|d| d.atoms.iter())
            .map(|a| a.label.nfa().state_count() as usize)
            .max()
            .unwrap_or(1)
    }
}

/// Convenience builder used by the machinery and tests.
pub struct CrpqBuilder {
    name: String,
    alphabet: Alphabet,
    var_names: Vec<String>,
    outputs: Vec<VarId>,
    atoms: Vec<Atom>,
}

impl CrpqBuilder {
    pub fn new(name: impl Into<String>, alphabet: Alphabet) -> CrpqBuilder {
        CrpqBuilder {
            name: name.into(),
            alphabet,
            var_names: Vec::new(),
            outputs: Vec::new(),
            atoms: Vec::new(),
        }
    }

    pub fn var(&mut self, name: &str) -> VarId {
        if let Some(i) = self.var_names.iter().position(|n| n == name) {
            return VarId(i as u32);
        }
        self.var_names.push(name.to_string());
        VarId(self.var_names.len() as u32 - 1)
    }

    pub fn output(&mut self, name: &str) -> &mut Self {
        let v = self.var(name);
        self.outputs.push(v);
        self
    }

    pub fn atom(&mut self, src: &str, regex_text: &str, dst: &str) -> Result<&mut Self> {
        let regex = parse_regex(regex_text, &self.alphabet)?;
        let label = Label::from_regex(regex, &self.alphabet);
        Ok(self.atom_label(src, label, dst))
    }

    pub fn atom_label(&mut self, src: &str, label: Label, dst: &str) -> &mut Self {
        let src = self.var(src);
        let dst = self.var(dst);
        self.atoms.push(Atom { src, label, dst });
        self
    }

    pub fn build(&self) -> Crpq {
        Crpq::new(
            self.name.clone(),
            self.alphabet.clone(),
            self.var_names.clone(),
            self.outputs.clone(),
            self.atoms.clone(),
        )
    }
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

struct FileParser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> FileParser<'a> {
    fn skip_ws(&mut self) {
        loop {
            let rest = &self.text[self.pos..];
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            if trimmed.starts_with("//") {
                match trimmed.find('\n') {
                    Some(nl) => self.pos += nl,
                    None => self.pos = self.text.len(),
                }
            } else {
                break;
            }
        }
    }

    fn peek_char(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(Error::Syntax { position: self.pos, message: format!("expected `{token}`") })
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let word: String = rest
            .chars()
            .take_while(|&c| {
                c.is_ascii_alphanumeric() || c == '_' || c == '#' || c == '@' || c == '%'
            })
            .collect();
        if word.is_empty() {
            return Err(Error::Syntax {
                position: self.pos,
                message: "expected an identifier".into(),
            });
        }
        self.pos += word.len();
        Ok(word)
    }

    fn keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        if rest.starts_with(kw) {
            let after = rest[kw.len()..].chars().next();
            if after.map_or(true, |c| !c.is_ascii_alphanumeric() && c != '_') {
                self.pos += kw.len();
                return true;
            }
        }
        false
    }
}

/// Parse a query file. The file value is the declared union if present, the
/// sole query otherwise.
pub fn parse_query(text: &str) -> Result<Ucrpq> {
    let mut p = FileParser { text, pos: 0 };
    if !p.keyword("alphabet") {
        return Err(Error::Syntax {
            position: p.pos,
            message: "expected `alphabet` declaration".into(),
        });
    }
    let mut letters = vec![p.ident()?];
    while p.eat(",") {
        letters.push(p.ident()?);
    }
    p.expect(";")?;
    let alphabet = Alphabet::new(letters);

    let mut queries: Vec<Crpq> = Vec::new();
    let mut union_names: Option<Vec<String>> = None;
    loop {
        if p.keyword("query") {
            let name = p.ident()?;
            let mut b = CrpqBuilder::new(name, alphabet.clone());
            p.expect("(")?;
            if p.peek_char() != Some(')') {
                loop {
                    let v = p.ident()?;
                    b.output(&v);
                    if !p.eat(",") {
                        break;
                    }
                }
            }
            p.expect(")")?;
            p.expect("{")?;
            while p.peek_char().is_some() && p.peek_char() != Some('}') {
                let src = p.ident()?;
                p.expect("-[")?;
                p.skip_ws();
                let regex_start = p.pos;
                let regex_end = p.text[p.pos..]
                    .find("]->")
                    .map(|i| p.pos + i)
                    .ok_or(Error::Syntax { position: p.pos, message: "expected `]->`".into() })?;
                let regex_text = &p.text[regex_start..regex_end];
                let regex = parse_regex(regex_text, &alphabet).map_err(|e| match e {
                    Error::Syntax { position, message } => {
                        Error::Syntax { position: regex_start + position, message }
                    }
                    Error::UnknownLetter { letter, position } => {
                        Error::UnknownLetter { letter, position: regex_start + position }
                    }
                    other => other,
                })?;
                p.pos = regex_end;
                p.expect("]->")?;
                let dst = p.ident()?;
                let label = Label::from_regex(regex, &alphabet);
                let s = b.var(&src);
                let d = b.var(&dst);
                b.atoms.push(Atom { src: s, label, dst: d });
                if !p.eat(";") {
                    break;
                }
            }
            p.expect("}")?;
            queries.push(b.build());
        } else if p.keyword("union") {
            p.expect("{")?;
            let mut names = vec![p.ident()?];
            while p.eat("|") {
                names.push(p.ident()?);
            }
            p.expect("}")?;
            union_names = Some(names);
        } else {
            break;
        }
    }
    p.skip_ws();
    if p.pos != text.len() {
        return Err(Error::Syntax { position: p.pos, message: "unexpected trailing input".into() });
    }

    match union_names {
        Some(names) => {
            let mut disjuncts = Vec::new();
            for n in &names {
                let q = queries
                    .iter()
                    .find(|q| &q.name == n)
                    .ok_or_else(|| Error::Unknown { kind: "query", name: n.clone() })?;
                disjuncts.push(q.clone());
            }
            Ucrpq::new(disjuncts)
        }
        None => match queries.len() {
            0 => Err(Error::Input("no query declared".into())),
            1 => Ok(Ucrpq::single(queries.remove(0))),
            n => {
                Err(Error::Input(format!("{n} queries declared but no union; add `union {{ ... }}`")))
            }
        },
    }
}

impl fmt::Display for Crpq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let outs: Vec<&str> = self.outputs.iter().map(|&v| self.var_name(v)).collect();
        writeln!(f, "query {}({}) {{", self.name, outs.join(", "))?;
        for a in &self.atoms {
            writeln!(
                f,
                "  {} -[{}]-> {};",
                self.var_name(a.src),
                a.label.regex().display(&self.alphabet),
                self.var_name(a.dst)
            )?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for Ucrpq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.alphabet())?;
        for d in &self.disjuncts {
            writeln!(f, "{d}")?;
        }
        if self.disjuncts.len() > 1 {
            let names: Vec<&str> = self.disjuncts.iter().map(|d| d.name.as_str()).collect();
            writeln!(f, "union {{ {} }}", names.join(" | "))?;
        }
        Ok(())
    }
}

/// Serialize as a parseable query file.
pub fn serialize_query(u: &Ucrpq) -> String {
    format!("{u}")
}
