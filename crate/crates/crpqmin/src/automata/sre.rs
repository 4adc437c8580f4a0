//! Simple regular expressions: concatenations of `a+` and `(a1|...|ak)`
//! factors, optionally extended with the full-alphabet factor `%any*`.
//!
//! Queries restricted to this fragment admit a complete containment
//! decision with small counterexamples, so classification is syntactic and
//! deliberately conservative. An extended, internal factor form additionally
//! admits `a*` and `a?`, which normalization removes by case splitting; it
//! also describes the state-pair sublanguages of a classified expression's
//! position automaton in closed form.

use crate::alphabet::{Alphabet, Symbol};
use crate::automata::nfa::{Nfa, StateId};
use crate::automata::regex::Regex;
use std::collections::BTreeSet;

/// A factor of a simple regular expression.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SreFactor {
    Plus(Symbol),
    LetterSet(BTreeSet<Symbol>),
    AnyStar,
}

/// Ordered factor list; the concatenation of the factors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SreFactors(pub Vec<SreFactor>);

/// Extended factors used internally by normalization and sublanguage
/// decomposition. `Star` and `Opt` never survive normalization.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtFactor {
    Plus(Symbol),
    Set(BTreeSet<Symbol>),
    Star(Symbol),
    Opt(Symbol),
    AnyStar,
}

impl ExtFactor {
    pub fn to_regex(&self) -> Regex {
        match self {
            ExtFactor::Plus(s) => Regex::plus(Regex::Letter(*s)),
            ExtFactor::Set(set) => {
                Regex::union(set.iter().map(|&s| Regex::Letter(s)).collect())
            }
            ExtFactor::Star(s) => Regex::star(Regex::Letter(*s)),
            ExtFactor::Opt(s) => Regex::opt(Regex::Letter(*s)),
            ExtFactor::AnyStar => Regex::star(Regex::AnyLetter),
        }
    }

    /// True if the factor accepts the empty word.
    pub fn nullable(&self) -> bool {
        matches!(self, ExtFactor::Star(_) | ExtFactor::Opt(_) | ExtFactor::AnyStar)
    }
}

pub fn factors_to_regex(factors: &[ExtFactor]) -> Regex {
    Regex::concat(factors.iter().map(ExtFactor::to_regex).collect())
}

fn union_letters(children: &[Regex]) -> Option<BTreeSet<Symbol>> {
    let mut set = BTreeSet::new();
    for c in children {
        match c {
            Regex::Letter(s) => {
                set.insert(*s);
            }
            _ => return None,
        }
    }
    if set.is_empty() {
        None
    } else {
        Some(set)
    }
}

/// Classify into extended factors. `Some(vec![])` means the language `{ε}`.
pub fn classify_ext(regex: &Regex, alphabet: &Alphabet) -> Option<Vec<ExtFactor>> {
    let parts: Vec<&Regex> = match regex {
        Regex::Concat(cs) => cs.iter().collect(),
        other => vec![other],
    };
    let all: BTreeSet<Symbol> = alphabet.symbols().collect();
    let mut out = Vec::new();
    for p in parts {
        match p {
            Regex::Epsilon => {}
            Regex::Letter(s) => out.push(ExtFactor::Set(BTreeSet::from([*s]))),
            Regex::AnyLetter => {
                if all.is_empty() {
                    return None;
                }
                out.push(ExtFactor::Set(all.clone()));
            }
            Regex::Union(cs) => out.push(ExtFactor::Set(union_letters(cs)?)),
            Regex::Plus(inner) => match inner.as_ref() {
                Regex::Letter(s) => out.push(ExtFactor::Plus(*s)),
                Regex::AnyLetter => {
                    if all.is_empty() {
                        return None;
                    }
                    out.push(ExtFactor::Set(all.clone()));
                    out.push(ExtFactor::AnyStar);
                }
                _ => return None,
            },
            Regex::Star(inner) => match inner.as_ref() {
                Regex::Letter(s) => out.push(ExtFactor::Star(*s)),
                Regex::AnyLetter => out.push(ExtFactor::AnyStar),
                Regex::Union(cs) => {
                    // (a1|...|ak)* is Σ* only when the set is the full alphabet.
                    let set = union_letters(cs)?;
                    if set == all && !all.is_empty() {
                        out.push(ExtFactor::AnyStar);
                    } else {
                        return None;
                    }
                }
                _ => return None,
            },
            Regex::Opt(inner) => match inner.as_ref() {
                Regex::Letter(s) => out.push(ExtFactor::Opt(*s)),
                _ => return None,
            },
            _ => return None,
        }
    }
    Some(out)
}

/// Classify as a simple regular expression. `AnyStar` factors are admitted
/// only when `allow_any_star` is set; `a*`/`a?` factors and the pure-epsilon
/// expression are never admitted.
pub fn classify_sre(
    regex: &Regex,
    alphabet: &Alphabet,
    allow_any_star: bool,
) -> Option<SreFactors> {
    let ext = classify_ext(regex, alphabet)?;
    if ext.is_empty() {
        return None;
    }
    let mut out = Vec::new();
    for f in ext {
        match f {
            ExtFactor::Plus(s) => out.push(SreFactor::Plus(s)),
            ExtFactor::Set(set) => out.push(SreFactor::LetterSet(set)),
            ExtFactor::AnyStar if allow_any_star => out.push(SreFactor::AnyStar),
            _ => return None,
        }
    }
    Some(SreFactors(out))
}

/// State-pair sublanguage of a classified expression's position automaton,
/// in closed factor form. Returns `None` when the expression does not
/// classify or the automaton does not have the expected position layout;
/// `Some(None)` encodes the empty language, `Some(Some(vec![]))` `{ε}`.
#[allow(clippy::type_complexity)]
pub fn sub_factors(
    regex: &Regex,
    alphabet: &Alphabet,
    nfa: &Nfa,
    from: StateId,
    to: StateId,
) -> Option<Option<Vec<ExtFactor>>> {
    let factors = classify_ext(regex, alphabet)?;
    // Occurrence i of the regex is state i+1 of its position automaton.
    // Map every state to its factor index (state 0 -> virtual factor 0,
    // factor j occupies a contiguous run of indices, j >= 1).
    let mut state_factor: Vec<usize> = vec![0];
    for (j, f) in factors.iter().enumerate() {
        let width = match f {
            ExtFactor::Plus(_) | ExtFactor::Star(_) | ExtFactor::Opt(_) => 1,
            ExtFactor::Set(set) => set.len(),
            ExtFactor::AnyStar => 1,
        };
        state_factor.extend(std::iter::repeat(j + 1).take(width));
    }
    if state_factor.len() != nfa.state_count() as usize {
        return None;
    }
    // Verify the position layout: each factor's states must carry exactly
    // the letters the factor declares (set factors in any AST order).
    {
        let mut state = 1u32;
        for f in &factors {
            match f {
                ExtFactor::Plus(s) | ExtFactor::Star(s) | ExtFactor::Opt(s) => {
                    if nfa.position_letter(state) != Some(*s) {
                        return None;
                    }
                    state += 1;
                }
                ExtFactor::Set(set) => {
                    let mut seen = BTreeSet::new();
                    for _ in 0..set.len() {
                        match nfa.position_letter(state) {
                            Some(l) => {
                                seen.insert(l);
                            }
                            None => return None,
                        }
                        state += 1;
                    }
                    if &seen != set {
                        return None;
                    }
                }
                ExtFactor::AnyStar => {
                    if nfa.position_letter(state).is_some() {
                        return None;
                    }
                    state += 1;
                }
            }
        }
    }
    let (fs, ft) = (state_factor[from as usize], state_factor[to as usize]);
    let factor_at = |j: usize| -> &ExtFactor { &factors[j - 1] };
    let self_loop = |j: usize| -> Option<ExtFactor> {
        if j == 0 {
            return None;
        }
        match factor_at(j) {
            ExtFactor::Plus(s) | ExtFactor::Star(s) => Some(ExtFactor::Star(*s)),
            ExtFactor::AnyStar => Some(ExtFactor::AnyStar),
            ExtFactor::Set(_) | ExtFactor::Opt(_) => None,
        }
    };

    if from == to {
        return Some(Some(self_loop(fs).into_iter().collect()));
    }
    if ft <= fs {
        // Same factor with distinct states, or going backwards: unreachable.
        return Some(None);
    }
    let mut out: Vec<ExtFactor> = self_loop(fs).into_iter().collect();
    for j in fs + 1..ft {
        match factor_at(j) {
            ExtFactor::Plus(s) => out.push(ExtFactor::Plus(*s)),
            ExtFactor::Set(set) => out.push(ExtFactor::Set(set.clone())),
            ExtFactor::Star(s) => out.push(ExtFactor::Star(*s)),
            ExtFactor::Opt(s) => out.push(ExtFactor::Opt(*s)),
            ExtFactor::AnyStar => out.push(ExtFactor::AnyStar),
        }
    }
    // Enter the target factor, stopping exactly at `to`, then loop there.
    match factor_at(ft) {
        ExtFactor::Plus(s) | ExtFactor::Star(s) => out.push(ExtFactor::Plus(*s)),
        ExtFactor::Opt(s) => out.push(ExtFactor::Set(BTreeSet::from([*s]))),
        ExtFactor::Set(_) => {
            let letter = nfa.position_letter(to)?;
            out.push(ExtFactor::Set(BTreeSet::from([letter])));
        }
        ExtFactor::AnyStar => {
            let all: BTreeSet<Symbol> = alphabet.symbols().collect();
            if all.is_empty() {
                return Some(None);
            }
            out.push(ExtFactor::Set(all));
            out.push(ExtFactor::AnyStar);
        }
    }
    Some(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::nfa::compile_nfa;
    use crate::automata::regex::parse_regex;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"])
    }

    fn sym(name: &str) -> Symbol {
        ab().lookup(name).unwrap()
    }

    #[test]
    fn classifies_plus_and_sets() {
        let r = parse_regex("a+.(a|b)", &ab()).unwrap();
        let f = classify_sre(&r, &ab(), false).unwrap();
        assert_eq!(
            f.0,
            vec![
                SreFactor::Plus(sym("a")),
                SreFactor::LetterSet(BTreeSet::from([sym("a"), sym("b")]))
            ]
        );
    }

    #[test]
    fn rejects_non_sre_shapes() {
        for text in ["(aa)+", "a*", "%eps", "(a|b)+", "a+b*"] {
            let r = parse_regex(text, &ab()).unwrap();
            assert!(classify_sre(&r, &ab(), true).is_none(), "{text} should not classify");
        }
    }

    #[test]
    fn any_star_needs_extension() {
        let r = parse_regex("%any*", &ab()).unwrap();
        assert!(classify_sre(&r, &ab(), false).is_none());
        assert_eq!(classify_sre(&r, &ab(), true).unwrap().0, vec![SreFactor::AnyStar]);
        // The full-alphabet union star is the same language.
        let r2 = parse_regex("(a|b)*", &ab()).unwrap();
        assert_eq!(classify_sre(&r2, &ab(), true).unwrap().0, vec![SreFactor::AnyStar]);
    }

    #[test]
    fn sre_never_accepts_epsilon() {
        for text in ["a+", "a+.(a|b)", "b.(a|b).a+"] {
            let r = parse_regex(text, &ab()).unwrap();
            if classify_sre(&r, &ab(), false).is_some() {
                let n = compile_nfa(&r, &ab());
                assert!(!n.has_epsilon(), "{text}");
            }
        }
    }

    #[test]
    fn sub_factors_match_sublanguage_automata() {
        let alphabet = ab();
        for text in ["a+", "a+.b+", "(a|b).a+", "%any*", "a+.%any*.b+", "a*.b"] {
            let r = parse_regex(text, &alphabet).unwrap();
            let n = compile_nfa(&r, &alphabet);
            for from in 0..n.state_count() {
                for to in 0..n.state_count() {
                    let Some(dec) = sub_factors(&r, &alphabet, &n, from, to) else {
                        panic!("{text} should decompose");
                    };
                    let sub = n.sublanguage(from, to).unwrap();
                    match dec {
                        None => {
                            assert!(
                                sub.is_empty_language(),
                                "{text} sub({from},{to}) should be empty"
                            );
                        }
                        Some(factors) => {
                            let back =
                                compile_nfa(&factors_to_regex(&factors), &alphabet);
                            for w in sub_words(&sub, 5).iter().chain(sub_words(&back, 5).iter()) {
                                assert_eq!(
                                    sub.accepts(w),
                                    back.accepts(w),
                                    "{text} sub({from},{to}) on {w:?}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    fn sub_words(n: &Nfa, len: usize) -> Vec<Vec<Symbol>> {
        let mut all = vec![vec![]];
        let mut layer: Vec<Vec<Symbol>> = vec![vec![]];
        for _ in 0..len {
            let mut next = Vec::new();
            for w in &layer {
                for s in n.alphabet().symbols() {
                    let mut v = w.clone();
                    v.push(s);
                    next.push(v);
                }
            }
            all.extend(next.iter().cloned());
            layer = next;
        }
        all
    }
}
