//! Position-based (Glushkov) NFAs and language operations.
//!
//! Automata built here are always free of epsilon transitions, which keeps
//! the state-pair sublanguage operator meaningful: state `1 + i` of a
//! compiled automaton corresponds to the `i`-th letter occurrence of the
//! source expression (left-to-right), and state 0 is the unique start state.
//! Every combinator below preserves epsilon-freeness.

use crate::alphabet::{Alphabet, Symbol};
use crate::automata::regex::Regex;
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Default cap on subset-construction states used by [`Nfa::complement`].
pub const DEFAULT_COMPLEMENT_CAP: usize = 1 << 12;

pub type StateId = u32;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Nfa {
    alphabet: Alphabet,
    n_states: u32,
    /// Sorted, deduplicated.
    transitions: Vec<(StateId, Symbol, StateId)>,
    initial: Vec<StateId>,
    finals: Vec<StateId>,
    /// For compiled automata: the letter occupying each position state
    /// (`None` for the start state and for states of derived automata).
    position_letters: Vec<Option<Symbol>>,
}

impl Nfa {
    pub fn new(
        alphabet: Alphabet,
        n_states: u32,
        mut transitions: Vec<(StateId, Symbol, StateId)>,
        mut initial: Vec<StateId>,
        mut finals: Vec<StateId>,
    ) -> Nfa {
        transitions.sort_unstable();
        transitions.dedup();
        initial.sort_unstable();
        initial.dedup();
        finals.sort_unstable();
        finals.dedup();
        debug_assert!(transitions.iter().all(|&(p, _, q)| p < n_states && q < n_states));
        debug_assert!(initial.iter().chain(finals.iter()).all(|&s| s < n_states));
        Nfa { alphabet, n_states, transitions, initial, finals, position_letters: Vec::new() }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> u32 {
        self.n_states
    }

    pub fn transitions(&self) -> &[(StateId, Symbol, StateId)] {
        &self.transitions
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn finals(&self) -> &[StateId] {
        &self.finals
    }

    /// Letter occupying a position state of a compiled automaton.
    pub fn position_letter(&self, state: StateId) -> Option<Symbol> {
        self.position_letters.get(state as usize).copied().flatten()
    }

    /// True iff the empty word is accepted.
    pub fn has_epsilon(&self) -> bool {
        self.initial.iter().any(|s| self.finals.binary_search(s).is_ok())
    }

    pub fn is_final(&self, s: StateId) -> bool {
        self.finals.binary_search(&s).is_ok()
    }

    fn step(&self, states: &BTreeSet<StateId>, sym: Symbol) -> BTreeSet<StateId> {
        let mut out = BTreeSet::new();
        for &(p, a, q) in &self.transitions {
            if a == sym && states.contains(&p) {
                out.insert(q);
            }
        }
        out
    }

    /// Word membership by subset simulation.
    pub fn accepts(&self, word: &[Symbol]) -> bool {
        let mut cur: BTreeSet<StateId> = self.initial.iter().copied().collect();
        for &sym in word {
            if cur.is_empty() {
                return false;
            }
            cur = self.step(&cur, sym);
        }
        cur.iter().any(|&s| self.is_final(s))
    }

    /// The same automaton viewed with initial `{from}` and final `{to}`.
    pub fn sublanguage(&self, from: StateId, to: StateId) -> Result<Nfa> {
        if from >= self.n_states || to >= self.n_states {
            return Err(Error::Unknown {
                kind: "state",
                name: format!("{}", from.max(to)),
            });
        }
        Ok(Nfa {
            alphabet: self.alphabet.clone(),
            n_states: self.n_states,
            transitions: self.transitions.clone(),
            initial: vec![from],
            finals: vec![to],
            position_letters: self.position_letters.clone(),
        })
    }

    pub fn is_empty_language(&self) -> bool {
        let mut seen: BTreeSet<StateId> = self.initial.iter().copied().collect();
        let mut queue: VecDeque<StateId> = seen.iter().copied().collect();
        while let Some(s) = queue.pop_front() {
            if self.is_final(s) {
                return false;
            }
            for &(p, _, q) in &self.transitions {
                if p == s && seen.insert(q) {
                    queue.push_back(q);
                }
            }
        }
        true
    }

    pub fn union(&self, other: &Nfa) -> Result<Nfa> {
        self.check_alphabet(other)?;
        let off = self.n_states;
        let mut transitions = self.transitions.clone();
        transitions.extend(other.transitions.iter().map(|&(p, a, q)| (p + off, a, q + off)));
        let mut initial = self.initial.clone();
        initial.extend(other.initial.iter().map(|&s| s + off));
        let mut finals = self.finals.clone();
        finals.extend(other.finals.iter().map(|&s| s + off));
        Ok(Nfa::new(self.alphabet.clone(), off + other.n_states, transitions, initial, finals))
    }

    /// Epsilon-free concatenation: glue transitions leaving `other`'s initial
    /// states onto `self`'s final states.
    pub fn concat(&self, other: &Nfa) -> Result<Nfa> {
        self.check_alphabet(other)?;
        let off = self.n_states;
        let mut transitions = self.transitions.clone();
        transitions.extend(other.transitions.iter().map(|&(p, a, q)| (p + off, a, q + off)));
        for &(p, a, q) in &other.transitions {
            if other.initial.binary_search(&p).is_ok() {
                for &f in &self.finals {
                    transitions.push((f, a, q + off));
                }
            }
        }
        let mut initial = self.initial.clone();
        if self.has_epsilon() {
            initial.extend(other.initial.iter().map(|&s| s + off));
        }
        let mut finals: Vec<StateId> = other.finals.iter().map(|&s| s + off).collect();
        if other.has_epsilon() {
            finals.extend(self.finals.iter().copied());
        }
        Ok(Nfa::new(self.alphabet.clone(), off + other.n_states, transitions, initial, finals))
    }

    /// Product automaton for the intersection, restricted to reachable pairs.
    pub fn intersect(&self, other: &Nfa) -> Result<Nfa> {
        self.check_alphabet(other)?;
        let mut ids: BTreeMap<(StateId, StateId), StateId> = BTreeMap::new();
        let mut queue = VecDeque::new();
        for &p in &self.initial {
            for &q in &other.initial {
                let next = ids.len() as StateId;
                ids.entry((p, q)).or_insert_with(|| {
                    queue.push_back((p, q));
                    next
                });
            }
        }
        let mut transitions = Vec::new();
        let mut finals = Vec::new();
        while let Some((p, q)) = queue.pop_front() {
            let id = ids[&(p, q)];
            if self.is_final(p) && other.is_final(q) {
                finals.push(id);
            }
            for &(p1, a, p2) in &self.transitions {
                if p1 != p {
                    continue;
                }
                for &(q1, b, q2) in &other.transitions {
                    if q1 != q || a != b {
                        continue;
                    }
                    let next = ids.len() as StateId;
                    let tid = *ids.entry((p2, q2)).or_insert_with(|| {
                        queue.push_back((p2, q2));
                        next
                    });
                    transitions.push((id, a, tid));
                }
            }
        }
        let initial: Vec<StateId> = self
            .initial
            .iter()
            .flat_map(|&p| other.initial.iter().map(move |&q| (p, q)))
            .filter_map(|k| ids.get(&k).copied())
            .collect();
        Ok(Nfa::new(self.alphabet.clone(), ids.len() as u32, transitions, initial, finals))
    }

    /// Complement via subset construction. Exceeding `cap` reachable subsets
    /// is a resource error, never a silent truncation.
    pub fn complement(&self, cap: usize) -> Result<Nfa> {
        let mut ids: BTreeMap<Vec<StateId>, StateId> = BTreeMap::new();
        let start: Vec<StateId> = self.initial.clone();
        ids.insert(start.clone(), 0);
        let mut queue = VecDeque::from([start]);
        let mut transitions = Vec::new();
        let mut accepting_subsets = Vec::new();
        while let Some(subset) = queue.pop_front() {
            let id = ids[&subset];
            if subset.iter().any(|&s| self.is_final(s)) {
                accepting_subsets.push(id);
            }
            let set: BTreeSet<StateId> = subset.iter().copied().collect();
            for sym in self.alphabet.symbols() {
                let next: Vec<StateId> = self.step(&set, sym).into_iter().collect();
                let tid = match ids.get(&next) {
                    Some(&t) => t,
                    None => {
                        if ids.len() >= cap {
                            return Err(Error::Resource(format!(
                                "complement subset construction exceeded {cap} states"
                            )));
                        }
                        let t = ids.len() as StateId;
                        ids.insert(next.clone(), t);
                        queue.push_back(next);
                        t
                    }
                };
                transitions.push((id, sym, tid));
            }
        }
        let accepting: BTreeSet<StateId> = accepting_subsets.into_iter().collect();
        let finals: Vec<StateId> =
            (0..ids.len() as StateId).filter(|s| !accepting.contains(s)).collect();
        Ok(Nfa::new(self.alphabet.clone(), ids.len() as u32, transitions, vec![0], finals))
    }

    /// `L(self) ⊆ L(other)`, via emptiness of `self ∩ complement(other)`.
    pub fn included_in(&self, other: &Nfa, cap: usize) -> Result<bool> {
        self.check_alphabet(other)?;
        let comp = other.complement(cap)?;
        Ok(self.intersect(&comp)?.is_empty_language())
    }

    pub fn equivalent_language(&self, other: &Nfa, cap: usize) -> Result<bool> {
        Ok(self.included_in(other, cap)? && other.included_in(self, cap)?)
    }

    /// All accepted words of length at most `max_len`, in (length, lex) order.
    pub fn words_up_to(&self, max_len: usize) -> Vec<Vec<Symbol>> {
        let mut out = Vec::new();
        let init: BTreeSet<StateId> = self.initial.iter().copied().collect();
        let mut frontier: BTreeMap<Vec<Symbol>, BTreeSet<StateId>> = BTreeMap::new();
        frontier.insert(Vec::new(), init);
        for len in 0..=max_len {
            for (word, states) in &frontier {
                if states.iter().any(|&s| self.is_final(s)) {
                    out.push(word.clone());
                }
            }
            if len == max_len {
                break;
            }
            let mut next: BTreeMap<Vec<Symbol>, BTreeSet<StateId>> = BTreeMap::new();
            for (word, states) in &frontier {
                for sym in self.alphabet.symbols() {
                    let stepped = self.step(states, sym);
                    if !stepped.is_empty() {
                        let mut w = word.clone();
                        w.push(sym);
                        next.insert(w, stepped);
                    }
                }
            }
            frontier = next;
        }
        out.sort_by(|a, b| (a.len(), a.as_slice()).cmp(&(b.len(), b.as_slice())));
        out
    }

    /// Shortest accepted word, if any.
    pub fn shortest_word(&self) -> Option<Vec<Symbol>> {
        let init: BTreeSet<StateId> = self.initial.iter().copied().collect();
        if init.iter().any(|&s| self.is_final(s)) {
            return Some(Vec::new());
        }
        let mut seen: BTreeSet<BTreeSet<StateId>> = BTreeSet::new();
        let mut queue = VecDeque::from([(Vec::new(), init)]);
        while let Some((word, states)) = queue.pop_front() {
            for sym in self.alphabet.symbols() {
                let next = self.step(&states, sym);
                if next.is_empty() || !seen.insert(next.clone()) {
                    continue;
                }
                let mut w = word.clone();
                w.push(sym);
                if next.iter().any(|&s| self.is_final(s)) {
                    return Some(w);
                }
                queue.push_back((w, next));
            }
        }
        None
    }

    fn check_alphabet(&self, other: &Nfa) -> Result<()> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        Ok(())
    }

    /// Regular expression for the language, by state elimination. Used to
    /// give derived automata (sublanguages, products) a printable syntax.
    pub fn to_regex(&self) -> Regex {
        // Generalized automaton over nodes {start, end} ∪ states.
        let n = self.n_states as usize;
        let start = n;
        let end = n + 1;
        let mut edges: BTreeMap<(usize, usize), Regex> = BTreeMap::new();
        let add = |edges: &mut BTreeMap<(usize, usize), Regex>, i: usize, j: usize, r: Regex| {
            if r == Regex::Empty {
                return;
            }
            match edges.remove(&(i, j)) {
                Some(prev) => {
                    edges.insert((i, j), Regex::union(vec![prev, r]));
                }
                None => {
                    edges.insert((i, j), r);
                }
            }
        };
        for &i in &self.initial {
            add(&mut edges, start, i as usize, Regex::Epsilon);
        }
        for &f in &self.finals {
            add(&mut edges, f as usize, end, Regex::Epsilon);
        }
        for &(p, a, q) in &self.transitions {
            add(&mut edges, p as usize, q as usize, Regex::Letter(a));
        }
        for k in 0..n {
            let loop_part = edges.remove(&(k, k)).map(Regex::star).unwrap_or(Regex::Epsilon);
            let ins: Vec<(usize, Regex)> = edges
                .iter()
                .filter(|((i, j), _)| *j == k && *i != k)
                .map(|((i, _), r)| (*i, r.clone()))
                .collect();
            let outs: Vec<(usize, Regex)> = edges
                .iter()
                .filter(|((i, j), _)| *i == k && *j != k)
                .map(|((_, j), r)| (*j, r.clone()))
                .collect();
            edges.retain(|(i, j), _| *i != k && *j != k);
            for (i, rin) in &ins {
                for (j, rout) in &outs {
                    let through = Regex::concat(vec![rin.clone(), loop_part.clone(), rout.clone()]);
                    add(&mut edges, *i, *j, through);
                }
            }
        }
        edges.remove(&(start, end)).unwrap_or(Regex::Empty)
    }
}

/// Compile a regex into its position automaton: one state per letter
/// occurrence plus a single start state.
pub fn compile_nfa(regex: &Regex, alphabet: &Alphabet) -> Nfa {
    #[derive(Default)]
    struct Build {
        letters: Vec<Option<Symbol>>, // None = any-letter position
    }
    struct Part {
        nullable: bool,
        first: Vec<usize>,
        last: Vec<usize>,
    }
    fn go(r: &Regex, b: &mut Build, follow: &mut Vec<BTreeSet<usize>>) -> Part {
        match r {
            Regex::Empty => Part { nullable: false, first: vec![], last: vec![] },
            Regex::Epsilon => Part { nullable: true, first: vec![], last: vec![] },
            Regex::Letter(s) => {
                let p = b.letters.len();
                b.letters.push(Some(*s));
                follow.push(BTreeSet::new());
                Part { nullable: false, first: vec![p], last: vec![p] }
            }
            Regex::AnyLetter => {
                let p = b.letters.len();
                b.letters.push(None);
                follow.push(BTreeSet::new());
                Part { nullable: false, first: vec![p], last: vec![p] }
            }
            Regex::Concat(cs) => {
                let mut acc = Part { nullable: true, first: vec![], last: vec![] };
                for c in cs {
                    let part = go(c, b, follow);
                    for &l in &acc.last {
                        follow[l].extend(part.first.iter().copied());
                    }
                    if acc.nullable {
                        acc.first.extend(part.first.iter().copied());
                    }
                    if part.nullable {
                        acc.last.extend(part.last.iter().copied());
                    } else {
                        acc.last = part.last;
                    }
                    acc.nullable &= part.nullable;
                }
                acc
            }
            Regex::Union(cs) => {
                let mut acc = Part { nullable: false, first: vec![], last: vec![] };
                for c in cs {
                    let part = go(c, b, follow);
                    acc.nullable |= part.nullable;
                    acc.first.extend(part.first);
                    acc.last.extend(part.last);
                }
                acc
            }
            Regex::Star(c) | Regex::Plus(c) => {
                let part = go(c, b, follow);
                for &l in &part.last {
                    follow[l].extend(part.first.iter().copied());
                }
                let nullable = part.nullable || matches!(r, Regex::Star(_));
                Part { nullable, first: part.first, last: part.last }
            }
            Regex::Opt(c) => {
                let part = go(c, b, follow);
                Part { nullable: true, first: part.first, last: part.last }
            }
        }
    }

    let mut b = Build::default();
    let mut follow: Vec<BTreeSet<usize>> = Vec::new();
    let part = go(regex, &mut b, &mut follow);

    let n_states = b.letters.len() as u32 + 1;
    let mut transitions = Vec::new();
    let letter_syms = |b: &Build, pos: usize| -> Vec<Symbol> {
        match b.letters[pos] {
            Some(s) => vec![s],
            None => alphabet.symbols().collect(),
        }
    };
    for &p in &part.first {
        for sym in letter_syms(&b, p) {
            transitions.push((0, sym, p as u32 + 1));
        }
    }
    for (p, succs) in follow.iter().enumerate() {
        for &q in succs {
            for sym in letter_syms(&b, q) {
                transitions.push((p as u32 + 1, sym, q as u32 + 1));
            }
        }
    }
    let mut finals: Vec<StateId> = part.last.iter().map(|&p| p as u32 + 1).collect();
    if part.nullable {
        finals.push(0);
    }
    let mut position_letters = vec![None];
    position_letters.extend(b.letters.iter().copied());
    let mut nfa = Nfa::new(alphabet.clone(), n_states, transitions, vec![0], finals);
    nfa.position_letters = position_letters;
    nfa
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::regex::parse_regex;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"])
    }

    fn compile(text: &str) -> Nfa {
        compile_nfa(&parse_regex(text, &ab()).unwrap(), &ab())
    }

    fn w(text: &str) -> Vec<Symbol> {
        let ab = ab();
        text.chars().map(|c| ab.lookup(&c.to_string()).unwrap()).collect()
    }

    /// Direct recursive matcher, independent of the automaton path.
    pub(crate) fn regex_matches(r: &Regex, word: &[Symbol]) -> bool {
        match r {
            Regex::Empty => false,
            Regex::Epsilon => word.is_empty(),
            Regex::Letter(s) => word == [*s],
            Regex::AnyLetter => word.len() == 1,
            Regex::Union(cs) => cs.iter().any(|c| regex_matches(c, word)),
            Regex::Concat(cs) => match cs.split_first() {
                None => word.is_empty(),
                Some((head, rest)) => (0..=word.len()).any(|i| {
                    regex_matches(head, &word[..i])
                        && regex_matches(&Regex::Concat(rest.to_vec()), &word[i..])
                }),
            },
            Regex::Star(c) => {
                word.is_empty()
                    || (1..=word.len()).any(|i| {
                        regex_matches(c, &word[..i])
                            && regex_matches(&Regex::Star(c.clone()), &word[i..])
                    })
            }
            Regex::Plus(c) => (1..=word.len()).any(|i| {
                regex_matches(c, &word[..i])
                    && (word.len() == i || regex_matches(&Regex::Plus(c.clone()), &word[i..]))
            }),
            Regex::Opt(c) => word.is_empty() || regex_matches(c, word),
        }
    }

    fn all_words(max_len: usize) -> Vec<Vec<Symbol>> {
        let mut out = vec![vec![]];
        let mut layer = vec![vec![]];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for word in &layer {
                for s in ab().symbols() {
                    let mut w = word.clone();
                    w.push(s);
                    next.push(w);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    #[test]
    fn plus_automaton_shape() {
        let n = compile("a+");
        assert_eq!(n.state_count(), 2);
        assert_eq!(n.initial(), &[0]);
        assert_eq!(n.finals(), &[1]);
        let a = Symbol(0);
        assert_eq!(n.transitions(), &[(0, a, 1), (1, a, 1)]);
    }

    #[test]
    fn double_letter_plus_automaton_shape() {
        let n = compile("(aa)+");
        assert_eq!(n.state_count(), 3);
        let a = Symbol(0);
        assert_eq!(n.transitions(), &[(0, a, 1), (1, a, 2), (2, a, 1)]);
        assert_eq!(n.finals(), &[2]);
    }

    #[test]
    fn epsilon_automaton() {
        let n = compile("%eps");
        assert_eq!(n.state_count(), 1);
        assert!(n.has_epsilon());
    }

    #[test]
    fn membership_matches_direct_matcher() {
        for text in ["a+", "(aa)+", "a*", "a+.(a|b)", "%any*", "(a|b).(a|b)", "a?b+", "b.a*"] {
            let r = parse_regex(text, &ab()).unwrap();
            let n = compile_nfa(&r, &ab());
            for word in all_words(6) {
                assert_eq!(
                    n.accepts(&word),
                    regex_matches(&r, &word),
                    "disagreement on {text} for {word:?}"
                );
            }
        }
    }

    #[test]
    fn sublanguage_of_plus() {
        let n = compile("a+");
        let s01 = n.sublanguage(0, 1).unwrap();
        let s11 = n.sublanguage(1, 1).unwrap();
        assert!(!s01.accepts(&w("")));
        assert!(s01.accepts(&w("a")));
        assert!(s01.accepts(&w("aaa")));
        assert!(s11.accepts(&w("")));
        assert!(s11.accepts(&w("aa")));
        assert!(n.sublanguage(0, 7).is_err());
    }

    #[test]
    fn language_ops_agree_with_words() {
        let plus = compile("a+");
        let even = compile("(aa)+");
        let inter = plus.intersect(&even).unwrap();
        assert!(inter.accepts(&w("aa")));
        assert!(!inter.accepts(&w("a")));
        let cat = compile("a").concat(&compile("b")).unwrap();
        for word in all_words(4) {
            assert_eq!(cat.accepts(&word), word == w("ab"));
        }
        let sigma_star = compile("%any*");
        let comp = sigma_star.complement(DEFAULT_COMPLEMENT_CAP).unwrap();
        assert!(comp.is_empty_language());
    }

    #[test]
    fn inclusion_checks() {
        let plus = compile("a+");
        let even = compile("(aa)+");
        assert!(even.included_in(&plus, DEFAULT_COMPLEMENT_CAP).unwrap());
        assert!(!plus.included_in(&even, DEFAULT_COMPLEMENT_CAP).unwrap());
        assert!(plus.included_in(&plus, DEFAULT_COMPLEMENT_CAP).unwrap());
    }

    #[test]
    fn concat_of_epsilon_accepting_parts() {
        let astar = compile("a*");
        let bstar = compile("b*");
        let cat = astar.concat(&bstar).unwrap();
        let r = parse_regex("a*.b*", &ab()).unwrap();
        for word in all_words(5) {
            assert_eq!(cat.accepts(&word), regex_matches(&r, &word), "on {word:?}");
        }
    }

    #[test]
    fn to_regex_preserves_language() {
        for text in ["a+", "(aa)+", "a*.b", "a+.(a|b)", "%any*", "(a|b)+"] {
            let n = compile(text);
            let back = compile_nfa(&n.to_regex(), &ab());
            for word in all_words(5) {
                assert_eq!(n.accepts(&word), back.accepts(&word), "on {text} {word:?}");
            }
        }
        // Sublanguages get printable syntax too.
        let n = compile("(aa)+");
        let sub = n.sublanguage(1, 2).unwrap();
        let back = compile_nfa(&sub.to_regex(), &ab());
        for word in all_words(5) {
            assert_eq!(sub.accepts(&word), back.accepts(&word));
        }
    }

    #[test]
    fn shortest_word_is_bfs_minimal() {
        let n = compile("(aa)+");
        assert_eq!(n.shortest_word(), Some(w("aa")));
        let empty = compile("%empty");
        assert_eq!(empty.shortest_word(), None);
    }

    #[test]
    fn words_up_to_enumerates_in_order() {
        let n = compile("a+");
        let words = n.words_up_to(3);
        assert_eq!(words, vec![w("a"), w("aa"), w("aaa")]);
    }
}
