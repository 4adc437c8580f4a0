//! Refinements, expansions and canonical databases.
//!
//! An atom refinement replaces an atom `x -[L]-> y` by a chain of at most
//! `m` atoms whose labels follow a state sequence of the label automaton
//! from an initial to a final state: each step is either the full state-pair
//! sublanguage or a single letter drawn from it. When the language accepts
//! the empty word, the equality refinement collapses `x` and `y` instead.
//! Expansions are the refinements whose every step is a letter: their
//! canonical databases are what containment checking runs on.
//!
//! Streams are deterministic: refinements are ordered by (atom index, chain
//! length, state sequence, option bits) and expansions by increasing total
//! word length, which makes reported counterexamples minimal within the
//! enumeration order.

use crate::alphabet::Symbol;
use crate::automata::nfa::StateId;
use crate::automata::regex::Regex;
use crate::automata::sre;
use crate::graphdb::{GraphDb, NodeId};
use crate::query::{Atom, Crpq, Label, Ucrpq, VarId};
use crate::{Error, Result};
use std::collections::BTreeMap;

/// One step of a chain refinement, between two states of the parent label
/// automaton.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChainStep {
    /// The whole sublanguage between the two states.
    Sub { from: StateId, to: StateId },
    /// A single letter drawn from that sublanguage.
    Letter { sym: Symbol, from: StateId, to: StateId },
}

/// A refinement of one atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomRefinement {
    /// Collapse the endpoints; available exactly when ε is in the language.
    Equality,
    Chain(Vec<ChainStep>),
}

/// All atom refinements of `atom` with chains of length at most `m`,
/// duplicate-free and deterministically ordered.
pub fn atom_refinements(atom: &Atom, m: usize) -> Vec<AtomRefinement> {
    let nfa = atom.label.nfa();
    let n = nfa.state_count() as usize;
    // reach[p][q]: is the sublanguage between p and q non-empty? It always
    // contains ε when p == q; otherwise q must be reachable in >= 1 step.
    let mut reach = vec![vec![false; n]; n];
    for p in 0..n {
        reach[p][p] = true;
    }
    for &(p, _, q) in nfa.transitions() {
        reach[p as usize][q as usize] = true;
    }
    for k in 0..n {
        for p in 0..n {
            for q in 0..n {
                reach[p][q] |= reach[p][k] && reach[k][q];
            }
        }
    }
    // letters[p][q]: single letters inside the sublanguage.
    let mut letters: BTreeMap<(usize, usize), Vec<Symbol>> = BTreeMap::new();
    for &(p, a, q) in nfa.transitions() {
        letters.entry((p as usize, q as usize)).or_default().push(a);
    }
    for v in letters.values_mut() {
        v.sort_unstable();
        v.dedup();
    }

    let mut out = Vec::new();
    if nfa.has_epsilon() {
        out.push(AtomRefinement::Equality);
    }
    // Depth-first over state sequences in lexicographic order, then over
    // per-step options (sublanguage before letters).
    let initials: Vec<usize> = nfa.initial().iter().map(|&s| s as usize).collect();
    let mut seq: Vec<usize> = Vec::new();
    for len in 1..=m {
        for &q0 in &initials {
            seq.push(q0);
            emit_sequences(nfa, &reach, &letters, &mut seq, len, &mut out);
            seq.pop();
        }
    }
    out
}

fn emit_sequences(
    nfa: &crate::automata::nfa::Nfa,
    reach: &[Vec<bool>],
    letters: &BTreeMap<(usize, usize), Vec<Symbol>>,
    seq: &mut Vec<usize>,
    len: usize,
    out: &mut Vec<AtomRefinement>,
) {
    if seq.len() == len + 1 {
        if !nfa.is_final(*seq.last().unwrap() as StateId) {
            return;
        }
        // Expand per-step options.
        let mut chains: Vec<Vec<ChainStep>> = vec![Vec::new()];
        for w in seq.windows(2) {
            let (p, q) = (w[0], w[1]);
            let mut options = vec![ChainStep::Sub { from: p as StateId, to: q as StateId }];
            if let Some(ls) = letters.get(&(p, q)) {
                options.extend(ls.iter().map(|&sym| ChainStep::Letter {
                    sym,
                    from: p as StateId,
                    to: q as StateId,
                }));
            }
            let mut next = Vec::with_capacity(chains.len() * options.len());
            for c in &chains {
                for o in &options {
                    let mut c2 = c.clone();
                    c2.push(o.clone());
                    next.push(c2);
                }
            }
            chains = next;
        }
        out.extend(chains.into_iter().map(AtomRefinement::Chain));
        return;
    }
    let last = *seq.last().unwrap();
    for q in 0..reach.len() {
        if reach[last][q] {
            seq.push(q);
            emit_sequences(nfa, reach, letters, seq, len, out);
            seq.pop();
        }
    }
}

/// Label for a chain step of `atom`, with a readable regex when the parent
/// classifies as a simple expression and a state-elimination regex otherwise.
pub fn step_label(atom: &Atom, step: &ChainStep) -> Label {
    let alphabet = atom.label.nfa().alphabet().clone();
    match step {
        ChainStep::Letter { sym, .. } => Label::letter(*sym, &alphabet),
        ChainStep::Sub { from, to } => {
            let nfa = atom.label.nfa();
            if nfa.initial() == [*from] && nfa.finals() == [*to] {
                return atom.label.clone();
            }
            if let Some(dec) = sre::sub_factors(atom.label.regex(), &alphabet, nfa, *from, *to) {
                let regex = match dec {
                    Some(factors) => sre::factors_to_regex(&factors),
                    None => Regex::Empty,
                };
                return Label::from_regex(regex, &alphabet);
            }
            let sub = nfa.sublanguage(*from, *to).expect("states checked by enumeration");
            Label::from_regex(sub.to_regex(), &alphabet)
        }
    }
}

fn fresh_name(base: String, used: &mut Vec<String>) -> String {
    let mut name = base;
    while used.contains(&name) {
        name.push('_');
    }
    used.push(name.clone());
    name
}

/// Materialize one refinement choice per atom into a query. Equality choices
/// merge endpoints (outputs keep their status through the merge) and chain
/// choices introduce fresh internal variables `t{atom}_{i}`.
pub fn materialize_refinement(q: &Crpq, choices: &[AtomRefinement]) -> Crpq {
    assert_eq!(choices.len(), q.atoms.len());
    // Union-find over the parent variables for equality collapses.
    let mut parent: Vec<usize> = (0..q.var_count()).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for (atom, choice) in q.atoms.iter().zip(choices) {
        if matches!(choice, AtomRefinement::Equality) {
            let (a, b) = (
                find(&mut parent, atom.src.0 as usize),
                find(&mut parent, atom.dst.0 as usize),
            );
            // Keep the smaller index as representative.
            let (keep, gone) = (a.min(b), a.max(b));
            parent[gone] = keep;
        }
    }
    let mut var_names: Vec<String> = Vec::new();
    let mut new_id: BTreeMap<usize, VarId> = BTreeMap::new();
    let mut used: Vec<String> = Vec::new();
    for v in 0..q.var_count() {
        let root = find(&mut parent, v);
        if let std::collections::btree_map::Entry::Vacant(e) = new_id.entry(root) {
            let name = fresh_name(q.var_name(VarId(root as u32)).to_string(), &mut used);
            e.insert(VarId(var_names.len() as u32));
            var_names.push(name);
        }
    }
    let mut atoms = Vec::new();
    for (idx, (atom, choice)) in q.atoms.iter().zip(choices).enumerate() {
        let AtomRefinement::Chain(steps) = choice else { continue };
        let src = new_id[&find(&mut parent, atom.src.0 as usize)];
        let dst = new_id[&find(&mut parent, atom.dst.0 as usize)];
        let mut prev = src;
        for (i, step) in steps.iter().enumerate() {
            let next = if i + 1 == steps.len() {
                dst
            } else {
                let name = fresh_name(format!("t{idx}_{}", i + 1), &mut used);
                var_names.push(name);
                VarId(var_names.len() as u32 - 1)
            };
            atoms.push(Atom { src: prev, label: step_label(atom, step), dst: next });
            prev = next;
        }
    }
    let outputs = q
        .outputs
        .iter()
        .map(|v| new_id[&find(&mut parent, v.0 as usize)])
        .collect();
    Crpq::new(q.name.clone(), q.alphabet().clone(), var_names, outputs, atoms)
}

/// All refinements of `q` with per-atom chains of length at most `m`, in
/// deterministic order.
pub fn refinements(q: &Crpq, m: usize) -> impl Iterator<Item = Crpq> + '_ {
    let per_atom: Vec<Vec<AtomRefinement>> =
        q.atoms.iter().map(|a| atom_refinements(a, m)).collect();
    CrossProduct::new(per_atom).map(move |choice| materialize_refinement(q, &choice))
}

/// Deterministic cross product iterator (first coordinate slowest).
struct CrossProduct<T: Clone> {
    lists: Vec<Vec<T>>,
    idx: Vec<usize>,
    done: bool,
}

impl<T: Clone> CrossProduct<T> {
    fn new(lists: Vec<Vec<T>>) -> Self {
        let done = lists.iter().any(Vec::is_empty);
        let idx = vec![0; lists.len()];
        CrossProduct { lists, idx, done }
    }
}

impl<T: Clone> Iterator for CrossProduct<T> {
    type Item = Vec<T>;
    fn next(&mut self) -> Option<Vec<T>> {
        if self.done {
            return None;
        }
        let item: Vec<T> =
            self.lists.iter().zip(&self.idx).map(|(l, &i)| l[i].clone()).collect();
        // Advance, last coordinate fastest.
        let mut k = self.lists.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.idx[k] += 1;
            if self.idx[k] < self.lists[k].len() {
                break;
            }
            self.idx[k] = 0;
        }
        if self.lists.is_empty() {
            self.done = true;
        }
        Some(item)
    }
}

/// An expansion: a conjunctive query obtained by replacing every atom with a
/// concrete word of its language, together with its provenance.
#[derive(Debug, Clone)]
pub struct Expansion {
    /// The expanded query; every label is a single letter.
    pub cq: Crpq,
    /// The chosen word per parent atom.
    pub words: Vec<Vec<Symbol>>,
    /// Parent variable to expanded variable (collapses from ε words).
    pub var_map: Vec<VarId>,
    /// Which disjunct of the parent union this expansion came from.
    pub disjunct: usize,
}

impl Expansion {
    pub fn total_len(&self) -> usize {
        self.words.iter().map(Vec::len).sum()
    }
}

/// Build the expansion of `q` choosing `words[i]` for atom `i`.
pub fn expansion_from_words(q: &Crpq, words: &[Vec<Symbol>], disjunct: usize) -> Result<Expansion> {
    if words.len() != q.atoms.len() {
        return Err(Error::Input(format!(
            "expected {} words, got {}",
            q.atoms.len(),
            words.len()
        )));
    }
    for (atom, w) in q.atoms.iter().zip(words) {
        if !atom.label.nfa().accepts(w) {
            let shown: Vec<&str> =
                w.iter().map(|&s| q.alphabet().name(s)).collect();
            return Err(Error::Input(format!(
                "word `{}` is not in the language of atom {} -[{}]-> {}",
                shown.join(""),
                q.var_name(atom.src),
                atom.label.regex().display(q.alphabet()),
                q.var_name(atom.dst),
            )));
        }
    }
    // Union-find for ε words.
    let mut parent: Vec<usize> = (0..q.var_count()).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for (atom, w) in q.atoms.iter().zip(words) {
        if w.is_empty() {
            let (a, b) = (
                find(&mut parent, atom.src.0 as usize),
                find(&mut parent, atom.dst.0 as usize),
            );
            let (keep, gone) = (a.min(b), a.max(b));
            parent[gone] = keep;
        }
    }
    let mut var_names: Vec<String> = Vec::new();
    let mut used: Vec<String> = Vec::new();
    let mut new_id: BTreeMap<usize, VarId> = BTreeMap::new();
    for v in 0..q.var_count() {
        let root = find(&mut parent, v);
        if let std::collections::btree_map::Entry::Vacant(e) = new_id.entry(root) {
            let name = fresh_name(q.var_name(VarId(root as u32)).to_string(), &mut used);
            e.insert(VarId(var_names.len() as u32));
            var_names.push(name);
        }
    }
    let alphabet = q.alphabet().clone();
    let mut atoms = Vec::new();
    for (idx, (atom, w)) in q.atoms.iter().zip(words).enumerate() {
        if w.is_empty() {
            continue;
        }
        let src = new_id[&find(&mut parent, atom.src.0 as usize)];
        let dst = new_id[&find(&mut parent, atom.dst.0 as usize)];
        let mut prev = src;
        for (i, &sym) in w.iter().enumerate() {
            let next = if i + 1 == w.len() {
                dst
            } else {
                let name = fresh_name(format!("e{idx}_{}", i + 1), &mut used);
                var_names.push(name);
                VarId(var_names.len() as u32 - 1)
            };
            atoms.push(Atom { src: prev, label: Label::letter(sym, &alphabet), dst: next });
            prev = next;
        }
    }
    let outputs: Vec<VarId> =
        q.outputs.iter().map(|v| new_id[&find(&mut parent, v.0 as usize)]).collect();
    let var_map: Vec<VarId> =
        (0..q.var_count()).map(|v| new_id[&find(&mut parent, v)]).collect();
    let cq = Crpq::new(q.name.clone(), alphabet, var_names, outputs, atoms);
    Ok(Expansion { cq, words: words.to_vec(), var_map, disjunct })
}

/// All expansions of `q` whose every atom word has length at most
/// `max_atom_len`, ordered by increasing total length.
pub fn expansions(q: &Crpq, max_atom_len: usize) -> impl Iterator<Item = Expansion> + '_ {
    union_expansions_inner(vec![(0usize, q)], max_atom_len)
}

/// Expansions of a union, ordered by (total length, disjunct index, word
/// choice); within one total length the disjuncts interleave in order.
pub fn union_expansions(
    u: &Ucrpq,
    max_atom_len: usize,
) -> impl Iterator<Item = Expansion> + '_ {
    union_expansions_inner(
        u.disjuncts.iter().enumerate().collect(),
        max_atom_len,
    )
}

fn union_expansions_inner<'a>(
    queries: Vec<(usize, &'a Crpq)>,
    max_atom_len: usize,
) -> impl Iterator<Item = Expansion> + 'a {
    // Per query, per atom: words grouped by length.
    struct Src<'a> {
        disjunct: usize,
        q: &'a Crpq,
        by_len: Vec<Vec<Vec<Vec<Symbol>>>>, // atom -> length -> words
        max_total: usize,
    }
    let sources: Vec<Src<'a>> = queries
        .into_iter()
        .map(|(disjunct, q)| {
            let by_len: Vec<Vec<Vec<Vec<Symbol>>>> = q
                .atoms
                .iter()
                .map(|a| {
                    let mut groups: Vec<Vec<Vec<Symbol>>> = vec![Vec::new(); max_atom_len + 1];
                    for w in a.label.nfa().words_up_to(max_atom_len) {
                        groups[w.len()].push(w);
                    }
                    groups
                })
                .collect();
            let max_total = by_len
                .iter()
                .map(|g| g.iter().rposition(|ws| !ws.is_empty()).unwrap_or(0))
                .sum();
            Src { disjunct, q, by_len, max_total }
        })
        .collect();
    let overall_max = sources.iter().map(|s| s.max_total).max().unwrap_or(0);

    (0..=overall_max).flat_map(move |total| {
        let mut batch: Vec<Expansion> = Vec::new();
        for src in &sources {
            let mut words: Vec<Vec<Symbol>> = vec![Vec::new(); src.q.atoms.len()];
            emit_size_exact(src.q, &src.by_len, 0, total, &mut words, &mut |ws| {
                if let Ok(e) = expansion_from_words(src.q, ws, src.disjunct) {
                    batch.push(e);
                }
            });
        }
        batch
    })
}

fn emit_size_exact(
    q: &Crpq,
    by_len: &[Vec<Vec<Vec<Symbol>>>],
    atom: usize,
    remaining: usize,
    words: &mut Vec<Vec<Symbol>>,
    found: &mut impl FnMut(&[Vec<Symbol>]),
) {
    if atom == by_len.len() {
        if remaining == 0 {
            found(words);
        }
        return;
    }
    for (len, group) in by_len[atom].iter().enumerate() {
        if len > remaining {
            break;
        }
        for w in group {
            words[atom] = w.clone();
            emit_size_exact(q, by_len, atom + 1, remaining - len, words, found);
        }
    }
    words[atom] = Vec::new();
}

/// The canonical database of an expansion: the expanded query read as a
/// graph, plus the node tuple its outputs land on.
pub fn canonical_database(e: &Expansion) -> (GraphDb, Vec<NodeId>) {
    let cq = &e.cq;
    let names: Vec<String> = cq.var_names().to_vec();
    let edges = cq.atoms.iter().map(|a| {
        (
            NodeId(a.src.0),
            a.label.as_letter().expect("expansions have letter labels"),
            NodeId(a.dst.0),
        )
    });
    let db = GraphDb::new(cq.alphabet().clone(), names, edges);
    let tuple = cq.outputs.iter().map(|v| NodeId(v.0)).collect();
    (db, tuple)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::eval::satisfies;
    use crate::query::CrpqBuilder;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b", "c"])
    }

    fn atom(regex: &str) -> Atom {
        CrpqBuilder::new("t", ab()).atom("x", regex, "y").unwrap().build().atoms[0].clone()
    }

    fn word(text: &str) -> Vec<Symbol> {
        let ab = ab();
        text.chars().map(|c| ab.lookup(&c.to_string()).unwrap()).collect()
    }

    #[test]
    fn plus_atom_refinements_at_one() {
        // Exactly the full-language chain and the single-letter chain.
        let refs = atom_refinements(&atom("a+"), 1);
        assert_eq!(
            refs,
            vec![
                AtomRefinement::Chain(vec![ChainStep::Sub { from: 0, to: 1 }]),
                AtomRefinement::Chain(vec![ChainStep::Letter {
                    sym: Symbol(0),
                    from: 0,
                    to: 1
                }]),
            ]
        );
    }

    #[test]
    fn even_plus_atom_refinements_include_letter_then_tail() {
        let refs = atom_refinements(&atom("(aa)+"), 2);
        let wanted = AtomRefinement::Chain(vec![
            ChainStep::Letter { sym: Symbol(0), from: 0, to: 1 },
            ChainStep::Sub { from: 1, to: 2 },
        ]);
        assert!(refs.contains(&wanted), "{refs:?}");
    }

    #[test]
    fn equality_emitted_exactly_when_epsilon_in_language() {
        assert!(atom_refinements(&atom("a*"), 1).contains(&AtomRefinement::Equality));
        assert!(!atom_refinements(&atom("a+"), 3).contains(&AtomRefinement::Equality));
    }

    #[test]
    fn equality_collapse_produces_self_loop_pattern() {
        // x -[a*]-> y, y -[c]-> y: choosing equality for the first atom
        // leaves a single self-loop atom on the merged variable.
        let mut b = CrpqBuilder::new("g", ab());
        b.output("x").output("y");
        b.atom("x", "a*", "y").unwrap();
        b.atom("y", "c", "y").unwrap();
        let q = b.build();
        let refined: Vec<Crpq> = refinements(&q, 1).collect();
        let collapsed: Vec<&Crpq> = refined.iter().filter(|r| r.var_count() == 1).collect();
        assert!(!collapsed.is_empty());
        let r = collapsed[0];
        assert_eq!(r.atom_count(), 1);
        assert_eq!(r.atoms[0].src, r.atoms[0].dst);
        assert_eq!(r.outputs, vec![VarId(0), VarId(0)]);
    }

    #[test]
    fn single_pair_automaton_refines_to_itself_at_one() {
        let mut b = CrpqBuilder::new("g", ab());
        b.atom("x", "a+", "y").unwrap();
        let q = b.build();
        let refined: Vec<Crpq> = refinements(&q, 1).collect();
        assert!(refined
            .iter()
            .any(|r| r.atom_count() == 1 && r.atoms[0].label == q.atoms[0].label));
    }

    #[test]
    fn zero_atom_query_refines_to_itself() {
        let q = CrpqBuilder::new("g", ab()).build();
        let refined: Vec<Crpq> = refinements(&q, 3).collect();
        assert_eq!(refined.len(), 1);
        assert_eq!(refined[0].atom_count(), 0);
    }

    #[test]
    fn expansion_words_within_bound() {
        let mut b = CrpqBuilder::new("g", ab());
        b.atom("x", "(aa)+", "y").unwrap();
        let q = b.build();
        let words: Vec<Vec<Vec<Symbol>>> =
            expansions(&q, 4).map(|e| e.words.clone()).collect();
        assert_eq!(words, vec![vec![word("aa")], vec![word("aaaa")]]);
    }

    #[test]
    fn expansion_pairs_enumerate_in_size_order() {
        let mut b = CrpqBuilder::new("g", ab());
        b.output("x").output("y");
        b.atom("x", "a+", "y").unwrap();
        b.atom("x", "(aa)+", "y").unwrap();
        let q = b.build();
        let seen: Vec<(usize, Vec<Vec<Symbol>>)> =
            expansions(&q, 2).map(|e| (e.total_len(), e.words.clone())).collect();
        assert_eq!(
            seen,
            vec![
                (3, vec![word("a"), word("aa")]),
                (4, vec![word("aa"), word("aa")]),
            ]
        );
    }

    #[test]
    fn epsilon_expansion_collapses_endpoints() {
        let mut b = CrpqBuilder::new("g", ab());
        b.atom("x", "a*", "y").unwrap();
        let q = b.build();
        let first = expansions(&q, 0).next().unwrap();
        assert_eq!(first.cq.var_count(), 1);
        assert_eq!(first.cq.atom_count(), 0);
    }

    #[test]
    fn canonical_database_of_word_pair() {
        let mut b = CrpqBuilder::new("g", ab());
        b.output("x").output("y");
        b.atom("x", "(aa)+", "y").unwrap();
        let q = b.build();
        let e = expansion_from_words(&q, &[word("aa")], 0).unwrap();
        let (db, tuple) = canonical_database(&e);
        assert_eq!(db.node_count(), 3);
        assert_eq!(db.edges().len(), 2);
        assert_eq!(tuple.len(), 2);
    }

    #[test]
    fn refinement_expansions_satisfy_the_parent() {
        // Soundness: expansions of any refinement, read as canonical
        // databases, satisfy the original query with pinned outputs.
        let mut b = CrpqBuilder::new("g", ab());
        b.output("x").output("y");
        b.atom("x", "(aa)+", "y").unwrap();
        b.atom("x", "a+", "y").unwrap();
        let q = b.build();
        let mut checked = 0;
        for rho in refinements(&q, 2).take(40) {
            for e in expansions(&rho, 3).take(5) {
                let (db, tuple) = canonical_database(&e);
                let pin: Vec<(VarId, NodeId)> =
                    q.outputs.iter().copied().zip(tuple.iter().copied()).collect();
                assert!(
                    satisfies(&q, &db, &pin).unwrap(),
                    "refinement expansion must satisfy the parent: {rho} / {:?}",
                    e.words
                );
                checked += 1;
            }
        }
        assert!(checked > 10);
    }

    #[test]
    fn invalid_expansion_word_is_rejected() {
        let mut b = CrpqBuilder::new("g", ab());
        b.atom("x", "(aa)+", "y").unwrap();
        let q = b.build();
        assert!(expansion_from_words(&q, &[word("a")], 0).is_err());
    }
}
