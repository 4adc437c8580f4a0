//! Maximal under-approximations by unions of bounded-shape queries, and the
//! minimization procedures built on them.
//!
//! A member of the approximation of a query within "graphs of at most `k`
//! edges" is witnessed by: a refinement of the query (chains of sublanguage
//! or letter steps along label-automaton state sequences), a homomorphism of
//! that refinement into a subdivided `k`-edge skeleton, and the contraction
//! of the skeleton back to `k` edges. The enumeration below walks each query
//! atom through candidate skeletons directly, assigning labels to skeleton
//! atoms as it goes: a skeleton atom receives the same label from every
//! chain step crossing it, and skeleton atoms crossed by no chain step stay
//! maximally general (`%any*`). Within one walk, revisiting a skeleton atom
//! from the same automaton state is cut (a shorter refinement covers it),
//! and `m` caps both walk length and subdivision depth.
//!
//! Soundness is by construction: every emitted disjunct is contained in the
//! input query. Completeness holds up to the refinement bound `m`; the
//! minimization verdicts say so explicitly when it is the limiting factor.

use crate::alphabet::{Alphabet, Symbol};
use crate::automata::nfa::{StateId, DEFAULT_COMPLEMENT_CAP};
use crate::automata::regex::Regex;
use crate::contain::{self, Mode, Status, Verdict};
use crate::exec;
use crate::multigraph::Multigraph;
use crate::query::{Atom, Crpq, Label, Ucrpq, VarId};
use crate::refine::{step_label, AtomRefinement, ChainStep};
use crate::{Error, Result};
use std::collections::BTreeMap;

/// Search-node budget for one skeleton task.
pub const DEFAULT_BUDGET: u64 = 5_000_000;

/// The default refinement-length ceiling for a query and shape bound.
pub fn default_refinement_length(u: &Ucrpq, k: usize) -> usize {
    (u.max_atoms().max(1)) * u.max_nfa_states().max(1) * k.max(1)
}

// ---------------------------------------------------------------------------
// Shape enumeration
// ---------------------------------------------------------------------------

/// All directed multigraphs with exactly `edges` edges (every vertex
/// incident) plus `isolated` extra vertices, up to isomorphism.
fn shapes_exact(edges: usize, isolated: usize) -> Vec<Multigraph> {
    let mut out: Vec<Multigraph> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    if edges == 0 {
        let g = Multigraph::new(isolated, Vec::new());
        if seen.insert(g.canonical_key()) {
            out.push(g);
        }
        return out;
    }
    for n in 1..=2 * edges {
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|u| (0..n).map(move |v| (u, v))).collect();
        // Non-decreasing pair indices enumerate each edge multiset once.
        let mut picks = vec![0usize; edges];
        enumerate_edge_multisets(&pairs, &mut picks, 0, 0, &mut |edge_list| {
            let mut incident = vec![false; n];
            for &(u, v) in edge_list {
                incident[u] = true;
                incident[v] = true;
            }
            if incident.iter().any(|&b| !b) {
                return;
            }
            let g = Multigraph::new(n + isolated, edge_list.to_vec());
            if seen.insert(g.canonical_key()) {
                out.push(g);
            }
        });
    }
    out
}

fn enumerate_edge_multisets(
    pairs: &[(usize, usize)],
    picks: &mut Vec<usize>,
    at: usize,
    min: usize,
    visit: &mut impl FnMut(&[(usize, usize)]),
) {
    if at == picks.len() {
        let edges: Vec<(usize, usize)> = picks.iter().map(|&i| pairs[i]).collect();
        visit(&edges);
        return;
    }
    for i in min..pairs.len() {
        picks[at] = i;
        enumerate_edge_multisets(pairs, picks, at + 1, i, visit);
    }
}

/// Shapes with `lo..=hi` edges and `0..=max_isolated` extra vertices.
fn shapes(lo: usize, hi: usize, max_isolated: usize) -> Vec<Multigraph> {
    let mut out = Vec::new();
    for e in lo..=hi {
        for iso in 0..=max_isolated {
            out.extend(shapes_exact(e, iso));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// The walk engine
// ---------------------------------------------------------------------------

struct AtomInfo {
    src: usize,
    dst: usize,
    epsilon: bool,
    /// reach\[p\]\[q\]: non-empty sublanguage between the states.
    reach: Vec<Vec<bool>>,
    /// Outgoing letter transitions per state.
    trans: Vec<Vec<(Symbol, StateId)>>,
    initial: Vec<StateId>,
    finals: Vec<StateId>,
}

struct EtaAtom {
    src: usize,
    dst: usize,
    g_edge: usize,
    slot: usize,
}

struct Engine<'a> {
    q: &'a Crpq,
    atoms: Vec<AtomInfo>,
    label_cache: BTreeMap<(usize, StateId, StateId), Label>,
    budget: u64,
}

impl<'a> Engine<'a> {
    fn new(q: &'a Crpq, budget: u64) -> Engine<'a> {
        let atoms = q
            .atoms
            .iter()
            .map(|a| {
                let nfa = a.label.nfa();
                let n = nfa.state_count() as usize;
                let mut reach = vec![vec![false; n]; n];
                for p in 0..n {
                    reach[p][p] = true;
                }
                let mut trans = vec![Vec::new(); n];
                for &(p, sym, r) in nfa.transitions() {
                    reach[p as usize][r as usize] = true;
                    trans[p as usize].push((sym, r));
                }
                for k in 0..n {
                    for p in 0..n {
                        for r in 0..n {
                            reach[p][r] |= reach[p][k] && reach[k][r];
                        }
                    }
                }
                AtomInfo {
                    src: a.src.0 as usize,
                    dst: a.dst.0 as usize,
                    epsilon: nfa.has_epsilon(),
                    reach,
                    trans,
                    initial: nfa.initial().to_vec(),
                    finals: nfa.finals().to_vec(),
                }
            })
            .collect();
        Engine { q, atoms, label_cache: BTreeMap::new(), budget }
    }

    fn step_label_for(&mut self, atom: usize, from: StateId, to: StateId) -> Label {
        if let Some(l) = self.label_cache.get(&(atom, from, to)) {
            return l.clone();
        }
        let l = step_label(&self.q.atoms[atom], &ChainStep::Sub { from, to });
        self.label_cache.insert((atom, from, to), l.clone());
        l
    }

    fn spend(&mut self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::Resource("under-approximation budget exhausted".into()));
        }
        self.budget -= 1;
        Ok(())
    }
}

struct Skeleton {
    g: Multigraph,
    eta_atoms: Vec<EtaAtom>,
    n_eta_vertices: usize,
    out: Vec<Vec<usize>>,
}

impl Skeleton {
    fn new(g: &Multigraph, subdiv: &[usize]) -> Skeleton {
        let n_g = g.vertex_count();
        let mut eta_atoms = Vec::new();
        let mut next_vertex = n_g;
        for (i, &(u, v)) in g.edges().iter().enumerate() {
            let c = subdiv[i];
            let mut prev = u;
            for s in 0..c {
                let to = if s + 1 == c {
                    v
                } else {
                    let t = next_vertex;
                    next_vertex += 1;
                    t
                };
                eta_atoms.push(EtaAtom { src: prev, dst: to, g_edge: i, slot: s });
                prev = to;
            }
        }
        let mut out = vec![Vec::new(); next_vertex];
        for (i, a) in eta_atoms.iter().enumerate() {
            out[a.src].push(i);
        }
        Skeleton { g: g.clone(), eta_atoms, n_eta_vertices: next_vertex, out }
    }

    fn is_g_vertex(&self, v: usize) -> bool {
        v < self.g.vertex_count()
    }
}

struct SearchState {
    h0: Vec<Option<usize>>,
    labels: Vec<Option<Label>>,
}

/// Output variables must land on skeleton vertices that survive contraction.
fn vertex_ok(q: &Crpq, sk: &Skeleton, var: usize, vertex: usize) -> bool {
    !q.is_output(VarId(var as u32)) || sk.is_g_vertex(vertex)
}

type Emit<'e> = dyn FnMut(&mut Engine<'_>, &SearchState) -> Result<()> + 'e;

fn search_atoms(
    engine: &mut Engine<'_>,
    sk: &Skeleton,
    m: usize,
    state: &mut SearchState,
    atom_idx: usize,
    emit: &mut Emit<'_>,
) -> Result<()> {
    engine.spend()?;
    if atom_idx == engine.atoms.len() {
        // Canonical form: no two adjacent unlabelled skeleton atoms (the
        // shorter subdivision yields an equivalent disjunct).
        for i in 1..sk.eta_atoms.len() {
            let (a, b) = (&sk.eta_atoms[i - 1], &sk.eta_atoms[i]);
            if a.g_edge == b.g_edge
                && b.slot == a.slot + 1
                && state.labels[i - 1].is_none()
                && state.labels[i].is_none()
            {
                return Ok(());
            }
        }
        return emit(engine, state);
    }
    let (src_var, dst_var, epsilon) = {
        let info = &engine.atoms[atom_idx];
        (info.src, info.dst, info.epsilon)
    };

    // Equality choice: both endpoints on one vertex, no labels touched.
    if epsilon {
        let candidates: Vec<usize> = match (state.h0[src_var], state.h0[dst_var]) {
            (Some(u), Some(v)) if u == v => vec![u],
            (Some(_), Some(_)) => vec![],
            (Some(u), None) | (None, Some(u)) => vec![u],
            (None, None) => (0..sk.n_eta_vertices).collect(),
        };
        for v in candidates {
            if !vertex_ok(engine.q, sk, src_var, v) || !vertex_ok(engine.q, sk, dst_var, v) {
                continue;
            }
            let (old_s, old_d) = (state.h0[src_var], state.h0[dst_var]);
            state.h0[src_var] = Some(v);
            state.h0[dst_var] = Some(v);
            search_atoms(engine, sk, m, state, atom_idx + 1, emit)?;
            state.h0[src_var] = old_s;
            state.h0[dst_var] = old_d;
        }
    }

    // Walk choices.
    let starts: Vec<usize> = match state.h0[src_var] {
        Some(u) => vec![u],
        None => (0..sk.n_eta_vertices).collect(),
    };
    for start in starts {
        if !vertex_ok(engine.q, sk, src_var, start) {
            continue;
        }
        let old_src = state.h0[src_var];
        state.h0[src_var] = Some(start);
        let initials = engine.atoms[atom_idx].initial.clone();
        for q0 in initials {
            let mut visited = Vec::new();
            walk(engine, sk, m, state, atom_idx, start, q0, 0, &mut visited, emit)?;
        }
        state.h0[src_var] = old_src;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn walk(
    engine: &mut Engine<'_>,
    sk: &Skeleton,
    m: usize,
    state: &mut SearchState,
    atom_idx: usize,
    vertex: usize,
    nfa_state: StateId,
    steps: usize,
    visited: &mut Vec<(usize, StateId)>,
    emit: &mut Emit<'_>,
) -> Result<()> {
    engine.spend()?;
    // Stop here if the automaton state is final and the end unifies.
    if steps > 0 && engine.atoms[atom_idx].finals.contains(&nfa_state) {
        let dst_var = engine.atoms[atom_idx].dst;
        let unifiable = match state.h0[dst_var] {
            Some(v) => v == vertex,
            None => vertex_ok(engine.q, sk, dst_var, vertex),
        };
        if unifiable {
            let old = state.h0[dst_var];
            state.h0[dst_var] = Some(vertex);
            search_atoms(engine, sk, m, state, atom_idx + 1, emit)?;
            state.h0[dst_var] = old;
        }
    }
    if steps == m {
        return Ok(());
    }
    let outgoing = sk.out[vertex].clone();
    for eta in outgoing {
        // Cut rule: never traverse one skeleton atom twice from the same
        // automaton state within one walk.
        if visited.contains(&(eta, nfa_state)) {
            continue;
        }
        let next_vertex = sk.eta_atoms[eta].dst;
        for (assigned, next_state) in walk_choices(engine, state, atom_idx, eta, nfa_state) {
            let undo = assigned.map(|label| {
                state.labels[eta] = Some(label);
                eta
            });
            visited.push((eta, nfa_state));
            walk(
                engine,
                sk,
                m,
                state,
                atom_idx,
                next_vertex,
                next_state,
                steps + 1,
                visited,
                emit,
            )?;
            visited.pop();
            if let Some(slot) = undo {
                state.labels[slot] = None;
            }
        }
    }
    Ok(())
}

/// Ways to traverse skeleton atom `eta` from `nfa_state`: either assign a
/// fresh label (`Some(label)`) or reuse the fixed one (`None`), ending in
/// the returned automaton state.
fn walk_choices(
    engine: &mut Engine<'_>,
    state: &SearchState,
    atom_idx: usize,
    eta: usize,
    nfa_state: StateId,
) -> Vec<(Option<Label>, StateId)> {
    let n = engine.atoms[atom_idx].reach.len() as u32;
    let reach_row: Vec<bool> = engine.atoms[atom_idx].reach[nfa_state as usize].clone();
    let trans_row: Vec<(Symbol, StateId)> =
        engine.atoms[atom_idx].trans[nfa_state as usize].clone();
    let mut out = Vec::new();
    match &state.labels[eta] {
        Some(existing) => {
            let existing = existing.clone();
            let mut succs: Vec<StateId> = Vec::new();
            for to in 0..n {
                if reach_row[to as usize]
                    && engine.step_label_for(atom_idx, nfa_state, to) == existing
                {
                    succs.push(to);
                }
            }
            if let Some(sym) = existing.as_letter() {
                for &(a, to) in &trans_row {
                    if a == sym {
                        succs.push(to);
                    }
                }
            }
            succs.sort_unstable();
            succs.dedup();
            out.extend(succs.into_iter().map(|to| (None, to)));
        }
        None => {
            for to in 0..n {
                if reach_row[to as usize] {
                    let label = engine.step_label_for(atom_idx, nfa_state, to);
                    out.push((Some(label), to));
                }
            }
            let mut seen = Vec::new();
            for &(a, to) in &trans_row {
                if !seen.contains(&(a, to)) {
                    seen.push((a, to));
                    out.push((Some(Label::letter(a, engine.q.alphabet())), to));
                }
            }
        }
    }
    out
}

/// Contract each skeleton edge path into one atom labelled by the
/// concatenation of its step labels (unlabelled steps are `%any*`), with
/// outputs at the images of the query outputs.
fn materialize_alpha(
    q: &Crpq,
    sk: &Skeleton,
    state: &SearchState,
    alphabet: &Alphabet,
) -> Option<Crpq> {
    let n = sk.g.vertex_count();
    let var_names: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    let mut atoms = Vec::new();
    for (i, &(u, v)) in sk.g.edges().iter().enumerate() {
        let mut parts: Vec<Regex> = Vec::new();
        for (j, ea) in sk.eta_atoms.iter().enumerate() {
            if ea.g_edge != i {
                continue;
            }
            match &state.labels[j] {
                Some(l) => parts.push(l.regex().clone()),
                None => parts.push(Regex::star(Regex::AnyLetter)),
            }
        }
        let regex = Regex::concat(parts);
        if regex == Regex::Empty {
            return None;
        }
        atoms.push(Atom {
            src: VarId(u as u32),
            label: Label::from_regex(regex, alphabet),
            dst: VarId(v as u32),
        });
    }
    let mut outputs = Vec::with_capacity(q.outputs.len());
    for &o in &q.outputs {
        let img = state.h0[o.0 as usize]?;
        debug_assert!(sk.is_g_vertex(img));
        outputs.push(VarId(img as u32));
    }
    let alpha = prune_isolated(&Crpq::new("app", alphabet.clone(), var_names, outputs, atoms));
    // Canonical vertex names after pruning.
    Some(Crpq::new(
        "app",
        alphabet.clone(),
        (0..alpha.var_count()).map(|i| format!("w{i}")).collect(),
        alpha.outputs.clone(),
        alpha.atoms.clone(),
    ))
}

/// Canonical key of a disjunct under vertex renaming, for deduplication.
fn alpha_key(alpha: &Crpq) -> String {
    let n = alpha.var_count();
    let mut best: Option<String> = None;
    let mut perm: Vec<usize> = (0..n).collect();
    fn permute(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == perm.len() {
            visit(perm);
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            permute(perm, k + 1, visit);
            perm.swap(k, i);
        }
    }
    permute(&mut perm, 0, &mut |p| {
        let mut edges: Vec<String> = alpha
            .atoms
            .iter()
            .map(|a| {
                format!(
                    "{}>{}:{}",
                    p[a.src.0 as usize],
                    p[a.dst.0 as usize],
                    a.label.regex().display(alpha.alphabet())
                )
            })
            .collect();
        edges.sort();
        let outs: Vec<String> =
            alpha.outputs.iter().map(|o| p[o.0 as usize].to_string()).collect();
        let key = format!("{n}|{}|{}", edges.join(";"), outs.join(","));
        if best.as_ref().map_or(true, |b| &key < b) {
            best = Some(key);
        }
    });
    best.unwrap_or_default()
}

/// Place any isolated output variables of the query on skeleton vertices,
/// emitting every placement.
fn place_isolated_outputs(
    engine: &mut Engine<'_>,
    sk: &Skeleton,
    state: &mut SearchState,
    emit: &mut Emit<'_>,
) -> Result<()> {
    let unplaced: Vec<usize> = engine
        .q
        .outputs
        .iter()
        .map(|o| o.0 as usize)
        .filter(|&v| state.h0[v].is_none())
        .collect();
    let Some(&var) = unplaced.first() else {
        return emit(engine, state);
    };
    for vertex in 0..sk.g.vertex_count() {
        state.h0[var] = Some(vertex);
        place_isolated_outputs(engine, sk, state, emit)?;
        state.h0[var] = None;
    }
    Ok(())
}

/// Drop non-output variables that touch no atom.
fn prune_isolated(q: &Crpq) -> Crpq {
    let mut used = vec![false; q.var_count()];
    for a in &q.atoms {
        used[a.src.0 as usize] = true;
        used[a.dst.0 as usize] = true;
    }
    for o in &q.outputs {
        used[o.0 as usize] = true;
    }
    let mut rename: Vec<Option<VarId>> = vec![None; q.var_count()];
    let mut names = Vec::new();
    for (i, &u) in used.iter().enumerate() {
        if u {
            rename[i] = Some(VarId(names.len() as u32));
            names.push(q.var_name(VarId(i as u32)).to_string());
        }
    }
    let atoms = q
        .atoms
        .iter()
        .map(|a| Atom {
            src: rename[a.src.0 as usize].unwrap(),
            label: a.label.clone(),
            dst: rename[a.dst.0 as usize].unwrap(),
        })
        .collect();
    let outputs = q.outputs.iter().map(|o| rename[o.0 as usize].unwrap()).collect();
    Crpq::new(q.name.clone(), q.alphabet().clone(), names, outputs, atoms)
}

/// Options for [`under_approximation_with`].
#[derive(Debug, Clone, Copy)]
pub struct ApproxOptions {
    /// Search-node budget per skeleton task.
    pub budget: u64,
    /// Pairwise bounded-containment deduplication of the emitted disjuncts.
    pub semantic_dedup: bool,
    pub dedup_bound: usize,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions { budget: DEFAULT_BUDGET, semantic_dedup: true, dedup_bound: 3 }
    }
}

/// The disjuncts of the maximal under-approximation of `u` by unions of
/// queries with at most `k` atoms, using refinements of length at most `m`.
/// Every returned disjunct is contained in `u`; the list may be empty.
pub fn under_approximation(u: &Ucrpq, k: usize, m: usize) -> Result<Vec<Crpq>> {
    under_approximation_with(u, k, m, ApproxOptions::default())
}

pub fn under_approximation_with(
    u: &Ucrpq,
    k: usize,
    m: usize,
    opts: ApproxOptions,
) -> Result<Vec<Crpq>> {
    let alphabet = u.alphabet().clone();
    let mut dedup: BTreeMap<String, Crpq> = BTreeMap::new();

    for disjunct in &u.disjuncts {
        // Zero-edge members exist exactly when every atom collapses via ε.
        if disjunct.atoms.iter().all(|a| a.label.nfa().has_epsilon()) {
            let choices = vec![AtomRefinement::Equality; disjunct.atom_count()];
            let collapsed =
                prune_isolated(&crate::refine::materialize_refinement(disjunct, &choices));
            let renamed = Crpq::new(
                "app",
                alphabet.clone(),
                (0..collapsed.var_count()).map(|i| format!("w{i}")).collect(),
                collapsed.outputs.clone(),
                collapsed.atoms.clone(),
            );
            dedup.entry(alpha_key(&renamed)).or_insert(renamed);
        }
        if k == 0 {
            continue;
        }
        // One task per (shape, subdivision); independent, merged in order.
        let mut tasks: Vec<(Multigraph, Vec<usize>)> = Vec::new();
        for g in shapes(1, k, disjunct.arity()) {
            let mut subdiv = vec![1usize; g.edge_count()];
            loop {
                tasks.push((g.clone(), subdiv.clone()));
                let mut i = 0;
                loop {
                    if i == subdiv.len() {
                        break;
                    }
                    subdiv[i] += 1;
                    if subdiv[i] <= m {
                        break;
                    }
                    subdiv[i] = 1;
                    i += 1;
                }
                if i == subdiv.len() {
                    break;
                }
            }
        }
        let results: Vec<Result<(String, Crpq)>> =
            exec::flat_map_ordered(tasks, |(g, subdiv)| {
                let mut engine = Engine::new(disjunct, opts.budget);
                let sk = Skeleton::new(g, subdiv);
                let mut found: Vec<Result<(String, Crpq)>> = Vec::new();
                let mut state = SearchState {
                    h0: vec![None; disjunct.var_count()],
                    labels: vec![None; sk.eta_atoms.len()],
                };
                let alphabet = alphabet.clone();
                let outcome = {
                    let mut emit: Box<Emit<'_>> = Box::new(|engine, st| {
                        let mut st2 =
                            SearchState { h0: st.h0.clone(), labels: st.labels.clone() };
                        let mut inner: Box<Emit<'_>> = Box::new(|eng, stf| {
                            if let Some(alpha) = materialize_alpha(eng.q, &sk, stf, &alphabet)
                            {
                                found.push(Ok((alpha_key(&alpha), alpha)));
                            }
                            Ok(())
                        });
                        place_isolated_outputs(engine, &sk, &mut st2, &mut inner)
                    });
                    search_atoms(&mut engine, &sk, m, &mut state, 0, &mut emit)
                };
                if let Err(e) = outcome {
                    found.push(Err(e));
                }
                found
            });
        for r in results {
            let (key, alpha) = r?;
            dedup.entry(key).or_insert(alpha);
        }
    }

    let mut list: Vec<Crpq> = dedup.into_values().collect();
    if opts.semantic_dedup {
        list = semantic_dedup(list, opts.dedup_bound)?;
    }
    Ok(list
        .into_iter()
        .enumerate()
        .map(|(i, d)| d.named(format!("app{i}")))
        .collect())
}

/// Remove disjuncts equivalent (under bounded containment both ways) to an
/// earlier one. The per-pair bound stretches to cover each side's shortest
/// expansion, so a clean pass is never vacuous. Sound: only equivalent
/// members collapse.
fn semantic_dedup(list: Vec<Crpq>, bound: usize) -> Result<Vec<Crpq>> {
    // Longest shortest-word over the atoms: a bound at least this large
    // guarantees the query has an expansion inside the bound.
    fn floor_bound(q: &Crpq) -> Option<usize> {
        q.atoms
            .iter()
            .map(|a| a.label.nfa().shortest_word().map(|w| w.len()))
            .collect::<Option<Vec<usize>>>()
            .map(|ls| ls.into_iter().max().unwrap_or(0))
    }
    let mut kept: Vec<Crpq> = Vec::new();
    let mut kept_keys: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    let mut kept_floors: Vec<Option<usize>> = Vec::new();
    for cand in list {
        let ckey = group_key(&cand);
        let cfloor = floor_bound(&cand);
        let mut dup = false;
        for ((prev, pkey), pfloor) in kept.iter().zip(&kept_keys).zip(&kept_floors) {
            if *pkey != ckey {
                continue;
            }
            let (Some(cf), Some(pf)) = (cfloor, *pfloor) else { continue };
            let pair_bound = bound.max(cf).max(pf);
            let a = Ucrpq::single(cand.clone());
            let b = Ucrpq::single(prev.clone());
            if contain::contained_bounded(&a, &b, pair_bound)?.is_positive()
                && contain::contained_bounded(&b, &a, pair_bound)?.is_positive()
            {
                dup = true;
                break;
            }
        }
        if !dup {
            kept_keys.push(ckey);
            kept_floors.push(cfloor);
            kept.push(cand);
        }
    }
    Ok(kept)
}

fn group_key(q: &Crpq) -> (usize, usize, Vec<usize>) {
    (q.var_count(), q.atom_count(), q.outputs.iter().map(|o| o.0 as usize).collect())
}

/// Does `delta` belong to the approximation? Searches for an emitted member
/// isomorphic to it with pairwise equivalent labels.
pub fn membership_in_app(delta: &Crpq, u: &Ucrpq, k: usize, m: usize) -> Result<bool> {
    if delta.atom_count() > k {
        return Ok(false);
    }
    let members = under_approximation_with(
        u,
        k,
        m,
        ApproxOptions { semantic_dedup: false, ..ApproxOptions::default() },
    )?;
    let dg = delta.underlying_graph();
    for alpha in &members {
        if alpha.arity() != delta.arity() {
            continue;
        }
        if !alpha.underlying_graph().is_isomorphic(&dg) {
            continue;
        }
        if query_matches(alpha, delta)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Isomorphism with per-atom language equivalence.
fn query_matches(alpha: &Crpq, delta: &Crpq) -> Result<bool> {
    let n = alpha.var_count();
    if n != delta.var_count() || alpha.atom_count() != delta.atom_count() {
        return Ok(false);
    }
    let mut perms = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    fn permutations(perm: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == perm.len() {
            out.push(perm.clone());
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            permutations(perm, k + 1, out);
            perm.swap(k, i);
        }
    }
    permutations(&mut perm, 0, &mut perms);
    'outer: for p in perms {
        for (a, d) in alpha.outputs.iter().zip(delta.outputs.iter()) {
            if p[a.0 as usize] != d.0 as usize {
                continue 'outer;
            }
        }
        let mut used = vec![false; delta.atom_count()];
        for a in &alpha.atoms {
            let mut matched = false;
            for (i, d) in delta.atoms.iter().enumerate() {
                if used[i]
                    || p[a.src.0 as usize] != d.src.0 as usize
                    || p[a.dst.0 as usize] != d.dst.0 as usize
                {
                    continue;
                }
                if a.label.nfa().equivalent_language(d.label.nfa(), DEFAULT_COMPLEMENT_CAP)? {
                    used[i] = true;
                    matched = true;
                    break;
                }
            }
            if !matched {
                continue 'outer;
            }
        }
        return Ok(true);
    }
    Ok(false)
}

// ---------------------------------------------------------------------------
// Minimization
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum MinimizeOutcome {
    /// An equivalent union with at most `k` atoms per disjunct.
    Minimizable(Ucrpq),
    /// Provably not equivalent to any such union; carries the separating
    /// expansion produced by the containment check.
    NotMinimizable(Box<contain::Counterexample>),
    /// No decision within the refinement bound reached.
    NotWithinBounds(usize),
}

/// Decide whether `u` is equivalent to a union of queries with at most `k`
/// atoms each, by testing `u` against its own under-approximation (the
/// reverse containment holds by construction). Simple-expression inputs get
/// a complete verdict. A positive answer at a small refinement length is
/// already sound because the approximation only grows with the length, so
/// the search escalates only on failure.
pub fn minimize_ucrpq(u: &Ucrpq, k: usize) -> Result<MinimizeOutcome> {
    minimize_ucrpq_mode(u, k, Mode::Auto)
}

/// [`minimize_ucrpq`] with the containment route pinned by the caller.
pub fn minimize_ucrpq_mode(u: &Ucrpq, k: usize, mode: Mode) -> Result<MinimizeOutcome> {
    let ceiling = default_refinement_length(u, k);
    let mut schedule: Vec<usize> = vec![2, 4, 6];
    schedule.retain(|&x| x < ceiling);
    schedule.push(ceiling);
    let mut last_m = 0;
    for (i, &m) in schedule.iter().enumerate() {
        last_m = m;
        let disjuncts = under_approximation(u, k, m)?;
        if disjuncts.is_empty() {
            // Only queries with an unsatisfiable atom produce an empty
            // approximation; any expansion of the input separates it.
            if let Some(e) = crate::refine::union_expansions(u, 4).next() {
                let (db, tuple) = crate::refine::canonical_database(&e);
                return Ok(MinimizeOutcome::NotMinimizable(Box::new(
                    contain::Counterexample { expansion: e, db, tuple },
                )));
            }
            return Ok(MinimizeOutcome::NotWithinBounds(m));
        }
        let delta = Ucrpq::new(disjuncts)?;
        let verdict: Verdict = match mode {
            Mode::Sre => contain::contained_sre(u, &delta, true)?,
            Mode::Bounded(b) => contain::contained_bounded(u, &delta, b)?,
            Mode::Auto => {
                if contain::sre_applicable(u, &delta, true) {
                    contain::contained_sre(u, &delta, true)?
                } else {
                    contain::contained_bounded(u, &delta, contain::DEFAULT_MAX_ATOM_LEN)?
                }
            }
        };
        match verdict.status {
            Status::Contained => return Ok(MinimizeOutcome::Minimizable(delta)),
            Status::ContainedUpToBound(_) => {
                // Positive but incomplete; a larger refinement length cannot
                // make it complete.
                return Ok(MinimizeOutcome::NotWithinBounds(m));
            }
            Status::NotContained(cex) => {
                if i + 1 == schedule.len() {
                    return Ok(MinimizeOutcome::NotMinimizable(cex));
                }
            }
        }
    }
    Ok(MinimizeOutcome::NotWithinBounds(last_m))
}

// ---------------------------------------------------------------------------
// Brute-force single-query search
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct PoolConfig {
    /// Labels are concatenations of up to this many pool entries.
    pub max_concat: usize,
    /// Cap on candidate queries tested.
    pub budget: u64,
}

impl Default for PoolConfig {
    fn default() -> Self {
        PoolConfig { max_concat: 2, budget: 500_000 }
    }
}

/// Search for an equivalent single query with at most `k` atoms, labelling
/// candidate shapes from a pool of the input's own sublanguages, single
/// letters and `%any*`. Returns the first hit in enumeration order, `None`
/// when the pool-relative space is exhausted.
pub fn minimize_crpq_bruteforce(q: &Crpq, k: usize, config: PoolConfig) -> Result<Option<Crpq>> {
    let alphabet = q.alphabet().clone();
    fn push_unique(base: &mut Vec<Label>, l: Label) -> Result<()> {
        if l.nfa().is_empty_language() {
            return Ok(());
        }
        for existing in base.iter() {
            if existing.nfa().equivalent_language(l.nfa(), DEFAULT_COMPLEMENT_CAP)? {
                return Ok(());
            }
        }
        base.push(l);
        Ok(())
    }
    let mut base: Vec<Label> = Vec::new();
    for atom in &q.atoms {
        let nfa = atom.label.nfa();
        for p in 0..nfa.state_count() {
            for r in 0..nfa.state_count() {
                push_unique(&mut base, step_label(atom, &ChainStep::Sub { from: p, to: r }))?;
            }
        }
    }
    for sym in alphabet.symbols() {
        push_unique(&mut base, Label::letter(sym, &alphabet))?;
    }
    push_unique(&mut base, Label::any_star(&alphabet))?;
    let mut pool: Vec<Label> = base.clone();
    let mut layer: Vec<Label> = base.clone();
    for _ in 1..config.max_concat.max(1) {
        let mut next = Vec::new();
        for left in &layer {
            for right in &base {
                next.push(Label::from_regex(
                    Regex::concat(vec![left.regex().clone(), right.regex().clone()]),
                    &alphabet,
                ));
            }
        }
        pool.extend(next.iter().cloned());
        layer = next;
    }

    let gamma = Ucrpq::single(q.clone());
    let mut tried: u64 = 0;
    for g in shapes(0, k, q.arity()) {
        let n = g.vertex_count();
        if n == 0 && q.arity() > 0 {
            continue;
        }
        let e = g.edge_count();
        let mut label_idx = vec![0usize; e];
        loop {
            let mut out_idx = vec![0usize; q.arity()];
            loop {
                tried += 1;
                if tried > config.budget {
                    return Err(Error::Resource(format!(
                        "candidate budget {} exhausted",
                        config.budget
                    )));
                }
                let candidate = Crpq::new(
                    "cand",
                    alphabet.clone(),
                    (0..n).map(|i| format!("w{i}")).collect(),
                    out_idx.iter().map(|&i| VarId(i as u32)).collect(),
                    g.edges()
                        .iter()
                        .zip(&label_idx)
                        .map(|(&(u, v), &li)| Atom {
                            src: VarId(u as u32),
                            label: pool[li].clone(),
                            dst: VarId(v as u32),
                        })
                        .collect(),
                );
                let cu = Ucrpq::single(candidate.clone());
                let (fwd, bwd) = contain::equivalent(&gamma, &cu, Mode::Auto)?;
                if fwd.is_positive() && bwd.is_positive() {
                    return Ok(Some(candidate));
                }
                if !advance(&mut out_idx, n) {
                    break;
                }
            }
            if e == 0 || !advance(&mut label_idx, pool.len()) {
                break;
            }
        }
    }
    Ok(None)
}

fn advance(idx: &mut [usize], base: usize) -> bool {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < base {
            return true;
        }
        idx[i] = 0;
    }
    false
}
