//! Equivalence-preserving structural passes and minimality diagnostics:
//! contraction, segments, segment graphs, redundant-atom elimination and
//! strong-minimality certificates.

use crate::contain::{contained, Mode};
use crate::hom::{self, HomGraph};
use crate::multigraph::Multigraph;
use crate::query::{Atom, Crpq, Label, Ucrpq, VarId};
use crate::refine::{expansion_from_words, union_expansions, Expansion};
use crate::automata::regex::Regex;
use crate::{Error, Result};

/// A maximal one-way path of atoms through internal variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    /// Atom indices in path order (cyclic segments start at their smallest
    /// atom index).
    pub atoms: Vec<usize>,
    pub start: VarId,
    pub end: VarId,
    pub cyclic: bool,
}

impl Segment {
    /// Incident to no external variable (an isolated cycle of internal
    /// variables).
    pub fn is_isolated_cycle(&self, internal: &[bool]) -> bool {
        self.cyclic && internal[self.start.0 as usize]
    }
}

/// Partition the atoms into segments.
pub fn segments(q: &Crpq) -> Vec<Segment> {
    let internal = q.internal_vars();
    let n_atoms = q.atoms.len();
    // The unique outgoing atom of each internal variable.
    let mut out_atom: Vec<Option<usize>> = vec![None; q.var_count()];
    for (i, a) in q.atoms.iter().enumerate() {
        let s = a.src.0 as usize;
        if internal[s] {
            debug_assert!(out_atom[s].is_none());
            out_atom[s] = Some(i);
        }
    }
    let mut visited = vec![false; n_atoms];
    let mut segs = Vec::new();
    // Paths starting at an external variable.
    for start in 0..n_atoms {
        if visited[start] || internal[q.atoms[start].src.0 as usize] {
            continue;
        }
        let mut atoms = Vec::new();
        let mut cur = start;
        loop {
            visited[cur] = true;
            atoms.push(cur);
            let dst = q.atoms[cur].dst.0 as usize;
            if !internal[dst] {
                break;
            }
            let next = out_atom[dst].expect("internal variables have one outgoing atom");
            if visited[next] {
                break;
            }
            cur = next;
        }
        let (s, e) = (q.atoms[start].src, q.atoms[*atoms.last().unwrap()].dst);
        segs.push(Segment { atoms, start: s, end: e, cyclic: s == e });
    }
    // What remains are cycles of internal variables.
    for start in 0..n_atoms {
        if visited[start] {
            continue;
        }
        let mut atoms = Vec::new();
        let mut cur = start;
        loop {
            visited[cur] = true;
            atoms.push(cur);
            let dst = q.atoms[cur].dst.0 as usize;
            let next = out_atom[dst].expect("cycle variables are internal");
            if next == start {
                break;
            }
            cur = next;
        }
        let s = q.atoms[start].src;
        segs.push(Segment { atoms, start: s, end: s, cyclic: true });
    }
    segs
}

/// Number of segments.
pub fn segment_count(q: &Crpq) -> usize {
    segments(q).len()
}

/// The segment graph: one vertex per external variable (plus a fresh vertex
/// per isolated cycle), one edge per segment. Returns the graph with its
/// vertex names.
pub fn segment_graph(q: &Crpq) -> (Multigraph, Vec<String>) {
    let internal = q.internal_vars();
    let segs = segments(q);
    let mut names: Vec<String> = Vec::new();
    let mut vertex_of_var: Vec<Option<usize>> = vec![None; q.var_count()];
    for v in q.vars() {
        if !internal[v.0 as usize] {
            vertex_of_var[v.0 as usize] = Some(names.len());
            names.push(q.var_name(v).to_string());
        }
    }
    let mut edges = Vec::new();
    for (i, seg) in segs.iter().enumerate() {
        if seg.is_isolated_cycle(&internal) {
            let fresh = names.len();
            names.push(format!("cycle{i}"));
            edges.push((fresh, fresh));
        } else {
            let s = vertex_of_var[seg.start.0 as usize].expect("external");
            let e = vertex_of_var[seg.end.0 as usize].expect("external");
            edges.push((s, e));
        }
    }
    (Multigraph::new(names.len(), edges), names)
}

/// Fully contract: repeatedly merge the two distinct atoms through the
/// lowest-indexed contractible internal variable into one atom labelled by
/// the concatenation. The result has one atom per segment.
pub fn contract(q: &Crpq) -> Crpq {
    let mut current = q.clone();
    loop {
        let internal = current.internal_vars();
        let mut pick: Option<(usize, usize, usize)> = None; // (var, in_atom, out_atom)
        for v in 0..current.var_count() {
            if !internal[v] {
                continue;
            }
            let vin = current
                .atoms
                .iter()
                .position(|a| a.dst.0 as usize == v)
                .expect("internal var has an incoming atom");
            let vout = current
                .atoms
                .iter()
                .position(|a| a.src.0 as usize == v)
                .expect("internal var has an outgoing atom");
            // A lone self-loop is its own in- and out-atom; contraction
            // needs two distinct atoms.
            if vin != vout {
                pick = Some((v, vin, vout));
                break;
            }
        }
        let Some((v, vin, vout)) = pick else { return current };
        let alphabet = current.alphabet().clone();
        let merged_label = Label::from_regex(
            Regex::concat(vec![
                current.atoms[vin].label.regex().clone(),
                current.atoms[vout].label.regex().clone(),
            ]),
            &alphabet,
        );
        let src = current.atoms[vin].src;
        let dst = current.atoms[vout].dst;
        let remap = |x: VarId| -> VarId {
            if x.0 as usize > v {
                VarId(x.0 - 1)
            } else {
                x
            }
        };
        let mut names = current.var_names().to_vec();
        names.remove(v);
        let mut atoms: Vec<Atom> = Vec::new();
        for (i, a) in current.atoms.iter().enumerate() {
            if i == vin || i == vout {
                continue;
            }
            atoms.push(Atom { src: remap(a.src), label: a.label.clone(), dst: remap(a.dst) });
        }
        // Insert the merged atom where the incoming atom sat, keeping the
        // original atom order stable.
        let insert_at = atoms.len().min(vin.min(vout));
        atoms.insert(insert_at, Atom { src: remap(src), label: merged_label, dst: remap(dst) });
        let outputs = current.outputs.iter().map(|&o| remap(o)).collect();
        current = Crpq::new(current.name.clone(), alphabet, names, outputs, atoms);
    }
}

/// One removal decision of [`remove_redundant_atoms`].
#[derive(Debug, Clone)]
pub struct RemovalDecision {
    /// Rendered atom, e.g. `x -[a+]-> y`.
    pub atom: String,
    pub removed: bool,
    /// Whether the verdict behind the decision was complete.
    pub complete: bool,
}

#[derive(Debug, Clone)]
pub struct RedundancyReport {
    pub decisions: Vec<RemovalDecision>,
    /// True when every decision rested on a complete verdict; only then is
    /// the result certified non-redundant.
    pub complete: bool,
}

fn drop_atom_keep_outputs(q: &Crpq, i: usize) -> Crpq {
    let mut atoms = q.atoms.clone();
    atoms.remove(i);
    let mut used = vec![false; q.var_count()];
    for a in &atoms {
        used[a.src.0 as usize] = true;
        used[a.dst.0 as usize] = true;
    }
    for v in &q.outputs {
        used[v.0 as usize] = true;
    }
    let mut rename: Vec<Option<VarId>> = vec![None; q.var_count()];
    let mut names = Vec::new();
    for (idx, &keep) in used.iter().enumerate() {
        if keep {
            rename[idx] = Some(VarId(names.len() as u32));
            names.push(q.var_name(VarId(idx as u32)).to_string());
        }
    }
    let atoms = atoms
        .into_iter()
        .map(|mut a| {
            a.src = rename[a.src.0 as usize].unwrap();
            a.dst = rename[a.dst.0 as usize].unwrap();
            a
        })
        .collect();
    let outputs = q.outputs.iter().map(|v| rename[v.0 as usize].unwrap()).collect();
    Crpq::new(q.name.clone(), q.alphabet().clone(), names, outputs, atoms)
}

fn render_atom(q: &Crpq, a: &Atom) -> String {
    format!(
        "{} -[{}]-> {}",
        q.var_name(a.src),
        a.label.regex().display(q.alphabet()),
        q.var_name(a.dst)
    )
}

/// Greedily remove atoms whose removal keeps the query equivalent under the
/// given containment mode. Removing an atom always relaxes the query, so
/// only the reduced-into-original direction is decided; equivalence after
/// each removal is re-checked from scratch.
pub fn remove_redundant_atoms(q: &Crpq, mode: Mode) -> Result<(Crpq, RedundancyReport)> {
    let mut current = q.clone();
    let mut decisions = Vec::new();
    let mut i = 0;
    while i < current.atoms.len() {
        let candidate = drop_atom_keep_outputs(&current, i);
        let rendered = render_atom(&current, &current.atoms[i]);
        let verdict = contained(
            &Ucrpq::single(candidate.clone()),
            &Ucrpq::single(current.clone()),
            mode,
        )?;
        if verdict.is_positive() {
            decisions.push(RemovalDecision {
                atom: rendered,
                removed: true,
                complete: verdict.is_complete(),
            });
            current = candidate;
            // Atom i changed; rescan from the same index.
        } else {
            decisions.push(RemovalDecision { atom: rendered, removed: false, complete: true });
            i += 1;
        }
    }
    let complete = decisions.iter().all(|d| d.complete);
    Ok((current, RedundancyReport { decisions, complete }))
}

/// Outcome of a strong-minimality check.
#[derive(Debug, Clone)]
pub enum CertificateStatus {
    /// No refuting expansion with at most this many atoms exists.
    VerifiedUpTo(usize),
    /// A more general expansion maps into this one but not back.
    Refuted(Box<Expansion>),
}

/// Certificate produced by [`check_strong_minimality`].
#[derive(Debug, Clone)]
pub struct Certificate {
    pub expansion: Expansion,
    pub core: Crpq,
    pub segment_graph: Multigraph,
    pub segment_graph_names: Vec<String>,
    pub core_segments: usize,
    pub status: CertificateStatus,
}

impl Certificate {
    /// With a verified certificate, no equivalent union can use fewer atoms
    /// per disjunct than this.
    pub fn implied_atom_lower_bound(&self) -> Option<usize> {
        match self.status {
            CertificateStatus::VerifiedUpTo(_) => Some(self.core_segments),
            CertificateStatus::Refuted(_) => None,
        }
    }
}

/// Check whether `xi` is hom-minimal among expansions of `gamma` with at
/// most `hom_bound` atoms: any such expansion mapping into `xi` must be
/// hom-equivalent to it. Returns the core, its segment data and either a
/// bounded verification or a refuting witness.
pub fn check_strong_minimality(
    gamma: &Ucrpq,
    xi: &Expansion,
    hom_bound: usize,
) -> Result<Certificate> {
    let disjunct = gamma
        .disjuncts
        .get(xi.disjunct)
        .ok_or_else(|| Error::Input(format!("no disjunct #{}", xi.disjunct)))?;
    // Re-derive the expansion from its provenance; fails if the words do not
    // belong to the atom languages.
    let rebuilt = expansion_from_words(disjunct, &xi.words, xi.disjunct)?;
    if !hom::cq_isomorphic(&rebuilt.cq, &xi.cq)? {
        return Err(Error::Input("expansion does not match its provenance".into()));
    }
    let core = hom::core(&xi.cq)?;
    let (seg_graph, names) = segment_graph(&core);
    let core_segments = segments(&core).len();
    let xi_graph = HomGraph::from_cq(&xi.cq)?;
    let refuted = union_expansions(gamma, hom_bound)
        .take_while(|e| e.total_len() <= hom_bound)
        .find(|e| {
            let Ok(candidate) = HomGraph::from_cq(&e.cq) else { return false };
            hom::find_hom(&candidate, &xi_graph, &[]).is_some()
                && hom::find_hom(&xi_graph, &candidate, &[]).is_none()
        });
    let status = match refuted {
        Some(witness) => CertificateStatus::Refuted(Box::new(witness)),
        None => CertificateStatus::VerifiedUpTo(hom_bound),
    };
    Ok(Certificate {
        expansion: xi.clone(),
        core,
        segment_graph: seg_graph,
        segment_graph_names: names,
        core_segments,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::contain::falsify_equivalence;
    use crate::query::{parse_query, CrpqBuilder};

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b", "c"])
    }

    fn q(text: &str) -> Crpq {
        parse_query(text).unwrap().disjuncts.remove(0)
    }

    #[test]
    fn contracting_a_two_atom_path() {
        let query = q("alphabet a, b;\nquery g(){ x -[a]-> t; t -[b]-> z; }");
        let c = contract(&query);
        assert_eq!(c.atom_count(), 1);
        assert_eq!(c.var_count(), 2);
        let printed = c.atoms[0].label.regex().display(c.alphabet()).to_string();
        assert_eq!(printed, "a.b");
    }

    #[test]
    fn parallel_atoms_do_not_contract() {
        let query = q("alphabet a;\nquery g(x,y){ x -[a+]-> y; x -[(aa)+]-> y; }");
        let c = contract(&query);
        assert_eq!(c.atom_count(), 2);
    }

    #[test]
    fn three_atom_chain_contracts_to_one() {
        let query = q("alphabet a, b, c;\nquery g(){ x -[a]-> s; s -[b]-> t; t -[c]-> y; }");
        let c = contract(&query);
        assert_eq!(c.atom_count(), 1);
        // Semantics preserved on random databases.
        let u1 = Ucrpq::single(query);
        let u2 = Ucrpq::single(c);
        assert!(falsify_equivalence(&u1, &u2, 50, 4, 7).unwrap().is_none());
    }

    #[test]
    fn lone_self_loop_does_not_contract() {
        let query = q("alphabet a;\nquery g(){ x -[a]-> x; }");
        let c = contract(&query);
        assert_eq!(c.atom_count(), 1);
    }

    #[test]
    fn segments_partition_atoms() {
        // Path through an internal t plus a parallel direct atom.
        let query = q("alphabet a, b, c;\nquery g(){ x -[a]-> t; t -[b]-> y; x -[c]-> y; }");
        let segs = segments(&query);
        assert_eq!(segs.len(), 2);
        let mut all: Vec<usize> = segs.iter().flat_map(|s| s.atoms.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2]);
        assert_eq!(contract(&query).atom_count(), 2);
    }

    #[test]
    fn self_loop_is_one_cyclic_segment() {
        let query = q("alphabet a;\nquery g(){ x -[a]-> x; }");
        let segs = segments(&query);
        assert_eq!(segs.len(), 1);
        assert!(segs[0].cyclic);
    }

    #[test]
    fn fully_contracted_query_has_one_atom_per_segment() {
        let query = q("alphabet a, b;\nquery g(x,y){ x -[a+]-> y; x -[b]-> y; }");
        assert_eq!(segments(&query).len(), query.atom_count());
    }

    #[test]
    fn segment_graph_of_parallel_pair() {
        let query = q("alphabet a, b, c;\nquery g(){ x -[a]-> t; t -[b]-> y; x -[c]-> y; }");
        let (g, names) = segment_graph(&query);
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(names, vec!["x", "y"]);
    }

    #[test]
    fn isolated_internal_cycle_gets_a_fresh_vertex() {
        let query = q("alphabet a;\nquery g(){ x -[a]-> y; y -[a]-> x; }");
        // Both x and y are internal (Boolean, degree (1,1)).
        let (g, _) = segment_graph(&query);
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges()[0].0, g.edges()[0].1);
    }

    #[test]
    fn redundant_duplicate_atom_is_removed_completely() {
        let query = q("alphabet a;\nquery g(x,y){ x -[a+]-> y; x -[a+]-> y; }");
        let (reduced, report) = remove_redundant_atoms(&query, Mode::Sre).unwrap();
        assert_eq!(reduced.atom_count(), 1);
        assert!(report.complete);
        assert!(report.decisions[0].removed);
    }

    #[test]
    fn single_atom_query_is_untouched() {
        let query = q("alphabet a;\nquery g(x,y){ x -[a+]-> y; }");
        let (reduced, report) = remove_redundant_atoms(&query, Mode::Sre).unwrap();
        assert_eq!(reduced.atom_count(), 1);
        assert!(report.complete);
        assert!(!report.decisions[0].removed);
    }

    #[test]
    fn parity_pair_removes_the_weaker_atom() {
        let query = q("alphabet a;\nquery g(x,y){ x -[a+]-> y; x -[(aa)+]-> y; }");
        let (reduced, report) = remove_redundant_atoms(&query, Mode::Bounded(8)).unwrap();
        assert_eq!(reduced.atom_count(), 1);
        let printed = reduced.atoms[0].label.regex().display(reduced.alphabet()).to_string();
        assert_eq!(printed, "(a.a)+");
        // Bounded removal is not certified complete.
        assert!(!report.complete);
        assert!(report.decisions.iter().any(|d| d.removed && !d.complete));
    }

    #[test]
    fn strong_minimality_dichotomy_on_the_parity_pair() {
        let gamma = parse_query(
            "alphabet a;\nquery g(x,y){ x -[a+]-> y; x -[(aa)+]-> y; }",
        )
        .unwrap();
        let d = &gamma.disjuncts[0];
        let aa: Vec<_> = vec![
            gamma.alphabet().lookup("a").unwrap(),
            gamma.alphabet().lookup("a").unwrap(),
        ];
        let one = vec![gamma.alphabet().lookup("a").unwrap()];
        // Expansion (a, aa): refuted by (aa, aa).
        let xi = expansion_from_words(d, &[one, aa.clone()], 0).unwrap();
        let cert = check_strong_minimality(&gamma, &xi, 6).unwrap();
        match &cert.status {
            CertificateStatus::Refuted(witness) => {
                assert_eq!(witness.words, vec![aa.clone(), aa.clone()]);
            }
            other => panic!("expected refutation, got {other:?}"),
        }
        // Expansion (aa, aa): hom-minimal up to the bound, one segment.
        let xi2 = expansion_from_words(d, &[aa.clone(), aa.clone()], 0).unwrap();
        let cert2 = check_strong_minimality(&gamma, &xi2, 6).unwrap();
        assert!(matches!(cert2.status, CertificateStatus::VerifiedUpTo(6)));
        assert_eq!(cert2.core_segments, 1);
        assert_eq!(cert2.implied_atom_lower_bound(), Some(1));
    }

    #[test]
    fn self_loop_plus_query_has_no_hom_minimal_expansions() {
        let gamma = parse_query("alphabet a;\nquery g(){ x -[a+]-> x; }").unwrap();
        let d = &gamma.disjuncts[0];
        let a2 = vec![gamma.alphabet().lookup("a").unwrap(); 2];
        let xi = expansion_from_words(d, &[a2], 0).unwrap();
        let cert = check_strong_minimality(&gamma, &xi, 4).unwrap();
        assert!(matches!(cert.status, CertificateStatus::Refuted(_)));
    }

    #[test]
    fn invalid_provenance_is_rejected() {
        let gamma = parse_query("alphabet a;\nquery g(){ x -[(aa)+]-> y; }").unwrap();
        let d = &gamma.disjuncts[0];
        let bad = vec![vec![gamma.alphabet().lookup("a").unwrap()]];
        assert!(expansion_from_words(d, &bad, 0).is_err());
    }
}
