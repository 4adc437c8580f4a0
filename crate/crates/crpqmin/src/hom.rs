//! Homomorphism search between conjunctive queries and graph databases,
//! strong-onto tests, cores and hom-equivalence.
//!
//! Everything here works on a uniform edge-labelled graph view. For queries
//! the view has one node per variable and one edge per atom (single-letter
//! labels only: callers pass CQs); outputs are pinned positionally, so
//! homomorphisms between queries respect output tuples and homomorphisms
//! into databases can pin outputs to chosen nodes. The search is complete:
//! backtracking over the most-constrained node with forward checking.

use crate::alphabet::Symbol;
use crate::graphdb::GraphDb;
use crate::query::{Crpq, VarId};
use crate::{Error, Result};
use std::collections::BTreeSet;

/// An edge-labelled graph presented for homomorphism search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomGraph {
    pub n: usize,
    pub edges: Vec<(usize, Symbol, usize)>,
    /// Node ids designated as the output tuple (queries) or empty (databases).
    pub outputs: Vec<usize>,
    pub node_names: Vec<String>,
}

impl HomGraph {
    /// View a CQ as a labelled graph. Errors if some label is not a letter.
    pub fn from_cq(q: &Crpq) -> Result<HomGraph> {
        let mut edges = Vec::new();
        for a in &q.atoms {
            let sym = a.label.as_letter().ok_or_else(|| {
                Error::Fragment(format!(
                    "atom label `{}` is not a single letter",
                    a.label.regex().display(q.alphabet())
                ))
            })?;
            edges.push((a.src.0 as usize, sym, a.dst.0 as usize));
        }
        Ok(HomGraph {
            n: q.var_count(),
            edges,
            outputs: q.outputs.iter().map(|v| v.0 as usize).collect(),
            node_names: q.var_names().to_vec(),
        })
    }

    pub fn from_db(db: &GraphDb) -> HomGraph {
        HomGraph {
            n: db.node_count(),
            edges: db
                .edges()
                .iter()
                .map(|&(u, a, v)| (u.0 as usize, a, v.0 as usize))
                .collect(),
            outputs: Vec::new(),
            node_names: db.nodes().map(|n| db.node_name(n).to_string()).collect(),
        }
    }

    fn edge_set(&self) -> BTreeSet<(usize, Symbol, usize)> {
        self.edges.iter().copied().collect()
    }
}

/// A total mapping witnessing a homomorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hom {
    pub map: Vec<usize>,
}

impl Hom {
    pub fn is_valid(&self, src: &HomGraph, tgt: &HomGraph) -> bool {
        if self.map.len() != src.n {
            return false;
        }
        let tgt_edges = tgt.edge_set();
        src.edges
            .iter()
            .all(|&(u, a, v)| tgt_edges.contains(&(self.map[u], a, self.map[v])))
    }

    /// Injective on nodes and on edges (edge injectivity follows from node
    /// injectivity for edge sets).
    pub fn is_embedding(&self, src: &HomGraph) -> bool {
        let mut seen = BTreeSet::new();
        self.map.len() == src.n && self.map.iter().all(|&t| seen.insert(t))
    }
}

/// Search for a homomorphism `src -> tgt` extending `pin`, mapping outputs
/// positionally when both sides declare them.
pub fn find_hom(src: &HomGraph, tgt: &HomGraph, pin: &[(usize, usize)]) -> Option<Hom> {
    find_hom_with(src, tgt, pin, false)
}

/// First homomorphism satisfying `accept`, enumerating all of them in the
/// search order. Complete but exponential; used for strong-onto queries.
pub fn find_hom_filtered(
    src: &HomGraph,
    tgt: &HomGraph,
    pin: &[(usize, usize)],
    mut accept: impl FnMut(&Hom) -> bool,
) -> Option<Hom> {
    let mut domains: Vec<BTreeSet<usize>> =
        vec![(0..tgt.n).collect::<BTreeSet<usize>>(); src.n];
    if !src.outputs.is_empty() && !tgt.outputs.is_empty() {
        if src.outputs.len() != tgt.outputs.len() {
            return None;
        }
        for (i, &sv) in src.outputs.iter().enumerate() {
            domains[sv].retain(|&t| t == tgt.outputs[i]);
        }
    }
    for &(s, t) in pin {
        domains[s].retain(|&x| x == t);
    }
    if !propagate(src, tgt, &mut domains) {
        return None;
    }
    let mut assign: Vec<Option<usize>> = vec![None; src.n];
    let mut found = None;
    enumerate_homs(src, tgt, &mut domains, &mut assign, &mut |h| {
        if accept(h) {
            found = Some(h.clone());
            false
        } else {
            true
        }
    });
    found
}

/// Visit every homomorphism until the visitor returns false.
fn enumerate_homs(
    src: &HomGraph,
    tgt: &HomGraph,
    domains: &mut Vec<BTreeSet<usize>>,
    assign: &mut Vec<Option<usize>>,
    visit: &mut impl FnMut(&Hom) -> bool,
) -> bool {
    let next = (0..src.n).filter(|&i| assign[i].is_none()).min_by_key(|&i| domains[i].len());
    let Some(node) = next else {
        let hom = Hom { map: assign.iter().map(|a| a.unwrap()).collect() };
        return visit(&hom);
    };
    let candidates: Vec<usize> = domains[node].iter().copied().collect();
    for cand in candidates {
        let consistent = src.edges.iter().all(|&(u, a, v)| {
            let du = if u == node { Some(cand) } else { assign[u] };
            let dv = if v == node { Some(cand) } else { assign[v] };
            match (du, dv) {
                (Some(x), Some(y)) => tgt.edges.contains(&(x, a, y)),
                _ => true,
            }
        });
        if !consistent {
            continue;
        }
        assign[node] = Some(cand);
        let saved = domains.clone();
        domains[node] = BTreeSet::from([cand]);
        if propagate(src, tgt, domains) && !enumerate_homs(src, tgt, domains, assign, visit) {
            return false;
        }
        *domains = saved;
        assign[node] = None;
    }
    true
}

fn find_hom_with(
    src: &HomGraph,
    tgt: &HomGraph,
    pin: &[(usize, usize)],
    injective: bool,
) -> Option<Hom> {
    // Initial domains: every target node, cut down by pins and outputs.
    let mut domains: Vec<BTreeSet<usize>> =
        vec![(0..tgt.n).collect::<BTreeSet<usize>>(); src.n];
    if !src.outputs.is_empty() && !tgt.outputs.is_empty() {
        if src.outputs.len() != tgt.outputs.len() {
            return None;
        }
        for (i, &sv) in src.outputs.iter().enumerate() {
            domains[sv].retain(|&t| t == tgt.outputs[i]);
        }
    }
    for &(s, t) in pin {
        domains[s].retain(|&x| x == t);
    }
    // One pass of arc consistency over the atom constraints.
    if !propagate(src, tgt, &mut domains) {
        return None;
    }
    let mut assign: Vec<Option<usize>> = vec![None; src.n];
    backtrack(src, tgt, &mut domains, &mut assign, injective).map(|map| Hom { map })
}

fn propagate(src: &HomGraph, tgt: &HomGraph, domains: &mut [BTreeSet<usize>]) -> bool {
    let tgt_edges = tgt.edge_set();
    loop {
        let mut changed = false;
        for &(u, a, v) in &src.edges {
            let keep_u: BTreeSet<usize> = domains[u]
                .iter()
                .copied()
                .filter(|&du| domains[v].iter().any(|&dv| tgt_edges.contains(&(du, a, dv))))
                .collect();
            if keep_u.len() != domains[u].len() {
                domains[u] = keep_u;
                changed = true;
            }
            let keep_v: BTreeSet<usize> = domains[v]
                .iter()
                .copied()
                .filter(|&dv| domains[u].iter().any(|&du| tgt_edges.contains(&(du, a, dv))))
                .collect();
            if keep_v.len() != domains[v].len() {
                domains[v] = keep_v;
                changed = true;
            }
        }
        if domains.iter().any(BTreeSet::is_empty) {
            return false;
        }
        if !changed {
            return true;
        }
    }
}

fn backtrack(
    src: &HomGraph,
    tgt: &HomGraph,
    domains: &mut Vec<BTreeSet<usize>>,
    assign: &mut Vec<Option<usize>>,
    injective: bool,
) -> Option<Vec<usize>> {
    // Most constrained unassigned node.
    let next = (0..src.n)
        .filter(|&i| assign[i].is_none())
        .min_by_key(|&i| domains[i].len());
    let Some(node) = next else {
        return Some(assign.iter().map(|a| a.unwrap()).collect());
    };
    let candidates: Vec<usize> = domains[node].iter().copied().collect();
    for cand in candidates {
        if injective && assign.iter().flatten().any(|&t| t == cand) {
            continue;
        }
        // Check already-assigned neighbours.
        let consistent = src.edges.iter().all(|&(u, a, v)| {
            let du = if u == node { Some(cand) } else { assign[u] };
            let dv = if v == node { Some(cand) } else { assign[v] };
            match (du, dv) {
                (Some(x), Some(y)) => tgt.edges.contains(&(x, a, y)),
                _ => true,
            }
        });
        if !consistent {
            continue;
        }
        assign[node] = Some(cand);
        let saved = domains.clone();
        domains[node] = BTreeSet::from([cand]);
        if propagate(src, tgt, domains) {
            if let Some(done) = backtrack(src, tgt, domains, assign, injective) {
                return Some(done);
            }
        }
        *domains = saved;
        assign[node] = None;
    }
    None
}

/// Every target edge is the image of some source edge.
pub fn is_strong_onto(h: &Hom, src: &HomGraph, tgt: &HomGraph) -> bool {
    let images: BTreeSet<(usize, Symbol, usize)> =
        src.edges.iter().map(|&(u, a, v)| (h.map[u], a, h.map[v])).collect();
    tgt.edges.iter().all(|e| images.contains(e))
}

/// Homomorphisms both ways (outputs pinned positionally).
pub fn hom_equivalent(p: &HomGraph, q: &HomGraph) -> bool {
    find_hom(p, q, &[]).is_some() && find_hom(q, p, &[]).is_some()
}

/// Isomorphism: a bijective homomorphism. A node-injective homomorphism is
/// automatically edge-injective on edge *sets*, so with equal node and edge
/// counts any injective homomorphism is an isomorphism.
pub fn isomorphic(p: &HomGraph, q: &HomGraph) -> bool {
    if p.n != q.n || p.edge_set().len() != q.edge_set().len() {
        return false;
    }
    find_hom_with(p, q, &[], true).is_some()
}

/// The core of a CQ: repeatedly drop an atom while some homomorphism from
/// the query into the reduced query exists (outputs are pinned and never
/// merged away); variables left isolated by dropped atoms are removed
/// unless they are outputs.
pub fn core(q: &Crpq) -> Result<Crpq> {
    let mut current = q.clone();
    'outer: loop {
        for i in 0..current.atoms.len() {
            let (candidate, _) = drop_atom(&current, i);
            let src = HomGraph::from_cq(&current)?;
            let tgt = HomGraph::from_cq(&candidate)?;
            // The reduced query maps into the original by inclusion, so a
            // homomorphism the other way witnesses equivalence.
            if find_hom(&src, &tgt, &[]).is_some() {
                current = candidate;
                continue 'outer;
            }
        }
        return Ok(current);
    }
}

/// Remove atom `i`, dropping non-output variables that become isolated.
/// Returns the reduced query and the old->new variable mapping.
fn drop_atom(q: &Crpq, i: usize) -> (Crpq, Vec<Option<VarId>>) {
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
    (Crpq::new(q.name.clone(), q.alphabet().clone(), names, outputs, atoms), rename)
}

/// Hom-equivalence of two CQs, outputs pinned positionally.
pub fn cq_hom_equivalent(p: &Crpq, q: &Crpq) -> Result<bool> {
    if p.arity() != q.arity() {
        return Ok(false);
    }
    Ok(hom_equivalent(&HomGraph::from_cq(p)?, &HomGraph::from_cq(q)?))
}

/// Isomorphism of two CQs respecting outputs.
pub fn cq_isomorphic(p: &Crpq, q: &Crpq) -> Result<bool> {
    if p.arity() != q.arity() {
        return Ok(false);
    }
    Ok(isomorphic(&HomGraph::from_cq(p)?, &HomGraph::from_cq(q)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::query::CrpqBuilder;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b", "c"])
    }

    fn path(n: usize, letter: &str) -> Crpq {
        let mut b = CrpqBuilder::new("p", ab());
        for i in 0..n {
            b.atom(&format!("v{i}"), letter, &format!("v{}", i + 1)).unwrap();
        }
        b.build()
    }

    /// Exhaustive oracle over all |tgt|^|src| mappings.
    fn hom_oracle(src: &HomGraph, tgt: &HomGraph) -> bool {
        if src.n == 0 {
            return true;
        }
        if tgt.n == 0 {
            return false;
        }
        let mut map = vec![0usize; src.n];
        loop {
            let ok = src
                .edges
                .iter()
                .all(|&(u, a, v)| tgt.edges.contains(&(map[u], a, map[v])))
                && src
                    .outputs
                    .iter()
                    .zip(tgt.outputs.iter())
                    .all(|(&s, &t)| map[s] == t);
            if ok {
                return true;
            }
            // Increment the mapping like a counter.
            let mut i = 0;
            loop {
                if i == src.n {
                    return false;
                }
                map[i] += 1;
                if map[i] < tgt.n {
                    break;
                }
                map[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn short_path_maps_into_longer_path() {
        let src = HomGraph::from_cq(&path(2, "a")).unwrap();
        let tgt = HomGraph::from_cq(&path(4, "a")).unwrap();
        let h = find_hom(&src, &tgt, &[]).unwrap();
        assert!(h.is_valid(&src, &tgt));
    }

    #[test]
    fn long_path_does_not_map_into_shorter_path() {
        let src = HomGraph::from_cq(&path(3, "a")).unwrap();
        let tgt = HomGraph::from_cq(&path(2, "a")).unwrap();
        assert!(find_hom(&src, &tgt, &[]).is_none());
        assert!(!hom_oracle(&src, &tgt));
    }

    #[test]
    fn identity_hom_exists_and_is_strong_onto() {
        let g = HomGraph::from_cq(&path(3, "a")).unwrap();
        let h = find_hom(&g, &g, &[]).unwrap();
        assert!(h.is_valid(&g, &g));
        let ident = Hom { map: (0..g.n).collect() };
        assert!(is_strong_onto(&ident, &g, &g));
    }

    #[test]
    fn completeness_matches_oracle_on_small_graphs() {
        let cases = [
            (path(2, "a"), path(3, "a")),
            (path(3, "a"), path(2, "a")),
            (path(2, "b"), path(2, "a")),
            (path(1, "a"), path(1, "b")),
        ];
        for (p, q) in &cases {
            let src = HomGraph::from_cq(p).unwrap();
            let tgt = HomGraph::from_cq(q).unwrap();
            assert_eq!(find_hom(&src, &tgt, &[]).is_some(), hom_oracle(&src, &tgt));
        }
    }

    #[test]
    fn strong_onto_detects_collapses() {
        // Two parallel same-label atoms collapse onto one.
        let mut b = CrpqBuilder::new("p", ab());
        b.atom("x", "a", "y").unwrap();
        b.atom("x", "a", "y").unwrap();
        let two = HomGraph::from_cq(&b.build()).unwrap();
        let one = HomGraph::from_cq(&path(1, "a")).unwrap();
        let h = find_hom(&two, &one, &[]).unwrap();
        assert!(is_strong_onto(&h, &two, &one));
        // Into a strictly larger query: not strong onto.
        let h2 = find_hom(&one, &two, &[]).unwrap();
        assert!(is_strong_onto(&h2, &one, &two));
        let bigger = HomGraph::from_cq(&path(2, "a")).unwrap();
        let h3 = find_hom(&one, &bigger, &[]).unwrap();
        assert!(!is_strong_onto(&h3, &one, &bigger));
    }

    #[test]
    fn core_collapses_parallel_duplicate_atoms() {
        let mut b = CrpqBuilder::new("p", ab());
        b.atom("x", "a", "y").unwrap();
        b.atom("x", "a", "y").unwrap();
        let c = core(&b.build()).unwrap();
        assert_eq!(c.atom_count(), 1);
    }

    #[test]
    fn core_merges_disjoint_copies() {
        let mut b = CrpqBuilder::new("p", ab());
        b.atom("x", "a", "y").unwrap();
        b.atom("x2", "a", "y2").unwrap();
        let c = core(&b.build()).unwrap();
        assert_eq!(c.atom_count(), 1);
        assert_eq!(c.var_count(), 2);
    }

    #[test]
    fn directed_three_cycle_is_its_own_core() {
        let mut b = CrpqBuilder::new("p", ab());
        b.atom("x", "a", "y").unwrap();
        b.atom("y", "b", "z").unwrap();
        b.atom("z", "c", "x").unwrap();
        let q = b.build();
        let c = core(&q).unwrap();
        assert!(cq_isomorphic(&q, &c).unwrap());
    }

    #[test]
    fn outputs_are_never_merged_away() {
        let mut b = CrpqBuilder::new("p", ab());
        b.output("x").output("y");
        b.atom("x", "a", "y").unwrap();
        b.atom("x", "a", "t").unwrap();
        // t can fold onto y, x and y are pinned.
        let c = core(&b.build()).unwrap();
        assert_eq!(c.atom_count(), 1);
        assert_eq!(c.arity(), 2);
        assert_eq!(c.var_name(c.outputs[0]), "x");
        assert_eq!(c.var_name(c.outputs[1]), "y");
    }

    #[test]
    fn hom_equivalence_of_paths() {
        // Boolean a-path of 2 vs 3: the longer maps into nothing shorter;
        // a^3 -> a^2 fails, so they are not hom-equivalent.
        let p2 = path(2, "a");
        let p3 = path(3, "a");
        assert!(!cq_hom_equivalent(&p2, &p3).unwrap());
        // Isomorphic renaming is hom-equivalent.
        let mut b = CrpqBuilder::new("r", ab());
        b.atom("s", "a", "t").unwrap();
        b.atom("t", "a", "u").unwrap();
        assert!(cq_hom_equivalent(&p2, &b.build()).unwrap());
        // A query is hom-equivalent to its core.
        let mut dup = CrpqBuilder::new("d", ab());
        dup.atom("x", "a", "y").unwrap();
        dup.atom("x", "a", "y").unwrap();
        let dq = dup.build();
        assert!(cq_hom_equivalent(&dq, &core(&dq).unwrap()).unwrap());
    }
}
