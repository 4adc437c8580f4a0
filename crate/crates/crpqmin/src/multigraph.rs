//! Small directed multigraphs: underlying graphs of queries, segment graphs,
//! and the exact minor test used by the structural machinery.

use crate::{Error, Result};
use std::collections::BTreeSet;

/// A directed multigraph over vertices `0..n`. Parallel edges and self-loops
/// are allowed; the edge id is its index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Multigraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Multigraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Multigraph {
        debug_assert!(edges.iter().all(|&(u, v)| u < n && v < n));
        Multigraph { n, edges }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Canonical form under vertex renaming: the lexicographically smallest
    /// sorted edge list over all permutations. Exponential, for tiny graphs.
    pub fn canonical_key(&self) -> (usize, Vec<(usize, usize)>) {
        let mut best: Option<Vec<(usize, usize)>> = None;
        let mut perm: Vec<usize> = (0..self.n).collect();
        permute(&mut perm, 0, &mut |p| {
            let mut mapped: Vec<(usize, usize)> =
                self.edges.iter().map(|&(u, v)| (p[u], p[v])).collect();
            mapped.sort_unstable();
            if best.as_ref().map_or(true, |b| &mapped < b) {
                best = Some(mapped);
            }
        });
        (self.n, best.unwrap_or_default())
    }

    pub fn is_isomorphic(&self, other: &Multigraph) -> bool {
        self.n == other.n
            && self.edges.len() == other.edges.len()
            && self.canonical_key() == other.canonical_key()
    }

    /// GraphViz rendering with the given vertex names.
    pub fn to_dot(&self, names: &[String]) -> String {
        let mut out = String::from("digraph g {\n");
        for i in 0..self.n {
            let label = names.get(i).cloned().unwrap_or_else(|| format!("v{i}"));
            out.push_str(&format!("  n{i} [label=\"{label}\"];\n"));
        }
        for &(u, v) in &self.edges {
            out.push_str(&format!("  n{u} -> n{v};\n"));
        }
        out.push_str("}\n");
        out
    }
}

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

/// Cap on edges per side for the exact minor test.
pub const MINOR_EDGE_CAP: usize = 8;

/// Exact test: can `h` be obtained from `g` by deleting edges, deleting
/// vertices and contracting edges?
///
/// Searches for a minor model: an assignment of `g`-vertices to
/// `h`-vertices-or-deleted whose branch sets are non-empty and weakly
/// connected, with enough `g`-edges between (and inside) branch sets to
/// serve every `h`-edge injectively while a spanning tree of contracted
/// edges survives in each branch set.
pub fn is_minor(h: &Multigraph, g: &Multigraph) -> Result<bool> {
    if h.edge_count() > MINOR_EDGE_CAP || g.edge_count() > MINOR_EDGE_CAP {
        return Err(Error::Resource(format!(
            "minor test limited to {MINOR_EDGE_CAP} edges per graph"
        )));
    }
    if h.vertex_count() > g.vertex_count() || h.edge_count() > g.edge_count() {
        return Ok(false);
    }
    if h.vertex_count() == 0 {
        return Ok(true);
    }
    let nh = h.vertex_count();
    let ng = g.vertex_count();
    // demand[u][v] = number of h-edges u -> v
    let mut demand = vec![vec![0usize; nh]; nh];
    for &(u, v) in h.edges() {
        demand[u][v] += 1;
    }
    // assignment[x] = Some(u) maps g-vertex x into branch set u; None deletes.
    let mut assignment: Vec<Option<usize>> = vec![None; ng];
    Ok(assign(g, h, &demand, &mut assignment, 0))
}

fn assign(
    g: &Multigraph,
    h: &Multigraph,
    demand: &[Vec<usize>],
    assignment: &mut Vec<Option<usize>>,
    idx: usize,
) -> bool {
    let nh = h.vertex_count();
    if idx == g.vertex_count() {
        return check_model(g, h, demand, assignment);
    }
    // Not enough unassigned vertices left to populate the empty branch sets.
    let empty_branches = (0..nh)
        .filter(|&u| !assignment[..idx].iter().any(|&a| a == Some(u)))
        .count();
    if empty_branches > g.vertex_count() - idx {
        return false;
    }
    for choice in std::iter::once(None).chain((0..nh).map(Some)) {
        assignment[idx] = choice;
        if assign(g, h, demand, assignment, idx + 1) {
            return true;
        }
    }
    assignment[idx] = None;
    false
}

fn check_model(
    g: &Multigraph,
    h: &Multigraph,
    demand: &[Vec<usize>],
    assignment: &[Option<usize>],
) -> bool {
    let nh = h.vertex_count();
    // Branch sets must be non-empty.
    let mut branch: Vec<Vec<usize>> = vec![Vec::new(); nh];
    for (x, a) in assignment.iter().enumerate() {
        if let Some(u) = a {
            branch[*u].push(x);
        }
    }
    if branch.iter().any(Vec::is_empty) {
        return false;
    }
    // Edge supply between branch sets, and internal edges per branch set.
    let mut supply = vec![vec![0usize; nh]; nh];
    let mut internal = vec![0usize; nh];
    for &(x, y) in g.edges() {
        match (assignment[x], assignment[y]) {
            (Some(u), Some(v)) if u == v => internal[u] += 1,
            (Some(u), Some(v)) => supply[u][v] += 1,
            _ => {}
        }
    }
    for u in 0..nh {
        for v in 0..nh {
            if u != v && supply[u][v] < demand[u][v] {
                return false;
            }
        }
    }
    // Each branch set: weakly connected, with enough internal edges for a
    // spanning tree plus its self-loop demand.
    for u in 0..nh {
        let members: BTreeSet<usize> = branch[u].iter().copied().collect();
        if internal[u] < members.len() - 1 + demand[u][u] {
            return false;
        }
        if !weakly_connected(g, &members) {
            return false;
        }
    }
    true
}

fn weakly_connected(g: &Multigraph, members: &BTreeSet<usize>) -> bool {
    let Some(&start) = members.iter().next() else { return true };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for &(a, b) in g.edges() {
            if !(members.contains(&a) && members.contains(&b)) {
                continue;
            }
            for (from, to) in [(a, b), (b, a)] {
                if from == x && seen.insert(to) {
                    stack.push(to);
                }
            }
        }
    }
    seen.len() == members.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mg(n: usize, edges: &[(usize, usize)]) -> Multigraph {
        Multigraph::new(n, edges.to_vec())
    }

    /// Independent oracle: enumerate every graph reachable by single
    /// delete/contract steps, closed under isomorphism.
    fn minor_oracle(h: &Multigraph, g: &Multigraph) -> bool {
        fn contains(h: &Multigraph, g: &Multigraph, seen: &mut BTreeSet<(usize, Vec<(usize, usize)>)>) -> bool {
            if !seen.insert(g.canonical_key()) {
                return false;
            }
            if h.is_isomorphic(g) {
                return true;
            }
            // Delete an edge.
            for i in 0..g.edge_count() {
                let mut edges = g.edges().to_vec();
                edges.remove(i);
                if contains(h, &Multigraph::new(g.vertex_count(), edges), seen) {
                    return true;
                }
            }
            // Delete an isolated-or-not vertex (with adjacizing edges).
            for v in 0..g.vertex_count() {
                let mut edges = Vec::new();
                for &(a, b) in g.edges() {
                    if a == v || b == v {
                        continue;
                    }
                    let fix = |x: usize| if x > v { x - 1 } else { x };
                    edges.push((fix(a), fix(b)));
                }
                if g.vertex_count() > 0
                    && contains(h, &Multigraph::new(g.vertex_count() - 1, edges), seen)
                {
                    return true;
                }
            }
            // Contract an edge.
            for i in 0..g.edge_count() {
                let (u, v) = g.edges()[i];
                if u == v {
                    continue;
                }
                let (keep, gone) = (u.min(v), u.max(v));
                let mut edges = Vec::new();
                for (j, &(a, b)) in g.edges().iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    let fix = |x: usize| {
                        let x = if x == gone { keep } else { x };
                        if x > gone {
                            x - 1
                        } else {
                            x
                        }
                    };
                    edges.push((fix(a), fix(b)));
                }
                if contains(h, &Multigraph::new(g.vertex_count() - 1, edges), seen) {
                    return true;
                }
            }
            false
        }
        let mut seen = BTreeSet::new();
        contains(h, g, &mut seen)
    }

    #[test]
    fn graph_is_minor_of_itself() {
        let g = mg(3, &[(0, 1), (1, 2), (2, 0)]);
        assert!(is_minor(&g, &g).unwrap());
    }

    #[test]
    fn single_edge_is_minor_of_any_graph_with_edges() {
        let e = mg(2, &[(0, 1)]);
        for g in [mg(2, &[(0, 1)]), mg(3, &[(0, 1), (1, 2)]), mg(1, &[(0, 0)])] {
            // A self-loop contains a single directed edge as a minor only by
            // keeping the loop edge and splitting... it does not: check oracle.
            assert_eq!(is_minor(&e, &g).unwrap(), minor_oracle(&e, &g), "{g:?}");
        }
    }

    #[test]
    fn parallel_pair_is_not_minor_of_simple_path() {
        let h = mg(2, &[(0, 1), (0, 1)]);
        let path = mg(3, &[(0, 1), (1, 2)]);
        assert!(!is_minor(&h, &path).unwrap());
        assert!(!minor_oracle(&h, &path));
    }

    #[test]
    fn agreement_with_exhaustive_oracle_on_small_graphs() {
        let graphs = [
            mg(1, &[]),
            mg(1, &[(0, 0)]),
            mg(2, &[(0, 1)]),
            mg(2, &[(0, 1), (1, 0)]),
            mg(2, &[(0, 1), (0, 1)]),
            mg(3, &[(0, 1), (1, 2)]),
            mg(3, &[(0, 1), (1, 2), (2, 0)]),
            mg(3, &[(0, 1), (1, 2), (0, 2)]),
            mg(2, &[(0, 1), (1, 1)]),
        ];
        for h in &graphs {
            for g in &graphs {
                assert_eq!(
                    is_minor(h, g).unwrap(),
                    minor_oracle(h, g),
                    "disagree on h={h:?} g={g:?}"
                );
            }
        }
    }

    #[test]
    fn edge_cap_is_enforced() {
        let big = mg(3, &[(0, 1); 9]);
        assert!(matches!(is_minor(&big, &big), Err(Error::Resource(_))));
    }

    #[test]
    fn canonical_key_identifies_renamings() {
        let g1 = mg(3, &[(0, 1), (1, 2)]);
        let g2 = mg(3, &[(2, 0), (0, 1)]);
        assert!(g1.is_isomorphic(&g2));
        let g3 = mg(3, &[(0, 1), (2, 1)]);
        assert!(!g1.is_isomorphic(&g3));
    }
}
