//! Query evaluation: per-atom reachability tables joined by backtracking.
//!
//! Each atom's table is the exact set of node pairs connected by a path
//! labelled with a word of the atom's language, computed by reachability in
//! the product of the database with the label automaton. Empty paths count
//! when the language accepts the empty word. The conjunctive join assigns
//! variables by backtracking over the smallest remaining table first; a
//! partial pin can fix variables up front, which is how containment checks
//! pin output tuples.

use crate::graphdb::{GraphDb, NodeId};
use crate::query::{Crpq, Ucrpq, VarId};
use crate::automata::nfa::Nfa;
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// The answers to a single reachability atom on a database.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomTable {
    pub pairs: BTreeSet<(NodeId, NodeId)>,
}

/// All `(u, v)` such that some path from `u` to `v` spells a word of the
/// label language; `(u, u)` is included when the language accepts ε.
pub fn atom_table(db: &GraphDb, label: &Nfa) -> AtomTable {
    let mut pairs = BTreeSet::new();
    for u in db.nodes() {
        // BFS over (node, state) product from (u, every initial state).
        let mut seen: BTreeSet<(NodeId, u32)> = BTreeSet::new();
        let mut queue: VecDeque<(NodeId, u32)> = VecDeque::new();
        for &q0 in label.initial() {
            if seen.insert((u, q0)) {
                queue.push_back((u, q0));
            }
        }
        while let Some((v, q)) = queue.pop_front() {
            if label.is_final(q) {
                pairs.insert((u, v));
            }
            for &(p, sym, r) in label.transitions() {
                if p != q {
                    continue;
                }
                for w in db.successors(v, sym) {
                    if seen.insert((w, r)) {
                        queue.push_back((w, r));
                    }
                }
            }
        }
    }
    AtomTable { pairs }
}

fn check_pin(q: &Crpq, pin: &[(VarId, NodeId)]) -> Result<()> {
    for &(v, _) in pin {
        if (v.0 as usize) >= q.var_count() {
            return Err(Error::Unknown { kind: "variable", name: format!("#{}", v.0) });
        }
    }
    Ok(())
}

/// Consolidate a pin list into per-variable values; conflicting pins make
/// the query unsatisfiable.
fn pin_map(q: &Crpq, pin: &[(VarId, NodeId)]) -> Option<Vec<Option<NodeId>>> {
    let mut fixed: Vec<Option<NodeId>> = vec![None; q.var_count()];
    for &(v, n) in pin {
        match fixed[v.0 as usize] {
            Some(prev) if prev != n => return None,
            _ => fixed[v.0 as usize] = Some(n),
        }
    }
    Some(fixed)
}

struct Join<'a> {
    db: &'a GraphDb,
    q: &'a Crpq,
    tables: Vec<AtomTable>,
    /// Atom indices in ascending table-size order.
    atom_order: Vec<usize>,
}

impl<'a> Join<'a> {
    fn new(q: &'a Crpq, db: &'a GraphDb) -> Join<'a> {
        let tables: Vec<AtomTable> =
            q.atoms.iter().map(|a| atom_table(db, a.label.nfa())).collect();
        let mut atom_order: Vec<usize> = (0..q.atoms.len()).collect();
        atom_order.sort_by_key(|&i| tables[i].pairs.len());
        Join { db, q, tables, atom_order }
    }

    /// Extend `assign` to satisfy atoms from `depth` on; calls `found` for
    /// every complete assignment until it returns false.
    fn search(
        &self,
        depth: usize,
        assign: &mut Vec<Option<NodeId>>,
        found: &mut impl FnMut(&[Option<NodeId>]) -> bool,
    ) -> bool {
        let Some(&atom_idx) = self.atom_order.get(depth) else {
            return found(assign);
        };
        let atom = &self.q.atoms[atom_idx];
        let (si, di) = (atom.src.0 as usize, atom.dst.0 as usize);
        for &(u, v) in &self.tables[atom_idx].pairs {
            if si == di && u != v {
                continue;
            }
            if assign[si].map_or(false, |s| s != u) || assign[di].map_or(false, |d| d != v) {
                continue;
            }
            let (old_s, old_d) = (assign[si], assign[di]);
            assign[si] = Some(u);
            assign[di] = Some(v);
            if !self.search(depth + 1, assign, found) {
                return false;
            }
            assign[si] = old_s;
            assign[di] = old_d;
        }
        true
    }

    /// Enumerate completions of unassigned output variables; unassigned
    /// non-output variables bind to anything and do not affect the tuple.
    fn complete_free(
        &self,
        assign: &[Option<NodeId>],
        found: &mut impl FnMut(&[NodeId]) -> bool,
    ) -> bool {
        let mut free: Vec<usize> = self
            .q
            .outputs
            .iter()
            .map(|v| v.0 as usize)
            .filter(|&i| assign[i].is_none())
            .collect();
        free.sort_unstable();
        free.dedup();
        let mut current: Vec<NodeId> =
            assign.iter().map(|a| a.unwrap_or(NodeId(0))).collect();
        fn go(
            db: &GraphDb,
            free: &[usize],
            k: usize,
            current: &mut Vec<NodeId>,
            found: &mut impl FnMut(&[NodeId]) -> bool,
        ) -> bool {
            if k == free.len() {
                return found(current);
            }
            for n in db.nodes() {
                current[free[k]] = n;
                if !go(db, free, k + 1, current, found) {
                    return false;
                }
            }
            true
        }
        if free.is_empty() {
            return found(&current);
        }
        go(self.db, &free, 0, &mut current, found)
    }
}

/// All output tuples realized by some satisfying assignment extending `pin`.
pub fn evaluate(
    q: &Crpq,
    db: &GraphDb,
    pin: &[(VarId, NodeId)],
) -> Result<BTreeSet<Vec<NodeId>>> {
    check_pin(q, pin)?;
    let mut out = BTreeSet::new();
    let Some(mut assign) = pin_map(q, pin) else { return Ok(out) };
    if q.var_count() > 0 && db.node_count() == 0 {
        return Ok(out);
    }
    let join = Join::new(q, db);
    join.search(0, &mut assign, &mut |complete| {
        join.complete_free(complete, &mut |nodes| {
            out.insert(q.outputs.iter().map(|&v| nodes[v.0 as usize]).collect());
            true
        })
    });
    Ok(out)
}

/// Existence check: is there a satisfying assignment extending `pin`?
pub fn satisfies(q: &Crpq, db: &GraphDb, pin: &[(VarId, NodeId)]) -> Result<bool> {
    check_pin(q, pin)?;
    let Some(mut assign) = pin_map(q, pin) else { return Ok(false) };
    if q.var_count() > 0 && db.node_count() == 0 {
        return Ok(false);
    }
    let join = Join::new(q, db);
    let mut hit = false;
    join.search(0, &mut assign, &mut |_complete| {
        // All atoms hold; free variables can bind to any node (the database
        // is non-empty whenever there are variables at all).
        hit = true;
        false
    });
    Ok(hit)
}

/// Union evaluation: the union of the disjuncts' answer sets.
pub fn evaluate_union(u: &Ucrpq, db: &GraphDb) -> Result<BTreeSet<Vec<NodeId>>> {
    let mut out = BTreeSet::new();
    for d in &u.disjuncts {
        out.extend(evaluate(d, db, &[])?);
    }
    Ok(out)
}

/// Does any disjunct, with outputs pinned positionally to `tuple`, hold?
pub fn satisfies_union_pinned(u: &Ucrpq, db: &GraphDb, tuple: &[NodeId]) -> Result<bool> {
    for d in &u.disjuncts {
        if d.arity() != tuple.len() {
            return Err(Error::ArityMismatch { left: d.arity(), right: tuple.len() });
        }
        let pin: Vec<(VarId, NodeId)> =
            d.outputs.iter().copied().zip(tuple.iter().copied()).collect();
        if satisfies(d, db, &pin)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Map a database through a node mapping (a database homomorphism when the
/// mapping preserves edges); used by monotonicity property tests.
pub fn map_tuples(
    tuples: &BTreeSet<Vec<NodeId>>,
    f: &BTreeMap<NodeId, NodeId>,
) -> BTreeSet<Vec<NodeId>> {
    tuples
        .iter()
        .map(|t| t.iter().map(|n| *f.get(n).unwrap_or(n)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::query::{parse_query, CrpqBuilder};

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"])
    }

    fn path_db(word: &str) -> GraphDb {
        let ab = ab();
        let n = word.len() + 1;
        let names: Vec<String> = (0..n).map(|i| format!("u{i}")).collect();
        let edges: Vec<(NodeId, crate::alphabet::Symbol, NodeId)> = word
            .chars()
            .enumerate()
            .map(|(i, c)| {
                (NodeId(i as u32), ab.lookup(&c.to_string()).unwrap(), NodeId(i as u32 + 1))
            })
            .collect();
        GraphDb::new(ab, names, edges)
    }

    #[test]
    fn atom_table_on_paths() {
        let db = path_db("aa");
        let even = CrpqBuilder::new("t", ab()).atom("x", "(aa)+", "y").unwrap().build();
        let t = atom_table(&db, even.atoms[0].label.nfa());
        assert_eq!(t.pairs, BTreeSet::from([(NodeId(0), NodeId(2))]));
        let plus = CrpqBuilder::new("t", ab()).atom("x", "a+", "y").unwrap().build();
        let t2 = atom_table(&db, plus.atoms[0].label.nfa());
        assert_eq!(
            t2.pairs,
            BTreeSet::from([
                (NodeId(0), NodeId(1)),
                (NodeId(0), NodeId(2)),
                (NodeId(1), NodeId(2))
            ])
        );
    }

    #[test]
    fn epsilon_language_yields_identity_pairs() {
        let db = path_db("ab");
        let eps = CrpqBuilder::new("t", ab()).atom("x", "%eps", "y").unwrap().build();
        let t = atom_table(&db, eps.atoms[0].label.nfa());
        let expect: BTreeSet<_> = db.nodes().map(|n| (n, n)).collect();
        assert_eq!(t.pairs, expect);
    }

    #[test]
    fn evaluate_single_atom() {
        let db = path_db("a");
        let u = parse_query("alphabet a, b;\nquery q(x,y){ x -[a+]-> y; }").unwrap();
        let res = evaluate(&u.disjuncts[0], &db, &[]).unwrap();
        assert_eq!(res, BTreeSet::from([vec![NodeId(0), NodeId(1)]]));
    }

    #[test]
    fn boolean_cycle_query_unsatisfied_on_acyclic_db() {
        let db = path_db("aaa");
        let u = parse_query("alphabet a, b;\nquery q(){ x -[a+]-> x; }").unwrap();
        assert!(evaluate(&u.disjuncts[0], &db, &[]).unwrap().is_empty());
    }

    #[test]
    fn conjunction_equals_even_language_on_a_path() {
        let db = path_db("aaa");
        let both = parse_query(
            "alphabet a, b;\nquery q(x,y){ x -[a+]-> y; x -[(aa)+]-> y; }",
        )
        .unwrap();
        let even = parse_query("alphabet a, b;\nquery q(x,y){ x -[(aa)+]-> y; }").unwrap();
        assert_eq!(
            evaluate(&both.disjuncts[0], &db, &[]).unwrap(),
            evaluate(&even.disjuncts[0], &db, &[]).unwrap()
        );
    }

    #[test]
    fn pinning_restricts_answers() {
        let db = path_db("aa");
        let u = parse_query("alphabet a, b;\nquery q(x,y){ x -[a]-> y; }").unwrap();
        let q = &u.disjuncts[0];
        let x = q.lookup_var("x").unwrap();
        let all = evaluate(q, &db, &[]).unwrap();
        let pinned = evaluate(q, &db, &[(x, NodeId(1))]).unwrap();
        assert!(pinned.iter().all(|t| all.contains(t)));
        assert_eq!(pinned, BTreeSet::from([vec![NodeId(1), NodeId(2)]]));
        // Conflicting pins are unsatisfiable.
        let none = evaluate(q, &db, &[(x, NodeId(0)), (x, NodeId(1))]).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn empty_boolean_query_always_holds() {
        let db = path_db("");
        let u = parse_query("alphabet a, b;\nquery q(){ }").unwrap();
        let res = evaluate(&u.disjuncts[0], &db, &[]).unwrap();
        assert_eq!(res, BTreeSet::from([vec![]]));
    }

    #[test]
    fn union_evaluation_is_the_union() {
        let db = path_db("ab");
        let u = parse_query(
            "alphabet a, b;\nquery q1(x,y){ x -[a]-> y; }\nquery q2(x,y){ x -[b]-> y; }\nunion { q1 | q2 }",
        )
        .unwrap();
        let res = evaluate_union(&u, &db).unwrap();
        assert_eq!(
            res,
            BTreeSet::from([vec![NodeId(0), NodeId(1)], vec![NodeId(1), NodeId(2)]])
        );
    }
}
