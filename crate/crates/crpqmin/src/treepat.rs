//! Tree patterns and their injective encoding as Boolean queries.
//!
//! A tree pattern is a rooted directed tree whose nodes carry a letter or a
//! wildcard and whose edges are either simple (child) or transitive
//! (descendant). The encoding introduces a reserved letter `%marker`: simple
//! edges become `%marker` atoms, transitive edges `%marker+` atoms, and a
//! node labelled `a` gains a self-loop atom `x -[a]-> x`. Decoding inverts
//! the encoding on its syntactic image.
//!
//! The text format is an indented outline, two spaces per depth level, with
//! `->` for simple and `=>` for transitive edges:
//!
//! ```text
//! a
//!   -> *
//!   => b
//! ```

use crate::alphabet::Alphabet;
use crate::automata::regex::Regex;
use crate::query::{Crpq, Label, VarId};
use crate::{Error, Result};
use std::fmt;

pub const MARKER: &str = "%marker";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Simple,
    Transitive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    /// `None` is the wildcard label.
    pub label: Option<String>,
    /// (child node, edge kind), in outline order.
    pub children: Vec<(usize, EdgeKind)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreePattern {
    /// Node 0 is the root.
    pub nodes: Vec<TreeNode>,
    pub alphabet: Alphabet,
}

impl TreePattern {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.children.len()).sum()
    }

    pub fn labelled_node_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.label.is_some()).count()
    }
}

/// Encode as a Boolean query over the pattern alphabet plus `%marker`.
pub fn encode(pattern: &TreePattern) -> Result<Crpq> {
    let alphabet = pattern.alphabet.with_letter(MARKER);
    let marker = alphabet.lookup(MARKER).unwrap();
    let var_names: Vec<String> = (0..pattern.nodes.len()).map(|i| format!("x{i}")).collect();
    let mut atoms = Vec::new();
    // Self-loops for labelled nodes first, then tree edges in outline order.
    for (i, node) in pattern.nodes.iter().enumerate() {
        if let Some(l) = &node.label {
            let sym = alphabet
                .lookup(l)
                .ok_or_else(|| Error::UnknownLetter { letter: l.clone(), position: 0 })?;
            atoms.push(crate::query::Atom {
                src: VarId(i as u32),
                label: Label::letter(sym, &alphabet),
                dst: VarId(i as u32),
            });
        }
    }
    for (i, node) in pattern.nodes.iter().enumerate() {
        for &(child, kind) in &node.children {
            let regex = match kind {
                EdgeKind::Simple => Regex::Letter(marker),
                EdgeKind::Transitive => Regex::plus(Regex::Letter(marker)),
            };
            atoms.push(crate::query::Atom {
                src: VarId(i as u32),
                label: Label::from_regex(regex, &alphabet),
                dst: VarId(child as u32),
            });
        }
    }
    Ok(Crpq::new("tp", alphabet, var_names, Vec::new(), atoms))
}

/// Recover the pattern when the query is syntactically in the image of
/// [`encode`]: self-loops are single non-marker letters (at most one per
/// variable), non-loop atoms are `%marker` or `%marker+`, and the non-loop
/// part is a tree.
pub fn decode(q: &Crpq) -> Result<TreePattern> {
    let alphabet = q.alphabet();
    let Some(marker) = alphabet.lookup(MARKER) else {
        return Err(Error::Fragment("alphabet lacks the %marker letter".into()));
    };
    if q.arity() != 0 {
        return Err(Error::Fragment("tree pattern encodings are Boolean".into()));
    }
    let mut labels: Vec<Option<String>> = vec![None; q.var_count()];
    let mut children: Vec<Vec<(usize, EdgeKind)>> = vec![Vec::new(); q.var_count()];
    let mut in_degree = vec![0usize; q.var_count()];
    for a in &q.atoms {
        if a.src == a.dst {
            let sym = a.label.as_letter().ok_or_else(|| {
                Error::Fragment("self-loops must be single letters".into())
            })?;
            if sym == marker {
                return Err(Error::Fragment("self-loop on the marker letter".into()));
            }
            let slot = &mut labels[a.src.0 as usize];
            if slot.is_some() {
                return Err(Error::Fragment("two labels on one node".into()));
            }
            *slot = Some(alphabet.name(sym).to_string());
        } else {
            let kind = match a.label.regex() {
                Regex::Letter(s) if *s == marker => EdgeKind::Simple,
                Regex::Plus(inner) => match inner.as_ref() {
                    Regex::Letter(s) if *s == marker => EdgeKind::Transitive,
                    _ => {
                        return Err(Error::Fragment(
                            "edges must be %marker or %marker+".into(),
                        ))
                    }
                },
                _ => return Err(Error::Fragment("edges must be %marker or %marker+".into())),
            };
            children[a.src.0 as usize].push((a.dst.0 as usize, kind));
            in_degree[a.dst.0 as usize] += 1;
        }
    }
    // The non-loop part must be a tree rooted at variable 0's component.
    let roots: Vec<usize> = (0..q.var_count()).filter(|&v| in_degree[v] == 0).collect();
    let [root] = roots.as_slice() else {
        return Err(Error::Fragment("not a single-rooted tree".into()));
    };
    if in_degree.iter().any(|&d| d > 1) {
        return Err(Error::Fragment("a node has two parents".into()));
    }
    // Depth-first preorder from the root must cover everything (and find no
    // cycle); this matches the outline numbering of the text format.
    let mut order = Vec::with_capacity(q.var_count());
    let mut seen = vec![false; q.var_count()];
    fn preorder(
        v: usize,
        children: &[Vec<(usize, EdgeKind)>],
        seen: &mut [bool],
        order: &mut Vec<usize>,
    ) -> bool {
        if seen[v] {
            return false;
        }
        seen[v] = true;
        order.push(v);
        children[v].iter().all(|&(c, _)| preorder(c, children, seen, order))
    }
    if !preorder(*root, &children, &mut seen, &mut order) {
        return Err(Error::Fragment("not a tree".into()));
    }
    if order.len() != q.var_count() {
        return Err(Error::Fragment("disconnected variables".into()));
    }
    // Renumber in preorder so the root is node 0.
    let mut index = vec![usize::MAX; q.var_count()];
    for (new, &old) in order.iter().enumerate() {
        index[old] = new;
    }
    let base_alphabet = Alphabet::new(
        alphabet
            .symbols()
            .filter(|&s| s != marker)
            .map(|s| alphabet.name(s).to_string())
            .collect::<Vec<_>>(),
    );
    let nodes = order
        .iter()
        .map(|&old| TreeNode {
            label: labels[old].clone(),
            children: children[old].iter().map(|&(c, k)| (index[c], k)).collect(),
        })
        .collect();
    Ok(TreePattern { nodes, alphabet: base_alphabet })
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

impl fmt::Display for TreePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(
            p: &TreePattern,
            node: usize,
            depth: usize,
            arrow: Option<EdgeKind>,
            f: &mut fmt::Formatter<'_>,
        ) -> fmt::Result {
            let indent = "  ".repeat(depth);
            let prefix = match arrow {
                None => String::new(),
                Some(EdgeKind::Simple) => "-> ".into(),
                Some(EdgeKind::Transitive) => "=> ".into(),
            };
            let label = p.nodes[node].label.as_deref().unwrap_or("*");
            writeln!(f, "{indent}{prefix}{label}")?;
            for &(c, k) in &p.nodes[node].children {
                go(p, c, depth + 1, Some(k), f)?;
            }
            Ok(())
        }
        go(self, 0, 0, None, f)
    }
}

/// Parse the indented outline format over the given alphabet.
pub fn parse_tree_pattern(text: &str, alphabet: &Alphabet) -> Result<TreePattern> {
    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut stack: Vec<usize> = Vec::new(); // node at each depth
    for (lineno, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let indent = raw.len() - raw.trim_start().len();
        if indent % 2 != 0 {
            return Err(Error::Syntax {
                position: lineno,
                message: "indentation must be two spaces per level".into(),
            });
        }
        let depth = indent / 2;
        let body = raw.trim();
        let (kind, label_text) = if let Some(rest) = body.strip_prefix("-> ") {
            (Some(EdgeKind::Simple), rest.trim())
        } else if let Some(rest) = body.strip_prefix("=> ") {
            (Some(EdgeKind::Transitive), rest.trim())
        } else {
            (None, body)
        };
        let label = match label_text {
            "*" => None,
            name => {
                if alphabet.lookup(name).is_none() {
                    return Err(Error::UnknownLetter {
                        letter: name.to_string(),
                        position: lineno,
                    });
                }
                Some(name.to_string())
            }
        };
        let id = nodes.len();
        nodes.push(TreeNode { label, children: Vec::new() });
        if depth == 0 {
            if kind.is_some() || id != 0 {
                return Err(Error::Syntax {
                    position: lineno,
                    message: "exactly one unprefixed root line".into(),
                });
            }
            stack.clear();
            stack.push(id);
        } else {
            let Some(kind) = kind else {
                return Err(Error::Syntax {
                    position: lineno,
                    message: "child lines need `->` or `=>`".into(),
                });
            };
            if depth > stack.len() {
                return Err(Error::Syntax {
                    position: lineno,
                    message: "indentation skips a level".into(),
                });
            }
            stack.truncate(depth);
            let parent = *stack.last().unwrap();
            nodes[parent].children.push((id, kind));
            stack.push(id);
        }
    }
    if nodes.is_empty() {
        return Err(Error::Input("empty tree pattern".into()));
    }
    Ok(TreePattern { nodes, alphabet: alphabet.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"])
    }

    #[test]
    fn single_labelled_node_encodes_to_one_self_loop() {
        let p = parse_tree_pattern("a\n", &ab()).unwrap();
        let q = encode(&p).unwrap();
        assert_eq!(q.atom_count(), 1);
        assert_eq!(q.atoms[0].src, q.atoms[0].dst);
        assert_eq!(q.arity(), 0);
    }

    #[test]
    fn wildcard_simple_edge_encodes_to_one_marker_atom() {
        let p = parse_tree_pattern("*\n  -> *\n", &ab()).unwrap();
        let q = encode(&p).unwrap();
        assert_eq!(q.atom_count(), 1);
        assert_ne!(q.atoms[0].src, q.atoms[0].dst);
        let marker = q.alphabet().lookup(MARKER).unwrap();
        assert_eq!(q.atoms[0].label.as_letter(), Some(marker));
    }

    #[test]
    fn labelled_transitive_edge_encodes_to_three_atoms() {
        let p = parse_tree_pattern("a\n  => b\n", &ab()).unwrap();
        let q = encode(&p).unwrap();
        assert_eq!(q.atom_count(), 3);
        assert_eq!(q.atom_count(), p.edge_count() + p.labelled_node_count());
    }

    #[test]
    fn decode_inverts_encode() {
        for text in [
            "a\n",
            "*\n  -> *\n",
            "a\n  => b\n",
            "a\n  -> b\n  -> *\n    => a\n",
            "*\n  => *\n    => *\n  -> a\n",
        ] {
            let p = parse_tree_pattern(text, &ab()).unwrap();
            let q = encode(&p).unwrap();
            let back = decode(&q).unwrap();
            assert_eq!(back, p, "round trip failed for\n{text}");
            assert_eq!(format!("{back}"), text.trim_start_matches('\n').to_string());
        }
    }

    #[test]
    fn non_image_queries_are_rejected() {
        let alphabet = ab().with_letter(MARKER);
        // A (marker marker)+ atom is not in the image.
        let mut b = crate::query::CrpqBuilder::new("q", alphabet.clone());
        b.atom("x", "(%marker.%marker)+", "y").unwrap();
        assert!(decode(&b.build()).is_err());
        // Two distinct-letter self-loops on one variable.
        let mut b2 = crate::query::CrpqBuilder::new("q", alphabet);
        b2.atom("x", "a", "x").unwrap();
        b2.atom("x", "b", "x").unwrap();
        assert!(decode(&b2.build()).is_err());
    }
}
