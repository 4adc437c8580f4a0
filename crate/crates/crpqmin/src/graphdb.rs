//! Edge-labelled directed graphs: the databases queries run on.
//!
//! The JSON wire format is
//! `{"nodes":["u0","u1"],"edges":[["u0","a","u1"]]}`; duplicate edge triples
//! collapse, an edge naming an undeclared node is an error.

use crate::alphabet::{Alphabet, Symbol};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Index of a node within its database.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphDb {
    node_names: Vec<String>,
    /// Sorted, deduplicated (src, label, dst) triples.
    edges: Vec<(NodeId, Symbol, NodeId)>,
    alphabet: Alphabet,
}

#[derive(Serialize, Deserialize)]
struct WireDb {
    nodes: Vec<String>,
    edges: Vec<(String, String, String)>,
}

impl GraphDb {
    pub fn new(
        alphabet: Alphabet,
        node_names: Vec<String>,
        edges: impl IntoIterator<Item = (NodeId, Symbol, NodeId)>,
    ) -> GraphDb {
        let set: BTreeSet<(NodeId, Symbol, NodeId)> = edges.into_iter().collect();
        let db = GraphDb { node_names, edges: set.into_iter().collect(), alphabet };
        debug_assert!(db
            .edges
            .iter()
            .all(|&(u, _, v)| (u.0 as usize) < db.node_names.len()
                && (v.0 as usize) < db.node_names.len()));
        db
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_names.len() as u32).map(NodeId)
    }

    pub fn node_name(&self, n: NodeId) -> &str {
        &self.node_names[n.0 as usize]
    }

    pub fn lookup_node(&self, name: &str) -> Option<NodeId> {
        self.node_names.iter().position(|n| n == name).map(|i| NodeId(i as u32))
    }

    pub fn edges(&self) -> &[(NodeId, Symbol, NodeId)] {
        &self.edges
    }

    pub fn has_edge(&self, src: NodeId, sym: Symbol, dst: NodeId) -> bool {
        self.edges.binary_search(&(src, sym, dst)).is_ok()
    }

    pub fn successors(&self, src: NodeId, sym: Symbol) -> impl Iterator<Item = NodeId> + '_ {
        self.edges
            .iter()
            .filter(move |&&(u, a, _)| u == src && a == sym)
            .map(|&(_, _, v)| v)
    }

    /// Parse the JSON wire format against a declared alphabet.
    pub fn load(json: &[u8], alphabet: &Alphabet) -> Result<GraphDb> {
        let wire: WireDb =
            serde_json::from_slice(json).map_err(|e| Error::Input(format!("bad JSON: {e}")))?;
        let mut names = Vec::new();
        for n in &wire.nodes {
            if names.contains(n) {
                return Err(Error::Input(format!("duplicate node `{n}`")));
            }
            names.push(n.clone());
        }
        let lookup = |name: &str| -> Result<NodeId> {
            names
                .iter()
                .position(|n| n == name)
                .map(|i| NodeId(i as u32))
                .ok_or_else(|| Error::Unknown { kind: "node", name: name.to_string() })
        };
        let mut edges = BTreeSet::new();
        for (u, label, v) in &wire.edges {
            let sym = alphabet
                .lookup(label)
                .ok_or_else(|| Error::UnknownLetter { letter: label.clone(), position: 0 })?;
            edges.insert((lookup(u)?, sym, lookup(v)?));
        }
        Ok(GraphDb {
            node_names: names,
            edges: edges.into_iter().collect(),
            alphabet: alphabet.clone(),
        })
    }

    /// Bit-exact counterpart of [`GraphDb::load`].
    pub fn save(&self) -> Vec<u8> {
        let wire = WireDb {
            nodes: self.node_names.clone(),
            edges: self
                .edges
                .iter()
                .map(|&(u, a, v)| {
                    (
                        self.node_name(u).to_string(),
                        self.alphabet.name(a).to_string(),
                        self.node_name(v).to_string(),
                    )
                })
                .collect(),
        };
        serde_json::to_vec(&wire).expect("serialization cannot fail")
    }
}
