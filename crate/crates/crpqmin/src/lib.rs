//! A toolbox for analyzing and minimizing conjunctive regular path queries
//! (CRPQs) and unions thereof (UCRPQs) over edge-labelled graph databases.
//!
//! The crate provides:
//!
//! * regular expression parsing and position-based NFA construction, with
//!   language operations and the state-pair sublanguage operator
//!   ([`automata`]);
//! * the query and database data model with a text format for queries and a
//!   JSON format for graphs ([`query`], [`graphdb`]);
//! * query evaluation via per-atom reachability tables and a conjunctive
//!   join ([`eval`]);
//! * homomorphism search, cores and hom-equivalence for conjunctive queries
//!   ([`hom`]);
//! * refinement and expansion enumeration ([`refine`]);
//! * containment and equivalence checking: exact for queries built from
//!   simple regular expressions, exact for single-path instances, and
//!   bounded-refutation otherwise ([`contain`]);
//! * equivalence-preserving structural rewrites and minimality diagnostics:
//!   contraction, segments, minor tests, redundant atom elimination and
//!   strong-minimality certificates ([`structure`]);
//! * maximal under-approximations by unions of bounded-shape queries and the
//!   minimization procedures built on them ([`approx`]);
//! * tree patterns and their encoding into queries ([`treepat`]).
//!
//! All values are immutable after construction and every operation is a pure
//! function, so independent calls may run concurrently. When the `parallel`
//! feature is enabled (it is by default), bulk searches fan out over a rayon
//! thread pool while producing results in a deterministic order; see [`exec`].

pub mod alphabet;
pub mod automata;
pub mod query;
pub mod graphdb;
pub mod multigraph;
pub mod eval;
pub mod hom;
pub mod refine;
pub mod contain;
pub mod structure;
pub mod approx;
pub mod wordtype;
pub mod treepat;
pub mod sampling;
pub mod exec;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Syntax error in a regex, query file, tree pattern or pin list.
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    /// A letter that is not part of the declared alphabet.
    #[error("unknown letter `{letter}` at offset {position}")]
    UnknownLetter { letter: String, position: usize },
    /// Reference to an undeclared variable, state or node.
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    /// Two values that must share an alphabet do not.
    #[error("alphabet mismatch")]
    AlphabetMismatch,
    /// Output arities disagree.
    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },
    /// A configured resource cap was exceeded; never silently truncated.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// Input outside the fragment an exact decision procedure supports.
    #[error("outside supported fragment: {0}")]
    Fragment(String),
    /// Malformed graph database JSON or ill-formed input file.
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
