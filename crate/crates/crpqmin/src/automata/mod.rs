//! Regular expressions, position-based NFAs and language-level operations.

pub mod regex;
pub mod nfa;
pub mod sre;

pub use nfa::Nfa;
pub use regex::Regex;
pub use sre::{SreFactor, SreFactors};
