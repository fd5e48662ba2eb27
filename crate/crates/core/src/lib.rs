//! Concept alignment across verse-aligned parallel corpora.
//!
//! Focal concepts (sets of source-language strings such as `$bird`, `$fowl`)
//! are linked to target-language verses by a forward pass, and those verses
//! back to source-language strings by a backward pass. Both passes select,
//! round by round, the substring with the highest χ² association to the verses
//! not yet covered. The resulting bipartite graph supports concept stability,
//! crosslingual semantic fields and conceptualization-based language
//! similarity.

pub mod assoc;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod graph;
pub mod langsim;
pub mod measures;
pub mod pipeline;

pub use error::{Error, Result};
