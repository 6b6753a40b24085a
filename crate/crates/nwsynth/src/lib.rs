//! Synthesis of recursive component compositions from nested-word
//! temporal logic specifications.
//!
//! The pipeline: a specification in NWTL (nested-words temporal logic) is
//! negated and translated into a nested-word Büchi automaton, the automaton
//! is turned into an alternating Büchi tree automaton accepting exactly the
//! composition trees that admit a violating computation, the tree automaton
//! is dualized and its emptiness solved as a Büchi game, and a finite
//! composition of library components is extracted from a regular witness
//! tree. An independent model checker and a brute-force enumerator
//! cross-validate every result.

pub mod abt;
pub mod fixtures;
pub mod nested_word;
pub mod nwba;
pub mod nwtl;
pub mod oracle;
pub mod rlc;
pub mod solver;
pub mod summary_graph;

pub use nested_word::{Alphabet, Letter, NestedWord, Sym, Tag};
