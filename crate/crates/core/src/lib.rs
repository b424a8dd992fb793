//! Multimodal dialogue on an extended pushdown automaton.

pub mod grammar;
pub mod scene;
pub mod semantics;
pub mod automaton;
pub mod moves;
pub mod dialogue;
pub mod harness;
