//! Desk-scale machinery for classifying finite structures up to
//! back-and-forth equivalence: canonical sentences and refinement
//! hierarchies, finitary presentations of refining-equivalence models
//! with their data invariants and reduction encoders, tree-coloring
//! group actions, orbit structures for finite group actions, and the
//! jump/product invariant combinators. Everything is validated against
//! independent brute-force oracles; see the `verify` module and the
//! `scottkit` CLI.

pub mod error;
pub mod extnat;
pub mod structure;
pub mod refine;
pub mod scott;
pub mod iso;
pub mod game;
pub mod refmodel;
pub mod coloring;
pub mod graphcode;
pub mod orbit;
pub mod invariant;
pub mod verify;

pub use error::{Error, Result};
pub use extnat::ExtNat;
pub use game::ef_equiv;
pub use iso::{brute_force_iso, oracle_bound_from_env, DEFAULT_ORACLE_BOUND};
pub use refine::{joint_refine, RefinementTrace};
pub use scott::{css_equal, scott_sentence, ScottSentence};
pub use structure::{Bijection, FiniteStructure, Signature};
