//! Coverability analysis for parameterized networks of identical processes that
//! communicate by non-blocking rendez-vous.
//!
//! * [`model`] — protocols, configurations and the step relation.
//! * [`explore`] — exhaustive search at fixed population sizes (the reference oracle).
//! * [`waitonly`] — the polynomial abstract fixpoint for wait-only protocols.
//! * [`machines`] — counter machines with non-blocking decrements, and NB-VAS.
//! * [`reductions`] — compilers between protocols, counter machines and NB-VAS.
//! * [`lowerbound`] — generators for the doubly-exponential counter gadgets.
//! * [`text`] — the `.rvp`, `.nbm` and `.vas` formats and configuration literals.

pub mod explore;
pub mod fixtures;
pub mod ident;
pub mod lowerbound;
pub mod machines;
pub mod model;
pub mod reductions;
pub mod text;
pub mod waitonly;

pub use explore::{Problem, Verdict, Witness};
pub use model::{Action, Configuration, Protocol, StepLabel, Transition};
pub use waitonly::{AbstractSet, Token};
