//! Logic LTS: terms, operational semantics, the inconsistency predicate and
//! stable ready simulation, with a small scripting front end.

pub mod consistency;
pub mod equations;
pub mod generate;
pub mod metatheory;
pub mod refinement;
pub mod sos;
pub mod syntax;
pub mod term;
pub mod verdict;

pub use consistency::{compute_f, is_consistent, FSet};
pub use sos::{explore, ExplorationLimit, Lts, StateId};
pub use syntax::{parse_script, parse_term, pretty};
pub use term::{Action, Name, RecSpec, Term};
pub use verdict::{Verdict, Witness};
