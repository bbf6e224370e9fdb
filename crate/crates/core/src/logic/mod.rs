//! Propositional contract logic over atoms with name/variable arguments.

pub mod formula;
pub mod horn;
pub mod ident;
pub mod oracle;
pub mod parse;

pub use formula::{Atom, Formula, Literal, Subst};
pub use horn::{consistent, entails, normalize_constraint, ClauseKind, Closure, HornClause, Theory};
pub use ident::{FreshSupply, Ident, IdentKind};
pub use oracle::oracle_prove;
pub use parse::{parse_formula, parse_theory};
