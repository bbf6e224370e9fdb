pub mod encodings;
pub mod corpus;
pub mod error;
pub mod logic;
pub mod lts;
pub mod process;
pub mod random;
pub mod reduction;
pub mod syntax;
pub mod trace;

pub use error::{Error, ParseError, Result};
pub use logic::{Atom, Formula, Ident, IdentKind, Literal, Theory};
pub use process::{Definitions, NormalForm, Prefix, Process, Program};
