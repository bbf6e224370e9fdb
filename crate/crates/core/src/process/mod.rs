//! Process terms, the program reader and structural normal forms.

pub mod ast;
pub mod normal;
pub mod parse;

pub use ast::{Definition, Definitions, Prefix, Process, Program};
pub use normal::{struct_equiv, to_normal_form, Agent, NormalForm};
pub(crate) use normal::permutations;
pub use parse::{parse_process, parse_program};
