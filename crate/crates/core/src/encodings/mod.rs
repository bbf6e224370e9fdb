//! Encodings of coordination idioms, the π-calculus and graph rewriting.

pub mod graph;
pub mod idioms;
pub mod pi;

pub use graph::{
    agent_name, compile_rules, embed, is_embedding, isomorphic, rewrite, ring_definitions, ring_host,
    ring_system, ring_to_star_rule, CompiledRules, Embedding, Hyperedge, Hypergraph, RewriteRule,
};
pub use idioms::{
    cell_get, cell_new, cell_set, linda_in, linda_out, oplus, oplus_with, sem_p, sem_v, semaphore, Field,
};
pub use pi::{encode_definitions, encode_pi, parse_pi, pi_correspondence, pi_successors, strip_residuals, PiDefinition, PiDefinitions, PiProgram, PiTerm};
