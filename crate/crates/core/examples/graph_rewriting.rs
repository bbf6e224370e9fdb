//! Hypergraph rewriting, directly and through its process encoding.

use contract_calculus::encodings::{
    compile_rules, embed, isomorphic, rewrite, ring_definitions, ring_host, ring_system, ring_to_star_rule,
};
use contract_calculus::reduction::{explore, Bounds};

pub fn run_example() -> contract_calculus::Result<()> {
    let rule = ring_to_star_rule(4);
    let host = ring_host(4, 4);
    println!("host:\n{host}");
    let embeddings = embed(&rule, &host);
    println!("{} embeddings of the ring", embeddings.len());
    let star = rewrite(&host, &rule, &embeddings[0])?;
    println!("after one rewrite:\n{star}");

    let compiled = compile_rules(std::slice::from_ref(&rule))?;
    let p = compiled.encode_host(&host)?;
    let g = explore(&p, &compiled.defs, Bounds::new(20_000, 100));
    for k in g.final_states() {
        let back = compiled.readback(&g.states[k]).expect("idle state reads back");
        println!("encoded run ends in the star: {}", isomorphic(&back, &star));
    }

    let loop8 = ring_host(4, 8);
    println!("embeddings in a loop of eight: {}", embed(&rule, &loop8).len());
    let g8 = explore(&ring_system(4, 8), &ring_definitions(4), Bounds::default());
    let fired = g8.states.iter().any(|s| s.has_agent("B1"));
    println!("the direct encoding still fires a handshake on the loop: {fired}");
    Ok(())
}

fn main() -> contract_calculus::Result<()> {
    run_example()
}
