//! Exhaustive exploration of a three-party agreement.

use contract_calculus::corpus;
use contract_calculus::reduction::{explore, Bounds};

pub fn run_example() -> contract_calculus::Result<()> {
    let p = corpus::get("ex1_handshake")?.program()?;
    println!("{p}");
    let g = explore(&p.main, &p.defs, Bounds::default());
    println!("{} states, {} edges", g.states.len(), g.edges.len());
    let finals = g.final_states();
    assert_eq!(finals.len(), 1);
    for step in g.trace_to(finals[0]) {
        let fusion = step.fusion.as_ref().map(|f| format!(" {f}")).unwrap_or_default();
        println!("[{}{fusion}] {}", step.rule, step.state);
    }
    assert!(["lendA", "lendB", "lendC"].iter().all(|a| g.states[finals[0]].has_agent(a)));
    Ok(())
}

fn main() -> contract_calculus::Result<()> {
    run_example()
}
