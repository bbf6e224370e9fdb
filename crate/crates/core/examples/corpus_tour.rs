//! Every built-in program with the size of its state space.

use contract_calculus::corpus;
use contract_calculus::reduction::{explore, Bounds};

pub fn run_example() -> contract_calculus::Result<()> {
    for e in corpus::entries() {
        let p = e.program()?;
        let g = explore(&p.main, &p.defs, Bounds::new(2_000, 200));
        let note = if g.truncated { " (truncated)" } else { "" };
        println!("{:<24} {:>6} states{note}  {}", e.name, g.states.len(), e.summary);
    }
    Ok(())
}

fn main() -> contract_calculus::Result<()> {
    run_example()
}
