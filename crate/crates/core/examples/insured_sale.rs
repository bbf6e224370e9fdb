//! A seller, an insurer and four kinds of buyer.

use contract_calculus::corpus;
use contract_calculus::reduction::{explore, Bounds};

pub fn run_example() -> contract_calculus::Result<()> {
    for name in ["ex2_insured_b0", "ex2_insured_b1", "ex2_insured_b2", "ex2_insured_b3"] {
        let entry = corpus::get(name)?;
        let p = entry.program()?;
        let g = explore(&p.main, &p.defs, Bounds::default());
        let agents = |s: &contract_calculus::NormalForm| {
            s.agents.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" | ")
        };
        println!("{name}: {} ({} states)", entry.summary, g.states.len());
        for k in g.final_states() {
            println!("    ends with {}", agents(&g.states[k]));
        }
    }
    Ok(())
}

fn main() -> contract_calculus::Result<()> {
    run_example()
}
