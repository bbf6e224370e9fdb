//! Seeded runs under both semantics, with JSON and DOT output.

use contract_calculus::corpus;
use contract_calculus::lts::explore_lts;
use contract_calculus::reduction::{explore, Bounds};
use contract_calculus::trace::{run, Semantics, Trace};

pub fn run_example() -> contract_calculus::Result<()> {
    let p = corpus::get("semaphores")?.program()?;
    for semantics in [Semantics::Reduction, Semantics::Lts] {
        let t = run(&p.main, &p.defs, semantics, 7, 50);
        print!("{t}");
        let json = t.to_json();
        assert_eq!(Trace::from_json(&json)?, t);
        assert_eq!(run(&p.main, &p.defs, semantics, 7, 50).to_json(), json);
    }
    let reduction = explore(&p.main, &p.defs, Bounds::default());
    let lts = explore_lts(&p.main, &p.defs, Bounds::default());
    println!("{} reduction states, {} labelled states", reduction.states.len(), lts.states.len());
    print!("{}", reduction.to_dot());
    Ok(())
}

fn main() -> contract_calculus::Result<()> {
    run_example()
}
