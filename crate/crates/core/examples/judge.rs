//! Dispute resolution: a seeded run and an exhaustive reachability check.

use contract_calculus::corpus;
use contract_calculus::reduction::{reaches, Bounds, Reach};
use contract_calculus::trace::{run, Semantics};

pub fn run_example() -> contract_calculus::Result<()> {
    let p = corpus::get("ex3_judge")?.program()?;
    let trace = run(&p.main, &p.defs, Semantics::Reduction, 1, 100);
    print!("{trace}");
    let jailed = |s: &contract_calculus::NormalForm| s.has_agent("jailSeller");
    match reaches(&p.main, &p.defs, &jailed, Bounds::new(2000, 200)) {
        Reach::Yes(steps) => println!("jailSeller reachable in {} steps", steps.len()),
        other => panic!("expected reachable, got {other:?}"),
    }
    Ok(())
}

fn main() -> contract_calculus::Result<()> {
    run_example()
}
