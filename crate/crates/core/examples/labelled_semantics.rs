//! Labelled transitions, and their agreement with the reduction relation.

use contract_calculus::lts::{correspondence_check, labelled_steps, FuseRule};
use contract_calculus::process::parse_program;
use contract_calculus::reduction::Bounds;

pub fn run_example() -> contract_calculus::Result<()> {
    let p = parse_program(
        "main (x)(y)(z)(fuse(x, p(x)).keep(x, y, z) || {q(y)} || {(q(z) \\/ s) -> p(y)}) || {s}",
    )?;
    for step in labelled_steps(&p.main, &p.defs) {
        println!("--{}--> {}", step.action, step.successor);
    }
    for rule in [FuseRule::LocalMinimal, FuseRule::SubjectOnly] {
        let report = correspondence_check(&p.main, &p.defs, Bounds::default(), rule);
        println!(
            "{rule:?}: {} states, {} mismatches",
            report.states_checked,
            report.mismatches.len()
        );
    }
    Ok(())
}

fn main() -> contract_calculus::Result<()> {
    run_example()
}
