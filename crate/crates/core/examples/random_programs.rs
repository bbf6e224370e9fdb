//! Generated programs and the reduction/labelled correspondence on them.

use contract_calculus::lts::{correspondence_check, FuseRule};
use contract_calculus::random::{random_programs, GenConfig};
use contract_calculus::reduction::Bounds;

pub fn run_example() -> contract_calculus::Result<()> {
    let cfg = GenConfig::default();
    let (mut states, mut mismatches) = (0, 0);
    for p in random_programs(3, 40, &cfg) {
        let r = correspondence_check(&p.main, &p.defs, Bounds::new(200, 200), FuseRule::LocalMinimal);
        states += r.states_checked;
        mismatches += r.mismatches.len();
    }
    println!("40 programs, {states} states compared, {mismatches} mismatches");
    for p in random_programs(3, 3, &cfg) {
        println!("---\n{p}");
    }
    Ok(())
}

fn main() -> contract_calculus::Result<()> {
    run_example()
}
