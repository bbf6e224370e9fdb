//! Probing that structurally congruent processes simulate each other.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use contract_calculus::lts::bisim_probe;
use contract_calculus::process::parse_program;
use contract_calculus::random::{mutate, random_programs, GenConfig};

pub fn run_example() -> contract_calculus::Result<()> {
    let p = parse_program("main (x)(tell(a(x)).0 || {b} || fuse(x, a(x)).done(x))")?;
    let q = parse_program("main {b} || (y)(fuse(y, a(y)).done(y) || tell(a(y)).0 || 0)")?;
    let r = bisim_probe(&p.main, &q.main, &p.defs, 6);
    println!("hand-written pair: matched = {}", r.matched);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for prog in random_programs(11, 5, &GenConfig::default()) {
        let (other, axiom) = mutate(&prog.main, &prog.defs, &mut rng);
        let r = bisim_probe(&prog.main, &other, &prog.defs, 5);
        println!("{axiom}\n    {}\n    {other}\n    matched = {}", prog.main, r.matched);
    }
    Ok(())
}

fn main() -> contract_calculus::Result<()> {
    run_example()
}
