//! Jointly consumable resources: a diner may take several dishes in one go
//! from a single-trip buffet, but never come back for seconds.

use contract_calculus::corpus;
use contract_calculus::reduction::{reaches, Bounds, Reach};

pub fn run_example() -> contract_calculus::Result<()> {
    for (name, diner) in [
        ("ex4_buffet_bob", "SatiatedB"),
        ("ex4_buffet_carl", "SatiatedC"),
        ("ex4_buffet_prime_bob", "SatiatedB"),
        ("ex4_buffet_prime_carl", "SatiatedC"),
    ] {
        let p = corpus::get(name)?.program()?;
        let outcome = match reaches(&p.main, &p.defs, &|s| s.has_agent(diner), Bounds::default()) {
            Reach::Yes(t) => format!("reachable in {} steps", t.len()),
            Reach::No => "unreachable".into(),
            Reach::Unknown => "unknown".into(),
        };
        println!("{name:<24} {diner}: {outcome}");
    }
    Ok(())
}

fn main() -> contract_calculus::Result<()> {
    run_example()
}
