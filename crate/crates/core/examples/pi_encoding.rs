//! Encoding pi-calculus communication with fuse, join and tell.

use contract_calculus::encodings::{encode_pi, parse_pi, pi_correspondence, pi_successors};
use contract_calculus::process::Definitions;
use contract_calculus::reduction::{explore, Bounds};

pub fn run_example() -> contract_calculus::Result<()> {
    let src = "(new m)(n<m>.sent() | n(z).got(z))";
    let p = parse_pi(src)?;
    println!("pi term:  {}", p.main);
    println!("encoding: {}", encode_pi(&p.main));
    for s in pi_successors(&p.main, &p.defs) {
        println!("pi step:  {s}");
    }
    println!("simulated: {}", pi_correspondence(&p.main, &p.defs, Bounds::default()));

    let lonely = encode_pi(&parse_pi("n<m>.sent()")?.main);
    let g = explore(&lonely, &Definitions::new(), Bounds::default());
    println!("an output with no reader has {} moves", g.edges.len());
    Ok(())
}

fn main() -> contract_calculus::Result<()> {
    run_example()
}
