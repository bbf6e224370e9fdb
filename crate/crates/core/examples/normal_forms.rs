//! Parsing programs, canonical normal forms and structural congruence.

use contract_calculus::process::{parse_process, parse_program, struct_equiv, to_normal_form};

pub fn run_example() -> contract_calculus::Result<()> {
    let p = parse_program(
        "Worker(n) := ask(job(n)).tell(done(n)).0;
         main (new j)({job(j)} || Worker(j)) || 0",
    )?;
    println!("{p}");
    let nf = to_normal_form(&p.main, &p.defs);
    println!("normal form: {nf}");
    let q = parse_process("(new k)(Worker(k) || {job(k)})")?;
    println!("congruent to {q}: {}", struct_equiv(&p.main, &q, &p.defs));
    match parse_program("main fuse(x, p(x)).0 ||") {
        Err(e) => println!("parse error: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}

fn main() -> contract_calculus::Result<()> {
    run_example()
}
