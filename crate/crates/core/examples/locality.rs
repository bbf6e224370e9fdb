//! Minimal and local-minimal fusions for a fuse prefix.

use std::collections::BTreeSet;

use contract_calculus::logic::{Formula, Ident};
use contract_calculus::reduction::{local_minimal_fusions, minimal_fusions};

pub fn run_example() -> contract_calculus::Result<()> {
    let v = Ident::var;
    let store = vec![
        Formula::atom("q", vec![v("y")]),
        Formula::imp(
            Formula::or(Formula::atom("q", vec![v("z")]), Formula::prop("s")),
            Formula::atom("p", vec![v("y")]),
        ),
        Formula::prop("s"),
    ];
    let goal = Formula::atom("p", vec![v("x")]);
    let candidates: BTreeSet<Ident> = ["x", "y", "z"].into_iter().map(v).collect();
    for f in minimal_fusions(&store, &goal, &v("x"), &candidates) {
        println!("minimal over the whole store: {f}");
    }
    for lf in local_minimal_fusions(&store, &goal, &v("x"), &candidates, &Ident::name("n")) {
        let witness: Vec<String> = lf.witness.iter().map(|w| w.to_string()).collect();
        println!("local-minimal: {} witnessed by {{{}}}", lf.fusion, witness.join(", "));
    }
    Ok(())
}

fn main() -> contract_calculus::Result<()> {
    run_example()
}
