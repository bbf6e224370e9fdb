//! Semaphores, memory cells and a Linda tuple space built from the primitives.

use contract_calculus::encodings::{cell_get, cell_new, cell_set, linda_in, linda_out, sem_p, semaphore, Field};
use contract_calculus::logic::Ident;
use contract_calculus::process::{Definitions, Process};
use contract_calculus::reduction::{explore, Bounds};

fn finals(label: &str, p: &Process) {
    let g = explore(p, &Definitions::new(), Bounds::default());
    println!("{label}: {} states", g.states.len());
    for k in g.final_states() {
        println!("    {}", g.states[k]);
    }
}

pub fn run_example() -> contract_calculus::Result<()> {
    let s = Ident::name("s");
    let race = Process::par_all([
        semaphore(&s, 1),
        sem_p(&s, Process::call("first", vec![])),
        sem_p(&s, Process::call("second", vec![])),
    ]);
    finals("semaphore with one token", &race);

    let (c, v, w, y) = (Ident::name("c"), Ident::name("v"), Ident::name("w"), Ident::var("y"));
    let read = Process::delim(y.clone(), cell_get(&c, &y, Process::call("seen", vec![y.clone()])));
    let cell = Process::delim_all([v.clone(), w.clone()], cell_new(&c, &v, cell_set(&c, &w, read)));
    finals("cell written twice then read", &cell);

    let (a, b, x) = (Ident::name("a"), Ident::name("b"), Ident::var("x"));
    let space = Process::par(
        linda_out(&a, &b, Process::nil()),
        Process::delim(
            x.clone(),
            linda_in(&Field::Bind(x.clone()), &Field::Exact(b), Process::call("got", vec![x])),
        ),
    );
    finals("tuple space", &space);
    Ok(())
}

fn main() -> contract_calculus::Result<()> {
    run_example()
}
