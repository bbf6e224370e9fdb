//! Coordination idioms built from fuse, join and tell.

use std::collections::BTreeSet;

use crate::logic::{Formula, FreshSupply, Ident};
use crate::process::{Prefix, Process};

fn supply_avoiding<'a>(ids: impl IntoIterator<Item = &'a Ident>, conts: &[&Process]) -> FreshSupply {
    let mut supply = FreshSupply::new();
    supply.reserve_all(ids);
    for p in conts {
        let mut labels = BTreeSet::new();
        p.all_labels(&mut labels);
        for l in labels {
            supply.reserve(l);
        }
    }
    supply
}

fn at(pred: &str, args: &[&Ident]) -> Formula {
    Formula::atom(pred, args.iter().map(|a| (*a).clone()).collect())
}

/// Jointly consumable family: a single fuse may demand any subset of the
/// formulas, after which the others are no longer derivable.
///
/// Uses a predicate `r` (suffixed until it does not clash with the formulas)
/// guarded by a fresh name `o`, a shared variable `z` and one variable per
/// formula.
pub fn oplus(formulas: &[Formula]) -> Process {
    let used: BTreeSet<String> = formulas.iter().flat_map(Formula::predicates).collect();
    let mut pred = "r".to_string();
    let mut k = 0;
    while used.contains(&pred) {
        k += 1;
        pred = format!("r{k}");
    }
    oplus_with(formulas, &pred)
}

/// [`oplus`] with an explicit guard predicate.
pub fn oplus_with(formulas: &[Formula], pred: &str) -> Process {
    assert!(!formulas.is_empty(), "oplus needs at least one formula");
    let ids: BTreeSet<Ident> = formulas.iter().flat_map(Formula::identifiers).collect();
    let mut supply = supply_avoiding(&ids, &[]);
    let o = supply.freshen(&Ident::name("o"));
    let z = supply.freshen(&Ident::var("z"));
    let zs: Vec<Ident> = formulas.iter().map(|_| supply.freshen(&Ident::var("z"))).collect();
    let mut items = vec![Process::Constraint(at(pred, &[&o, &z]))];
    for (zi, p) in zs.iter().zip(formulas) {
        items.push(Process::Constraint(Formula::imp(at(pred, &[&o, zi]), p.clone())));
    }
    let binders = [o, z].into_iter().chain(zs);
    Process::delim_all(binders, Process::par_all(items))
}

/// `k` semaphore tokens for `n`.
pub fn semaphore(n: &Ident, k: usize) -> Process {
    Process::par_all((0..k).map(|_| sem_v(n, Process::nil())))
}

/// Wait: consumes one token of `n`, then continues.
pub fn sem_p(n: &Ident, cont: Process) -> Process {
    let x = supply_avoiding([n], &[&cont]).freshen(&Ident::var("x"));
    let goal = at("p", &[n, &x]);
    Process::delim(x.clone(), Process::prefixed(Prefix::Fuse(x, goal), cont))
}

/// Signal: provides one token of `n`, then continues.
pub fn sem_v(n: &Ident, cont: Process) -> Process {
    let x = supply_avoiding([n], &[&cont]).freshen(&Ident::var("x"));
    let token = at("p", &[n, &x]);
    Process::delim(x, Process::prefixed(Prefix::Tell(token), cont))
}

/// Creates cell `n` holding `v`.
pub fn cell_new(n: &Ident, v: &Ident, cont: Process) -> Process {
    let x = supply_avoiding([n, v], &[&cont]).freshen(&Ident::var("x"));
    let c = Formula::and(at("c", &[n, &x]), at("d", &[&x, v]));
    Process::delim(x, Process::prefixed(Prefix::Tell(c), cont))
}

/// Reads cell `n` into the variable `y` (delimited by the caller); the read
/// consumes the cell, which is then re-created.
pub fn cell_get(n: &Ident, y: &Ident, cont: Process) -> Process {
    let w = supply_avoiding([n, y], &[&cont]).freshen(&Ident::var("w"));
    let recreate = cell_new(n, y, cont);
    let join = Process::prefixed(Prefix::Join(y.clone(), at("d", &[&w, y])), recreate);
    Process::delim(
        w.clone(),
        Process::prefixed(Prefix::Fuse(w.clone(), at("c", &[n, &w])), join),
    )
}

/// Overwrites cell `n` with `v`.
pub fn cell_set(n: &Ident, v: &Ident, cont: Process) -> Process {
    let w = supply_avoiding([n, v], &[&cont]).freshen(&Ident::var("w"));
    let recreate = cell_new(n, v, cont);
    Process::delim(
        w.clone(),
        Process::prefixed(Prefix::Fuse(w.clone(), at("c", &[n, &w])), recreate),
    )
}

/// Inserts the pair `(w, y)` into the tuple space.
pub fn linda_out(w: &Ident, y: &Ident, cont: Process) -> Process {
    let x = supply_avoiding([w, y], &[&cont]).freshen(&Ident::var("x"));
    let tuple = Formula::conj([at("p", &[&x]), at("p1", &[&x, w]), at("p2", &[&x, y])]);
    Process::delim(x, Process::prefixed(Prefix::Tell(tuple), cont))
}

/// Retrieval pattern; `Bind` positions receive the matched component into a
/// variable delimited by the caller.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Field {
    Exact(Ident),
    Bind(Ident),
}

/// Removes a pair matching the pattern from the tuple space.
pub fn linda_in(first: &Field, second: &Field, cont: Process) -> Process {
    let (Field::Exact(a) | Field::Bind(a)) = first;
    let (Field::Exact(b) | Field::Bind(b)) = second;
    let x = supply_avoiding([a, b], &[&cont]).freshen(&Ident::var("x"));
    let (match_goal, joins) = match (first, second) {
        (Field::Exact(w), Field::Exact(y)) => {
            (Formula::and(at("p1", &[&x, w]), at("p2", &[&x, y])), vec![])
        }
        (Field::Bind(w), Field::Exact(y)) => (at("p2", &[&x, y]), vec![(w, "p1")]),
        (Field::Exact(w), Field::Bind(y)) => (at("p1", &[&x, w]), vec![(y, "p2")]),
        (Field::Bind(w), Field::Bind(y)) => (at("p", &[&x]), vec![(w, "p1"), (y, "p2")]),
    };
    let body = joins.into_iter().rev().fold(cont, |acc, (v, pred)| {
        Process::prefixed(Prefix::Join(v.clone(), at(pred, &[&x, v])), acc)
    });
    Process::delim(
        x.clone(),
        Process::prefixed(Prefix::Fuse(x.clone(), match_goal), body),
    )
}
