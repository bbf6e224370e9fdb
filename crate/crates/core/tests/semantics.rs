//! The two semantics agree on the built-in programs.

use std::collections::BTreeSet;

use contract_calculus::corpus;
use contract_calculus::lts::{correspondence_check, explore_lts, FuseRule};
use contract_calculus::reduction::{explore, Bounds};

const LARGE: [&str; 2] = ["ex2_insured", "loop8"];

#[test]
fn same_reachable_states() {
    for e in corpus::entries().iter().filter(|e| !LARGE.contains(&e.name)) {
        let p = e.program().unwrap();
        let red = explore(&p.main, &p.defs, Bounds::default());
        let lts = explore_lts(&p.main, &p.defs, Bounds::default());
        assert!(!red.truncated && !lts.truncated, "{}", e.name);
        let keys = |it: Vec<String>| it.into_iter().collect::<BTreeSet<_>>();
        assert_eq!(
            keys(red.states.iter().map(|s| s.key().to_string()).collect()),
            keys(lts.states.iter().map(|s| s.key().to_string()).collect()),
            "{}",
            e.name
        );
    }
}

#[test]
fn corpus_correspondence() {
    for e in corpus::entries().iter().filter(|e| !LARGE.contains(&e.name)) {
        let p = e.program().unwrap();
        let r = correspondence_check(&p.main, &p.defs, Bounds::default(), FuseRule::LocalMinimal);
        assert!(r.holds(), "{}: {:?}", e.name, r.mismatches.first());
    }
}
