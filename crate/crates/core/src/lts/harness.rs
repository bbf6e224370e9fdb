//! Cross-checks between the two semantics and a bounded bisimulation probe.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use super::action::Action;
use super::steps::{labelled_steps, top_steps_with, FuseRule, LabelledStep};
use crate::logic::{Ident, Subst};
use crate::process::{permutations, to_normal_form, Definitions, Process};
use crate::reduction::{explore, successors, Bounds};

/// A state where the two semantics disagree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub state: String,
    pub reduction_only: Vec<String>,
    pub labelled_only: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorrespondenceReport {
    pub states_checked: usize,
    pub mismatches: Vec<Mismatch>,
    /// The exploration hit its bounds.
    pub truncated: bool,
}

impl CorrespondenceReport {
    pub fn holds(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn keys(ps: impl IntoIterator<Item = Process>, defs: &Definitions) -> BTreeSet<String> {
    ps.into_iter()
        .map(|q| to_normal_form(&q, defs).key().to_string())
        .collect()
}

fn compare(
    state: &str,
    red: &BTreeSet<String>,
    lab: &BTreeSet<String>,
) -> Option<Mismatch> {
    (red != lab).then(|| Mismatch {
        state: state.to_string(),
        reduction_only: red.difference(lab).cloned().collect(),
        labelled_only: lab.difference(red).cloned().collect(),
    })
}

/// Compares reduction successors with top-level labelled successors, modulo
/// structural congruence, on every state reached by reduction.
pub fn correspondence_check(
    p: &Process,
    defs: &Definitions,
    bounds: Bounds,
    fuse_rule: FuseRule,
) -> CorrespondenceReport {
    let graph = explore(p, defs, bounds);
    let mut mismatches = Vec::new();
    let root_red: BTreeSet<String> = successors(graph.root(), defs)
        .into_iter()
        .map(|(_, s)| s.key().to_string())
        .collect();
    let raw = keys(top_steps_with(p, defs, fuse_rule), defs);
    mismatches.extend(compare(&p.to_string(), &root_red, &raw));
    for nf in &graph.states {
        let red: BTreeSet<String> = successors(nf, defs)
            .into_iter()
            .map(|(_, s)| s.key().to_string())
            .collect();
        let lab = keys(top_steps_with(&nf.to_process(), defs, fuse_rule), defs);
        mismatches.extend(compare(nf.key(), &red, &lab));
    }
    CorrespondenceReport {
        states_checked: graph.states.len(),
        mismatches,
        truncated: graph.truncated,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BisimReport {
    pub matched: bool,
    pub depth: usize,
    /// Description of the first unmatched step.
    pub unmatched: Option<String>,
}

/// Label binder bijections `b1 -> b2` preserving identifier kinds.
fn bijections(b1: &BTreeSet<Ident>, b2: &BTreeSet<Ident>) -> Vec<Subst> {
    if b1.len() != b2.len() {
        return Vec::new();
    }
    let (v1, n1): (Vec<Ident>, Vec<Ident>) = b1.iter().cloned().partition(Ident::is_var);
    let (v2, n2): (Vec<Ident>, Vec<Ident>) = b2.iter().cloned().partition(Ident::is_var);
    if v1.len() != v2.len() || n1.len() != n2.len() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for pv in permutations(&v2) {
        for pn in permutations(&n2) {
            let s: Subst = v1
                .iter()
                .cloned()
                .zip(pv.iter().cloned())
                .chain(n1.iter().cloned().zip(pn.iter().cloned()))
                .collect();
            out.push(s);
        }
    }
    out
}

struct Prober<'a> {
    defs: &'a Definitions,
    memo: HashMap<(String, String, usize), bool>,
    unmatched: Option<String>,
}

impl Prober<'_> {
    fn key(&self, p: &Process) -> String {
        to_normal_form(p, self.defs).key().to_string()
    }

    /// Every step of `from` has a step of `to` with the same label, up to
    /// renaming label binders, and a related successor.
    fn simulates(&mut self, from: &[LabelledStep], to: &[LabelledStep], depth: usize) -> bool {
        'steps: for s in from {
            for t in to {
                for beta in bijections(&s.action.binders, &t.action.binders) {
                    let renamed: Action = s.action.rename(&beta);
                    if renamed != t.action {
                        continue;
                    }
                    let succ = s.successor.subst(&beta);
                    if self.key(&succ) == self.key(&t.successor)
                        && self.related(&succ, &t.successor, depth - 1)
                    {
                        continue 'steps;
                    }
                }
            }
            if self.unmatched.is_none() {
                self.unmatched = Some(format!("--{}--> {}", s.action, s.successor));
            }
            return false;
        }
        true
    }

    fn related(&mut self, p: &Process, q: &Process, depth: usize) -> bool {
        if depth == 0 {
            return true;
        }
        let memo_key = (self.key(p), self.key(q), depth);
        if let Some(&r) = self.memo.get(&memo_key) {
            return r;
        }
        let sp = labelled_steps(p, self.defs);
        let sq = labelled_steps(q, self.defs);
        let r = self.simulates(&sp, &sq, depth) && self.simulates(&sq, &sp, depth);
        self.memo.insert(memo_key, r);
        r
    }
}

/// Checks that `p` and `q` match each other's labelled steps, with
/// structurally congruent successors, down to `depth` steps.
pub fn bisim_probe(p: &Process, q: &Process, defs: &Definitions, depth: usize) -> BisimReport {
    let mut prober = Prober {
        defs,
        memo: HashMap::new(),
        unmatched: None,
    };
    let matched = prober.related(p, q, depth);
    BisimReport {
        matched,
        depth,
        unmatched: if matched { None } else { prober.unmatched },
    }
}
