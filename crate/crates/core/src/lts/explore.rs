//! State spaces generated by the top-level labelled steps.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write;

use super::steps::top_steps;
use crate::process::{to_normal_form, Definitions, NormalForm, Process};
use crate::reduction::Bounds;

#[derive(Clone, Debug)]
pub struct LtsGraph {
    pub states: Vec<NormalForm>,
    pub depth: Vec<usize>,
    /// `(from, to)` pairs; duplicates from distinct derivations are merged.
    pub edges: Vec<(usize, usize)>,
    pub truncated: bool,
}

/// Breadth-first exploration of internal steps, states identified by
/// canonical key.
pub fn explore_lts(p: &Process, defs: &Definitions, bounds: Bounds) -> LtsGraph {
    let root = to_normal_form(p, defs);
    let mut g = LtsGraph {
        states: vec![root.clone()],
        depth: vec![0],
        edges: Vec::new(),
        truncated: false,
    };
    let mut index: HashMap<String, usize> = HashMap::from([(root.key().to_string(), 0)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let nexts: Vec<NormalForm> = top_steps(&g.states[i].to_process(), defs)
            .iter()
            .map(|q| to_normal_form(q, defs))
            .collect();
        if g.depth[i] >= bounds.max_depth {
            g.truncated |= !nexts.is_empty();
            continue;
        }
        for next in nexts {
            let to = match index.get(next.key()) {
                Some(&k) => k,
                None => {
                    if g.states.len() >= bounds.max_states {
                        g.truncated = true;
                        continue;
                    }
                    let k = g.states.len();
                    index.insert(next.key().to_string(), k);
                    g.states.push(next);
                    g.depth.push(g.depth[i] + 1);
                    queue.push_back(k);
                    k
                }
            };
            if !g.edges.contains(&(i, to)) {
                g.edges.push((i, to));
            }
        }
    }
    g
}

impl LtsGraph {
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph lts {\n  node [shape=box, fontname=\"monospace\"];\n");
        for (k, s) in self.states.iter().enumerate() {
            let _ = writeln!(out, "  s{k} [label=\"{}\"];", s.key().replace('\\', "\\\\").replace('"', "\\\""));
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "  s{a} -> s{b} [label=\"tau\"];");
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let states: Vec<_> = self
            .states
            .iter()
            .zip(&self.depth)
            .enumerate()
            .map(|(k, (s, d))| serde_json::json!({"id": k, "depth": d, "state": s.key()}))
            .collect();
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|(a, b)| serde_json::json!({"from": a, "to": b, "action": "tau"}))
            .collect();
        serde_json::json!({"states": states, "edges": edges, "truncated": self.truncated})
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::parse_program;
    use crate::reduction::explore;
    use std::collections::BTreeSet;

    #[test]
    fn internal_steps_reach_the_reduction_states() {
        let p = parse_program(
            "A() := (x)(tell(b(x) ->> a(x)).fuse(x, a(x)).doneA(x));
             B() := (y)(tell(a(y) ->> b(y)).fuse(y, b(y)).doneB(y));
             main A() || B() || tau.check(!a(c)).0",
        )
        .unwrap();
        let lts = explore_lts(&p.main, &p.defs, Bounds::default());
        let red = explore(&p.main, &p.defs, Bounds::default());
        let keys = |it: &mut dyn Iterator<Item = &NormalForm>| -> BTreeSet<String> {
            it.map(|s| s.key().to_string()).collect()
        };
        assert_eq!(keys(&mut lts.states.iter()), keys(&mut red.states.iter()));
        assert!(!lts.truncated);
        assert!(lts.to_dot().contains("tau"));
    }
}
