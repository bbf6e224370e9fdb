//! Bounded breadth-first exploration of the reduction relation.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use super::engine::{enabled_redexes, successors, Redex, Rule};
use super::fusion::Fusion;
use crate::process::{to_normal_form, Definitions, NormalForm, Process};

/// Exploration limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub max_states: usize,
    pub max_depth: usize,
}

impl Bounds {
    pub fn new(max_states: usize, max_depth: usize) -> Self {
        assert!(max_states > 0 && max_depth > 0, "bounds are positive");
        Bounds {
            max_states,
            max_depth,
        }
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds::new(10_000, 200)
    }
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub redex: Redex,
}

/// Explored transition system; state 0 is the root.
#[derive(Clone, Debug)]
pub struct StateGraph {
    pub states: Vec<NormalForm>,
    pub depth: Vec<usize>,
    pub edges: Vec<Edge>,
    /// Some state was left unexpanded because of the bounds.
    pub truncated: bool,
}

/// One step of a trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub rule: Rule,
    pub agent: usize,
    pub branch: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fusion: Option<Fusion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub join: Option<JoinBinding>,
    /// Resulting state in canonical syntax.
    pub state: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JoinBinding {
    pub variable: String,
    pub name: String,
}

impl Step {
    pub fn new(r: &Redex, state: &NormalForm) -> Self {
        Step {
            rule: r.rule,
            agent: r.agent,
            branch: r.branch,
            fusion: r.fusion.clone(),
            join: r.join.as_ref().map(|(x, n)| JoinBinding {
                variable: x.label().to_string(),
                name: n.label().to_string(),
            }),
            state: state.key().to_string(),
        }
    }
}

/// Keeps an edge when it returns true.
pub type EdgeFilter<'a> = &'a dyn Fn(&NormalForm, &Redex, &NormalForm) -> bool;

pub fn explore(p: &Process, defs: &Definitions, bounds: Bounds) -> StateGraph {
    explore_filtered(p, defs, bounds, None)
}

/// Exploration that only follows edges accepted by `filter`.
pub fn explore_filtered(
    p: &Process,
    defs: &Definitions,
    bounds: Bounds,
    filter: Option<EdgeFilter>,
) -> StateGraph {
    let root = to_normal_form(p, defs);
    let mut graph = StateGraph {
        states: vec![root.clone()],
        depth: vec![0],
        edges: Vec::new(),
        truncated: false,
    };
    let mut index: HashMap<String, usize> = HashMap::from([(root.key().to_string(), 0)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let state = graph.states[i].clone();
        if graph.depth[i] >= bounds.max_depth {
            if !enabled_redexes(&state, defs).is_empty() {
                graph.truncated = true;
            }
            continue;
        }
        for (r, next) in successors(&state, defs) {
            if filter.is_some_and(|f| !f(&state, &r, &next)) {
                continue;
            }
            let to = match index.get(next.key()) {
                Some(&k) => k,
                None => {
                    if graph.states.len() >= bounds.max_states {
                        graph.truncated = true;
                        continue;
                    }
                    let k = graph.states.len();
                    index.insert(next.key().to_string(), k);
                    graph.states.push(next);
                    graph.depth.push(graph.depth[i] + 1);
                    queue.push_back(k);
                    k
                }
            };
            graph.edges.push(Edge { from: i, to, redex: r });
        }
    }
    graph
}

/// Outcome of a reachability query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reach {
    /// Reached; the trace leads from the root to the witness state.
    Yes(Vec<Step>),
    /// Exhaustively unreachable.
    No,
    /// Not found within the bounds.
    Unknown,
}

pub fn reaches(
    p: &Process,
    defs: &Definitions,
    target: &dyn Fn(&NormalForm) -> bool,
    bounds: Bounds,
) -> Reach {
    reaches_filtered(p, defs, target, bounds, None)
}

pub fn reaches_filtered(
    p: &Process,
    defs: &Definitions,
    target: &dyn Fn(&NormalForm) -> bool,
    bounds: Bounds,
    filter: Option<EdgeFilter>,
) -> Reach {
    let graph = explore_filtered(p, defs, bounds, filter);
    match graph.states.iter().position(target) {
        Some(k) => Reach::Yes(graph.trace_to(k)),
        None if graph.truncated => Reach::Unknown,
        None => Reach::No,
    }
}

impl StateGraph {
    pub fn root(&self) -> &NormalForm {
        &self.states[0]
    }

    /// Shortest trace from the root to state `k`.
    pub fn trace_to(&self, k: usize) -> Vec<Step> {
        let mut parent: Vec<Option<usize>> = vec![None; self.states.len()];
        for (e_idx, e) in self.edges.iter().enumerate() {
            if parent[e.to].is_none() && e.to != 0 && self.depth[e.to] == self.depth[e.from] + 1 {
                parent[e.to] = Some(e_idx);
            }
        }
        let mut steps = Vec::new();
        let mut cur = k;
        while let Some(e_idx) = parent[cur] {
            let e = &self.edges[e_idx];
            steps.push(Step::new(&e.redex, &self.states[e.to]));
            cur = e.from;
        }
        steps.reverse();
        steps
    }

    pub fn successors_of(&self, k: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == k)
    }

    /// States without outgoing edges.
    pub fn final_states(&self) -> Vec<usize> {
        let mut has_out = vec![false; self.states.len()];
        for e in &self.edges {
            has_out[e.from] = true;
        }
        (0..self.states.len()).filter(|&k| !has_out[k]).collect()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph states {\n  node [shape=box, fontname=\"monospace\"];\n");
        for (k, s) in self.states.iter().enumerate() {
            let _ = writeln!(out, "  s{k} [label=\"{}\"];", escape(s.key()));
        }
        for e in &self.edges {
            let mut label = e.redex.rule.to_string();
            if let Some(f) = &e.redex.fusion {
                let _ = write!(label, " {f}");
            }
            if let Some((x, n)) = &e.redex.join {
                let _ = write!(label, " {{{x} -> {n}}}");
            }
            let _ = writeln!(out, "  s{} -> s{} [label=\"{}\"];", e.from, e.to, escape(&label));
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
            .map(|e| {
                serde_json::json!({
                    "from": e.from,
                    "to": e.to,
                    "step": Step::new(&e.redex, &self.states[e.to]),
                })
            })
            .collect();
        serde_json::json!({
            "states": states,
            "edges": edges,
            "truncated": self.truncated,
        })
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::parse_program;

    fn graph(src: &str, bounds: Bounds) -> StateGraph {
        let p = parse_program(src).unwrap();
        explore(&p.main, &p.defs, bounds)
    }

    #[test]
    fn nil_is_a_single_state() {
        let g = graph("main 0", Bounds::default());
        assert_eq!(g.states.len(), 1);
        assert!(g.edges.is_empty());
        assert!(!g.truncated);
    }

    #[test]
    fn interleavings_merge() {
        let g = graph("main tau.0 || tau.0", Bounds::default());
        assert_eq!(g.states.len(), 3);
        assert_eq!(g.edges.len(), 3);
    }

    #[test]
    fn recursion_with_fresh_binders_is_finite() {
        let g = graph("X() := tau.(x) tell(p(x)).X() main X()", Bounds::new(50, 50));
        assert!(g.truncated, "store grows without bound");
        let g = graph("X() := tau.(x) fuse(x, top).X() main X()", Bounds::new(50, 50));
        assert!(!g.truncated);
    }

    #[test]
    fn truncation_is_reported() {
        let g = graph("main tau.tau.tau.0", Bounds::new(10, 2));
        assert!(g.truncated);
        let p = parse_program("main tau.tau.tau.0").unwrap();
        let r = reaches(&p.main, &p.defs, &|s| s.key() == "0", Bounds::new(10, 2));
        assert_eq!(r, Reach::Unknown);
        let r = reaches(&p.main, &p.defs, &|s| s.key() == "0", Bounds::default());
        assert!(matches!(r, Reach::Yes(t) if t.len() == 3));
    }

    #[test]
    fn exports() {
        let g = graph("main tell(a).ask(a).0", Bounds::default());
        assert!(g.to_dot().contains("Tell"));
        let json = g.to_json();
        assert_eq!(json["states"].as_array().unwrap().len(), 3);
    }
}
