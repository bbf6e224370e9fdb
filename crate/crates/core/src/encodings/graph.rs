//! Hypergraph rewriting and its compilation into contract handshakes.
//!
//! Text formats: a hypergraph is a list of `vertex v1 v2 ...;` and
//! `edge id tag (v1, v2, ...);` items; a rule is
//! `rule name { source { ... } target { ... } }`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use super::idioms::oplus_with;
use crate::error::{Error, ParseError, Result};
use crate::logic::{Formula, Ident};
use crate::process::{Agent, Definition, Definitions, NormalForm, Prefix, Process};
use crate::syntax::Pos;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Hyperedge {
    pub id: String,
    pub tag: String,
    pub vertices: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Hypergraph {
    vertices: BTreeSet<String>,
    edges: BTreeMap<String, Hyperedge>,
}

impl Hypergraph {
    /// Checks that edge ids are unique, incident vertices exist and each tag
    /// has one arity.
    pub fn new(
        vertices: impl IntoIterator<Item = String>,
        edges: impl IntoIterator<Item = Hyperedge>,
    ) -> Result<Self> {
        let vertices: BTreeSet<String> = vertices.into_iter().collect();
        let mut map = BTreeMap::new();
        for e in edges {
            if let Some(v) = e.vertices.iter().find(|v| !vertices.contains(*v)) {
                return Err(Error::InvalidHypergraph(format!(
                    "edge `{}` uses undeclared vertex `{v}`",
                    e.id
                )));
            }
            if map.contains_key(&e.id) {
                return Err(Error::InvalidHypergraph(format!("duplicate edge id `{}`", e.id)));
            }
            map.insert(e.id.clone(), e);
        }
        let g = Hypergraph {
            vertices,
            edges: map,
        };
        g.tag_arities()?;
        Ok(g)
    }

    pub fn parse(src: &str) -> Result<Self> {
        let mut lx = Lexer::new(src);
        let g = lx.graph()?;
        if let Some((t, pos)) = lx.next() {
            return Err(ParseError::new(pos, format!("unexpected `{t}`")).into());
        }
        Ok(g)
    }

    pub fn vertices(&self) -> &BTreeSet<String> {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = &Hyperedge> {
        self.edges.values()
    }

    pub fn edge(&self, id: &str) -> Option<&Hyperedge> {
        self.edges.get(id)
    }

    pub fn tag_arities(&self) -> Result<BTreeMap<String, usize>> {
        let mut out = BTreeMap::new();
        for e in self.edges.values() {
            let k = *out.entry(e.tag.clone()).or_insert(e.vertices.len());
            if k != e.vertices.len() {
                return Err(Error::ArityMismatch {
                    constant: e.tag.clone(),
                    expected: k,
                    found: e.vertices.len(),
                });
            }
        }
        Ok(out)
    }

    /// Connected through shared vertices; the empty graph is not connected.
    pub fn is_connected(&self) -> bool {
        let Some(start) = self.vertices.iter().next() else {
            return false;
        };
        let mut seen = BTreeSet::from([start.clone()]);
        let mut queue = VecDeque::from([start.clone()]);
        while let Some(v) = queue.pop_front() {
            for e in self.edges.values().filter(|e| e.vertices.contains(&v)) {
                for w in &e.vertices {
                    if seen.insert(w.clone()) {
                        queue.push_back(w.clone());
                    }
                }
            }
        }
        seen.len() == self.vertices.len()
    }
}

impl fmt::Display for Hypergraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("vertex")?;
        for v in &self.vertices {
            write!(f, " {v}")?;
        }
        f.write_str(";")?;
        for e in self.edges.values() {
            write!(f, " edge {} {} ({});", e.id, e.tag, e.vertices.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RewriteRule {
    pub name: String,
    pub source: Hypergraph,
    pub target: Hypergraph,
}

impl RewriteRule {
    /// Requires a connected source whose vertices all survive in the target,
    /// and consistent tag arities.
    pub fn new(name: impl Into<String>, source: Hypergraph, target: Hypergraph) -> Result<Self> {
        let name = name.into();
        let invalid = |reason: String| Error::InvalidRule {
            rule: name.clone(),
            reason,
        };
        if source.edges.is_empty() {
            return Err(invalid("the source has no hyperedges".into()));
        }
        if !source.is_connected() {
            return Err(Error::DisconnectedSource { rule: name });
        }
        if let Some(v) = source.vertices.difference(&target.vertices).next() {
            return Err(invalid(format!("vertex `{v}` is discarded")));
        }
        for (id, e) in &source.edges {
            if let Some(t) = target.edges.get(id) {
                if t.tag != e.tag {
                    return Err(invalid(format!("kept edge `{id}` changes its tag")));
                }
            }
        }
        let sa = source.tag_arities()?;
        for (tag, k) in target.tag_arities()? {
            if let Some(&j) = sa.get(&tag) {
                if j != k {
                    return Err(Error::ArityMismatch {
                        constant: tag,
                        expected: j,
                        found: k,
                    });
                }
            }
        }
        Ok(RewriteRule {
            name,
            source,
            target,
        })
    }

    pub fn parse_all(src: &str) -> Result<Vec<Self>> {
        let mut lx = Lexer::new(src);
        let mut out = Vec::new();
        while lx.peek().is_some() {
            out.push(lx.rule()?);
        }
        Ok(out)
    }
}

/// Images of the source vertices and hyperedges of a rule in a host.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Embedding {
    pub vertices: BTreeMap<String, String>,
    pub edges: BTreeMap<String, String>,
}

/// Whether `emb` maps the source of `rule` into `host` respecting tags,
/// incidence and edge injectivity.
pub fn is_embedding(rule: &RewriteRule, host: &Hypergraph, emb: &Embedding) -> bool {
    let src = &rule.source;
    if emb.vertices.len() != src.vertices.len() || emb.edges.len() != src.edges.len() {
        return false;
    }
    let images: BTreeSet<&String> = emb.edges.values().collect();
    if images.len() != emb.edges.len() {
        return false;
    }
    src.vertices
        .iter()
        .all(|v| emb.vertices.get(v).is_some_and(|w| host.vertices.contains(w)))
        && src.edges.values().all(|e| {
            let Some(f) = emb.edges.get(&e.id).and_then(|id| host.edges.get(id)) else {
                return false;
            };
            f.tag == e.tag
                && f.vertices.len() == e.vertices.len()
                && e.vertices
                    .iter()
                    .zip(&f.vertices)
                    .all(|(v, w)| emb.vertices.get(v) == Some(w))
        })
}

/// Every embedding of the rule source into `host`.
pub fn embed(rule: &RewriteRule, host: &Hypergraph) -> Vec<Embedding> {
    // Visit source edges so that each one after the first touches a visited vertex.
    let src = &rule.source;
    let mut order: Vec<&Hyperedge> = Vec::new();
    let mut touched: BTreeSet<&String> = BTreeSet::new();
    let mut rest: Vec<&Hyperedge> = src.edges.values().collect();
    while !rest.is_empty() {
        let k = rest
            .iter()
            .position(|e| e.vertices.iter().any(|v| touched.contains(v)))
            .unwrap_or(0);
        let e = rest.remove(k);
        touched.extend(e.vertices.iter());
        order.push(e);
    }
    let isolated: Vec<&String> = src.vertices.iter().filter(|v| !touched.contains(v)).collect();
    let mut out = Vec::new();
    let mut emb = Embedding {
        vertices: BTreeMap::new(),
        edges: BTreeMap::new(),
    };
    extend_edges(&order, &isolated, host, &mut emb, &mut out);
    out
}

fn extend_edges(
    order: &[&Hyperedge],
    isolated: &[&String],
    host: &Hypergraph,
    emb: &mut Embedding,
    out: &mut Vec<Embedding>,
) {
    let Some((e, rest)) = order.split_first() else {
        extend_vertices(isolated, host, emb, out);
        return;
    };
    let used: BTreeSet<String> = emb.edges.values().cloned().collect();
    for f in host.edges.values() {
        if f.tag != e.tag || f.vertices.len() != e.vertices.len() || used.contains(&f.id) {
            continue;
        }
        let mut added = Vec::new();
        let mut ok = true;
        for (v, w) in e.vertices.iter().zip(&f.vertices) {
            match emb.vertices.get(v) {
                Some(img) if img != w => {
                    ok = false;
                    break;
                }
                Some(_) => {}
                None => {
                    emb.vertices.insert(v.clone(), w.clone());
                    added.push(v.clone());
                }
            }
        }
        if ok {
            emb.edges.insert(e.id.clone(), f.id.clone());
            extend_edges(rest, isolated, host, emb, out);
            emb.edges.remove(&e.id);
        }
        for v in added {
            emb.vertices.remove(&v);
        }
    }
}

fn extend_vertices(isolated: &[&String], host: &Hypergraph, emb: &mut Embedding, out: &mut Vec<Embedding>) {
    let Some((v, rest)) = isolated.split_first() else {
        out.push(emb.clone());
        return;
    };
    for w in &host.vertices {
        emb.vertices.insert((*v).clone(), w.clone());
        extend_vertices(rest, host, emb, out);
    }
    emb.vertices.remove(*v);
}

fn fresh_label(base: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|k| format!("{base}_{k}"))
        .find(|c| !taken.contains(c))
        .expect("unbounded")
}

/// Replaces the image of the source with the target; target-only vertices
/// and hyperedges get fresh labels.
pub fn rewrite(host: &Hypergraph, rule: &RewriteRule, emb: &Embedding) -> Result<Hypergraph> {
    if !is_embedding(rule, host, emb) {
        return Err(Error::InvalidRule {
            rule: rule.name.clone(),
            reason: "not an embedding into the host".into(),
        });
    }
    let mut vmap = emb.vertices.clone();
    let mut vertices = host.vertices.clone();
    for v in rule.target.vertices.difference(&rule.source.vertices) {
        let w = fresh_label(v, &vertices);
        vertices.insert(w.clone());
        vmap.insert(v.clone(), w);
    }
    let mut edges: BTreeMap<String, Hyperedge> = host.edges.clone();
    for id in emb.edges.values() {
        edges.remove(id);
    }
    let mut ids: BTreeSet<String> = host.edges.keys().cloned().collect();
    for e in rule.target.edges.values() {
        let id = match emb.edges.get(&e.id) {
            Some(kept) => kept.clone(),
            None => {
                let id = fresh_label(&e.id, &ids);
                ids.insert(id.clone());
                id
            }
        };
        let vertices = e.vertices.iter().map(|v| vmap[v].clone()).collect();
        edges.insert(
            id.clone(),
            Hyperedge {
                id,
                tag: e.tag.clone(),
                vertices,
            },
        );
    }
    Hypergraph::new(vertices, edges.into_values())
}

/// Equal up to renaming vertices and hyperedge ids.
pub fn isomorphic(a: &Hypergraph, b: &Hypergraph) -> bool {
    if a.vertices.len() != b.vertices.len() || a.edges.len() != b.edges.len() {
        return false;
    }
    let tags = |g: &Hypergraph| {
        let mut t: Vec<(String, usize)> = g.edges.values().map(|e| (e.tag.clone(), e.vertices.len())).collect();
        t.sort();
        t
    };
    if tags(a) != tags(b) {
        return false;
    }
    let ea: Vec<&Hyperedge> = a.edges.values().collect();
    let eb: Vec<&Hyperedge> = b.edges.values().collect();
    let mut used = vec![false; eb.len()];
    iso_edges(&ea, &eb, &mut used, &mut BTreeMap::new(), &mut BTreeMap::new())
}

fn iso_edges(
    ea: &[&Hyperedge],
    eb: &[&Hyperedge],
    used: &mut [bool],
    fwd: &mut BTreeMap<String, String>,
    back: &mut BTreeMap<String, String>,
) -> bool {
    let Some((e, rest)) = ea.split_first() else {
        return true;
    };
    for k in 0..eb.len() {
        let f = eb[k];
        if used[k] || f.tag != e.tag || f.vertices.len() != e.vertices.len() {
            continue;
        }
        let mut added = Vec::new();
        let mut ok = true;
        for (v, w) in e.vertices.iter().zip(&f.vertices) {
            match (fwd.get(v), back.get(w)) {
                (Some(x), _) if x != w => ok = false,
                (None, Some(_)) => ok = false,
                (None, None) => {
                    fwd.insert(v.clone(), w.clone());
                    back.insert(w.clone(), v.clone());
                    added.push((v.clone(), w.clone()));
                }
                _ => {}
            }
            if !ok {
                break;
            }
        }
        if ok {
            used[k] = true;
            if iso_edges(rest, eb, used, fwd, back) {
                return true;
            }
            used[k] = false;
        }
        for (v, w) in added {
            fwd.remove(&v);
            back.remove(&w);
        }
    }
    false
}

/// Definitions implementing a rewriting system, plus what is needed to
/// encode hosts and read states back as hypergraphs.
#[derive(Clone, Debug)]
pub struct CompiledRules {
    pub rules: Vec<RewriteRule>,
    pub defs: Definitions,
    /// Reconfiguration constant of each source hyperedge, with its tag.
    roles: BTreeMap<String, String>,
    arities: BTreeMap<String, usize>,
}

/// Constant standing for hyperedges tagged `tag`.
pub fn agent_name(tag: &str) -> String {
    format!("A_{tag}")
}

fn role_name(edge: &str) -> String {
    format!("B_{edge}")
}

fn p_pred(edge: &str, h: usize) -> String {
    format!("p_{edge}_{h}")
}

fn var(l: impl AsRef<str>) -> Ident {
    Ident::var(l)
}

fn params(k: usize) -> Vec<Ident> {
    (1..=k).map(|h| var(format!("n{h}"))).collect()
}

/// Contract of source hyperedge `e`: it plays its role at every incident
/// vertex provided the hyperedges sharing that vertex play theirs.
fn role_contract(source: &Hypergraph, e: &Hyperedge, x: &Ident, ns: &[Ident]) -> Formula {
    let mut premise = BTreeSet::new();
    for (h, v) in e.vertices.iter().enumerate() {
        for other in source.edges.values() {
            for (hb, w) in other.vertices.iter().enumerate() {
                if w == v && !(other.id == e.id && hb == h) {
                    premise.insert(Formula::atom(p_pred(&other.id, hb + 1), vec![x.clone(), ns[h].clone()]));
                }
            }
        }
    }
    let conclusion = Formula::conj(
        (0..e.vertices.len()).map(|h| Formula::atom(p_pred(&e.id, h + 1), vec![x.clone(), ns[h].clone()])),
    );
    if premise.is_empty() {
        conclusion
    } else {
        Formula::cimp(Formula::conj(premise), conclusion)
    }
}

/// Reconfiguration after a handshake in session `s`: publish the incident
/// vertices, let the leader create the new vertices, collect the names of the
/// assigned target hyperedges and spawn them.
fn role_body(rule: &RewriteRule, e: &Hyperedge, s: &Ident, ns: &[Ident]) -> Process {
    let src = &rule.source;
    let leader = src.edges.keys().next() == Some(&e.id);
    let participants: Vec<&String> = src.edges.keys().collect();
    let me = participants.iter().position(|id| **id == e.id).expect("participant");
    let assigned: Vec<&Hyperedge> = rule
        .target
        .edges
        .values()
        .enumerate()
        .filter(|(j, _)| j % participants.len() == me)
        .map(|(_, f)| f)
        .collect();
    let new_vertices: Vec<&String> = rule.target.vertices.difference(&src.vertices).collect();

    let mut known: BTreeMap<&String, Ident> = BTreeMap::new();
    for (h, v) in e.vertices.iter().enumerate() {
        known.entry(v).or_insert_with(|| ns[h].clone());
    }
    let mut created = Vec::new();
    if leader {
        for (k, v) in new_vertices.iter().enumerate() {
            let c = Ident::name(format!("c{}", k + 1));
            known.insert(v, c.clone());
            created.push((*v, c));
        }
    }
    let needed: BTreeSet<&String> = assigned.iter().flat_map(|f| f.vertices.iter()).collect();
    let mut joins = Vec::new();
    let unknown: Vec<&String> = needed.into_iter().filter(|v| !known.contains_key(*v)).collect();
    for (k, v) in unknown.into_iter().enumerate() {
        let y = var(format!("y{}", k + 1));
        let goal = if src.vertices.contains(v) {
            let (owner, h) = src
                .edges
                .values()
                .find_map(|o| o.vertices.iter().position(|w| w == v).map(|h| (o, h)))
                .expect("source vertices are incident");
            Formula::atom(format!("vert_{}_{}", owner.id, h + 1), vec![s.clone(), y.clone()])
        } else {
            Formula::atom(format!("newvert_{v}"), vec![s.clone(), y.clone()])
        };
        known.insert(v, y.clone());
        joins.push((y, goal));
    }
    let spawn = Process::par_all(assigned.iter().map(|f| {
        Process::call(agent_name(&f.tag), f.vertices.iter().map(|v| known[v].clone()).collect())
    }));
    let mut body = joins.into_iter().rev().fold(spawn, |acc, (y, goal)| {
        Process::delim(y.clone(), Process::prefixed(Prefix::Join(y, goal), acc))
    });
    if !created.is_empty() {
        let announce = Formula::conj(
            created
                .iter()
                .map(|(v, c)| Formula::atom(format!("newvert_{v}"), vec![s.clone(), c.clone()])),
        );
        body = Process::delim_all(
            created.iter().map(|(_, c)| c.clone()),
            Process::prefixed(Prefix::Tell(announce), body),
        );
    }
    let publish = Formula::conj(e.vertices.iter().enumerate().map(|(h, _)| {
        Formula::atom(format!("vert_{}_{}", e.id, h + 1), vec![s.clone(), ns[h].clone()])
    }));
    Process::prefixed(Prefix::Tell(publish), body)
}

pub fn compile_rules(rules: &[RewriteRule]) -> Result<CompiledRules> {
    let mut ids = BTreeSet::new();
    let mut arities: BTreeMap<String, usize> = BTreeMap::new();
    for r in rules {
        for id in r.source.edges.keys() {
            if !ids.insert(id.clone()) {
                return Err(Error::InvalidRule {
                    rule: r.name.clone(),
                    reason: format!("source edge id `{id}` is used by another rule"),
                });
            }
        }
        for g in [&r.source, &r.target] {
            for (tag, k) in g.tag_arities()? {
                let j = *arities.entry(tag.clone()).or_insert(k);
                if j != k {
                    return Err(Error::ArityMismatch {
                        constant: tag,
                        expected: j,
                        found: k,
                    });
                }
            }
        }
    }
    let mut by_tag: BTreeMap<&String, Vec<(&RewriteRule, &Hyperedge)>> = BTreeMap::new();
    for r in rules {
        for e in r.source.edges.values() {
            by_tag.entry(&e.tag).or_default().push((r, e));
        }
    }
    let mut defs = Definitions::new();
    let mut roles = BTreeMap::new();
    for (tag, plays) in &by_tag {
        let ns = params(arities[*tag]);
        let x = var("x");
        let contracts: Vec<Formula> = plays
            .iter()
            .map(|(r, e)| role_contract(&r.source, e, &x, &ns))
            .collect();
        let branches = plays
            .iter()
            .map(|(_, e)| {
                let demand = Formula::conj(
                    (0..ns.len()).map(|h| Formula::atom(p_pred(&e.id, h + 1), vec![x.clone(), ns[h].clone()])),
                );
                let args = std::iter::once(x.clone()).chain(ns.iter().cloned()).collect();
                (Prefix::Fuse(x.clone(), demand), Process::call(role_name(&e.id), args))
            })
            .collect();
        let body = Process::delim(
            x.clone(),
            Process::par(oplus_with(&contracts, &format!("r_{tag}")), Process::Sum(branches)),
        );
        defs.insert(Definition {
            name: agent_name(tag),
            params: ns.clone(),
            body,
        });
        for (r, e) in plays {
            let s = var("s");
            roles.insert(role_name(&e.id), (*tag).clone());
            defs.insert(Definition {
                name: role_name(&e.id),
                params: std::iter::once(s.clone()).chain(ns.iter().cloned()).collect(),
                body: role_body(r, e, &s, &ns),
            });
        }
    }
    Ok(CompiledRules {
        rules: rules.to_vec(),
        defs,
        roles,
        arities,
    })
}

impl CompiledRules {
    /// One delimited name per vertex and one agent per hyperedge.
    pub fn encode_host(&self, host: &Hypergraph) -> Result<Process> {
        for (tag, k) in host.tag_arities()? {
            if let Some(&j) = self.arities.get(&tag) {
                if j != k {
                    return Err(Error::ArityMismatch {
                        constant: tag,
                        expected: j,
                        found: k,
                    });
                }
            }
        }
        let agents = host.edges.values().map(|e| {
            Process::call(agent_name(&e.tag), e.vertices.iter().map(Ident::name).collect())
        });
        Ok(Process::delim_all(
            host.vertices.iter().map(Ident::name),
            Process::par_all(agents),
        ))
    }

    /// The hypergraph represented by a state, if every agent is an idle
    /// hyperedge.
    pub fn readback(&self, nf: &NormalForm) -> Option<Hypergraph> {
        let mut edges = Vec::new();
        for agent in &nf.agents {
            let (tag, args) = match agent {
                Agent::Call(name, args) => {
                    let tag = name.strip_prefix("A_")?;
                    (tag.to_string(), args.clone())
                }
                Agent::Sum(branches) => {
                    let (_, cont) = branches.first()?;
                    let Process::Call(role, args) = cont else { return None };
                    let tag = self.roles.get(role)?;
                    let all_roles = branches.iter().all(|(pre, c)| {
                        matches!(pre, Prefix::Fuse(..) | Prefix::Ask(_))
                            && matches!(c, Process::Call(r, _) if self.roles.contains_key(r))
                    });
                    if !all_roles {
                        return None;
                    }
                    (tag.clone(), args[1..].to_vec())
                }
            };
            edges.push((tag, args));
        }
        let vertices: BTreeSet<String> = edges
            .iter()
            .flat_map(|(_, args)| args.iter().map(|a| a.label().to_string()))
            .collect();
        let edges = edges.into_iter().enumerate().map(|(k, (tag, args))| Hyperedge {
            id: format!("e{}", k + 1),
            tag,
            vertices: args.iter().map(|a| a.label().to_string()).collect(),
        });
        Hypergraph::new(vertices, edges).ok()
    }
}

/// The ring-to-star rule over `k` hyperedges: a cycle `A1 .. Ak` becomes a
/// star `B1 .. Bk` around a new center.
pub fn ring_to_star_rule(k: usize) -> RewriteRule {
    assert!(k >= 2);
    let vs: Vec<String> = (1..=k).map(|i| format!("v{i}")).collect();
    let source = Hypergraph::new(
        vs.clone(),
        (0..k).map(|i| Hyperedge {
            id: format!("e{}", i + 1),
            tag: format!("A{}", i + 1),
            vertices: vec![vs[i].clone(), vs[(i + 1) % k].clone()],
        }),
    )
    .expect("well formed");
    let target = Hypergraph::new(
        vs.iter().cloned().chain(["m".to_string()]),
        (0..k).map(|i| Hyperedge {
            id: format!("f{}", i + 1),
            tag: format!("B{}", i + 1),
            vertices: vec![vs[i].clone(), "m".to_string()],
        }),
    )
    .expect("well formed");
    RewriteRule::new("ring_to_star", source, target).expect("valid rule")
}

/// A loop of `len` hyperedges tagged `A1 .. Ak` cyclically.
pub fn ring_host(k: usize, len: usize) -> Hypergraph {
    let vs: Vec<String> = (1..=len).map(|i| format!("n{i}")).collect();
    Hypergraph::new(
        vs.clone(),
        (0..len).map(|i| Hyperedge {
            id: format!("h{}", i + 1),
            tag: format!("A{}", i % k + 1),
            vertices: vec![vs[i].clone(), vs[(i + 1) % len].clone()],
        }),
    )
    .expect("well formed")
}

/// The direct ring encoding: `A_i(n, m)` promises its two roles provided its
/// neighbours promise theirs, then fuses and becomes `B_i(x)`.
pub fn ring_definitions(k: usize) -> Definitions {
    let mut defs = Definitions::new();
    let (n, m, x) = (var("n"), var("m"), var("x"));
    let f = |i: usize, a: &Ident| Formula::atom(format!("f{}", i + 1), vec![x.clone(), a.clone()]);
    let s = |i: usize, a: &Ident| Formula::atom(format!("s{}", i + 1), vec![x.clone(), a.clone()]);
    for i in 0..k {
        let next = (i + 1) % k;
        let prev = (i + k - 1) % k;
        let promise = Formula::and(f(i, &n), s(i, &m));
        let contract = Formula::cimp(Formula::and(f(next, &m), s(prev, &n)), promise.clone());
        let body = Process::delim(
            x.clone(),
            Process::prefixed(
                Prefix::Tell(contract),
                Process::prefixed(
                    Prefix::Fuse(x.clone(), promise),
                    Process::call(format!("B{}", i + 1), vec![x.clone()]),
                ),
            ),
        );
        defs.insert(Definition {
            name: format!("A{}", i + 1),
            params: vec![n.clone(), m.clone()],
            body,
        });
    }
    defs
}

/// `A_{i mod k}(n_i, n_{i+1})` around a loop of `len` names.
pub fn ring_system(k: usize, len: usize) -> Process {
    let ns: Vec<Ident> = (1..=len).map(|i| Ident::name(format!("n{i}"))).collect();
    Process::par_all((0..len).map(|i| {
        Process::call(format!("A{}", i % k + 1), vec![ns[i].clone(), ns[(i + 1) % len].clone()])
    }))
}

struct Lexer {
    toks: Vec<(String, Pos)>,
    at: usize,
}

impl Lexer {
    fn new(src: &str) -> Self {
        let mut toks = Vec::new();
        for (ln, line) in src.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            let mut chars = line.char_indices().peekable();
            while let Some((i, c)) = chars.next() {
                let pos = Pos {
                    line: ln + 1,
                    col: i + 1,
                };
                if c.is_whitespace() {
                    continue;
                }
                if c.is_alphanumeric() || c == '_' {
                    let mut word = c.to_string();
                    while let Some(&(_, d)) = chars.peek() {
                        if d.is_alphanumeric() || d == '_' {
                            word.push(d);
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    toks.push((word, pos));
                } else {
                    toks.push((c.to_string(), pos));
                }
            }
        }
        Lexer { toks, at: 0 }
    }

    fn peek(&self) -> Option<&str> {
        self.toks.get(self.at).map(|(t, _)| t.as_str())
    }

    fn pos(&self) -> Pos {
        self.toks
            .get(self.at)
            .or(self.toks.last())
            .map(|(_, p)| *p)
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    fn next(&mut self) -> Option<(String, Pos)> {
        let t = self.toks.get(self.at).cloned();
        self.at += 1;
        t
    }

    fn expect(&mut self, want: &str) -> Result<()> {
        let pos = self.pos();
        match self.next() {
            Some((t, _)) if t == want => Ok(()),
            Some((t, _)) => Err(ParseError::new(pos, format!("expected `{want}`, found `{t}`")).into()),
            None => Err(ParseError::new(pos, format!("expected `{want}`, found end of input")).into()),
        }
    }

    fn word(&mut self) -> Result<String> {
        let pos = self.pos();
        match self.next() {
            Some((t, _)) if t.chars().all(|c| c.is_alphanumeric() || c == '_') => Ok(t),
            Some((t, _)) => Err(ParseError::new(pos, format!("expected a label, found `{t}`")).into()),
            None => Err(ParseError::new(pos, "expected a label, found end of input").into()),
        }
    }

    fn graph(&mut self) -> Result<Hypergraph> {
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        while let Some(t) = self.peek() {
            match t {
                "vertex" => {
                    self.next();
                    while self.peek() != Some(";") {
                        vertices.push(self.word()?);
                    }
                    self.expect(";")?;
                }
                "edge" => {
                    self.next();
                    let id = self.word()?;
                    let tag = self.word()?;
                    self.expect("(")?;
                    let mut vs = Vec::new();
                    while self.peek() != Some(")") {
                        vs.push(self.word()?);
                        if self.peek() == Some(",") {
                            self.next();
                        }
                    }
                    self.expect(")")?;
                    self.expect(";")?;
                    edges.push(Hyperedge {
                        id,
                        tag,
                        vertices: vs,
                    });
                }
                _ => break,
            }
        }
        Hypergraph::new(vertices, edges)
    }

    fn rule(&mut self) -> Result<RewriteRule> {
        self.expect("rule")?;
        let name = self.word()?;
        self.expect("{")?;
        self.expect("source")?;
        self.expect("{")?;
        let source = self.graph()?;
        self.expect("}")?;
        self.expect("target")?;
        self.expect("{")?;
        let target = self.graph()?;
        self.expect("}")?;
        self.expect("}")?;
        RewriteRule::new(name, source, target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::to_normal_form;
    use crate::reduction::{explore, Bounds};

    /// Exhaustive embedding search straight from the definition.
    fn brute_force(rule: &RewriteRule, host: &Hypergraph) -> Vec<Embedding> {
        let sv: Vec<&String> = rule.source.vertices.iter().collect();
        let se: Vec<&String> = rule.source.edges.keys().collect();
        let hv: Vec<&String> = host.vertices.iter().collect();
        let he: Vec<&String> = host.edges.keys().collect();
        let mut out = Vec::new();
        let nv = hv.len().pow(sv.len() as u32);
        let ne = he.len().pow(se.len() as u32);
        for a in 0..nv {
            let mut vertices = BTreeMap::new();
            let mut k = a;
            for v in &sv {
                vertices.insert((*v).clone(), hv[k % hv.len()].clone());
                k /= hv.len();
            }
            for b in 0..ne {
                let mut edges = BTreeMap::new();
                let mut k = b;
                for e in &se {
                    edges.insert((*e).clone(), he[k % he.len()].clone());
                    k /= he.len();
                }
                let emb = Embedding {
                    vertices: vertices.clone(),
                    edges,
                };
                if is_embedding(rule, host, &emb) {
                    out.push(emb);
                }
            }
        }
        out.sort();
        out
    }

    fn sorted(mut v: Vec<Embedding>) -> Vec<Embedding> {
        v.sort();
        v
    }

    #[test]
    fn text_formats_roundtrip() {
        let g = Hypergraph::parse("vertex a b c; edge e1 T (a, b); edge e2 T (b c);").unwrap();
        assert_eq!(g.edges().count(), 2);
        assert_eq!(Hypergraph::parse(&g.to_string()).unwrap(), g);
        assert!(matches!(
            Hypergraph::parse("vertex a; edge e T (a, b);"),
            Err(Error::InvalidHypergraph(_))
        ));
        assert!(matches!(
            Hypergraph::parse("vertex a b; edge e T (a); edge f T (a, b);"),
            Err(Error::ArityMismatch { .. })
        ));
        let rules = RewriteRule::parse_all(
            "rule grow { source { vertex a; edge e U (a); } target { vertex a b; edge e U (a); edge f V (a, b); } }",
        )
        .unwrap();
        assert_eq!(rules.len(), 1);
        assert!(matches!(
            RewriteRule::parse_all("rule d { source { vertex a b; edge e U (a); edge f U (b); } target { vertex a b; } }"),
            Err(Error::DisconnectedSource { .. })
        ));
        assert!(matches!(
            RewriteRule::parse_all("rule d { source { vertex a; edge e U (a); } target { vertex b; } }"),
            Err(Error::InvalidRule { .. })
        ));
    }

    #[test]
    fn embeddings_agree_with_brute_force() {
        let rule = ring_to_star_rule(4);
        for host in [ring_host(4, 4), ring_host(2, 4), ring_host(4, 5)] {
            assert_eq!(sorted(embed(&rule, &host)), brute_force(&rule, &host), "{host}");
        }
        assert_eq!(embed(&rule, &ring_host(4, 4)).len(), 1);
        assert!(embed(&rule, &ring_host(4, 8)).is_empty());
        let pair = RewriteRule::parse_all(
            "rule r { source { vertex a b; edge e T (a, b); } target { vertex a b; } }",
        )
        .unwrap()
        .remove(0);
        let host = Hypergraph::parse("vertex x y z; edge h1 T (x, y); edge h2 T (y, z); edge h3 T (z, z); edge h4 S (x, x);").unwrap();
        assert_eq!(sorted(embed(&pair, &host)), brute_force(&pair, &host));
        assert_eq!(embed(&pair, &host).len(), 3);
        let absent = Hypergraph::parse("vertex x; edge h S (x, x);").unwrap();
        assert!(embed(&pair, &absent).is_empty());
    }

    #[test]
    fn ring_becomes_star() {
        let rule = ring_to_star_rule(4);
        let host = ring_host(4, 4);
        let emb = embed(&rule, &host).remove(0);
        let star = rewrite(&host, &rule, &emb).unwrap();
        assert_eq!(star.vertices().len(), 5);
        let tags: BTreeSet<&str> = star.edges().map(|e| e.tag.as_str()).collect();
        assert_eq!(tags, BTreeSet::from(["B1", "B2", "B3", "B4"]));
        let center = star.vertices().difference(host.vertices()).next().unwrap().clone();
        assert!(star.edges().all(|e| e.vertices[1] == center));
        let expected = Hypergraph::parse(
            "vertex a b c d m; edge x B1 (a, m); edge y B2 (b, m); edge z B3 (c, m); edge w B4 (d, m);",
        )
        .unwrap();
        assert!(isomorphic(&star, &expected));
        assert!(!isomorphic(&star, &host));
    }

    #[test]
    fn identity_and_disjoint_components() {
        let id = RewriteRule::parse_all(
            "rule id { source { vertex a b; edge e T (a, b); } target { vertex a b; edge e T (a, b); } }",
        )
        .unwrap()
        .remove(0);
        let host = Hypergraph::parse("vertex x y u v; edge h1 T (x, y); edge h2 S (u, v);").unwrap();
        let emb = embed(&id, &host).remove(0);
        assert_eq!(rewrite(&host, &id, &emb).unwrap(), host);
        let rule = ring_to_star_rule(4);
        let two = Hypergraph::parse(&format!("{} vertex u v; edge h9 S (u, v);", ring_host(4, 4))).unwrap();
        let emb = embed(&rule, &two).remove(0);
        let out = rewrite(&two, &rule, &emb).unwrap();
        assert_eq!(out.edge("h9"), two.edge("h9"));
    }

    #[test]
    fn compiled_ring_rewrites_to_star() {
        let rule = ring_to_star_rule(4);
        let compiled = compile_rules(std::slice::from_ref(&rule)).unwrap();
        let host = ring_host(4, 4);
        let p = compiled.encode_host(&host).unwrap();
        let root = to_normal_form(&p, &compiled.defs);
        assert!(isomorphic(&compiled.readback(&root).unwrap(), &host));
        let g = explore(&p, &compiled.defs, Bounds::new(20_000, 100));
        assert!(!g.truncated);
        let star = rewrite(&host, &rule, &embed(&rule, &host)[0]).unwrap();
        let finals = g.final_states();
        assert!(!finals.is_empty());
        for k in finals {
            let got = compiled.readback(&g.states[k]).expect("idle state");
            assert!(isomorphic(&got, &star), "{got}");
        }
    }

    #[test]
    fn rules_must_not_share_edge_ids() {
        let r = ring_to_star_rule(4);
        assert!(matches!(compile_rules(&[r.clone(), r]), Err(Error::InvalidRule { .. })));
    }

    #[test]
    fn oplus_keeps_competing_rules_coherent() {
        let rules = RewriteRule::parse_all(
            "rule g { source { vertex v; edge e1 T1 (v); edge e2 T2 (v); }
                      target { vertex v; edge h1 U1 (v); edge h2 U2 (v); } }
             rule gb { source { vertex v; edge d1 T1 (v); edge d2 T2 (v); }
                       target { vertex v; edge k1 W1 (v); edge k2 W2 (v); } }",
        )
        .unwrap();
        let compiled = compile_rules(&rules).unwrap();
        let host = Hypergraph::parse("vertex n; edge a T1 (n); edge b T2 (n);").unwrap();
        let p = compiled.encode_host(&host).unwrap();
        let g = explore(&p, &compiled.defs, Bounds::default());
        assert!(!g.truncated);
        let outcomes: Vec<Hypergraph> = rules
            .iter()
            .map(|r| rewrite(&host, r, &embed(r, &host)[0]).unwrap())
            .collect();
        let finals = g.final_states();
        assert!(!finals.is_empty());
        for k in finals {
            let got = compiled.readback(&g.states[k]).expect("idle state");
            assert!(outcomes.iter().any(|o| isomorphic(o, &got)), "mixed rewrite {got}");
        }
    }

    #[test]
    fn direct_ring_and_the_loop_of_eight() {
        let defs = ring_definitions(4);
        let g = explore(&ring_system(4, 4), &defs, Bounds::default());
        let star = g.states.iter().find(|s| {
            s.agents.len() == 4
                && s.binders.len() == 1
                && s.agents.iter().all(|a| matches!(a, Agent::Call(_, args) if args == &s.binders))
        });
        assert!(star.is_some());
        let g8 = explore(&ring_system(4, 8), &defs, Bounds::default());
        assert!(g8.states.iter().any(|s| s.has_agent("B1")));
    }
}
