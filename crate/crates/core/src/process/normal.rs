//! Structural normal forms `(a1..ak)(C | S1 | .. | Sm)` with alpha-canonical
//! binder labels and a canonical text serialization used as state identity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::ast::{Definitions, Prefix, Process};
use crate::logic::{Formula, FreshSupply, Ident, IdentKind, Subst};

/// A top-level agent: a guarded sum, or a call to an undefined constant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Agent {
    Sum(Vec<(Prefix, Process)>),
    Call(String, Vec<Ident>),
}

impl Agent {
    pub fn to_process(&self) -> Process {
        match self {
            Agent::Sum(b) => Process::Sum(b.clone()),
            Agent::Call(x, args) => Process::Call(x.clone(), args.clone()),
        }
    }

    pub fn branches(&self) -> &[(Prefix, Process)] {
        match self {
            Agent::Sum(b) => b,
            Agent::Call(..) => &[],
        }
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_process())
    }
}

/// Normal form with canonical labels; equality and hashing use the canonical text.
#[derive(Clone, Debug)]
pub struct NormalForm {
    pub binders: Vec<Ident>,
    pub store: Vec<Formula>,
    pub agents: Vec<Agent>,
    text: String,
}

impl NormalForm {
    /// Canonical text; re-parses to a process with the same normal form.
    pub fn key(&self) -> &str {
        &self.text
    }

    pub fn to_process(&self) -> Process {
        assemble(&self.binders, &self.store, &self.agents)
    }

    pub fn free_identifiers(&self) -> BTreeSet<Ident> {
        self.to_process().free_identifiers()
    }

    pub fn is_terminated(&self) -> bool {
        self.agents.is_empty()
    }

    /// Top-level agents that are calls, by constant name.
    pub fn has_agent(&self, constant: &str) -> bool {
        self.agents
            .iter()
            .any(|a| matches!(a, Agent::Call(x, _) if x == constant))
    }
}

impl PartialEq for NormalForm {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl Eq for NormalForm {}

impl std::hash::Hash for NormalForm {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.text.hash(state)
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn assemble(binders: &[Ident], store: &[Formula], agents: &[Agent]) -> Process {
    let items = store
        .iter()
        .cloned()
        .map(Process::Constraint)
        .chain(agents.iter().map(Agent::to_process));
    Process::delim_all(binders.iter().cloned(), Process::par_all(items))
}

/// Normal form of `p`: flattens `|` and delimitations, drops `0`, unfolds
/// top-level calls of defined constants, discards unused binders and
/// relabels canonically.
pub fn to_normal_form(p: &Process, defs: &Definitions) -> NormalForm {
    let mut supply = p.fresh_supply();
    let mut labels = BTreeSet::new();
    defs.all_labels(&mut labels);
    for l in &labels {
        supply.reserve(l.clone());
    }
    let level = level_of(p, Some(defs), &mut supply);
    // Canonical labels avoid free labels and every label the definitions use.
    labels.extend(level.free_identifiers().iter().map(|i| i.label().to_string()));
    canon_level(&level, &Subst::new(), &Labels::new(&labels))
}

/// Structural equivalence on the unfolding-free fragment.
pub fn struct_equiv(p: &Process, q: &Process, defs: &Definitions) -> bool {
    to_normal_form(p, defs) == to_normal_form(q, defs)
}

// ---------------------------------------------------------------------------
// Flattened trees: every sum continuation is itself a level.

#[derive(Clone, Debug)]
struct Level {
    binders: Vec<Ident>,
    store: Vec<Formula>,
    agents: Vec<LAgent>,
}

#[derive(Clone, Debug)]
enum LAgent {
    Sum(Vec<(Prefix, Level)>),
    Call(String, Vec<Ident>),
}

enum Item<'a> {
    Store(&'a Formula),
    Agent(&'a LAgent),
}

impl Level {
    fn items(&self) -> impl Iterator<Item = Item<'_>> {
        self.store
            .iter()
            .map(Item::Store)
            .chain(self.agents.iter().map(Item::Agent))
    }

    /// Every identifier occurrence, bound or free.
    fn identifiers(&self, out: &mut BTreeSet<Ident>) {
        out.extend(self.binders.iter().cloned());
        for item in self.items() {
            item.identifiers(out);
        }
    }

    fn free_identifiers(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        for item in self.items() {
            match item {
                Item::Store(f) => out.extend(f.identifiers()),
                Item::Agent(LAgent::Call(_, args)) => out.extend(args.iter().cloned()),
                Item::Agent(LAgent::Sum(bs)) => {
                    for (pre, l) in bs {
                        out.extend(pre.identifiers());
                        out.extend(l.free_identifiers());
                    }
                }
            }
        }
        for b in &self.binders {
            out.remove(b);
        }
        out
    }
}

impl Item<'_> {
    fn identifiers(&self, out: &mut BTreeSet<Ident>) {
        match self {
            Item::Store(f) => out.extend(f.identifiers()),
            Item::Agent(LAgent::Call(_, args)) => out.extend(args.iter().cloned()),
            Item::Agent(LAgent::Sum(bs)) => {
                for (pre, l) in bs {
                    out.extend(pre.identifiers());
                    l.identifiers(out);
                }
            }
        }
    }
}

struct Flat {
    binders: Vec<Ident>,
    store: Vec<Formula>,
    agents: Vec<Process>,
}

fn flatten(p: &Process, defs: Option<&Definitions>, supply: &mut FreshSupply, out: &mut Flat) {
    match p {
        Process::Constraint(f) => out.store.push(f.clone()),
        Process::Sum(b) if b.is_empty() => {}
        Process::Sum(_) => out.agents.push(p.clone()),
        Process::Par(l, r) => {
            flatten(l, defs, supply, out);
            flatten(r, defs, supply, out);
        }
        Process::Delim(a, body) => {
            let fresh = supply.freshen(a);
            let s: Subst = [(a.clone(), fresh.clone())].into_iter().collect();
            let body = body.subst_with(&s, supply);
            out.binders.push(fresh);
            flatten(&body, defs, supply, out);
        }
        Process::Call(x, args) => match defs.and_then(|d| d.get(x)) {
            Some(def) => {
                let body = def.instantiate(args, supply);
                flatten(&body, defs, supply, out);
            }
            None => out.agents.push(p.clone()),
        },
    }
}

fn level_of(p: &Process, defs: Option<&Definitions>, supply: &mut FreshSupply) -> Level {
    let mut flat = Flat {
        binders: Vec::new(),
        store: Vec::new(),
        agents: Vec::new(),
    };
    flatten(p, defs, supply, &mut flat);
    let mut used = BTreeSet::new();
    for f in &flat.store {
        used.extend(f.identifiers());
    }
    for a in &flat.agents {
        used.extend(a.free_identifiers());
    }
    let binders = flat.binders.into_iter().filter(|b| used.contains(b)).collect();
    let agents = flat
        .agents
        .into_iter()
        .map(|a| match a {
            Process::Sum(bs) => LAgent::Sum(
                bs.into_iter()
                    .map(|(pre, cont)| {
                        let l = level_of(&cont, None, supply);
                        (pre, l)
                    })
                    .collect(),
            ),
            Process::Call(x, args) => LAgent::Call(x, args),
            _ => unreachable!("flatten yields sums and calls"),
        })
        .collect();
    Level {
        binders,
        store: flat.store,
        agents,
    }
}

// ---------------------------------------------------------------------------
// Canonical labelling.

#[derive(Clone)]
struct Labels<'a> {
    vars: usize,
    names: usize,
    reserved: &'a BTreeSet<String>,
}

impl<'a> Labels<'a> {
    fn new(reserved: &'a BTreeSet<String>) -> Self {
        Labels {
            vars: 0,
            names: 0,
            reserved,
        }
    }

    fn next(&mut self, kind: IdentKind) -> Ident {
        let (counter, prefix) = match kind {
            IdentKind::Variable => (&mut self.vars, "x"),
            IdentKind::Name => (&mut self.names, "n"),
        };
        loop {
            *counter += 1;
            let label = format!("{prefix}{counter}");
            if !self.reserved.contains(&label) {
                return Ident::new(kind, label);
            }
        }
    }
}

enum Out {
    Store(Formula),
    Agent(Agent),
}

/// Candidate orderings explored per level before falling back to the sorted order.
const ORDER_BUDGET: usize = 720;
/// Labelled candidates explored per level.
const CANDIDATE_BUDGET: usize = 5040;

fn render_item(item: &Item, env: &Subst, labels: &Labels) -> (String, Out) {
    match item {
        Item::Store(f) => {
            let g = f.subst(env);
            (format!("{{{g}}}"), Out::Store(g))
        }
        Item::Agent(LAgent::Call(x, args)) => {
            let args: Vec<Ident> = args
                .iter()
                .map(|a| env.get(a).cloned().unwrap_or_else(|| a.clone()))
                .collect();
            let a = Agent::Call(x.clone(), args);
            (a.to_string(), Out::Agent(a))
        }
        Item::Agent(LAgent::Sum(bs)) => {
            let mut branches: Vec<(String, (Prefix, Process))> = bs
                .iter()
                .map(|(pre, lv)| {
                    let pre = pre.subst(env);
                    let cont = canon_level(lv, env, labels).to_process();
                    let branch = (pre, cont);
                    (Process::Sum(vec![branch.clone()]).to_string(), branch)
                })
                .collect();
            branches.sort_by(|a, b| a.0.cmp(&b.0));
            let a = Agent::Sum(branches.into_iter().map(|(_, b)| b).collect());
            (a.to_string(), Out::Agent(a))
        }
    }
}

fn finish(binders: Vec<Ident>, mut rendered: Vec<(String, Out)>) -> NormalForm {
    rendered.sort_by(|a, b| a.0.cmp(&b.0));
    let mut store = Vec::new();
    let mut agents = Vec::new();
    for (_, o) in rendered {
        match o {
            Out::Store(f) => store.push(f),
            Out::Agent(a) => agents.push(a),
        }
    }
    let text = assemble(&binders, &store, &agents).to_string();
    NormalForm {
        binders,
        store,
        agents,
        text,
    }
}

fn canon_level(level: &Level, env: &Subst, labels: &Labels) -> NormalForm {
    let items: Vec<Item> = level.items().collect();
    if level.binders.is_empty() {
        let rendered = items.iter().map(|i| render_item(i, env, labels)).collect();
        return finish(Vec::new(), rendered);
    }

    let mut inner = labels.clone();
    let mut var_pool = Vec::new();
    let mut name_pool = Vec::new();
    for b in &level.binders {
        match b.kind() {
            IdentKind::Variable => var_pool.push(inner.next(IdentKind::Variable)),
            IdentKind::Name => name_pool.push(inner.next(IdentKind::Name)),
        }
    }

    let occurs: Vec<Vec<Ident>> = items
        .iter()
        .map(|i| {
            let mut ids = BTreeSet::new();
            i.identifiers(&mut ids);
            level
                .binders
                .iter()
                .filter(|b| ids.contains(b))
                .cloned()
                .collect()
        })
        .collect();

    // Shape keys with every binder of this level replaced by its colour.
    let colour = refine_colours(&items, &occurs, &level.binders, env, &inner);
    let mut ph_env = env.clone();
    for b in &level.binders {
        ph_env.insert(b.clone(), b.relabel(format!("_{}", colour[b])));
    }
    let keys: Vec<String> = items
        .iter()
        .map(|i| render_item(i, &ph_env, &inner).0)
        .collect();

    // Items without binders of this level render the same under every labelling.
    let fixed: Vec<(String, Out)> = (0..items.len())
        .filter(|&i| occurs[i].is_empty())
        .map(|i| render_item(&items[i], env, &inner))
        .collect();
    let mut sorted: Vec<usize> = (0..items.len()).filter(|&i| !occurs[i].is_empty()).collect();
    sorted.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &sorted {
        match groups.last_mut() {
            Some(g) if keys[g[0]] == keys[i] => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let orders = group_orders(&groups);

    let mut search = Search {
        items: &items,
        occurs: &occurs,
        var_pool: &var_pool,
        name_pool: &name_pool,
        inner: &inner,
        binders: var_pool.iter().chain(&name_pool).cloned().collect(),
        fixed: &fixed,
        colour: &colour,
        best: None,
        visited: 0,
    };
    for order in orders {
        search.run(&order, 0, env.clone(), 0, 0, Vec::new());
        if search.visited >= CANDIDATE_BUDGET {
            break;
        }
    }
    search.best.expect("at least one candidate")
}

/// Iterated colour refinement of the binders of a level: a binder's colour is
/// refined by the shapes of the items it occurs in, seen from the binder.
/// Colours are ranks of invariant signatures, so they survive renaming.
fn refine_colours(
    items: &[Item],
    occurs: &[Vec<Ident>],
    binders: &[Ident],
    env: &Subst,
    labels: &Labels,
) -> BTreeMap<Ident, usize> {
    let mut colour: BTreeMap<Ident, usize> = binders.iter().map(|b| (b.clone(), usize::from(b.is_name()))).collect();
    let mut count = colour.values().collect::<BTreeSet<_>>().len();
    loop {
        let mut base = env.clone();
        for c in binders {
            base.insert(c.clone(), c.relabel(format!("_{}", colour[c])));
        }
        let sigs: Vec<(usize, Vec<String>)> = binders
            .iter()
            .map(|b| {
                let mut env2 = base.clone();
                env2.insert(b.clone(), b.relabel("_self"));
                let mut shapes: Vec<String> = (0..items.len())
                    .filter(|&i| occurs[i].contains(b))
                    .map(|i| render_item(&items[i], &env2, labels).0)
                    .collect();
                shapes.sort();
                (colour[b], shapes)
            })
            .collect();
        let mut distinct: Vec<&(usize, Vec<String>)> = sigs.iter().collect();
        distinct.sort();
        distinct.dedup();
        if distinct.len() == count {
            return colour;
        }
        count = distinct.len();
        colour = binders
            .iter()
            .zip(&sigs)
            .map(|(b, sig)| (b.clone(), distinct.binary_search(&sig).expect("present")))
            .collect();
    }
}

/// Orders of `fresh` (sorted by colour) permuting only within equal colours.
fn colour_block_orders(fresh: &[Ident], colour: &BTreeMap<Ident, usize>) -> Vec<Vec<Ident>> {
    let mut orders = vec![Vec::new()];
    let mut start = 0;
    while start < fresh.len() {
        let mut end = start + 1;
        while end < fresh.len() && colour[&fresh[end]] == colour[&fresh[start]] {
            end += 1;
        }
        let block = &fresh[start..end];
        let perms = if orders.len() * factorial(block.len()) <= 24 {
            permutations(block)
        } else {
            vec![block.to_vec()]
        };
        orders = orders
            .iter()
            .flat_map(|o| {
                perms.iter().map(move |p| {
                    let mut o2 = o.clone();
                    o2.extend(p.iter().cloned());
                    o2
                })
            })
            .collect();
        start = end;
    }
    orders
}

fn group_orders(groups: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut total: usize = 1;
    for g in groups {
        total = total.saturating_mul(factorial(g.len()));
    }
    let identity: Vec<usize> = groups.iter().flatten().copied().collect();
    if total > ORDER_BUDGET {
        return vec![identity];
    }
    let mut orders = vec![Vec::new()];
    for g in groups {
        let perms = permutations(g);
        let mut next = Vec::with_capacity(orders.len() * perms.len());
        for o in &orders {
            for p in &perms {
                let mut o2: Vec<usize> = o.clone();
                o2.extend(p);
                next.push(o2);
            }
        }
        orders = next;
    }
    orders
}

fn factorial(n: usize) -> usize {
    (1..=n).fold(1usize, |acc, k| acc.saturating_mul(k))
}

/// All permutations, in lexicographic order of positions.
pub(crate) fn permutations<T: Clone>(xs: &[T]) -> Vec<Vec<T>> {
    if xs.len() <= 1 {
        return vec![xs.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..xs.len() {
        let mut rest = xs.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

struct Search<'s, 'l> {
    items: &'s [Item<'s>],
    occurs: &'s [Vec<Ident>],
    var_pool: &'s [Ident],
    name_pool: &'s [Ident],
    inner: &'s Labels<'l>,
    binders: Vec<Ident>,
    fixed: &'s [(String, Out)],
    colour: &'s BTreeMap<Ident, usize>,
    best: Option<NormalForm>,
    visited: usize,
}

impl Search<'_, '_> {
    fn run(
        &mut self,
        order: &[usize],
        pos: usize,
        env: Subst,
        nv: usize,
        nn: usize,
        rendered: Vec<(String, Out)>,
    ) {
        if self.visited >= CANDIDATE_BUDGET && self.best.is_some() {
            return;
        }
        if pos == order.len() {
            self.visited += 1;
            let mut rendered = rendered;
            rendered.extend(self.fixed.iter().map(|(s, o)| (s.clone(), o.clone_out())));
            let nf = finish(self.binders.clone(), rendered);
            if self.best.as_ref().is_none_or(|b| nf.text < b.text) {
                self.best = Some(nf);
            }
            return;
        }
        let i = order[pos];
        let mut fresh: Vec<Ident> = self.occurs[i]
            .iter()
            .filter(|b| !env.contains_key(*b))
            .cloned()
            .collect();
        fresh.sort_by_key(|b| self.colour[b]);
        let perms = colour_block_orders(&fresh, self.colour);
        let mut best_text: Option<String> = None;
        let mut ties: Vec<(Subst, usize, usize, (String, Out))> = Vec::new();
        for perm in perms {
            let mut env2 = env.clone();
            let (mut v, mut n) = (nv, nn);
            for b in &perm {
                let label = match b.kind() {
                    IdentKind::Variable => {
                        v += 1;
                        self.var_pool[v - 1].clone()
                    }
                    IdentKind::Name => {
                        n += 1;
                        self.name_pool[n - 1].clone()
                    }
                };
                env2.insert(b.clone(), label);
            }
            let r = render_item(&self.items[i], &env2, self.inner);
            match &best_text {
                Some(t) if r.0 > *t => continue,
                Some(t) if r.0 == *t => {}
                _ => {
                    best_text = Some(r.0.clone());
                    ties.clear();
                }
            }
            ties.push((env2, v, n, r));
        }
        for (env2, v, n, r) in ties {
            let mut rendered2: Vec<(String, Out)> = rendered
                .iter()
                .map(|(s, o)| (s.clone(), o.clone_out()))
                .collect();
            rendered2.push(r);
            self.run(order, pos + 1, env2, v, n, rendered2);
        }
    }
}

impl Out {
    fn clone_out(&self) -> Out {
        match self {
            Out::Store(f) => Out::Store(f.clone()),
            Out::Agent(a) => Out::Agent(a.clone()),
        }
    }
}

/// Groups normal forms by canonical key.
pub fn dedup_by_key(nfs: impl IntoIterator<Item = NormalForm>) -> BTreeMap<String, NormalForm> {
    nfs.into_iter().map(|nf| (nf.text.clone(), nf)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::parse::{parse_process, parse_program};

    fn nf(src: &str) -> NormalForm {
        let prog = parse_program(src).unwrap();
        to_normal_form(&prog.main, &prog.defs)
    }

    fn equiv(a: &str, b: &str) -> bool {
        let p = parse_process(a).unwrap();
        let q = parse_process(b).unwrap();
        struct_equiv(&p, &q, &Definitions::new())
    }

    #[test]
    fn handshake_initial_state() {
        let n = nf("Alice() := (x)(tell(ca(x)).fuse(x, a(x)).0) ;
                    Bob() := (y)(tell(cb(y)).fuse(y, b(y)).0) ;
                    Carl() := (z)(tell(cc(z)).fuse(z, c(z)).0) ;
                    main Alice() || Bob() || Carl()");
        assert_eq!(n.binders.len(), 3);
        assert!(n.store.is_empty());
        assert_eq!(n.agents.len(), 3);
    }

    #[test]
    fn delimited_constraints_are_hoisted() {
        let n = nf("main (new n)({c(n)}) || {d}");
        assert_eq!(n.binders.len(), 1);
        assert_eq!(n.store.len(), 2);
        assert!(n.agents.is_empty());
    }

    #[test]
    fn calls_unfold_once() {
        let n = nf("X() := tau.0 main X()");
        assert!(n.binders.is_empty());
        assert_eq!(n.agents.len(), 1);
        assert_eq!(n.key(), "tau.0");
    }

    #[test]
    fn axioms() {
        assert!(equiv("ask(a).0 || 0", "ask(a).0"));
        assert!(equiv("(x)(new n) tell(c(n, x)).0", "(new n)(x) tell(c(n, x)).0"));
        assert!(equiv("tau.0 + ask(a).0", "ask(a).0 + tau.0"));
        assert!(equiv("{a} || ({b} || tau.0)", "(tau.0 || {a}) || {b}"));
        assert!(equiv("(x)({p(x)} || {q})", "{q} || (x){p(x)}"));
        assert!(!equiv("tell(c).0", "tau.0"));
        assert!(!equiv("(x){p(x)}", "(new n){p(n)}"));
    }

    #[test]
    fn alpha_variants_coincide() {
        assert!(equiv(
            "(x)(y)({c(x, y)} || fuse(x, a(x)).0)",
            "(v)(u)({c(u, v)} || fuse(u, a(u)).0)"
        ));
        assert!(!equiv(
            "(x)(y)({c(x, y)} || fuse(x, a(x)).0)",
            "(x)(y)({c(x, y)} || fuse(y, a(y)).0)"
        ));
        assert!(equiv(
            "(x)(y)({p(x)} || {p(y)} || {q(x)})",
            "(x)(y)({p(y)} || {q(y)} || {p(x)})"
        ));
        assert!(equiv(
            "tau.((x)(y)(ask(p(x)).0 + ask(p(y)).0 || {q(y)}))",
            "tau.((x)(y)(ask(p(y)).0 + ask(p(x)).0 || {q(x)}))"
        ));
    }

    #[test]
    fn free_labels_are_not_captured() {
        let n = nf("main (z) tell(c(z, x1)).0");
        let p = parse_process(n.key()).unwrap();
        assert_eq!(p.free_identifiers(), [Ident::name("x1")].into_iter().collect());
    }

    #[test]
    fn normal_form_is_idempotent_and_reparses() {
        for src in [
            "main (x)(tell(ca(x)).fuse(x, a(x)).(y) join(y, b(y)).0 || {q})",
            "main (new n)(x)({c(n, x)} || tau.(ask(a).0 || 0)) || check(!p(m)).0",
            "X(a) := tau.(x) fuse(x, p(x, a)).X(a) main (new k) X(k)",
        ] {
            let first = nf(src);
            let again = to_normal_form(&parse_process(first.key()).unwrap(), &Definitions::new());
            assert_eq!(first.key(), again.key(), "{src}");
        }
    }

    #[test]
    fn unused_binders_are_dropped() {
        assert!(equiv("(x) tau.0", "tau.0"));
    }
}
