//! Bounded backward proof search over formulas, independent of clause
//! normalization. Used to cross-check the Horn decision procedure.
//!
//! Invertible steps (left `/\`, left `\/`, `bot`, modus ponens on an antecedent
//! already in the context, right `/\`, right `->`) are free. Every other step
//! costs one unit of depth:
//!
//! * right `\/`;
//! * left `->` on an antecedent that must itself be proved;
//! * `(g ->> g) -> g`, proving `g` from `g ->> g`;
//! * `(p' -> p) -> (p ->> q) -> (q -> q') -> (p' ->> q')`, with the middle
//!   contract `p ->> q` the conjunction of a nonempty set of contracts in
//!   the context, or `top ->> top`.

use std::collections::HashMap;

use super::formula::{Atom, Formula};

type Id = u32;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    Top,
    Bot,
    Atom(Id),
    And(Id, Id),
    Or(Id, Id),
    Imp(Id, Id),
    CImp(Id, Id),
}

/// Sorted, deduplicated set of formula ids.
type Context = Vec<Id>;

#[derive(Clone, Copy, Default)]
struct Known {
    /// Largest depth at which the sequent is known to fail.
    fails_at: Option<u32>,
    /// Smallest depth at which the sequent is known to hold.
    holds_at: Option<u32>,
}

#[derive(Default)]
pub struct Oracle {
    nodes: Vec<Node>,
    index: HashMap<Node, Id>,
    atoms: HashMap<Atom, Id>,
    memo: HashMap<(Context, Id), Known>,
}

const TOP: Id = 0;
const BOT: Id = 1;

impl Oracle {
    pub fn new() -> Self {
        let mut o = Oracle::default();
        o.node(Node::Top);
        o.node(Node::Bot);
        o
    }

    fn node(&mut self, n: Node) -> Id {
        if let Some(&id) = self.index.get(&n) {
            return id;
        }
        let id = self.nodes.len() as Id;
        self.nodes.push(n);
        self.index.insert(n, id);
        id
    }

    fn intern(&mut self, f: &Formula) -> Id {
        let n = match f {
            Formula::Top => return TOP,
            Formula::Bot => return BOT,
            Formula::Atom(a) => {
                let next = self.atoms.len() as Id;
                Node::Atom(*self.atoms.entry(a.clone()).or_insert(next))
            }
            Formula::And(l, r) => Node::And(self.intern(l), self.intern(r)),
            Formula::Or(l, r) => Node::Or(self.intern(l), self.intern(r)),
            Formula::Imp(l, r) => Node::Imp(self.intern(l), self.intern(r)),
            Formula::CImp(l, r) => Node::CImp(self.intern(l), self.intern(r)),
        };
        self.node(n)
    }

    fn conj(&mut self, parts: &[Id]) -> Id {
        match parts.split_last() {
            None => TOP,
            Some((&last, rest)) => rest
                .iter()
                .rev()
                .fold(last, |acc, &f| self.node(Node::And(f, acc))),
        }
    }

    pub fn prove(&mut self, hypotheses: &[Formula], goal: &Formula, depth: u32) -> bool {
        let mut ctx: Context = hypotheses.iter().map(|h| self.intern(h)).collect();
        ctx.sort_unstable();
        ctx.dedup();
        let g = self.intern(goal);
        self.search(ctx, g, depth)
    }

    fn search(&mut self, ctx: Context, goal: Id, depth: u32) -> bool {
        let ctx = match self.saturate(ctx) {
            None => return true,
            Some(ctx) => ctx,
        };
        let split = ctx.iter().position(|&f| matches!(self.nodes[f as usize], Node::Or(..)));
        if let Some(i) = split {
            let Node::Or(l, r) = self.nodes[ctx[i] as usize] else {
                unreachable!()
            };
            let mut base = ctx;
            base.remove(i);
            return self.search(with(&base, l), goal, depth)
                && self.search(with(&base, r), goal, depth);
        }

        let key = (ctx, goal);
        let known = self.memo.get(&key).copied().unwrap_or_default();
        if known.holds_at.is_some_and(|d| d <= depth) {
            return true;
        }
        if known.fails_at.is_some_and(|d| d >= depth) {
            return false;
        }
        let result = self.search_saturated(&key.0, goal, depth);
        let entry = self.memo.entry(key).or_default();
        if result {
            entry.holds_at = Some(entry.holds_at.map_or(depth, |d| d.min(depth)));
        } else {
            entry.fails_at = Some(entry.fails_at.map_or(depth, |d| d.max(depth)));
        }
        result
    }

    fn search_saturated(&mut self, ctx: &Context, goal: Id, depth: u32) -> bool {
        if goal == TOP || ctx.binary_search(&goal).is_ok() {
            return true;
        }
        match self.nodes[goal as usize] {
            Node::And(l, r) => {
                return self.search(ctx.clone(), l, depth) && self.search(ctx.clone(), r, depth)
            }
            Node::Imp(a, b) => return self.search(with(ctx, a), b, depth),
            _ => {}
        }
        if depth == 0 {
            return false;
        }
        let d = depth - 1;

        let node = self.nodes[goal as usize];
        match node {
            Node::Or(l, r) => {
                if self.search(ctx.clone(), l, d) || self.search(ctx.clone(), r, d) {
                    return true;
                }
            }
            Node::CImp(p, q) if self.via_middle(ctx, p, q, d) => return true,
            _ => {}
        }

        // Left implication with an antecedent that needs a proof.
        let pending: Vec<(Id, Id)> = ctx
            .iter()
            .filter_map(|&f| match self.nodes[f as usize] {
                Node::Imp(a, b) if ctx.binary_search(&b).is_err() => Some((a, b)),
                _ => None,
            })
            .collect();
        for (a, b) in pending {
            if self.search(ctx.clone(), a, d) && self.search(with(ctx, b), goal, d) {
                return true;
            }
        }

        if !matches!(self.nodes[goal as usize], Node::CImp(..)) {
            let lifted = self.node(Node::CImp(goal, goal));
            if self.search(ctx.clone(), lifted, d) {
                return true;
            }
        }
        false
    }

    fn via_middle(&mut self, ctx: &Context, p: Id, q: Id, d: u32) -> bool {
        let contracts: Vec<(Id, Id)> = ctx
            .iter()
            .filter_map(|&f| match self.nodes[f as usize] {
                Node::CImp(a, b) => Some((a, b)),
                _ => None,
            })
            .collect();
        let mut middles = vec![(TOP, TOP)];
        let n = contracts.len().min(12);
        for mask in 1u32..(1 << n) {
            let chosen: Vec<(Id, Id)> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| contracts[i])
                .collect();
            let pre: Vec<Id> = chosen.iter().map(|c| c.0).collect();
            let post: Vec<Id> = chosen.iter().map(|c| c.1).collect();
            middles.push((self.conj(&pre), self.conj(&post)));
        }
        let left = with(ctx, p);
        for (mp, mq) in middles {
            if self.search(left.clone(), mp, d) && self.search(with(ctx, mq), q, d) {
                return true;
            }
        }
        false
    }

    /// Applies the invertible left rules; `None` when the context contains `bot`.
    fn saturate(&mut self, mut ctx: Context) -> Option<Context> {
        loop {
            if ctx.binary_search(&BOT).is_ok() {
                return None;
            }
            let mut add = Vec::new();
            let mut remove = Vec::new();
            for (i, &f) in ctx.iter().enumerate() {
                match self.nodes[f as usize] {
                    Node::Top => remove.push(i),
                    Node::And(l, r) => {
                        remove.push(i);
                        add.push(l);
                        add.push(r);
                    }
                    Node::Imp(a, b) if a == TOP || ctx.binary_search(&a).is_ok() => {
                        remove.push(i);
                        add.push(b);
                    }
                    _ => {}
                }
            }
            if add.is_empty() && remove.is_empty() {
                return Some(ctx);
            }
            for i in remove.into_iter().rev() {
                ctx.remove(i);
            }
            ctx.extend(add);
            ctx.sort_unstable();
            ctx.dedup();
        }
    }
}

fn with(ctx: &Context, f: Id) -> Context {
    match ctx.binary_search(&f) {
        Ok(_) => ctx.clone(),
        Err(i) => {
            let mut out = ctx.clone();
            out.insert(i, f);
            out
        }
    }
}

/// Bounded search for `hypotheses ⊢ goal`.
pub fn oracle_prove(hypotheses: &[Formula], goal: &Formula, depth: u32) -> bool {
    Oracle::new().prove(hypotheses, goal, depth)
}
