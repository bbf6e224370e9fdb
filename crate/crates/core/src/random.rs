//! Seeded generator of small guarded programs and single-axiom rewrites
//! preserving structural congruence.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::logic::{Atom, Formula, FreshSupply, Ident, Literal, Subst};
use crate::process::{Definition, Definitions, Prefix, Process, Program};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenConfig {
    /// Upper bound on [`Process::size`] of every generated body.
    pub max_size: usize,
    /// Delimiters per body.
    pub max_binders: usize,
    pub max_defs: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_size: 12,
            max_binders: 3,
            max_defs: 2,
        }
    }
}

const FREE_NAMES: [&str; 2] = ["a", "b"];

struct Gen<'r> {
    rng: &'r mut ChaCha8Rng,
    scope: Vec<Ident>,
    binders_left: usize,
    next_label: usize,
    /// Constants callable from the body under construction, with arities.
    callable: Vec<(String, usize)>,
    /// Calls still allowed in the body under construction.
    calls_left: usize,
}

impl Gen<'_> {
    fn ident(&mut self) -> Ident {
        let k = self.rng.gen_range(0..self.scope.len() + FREE_NAMES.len());
        match self.scope.get(k) {
            Some(id) => id.clone(),
            None => Ident::name(FREE_NAMES[k - self.scope.len()]),
        }
    }

    fn atom(&mut self) -> Formula {
        match self.rng.gen_range(0..4) {
            0 => Formula::prop("r"),
            1 => Formula::prop("s"),
            2 => Formula::Atom(Atom::new("p", vec![self.ident()])),
            _ => Formula::Atom(Atom::new("q", vec![self.ident()])),
        }
    }

    fn constraint(&mut self) -> Formula {
        let a = self.atom();
        match self.rng.gen_range(0..5) {
            0 | 1 => a,
            2 => Formula::imp(a, self.atom()),
            3 => Formula::cimp(a, self.atom()),
            _ => Formula::and(a, self.atom()),
        }
    }

    fn goal(&mut self) -> Formula {
        if self.rng.gen_bool(0.75) {
            self.atom()
        } else {
            Formula::and(self.atom(), self.atom())
        }
    }

    fn literal(&mut self) -> Literal {
        let Formula::Atom(a) = self.atom() else { unreachable!("atoms only") };
        if self.rng.gen_bool(0.5) {
            Literal::pos(a)
        } else {
            Literal::neg(a)
        }
    }

    fn prefix(&mut self) -> Prefix {
        let vars: Vec<Ident> = self.scope.iter().filter(|i| i.is_var()).cloned().collect();
        match self.rng.gen_range(0..7) {
            0 => Prefix::Tau,
            1 | 2 => Prefix::Tell(self.constraint()),
            3 => Prefix::Ask(self.goal()),
            4 => Prefix::Check(vec![self.literal()]),
            5 if !vars.is_empty() => Prefix::Fuse(vars.choose(self.rng).expect("nonempty").clone(), self.goal()),
            6 if !vars.is_empty() => Prefix::Join(vars.choose(self.rng).expect("nonempty").clone(), self.goal()),
            _ => Prefix::Tell(self.constraint()),
        }
    }

    /// A process of size at most `budget` (at least 1).
    fn process(&mut self, budget: usize) -> Process {
        if budget < 3 {
            return match self.rng.gen_range(0..3) {
                0 => Process::nil(),
                1 => Process::Constraint(self.constraint()),
                _ => self.call().unwrap_or_else(Process::nil),
            };
        }
        match self.rng.gen_range(0..6) {
            0 => Process::Constraint(self.constraint()),
            1 | 2 => self.guarded(budget),
            3 => {
                let share = self.rng.gen_range(1..=budget - 2);
                let p = self.process(share);
                let q = self.process(budget - 1 - p.size());
                Process::par(p, q)
            }
            4 if self.binders_left > 0 => {
                self.binders_left -= 1;
                self.next_label += 1;
                let id = if self.rng.gen_bool(0.7) {
                    Ident::var(format!("x{}", self.next_label))
                } else {
                    Ident::name(format!("n{}", self.next_label))
                };
                self.scope.push(id.clone());
                let body = self.process(budget - 1);
                self.scope.pop();
                Process::delim(id, body)
            }
            _ => self.call().unwrap_or_else(|| self.guarded(budget)),
        }
    }

    /// A sum of one or two prefixed branches; `budget` is at least 3.
    fn guarded(&mut self, budget: usize) -> Process {
        let two = budget >= 7 && self.rng.gen_bool(0.3);
        let mut left = budget - 1;
        let mut branches = Vec::new();
        if two {
            let cont = self.process(left / 2 - 1);
            left -= 1 + cont.size();
            branches.push((self.prefix(), cont));
        }
        let cont = self.process(left - 1);
        branches.push((self.prefix(), cont));
        Process::Sum(branches)
    }

    fn call(&mut self) -> Option<Process> {
        if self.calls_left == 0 {
            return None;
        }
        let (name, arity) = self.callable.choose(self.rng)?.clone();
        self.calls_left -= 1;
        let args = (0..arity).map(|_| self.ident()).collect();
        Some(Process::call(name, args))
    }
}

/// A program whose definitions are guarded and linearly recursive, with
/// bodies within the configured size and binder bounds.
pub fn random_program(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Program {
    let ndefs = rng.gen_range(0..=cfg.max_defs);
    let heads: Vec<(String, usize)> = (0..ndefs)
        .map(|i| (format!("D{}", i + 1), rng.gen_range(0..=1)))
        .collect();
    let mut defs = Definitions::new();
    for (name, arity) in &heads {
        let params: Vec<Ident> = (0..*arity).map(|k| Ident::var(format!("u{}", k + 1))).collect();
        let mut g = Gen {
            rng: &mut *rng,
            scope: params.clone(),
            binders_left: cfg.max_binders,
            next_label: 0,
            callable: heads.clone(),
            calls_left: 1,
        };
        // Bodies start with a prefix so that every recursive call is guarded,
        // and call at most once so that recursion never replicates agents.
        let budget = g.rng.gen_range(3..=cfg.max_size.max(3));
        let body = g.guarded(budget);
        defs.insert(Definition {
            name: name.clone(),
            params,
            body,
        });
    }
    let mut g = Gen {
        rng,
        scope: Vec::new(),
        binders_left: cfg.max_binders,
        next_label: 0,
        callable: heads,
        calls_left: usize::MAX,
    };
    let budget = g.rng.gen_range(1..=cfg.max_size);
    let main = g.process(budget);
    Program { defs, main }
}

/// `count` programs from a fixed seed.
pub fn random_programs(seed: u64, count: usize, cfg: &GenConfig) -> Vec<Program> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_program(&mut rng, cfg)).collect()
}

/// One structural congruence law, applied left to right at a single position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Axiom {
    ParNil,
    ParComm,
    ParAssoc,
    SumComm,
    ScopeExtrusion,
    BinderSwap,
    Alpha,
    Unfold,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::ParNil => "P | 0 = P",
            Axiom::ParComm => "P | Q = Q | P",
            Axiom::ParAssoc => "(P | Q) | R = P | (Q | R)",
            Axiom::SumComm => "pi.P + pi'.Q = pi'.Q + pi.P",
            Axiom::ScopeExtrusion => "(a)P | Q = (a)(P | Q)",
            Axiom::BinderSwap => "(a)(b)P = (b)(a)P",
            Axiom::Alpha => "(a)P = (b)P{b/a}",
            Axiom::Unfold => "X(a) = P{a/y}",
        })
    }
}

fn applicable(p: &Process, defs: &Definitions, guarded: bool) -> Vec<Axiom> {
    let mut out = vec![Axiom::ParNil];
    match p {
        Process::Par(l, r) => {
            out.push(Axiom::ParComm);
            if matches!(**l, Process::Par(..)) {
                out.push(Axiom::ParAssoc);
            }
            if let Process::Delim(a, _) = &**l {
                if !r.occurs_free(a) {
                    out.push(Axiom::ScopeExtrusion);
                }
            }
        }
        Process::Sum(b) if b.len() >= 2 => out.push(Axiom::SumComm),
        Process::Delim(_, body) => {
            out.push(Axiom::Alpha);
            if matches!(**body, Process::Delim(..)) {
                out.push(Axiom::BinderSwap);
            }
        }
        Process::Call(x, args) if !guarded && defs.get(x).is_some_and(|d| d.params.len() == args.len()) => {
            out.push(Axiom::Unfold)
        }
        _ => {}
    }
    out
}

/// Applicable axioms paired with preorder node positions. Calls are only
/// unfolded outside prefixes.
fn candidates(p: &Process, defs: &Definitions, guarded: bool, counter: &mut usize, out: &mut Vec<(usize, Axiom)>) {
    let here = *counter;
    *counter += 1;
    out.extend(applicable(p, defs, guarded).into_iter().map(|ax| (here, ax)));
    match p {
        Process::Sum(b) => b.iter().for_each(|(_, c)| candidates(c, defs, true, counter, out)),
        Process::Par(l, r) => {
            candidates(l, defs, guarded, counter, out);
            candidates(r, defs, guarded, counter, out);
        }
        Process::Delim(_, body) => candidates(body, defs, guarded, counter, out),
        Process::Constraint(_) | Process::Call(..) => {}
    }
}

fn apply(p: &Process, ax: Axiom, defs: &Definitions, supply: &mut FreshSupply) -> Process {
    match (ax, p) {
        (Axiom::ParNil, _) => Process::par(p.clone(), Process::nil()),
        (Axiom::ParComm, Process::Par(l, r)) => Process::par((**r).clone(), (**l).clone()),
        (Axiom::ParAssoc, Process::Par(l, r)) => {
            let Process::Par(a, b) = &**l else { unreachable!("checked") };
            Process::par((**a).clone(), Process::par((**b).clone(), (**r).clone()))
        }
        (Axiom::SumComm, Process::Sum(b)) => {
            let mut b = b.clone();
            b.rotate_left(1);
            Process::Sum(b)
        }
        (Axiom::ScopeExtrusion, Process::Par(l, r)) => {
            let Process::Delim(a, body) = &**l else { unreachable!("checked") };
            Process::delim(a.clone(), Process::par((**body).clone(), (**r).clone()))
        }
        (Axiom::BinderSwap, Process::Delim(a, body)) => {
            let Process::Delim(b, inner) = &**body else { unreachable!("checked") };
            Process::delim(b.clone(), Process::delim(a.clone(), (**inner).clone()))
        }
        (Axiom::Alpha, Process::Delim(a, body)) => {
            let b = supply.freshen(a);
            let s: Subst = [(a.clone(), b.clone())].into_iter().collect();
            Process::delim(b, body.subst_with(&s, supply))
        }
        (Axiom::Unfold, Process::Call(x, args)) => defs.get(x).expect("checked").instantiate(args, supply),
        _ => unreachable!("axiom checked applicable"),
    }
}

fn rewrite_at(
    p: &Process,
    target: usize,
    counter: &mut usize,
    ax: Axiom,
    defs: &Definitions,
    supply: &mut FreshSupply,
) -> Process {
    let here = *counter;
    *counter += 1;
    if here == target {
        return apply(p, ax, defs, supply);
    }
    match p {
        Process::Sum(b) => Process::Sum(
            b.iter()
                .map(|(pre, c)| (pre.clone(), rewrite_at(c, target, counter, ax, defs, supply)))
                .collect(),
        ),
        Process::Par(l, r) => {
            let l = rewrite_at(l, target, counter, ax, defs, supply);
            let r = rewrite_at(r, target, counter, ax, defs, supply);
            Process::par(l, r)
        }
        Process::Delim(a, body) => Process::delim(a.clone(), rewrite_at(body, target, counter, ax, defs, supply)),
        Process::Constraint(_) | Process::Call(..) => p.clone(),
    }
}

/// `p` rewritten by one randomly chosen axiom instance.
pub fn mutate(p: &Process, defs: &Definitions, rng: &mut ChaCha8Rng) -> (Process, Axiom) {
    let mut found = Vec::new();
    candidates(p, defs, false, &mut 0, &mut found);
    let (at, ax) = found[rng.gen_range(0..found.len())];
    let mut labels = BTreeSet::new();
    p.all_labels(&mut labels);
    defs.all_labels(&mut labels);
    let mut supply = FreshSupply::new();
    for l in labels {
        supply.reserve(l);
    }
    (rewrite_at(p, at, &mut 0, ax, defs, &mut supply), ax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::parse::validate;
    use crate::process::{parse_program, struct_equiv};

    #[test]
    fn generated_programs_are_valid_and_small() {
        let cfg = GenConfig::default();
        for p in random_programs(7, 300, &cfg) {
            validate(&p).unwrap();
            assert!(p.main.size() <= cfg.max_size, "{}", p.main);
            assert!(p.defs.len() <= cfg.max_defs);
            let text = p.to_string();
            let again = parse_program(&text).unwrap_or_else(|e| panic!("{text}: {e}"));
            assert!(struct_equiv(&p.main, &again.main, &p.defs));
        }
    }

    #[test]
    fn generation_is_seeded() {
        let cfg = GenConfig::default();
        let a: Vec<String> = random_programs(3, 20, &cfg).iter().map(|p| p.to_string()).collect();
        let b: Vec<String> = random_programs(3, 20, &cfg).iter().map(|p| p.to_string()).collect();
        let c: Vec<String> = random_programs(4, 20, &cfg).iter().map(|p| p.to_string()).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn mutations_preserve_congruence() {
        let cfg = GenConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = BTreeSet::new();
        for p in random_programs(5, 300, &cfg) {
            let (q, ax) = mutate(&p.main, &p.defs, &mut rng);
            seen.insert(ax);
            assert!(struct_equiv(&p.main, &q, &p.defs), "{ax}: {} vs {q}", p.main);
        }
        assert!(seen.len() >= 6, "{seen:?}");
    }
}
