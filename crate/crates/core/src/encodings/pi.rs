//! Synchronous pi-calculus: terms, a reader, a reducer and the encoding.
//!
//! Text syntax: `0`, `P | Q`, `(new n) P`, `a<b>.P` (or `a<b>`), `a(z).P`,
//! `X(a, b)` and parentheses. A program is `X(y) := P ; ... main P`, or a
//! bare term.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, ParseError};
use crate::logic::{Formula, FreshSupply, Ident, Subst};
use crate::process::{to_normal_form, Definition, Definitions, NormalForm, Prefix, Process};
use crate::reduction::{explore, Bounds};
use crate::syntax::{Cursor, Tok};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PiTerm {
    Nil,
    Par(Box<PiTerm>, Box<PiTerm>),
    New(Ident, Box<PiTerm>),
    Out {
        chan: Ident,
        payload: Ident,
        cont: Box<PiTerm>,
    },
    In {
        chan: Ident,
        var: Ident,
        cont: Box<PiTerm>,
    },
    Call(String, Vec<Ident>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiDefinition {
    pub name: String,
    pub params: Vec<Ident>,
    pub body: PiTerm,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PiDefinitions {
    map: BTreeMap<String, PiDefinition>,
}

impl PiDefinitions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, d: PiDefinition) {
        self.map.insert(d.name.clone(), d);
    }

    pub fn get(&self, name: &str) -> Option<&PiDefinition> {
        self.map.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PiDefinition> {
        self.map.values()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiProgram {
    pub defs: PiDefinitions,
    pub main: PiTerm,
}

impl PiTerm {
    pub fn par(p: PiTerm, q: PiTerm) -> Self {
        PiTerm::Par(Box::new(p), Box::new(q))
    }

    pub fn par_all(items: impl IntoIterator<Item = PiTerm>) -> Self {
        let mut items: Vec<PiTerm> = items.into_iter().collect();
        match items.pop() {
            None => PiTerm::Nil,
            Some(last) => items.into_iter().rev().fold(last, |acc, p| PiTerm::par(p, acc)),
        }
    }

    pub fn new_name(n: Ident, p: PiTerm) -> Self {
        PiTerm::New(n, Box::new(p))
    }

    pub fn out(chan: Ident, payload: Ident, cont: PiTerm) -> Self {
        PiTerm::Out {
            chan,
            payload,
            cont: Box::new(cont),
        }
    }

    pub fn input(chan: Ident, var: Ident, cont: PiTerm) -> Self {
        PiTerm::In {
            chan,
            var,
            cont: Box::new(cont),
        }
    }

    fn labels(&self, out: &mut BTreeSet<String>) {
        let mut add = |i: &Ident| {
            out.insert(i.label().to_string());
        };
        match self {
            PiTerm::Nil => {}
            PiTerm::Par(p, q) => {
                p.labels(out);
                q.labels(out);
            }
            PiTerm::New(n, p) => {
                add(n);
                p.labels(out);
            }
            PiTerm::Out { chan, payload, cont } => {
                add(chan);
                add(payload);
                cont.labels(out);
            }
            PiTerm::In { chan, var, cont } => {
                add(chan);
                add(var);
                cont.labels(out);
            }
            PiTerm::Call(_, args) => args.iter().for_each(add),
        }
    }

    fn free_in(&self, id: &Ident) -> bool {
        match self {
            PiTerm::Nil => false,
            PiTerm::Par(p, q) => p.free_in(id) || q.free_in(id),
            PiTerm::New(n, p) => n != id && p.free_in(id),
            PiTerm::Out { chan, payload, cont } => chan == id || payload == id || cont.free_in(id),
            PiTerm::In { chan, var, cont } => chan == id || (var != id && cont.free_in(id)),
            PiTerm::Call(_, args) => args.contains(id),
        }
    }

    /// Capture-avoiding substitution.
    pub fn subst(&self, s: &Subst, supply: &mut FreshSupply) -> PiTerm {
        let id = |i: &Ident| s.get(i).cloned().unwrap_or_else(|| i.clone());
        let bind = |b: &Ident, body: &PiTerm, supply: &mut FreshSupply| -> (Ident, PiTerm) {
            let mut inner = s.clone();
            inner.remove(b);
            let captures = inner.iter().any(|(k, v)| v == b && body.free_in(k));
            if captures {
                let renamed = supply.freshen(b);
                inner.insert(b.clone(), renamed.clone());
                (renamed, body.subst(&inner, supply))
            } else {
                (b.clone(), body.subst(&inner, supply))
            }
        };
        match self {
            PiTerm::Nil => PiTerm::Nil,
            PiTerm::Par(p, q) => PiTerm::par(p.subst(s, supply), q.subst(s, supply)),
            PiTerm::New(n, p) => {
                let (n, p) = bind(n, p, supply);
                PiTerm::new_name(n, p)
            }
            PiTerm::Out { chan, payload, cont } => {
                PiTerm::out(id(chan), id(payload), cont.subst(s, supply))
            }
            PiTerm::In { chan, var, cont } => {
                let (v, c) = bind(var, cont, supply);
                PiTerm::input(id(chan), v, c)
            }
            PiTerm::Call(x, args) => PiTerm::Call(x.clone(), args.iter().map(id).collect()),
        }
    }
}

impl fmt::Display for PiTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn cont(f: &mut fmt::Formatter<'_>, c: &PiTerm) -> fmt::Result {
            match c {
                PiTerm::Nil => Ok(()),
                PiTerm::Par(..) => write!(f, ".({c})"),
                _ => write!(f, ".{c}"),
            }
        }
        match self {
            PiTerm::Nil => f.write_str("0"),
            PiTerm::Par(p, q) => write!(f, "{p} | {q}"),
            PiTerm::New(n, p) => match **p {
                PiTerm::Par(..) => write!(f, "(new {n})({p})"),
                _ => write!(f, "(new {n}) {p}"),
            },
            PiTerm::Out { chan, payload, cont: c } => {
                write!(f, "{chan}<{payload}>")?;
                cont(f, c)
            }
            PiTerm::In { chan, var, cont: c } => {
                write!(f, "{chan}({var})")?;
                match **c {
                    PiTerm::Nil => f.write_str(".0"),
                    _ => cont(f, c),
                }
            }
            PiTerm::Call(x, args) => {
                write!(f, "{x}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct PiReader {
    cur: Cursor,
    vars: Vec<Ident>,
}

impl PiReader {
    fn resolve(&self, label: &str) -> Ident {
        self.vars
            .iter()
            .rev()
            .find(|v| v.label() == label)
            .cloned()
            .unwrap_or_else(|| Ident::name(label))
    }

    fn term(&mut self) -> Result<PiTerm, ParseError> {
        let mut items = vec![self.unary()?];
        while self.cur.eat(&Tok::Bar) || self.cur.eat(&Tok::ParBar) {
            items.push(self.unary()?);
        }
        Ok(PiTerm::par_all(items))
    }

    fn continuation(&mut self) -> Result<PiTerm, ParseError> {
        if self.cur.eat(&Tok::Dot) {
            self.unary()
        } else {
            Ok(PiTerm::Nil)
        }
    }

    fn unary(&mut self) -> Result<PiTerm, ParseError> {
        match self.cur.peek().clone() {
            Tok::Zero => {
                self.cur.bump();
                Ok(PiTerm::Nil)
            }
            Tok::LParen if matches!(self.cur.peek_at(1), Tok::Ident(s) if s == "new") => {
                self.cur.bump();
                self.cur.bump();
                let n = Ident::name(self.cur.expect_ident()?);
                self.cur.expect(&Tok::RParen)?;
                // A restricted name shadows an enclosing input variable.
                let depth = self.vars.len();
                self.vars.push(n.clone());
                let body = self.unary();
                self.vars.truncate(depth);
                Ok(PiTerm::new_name(n, body?))
            }
            Tok::LParen => {
                self.cur.bump();
                let t = self.term()?;
                self.cur.expect(&Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(label) => {
                self.cur.bump();
                match self.cur.peek() {
                    Tok::Lt => {
                        self.cur.bump();
                        let chan = self.resolve(&label);
                        let payload = self.cur.expect_ident()?;
                        let payload = self.resolve(&payload);
                        self.cur.expect(&Tok::Gt)?;
                        Ok(PiTerm::out(chan, payload, self.continuation()?))
                    }
                    Tok::LParen => {
                        self.cur.bump();
                        let mut args = Vec::new();
                        if !self.cur.eat(&Tok::RParen) {
                            loop {
                                args.push(self.cur.expect_ident()?);
                                if self.cur.eat(&Tok::RParen) {
                                    break;
                                }
                                self.cur.expect(&Tok::Comma)?;
                            }
                        }
                        if *self.cur.peek() == Tok::Dot && args.len() == 1 {
                            self.cur.bump();
                            let chan = self.resolve(&label);
                            let var = Ident::var(&args[0]);
                            self.vars.push(var.clone());
                            let cont = self.unary();
                            self.vars.pop();
                            return Ok(PiTerm::input(chan, var, cont?));
                        }
                        let args = args.iter().map(|a| self.resolve(a)).collect();
                        Ok(PiTerm::Call(label, args))
                    }
                    other => Err(self.cur.error(format!("expected `<` or `(` after `{label}`, found {other}"))),
                }
            }
            other => Err(self.cur.error(format!("expected a pi term, found {other}"))),
        }
    }

    fn definition(&mut self) -> Result<PiDefinition, ParseError> {
        let name = self.cur.expect_ident()?;
        self.cur.expect(&Tok::LParen)?;
        let mut params = Vec::new();
        if !self.cur.eat(&Tok::RParen) {
            loop {
                params.push(Ident::var(self.cur.expect_ident()?));
                if self.cur.eat(&Tok::RParen) {
                    break;
                }
                self.cur.expect(&Tok::Comma)?;
            }
        }
        self.cur.expect(&Tok::Assign)?;
        self.vars = params.clone();
        let body = self.term();
        self.vars.clear();
        Ok(PiDefinition {
            name,
            params,
            body: body?,
        })
    }
}

pub fn parse_pi(src: &str) -> Result<PiProgram, Error> {
    let mut r = PiReader {
        cur: Cursor::new(src)?,
        vars: Vec::new(),
    };
    let mut defs = PiDefinitions::new();
    let has_main = src.split(|c: char| !c.is_alphanumeric() && c != '_').any(|w| w == "main");
    if has_main {
        while !r.cur.is_keyword("main") {
            defs.insert(r.definition()?);
            r.cur.expect(&Tok::Semi)?;
        }
        r.cur.bump();
    }
    let main = r.term()?;
    if !r.cur.at_eof() {
        return Err(r.cur.error(format!("unexpected {}", r.cur.peek())).into());
    }
    Ok(PiProgram { defs, main })
}

/// Translates a term; every output and input gets its own fresh variable.
pub fn encode_pi(t: &PiTerm) -> Process {
    let mut labels = BTreeSet::new();
    t.labels(&mut labels);
    let mut supply = FreshSupply::new();
    for l in labels {
        supply.reserve(l);
    }
    encode_with(t, &mut supply)
}

fn encode_with(t: &PiTerm, supply: &mut FreshSupply) -> Process {
    match t {
        PiTerm::Nil => Process::nil(),
        PiTerm::Par(p, q) => Process::par(encode_with(p, supply), encode_with(q, supply)),
        PiTerm::New(n, p) => Process::delim(n.clone(), encode_with(p, supply)),
        PiTerm::Call(x, args) => Process::call(x.clone(), args.clone()),
        PiTerm::Out { chan, payload, cont } => {
            let x = supply.freshen(&Ident::var("x"));
            let msg = Formula::atom("msg", vec![x.clone(), payload.clone()]);
            let demand = Formula::atom("in", vec![chan.clone(), x.clone()]);
            Process::delim(
                x.clone(),
                Process::par(
                    Process::Constraint(msg),
                    Process::prefixed(Prefix::Fuse(x, demand), encode_with(cont, supply)),
                ),
            )
        }
        PiTerm::In { chan, var, cont } => {
            let y = supply.freshen(&Ident::var("y"));
            let offer = Formula::atom("in", vec![chan.clone(), y.clone()]);
            let fetch = Formula::atom("msg", vec![y.clone(), var.clone()]);
            Process::delim(
                y,
                Process::par(
                    Process::Constraint(offer),
                    Process::delim(
                        var.clone(),
                        Process::prefixed(Prefix::Join(var.clone(), fetch), encode_with(cont, supply)),
                    ),
                ),
            )
        }
    }
}

pub fn encode_definitions(defs: &PiDefinitions) -> Definitions {
    let mut out = Definitions::new();
    for d in defs.iter() {
        out.insert(Definition {
            name: d.name.clone(),
            params: d.params.clone(),
            body: encode_pi(&d.body),
        });
    }
    out
}

/// Top-level components of a term with its restrictions lifted.
fn flatten(t: &PiTerm, defs: &PiDefinitions, supply: &mut FreshSupply, news: &mut Vec<Ident>, out: &mut Vec<PiTerm>, unfolds: usize) {
    match t {
        PiTerm::Nil => {}
        PiTerm::Par(p, q) => {
            flatten(p, defs, supply, news, out, unfolds);
            flatten(q, defs, supply, news, out, unfolds);
        }
        PiTerm::New(n, p) => {
            let fresh = supply.freshen(n);
            news.push(fresh.clone());
            let body = p.subst(&[(n.clone(), fresh)].into_iter().collect(), supply);
            flatten(&body, defs, supply, news, out, unfolds);
        }
        PiTerm::Call(x, args) => match defs.get(x) {
            Some(d) if unfolds < 64 && d.params.len() == args.len() => {
                let s: Subst = d.params.iter().cloned().zip(args.iter().cloned()).collect();
                let body = d.body.subst(&s, supply);
                flatten(&body, defs, supply, news, out, unfolds + 1);
            }
            _ => out.push(t.clone()),
        },
        PiTerm::Out { .. } | PiTerm::In { .. } => out.push(t.clone()),
    }
}

/// One-step communication successors.
pub fn pi_successors(t: &PiTerm, defs: &PiDefinitions) -> Vec<PiTerm> {
    let mut supply = FreshSupply::new();
    let mut labels = BTreeSet::new();
    t.labels(&mut labels);
    for d in defs.iter() {
        d.body.labels(&mut labels);
        labels.extend(d.params.iter().map(|p| p.label().to_string()));
    }
    for l in labels {
        supply.reserve(l);
    }
    let mut news = Vec::new();
    let mut comps = Vec::new();
    flatten(t, defs, &mut supply, &mut news, &mut comps, 0);
    let mut out = Vec::new();
    for (i, o) in comps.iter().enumerate() {
        let PiTerm::Out { chan: a, payload, cont: p } = o else { continue };
        for (j, r) in comps.iter().enumerate() {
            let PiTerm::In { chan: b, var, cont: q } = r else { continue };
            if a != b {
                continue;
            }
            let s: Subst = [(var.clone(), payload.clone())].into_iter().collect();
            let received = q.subst(&s, &mut supply);
            let mut items: Vec<PiTerm> = comps
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i && *k != j)
                .map(|(_, c)| c.clone())
                .collect();
            items.push((**p).clone());
            items.push(received);
            let body = PiTerm::par_all(items);
            out.push(news.iter().rev().fold(body, |acc, n| PiTerm::new_name(n.clone(), acc)));
        }
    }
    out
}

/// `nf` with consumed channel constraints removed: `msg(o, _)` and `in(_, o)`
/// whose session argument is a name.
pub fn strip_residuals(nf: &NormalForm, defs: &Definitions) -> NormalForm {
    let residual = |f: &Formula| match f {
        Formula::Atom(a) if a.args.len() == 2 => match a.predicate.as_str() {
            "msg" => a.args[0].is_name(),
            "in" => a.args[1].is_name(),
            _ => false,
        },
        _ => false,
    };
    let store: Vec<Process> = nf
        .store
        .iter()
        .filter(|f| !residual(f))
        .cloned()
        .map(Process::Constraint)
        .collect();
    let agents = nf.agents.iter().map(|a| a.to_process());
    let body = Process::par_all(store.into_iter().chain(agents));
    to_normal_form(&Process::delim_all(nf.binders.clone(), body), defs)
}

/// Forward operational correspondence: every pi successor of `t` is reached
/// by the encoding, up to consumed channel constraints.
pub fn pi_correspondence(t: &PiTerm, defs: &PiDefinitions, bounds: Bounds) -> bool {
    let hdefs = encode_definitions(defs);
    let graph = explore(&encode_pi(t), &hdefs, bounds);
    let reached: BTreeSet<String> = graph
        .states
        .iter()
        .map(|s| strip_residuals(s, &hdefs).key().to_string())
        .collect();
    pi_successors(t, defs).iter().all(|s| {
        let target = to_normal_form(&encode_pi(s), &hdefs);
        reached.contains(target.key())
    })
}
