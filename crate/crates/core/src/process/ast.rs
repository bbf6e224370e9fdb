use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::logic::{Formula, FreshSupply, Ident, Literal, Subst};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Prefix {
    Tau,
    Tell(Formula),
    Check(Vec<Literal>),
    Ask(Formula),
    Join(Ident, Formula),
    Fuse(Ident, Formula),
}

impl Prefix {
    /// Applies `s`; a fuse/join whose subject becomes a name degenerates to `ask`.
    pub fn subst(&self, s: &Subst) -> Prefix {
        match self {
            Prefix::Tau => Prefix::Tau,
            Prefix::Tell(f) => Prefix::Tell(f.subst(s)),
            Prefix::Check(ls) => Prefix::Check(ls.iter().map(|l| l.subst(s)).collect()),
            Prefix::Ask(f) => Prefix::Ask(f.subst(s)),
            Prefix::Join(x, f) | Prefix::Fuse(x, f) => {
                let f = f.subst(s);
                match s.get(x) {
                    Some(t) if t.is_name() => Prefix::Ask(f),
                    Some(t) => self.with_subject(t.clone(), f),
                    None => self.with_subject(x.clone(), f),
                }
            }
        }
    }

    fn with_subject(&self, x: Ident, f: Formula) -> Prefix {
        match self {
            Prefix::Join(..) => Prefix::Join(x, f),
            _ => Prefix::Fuse(x, f),
        }
    }

    pub fn identifiers(&self) -> BTreeSet<Ident> {
        match self {
            Prefix::Tau => BTreeSet::new(),
            Prefix::Tell(f) | Prefix::Ask(f) => f.identifiers(),
            Prefix::Check(ls) => ls.iter().flat_map(|l| l.atom.args.iter().cloned()).collect(),
            Prefix::Join(x, f) | Prefix::Fuse(x, f) => {
                let mut ids = f.identifiers();
                ids.insert(x.clone());
                ids
            }
        }
    }

    /// Identifier occurrences in printing order.
    pub fn occurrences<'a>(&'a self, out: &mut Vec<&'a Ident>) {
        match self {
            Prefix::Tau => {}
            Prefix::Tell(f) | Prefix::Ask(f) => f.occurrences(out),
            Prefix::Check(ls) => {
                for l in ls {
                    out.extend(l.atom.args.iter());
                }
            }
            Prefix::Join(x, f) | Prefix::Fuse(x, f) => {
                out.push(x);
                f.occurrences(out);
            }
        }
    }

    pub fn rule_name(&self) -> &'static str {
        match self {
            Prefix::Tau => "Tau",
            Prefix::Tell(_) => "Tell",
            Prefix::Check(_) => "Check",
            Prefix::Ask(_) => "Ask",
            Prefix::Join(..) => "Join",
            Prefix::Fuse(..) => "Fuse",
        }
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prefix::Tau => f.write_str("tau"),
            Prefix::Tell(c) => write!(f, "tell({c})"),
            Prefix::Ask(c) => write!(f, "ask({c})"),
            Prefix::Check(ls) => {
                f.write_str("check(")?;
                for (i, l) in ls.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{l}")?;
                }
                f.write_str(")")
            }
            Prefix::Fuse(x, c) => write!(f, "fuse({x}, {c})"),
            Prefix::Join(x, c) => write!(f, "join({x}, {c})"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Process {
    Constraint(Formula),
    /// Guarded sum; the empty sum is `0`.
    Sum(Vec<(Prefix, Process)>),
    Par(Box<Process>, Box<Process>),
    Delim(Ident, Box<Process>),
    Call(String, Vec<Ident>),
}

impl Process {
    pub fn nil() -> Self {
        Process::Sum(Vec::new())
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Process::Sum(b) if b.is_empty())
    }

    pub fn constraint(f: Formula) -> Self {
        Process::Constraint(f)
    }

    pub fn prefixed(prefix: Prefix, cont: Process) -> Self {
        Process::Sum(vec![(prefix, cont)])
    }

    pub fn par(p: Process, q: Process) -> Self {
        Process::Par(Box::new(p), Box::new(q))
    }

    /// Right-nested parallel composition; `0` when empty.
    pub fn par_all(items: impl IntoIterator<Item = Process>) -> Self {
        let mut items: Vec<Process> = items.into_iter().collect();
        match items.pop() {
            None => Process::nil(),
            Some(last) => items
                .into_iter()
                .rev()
                .fold(last, |acc, p| Process::par(p, acc)),
        }
    }

    pub fn delim(a: Ident, p: Process) -> Self {
        Process::Delim(a, Box::new(p))
    }

    /// `(a1)(a2)...p`, outermost first.
    pub fn delim_all(binders: impl IntoIterator<Item = Ident>, p: Process) -> Self {
        let binders: Vec<Ident> = binders.into_iter().collect();
        binders
            .into_iter()
            .rev()
            .fold(p, |acc, a| Process::delim(a, acc))
    }

    pub fn call(name: impl Into<String>, args: Vec<Ident>) -> Self {
        Process::Call(name.into(), args)
    }

    /// Merges two sums; `None` if either side is not a sum.
    pub fn sum(p: Process, q: Process) -> Option<Process> {
        match (p, q) {
            (Process::Sum(mut a), Process::Sum(b)) => {
                a.extend(b);
                Some(Process::Sum(a))
            }
            _ => None,
        }
    }

    pub fn free_identifiers(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Ident>, out: &mut BTreeSet<Ident>) {
        fn add(out: &mut BTreeSet<Ident>, ids: BTreeSet<Ident>, bound: &[Ident]) {
            out.extend(ids.into_iter().filter(|i| !bound.contains(i)));
        }
        match self {
            Process::Constraint(f) => add(out, f.identifiers(), bound),
            Process::Sum(branches) => {
                for (pre, cont) in branches {
                    add(out, pre.identifiers(), bound);
                    cont.collect_free(bound, out);
                }
            }
            Process::Par(p, q) => {
                p.collect_free(bound, out);
                q.collect_free(bound, out);
            }
            Process::Delim(a, p) => {
                bound.push(a.clone());
                p.collect_free(bound, out);
                bound.pop();
            }
            Process::Call(_, args) => add(out, args.iter().cloned().collect(), bound),
        }
    }

    pub fn occurs_free(&self, id: &Ident) -> bool {
        match self {
            Process::Constraint(f) => f.mentions(id),
            Process::Sum(branches) => branches
                .iter()
                .any(|(pre, cont)| pre.identifiers().contains(id) || cont.occurs_free(id)),
            Process::Par(p, q) => p.occurs_free(id) || q.occurs_free(id),
            Process::Delim(a, p) => a != id && p.occurs_free(id),
            Process::Call(_, args) => args.contains(id),
        }
    }

    /// Every identifier label, bound or free.
    pub fn all_labels(&self, out: &mut BTreeSet<String>) {
        fn add(out: &mut BTreeSet<String>, ids: BTreeSet<Ident>) {
            out.extend(ids.iter().map(|i| i.label().to_string()));
        }
        match self {
            Process::Constraint(f) => add(out, f.identifiers()),
            Process::Sum(branches) => {
                for (pre, cont) in branches {
                    add(out, pre.identifiers());
                    cont.all_labels(out);
                }
            }
            Process::Par(p, q) => {
                p.all_labels(out);
                q.all_labels(out);
            }
            Process::Delim(a, p) => {
                out.insert(a.label().to_string());
                p.all_labels(out);
            }
            Process::Call(_, args) => add(out, args.iter().cloned().collect()),
        }
    }

    /// Supply that avoids every label of `self`.
    pub fn fresh_supply(&self) -> FreshSupply {
        let mut labels = BTreeSet::new();
        self.all_labels(&mut labels);
        let mut supply = FreshSupply::new();
        for l in labels {
            supply.reserve(l);
        }
        supply
    }

    /// Capture-avoiding substitution. Binders that would capture a substituted
    /// identifier are renamed with labels drawn from `supply`.
    pub fn subst_with(&self, s: &Subst, supply: &mut FreshSupply) -> Process {
        if s.is_empty() {
            return self.clone();
        }
        match self {
            Process::Constraint(f) => Process::Constraint(f.subst(s)),
            Process::Sum(branches) => Process::Sum(
                branches
                    .iter()
                    .map(|(pre, cont)| (pre.subst(s), cont.subst_with(s, supply)))
                    .collect(),
            ),
            Process::Par(p, q) => Process::par(p.subst_with(s, supply), q.subst_with(s, supply)),
            Process::Delim(a, p) => {
                let mut inner = s.clone();
                inner.remove(a);
                let captures = inner
                    .iter()
                    .any(|(from, to)| to == a && p.occurs_free(from));
                if captures {
                    let renamed = supply.freshen(a);
                    inner.insert(a.clone(), renamed.clone());
                    Process::delim(renamed, p.subst_with(&inner, supply))
                } else {
                    Process::delim(a.clone(), p.subst_with(&inner, supply))
                }
            }
            Process::Call(x, args) => Process::Call(
                x.clone(),
                args.iter()
                    .map(|a| s.get(a).cloned().unwrap_or_else(|| a.clone()))
                    .collect(),
            ),
        }
    }

    pub fn subst(&self, s: &Subst) -> Process {
        let mut supply = self.fresh_supply();
        for (k, v) in s {
            supply.reserve(k.label());
            supply.reserve(v.label());
        }
        self.subst_with(s, &mut supply)
    }

    /// Renames every binder to a fresh label (Barendregt convention).
    pub fn freshen_binders(&self, supply: &mut FreshSupply) -> Process {
        match self {
            Process::Constraint(_) | Process::Call(..) => self.clone(),
            Process::Sum(branches) => Process::Sum(
                branches
                    .iter()
                    .map(|(pre, cont)| (pre.clone(), cont.freshen_binders(supply)))
                    .collect(),
            ),
            Process::Par(p, q) => {
                Process::par(p.freshen_binders(supply), q.freshen_binders(supply))
            }
            Process::Delim(a, p) => {
                let renamed = supply.freshen(a);
                let s: Subst = [(a.clone(), renamed.clone())].into_iter().collect();
                let body = p.subst_with(&s, supply).freshen_binders(supply);
                Process::delim(renamed, body)
            }
        }
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        match self {
            Process::Constraint(_) | Process::Call(..) => 1,
            Process::Sum(branches) => 1 + branches.iter().map(|(_, c)| 1 + c.size()).sum::<usize>(),
            Process::Par(p, q) => 1 + p.size() + q.size(),
            Process::Delim(_, p) => 1 + p.size(),
        }
    }

    /// Calls occurring outside any prefix.
    pub fn unguarded_calls(&self, out: &mut Vec<String>) {
        match self {
            Process::Call(x, _) => out.push(x.clone()),
            Process::Par(p, q) => {
                p.unguarded_calls(out);
                q.unguarded_calls(out);
            }
            Process::Delim(_, p) => p.unguarded_calls(out),
            Process::Constraint(_) | Process::Sum(_) => {}
        }
    }

    /// All calls with their arities.
    pub fn calls(&self, out: &mut Vec<(String, usize)>) {
        match self {
            Process::Call(x, args) => out.push((x.clone(), args.len())),
            Process::Par(p, q) => {
                p.calls(out);
                q.calls(out);
            }
            Process::Delim(_, p) => p.calls(out),
            Process::Sum(branches) => {
                for (_, c) in branches {
                    c.calls(out);
                }
            }
            Process::Constraint(_) => {}
        }
    }

    /// Every formula a tell or an active constraint may add to a store.
    pub fn told_formulas<'a>(&'a self, out: &mut Vec<&'a Formula>) {
        match self {
            Process::Constraint(f) => out.push(f),
            Process::Sum(branches) => {
                for (pre, cont) in branches {
                    if let Prefix::Tell(f) = pre {
                        out.push(f);
                    }
                    cont.told_formulas(out);
                }
            }
            Process::Par(p, q) => {
                p.told_formulas(out);
                q.told_formulas(out);
            }
            Process::Delim(_, p) => p.told_formulas(out),
            Process::Call(..) => {}
        }
    }
}

fn write_binder(f: &mut fmt::Formatter<'_>, a: &Ident) -> fmt::Result {
    if a.is_name() {
        write!(f, "(new {a})")
    } else {
        write!(f, "({a})")
    }
}

/// Prints a term that may stand after `.` or inside a parenthesis-free operand.
fn write_unary(f: &mut fmt::Formatter<'_>, p: &Process) -> fmt::Result {
    match p {
        Process::Sum(b) if b.len() <= 1 => write!(f, "{p}"),
        Process::Constraint(_) | Process::Call(..) => write!(f, "{p}"),
        _ => write!(f, "({p})"),
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Constraint(c) => write!(f, "{{{c}}}"),
            Process::Sum(branches) if branches.is_empty() => f.write_str("0"),
            Process::Sum(branches) => {
                for (i, (pre, cont)) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{pre}.")?;
                    write_unary(f, cont)?;
                }
                Ok(())
            }
            Process::Par(p, q) => {
                for (i, side) in [p, q].into_iter().enumerate() {
                    if i > 0 {
                        f.write_str(" || ")?;
                    }
                    write!(f, "{side}")?;
                }
                Ok(())
            }
            Process::Delim(a, p) => {
                write_binder(f, a)?;
                f.write_str(" ")?;
                match &**p {
                    Process::Par(..) => write!(f, "({p})"),
                    _ => write!(f, "{p}"),
                }
            }
            Process::Call(x, args) => {
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

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub params: Vec<Ident>,
    pub body: Process,
}

impl Definition {
    /// Body with parameters replaced by `args` and binders freshened against `supply`.
    pub fn instantiate(&self, args: &[Ident], supply: &mut FreshSupply) -> Process {
        let body = self.body.freshen_binders(supply);
        let s: Subst = self
            .params
            .iter()
            .cloned()
            .zip(args.iter().cloned())
            .filter(|(p, a)| p != a)
            .collect();
        body.subst_with(&s, supply)
    }
}

impl fmt::Display for Definition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ") := {}", self.body)
    }
}

/// Defining equations `X(params) := body`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Definitions {
    map: BTreeMap<String, Definition>,
}

impl Definitions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, def: Definition) -> Option<Definition> {
        self.map.insert(def.name.clone(), def)
    }

    pub fn get(&self, name: &str) -> Option<&Definition> {
        self.map.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.map.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Definition> {
        self.map.values()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn extend(&mut self, other: Definitions) {
        self.map.extend(other.map);
    }

    /// Labels used anywhere in the definitions.
    pub fn all_labels(&self, out: &mut BTreeSet<String>) {
        for d in self.map.values() {
            out.extend(d.params.iter().map(|p| p.label().to_string()));
            d.body.all_labels(out);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub defs: Definitions,
    pub main: Process,
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.defs.iter() {
            writeln!(f, "{d};")?;
        }
        write!(f, "main {}", self.main)
    }
}
