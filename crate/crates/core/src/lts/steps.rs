//! Compositional derivation of labelled transitions.
//!
//! Every node yields one constraint advertisement, the tentative actions of
//! its prefixes completed with the constraints of its siblings, and its
//! silent steps. Binders occurring in a label, and names occurring in the
//! process, are extruded into the label; the others stay in the successor. Tentative actions are closed into silent
//! steps wherever their label grows.

use std::collections::BTreeSet;

use super::action::{Action, ActionKind};
use crate::logic::{consistent, Formula, FreshSupply, Ident, IdentKind, Literal, Subst, Theory};
use crate::process::{Definitions, Prefix, Process};
use crate::reduction::{join_instantiations, local_minimal_fusions};

/// A transition `p --action--> successor`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelledStep {
    pub action: Action,
    pub successor: Process,
}

/// Side condition used when closing fuse actions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FuseRule {
    #[default]
    LocalMinimal,
    /// Deliberately wrong: fuses the subject alone, unconditionally.
    SubjectOnly,
}

const UNFOLD_LIMIT: usize = 64;

#[derive(Clone, Debug)]
enum Kind {
    Ask(Formula),
    Fuse(Ident, Formula),
    Join(Ident, Formula),
    Check(Vec<Literal>),
}

impl Kind {
    fn mentions(&self, a: &Ident) -> bool {
        match self {
            Kind::Ask(c) => c.mentions(a),
            Kind::Fuse(x, c) | Kind::Join(x, c) => x == a || c.mentions(a),
            Kind::Check(ls) => ls.iter().any(|l| l.atom.args.contains(a)),
        }
    }
}

#[derive(Clone, Debug)]
struct Pending {
    binders: Vec<Ident>,
    constraints: Vec<Formula>,
    kind: Kind,
    succ: Process,
    /// The label grew at the current node.
    changed: bool,
}

impl Pending {
    fn mentions(&self, a: &Ident) -> bool {
        self.kind.mentions(a) || self.constraints.iter().any(|c| c.mentions(a))
    }

    fn action(&self) -> Action {
        let constraints: BTreeSet<Formula> = self.constraints.iter().cloned().collect();
        let kind = match &self.kind {
            Kind::Ask(c) => ActionKind::Ask {
                constraints,
                goal: c.clone(),
            },
            Kind::Fuse(x, c) => ActionKind::Fuse {
                constraints,
                subject: x.clone(),
                goal: c.clone(),
            },
            Kind::Join(x, c) => ActionKind::Join {
                constraints,
                subject: x.clone(),
                goal: c.clone(),
            },
            Kind::Check(ls) => ActionKind::CheckNB {
                constraints,
                literals: ls.clone(),
            },
        };
        Action {
            binders: self.binders.iter().cloned().collect(),
            kind,
        }
    }
}

#[derive(Clone, Debug)]
struct Advert {
    binders: Vec<Ident>,
    constraints: Vec<Formula>,
    succ: Process,
}

struct Derived {
    advert: Advert,
    pending: Vec<Pending>,
    taus: Vec<Process>,
}

struct Deriver<'a> {
    defs: &'a Definitions,
    supply: FreshSupply,
    fuse_rule: FuseRule,
}

impl Deriver<'_> {
    fn derive(&mut self, p: &Process, unfolds: usize) -> Derived {
        match p {
            Process::Constraint(u) => Derived {
                advert: Advert {
                    binders: Vec::new(),
                    constraints: vec![u.clone()],
                    succ: p.clone(),
                },
                pending: Vec::new(),
                taus: Vec::new(),
            },
            Process::Sum(branches) => {
                let mut pending = Vec::new();
                let mut taus = Vec::new();
                for (pre, cont) in branches {
                    let kind = match pre {
                        Prefix::Tau => {
                            taus.push(cont.clone());
                            continue;
                        }
                        Prefix::Tell(c) => {
                            taus.push(Process::par(Process::Constraint(c.clone()), cont.clone()));
                            continue;
                        }
                        Prefix::Ask(c) => Kind::Ask(c.clone()),
                        Prefix::Check(ls) => Kind::Check(ls.clone()),
                        Prefix::Fuse(x, c) => Kind::Fuse(x.clone(), c.clone()),
                        Prefix::Join(x, c) => Kind::Join(x.clone(), c.clone()),
                    };
                    pending.push(Pending {
                        binders: Vec::new(),
                        constraints: Vec::new(),
                        kind,
                        succ: cont.clone(),
                        changed: true,
                    });
                }
                let mut d = Derived {
                    advert: Advert {
                        binders: Vec::new(),
                        constraints: Vec::new(),
                        succ: p.clone(),
                    },
                    pending,
                    taus,
                };
                self.close(&mut d);
                d
            }
            Process::Call(x, args) => match self.defs.get(x) {
                Some(def) if unfolds < UNFOLD_LIMIT && def.params.len() == args.len() => {
                    let body = def.instantiate(args, &mut self.supply);
                    self.derive(&body, unfolds + 1)
                }
                _ => Derived {
                    advert: Advert {
                        binders: Vec::new(),
                        constraints: Vec::new(),
                        succ: p.clone(),
                    },
                    pending: Vec::new(),
                    taus: Vec::new(),
                },
            },
            Process::Par(l, r) => {
                let dl = self.derive(l, unfolds);
                let dr = self.derive(r, unfolds);
                // A label grows when the sibling brings a binder or a new constraint.
                let grows = |a: &Advert, t: &Pending| {
                    !a.binders.is_empty() || a.constraints.iter().any(|c| !t.constraints.contains(c))
                };
                let mut pending = Vec::new();
                for t in dl.pending {
                    pending.push(Pending {
                        changed: grows(&dr.advert, &t),
                        binders: [t.binders, dr.advert.binders.clone()].concat(),
                        constraints: union(t.constraints, &dr.advert.constraints),
                        succ: Process::par(t.succ, dr.advert.succ.clone()),
                        kind: t.kind,
                    });
                }
                for t in dr.pending {
                    pending.push(Pending {
                        changed: grows(&dl.advert, &t),
                        binders: [dl.advert.binders.clone(), t.binders].concat(),
                        constraints: union(t.constraints, &dl.advert.constraints),
                        succ: Process::par(dl.advert.succ.clone(), t.succ),
                        kind: t.kind,
                    });
                }
                let mut taus: Vec<Process> = dl
                    .taus
                    .into_iter()
                    .map(|t| Process::par(t, (**r).clone()))
                    .collect();
                taus.extend(dr.taus.into_iter().map(|t| Process::par((**l).clone(), t)));
                let mut d = Derived {
                    advert: Advert {
                        binders: [dl.advert.binders, dr.advert.binders].concat(),
                        constraints: union(dl.advert.constraints, &dr.advert.constraints),
                        succ: Process::par(dl.advert.succ, dr.advert.succ),
                    },
                    pending,
                    taus,
                };
                self.close(&mut d);
                d
            }
            Process::Delim(a, body) => {
                let inner = self.derive(body, unfolds);
                // Live names are always extruded so that they can serve as join targets.
                let live_name = a.is_name() && body.occurs_free(a);
                let mut advert = inner.advert;
                if live_name || advert.constraints.iter().any(|c| c.mentions(a)) {
                    advert.binders.push(a.clone());
                } else {
                    advert.succ = Process::delim(a.clone(), advert.succ);
                }
                let mut pending = Vec::new();
                for mut t in inner.pending {
                    if live_name || t.mentions(a) {
                        t.binders.push(a.clone());
                        t.changed = true;
                    } else {
                        t.succ = Process::delim(a.clone(), t.succ);
                        t.changed = false;
                    }
                    pending.push(t);
                }
                let taus = inner
                    .taus
                    .into_iter()
                    .map(|t| Process::delim(a.clone(), t))
                    .collect();
                let mut d = Derived {
                    advert,
                    pending,
                    taus,
                };
                self.close(&mut d);
                d
            }
        }
    }

    /// Close rules for the tentative actions whose label grew here.
    fn close(&mut self, d: &mut Derived) {
        for t in &d.pending {
            if !t.changed {
                continue;
            }
            match &t.kind {
                Kind::Ask(c) => {
                    if theory(&t.constraints).entails(c) {
                        d.taus.push(Process::delim_all(t.binders.clone(), t.succ.clone()));
                    }
                }
                Kind::Fuse(x, c) => {
                    if !t.binders.contains(x) {
                        continue;
                    }
                    let n = self.supply.fresh(IdentKind::Name);
                    let domains: Vec<BTreeSet<Ident>> = match self.fuse_rule {
                        FuseRule::LocalMinimal => {
                            let candidates: BTreeSet<Ident> =
                                t.binders.iter().filter(|b| b.is_var()).cloned().collect();
                            local_minimal_fusions(&t.constraints, c, x, &candidates, &n)
                                .into_iter()
                                .map(|lf| lf.fusion.domain)
                                .collect()
                        }
                        FuseRule::SubjectOnly => vec![BTreeSet::from([x.clone()])],
                    };
                    for z in domains {
                        let s: Subst = z.iter().map(|v| (v.clone(), n.clone())).collect();
                        let mut binders: Vec<Ident> =
                            t.binders.iter().filter(|b| !z.contains(b)).cloned().collect();
                        binders.push(n.clone());
                        let succ = t.succ.subst_with(&s, &mut self.supply);
                        d.taus.push(Process::delim_all(binders, succ));
                    }
                }
                Kind::Join(x, c) => {
                    if !t.binders.contains(x) {
                        continue;
                    }
                    let names: BTreeSet<Ident> =
                        t.binders.iter().filter(|b| b.is_name()).cloned().collect();
                    for n in join_instantiations(&t.constraints, c, x, &names) {
                        let s: Subst = [(x.clone(), n)].into_iter().collect();
                        let binders: Vec<Ident> =
                            t.binders.iter().filter(|b| *b != x).cloned().collect();
                        let succ = t.succ.subst_with(&s, &mut self.supply);
                        d.taus.push(Process::delim_all(binders, succ));
                    }
                }
                Kind::Check(_) => {}
            }
        }
    }
}

fn theory(constraints: &[Formula]) -> Theory {
    Theory::from_formulas(constraints).unwrap_or_default()
}

fn derive_root(p: &Process, defs: &Definitions, fuse_rule: FuseRule) -> Derived {
    let mut supply = p.fresh_supply();
    let mut labels = BTreeSet::new();
    defs.all_labels(&mut labels);
    for l in labels {
        supply.reserve(l);
    }
    let p = p.freshen_binders(&mut supply);
    let mut deriver = Deriver {
        defs,
        supply,
        fuse_rule,
    };
    deriver.derive(&p, 0)
}

/// Every labelled transition of `p`, up to where binders absent from the
/// label are placed.
pub fn labelled_steps(p: &Process, defs: &Definitions) -> Vec<LabelledStep> {
    labelled_steps_with(p, defs, FuseRule::default())
}

pub fn labelled_steps_with(p: &Process, defs: &Definitions, fuse_rule: FuseRule) -> Vec<LabelledStep> {
    let d = derive_root(p, defs, fuse_rule);
    let mut out = vec![LabelledStep {
        action: Action {
            binders: d.advert.binders.iter().cloned().collect(),
            kind: ActionKind::Constraints(d.advert.constraints.iter().cloned().collect()),
        },
        successor: d.advert.succ,
    }];
    out.extend(d.pending.iter().map(|t| LabelledStep {
        action: t.action(),
        successor: t.succ.clone(),
    }));
    out.extend(d.taus.into_iter().map(|succ| LabelledStep {
        action: Action::tau(),
        successor: succ,
    }));
    out
}

/// Successors under the top-level relation: silent steps, and checks whose
/// label is consistent.
pub fn top_steps(p: &Process, defs: &Definitions) -> Vec<Process> {
    top_steps_with(p, defs, FuseRule::default())
}

pub fn top_steps_with(p: &Process, defs: &Definitions, fuse_rule: FuseRule) -> Vec<Process> {
    let d = derive_root(p, defs, fuse_rule);
    let mut out = d.taus;
    for t in &d.pending {
        if let Kind::Check(ls) = &t.kind {
            if consistent(&theory(&t.constraints), ls) {
                out.push(Process::delim_all(t.binders.clone(), t.succ.clone()));
            }
        }
    }
    out
}

/// `a` extended with the formulas of `b` it lacks.
fn union(mut a: Vec<Formula>, b: &[Formula]) -> Vec<Formula> {
    for f in b {
        if !a.contains(f) {
            a.push(f.clone());
        }
    }
    a
}
