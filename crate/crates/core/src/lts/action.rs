//! Transition labels.

use std::collections::BTreeSet;
use std::fmt;

use crate::logic::{Formula, Ident, Literal, Subst};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionKind {
    Tau,
    /// Advertised active constraints.
    Constraints(BTreeSet<Formula>),
    Ask {
        constraints: BTreeSet<Formula>,
        goal: Formula,
    },
    Fuse {
        constraints: BTreeSet<Formula>,
        subject: Ident,
        goal: Formula,
    },
    Join {
        constraints: BTreeSet<Formula>,
        subject: Ident,
        goal: Formula,
    },
    /// Consistency obligation of a `check`; the literals are part of the set.
    CheckNB {
        constraints: BTreeSet<Formula>,
        literals: Vec<Literal>,
    },
}

/// `(a..)alpha`: a kind under a set of extruded binders.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub binders: BTreeSet<Ident>,
    pub kind: ActionKind,
}

impl Action {
    pub fn tau() -> Self {
        Action {
            binders: BTreeSet::new(),
            kind: ActionKind::Tau,
        }
    }

    pub fn is_tau(&self) -> bool {
        self.kind == ActionKind::Tau
    }

    /// Identifiers of the kind, ignoring binders.
    pub fn identifiers(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        let set = |cs: &BTreeSet<Formula>, out: &mut BTreeSet<Ident>| {
            for c in cs {
                out.extend(c.identifiers());
            }
        };
        match &self.kind {
            ActionKind::Tau => {}
            ActionKind::Constraints(cs) => set(cs, &mut out),
            ActionKind::Ask { constraints, goal } => {
                set(constraints, &mut out);
                out.extend(goal.identifiers());
            }
            ActionKind::Fuse {
                constraints,
                subject,
                goal,
            }
            | ActionKind::Join {
                constraints,
                subject,
                goal,
            } => {
                set(constraints, &mut out);
                out.insert(subject.clone());
                out.extend(goal.identifiers());
            }
            ActionKind::CheckNB {
                constraints,
                literals,
            } => {
                set(constraints, &mut out);
                for l in literals {
                    out.extend(l.atom.args.iter().cloned());
                }
            }
        }
        out
    }

    /// Renames identifiers (binders included).
    pub fn rename(&self, s: &Subst) -> Action {
        let id = |i: &Ident| s.get(i).cloned().unwrap_or_else(|| i.clone());
        let set = |cs: &BTreeSet<Formula>| cs.iter().map(|c| c.subst(s)).collect();
        let kind = match &self.kind {
            ActionKind::Tau => ActionKind::Tau,
            ActionKind::Constraints(cs) => ActionKind::Constraints(set(cs)),
            ActionKind::Ask { constraints, goal } => ActionKind::Ask {
                constraints: set(constraints),
                goal: goal.subst(s),
            },
            ActionKind::Fuse {
                constraints,
                subject,
                goal,
            } => ActionKind::Fuse {
                constraints: set(constraints),
                subject: id(subject),
                goal: goal.subst(s),
            },
            ActionKind::Join {
                constraints,
                subject,
                goal,
            } => ActionKind::Join {
                constraints: set(constraints),
                subject: id(subject),
                goal: goal.subst(s),
            },
            ActionKind::CheckNB {
                constraints,
                literals,
            } => ActionKind::CheckNB {
                constraints: set(constraints),
                literals: literals.iter().map(|l| l.subst(s)).collect(),
            },
        };
        Action {
            binders: self.binders.iter().map(id).collect(),
            kind,
        }
    }
}

fn write_set(f: &mut fmt::Formatter<'_>, cs: &BTreeSet<Formula>, extra: &[Literal]) -> fmt::Result {
    f.write_str("{")?;
    let mut first = true;
    for c in cs {
        if !first {
            f.write_str(",")?;
        }
        first = false;
        write!(f, "{c}")?;
    }
    for l in extra {
        if !first {
            f.write_str(",")?;
        }
        first = false;
        write!(f, "{l}")?;
    }
    f.write_str("}")
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.binders.is_empty() {
            f.write_str("(")?;
            for (i, b) in self.binders.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{b}")?;
            }
            f.write_str(") ")?;
        }
        match &self.kind {
            ActionKind::Tau => f.write_str("tau"),
            ActionKind::Constraints(cs) => write_set(f, cs, &[]),
            ActionKind::Ask { constraints, goal } => {
                write_set(f, constraints, &[])?;
                write!(f, " |- {goal}")
            }
            ActionKind::Fuse {
                constraints,
                subject,
                goal,
            } => {
                write_set(f, constraints, &[])?;
                write!(f, " |-F_{subject} {goal}")
            }
            ActionKind::Join {
                constraints,
                subject,
                goal,
            } => {
                write_set(f, constraints, &[])?;
                write!(f, " |-J_{subject} {goal}")
            }
            ActionKind::CheckNB {
                constraints,
                literals,
            } => {
                write_set(f, constraints, literals)?;
                f.write_str(" |/- bot")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Atom;

    #[test]
    fn printer() {
        let (x, y) = (Ident::var("x"), Ident::var("y"));
        let a = Action {
            binders: [x.clone(), y.clone()].into_iter().collect(),
            kind: ActionKind::Fuse {
                constraints: [
                    Formula::atom("cA", vec![x.clone()]),
                    Formula::atom("cB", vec![y]),
                ]
                .into_iter()
                .collect(),
                subject: x.clone(),
                goal: Formula::atom("a", vec![x]),
            },
        };
        assert_eq!(a.to_string(), "(x,y) {cA(x),cB(y)} |-F_x a(x)");
        let c = Action {
            binders: BTreeSet::new(),
            kind: ActionKind::CheckNB {
                constraints: BTreeSet::new(),
                literals: vec![Literal::neg(Atom::new("paid", vec![Ident::name("n")]))],
            },
        };
        assert_eq!(c.to_string(), "{!paid(n)} |/- bot");
    }
}
