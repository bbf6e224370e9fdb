use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::ident::Ident;

/// Identifier-to-identifier substitution. Identity off its domain.
pub type Subst = BTreeMap<Ident, Ident>;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Ident>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Ident>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn nullary(predicate: impl Into<String>) -> Self {
        Self::new(predicate, Vec::new())
    }

    pub fn subst(&self, s: &Subst) -> Atom {
        Atom {
            predicate: self.predicate.clone(),
            args: self
                .args
                .iter()
                .map(|a| s.get(a).cloned().unwrap_or_else(|| a.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// PCL formulas. `CImp` is contractual implication.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Top,
    Bot,
    Atom(Atom),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    CImp(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(predicate: impl Into<String>, args: Vec<Ident>) -> Self {
        Formula::Atom(Atom::new(predicate, args))
    }

    pub fn prop(predicate: impl Into<String>) -> Self {
        Formula::Atom(Atom::nullary(predicate))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn imp(l: Formula, r: Formula) -> Self {
        Formula::Imp(Box::new(l), Box::new(r))
    }

    pub fn cimp(l: Formula, r: Formula) -> Self {
        Formula::CImp(Box::new(l), Box::new(r))
    }

    /// Right-nested conjunction; `Top` for an empty iterator.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut parts: Vec<Formula> = parts.into_iter().collect();
        match parts.pop() {
            None => Formula::Top,
            Some(last) => parts
                .into_iter()
                .rev()
                .fold(last, |acc, f| Formula::and(f, acc)),
        }
    }

    /// Right-nested disjunction; `Bot` for an empty iterator.
    pub fn disj(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut parts: Vec<Formula> = parts.into_iter().collect();
        match parts.pop() {
            None => Formula::Bot,
            Some(last) => parts
                .into_iter()
                .rev()
                .fold(last, |acc, f| Formula::or(f, acc)),
        }
    }

    /// Only `⊤`, `⊥`, atoms, `∧`, `∨`.
    pub fn is_positive(&self) -> bool {
        match self {
            Formula::Top | Formula::Bot | Formula::Atom(_) => true,
            Formula::And(l, r) | Formula::Or(l, r) => l.is_positive() && r.is_positive(),
            Formula::Imp(..) | Formula::CImp(..) => false,
        }
    }

    pub fn subst(&self, s: &Subst) -> Formula {
        if s.is_empty() {
            return self.clone();
        }
        match self {
            Formula::Top => Formula::Top,
            Formula::Bot => Formula::Bot,
            Formula::Atom(a) => Formula::Atom(a.subst(s)),
            Formula::And(l, r) => Formula::and(l.subst(s), r.subst(s)),
            Formula::Or(l, r) => Formula::or(l.subst(s), r.subst(s)),
            Formula::Imp(l, r) => Formula::imp(l.subst(s), r.subst(s)),
            Formula::CImp(l, r) => Formula::cimp(l.subst(s), r.subst(s)),
        }
    }

    pub fn for_each_atom<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            Formula::Top | Formula::Bot => {}
            Formula::Atom(a) => f(a),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) | Formula::CImp(l, r) => {
                l.for_each_atom(f);
                r.for_each_atom(f);
            }
        }
    }

    pub fn identifiers(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        self.for_each_atom(&mut |a| out.extend(a.args.iter().cloned()));
        out
    }

    pub fn mentions(&self, id: &Ident) -> bool {
        let mut found = false;
        self.for_each_atom(&mut |a| found |= a.args.contains(id));
        found
    }

    pub fn predicates(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.for_each_atom(&mut |a| {
            out.insert(a.predicate.clone());
        });
        out
    }

    /// Identifier occurrences in left-to-right printing order (with repeats).
    pub fn occurrences<'a>(&'a self, out: &mut Vec<&'a Ident>) {
        self.for_each_atom(&mut |a| out.extend(a.args.iter()));
    }

    /// All subformulas, including `self`.
    pub fn subformulas(&self, out: &mut BTreeSet<Formula>) {
        if !out.insert(self.clone()) {
            return;
        }
        match self {
            Formula::Top | Formula::Bot | Formula::Atom(_) => {}
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) | Formula::CImp(l, r) => {
                l.subformulas(out);
                r.subformulas(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Imp(..) | Formula::CImp(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            _ => 4,
        }
    }
}

impl From<Atom> for Formula {
    fn from(a: Atom) -> Self {
        Formula::Atom(a)
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, child: &Formula, min: u8) -> fmt::Result {
    if child.precedence() < min {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Top => f.write_str("top"),
            Formula::Bot => f.write_str("bot"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::And(l, r) => {
                write_operand(f, l, 4)?;
                f.write_str(" /\\ ")?;
                write_operand(f, r, 3)
            }
            Formula::Or(l, r) => {
                write_operand(f, l, 3)?;
                f.write_str(" \\/ ")?;
                write_operand(f, r, 2)
            }
            Formula::Imp(l, r) | Formula::CImp(l, r) => {
                let op = if matches!(self, Formula::Imp(..)) {
                    " -> "
                } else {
                    " ->> "
                };
                write_operand(f, l, 2)?;
                f.write_str(op)?;
                write_operand(f, r, 1)
            }
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// An atom or a negated atom, as used by `check`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub negated: bool,
    pub atom: Atom,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal {
            negated: false,
            atom,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal {
            negated: true,
            atom,
        }
    }

    pub fn subst(&self, s: &Subst) -> Literal {
        Literal {
            negated: self.negated,
            atom: self.atom.subst(s),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("!")?;
        }
        write!(f, "{}", self.atom)
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn subst1(from: Ident, to: Ident) -> Subst {
        [(from, to)].into_iter().collect()
    }

    #[test]
    fn substitution_is_homomorphic() {
        let x = Ident::var("x");
        let n = Ident::name("n");
        let s = subst1(x.clone(), n.clone());
        assert_eq!(
            Formula::atom("a", vec![x.clone()]).subst(&s),
            Formula::atom("a", vec![n.clone()])
        );
        let contract = Formula::cimp(
            Formula::and(
                Formula::atom("b", vec![x.clone()]),
                Formula::atom("c", vec![x.clone()]),
            ),
            Formula::atom("a", vec![x.clone()]),
        );
        let expected = Formula::cimp(
            Formula::and(
                Formula::atom("b", vec![n.clone()]),
                Formula::atom("c", vec![n.clone()]),
            ),
            Formula::atom("a", vec![n.clone()]),
        );
        assert_eq!(contract.subst(&s), expected);
        let y = Formula::atom("a", vec![Ident::var("y")]);
        assert_eq!(y.subst(&s), y);
    }

    #[test]
    fn printing_respects_precedence() {
        let f = Formula::cimp(
            Formula::and(
                Formula::prop("order"),
                Formula::or(Formula::prop("pay"), Formula::prop("ins")),
            ),
            Formula::prop("ship"),
        );
        assert_eq!(f.to_string(), "order /\\ (pay \\/ ins) ->> ship");
        let nested = Formula::cimp(
            Formula::cimp(Formula::prop("a"), Formula::prop("b")),
            Formula::prop("c"),
        );
        assert_eq!(nested.to_string(), "(a ->> b) ->> c");
    }
}
