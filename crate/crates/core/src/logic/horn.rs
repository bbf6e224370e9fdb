//! Horn-fragment clauses and the entailment / consistency decision procedures.
//!
//! Entailment is a two-level fixpoint. The inner level saturates a set of atoms
//! under facts and plain implications. The outer level is a greatest fixpoint
//! over contractual implications: start from all of them, compute the inner
//! closure with their conclusions assumed, drop every contract whose premise
//! is not supported, and repeat until stable. Circular assume-guarantee
//! (`b ->> a`, `a ->> b`) survives; unsupported firing (`a ->> b` alone) does not.
//!
//! A contract may carry a guard (`g -> (p ->> q)`). Guards are activated in a
//! separate monotone loop around the greatest fixpoint, so a guard never relies
//! on the contract it enables.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use super::formula::{Atom, Formula, Literal, Subst};
use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClauseKind {
    Plain,
    Contractual,
}

/// `guard -> (premise => conclusion)` where `=>` is `->` or `->>`.
///
/// Facts are plain clauses with premise `top`. For plain clauses the guard is
/// always `top` (it is folded into the premise).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HornClause {
    pub kind: ClauseKind,
    pub guard: Formula,
    pub premise: Formula,
    pub conclusion: Vec<Atom>,
    /// The conclusion also contains `bot`.
    pub falsum: bool,
}

impl HornClause {
    pub fn fact(atom: Atom) -> Self {
        HornClause {
            kind: ClauseKind::Plain,
            guard: Formula::Top,
            premise: Formula::Top,
            conclusion: vec![atom],
            falsum: false,
        }
    }

    pub fn is_fact(&self) -> bool {
        self.kind == ClauseKind::Plain && self.premise == Formula::Top
    }

    pub fn subst(&self, s: &Subst) -> HornClause {
        HornClause {
            kind: self.kind,
            guard: self.guard.subst(s),
            premise: self.premise.subst(s),
            conclusion: self.conclusion.iter().map(|a| a.subst(s)).collect(),
            falsum: self.falsum,
        }
    }

    fn conclusion_formula(&self) -> Formula {
        let mut parts: Vec<Formula> = self.conclusion.iter().cloned().map(Formula::Atom).collect();
        if self.falsum {
            parts.push(Formula::Bot);
        }
        Formula::conj(parts)
    }

    /// Predicates this clause can derive.
    pub fn head_predicates(&self) -> impl Iterator<Item = &str> {
        self.conclusion.iter().map(|a| a.predicate.as_str())
    }
}

impl fmt::Display for HornClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = match self.kind {
            ClauseKind::Plain if self.premise == Formula::Top => self.conclusion_formula(),
            ClauseKind::Plain => Formula::imp(self.premise.clone(), self.conclusion_formula()),
            ClauseKind::Contractual => {
                Formula::cimp(self.premise.clone(), self.conclusion_formula())
            }
        };
        if self.guard == Formula::Top {
            write!(f, "{body}")
        } else {
            write!(f, "{}", Formula::imp(self.guard.clone(), body))
        }
    }
}

impl fmt::Debug for HornClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn non_horn(f: &Formula, reason: &str) -> Error {
    Error::NonHornConstraint {
        formula: f.to_string(),
        reason: reason.to_string(),
    }
}

fn conj_with(guard: &Formula, premise: &Formula) -> Formula {
    match (guard, premise) {
        (Formula::Top, p) => p.clone(),
        (g, Formula::Top) => g.clone(),
        (g, p) => Formula::and(g.clone(), p.clone()),
    }
}

/// Splits a conjunction of atoms (with `top`/`bot`) into its atoms.
fn conclusion_atoms(f: &Formula, atoms: &mut Vec<Atom>, falsum: &mut bool) -> bool {
    match f {
        Formula::Top => true,
        Formula::Bot => {
            *falsum = true;
            true
        }
        Formula::Atom(a) => {
            atoms.push(a.clone());
            true
        }
        Formula::And(l, r) => {
            conclusion_atoms(l, atoms, falsum) && conclusion_atoms(r, atoms, falsum)
        }
        _ => false,
    }
}

/// Turns a constraint into Horn clauses.
///
/// Accepts conjunctions of facts, plain implications, and contractual
/// implications whose premises are positive and whose conclusions are
/// conjunctions of atoms. A plain implication may conclude another clause
/// (`g -> (p ->> q)`, `p -> q -> r`); its premise becomes a guard.
pub fn normalize_constraint(f: &Formula) -> Result<Vec<HornClause>, Error> {
    let mut out = Vec::new();
    normalize_into(f, f, &Formula::Top, &mut out)?;
    Ok(out)
}

fn normalize_into(
    root: &Formula,
    f: &Formula,
    guard: &Formula,
    out: &mut Vec<HornClause>,
) -> Result<(), Error> {
    match f {
        Formula::Top => Ok(()),
        Formula::Bot => {
            out.push(HornClause {
                kind: ClauseKind::Plain,
                guard: Formula::Top,
                premise: guard.clone(),
                conclusion: Vec::new(),
                falsum: true,
            });
            Ok(())
        }
        Formula::Atom(a) => {
            out.push(HornClause {
                kind: ClauseKind::Plain,
                guard: Formula::Top,
                premise: guard.clone(),
                conclusion: vec![a.clone()],
                falsum: false,
            });
            Ok(())
        }
        Formula::And(l, r) => {
            normalize_into(root, l, guard, out)?;
            normalize_into(root, r, guard, out)
        }
        Formula::Or(..) => Err(non_horn(root, "disjunction in a conclusion")),
        Formula::Imp(p, c) => {
            if !p.is_positive() {
                return Err(non_horn(root, "implication nested inside a premise"));
            }
            normalize_into(root, c, &conj_with(guard, p), out)
        }
        Formula::CImp(p, c) => {
            if !p.is_positive() {
                return Err(non_horn(root, "implication nested inside a premise"));
            }
            let mut atoms = Vec::new();
            let mut falsum = false;
            if !conclusion_atoms(c, &mut atoms, &mut falsum) {
                return Err(non_horn(
                    root,
                    "contractual conclusion must be a conjunction of atoms",
                ));
            }
            out.push(HornClause {
                kind: ClauseKind::Contractual,
                guard: guard.clone(),
                premise: (**p).clone(),
                conclusion: atoms,
                falsum,
            });
            Ok(())
        }
    }
}

/// A finite set of Horn clauses.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Theory {
    clauses: Vec<HornClause>,
}

impl Theory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_clauses(clauses: impl IntoIterator<Item = HornClause>) -> Self {
        let mut t = Theory::new();
        for c in clauses {
            t.add(c);
        }
        t
    }

    /// Normalizes and collects every formula.
    pub fn from_formulas<'a>(fs: impl IntoIterator<Item = &'a Formula>) -> Result<Self, Error> {
        let mut t = Theory::new();
        for f in fs {
            t.add_formula(f)?;
        }
        Ok(t)
    }

    pub fn add(&mut self, c: HornClause) {
        if !self.clauses.contains(&c) {
            self.clauses.push(c);
        }
    }

    pub fn add_formula(&mut self, f: &Formula) -> Result<(), Error> {
        for c in normalize_constraint(f)? {
            self.add(c);
        }
        Ok(())
    }

    pub fn add_atom(&mut self, a: Atom) {
        self.add(HornClause::fact(a));
    }

    pub fn clauses(&self) -> &[HornClause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn subst(&self, s: &Subst) -> Theory {
        Theory::from_clauses(self.clauses.iter().map(|c| c.subst(s)))
    }

    pub fn union(&self, other: &Theory) -> Theory {
        let mut t = self.clone();
        for c in &other.clauses {
            t.add(c.clone());
        }
        t
    }

    /// Saturates the theory; see the module docs.
    pub fn closure(&self) -> Closure {
        let plain: Vec<&HornClause> = self
            .clauses
            .iter()
            .filter(|c| c.kind == ClauseKind::Plain)
            .collect();
        let mut active: Vec<&HornClause> = Vec::new();
        let mut pending: Vec<&HornClause> = Vec::new();
        for c in self.clauses.iter().filter(|c| c.kind == ClauseKind::Contractual) {
            if c.guard == Formula::Top {
                active.push(c);
            } else {
                pending.push(c);
            }
        }
        loop {
            let mut fired = active.clone();
            let closure = loop {
                let closure = inner_closure(&plain, &fired);
                let before = fired.len();
                fired.retain(|c| closure.holds(&c.premise));
                if fired.len() == before {
                    break closure;
                }
            };
            let (now, later): (Vec<&HornClause>, Vec<&HornClause>) =
                pending.into_iter().partition(|c| closure.holds(&c.guard));
            if now.is_empty() {
                return closure;
            }
            active.extend(now);
            pending = later;
        }
    }

    /// Contracts whose guards are established; the ones a caller may reason with.
    pub fn active_contracts(&self) -> Vec<&HornClause> {
        let closure = self.closure();
        self.clauses
            .iter()
            .filter(|c| c.kind == ClauseKind::Contractual && closure.holds(&c.guard))
            .collect()
    }

    /// The contracts that survive the greatest fixpoint.
    pub fn fired_contracts(&self) -> Vec<&HornClause> {
        let closure = self.closure();
        self.clauses
            .iter()
            .filter(|c| {
                c.kind == ClauseKind::Contractual
                    && closure.holds(&c.guard)
                    && closure.holds(&c.premise)
            })
            .collect()
    }

    pub fn entails(&self, goal: &Formula) -> bool {
        prove(self, goal)
    }

    pub fn entails_bot(&self) -> bool {
        self.closure().bot
    }
}

fn inner_closure(plain: &[&HornClause], fired: &[&HornClause]) -> Closure {
    let mut c = Closure::default();
    for k in fired {
        c.atoms.extend(k.conclusion.iter().cloned());
        c.bot |= k.falsum;
    }
    let mut done = vec![false; plain.len()];
    loop {
        let mut changed = false;
        for (i, k) in plain.iter().enumerate() {
            if !done[i] && c.holds(&k.premise) {
                done[i] = true;
                changed = true;
                c.atoms.extend(k.conclusion.iter().cloned());
                c.bot |= k.falsum;
            }
        }
        if !changed {
            return c;
        }
    }
}

/// The saturated set of atoms of a theory.
#[derive(Clone, Debug, Default)]
pub struct Closure {
    pub atoms: HashSet<Atom>,
    pub bot: bool,
}

impl Closure {
    /// Evaluates a positive formula. Non-positive formulas evaluate to `false`
    /// unless the closure is inconsistent.
    pub fn holds(&self, f: &Formula) -> bool {
        if self.bot {
            return true;
        }
        match f {
            Formula::Top => true,
            Formula::Bot => false,
            Formula::Atom(a) => self.atoms.contains(a),
            Formula::And(l, r) => self.holds(l) && self.holds(r),
            Formula::Or(l, r) => self.holds(l) || self.holds(r),
            Formula::Imp(..) | Formula::CImp(..) => false,
        }
    }
}

/// Case split of a hypothesis into theories (one per disjunct it cannot absorb).
fn assume(t: &Theory, h: &Formula) -> Option<Vec<Theory>> {
    if let Ok(clauses) = normalize_constraint(h) {
        let mut t = t.clone();
        for c in clauses {
            t.add(c);
        }
        return Some(vec![t]);
    }
    match h {
        Formula::Or(l, r) => {
            let mut cases = assume(t, l)?;
            cases.extend(assume(t, r)?);
            Some(cases)
        }
        Formula::And(l, r) => {
            let mut out = Vec::new();
            for case in assume(t, l)? {
                out.extend(assume(&case, r)?);
            }
            Some(out)
        }
        _ => None,
    }
}

fn prove_under(t: &Theory, h: &Formula, goal: &Formula) -> bool {
    match assume(t, h) {
        Some(cases) => cases.iter().all(|case| prove(case, goal)),
        None => false,
    }
}

fn prove(t: &Theory, goal: &Formula) -> bool {
    if goal.is_positive() {
        return t.closure().holds(goal);
    }
    if t.entails_bot() {
        return true;
    }
    match goal {
        Formula::And(l, r) => prove(t, l) && prove(t, r),
        Formula::Or(l, r) => prove(t, l) || prove(t, r),
        Formula::Imp(h, g) => prove_under(t, h, g),
        Formula::CImp(p, q) => {
            // q -> (p ->> q), and (p' -> p) -> (p ->> q) -> (q -> q') -> (p' ->> q')
            // with the middle contract taken from the theory.
            if prove(t, q) {
                return true;
            }
            t.active_contracts().into_iter().any(|c| {
                prove_under(t, p, &c.premise) && prove_under(t, &c.conclusion_formula(), q)
            })
        }
        _ => unreachable!("positive goals handled above"),
    }
}

/// `theory ⊢ goal` on the Horn fragment.
pub fn entails(theory: &Theory, goal: &Formula) -> bool {
    theory.entails(goal)
}

/// True iff `theory` plus the positive literals of `extra` derives neither `bot`
/// nor any atom negated in `extra`. Negation is non-derivability.
pub fn consistent(theory: &Theory, extra: &[Literal]) -> bool {
    let mut t = theory.clone();
    for l in extra.iter().filter(|l| !l.negated) {
        t.add_atom(l.atom.clone());
    }
    let closure = t.closure();
    if closure.bot {
        return false;
    }
    extra
        .iter()
        .filter(|l| l.negated)
        .all(|l| !closure.atoms.contains(&l.atom))
}

/// Predicates that may contribute to deriving `goal_preds` (backward cone),
/// including everything that can derive `bot`.
pub fn relevant_predicates(theory: &Theory, goal_preds: &BTreeSet<String>) -> BTreeSet<String> {
    let mut cone = goal_preds.clone();
    loop {
        let mut changed = false;
        for c in theory.clauses() {
            let feeds = c.falsum || c.head_predicates().any(|p| cone.contains(p));
            if feeds {
                for p in c.premise.predicates().into_iter().chain(c.guard.predicates()) {
                    changed |= cone.insert(p);
                }
            }
        }
        if !changed {
            return cone;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::{parse_formula, parse_theory};

    fn theory(src: &str) -> Theory {
        Theory::from_formulas(parse_theory(src).unwrap().iter()).unwrap()
    }

    fn goal(src: &str) -> Formula {
        parse_formula(src).unwrap()
    }

    #[test]
    fn normalize_top_is_empty() {
        assert!(normalize_constraint(&Formula::Top).unwrap().is_empty());
    }

    #[test]
    fn normalize_insured_sale_contract() {
        let f = goal("order(x) /\\ (pay(x) \\/ insurance(x)) ->> ship(x)");
        let cs = normalize_constraint(&f).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].kind, ClauseKind::Contractual);
        assert_eq!(cs[0].conclusion, vec![Atom::new("ship", vec![crate::Ident::name("x")])]);
    }

    #[test]
    fn normalize_rejects_nested_contract() {
        let err = normalize_constraint(&goal("(a ->> b) ->> c")).unwrap_err();
        assert!(matches!(err, Error::NonHornConstraint { .. }));
        assert!(normalize_constraint(&goal("a \\/ b")).is_err());
        assert!(normalize_constraint(&goal("a ->> b \\/ c")).is_err());
    }

    #[test]
    fn normalize_guarded_contract() {
        let cs = normalize_constraint(&goal("r(o,z) -> (p ->> q)")).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].guard, goal("r(o,z)"));
        let cs = normalize_constraint(&goal("r(o,z) -> a /\\ b")).unwrap();
        assert_eq!(cs.len(), 2);
        assert!(cs.iter().all(|c| c.kind == ClauseKind::Plain && c.premise == goal("r(o,z)")));
    }

    #[test]
    fn circular_contracts_agree() {
        assert!(theory("b ->> a. a ->> b.").entails(&goal("a /\\ b")));
        assert!(theory("a ->> a.").entails(&goal("a")));
        assert!(!theory("a ->> b.").entails(&goal("b")));
    }

    #[test]
    fn handshake_agreement() {
        let t = theory(
            "b(n) /\\ c(n) ->> a(n). a(n) /\\ c(n) ->> b(n). a(n) /\\ b(n) ->> c(n).",
        );
        assert!(t.entails(&goal("a(n) /\\ b(n) /\\ c(n)")));
        let two = theory("b(n) /\\ c(n) ->> a(n). a(n) /\\ c(n) ->> b(n).");
        assert!(!two.entails(&goal("a(n)")));
    }

    #[test]
    fn contract_with_plain_feedback() {
        assert!(theory("a ->> b. b -> a.").entails(&goal("b")));
        assert!(!theory("a ->> b. b ->> c.").entails(&goal("c")));
    }

    #[test]
    fn guard_does_not_support_itself() {
        assert!(!theory("r -> (top ->> r).").entails(&goal("r")));
        assert!(theory("r. r -> (top ->> s).").entails(&goal("s")));
        assert!(!theory("r(o,z1). r(o,z2) -> (top ->> s).").entails(&goal("s")));
    }

    #[test]
    fn explosion() {
        let t = theory("a. a -> bot.");
        assert!(t.entails(&goal("zzz(q)")));
        assert!(t.entails(&goal("bot")));
        assert!(!theory("a.").entails(&goal("bot")));
    }

    #[test]
    fn axiom_schemata_as_goals() {
        let empty = Theory::new();
        assert!(empty.entails(&goal("top ->> top")));
        assert!(empty.entails(&goal("(p ->> p) -> p")));
        assert!(empty.entails(&goal("(p1 -> p) -> (p ->> q) -> (q -> q1) -> (p1 ->> q1)")));
        assert!(!empty.entails(&goal("p ->> q")));
        assert!(empty.entails(&goal("q -> (p ->> q)")));
    }

    #[test]
    fn disjunctive_goals_at_atoms() {
        let t = theory("a.");
        assert!(t.entails(&goal("a \\/ b")));
        assert!(!t.entails(&goal("b \\/ c")));
    }

    #[test]
    fn consistency_with_negative_literals() {
        let paid = Atom::new("paid", vec![crate::Ident::name("n")]);
        assert!(!consistent(&theory("paid(n)."), &[Literal::neg(paid.clone())]));
        assert!(consistent(&Theory::new(), &[Literal::neg(paid.clone())]));
        assert!(!consistent(&theory("a -> bot."), &[Literal::pos(Atom::nullary("a"))]));
    }

    #[test]
    fn judge_store_is_consistent_with_missing_shipment() {
        let t = theory(
            "send(n) ->> pay(n). pay(n) ->> send(n). paid(n). dispute(n).",
        );
        assert!(t.entails(&goal("send(n) /\\ dispute(n)")));
        let sent = Atom::new("sent", vec![crate::Ident::name("n")]);
        assert!(consistent(&t, &[Literal::neg(sent)]));
    }
}
