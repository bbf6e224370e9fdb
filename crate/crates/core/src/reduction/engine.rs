//! Redexes over normal forms and their application.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::fusion::{join_instantiations, local_minimal_fusions, Fusion};
use crate::error::{Error, Result};
use crate::logic::{consistent, Formula, FreshSupply, Ident, IdentKind, Subst, Theory};
use crate::process::{to_normal_form, Agent, Definitions, NormalForm, Prefix, Process};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rule {
    Tau,
    Tell,
    Ask,
    Check,
    Fuse,
    Join,
}

impl Rule {
    pub fn of(prefix: &Prefix) -> Rule {
        match prefix {
            Prefix::Tau => Rule::Tau,
            Prefix::Tell(_) => Rule::Tell,
            Prefix::Ask(_) => Rule::Ask,
            Prefix::Check(_) => Rule::Check,
            Prefix::Fuse(..) => Rule::Fuse,
            Prefix::Join(..) => Rule::Join,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One way a normal form can reduce.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Redex {
    pub rule: Rule,
    /// Index into `NormalForm::agents`.
    pub agent: usize,
    /// Summand of that agent.
    pub branch: usize,
    pub fusion: Option<Fusion>,
    /// `(x, n)`: the joined variable and the delimited name it becomes.
    pub join: Option<(Ident, Ident)>,
    /// Active constraints used by Ask, Fuse and Join.
    pub witness: Option<Vec<Formula>>,
}

impl Redex {
    fn plain(rule: Rule, agent: usize, branch: usize) -> Self {
        Redex {
            rule,
            agent,
            branch,
            fusion: None,
            join: None,
            witness: None,
        }
    }
}

impl fmt::Display for Redex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @{}.{}", self.rule, self.agent, self.branch)?;
        if let Some(s) = &self.fusion {
            write!(f, " {s}")?;
        }
        if let Some((x, n)) = &self.join {
            write!(f, " {{{x} -> {n}}}")?;
        }
        Ok(())
    }
}

fn store_theory(nf: &NormalForm) -> Theory {
    // Stores only hold constraints accepted by the reader or the constructors.
    Theory::from_formulas(&nf.store).unwrap_or_default()
}

fn binder_vars(nf: &NormalForm) -> BTreeSet<Ident> {
    nf.binders.iter().filter(|b| b.is_var()).cloned().collect()
}

fn binder_names(nf: &NormalForm) -> BTreeSet<Ident> {
    nf.binders.iter().filter(|b| b.is_name()).cloned().collect()
}

/// A name label unused in `nf` and in `defs`.
fn fresh_name(nf: &NormalForm, defs: &Definitions) -> Ident {
    let mut supply = nf.to_process().fresh_supply();
    let mut labels = BTreeSet::new();
    defs.all_labels(&mut labels);
    for l in labels {
        supply.reserve(l);
    }
    supply.fresh(IdentKind::Name)
}

/// Every redex of `nf`, in agent/branch order.
pub fn enabled_redexes(nf: &NormalForm, defs: &Definitions) -> Vec<Redex> {
    let mut out = Vec::new();
    let mut theory: Option<Theory> = None;
    let mut target: Option<Ident> = None;
    for (i, agent) in nf.agents.iter().enumerate() {
        for (j, (pre, _)) in agent.branches().iter().enumerate() {
            match pre {
                Prefix::Tau => out.push(Redex::plain(Rule::Tau, i, j)),
                Prefix::Tell(_) => out.push(Redex::plain(Rule::Tell, i, j)),
                Prefix::Ask(c) => {
                    let t = theory.get_or_insert_with(|| store_theory(nf));
                    if t.entails(c) {
                        out.push(Redex {
                            witness: Some(nf.store.clone()),
                            ..Redex::plain(Rule::Ask, i, j)
                        });
                    }
                }
                Prefix::Check(ls) => {
                    let t = theory.get_or_insert_with(|| store_theory(nf));
                    if consistent(t, ls) {
                        out.push(Redex::plain(Rule::Check, i, j));
                    }
                }
                Prefix::Fuse(x, c) => {
                    if !nf.binders.contains(x) {
                        continue;
                    }
                    let n = target.get_or_insert_with(|| fresh_name(nf, defs)).clone();
                    for lf in local_minimal_fusions(&nf.store, c, x, &binder_vars(nf), &n) {
                        out.push(Redex {
                            fusion: Some(lf.fusion),
                            witness: Some(lf.witness),
                            ..Redex::plain(Rule::Fuse, i, j)
                        });
                    }
                }
                Prefix::Join(x, c) => {
                    if !nf.binders.contains(x) {
                        continue;
                    }
                    for n in join_instantiations(&nf.store, c, x, &binder_names(nf)) {
                        out.push(Redex {
                            join: Some((x.clone(), n)),
                            witness: Some(nf.store.clone()),
                            ..Redex::plain(Rule::Join, i, j)
                        });
                    }
                }
            }
        }
    }
    out
}

/// Applies a redex after checking that it is enabled in `nf`.
pub fn apply(nf: &NormalForm, r: &Redex, defs: &Definitions) -> Result<NormalForm> {
    let stale = |why: &str| Error::StaleRedex(format!("{r}: {why}"));
    let agent = nf.agents.get(r.agent).ok_or_else(|| stale("no such agent"))?;
    let (pre, _) = agent
        .branches()
        .get(r.branch)
        .ok_or_else(|| stale("no such branch"))?;
    if Rule::of(pre) != r.rule {
        return Err(stale("prefix does not match the rule"));
    }
    let enabled = enabled_redexes(nf, defs).into_iter().any(|e| {
        e.agent == r.agent
            && e.branch == r.branch
            && e.join == r.join
            && e.fusion.as_ref().map(|f| &f.domain) == r.fusion.as_ref().map(|f| &f.domain)
    });
    if !enabled {
        return Err(stale("side condition does not hold"));
    }
    if let Some(f) = &r.fusion {
        let mut used = BTreeSet::new();
        nf.to_process().all_labels(&mut used);
        if used.contains(f.target.label()) {
            return Err(stale("fusion target is not fresh"));
        }
    }
    Ok(apply_unchecked(nf, r, defs))
}

/// Applies a redex produced by [`enabled_redexes`] on the same state.
pub(crate) fn apply_unchecked(nf: &NormalForm, r: &Redex, defs: &Definitions) -> NormalForm {
    let Agent::Sum(branches) = &nf.agents[r.agent] else {
        unreachable!("redexes point at sums")
    };
    let (pre, cont) = &branches[r.branch];
    let mut items: Vec<Process> = nf.store.iter().cloned().map(Process::Constraint).collect();
    if let Prefix::Tell(c) = pre {
        items.push(Process::Constraint(c.clone()));
    }
    for (k, a) in nf.agents.iter().enumerate() {
        if k != r.agent {
            items.push(a.to_process());
        }
    }
    items.push(cont.clone());
    let mut body = Process::par_all(items);
    let mut binders = nf.binders.clone();
    let mut s = Subst::new();
    if let Some(f) = &r.fusion {
        binders.retain(|b| !f.domain.contains(b));
        binders.push(f.target.clone());
        s = f.subst();
    }
    if let Some((x, n)) = &r.join {
        binders.retain(|b| b != x);
        s.insert(x.clone(), n.clone());
    }
    if !s.is_empty() {
        let mut supply: FreshSupply = body.fresh_supply();
        for (k, v) in &s {
            supply.reserve(k.label());
            supply.reserve(v.label());
        }
        body = body.subst_with(&s, &mut supply);
    }
    to_normal_form(&Process::delim_all(binders, body), defs)
}

/// All successors of `nf`, paired with the redex producing each.
pub fn successors(nf: &NormalForm, defs: &Definitions) -> Vec<(Redex, NormalForm)> {
    enabled_redexes(nf, defs)
        .into_iter()
        .map(|r| {
            let next = apply_unchecked(nf, &r, defs);
            (r, next)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::parse_program;

    fn load(src: &str) -> (NormalForm, Definitions) {
        let p = parse_program(src).unwrap();
        (to_normal_form(&p.main, &p.defs), p.defs)
    }

    const HANDSHAKE: &str = "
        Alice() := (x)(tell((b(x) /\\ c(x)) ->> a(x)).fuse(x, a(x)).lendA(x)) ;
        Bob() := (y)(tell((a(y) /\\ c(y)) ->> b(y)).fuse(y, b(y)).lendB(y)) ;
        Carl() := (z)(tell((a(z) /\\ b(z)) ->> c(z)).fuse(z, c(z)).lendC(z)) ;
        main Alice() || Bob() || Carl()";

    fn run_tells(mut nf: NormalForm, defs: &Definitions) -> NormalForm {
        while let Some(r) = enabled_redexes(&nf, defs).into_iter().find(|r| r.rule == Rule::Tell) {
            nf = apply(&nf, &r, defs).unwrap();
        }
        nf
    }

    #[test]
    fn handshake_fuses_all_three() {
        let (nf, defs) = load(HANDSHAKE);
        let nf = run_tells(nf, &defs);
        assert_eq!(nf.store.len(), 3);
        let rs = enabled_redexes(&nf, &defs);
        assert_eq!(rs.len(), 3, "{rs:?}");
        assert!(rs.iter().all(|r| r.rule == Rule::Fuse && r.fusion.as_ref().unwrap().domain.len() == 3));
        let next = apply(&nf, &rs[0], &defs).unwrap();
        assert_eq!(next.binders.len(), 1);
        assert!(next.binders[0].is_name());
        let asks = enabled_redexes(&next, &defs);
        assert_eq!(asks.len(), 2);
        assert!(asks.iter().all(|r| r.rule == Rule::Ask));
    }

    #[test]
    fn stale_redex_rejected() {
        let (nf, defs) = load("main ask(a).0 || tau.0");
        let mut r = enabled_redexes(&nf, &defs).pop().unwrap();
        assert_eq!(r.rule, Rule::Tau);
        r.agent = 7;
        assert!(matches!(apply(&nf, &r, &defs), Err(Error::StaleRedex(_))));
        let bogus = Redex::plain(Rule::Ask, 0, 0);
        assert!(matches!(apply(&nf, &bogus, &defs), Err(Error::StaleRedex(_))));
    }

    #[test]
    fn tell_adds_to_store() {
        let (nf, defs) = load("main tell(c).0");
        let r = &enabled_redexes(&nf, &defs)[0];
        let next = apply(&nf, r, &defs).unwrap();
        assert_eq!(next.key(), "{c}");
    }

    #[test]
    fn check_consults_the_whole_store() {
        let (nf, defs) = load("main {paid(n)} || check(!paid(n)).ok() || check(!sent(n)).ok()");
        let rs = enabled_redexes(&nf, &defs);
        assert_eq!(rs.len(), 1);
        assert_eq!(rs[0].agent, 1);
    }

    #[test]
    fn join_substitutes_a_delimited_name() {
        let (nf, defs) = load("main (new s)({d(w, s)}) || (y) join(y, d(w, y)).got(y)");
        let rs = enabled_redexes(&nf, &defs);
        assert_eq!(rs.len(), 1);
        let next = apply(&nf, &rs[0], &defs).unwrap();
        assert!(next.has_agent("got"));
        assert_eq!(next.binders.len(), 1);
    }

    #[test]
    fn free_variables_are_not_fused() {
        let (nf, defs) = load("main {p(k)} || (new k) tau.0");
        assert_eq!(enabled_redexes(&nf, &defs).len(), 1);
    }
}
