//! Fusion search: minimal fusions, local minimal fusions and join targets.
//!
//! Entailment is stable under substitution, so fusing more variables never
//! loses an entailment. Minimality of a domain `Z` therefore only needs the
//! maximal proper subsets `Z \ {v}`, and the entailing domains that contain
//! the subject form an upward-closed family explored top-down.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::logic::horn::relevant_predicates;
use crate::logic::{normalize_constraint, Formula, FreshSupply, HornClause, Ident, Subst, Theory};

/// `{domain -> target}`: every variable of the domain becomes the target name.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Fusion {
    #[serde(serialize_with = "labels")]
    pub domain: BTreeSet<Ident>,
    #[serde(serialize_with = "label")]
    pub target: Ident,
}

fn labels<S: serde::Serializer>(ids: &BTreeSet<Ident>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(ids.iter().map(|i| i.label()))
}

fn label<S: serde::Serializer>(id: &Ident, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(id.label())
}

impl Fusion {
    pub fn new(domain: impl IntoIterator<Item = Ident>, target: Ident) -> Self {
        let domain: BTreeSet<Ident> = domain.into_iter().collect();
        assert!(!domain.is_empty() && domain.iter().all(Ident::is_var));
        assert!(target.is_name());
        Fusion { domain, target }
    }

    pub fn subst(&self) -> Subst {
        self.domain
            .iter()
            .map(|v| (v.clone(), self.target.clone()))
            .collect()
    }
}

impl fmt::Display for Fusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.domain.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, " -> {}}}", self.target)
    }
}

/// A name absent from `store`, `goal` and `avoid`.
pub fn fresh_target<'a>(
    store: &[Formula],
    goal: &Formula,
    avoid: impl IntoIterator<Item = &'a Ident>,
) -> Ident {
    let mut supply = FreshSupply::new();
    for f in store.iter().chain([goal]) {
        supply.reserve_all(&f.identifiers());
    }
    supply.reserve_all(avoid);
    supply.fresh(crate::logic::IdentKind::Name)
}

/// Entailment queries `S sigma_Z |- goal sigma_Z` over subsets `S` of the
/// goal-relevant formulas of a store.
struct Problem<'a> {
    formulas: Vec<&'a Formula>,
    clauses: Vec<Vec<HornClause>>,
    goal: &'a Formula,
    target: Ident,
    memo: HashMap<(Vec<usize>, BTreeSet<Ident>), bool>,
}

impl<'a> Problem<'a> {
    fn new(store: &'a [Formula], goal: &'a Formula, target: Ident) -> Self {
        // Repeated constraints never change entailment.
        let distinct: BTreeSet<&Formula> = store.iter().collect();
        let normalized: Vec<(&Formula, Vec<HornClause>)> = distinct
            .into_iter()
            .filter_map(|f| normalize_constraint(f).ok().map(|cs| (f, cs)))
            .collect();
        let all = Theory::from_clauses(normalized.iter().flat_map(|(_, cs)| cs.iter().cloned()));
        let cone = relevant_predicates(&all, &goal.predicates());
        let (formulas, clauses) = normalized
            .into_iter()
            .filter(|(_, cs)| {
                cs.iter()
                    .any(|c| c.falsum || c.head_predicates().any(|p| cone.contains(p)))
            })
            .unzip();
        Problem {
            formulas,
            clauses,
            goal,
            target,
            memo: HashMap::new(),
        }
    }

    fn all(&self) -> Vec<usize> {
        (0..self.clauses.len()).collect()
    }

    fn variables(&self) -> BTreeSet<Ident> {
        let mut out = self.goal.identifiers();
        for f in &self.formulas {
            out.extend(f.identifiers());
        }
        out.retain(Ident::is_var);
        out
    }

    fn holds(&mut self, support: &[usize], z: &BTreeSet<Ident>) -> bool {
        let key = (support.to_vec(), z.clone());
        if let Some(&b) = self.memo.get(&key) {
            return b;
        }
        let s: Subst = z.iter().map(|v| (v.clone(), self.target.clone())).collect();
        let theory = Theory::from_clauses(
            support
                .iter()
                .flat_map(|&i| self.clauses[i].iter().map(|c| c.subst(&s))),
        );
        let result = theory.entails(&self.goal.subst(&s));
        self.memo.insert(key, result);
        result
    }

    /// No maximal nonempty proper subset of `z` entails under `support`.
    fn minimal_under(&mut self, support: &[usize], z: &BTreeSet<Ident>) -> bool {
        if z.len() < 2 {
            return true;
        }
        z.iter().all(|v| {
            let mut w = z.clone();
            w.remove(v);
            !self.holds(support, &w)
        })
    }

    /// A subset of the store under which `z` is a minimal fusion.
    fn local_witness(&mut self, z: &BTreeSet<Ident>) -> Option<Vec<usize>> {
        let full = self.all();
        if !self.holds(&full, z) {
            return None;
        }
        if self.minimal_under(&full, z) {
            return Some(full);
        }
        // Shrinking the support keeps smaller domains from entailing; only
        // supports that still entail under `z` are worth visiting.
        let mut seen = HashSet::new();
        let mut stack = vec![full];
        while let Some(s) = stack.pop() {
            for i in 0..s.len() {
                let mut t = s.clone();
                t.remove(i);
                if !seen.insert(t.clone()) || !self.holds(&t, z) {
                    continue;
                }
                if self.minimal_under(&t, z) {
                    return Some(t);
                }
                stack.push(t);
            }
        }
        None
    }

    fn witness_formulas(&self, support: &[usize]) -> Vec<Formula> {
        support.iter().map(|&i| self.formulas[i].clone()).collect()
    }

    /// Entailing domains `x ∈ Z ⊆ candidates`, restricted to relevant variables.
    fn entailing_domains(
        &mut self,
        x: &Ident,
        candidates: &BTreeSet<Ident>,
    ) -> Vec<BTreeSet<Ident>> {
        let relevant = self.variables();
        let mut top: BTreeSet<Ident> = candidates
            .iter()
            .filter(|v| v.is_var() && relevant.contains(*v))
            .cloned()
            .collect();
        top.insert(x.clone());
        let full = self.all();
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        let mut stack = vec![top];
        while let Some(z) = stack.pop() {
            if !seen.insert(z.clone()) || !self.holds(&full, &z) {
                continue;
            }
            for v in z.iter().filter(|v| *v != x) {
                let mut w = z.clone();
                w.remove(v);
                stack.push(w);
            }
            out.push(z);
        }
        out.sort();
        out
    }
}

/// A local minimal fusion with a store subset that witnesses it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalFusion {
    pub fusion: Fusion,
    pub witness: Vec<Formula>,
}

/// Fusions `{x y.. -> n}` minimal for the whole store: the store entails the
/// goal after fusing, and no nonempty proper subset of the domain does.
pub fn minimal_fusions(
    store: &[Formula],
    goal: &Formula,
    x: &Ident,
    candidates: &BTreeSet<Ident>,
) -> BTreeSet<Fusion> {
    let target = fresh_target(store, goal, candidates.iter().chain([x]));
    let mut problem = Problem::new(store, goal, target.clone());
    let full = problem.all();
    problem
        .entailing_domains(x, candidates)
        .into_iter()
        .filter(|z| problem.minimal_under(&full, z))
        .map(|z| Fusion::new(z, target.clone()))
        .collect()
}

/// Whether some subset of `store` makes `fusion` minimal.
pub fn local_minimal(store: &[Formula], goal: &Formula, fusion: &Fusion) -> bool {
    let mut problem = Problem::new(store, goal, fusion.target.clone());
    problem.local_witness(&fusion.domain).is_some()
}

/// All local minimal fusions `x ∈ Z ⊆ candidates`, each with a witness.
pub fn local_minimal_fusions(
    store: &[Formula],
    goal: &Formula,
    x: &Ident,
    candidates: &BTreeSet<Ident>,
    target: &Ident,
) -> Vec<LocalFusion> {
    let mut problem = Problem::new(store, goal, target.clone());
    let mut out = Vec::new();
    for z in problem.entailing_domains(x, candidates) {
        if let Some(w) = problem.local_witness(&z) {
            out.push(LocalFusion {
                witness: problem.witness_formulas(&w),
                fusion: Fusion::new(z, target.clone()),
            });
        }
    }
    out
}

/// Names `n` among `names` with `store{n/x} |- goal{n/x}`.
pub fn join_instantiations(
    store: &[Formula],
    goal: &Formula,
    x: &Ident,
    names: &BTreeSet<Ident>,
) -> BTreeSet<Ident> {
    let theory = match Theory::from_formulas(store) {
        Ok(t) => t,
        Err(_) => return BTreeSet::new(),
    };
    names
        .iter()
        .filter(|n| n.is_name())
        .filter(|n| {
            let s: Subst = [(x.clone(), (*n).clone())].into_iter().collect();
            theory.subst(&s).entails(&goal.subst(&s))
        })
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Atom;

    fn v(l: &str) -> Ident {
        Ident::var(l)
    }

    fn n(l: &str) -> Ident {
        Ident::name(l)
    }

    fn at(p: &str, args: &[&Ident]) -> Formula {
        Formula::Atom(Atom::new(p, args.iter().map(|a| (*a).clone()).collect()))
    }

    fn set(ids: &[Ident]) -> BTreeSet<Ident> {
        ids.iter().cloned().collect()
    }

    fn handshake_store() -> Vec<Formula> {
        let (x, y, z) = (v("x"), v("y"), v("z"));
        vec![
            Formula::cimp(Formula::and(at("b", &[&x]), at("c", &[&x])), at("a", &[&x])),
            Formula::cimp(Formula::and(at("a", &[&y]), at("c", &[&y])), at("b", &[&y])),
            Formula::cimp(Formula::and(at("a", &[&z]), at("b", &[&z])), at("c", &[&z])),
        ]
    }

    #[test]
    fn handshake_needs_all_three() {
        let x = v("x");
        let fs = minimal_fusions(&handshake_store(), &at("a", &[&x]), &x, &set(&[v("x"), v("y"), v("z")]));
        let domains: Vec<BTreeSet<Ident>> = fs.into_iter().map(|f| f.domain).collect();
        assert_eq!(domains, vec![set(&[v("x"), v("y"), v("z")])]);
    }

    #[test]
    fn semaphore_token_fuses_alone() {
        let x = v("x");
        let store = vec![at("p", &[&n("n"), &x])];
        let fs = minimal_fusions(&store, &at("p", &[&n("n"), &x]), &x, &set(std::slice::from_ref(&x)));
        assert_eq!(fs.len(), 1);
        assert_eq!(fs.iter().next().unwrap().domain, set(&[x]));
    }

    #[test]
    fn nothing_entails_from_empty_store() {
        let x = v("x");
        assert!(minimal_fusions(&[], &at("a", &[&x]), &x, &set(std::slice::from_ref(&x))).is_empty());
    }

    fn locality_store(with_s: bool) -> Vec<Formula> {
        let (y, z) = (v("y"), v("z"));
        let mut store = vec![
            at("q", &[&y]),
            Formula::imp(Formula::or(at("q", &[&z]), Formula::prop("s")), at("p", &[&y])),
        ];
        if with_s {
            store.push(Formula::prop("s"));
        }
        store
    }

    #[test]
    fn locality_example() {
        let x = v("x");
        let goal = at("p", &[&x]);
        let cands = set(&[v("x"), v("y"), v("z")]);
        let xy = set(&[v("x"), v("y")]);
        let xyz = set(&[v("x"), v("y"), v("z")]);

        let global: Vec<_> = minimal_fusions(&locality_store(true), &goal, &x, &cands)
            .into_iter()
            .map(|f| f.domain)
            .collect();
        assert_eq!(global, vec![xy.clone()]);

        let t = n("m");
        for with_s in [true, false] {
            let local: BTreeSet<_> =
                local_minimal_fusions(&locality_store(with_s), &goal, &x, &cands, &t)
                    .into_iter()
                    .map(|f| f.fusion.domain)
                    .collect();
            let expected = if with_s { set_of(&[&xy, &xyz]) } else { set_of(&[&xyz]) };
            assert_eq!(local, expected, "with s: {with_s}");
        }
        assert!(local_minimal(&locality_store(true), &goal, &Fusion::new(xy, t.clone())));
        assert!(local_minimal(&locality_store(false), &goal, &Fusion::new(xyz, t.clone())));
        assert!(!local_minimal(&[], &goal, &Fusion::new(set(&[v("x")]), t)));
    }

    fn set_of(sets: &[&BTreeSet<Ident>]) -> BTreeSet<BTreeSet<Ident>> {
        sets.iter().map(|s| (*s).clone()).collect()
    }

    #[test]
    fn join_targets() {
        let (w, y) = (n("w"), v("y"));
        let store = vec![at("d", &[&w, &n("v")])];
        let got = join_instantiations(&store, &at("d", &[&w, &y]), &y, &set(&[n("v"), n("u")]));
        assert_eq!(got, set(&[n("v")]));
        assert!(join_instantiations(&[], &at("d", &[&w, &y]), &y, &set(&[n("v")])).is_empty());
    }

    #[test]
    fn judge_joins_on_the_disputed_session() {
        let z = v("z");
        let m = n("n");
        let store = vec![at("pay", &[&m]), at("dispute", &[&m]), at("send", &[&m])];
        let goal = Formula::and(at("pay", &[&z]), at("dispute", &[&z]));
        assert_eq!(join_instantiations(&store, &goal, &z, &set(std::slice::from_ref(&m))), set(&[m]));
    }
}
