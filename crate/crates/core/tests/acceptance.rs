//! Acceptance criteria, one PASS/FAIL line each.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use contract_calculus::corpus;
use contract_calculus::encodings::{
    compile_rules, embed, isomorphic, parse_pi, pi_correspondence, ring_definitions, ring_host, ring_system,
    ring_to_star_rule, rewrite, PiDefinitions,
};
use contract_calculus::logic::{oracle_prove, parse_formula, parse_theory, Formula, Ident, Theory};
use contract_calculus::lts::{bisim_probe, correspondence_check, top_steps, FuseRule};
use contract_calculus::process::{parse_program, to_normal_form, Agent, Definitions, NormalForm};
use contract_calculus::random::{mutate, random_programs, GenConfig};
use contract_calculus::reduction::{
    explore, explore_filtered, minimal_fusions, reaches, successors, Bounds, Reach, Redex, Rule,
};
use contract_calculus::trace::{run, Semantics};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn f(src: &str) -> Formula {
    parse_formula(src).unwrap()
}

fn entails(theory: &str, goal: &str) -> bool {
    let fs = parse_theory(theory).unwrap();
    Theory::from_formulas(&fs).unwrap().entails(&f(goal))
}

fn program(name: &str) -> contract_calculus::Program {
    corpus::get(name).unwrap().program().unwrap()
}

fn pcl_entailments() -> Verdict {
    let proved = [
        ("", "top ->> top"),
        ("", "(p ->> p) -> p"),
        ("", "(p -> p) -> (p ->> q) -> (q -> q) -> (p ->> q)"),
        ("", "((p /\\ q) -> p) -> (p ->> q) -> (q -> q) -> ((p /\\ q) ->> q)"),
        ("b ->> a. a ->> b.", "a /\\ b"),
        (
            "b(n) /\\ c(n) ->> a(n). a(n) /\\ c(n) ->> b(n). a(n) /\\ b(n) ->> c(n).",
            "a(n) /\\ b(n) /\\ c(n)",
        ),
    ];
    let missing: Vec<_> = proved.iter().filter(|(t, g)| !entails(t, g)).collect();
    let rejects = !entails("a ->> b.", "b");
    verdict(
        missing.is_empty() && rejects,
        format!("{} of {} entailments proved, a->>b |/- b: {rejects}", proved.len() - missing.len(), proved.len()),
    )
}

/// Horn clauses over the nullary atoms a, b, c.
fn small_clauses() -> Vec<Formula> {
    let atoms: Vec<Formula> = ["a", "b", "c"].iter().map(|s| Formula::prop(*s)).collect();
    let mut premises = vec![Formula::Top];
    premises.extend(atoms.iter().cloned());
    for i in 0..3 {
        for j in i + 1..3 {
            premises.push(Formula::and(atoms[i].clone(), atoms[j].clone()));
            premises.push(Formula::or(atoms[i].clone(), atoms[j].clone()));
        }
    }
    let mut heads = atoms;
    heads.push(Formula::Bot);
    let mut out = heads.clone();
    for p in &premises {
        for c in &heads {
            if *p != Formula::Top {
                out.push(Formula::imp(p.clone(), c.clone()));
            }
            out.push(Formula::cimp(p.clone(), c.clone()));
        }
    }
    out
}

fn oracle_equivalence() -> Verdict {
    let clauses = small_clauses();
    let n = clauses.len();
    let atoms: Vec<Formula> = ["a", "b", "c"].iter().map(|s| Formula::prop(*s)).collect();
    let mut goals = atoms.clone();
    for i in 0..3 {
        for j in i + 1..3 {
            goals.push(Formula::and(atoms[i].clone(), atoms[j].clone()));
        }
    }
    let mut theories: Vec<Vec<usize>> = vec![vec![]];
    for i in 0..n {
        theories.push(vec![i]);
        for j in i + 1..n {
            theories.push(vec![i, j]);
            for k in j + 1..n {
                theories.push(vec![i, j, k]);
            }
        }
    }
    let (mut checked, mut disagreements) = (0usize, Vec::new());
    for t in &theories {
        let fs: Vec<Formula> = t.iter().map(|&i| clauses[i].clone()).collect();
        let theory = Theory::from_formulas(&fs).unwrap();
        for g in &goals {
            checked += 1;
            let (horn, oracle) = (theory.entails(g), oracle_prove(&fs, g, 8));
            if horn != oracle {
                disagreements.push(format!("{fs:?} |- {g}: {horn} vs {oracle}"));
            }
        }
    }
    let first = disagreements.first().cloned().unwrap_or_default();
    verdict(
        disagreements.is_empty(),
        format!(
            "{} theories over {n} clauses, {checked} instances, {} disagreements {first}",
            theories.len(),
            disagreements.len()
        ),
    )
}

fn handshake_trace() -> Verdict {
    let p = program("ex1_handshake");
    let g = explore(&p.main, &p.defs, Bounds::default());
    let fuse_sizes: BTreeSet<usize> = g
        .edges
        .iter()
        .filter_map(|e| e.redex.fusion.as_ref().map(|f| f.domain.len()))
        .collect();
    let shape = [Rule::Tell, Rule::Tell, Rule::Tell, Rule::Fuse, Rule::Ask, Rule::Ask];
    let matching = g.final_states().into_iter().find(|&k| {
        let t = g.trace_to(k);
        t.len() == 6
            && t.iter().map(|s| s.rule).eq(shape)
            && t[3].fusion.as_ref().is_some_and(|f| f.domain.len() == 3)
            && ["lendA", "lendB", "lendC"].iter().all(|a| g.states[k].has_agent(a))
    });
    verdict(
        matching.is_some() && fuse_sizes == BTreeSet::from([3]) && !g.truncated,
        format!("{} states, fuse domain sizes {fuse_sizes:?}, six-step trace found: {}", g.states.len(), matching.is_some()),
    )
}

fn store_has(s: &NormalForm, pred: &str) -> bool {
    s.store
        .iter()
        .any(|c| matches!(c, Formula::Atom(a) if a.predicate == pred))
}

fn judge() -> Verdict {
    let p = program("ex3_judge");
    let jail = |s: &NormalForm| s.has_agent("jailSeller");
    let reachable = matches!(reaches(&p.main, &p.defs, &jail, Bounds::new(2000, 200)), Reach::Yes(_));
    // Fulfilling runs: nobody defaults, and disputes are raised only once
    // both the payment and the shipment are on record.
    let fulfil = |s: &NormalForm, _: &Redex, next: &NormalForm| {
        let defaults = next.has_agent("NoPay") || next.has_agent("NoSend");
        let raised = !store_has(s, "dispute") && store_has(next, "dispute");
        !defaults && (!raised || (store_has(s, "paid") && store_has(s, "sent")))
    };
    let g = explore_filtered(&p.main, &p.defs, Bounds::new(2000, 200), Some(&fulfil));
    let jailed = g.states.iter().any(|s| s.has_agent("jailSeller") || s.has_agent("jailBuyer"));
    let both_told = g.states.iter().any(|s| store_has(s, "paid") && store_has(s, "sent"));
    verdict(
        reachable && !jailed && both_told && !g.truncated,
        format!(
            "jailSeller reachable: {reachable}; fulfilling runs: {} states, exhaustive: {}, jail reached: {jailed}",
            g.states.len(),
            !g.truncated
        ),
    )
}

fn buffet() -> Verdict {
    let sated = |s: &NormalForm| s.has_agent("SatiatedC");
    let p = program("ex4_buffet_carl");
    let yes = matches!(reaches(&p.main, &p.defs, &sated, Bounds::default()), Reach::Yes(_));
    let q = program("ex4_buffet_prime_carl");
    let no = reaches(&q.main, &q.defs, &sated, Bounds::default()) == Reach::No;
    verdict(yes && no, format!("Buffet|Carl reaches SatiatedC: {yes}; Buffet'|Carl exhaustively never: {no}"))
}

/// Fusion domains of the labelled steps, read off the `keep(x, y, z)` agent.
fn lts_domains(src: &str) -> BTreeSet<BTreeSet<&'static str>> {
    let p = parse_program(src).unwrap();
    top_steps(&p.main, &p.defs)
        .iter()
        .map(|q| {
            let nf = to_normal_form(q, &p.defs);
            let args = nf
                .agents
                .iter()
                .find_map(|a| match a {
                    Agent::Call(name, args) if name == "keep" => Some(args.clone()),
                    _ => None,
                })
                .expect("fuse fired");
            ["x", "y", "z"]
                .into_iter()
                .zip(&args)
                .filter(|(_, a)| a.is_name())
                .map(|(v, _)| v)
                .collect()
        })
        .collect()
}

fn locality() -> (Verdict, bool) {
    let c = "{q(y)} || {(q(z) \\/ s) -> p(y)}";
    let p_src = format!("main (x)(y)(z)(fuse(x, p(x)).keep(x, y, z) || {c} || {{s}})");
    let q_src = format!("main (x)(y)(z)(fuse(x, p(x)).keep(x, y, z) || {c}) || {{s}}");
    let (p_set, q_set) = (lts_domains(&p_src), lts_domains(&q_src));
    let xy = BTreeSet::from(["x", "y"]);
    let xyz = BTreeSet::from(["x", "y", "z"]);
    let both = BTreeSet::from([xy.clone(), xyz]);

    let v = |l: &str| Ident::var(l);
    let store = [
        Formula::atom("q", vec![v("y")]),
        Formula::imp(Formula::or(Formula::atom("q", vec![v("z")]), Formula::prop("s")), Formula::atom("p", vec![v("y")])),
        Formula::prop("s"),
    ];
    let vars: BTreeSet<Ident> = ["x", "y", "z"].iter().map(|l| v(l)).collect();
    let plain: Vec<BTreeSet<String>> = minimal_fusions(&store, &Formula::atom("p", vec![v("x")]), &v("x"), &vars)
        .into_iter()
        .map(|fu| fu.domain.iter().map(|i| i.label().to_string()).collect())
        .collect();
    let p = parse_program(&p_src).unwrap();
    let nf = to_normal_form(&p.main, &p.defs);
    let reduction: BTreeSet<usize> = successors(&nf, &p.defs)
        .iter()
        .filter_map(|(r, _)| r.fusion.as_ref().map(|f| f.domain.len()))
        .collect();

    let literal = p_set == BTreeSet::from([xy]) && q_set == both;
    let consistent = q_set == both && p_set == both && reduction == BTreeSet::from([2, 3]);
    let detail = format!(
        "P local-minimal {p_set:?}, Q {q_set:?}, reduction domain sizes {reduction:?}, \
         plain minimality on P's full store {plain:?}"
    );
    (verdict(literal, detail), consistent && plain.len() == 1 && plain[0].len() == 2)
}

fn correspondence() -> Verdict {
    let (mut states, mut bad, mut truncated) = (0, 0, 0);
    for p in random_programs(2024, 500, &GenConfig::default()) {
        let r = correspondence_check(&p.main, &p.defs, Bounds::new(200, 200), FuseRule::LocalMinimal);
        states += r.states_checked;
        bad += r.mismatches.len();
        truncated += usize::from(r.truncated);
    }
    verdict(
        bad == 0,
        format!("500 programs, {states} states compared, {bad} mismatching states, {truncated} programs at the state bound"),
    )
}

fn bisimulation() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut axioms = BTreeSet::new();
    let mut unmatched = Vec::new();
    for p in random_programs(77, 100, &GenConfig::default()) {
        let (q, axiom) = mutate(&p.main, &p.defs, &mut rng);
        axioms.insert(axiom.to_string());
        let r = bisim_probe(&p.main, &q, &p.defs, 5);
        if !r.matched {
            unmatched.push(format!("{axiom}: {}", r.unmatched.unwrap_or_default()));
        }
    }
    verdict(
        unmatched.is_empty(),
        format!("100 pairs, {} unmatched, axioms used {axioms:?}", unmatched.len()),
    )
}

fn pi_encoding() -> Verdict {
    let conts = ["0", "mark()"];
    let mut simulated = 0;
    for p in conts {
        for q in conts {
            let src = format!("(new m)(n<m>.{p} | n(z).{q})");
            simulated += usize::from(pi_correspondence(&parse_pi(&src).unwrap().main, &PiDefinitions::new(), Bounds::default()));
        }
    }
    let lonely = [
        "n<m>.mark()",
        "(new m)(n<m>.mark())",
        "(new m)(n<m>.mark() | k(z).0)",
    ];
    let stuck = lonely
        .iter()
        .filter(|src| {
            let enc = contract_calculus::encodings::encode_pi(&parse_pi(src).unwrap().main);
            let g = explore(&enc, &Definitions::new(), Bounds::default());
            !g.truncated && !g.states.iter().any(|s| s.has_agent("mark"))
        })
        .count();
    verdict(
        simulated == 4 && stuck == lonely.len(),
        format!("{simulated}/4 handshakes simulated, {stuck}/{} lonely outputs never consumed", lonely.len()),
    )
}

fn graph_rewriting() -> Verdict {
    let defs = ring_definitions(4);
    let g = explore(&ring_system(4, 4), &defs, Bounds::default());
    let star_state = g.states.iter().any(|s| {
        s.binders.len() == 1
            && s.agents.len() == 4
            && s.agents.iter().all(|a| matches!(a, Agent::Call(n, args) if n.starts_with('B') && args == &s.binders))
    });

    let rule = ring_to_star_rule(4);
    let host = ring_host(4, 4);
    let star = rewrite(&host, &rule, &embed(&rule, &host)[0]).unwrap();
    let compiled = compile_rules(std::slice::from_ref(&rule)).unwrap();
    let enc = compiled.encode_host(&host).unwrap();
    let cg = explore(&enc, &compiled.defs, Bounds::new(20_000, 100));
    let finals = cg.final_states();
    let readback_ok = !cg.truncated
        && !finals.is_empty()
        && finals
            .iter()
            .all(|&k| compiled.readback(&cg.states[k]).is_some_and(|h| isomorphic(&h, &star)));

    let loop8 = ring_host(4, 8);
    let no_embedding = embed(&rule, &loop8).is_empty();
    let g8 = explore(&ring_system(4, 8), &defs, Bounds::default());
    let handshake = g8.states.iter().any(|s| s.agents.iter().any(|a| matches!(a, Agent::Call(n, _) if n.starts_with('B'))));
    verdict(
        star_state && readback_ok && no_embedding && handshake,
        format!(
            "4-ring reaches (m) || B_i(m): {star_state}; compiled rule reads back the star in all {} final states: {readback_ok}; \
             8-loop: embeddings empty {no_embedding}, handshake fires {handshake}",
            finals.len()
        ),
    )
}

fn determinism() -> Verdict {
    let mut runs = 0;
    let mut differing = Vec::new();
    for e in corpus::entries() {
        let p = e.program().unwrap();
        for sem in [Semantics::Reduction, Semantics::Lts] {
            for seed in [0, 1, 42] {
                let a = run(&p.main, &p.defs, sem, seed, 100).to_json();
                let b = run(&p.main, &p.defs, sem, seed, 100).to_json();
                runs += 1;
                if a != b {
                    differing.push(format!("{} {sem} {seed}", e.name));
                }
            }
        }
    }
    verdict(differing.is_empty(), format!("{runs} repeated runs, {} differing {differing:?}", differing.len()))
}

fn main() -> ExitCode {
    type Criterion = (usize, &'static str, fn() -> Verdict);
    let criteria: [Criterion; 10] = [
        (1, "PCL entailment suite", pcl_entailments),
        (2, "oracle equivalence", oracle_equivalence),
        (3, "handshake trace", handshake_trace),
        (4, "judge", judge),
        (5, "buffet", buffet),
        (7, "reduction/labelled correspondence", correspondence),
        (8, "congruence is a bisimulation", bisimulation),
        (9, "pi encoding", pi_encoding),
        (10, "graph rewriting", graph_rewriting),
        (11, "determinism", determinism),
    ];
    let mut unexpected = 0;
    let mut lines = Vec::new();
    for (id, name, check) in criteria {
        let t = Instant::now();
        let v = check();
        unexpected += usize::from(!v.pass);
        lines.push((id, name, v, t.elapsed()));
        if id == 5 {
            let t = Instant::now();
            let (v, consistent) = locality();
            // The literal clause demands different fusions for two congruent
            // processes; it is reported as failing, and what must hold instead
            // is that both see {x,y} and {x,y,z}.
            if v.pass || !consistent {
                unexpected += 1;
            }
            lines.push((6, "locality", v, t.elapsed()));
        }
    }
    for (id, name, v, time) in &lines {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {id:>2} ({name}, {:.1}s): {}", time.as_secs_f64(), v.detail);
    }
    if unexpected == 0 {
        println!("acceptance: all criteria as recorded");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {unexpected} unexpected outcome(s)");
        ExitCode::FAILURE
    }
}
