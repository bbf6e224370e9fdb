use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use contract_calculus::logic::{parse_formula, parse_theory, Formula, Theory};
use contract_calculus::lts::{bisim_probe, correspondence_check, explore_lts, FuseRule};
use contract_calculus::process::parse_program;
use contract_calculus::random::{mutate, random_programs, GenConfig};
use contract_calculus::reduction::{explore, Bounds};
use contract_calculus::trace::{run, Semantics};
use contract_calculus::{corpus, Error, NormalForm, Program};

#[derive(Parser)]
#[command(name = "ccalc", version, about = "Workbench for the contract calculus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide entailment of a goal by a theory of `.`-terminated formulas.
    Entail {
        /// Theory file, or the theory text itself with `--inline`.
        theory: String,
        goal: String,
        #[arg(long)]
        inline: bool,
        /// List the contracts whose conclusions were obtained.
        #[arg(long)]
        fired: bool,
    },
    /// One seeded run of a program.
    Run {
        program: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Exhaustive reachability of an agent or a constraint.
    Check {
        program: String,
        #[arg(long, conflicts_with = "reach_constraint", required_unless_present = "reach_constraint")]
        reach_agent: Option<String>,
        /// An atom such as `paid(n)`, or a bare predicate matching any arguments.
        #[arg(long)]
        reach_constraint: Option<String>,
        #[command(flatten)]
        opts: Opts,
    },
    /// Bounded state space of a program.
    Explore {
        program: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Compare reduction with the labelled semantics state by state.
    Correspond {
        /// Program to check; omitted with `--random`.
        #[arg(required_unless_present = "random")]
        program: Option<String>,
        /// Check this many generated programs instead.
        #[arg(long)]
        random: Option<usize>,
        /// Use a deliberately wrong fuse rule in the labelled semantics.
        #[arg(long)]
        mutate_fuse: bool,
        #[command(flatten)]
        opts: Opts,
    },
    /// Bounded bisimulation probe between two programs sharing definitions.
    Bisim {
        #[arg(required_unless_present = "random")]
        left: Option<String>,
        #[arg(required_unless_present = "random")]
        right: Option<String>,
        /// Probe this many generated programs against one-axiom rewrites.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        #[command(flatten)]
        opts: Opts,
    },
    /// Built-in example programs.
    Corpus {
        #[command(subcommand)]
        action: CorpusCommand,
    },
}

#[derive(Subcommand)]
enum CorpusCommand {
    List,
    /// Explore an entry and summarise its final states.
    Run {
        name: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Print an entry's source.
    Show { name: String },
}

#[derive(Args, Clone)]
struct Opts {
    #[arg(long, value_enum, default_value_t = SemanticsArg::Reduction)]
    semantics: SemanticsArg,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_states: u64,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    max_depth: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Also write the state graph in DOT to this file.
    #[arg(long)]
    dot_out: Option<PathBuf>,
}

impl Opts {
    fn bounds(&self) -> Bounds {
        Bounds::new(self.max_states as usize, self.max_depth as usize)
    }

    fn semantics(&self) -> Semantics {
        match self.semantics {
            SemanticsArg::Reduction => Semantics::Reduction,
            SemanticsArg::Lts => Semantics::Lts,
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum SemanticsArg {
    Reduction,
    Lts,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Debug)]
enum Outcome {
    Pass,
    Negative,
    Unknown,
}

impl From<Outcome> for ExitCode {
    fn from(o: Outcome) -> ExitCode {
        ExitCode::from(match o {
            Outcome::Pass => 0,
            Outcome::Negative => 1,
            Outcome::Unknown => 2,
        })
    }
}

fn main() -> ExitCode {
    // Exit quietly when the reader of stdout goes away.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 3 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(o) => o.into(),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn dispatch(cmd: Command) -> Result<Outcome, Error> {
    match cmd {
        Command::Entail {
            theory,
            goal,
            inline,
            fired,
        } => entail(&theory, &goal, inline, fired),
        Command::Run { program, opts } => run_cmd(&load(&program)?, &opts),
        Command::Check {
            program,
            reach_agent,
            reach_constraint,
            opts,
        } => {
            let target = match (reach_agent, reach_constraint) {
                (Some(a), _) => Target::Agent(a),
                (None, Some(c)) => Target::constraint(&c)?,
                (None, None) => unreachable!("clap requires one target"),
            };
            check(&load(&program)?, &target, &opts)
        }
        Command::Explore { program, opts } => explore_cmd(&load(&program)?, &opts),
        Command::Correspond {
            program,
            random,
            mutate_fuse,
            opts,
        } => {
            let rule = if mutate_fuse {
                FuseRule::SubjectOnly
            } else {
                FuseRule::LocalMinimal
            };
            match (random, program) {
                (Some(n), _) => correspond_random(n, rule, &opts),
                (None, Some(p)) => correspond(&load(&p)?, rule, &opts),
                (None, None) => unreachable!("clap requires a program"),
            }
        }
        Command::Bisim {
            left,
            right,
            random,
            depth,
            opts,
        } => match (random, left, right) {
            (Some(n), _, _) => bisim_random(n, depth, &opts),
            (None, Some(l), Some(r)) => bisim(&load(&l)?, &load(&r)?, depth, &opts),
            _ => unreachable!("clap requires two programs"),
        },
        Command::Corpus { action } => match action {
            CorpusCommand::List => {
                for e in corpus::entries() {
                    println!("{:<24} {}", e.name, e.summary);
                }
                Ok(Outcome::Pass)
            }
            CorpusCommand::Show { name } => {
                print!("{}", corpus::get(&name)?.source()?);
                Ok(Outcome::Pass)
            }
            CorpusCommand::Run { name, opts } => explore_cmd(&corpus::get(&name)?.program()?, &opts),
        },
    }
}

/// A file path, or else the name of a corpus entry.
fn load(arg: &str) -> Result<Program, Error> {
    let path = Path::new(arg);
    if path.exists() {
        return parse_program(&fs::read_to_string(path)?);
    }
    corpus::get(arg)?.program()
}

fn entail(theory: &str, goal: &str, inline: bool, fired: bool) -> Result<Outcome, Error> {
    let text = if inline {
        theory.to_string()
    } else {
        fs::read_to_string(theory)?
    };
    let formulas = parse_theory(&text)?;
    let goal = parse_formula(goal)?;
    let mut t = Theory::new();
    for (k, f) in formulas.iter().enumerate() {
        t.add_formula(f).map_err(|e| match e {
            Error::NonHornConstraint { formula, reason } => Error::NonHornConstraint {
                formula: format!("{formula} (theory formula {})", k + 1),
                reason,
            },
            other => other,
        })?;
    }
    let verdict = t.entails(&goal);
    println!("{verdict}");
    if fired {
        for c in t.fired_contracts() {
            println!("fired: {c}");
        }
    }
    Ok(if verdict { Outcome::Pass } else { Outcome::Negative })
}

fn run_cmd(p: &Program, opts: &Opts) -> Result<Outcome, Error> {
    let trace = run(&p.main, &p.defs, opts.semantics(), opts.seed, opts.max_depth as usize);
    match opts.format {
        Format::Json => println!("{}", trace.to_json()),
        _ => print!("{trace}"),
    }
    Ok(if trace.complete { Outcome::Pass } else { Outcome::Unknown })
}

enum Target {
    Agent(String),
    Atom(Formula),
    Predicate(String),
}

impl Target {
    fn constraint(src: &str) -> Result<Target, Error> {
        let f = parse_formula(src)?;
        Ok(match f {
            Formula::Atom(a) if a.args.is_empty() && !src.contains('(') => Target::Predicate(a.predicate),
            f => Target::Atom(f),
        })
    }

    fn holds(&self, s: &NormalForm) -> bool {
        match self {
            Target::Agent(a) => s.has_agent(a),
            Target::Atom(f) => Theory::from_formulas(&s.store).is_ok_and(|t| t.entails(f)),
            Target::Predicate(p) => Theory::from_formulas(&s.store)
                .is_ok_and(|t| t.closure().atoms.iter().any(|a| &a.predicate == p)),
        }
    }
}

struct Space {
    states: Vec<NormalForm>,
    truncated: bool,
    json: serde_json::Value,
    dot: String,
    witness_trace: Box<dyn Fn(usize) -> serde_json::Value>,
    edges: usize,
}

fn space(p: &Program, opts: &Opts) -> Space {
    match opts.semantics() {
        Semantics::Reduction => {
            let g = explore(&p.main, &p.defs, opts.bounds());
            let (json, dot) = (g.to_json(), g.to_dot());
            let (states, truncated, edges) = (g.states.clone(), g.truncated, g.edges.len());
            Space {
                states,
                truncated,
                json,
                dot,
                edges,
                witness_trace: Box::new(move |k| serde_json::to_value(g.trace_to(k)).expect("steps serialize")),
            }
        }
        Semantics::Lts => {
            let g = explore_lts(&p.main, &p.defs, opts.bounds());
            let (json, dot) = (g.to_json(), g.to_dot());
            let (states, truncated, edges) = (g.states.clone(), g.truncated, g.edges.len());
            let path = move |k: usize| {
                let mut chain = vec![k];
                while chain[chain.len() - 1] != 0 {
                    let cur = chain[chain.len() - 1];
                    let prev = g
                        .edges
                        .iter()
                        .find(|(a, b)| *b == cur && g.depth[*a] + 1 == g.depth[cur])
                        .map(|(a, _)| *a)
                        .expect("bfs parent");
                    chain.push(prev);
                }
                chain.reverse();
                serde_json::json!(chain[1..]
                    .iter()
                    .map(|&s| serde_json::json!({"rule": "tau", "state": g.states[s].key()}))
                    .collect::<Vec<_>>())
            };
            Space {
                states,
                truncated,
                json,
                dot,
                edges,
                witness_trace: Box::new(path),
            }
        }
    }
}

fn write_dot(s: &Space, opts: &Opts) -> Result<(), Error> {
    if let Some(path) = &opts.dot_out {
        fs::write(path, &s.dot)?;
    }
    Ok(())
}

fn check(p: &Program, target: &Target, opts: &Opts) -> Result<Outcome, Error> {
    let s = space(p, opts);
    write_dot(&s, opts)?;
    let hit = s.states.iter().position(|st| target.holds(st));
    let (verdict, outcome) = match hit {
        Some(_) => ("reachable", Outcome::Pass),
        None if s.truncated => ("unknown", Outcome::Unknown),
        None => ("unreachable", Outcome::Negative),
    };
    let trace = hit.map(|k| (s.witness_trace)(k));
    match opts.format {
        Format::Json => {
            let out = serde_json::json!({
                "verdict": verdict,
                "states": s.states.len(),
                "truncated": s.truncated,
                "trace": trace,
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("json"));
        }
        Format::Dot => print!("{}", s.dot),
        Format::Text => {
            println!("{verdict} ({} states explored)", s.states.len());
            if let Some(serde_json::Value::Array(steps)) = trace {
                for (k, st) in steps.iter().enumerate() {
                    println!("{:>3} [{}] {}", k + 1, step_label(st), st["state"].as_str().unwrap_or(""));
                }
            }
        }
    }
    Ok(outcome)
}

fn step_label(step: &serde_json::Value) -> String {
    let rule = step["rule"].as_str().unwrap_or("?").to_lowercase();
    let names = |v: &serde_json::Value| -> String {
        v.as_array()
            .into_iter()
            .flatten()
            .filter_map(|x| x.as_str())
            .collect::<Vec<_>>()
            .join(",")
    };
    let fusion = &step["fusion"];
    if fusion.is_object() {
        return format!("{rule} {{{} -> {}}}", names(&fusion["domain"]), fusion["target"].as_str().unwrap_or("?"));
    }
    match &step["join"] {
        serde_json::Value::Null => rule,
        j => format!("{rule} {j}"),
    }
}

fn explore_cmd(p: &Program, opts: &Opts) -> Result<Outcome, Error> {
    let s = space(p, opts);
    write_dot(&s, opts)?;
    match opts.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&s.json).expect("json")),
        Format::Dot => print!("{}", s.dot),
        Format::Text => {
            println!(
                "{} states, {} edges{}",
                s.states.len(),
                s.edges,
                if s.truncated { ", truncated" } else { "" }
            );
            let finals = s.json["states"]
                .as_array()
                .map(|states| final_ids(&s.json, states.len()))
                .unwrap_or_default();
            println!("{} final states:", finals.len());
            for k in finals {
                println!("  {}", s.states[k]);
            }
        }
    }
    Ok(if s.truncated { Outcome::Unknown } else { Outcome::Pass })
}

fn final_ids(json: &serde_json::Value, n: usize) -> Vec<usize> {
    let mut has_out = vec![false; n];
    for e in json["edges"].as_array().into_iter().flatten() {
        if let Some(from) = e["from"].as_u64() {
            has_out[from as usize] = true;
        }
    }
    (0..n).filter(|&k| !has_out[k]).collect()
}

fn correspond(p: &Program, rule: FuseRule, opts: &Opts) -> Result<Outcome, Error> {
    let r = correspondence_check(&p.main, &p.defs, opts.bounds(), rule);
    match opts.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&r).expect("json")),
        _ => {
            println!(
                "{} states checked, {} mismatches{}",
                r.states_checked,
                r.mismatches.len(),
                if r.truncated { ", truncated" } else { "" }
            );
            for m in &r.mismatches {
                println!("at {}\n  reduction only: {:?}\n  labelled only: {:?}", m.state, m.reduction_only, m.labelled_only);
            }
        }
    }
    Ok(if !r.holds() {
        Outcome::Negative
    } else if r.truncated {
        Outcome::Unknown
    } else {
        Outcome::Pass
    })
}

fn correspond_random(n: usize, rule: FuseRule, opts: &Opts) -> Result<Outcome, Error> {
    let (mut states, mut truncated, mut failed) = (0, 0, 0);
    for (i, p) in random_programs(opts.seed, n, &GenConfig::default()).iter().enumerate() {
        let r = correspondence_check(&p.main, &p.defs, opts.bounds(), rule);
        states += r.states_checked;
        truncated += usize::from(r.truncated);
        if !r.holds() {
            failed += 1;
            if failed <= 3 {
                println!("program {i} fails:\n{p}");
                for m in r.mismatches.iter().take(2) {
                    println!("  at {}\n    reduction only: {:?}\n    labelled only: {:?}", m.state, m.reduction_only, m.labelled_only);
                }
            }
        }
    }
    println!("{n} programs, {states} states checked, {failed} failing, {truncated} truncated");
    Ok(if failed == 0 { Outcome::Pass } else { Outcome::Negative })
}

fn bisim(l: &Program, r: &Program, depth: usize, opts: &Opts) -> Result<Outcome, Error> {
    let mut defs = l.defs.clone();
    defs.extend(r.defs.clone());
    let rep = bisim_probe(&l.main, &r.main, &defs, depth);
    match opts.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&rep).expect("json")),
        _ => {
            println!("{} to depth {}", if rep.matched { "matched" } else { "unmatched" }, rep.depth);
            if let Some(u) = &rep.unmatched {
                println!("  {u}");
            }
        }
    }
    Ok(if rep.matched { Outcome::Pass } else { Outcome::Negative })
}

fn bisim_random(n: usize, depth: usize, opts: &Opts) -> Result<Outcome, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1));
    let mut failed = 0;
    for p in random_programs(opts.seed, n, &GenConfig::default()) {
        let (q, axiom) = mutate(&p.main, &p.defs, &mut rng);
        let rep = bisim_probe(&p.main, &q, &p.defs, depth);
        if !rep.matched {
            failed += 1;
            println!("{axiom}: {} vs {q}: {}", p.main, rep.unmatched.unwrap_or_default());
        }
    }
    println!("{n} pairs probed to depth {depth}, {failed} unmatched");
    Ok(if failed == 0 { Outcome::Pass } else { Outcome::Negative })
}
