//! Deciding entailment in the Horn fragment of contract logic.

use contract_calculus::logic::{oracle_prove, parse_formula, parse_theory, Theory};

pub fn run_example() -> contract_calculus::Result<()> {
    let cases = [
        ("b ->> a. a ->> b.", "a /\\ b"),
        ("a ->> b.", "b"),
        ("a ->> b. b -> a.", "b"),
        ("b(n) /\\ c(n) ->> a(n). a(n) /\\ c(n) ->> b(n). a(n) /\\ b(n) ->> c(n).", "a(n) /\\ b(n) /\\ c(n)"),
        ("", "(p ->> p) -> p"),
        ("pay ->> ship. ship -> shipped.", "shipped"),
    ];
    for (src, goal) in cases {
        let formulas = parse_theory(src)?;
        let theory = Theory::from_formulas(&formulas)?;
        let goal = parse_formula(goal)?;
        let verdict = theory.entails(&goal);
        assert_eq!(verdict, oracle_prove(&formulas, &goal, 8), "the proof search agrees");
        println!("{:<70} |- {goal}: {verdict}", if src.is_empty() { "(empty)" } else { src });
        for c in theory.fired_contracts() {
            println!("    fired {c}");
        }
    }
    match Theory::from_formulas(&parse_theory("(a ->> b) ->> c.")?) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!("nested contracts are not Horn"),
    }
    Ok(())
}

fn main() -> contract_calculus::Result<()> {
    run_example()
}
