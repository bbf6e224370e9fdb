//! Seeded single runs and their serializable traces.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lts::top_steps;
use crate::process::{to_normal_form, Definitions, Process};
use crate::reduction::successors;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    #[default]
    Reduction,
    Lts,
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semantics::Reduction => "reduction",
            Semantics::Lts => "lts",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    /// Prefix fired, or `tau` for a labelled internal step.
    pub rule: String,
    /// Fusion or join performed, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binding: Option<String>,
    /// Resulting state in canonical syntax.
    pub state: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub semantics: Semantics,
    pub seed: u64,
    pub initial: String,
    pub steps: Vec<TraceStep>,
    /// The run stopped because no step was enabled.
    pub complete: bool,
}

/// One run of at most `max_steps` steps, choosing among enabled steps with a
/// generator seeded by `seed`.
pub fn run(p: &Process, defs: &Definitions, semantics: Semantics, seed: u64, max_steps: usize) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = to_normal_form(p, defs);
    let initial = state.key().to_string();
    let mut steps = Vec::new();
    let mut complete = false;
    while steps.len() < max_steps {
        let options: Vec<(TraceStep, _)> = match semantics {
            Semantics::Reduction => successors(&state, defs)
                .into_iter()
                .map(|(r, next)| {
                    let binding = r
                        .fusion
                        .as_ref()
                        .map(|f| f.to_string())
                        .or_else(|| r.join.as_ref().map(|(x, n)| format!("{{{x} -> {n}}}")));
                    let step = TraceStep {
                        rule: r.rule.to_string().to_lowercase(),
                        binding,
                        state: next.key().to_string(),
                    };
                    (step, next)
                })
                .collect(),
            Semantics::Lts => top_steps(&state.to_process(), defs)
                .iter()
                .map(|q| {
                    let next = to_normal_form(q, defs);
                    let step = TraceStep {
                        rule: "tau".into(),
                        binding: None,
                        state: next.key().to_string(),
                    };
                    (step, next)
                })
                .collect(),
        };
        if options.is_empty() {
            complete = true;
            break;
        }
        let pick = rng.gen_range(0..options.len());
        let (step, next) = options.into_iter().nth(pick).expect("index in range");
        steps.push(step);
        state = next;
    }
    Trace {
        semantics,
        seed,
        initial,
        steps,
        complete,
    }
}

impl Trace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> crate::Result<Trace> {
        serde_json::from_str(text).map_err(|e| crate::Error::Trace(e.to_string()))
    }

    pub fn final_state(&self) -> &str {
        self.steps.last().map_or(&self.initial, |s| &s.state)
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# {} run, seed {}", self.semantics, self.seed)?;
        writeln!(f, "   {}", self.initial)?;
        for (k, s) in self.steps.iter().enumerate() {
            match &s.binding {
                Some(b) => writeln!(f, "{:>3} [{} {}] {}", k + 1, s.rule, b, s.state)?,
                None => writeln!(f, "{:>3} [{}] {}", k + 1, s.rule, s.state)?,
            }
        }
        if self.complete {
            writeln!(f, "# stuck after {} steps", self.steps.len())
        } else {
            writeln!(f, "# step limit reached")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{parse_process, parse_program};

    fn sample() -> crate::Program {
        parse_program(
            "A() := (x)(tell(b(x) ->> a(x)).fuse(x, a(x)).doneA(x));
             B() := (y)(tell(a(y) ->> b(y)).fuse(y, b(y)).doneB(y));
             main A() || B()",
        )
        .unwrap()
    }

    #[test]
    fn json_round_trip() {
        let p = sample();
        for sem in [Semantics::Reduction, Semantics::Lts] {
            let t = run(&p.main, &p.defs, sem, 7, 50);
            assert!(t.complete);
            let back = Trace::from_json(&t.to_json()).unwrap();
            assert_eq!(back, t);
            for s in &back.steps {
                let q = parse_process(&s.state).unwrap();
                assert_eq!(to_normal_form(&q, &p.defs).key(), s.state);
            }
            let end = parse_process(t.final_state()).unwrap();
            assert!(to_normal_form(&end, &p.defs).has_agent("doneA"));
        }
    }

    #[test]
    fn seeded_runs_repeat() {
        let p = sample();
        let a = run(&p.main, &p.defs, Semantics::Reduction, 3, 20);
        let b = run(&p.main, &p.defs, Semantics::Reduction, 3, 20);
        assert_eq!(a, b);
        let short = run(&p.main, &p.defs, Semantics::Reduction, 3, 1);
        assert_eq!(short.steps.len(), 1);
        assert!(!short.complete);
        assert!(a.to_string().contains("stuck"));
    }
}
