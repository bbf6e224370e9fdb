//! Built-in example systems.

use crate::encodings::{
    cell_get, cell_new, cell_set, compile_rules, encode_definitions, encode_pi, linda_in, linda_out, oplus,
    parse_pi, ring_definitions, ring_host, ring_system, ring_to_star_rule, sem_p, semaphore, Field,
};
use crate::error::{Error, Result};
use crate::logic::{Formula, Ident};
use crate::process::{parse_program, Definitions, Process, Program};

pub struct Entry {
    pub name: &'static str,
    pub summary: &'static str,
    build: fn() -> Result<Program>,
}

impl Entry {
    pub fn program(&self) -> Result<Program> {
        (self.build)()
    }

    /// Program text accepted by the program reader.
    pub fn source(&self) -> Result<String> {
        Ok(self.program()?.to_string())
    }
}

const HANDSHAKE: &str = "
Alice() := (x)(tell((b(x) /\\ c(x)) ->> a(x)).fuse(x, a(x)).lendA(x));
Bob() := (y)(tell((a(y) /\\ c(y)) ->> b(y)).fuse(y, b(y)).lendB(y));
Carl() := (z)(tell((a(z) /\\ b(z)) ->> c(z)).fuse(z, c(z)).lendC(z));
main Alice() || Bob() || Carl()";

const INSURED: &str = "
S() := (x)(tell((order(x) /\\ (pay(x) \\/ insurance(x))) ->> ship(x)).fuse(x, ship(x)).(S() || doShip(x)));
I() := (x)(tell(premium(x) ->> insurance(x)).fuse(x, insurance(x)).
          (I() || tau.check(!pay(x)).(refundS(x) || debtCollect(x))));
B0() := (x)(tell(ship(x) ->> (order(x) /\\ pay(x))).receive(x));
B1() := (x)(tell(ship(x) ->> (order(x) /\\ premium(x))).(receive(x) || tau.tell(pay(x))));
B2() := (x)(tell(order(x) /\\ pay(x)).receive(x));
B3() := (x)(tell(order(x) /\\ premium(x)).receive(x));
";

const JUDGE: &str = "
Buyer() := (x)(tell(send(x) ->> pay(x)).fuse(x, pay(x)).CheckOut(x));
CheckOut(x) := tau.NoPay(x) + tau.tell(paid(x)).(tau.tell(dispute(x)) + ask(sent(x)));
Seller() := (y)(tell(pay(y) ->> send(y)).fuse(y, send(y)).Ship(y));
Ship(y) := tau.NoSend(y) + tau.tell(sent(y)).(tau.tell(dispute(y)) + ask(paid(y)));
Judge() := (z)(join(z, pay(z) /\\ dispute(z)).check(!paid(z)).jailBuyer(z)
            || join(z, send(z) /\\ dispute(z)).check(!sent(z)).jailSeller(z));
main Buyer() || Seller() || Judge()";

const DINERS: &str = "
Bob() := (x) fuse(x, pasta(x) /\\ chicken(x)).SatiatedB();
Carl() := (x) fuse(x, pasta(x)).fuse(x, chicken(x)).SatiatedC();
";

const DISHES: [&str; 5] = ["pasta", "chicken", "cheese", "fruit", "cake"];

fn insured(main: &str) -> Result<Program> {
    parse_program(&format!("{INSURED}main {main}"))
}

/// The five dishes under a shared variable, laid out side by side or under ⊕.
fn buffet(exclusive: bool) -> Process {
    let x = Ident::var("x");
    let dishes: Vec<Formula> = DISHES.iter().map(|d| Formula::atom(*d, vec![x.clone()])).collect();
    let body = if exclusive {
        oplus(&dishes)
    } else {
        Process::par_all(dishes.into_iter().map(Process::Constraint))
    };
    Process::delim(x, body)
}

fn buffet_with(exclusive: bool, diner: &str) -> Result<Program> {
    let diners = parse_program(&format!("{DINERS}main 0"))?;
    Ok(Program {
        main: Process::par(buffet(exclusive), Process::call(diner, vec![])),
        defs: diners.defs,
    })
}

fn plain(main: Process) -> Program {
    Program {
        defs: Definitions::new(),
        main,
    }
}

fn semaphores() -> Result<Program> {
    let n = Ident::name("s");
    Ok(plain(Process::delim(
        n.clone(),
        Process::par_all([
            semaphore(&n, 1),
            sem_p(&n, Process::call("first", vec![])),
            sem_p(&n, Process::call("second", vec![])),
        ]),
    )))
}

fn cells() -> Result<Program> {
    let (c, v, w, y) = (Ident::name("c"), Ident::name("v"), Ident::name("w"), Ident::var("y"));
    let read = Process::delim(y.clone(), cell_get(&c, &y, Process::call("seen", vec![y.clone()])));
    Ok(plain(Process::delim_all(
        [c.clone(), v.clone(), w.clone()],
        Process::par(
            cell_new(&c, &v, cell_set(&c, &w, read)),
            Process::call("wrote", vec![w.clone()]),
        ),
    )))
}

fn linda() -> Result<Program> {
    let (a, b, w) = (Ident::name("a"), Ident::name("b"), Ident::var("w"));
    Ok(plain(Process::delim(
        a.clone(),
        Process::par_all([
            linda_out(&a, &b, Process::nil()),
            Process::delim(
                w.clone(),
                linda_in(&Field::Bind(w.clone()), &Field::Exact(b.clone()), Process::call("got", vec![w])),
            ),
            linda_in(&Field::Exact(a.clone()), &Field::Exact(b), Process::call("late", vec![])),
        ]),
    )))
}

fn pi_demo(src: &str) -> Result<Program> {
    let p = parse_pi(src)?;
    Ok(Program {
        defs: encode_definitions(&p.defs),
        main: encode_pi(&p.main),
    })
}

fn ring_to_star() -> Result<Program> {
    let compiled = compile_rules(&[ring_to_star_rule(4)])?;
    Ok(Program {
        main: compiled.encode_host(&ring_host(4, 4))?,
        defs: compiled.defs,
    })
}

fn ring(len: usize) -> Result<Program> {
    Ok(Program {
        defs: ring_definitions(4),
        main: ring_system(4, len),
    })
}

static ENTRIES: &[Entry] = &[
    Entry {
        name: "ex1_handshake",
        summary: "three kids agree to share their toys only together",
        build: || parse_program(HANDSHAKE),
    },
    Entry {
        name: "ex2_insured",
        summary: "seller and insurer serving all four buyers",
        build: || insured("S() || I() || B0() || B1() || B2() || B3()"),
    },
    Entry {
        name: "ex2_insured_b0",
        summary: "buyer paying upfront against a shipping promise",
        build: || insured("S() || I() || B0()"),
    },
    Entry {
        name: "ex2_insured_b1",
        summary: "buyer insured, paying later",
        build: || insured("S() || I() || B1()"),
    },
    Entry {
        name: "ex2_insured_b2",
        summary: "incautious buyer paying without guarantees",
        build: || insured("S() || I() || B2()"),
    },
    Entry {
        name: "ex2_insured_b3",
        summary: "insured buyer who never pays",
        build: || insured("S() || I() || B3()"),
    },
    Entry {
        name: "ex3_judge",
        summary: "buyer and seller with a judge resolving disputes",
        build: || parse_program(JUDGE),
    },
    Entry {
        name: "ex4_buffet_bob",
        summary: "open buffet, one diner taking two dishes at once",
        build: || buffet_with(false, "Bob"),
    },
    Entry {
        name: "ex4_buffet_carl",
        summary: "open buffet, one diner coming back for seconds",
        build: || buffet_with(false, "Carl"),
    },
    Entry {
        name: "ex4_buffet_prime_bob",
        summary: "single-trip buffet, diner taking two dishes at once",
        build: || buffet_with(true, "Bob"),
    },
    Entry {
        name: "ex4_buffet_prime_carl",
        summary: "single-trip buffet, diner coming back for seconds",
        build: || buffet_with(true, "Carl"),
    },
    Entry {
        name: "semaphores",
        summary: "one token, two waiters",
        build: semaphores,
    },
    Entry {
        name: "cells",
        summary: "create, overwrite and read a memory cell",
        build: cells,
    },
    Entry {
        name: "linda",
        summary: "one tuple, a pattern reader and an exact reader",
        build: linda,
    },
    Entry {
        name: "pi_handshake",
        summary: "encoded pi-calculus: one message over a private channel",
        build: || pi_demo("(new m)(n<m>.sent() | n(z).got(z))"),
    },
    Entry {
        name: "pi_relay",
        summary: "encoded pi-calculus: a message forwarded twice",
        build: || pi_demo("Relay(a, b) := a(z).b<z>.0 ; main (new m)(p<m>.0 | Relay(p, q) | Relay(q, r) | r(w).got(w))"),
    },
    Entry {
        name: "ring_to_star",
        summary: "compiled ring-to-star rule on a ring of four",
        build: ring_to_star,
    },
    Entry {
        name: "ring4",
        summary: "direct ring encoding on a ring of four",
        build: || ring(4),
    },
    Entry {
        name: "loop8",
        summary: "direct ring encoding on a loop of eight",
        build: || ring(8),
    },
];

pub fn entries() -> &'static [Entry] {
    ENTRIES
}

pub fn get(name: &str) -> Result<&'static Entry> {
    ENTRIES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownProgram(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::to_normal_form;
    use crate::reduction::{explore, reaches, Bounds, Reach};

    fn agent(name: &'static str) -> impl Fn(&crate::NormalForm) -> bool {
        move |s| s.has_agent(name)
    }

    #[test]
    fn every_entry_builds_and_reparses() {
        for e in entries() {
            let p = e.program().unwrap_or_else(|err| panic!("{}: {err}", e.name));
            let again = parse_program(&e.source().unwrap()).unwrap_or_else(|err| panic!("{}: {err}", e.name));
            assert_eq!(
                to_normal_form(&p.main, &p.defs).key(),
                to_normal_form(&again.main, &again.defs).key(),
                "{}",
                e.name
            );
        }
        assert!(matches!(get("nope"), Err(Error::UnknownProgram(_))));
    }

    #[test]
    fn buffets() {
        let check = |name: &str, who: &'static str| {
            let p = get(name).unwrap().program().unwrap();
            reaches(&p.main, &p.defs, &agent(who), Bounds::default())
        };
        assert!(matches!(check("ex4_buffet_carl", "SatiatedC"), Reach::Yes(_)));
        assert!(matches!(check("ex4_buffet_bob", "SatiatedB"), Reach::Yes(_)));
        assert!(matches!(check("ex4_buffet_prime_bob", "SatiatedB"), Reach::Yes(_)));
        assert!(matches!(check("ex4_buffet_prime_carl", "SatiatedC"), Reach::No));
    }

    #[test]
    fn insured_sale_buyers() {
        let run = |name: &str| {
            let p = get(name).unwrap().program().unwrap();
            explore(&p.main, &p.defs, Bounds::default())
        };
        let has = |g: &crate::reduction::StateGraph, a: &str| g.states.iter().any(|s| s.has_agent(a));
        let b0 = run("ex2_insured_b0");
        assert!(has(&b0, "receive") && has(&b0, "doShip") && !has(&b0, "refundS"));
        let b1 = run("ex2_insured_b1");
        assert!(has(&b1, "receive") && has(&b1, "doShip"));
        let b2 = run("ex2_insured_b2");
        assert!(has(&b2, "doShip") && !has(&b2, "refundS"));
        let b3 = run("ex2_insured_b3");
        assert!(has(&b3, "doShip") && has(&b3, "refundS") && has(&b3, "debtCollect"));
        for g in [&b0, &b1, &b2, &b3] {
            assert!(!g.truncated);
        }
    }

    #[test]
    fn idioms_and_encodings_run() {
        for (name, who) in [
            ("semaphores", "first"),
            ("semaphores", "second"),
            ("cells", "seen"),
            ("linda", "got"),
            ("pi_handshake", "got"),
            ("pi_relay", "got"),
            ("ring4", "B1"),
            ("loop8", "B1"),
        ] {
            let p = get(name).unwrap().program().unwrap();
            let r = reaches(&p.main, &p.defs, &agent(who), Bounds::default());
            assert!(matches!(r, Reach::Yes(_)), "{name} {who}");
        }
    }
}
