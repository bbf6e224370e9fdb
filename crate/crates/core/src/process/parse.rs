//! Reader for programs: `NAME(params) := PROCESS` definitions followed by
//! `main PROCESS`.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::{Definition, Definitions, Prefix, Process, Program};
use crate::error::{Error, ParseError};
use crate::logic::parse::{formula, literal};
use crate::logic::{normalize_constraint, Formula, Ident};
use crate::syntax::{Cursor, Pos, Tok};

const PREFIXES: &[&str] = &["tau", "tell", "ask", "check", "fuse", "join"];
const RESERVED: &[&str] = &["tau", "tell", "ask", "check", "fuse", "join", "main", "new", "top", "bot"];

struct Scope {
    stack: Vec<Ident>,
}

impl Scope {
    fn resolve(&self, label: &str) -> Ident {
        self.stack
            .iter()
            .rev()
            .find(|i| i.label() == label)
            .cloned()
            .unwrap_or_else(|| Ident::name(label))
    }
}

struct Reader {
    cur: Cursor,
    scope: Scope,
}

impl Reader {
    fn formula(&mut self) -> Result<Formula, ParseError> {
        let scope = &self.scope;
        formula(&mut self.cur, &|l: &str| scope.resolve(l))
    }

    fn process(&mut self) -> Result<Process, ParseError> {
        let mut items = vec![self.sum()?];
        while self.cur.eat(&Tok::ParBar) {
            items.push(self.sum()?);
        }
        Ok(Process::par_all(items))
    }

    fn sum(&mut self) -> Result<Process, ParseError> {
        let pos = self.cur.pos();
        let first = self.unary()?;
        if *self.cur.peek() != Tok::Plus {
            return Ok(first);
        }
        let mut acc = summand(first, pos)?;
        while self.cur.eat(&Tok::Plus) {
            let pos = self.cur.pos();
            let next = summand(self.unary()?, pos)?;
            acc = Process::sum(acc, next).expect("summands are sums");
        }
        Ok(acc)
    }

    fn is_binder_group(&self) -> bool {
        if *self.cur.peek() != Tok::LParen {
            return false;
        }
        match (self.cur.peek_at(1), self.cur.peek_at(2)) {
            (Tok::Ident(s), Tok::Ident(_)) if s == "new" => true,
            (Tok::Ident(s), Tok::RParen | Tok::Comma) => !PREFIXES.contains(&s.as_str()),
            _ => false,
        }
    }

    fn binder_group(&mut self) -> Result<Vec<Ident>, ParseError> {
        self.cur.expect(&Tok::LParen)?;
        let mut out = Vec::new();
        loop {
            let is_name = self.cur.is_keyword("new") && matches!(self.cur.peek_at(1), Tok::Ident(_));
            if is_name {
                self.cur.bump();
            }
            let pos = self.cur.pos();
            let label = self.cur.expect_ident()?;
            if RESERVED.contains(&label.as_str()) {
                return Err(ParseError::new(pos, format!("`{label}` cannot be bound")));
            }
            out.push(if is_name { Ident::name(label) } else { Ident::var(label) });
            if self.cur.eat(&Tok::RParen) {
                return Ok(out);
            }
            self.cur.expect(&Tok::Comma)?;
        }
    }

    fn unary(&mut self) -> Result<Process, ParseError> {
        if self.is_binder_group() {
            let binders = self.binder_group()?;
            let depth = self.scope.stack.len();
            self.scope.stack.extend(binders.iter().cloned());
            let body = self.sum();
            self.scope.stack.truncate(depth);
            return Ok(Process::delim_all(binders, body?));
        }
        match self.cur.peek().clone() {
            Tok::Zero => {
                self.cur.bump();
                Ok(Process::nil())
            }
            Tok::LBrace => {
                self.cur.bump();
                let pos = self.cur.pos();
                let f = self.formula()?;
                self.cur.expect(&Tok::RBrace)?;
                check_horn(&f, pos)?;
                Ok(Process::Constraint(f))
            }
            Tok::LParen => {
                self.cur.bump();
                let p = self.process()?;
                self.cur.expect(&Tok::RParen)?;
                Ok(p)
            }
            Tok::Ident(s) if PREFIXES.contains(&s.as_str()) => {
                let pre = self.prefix()?;
                let cont = if self.cur.eat(&Tok::Dot) {
                    self.unary()?
                } else {
                    Process::nil()
                };
                Ok(Process::prefixed(pre, cont))
            }
            Tok::Ident(s) => {
                let pos = self.cur.pos();
                if RESERVED.contains(&s.as_str()) {
                    return Err(ParseError::new(pos, format!("unexpected keyword `{s}`")));
                }
                self.cur.bump();
                if *self.cur.peek() != Tok::LParen {
                    return Err(ParseError::new(
                        pos,
                        format!("expected `(` after `{s}`; constants are called as `{s}(...)`"),
                    ));
                }
                let args = self.args()?;
                Ok(Process::Call(s, args))
            }
            other => Err(self.cur.error(format!("expected a process, found {other}"))),
        }
    }

    fn args(&mut self) -> Result<Vec<Ident>, ParseError> {
        self.cur.expect(&Tok::LParen)?;
        let mut out = Vec::new();
        if self.cur.eat(&Tok::RParen) {
            return Ok(out);
        }
        loop {
            let label = self.cur.expect_ident()?;
            out.push(self.scope.resolve(&label));
            if self.cur.eat(&Tok::RParen) {
                return Ok(out);
            }
            self.cur.expect(&Tok::Comma)?;
        }
    }

    fn prefix(&mut self) -> Result<Prefix, ParseError> {
        let kw = self.cur.expect_ident()?;
        if kw == "tau" {
            return Ok(Prefix::Tau);
        }
        self.cur.expect(&Tok::LParen)?;
        let pos = self.cur.pos();
        let pre = match kw.as_str() {
            "tell" => {
                let f = self.formula()?;
                check_horn(&f, pos)?;
                Prefix::Tell(f)
            }
            "ask" => Prefix::Ask(self.goal(pos)?),
            "check" => {
                let mut lits = Vec::new();
                loop {
                    let scope = &self.scope;
                    lits.push(literal(&mut self.cur, &|l: &str| scope.resolve(l))?);
                    if *self.cur.peek() == Tok::RParen {
                        break;
                    }
                    self.cur.expect(&Tok::Comma)?;
                }
                Prefix::Check(lits)
            }
            "fuse" | "join" => {
                let label = self.cur.expect_ident()?;
                let x = self.scope.resolve(&label);
                if !x.is_var() {
                    return Err(ParseError::new(
                        pos,
                        format!("subject `{label}` of {kw} must be a delimited variable"),
                    ));
                }
                self.cur.expect(&Tok::Comma)?;
                let pos = self.cur.pos();
                let g = self.goal(pos)?;
                if kw == "fuse" {
                    Prefix::Fuse(x, g)
                } else {
                    Prefix::Join(x, g)
                }
            }
            _ => unreachable!("prefix keywords are enumerated"),
        };
        self.cur.expect(&Tok::RParen)?;
        Ok(pre)
    }

    fn goal(&mut self, pos: Pos) -> Result<Formula, ParseError> {
        let g = self.formula()?;
        if !g.is_positive() {
            return Err(ParseError::new(pos, format!("goal `{g}` must be positive")));
        }
        Ok(g)
    }
}

fn summand(p: Process, pos: Pos) -> Result<Process, ParseError> {
    match p {
        Process::Sum(_) => Ok(p),
        _ => Err(ParseError::new(pos, "summands of `+` must be prefixed processes or 0")),
    }
}

fn check_horn(f: &Formula, pos: Pos) -> Result<(), ParseError> {
    normalize_constraint(f)
        .map(|_| ())
        .map_err(|e| ParseError::new(pos, e.to_string()))
}

/// Parses a whole program and checks arities and guardedness.
pub fn parse_program(src: &str) -> Result<Program, Error> {
    let mut r = Reader {
        cur: Cursor::new(src)?,
        scope: Scope { stack: Vec::new() },
    };
    let mut defs = Definitions::new();
    while !r.cur.is_keyword("main") {
        if r.cur.at_eof() {
            return Err(r.cur.error("expected `main`").into());
        }
        let pos = r.cur.pos();
        let name = r.cur.expect_ident()?;
        if RESERVED.contains(&name.as_str()) {
            return Err(ParseError::new(pos, format!("`{name}` cannot be defined")).into());
        }
        r.cur.expect(&Tok::LParen)?;
        let mut params = Vec::new();
        if !r.cur.eat(&Tok::RParen) {
            loop {
                params.push(Ident::var(r.cur.expect_ident()?));
                if r.cur.eat(&Tok::RParen) {
                    break;
                }
                r.cur.expect(&Tok::Comma)?;
            }
        }
        r.cur.expect(&Tok::Assign)?;
        r.scope.stack = params.clone();
        let body = r.process()?;
        r.scope.stack.clear();
        r.cur.eat(&Tok::Semi);
        if defs.contains(&name) {
            return Err(Error::DuplicateDefinition { constant: name });
        }
        defs.insert(Definition { name, params, body });
    }
    r.cur.bump();
    let main = r.process()?;
    r.cur.eat(&Tok::Semi);
    if !r.cur.at_eof() {
        return Err(r.cur.error(format!("unexpected {} after main process", r.cur.peek())).into());
    }
    let program = Program { defs, main };
    validate(&program)?;
    Ok(program)
}

/// Parses a process with no definitions.
pub fn parse_process(src: &str) -> Result<Process, Error> {
    let mut r = Reader {
        cur: Cursor::new(src)?,
        scope: Scope { stack: Vec::new() },
    };
    let p = r.process()?;
    if !r.cur.at_eof() {
        return Err(r.cur.error(format!("unexpected {}", r.cur.peek())).into());
    }
    Ok(p)
}

/// Arity consistency and absence of unguarded recursion.
pub fn validate(program: &Program) -> Result<(), Error> {
    let mut arity: BTreeMap<String, usize> = program
        .defs
        .iter()
        .map(|d| (d.name.clone(), d.params.len()))
        .collect();
    let mut calls = Vec::new();
    program.main.calls(&mut calls);
    for d in program.defs.iter() {
        d.body.calls(&mut calls);
    }
    for (name, n) in calls {
        let expected = *arity.entry(name.clone()).or_insert(n);
        if expected != n {
            return Err(Error::ArityMismatch {
                constant: name,
                expected,
                found: n,
            });
        }
    }
    // Unguarded call graph must be acyclic.
    let edges: BTreeMap<&str, Vec<String>> = program
        .defs
        .iter()
        .map(|d| {
            let mut out = Vec::new();
            d.body.unguarded_calls(&mut out);
            out.retain(|c| program.defs.contains(c));
            (d.name.as_str(), out)
        })
        .collect();
    fn visit<'a>(
        n: &'a str,
        edges: &'a BTreeMap<&'a str, Vec<String>>,
        path: &mut Vec<&'a str>,
        done: &mut BTreeSet<&'a str>,
    ) -> Result<(), Error> {
        if path.contains(&n) {
            return Err(Error::UnguardedRecursion {
                constant: n.to_string(),
            });
        }
        if !done.insert(n) {
            return Ok(());
        }
        path.push(n);
        for m in &edges[n] {
            visit(m, edges, path, done)?;
        }
        path.pop();
        Ok(())
    }
    let mut done = BTreeSet::new();
    for &n in edges.keys() {
        let mut path = Vec::new();
        if !done.contains(n) {
            visit(n, &edges, &mut path, &mut done)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alice_shape() {
        let p = parse_program("main (x)( tell(ca(x)). fuse(x, a(x)). 0 )").unwrap();
        let x = Ident::var("x");
        let expected = Process::delim(
            x.clone(),
            Process::prefixed(
                Prefix::Tell(Formula::atom("ca", vec![x.clone()])),
                Process::prefixed(Prefix::Fuse(x.clone(), Formula::atom("a", vec![x])), Process::nil()),
            ),
        );
        assert_eq!(p.main, expected);
    }

    #[test]
    fn nil_is_empty_sum() {
        assert_eq!(parse_program("main 0").unwrap().main, Process::nil());
    }

    #[test]
    fn guarded_recursion_accepted() {
        let p = parse_program("X() := tau.X()  main X()").unwrap();
        assert_eq!(p.defs.len(), 1);
    }

    #[test]
    fn unguarded_recursion_rejected() {
        let err = parse_program("X() := X() main X()").unwrap_err();
        assert!(matches!(err, Error::UnguardedRecursion { .. }));
        let err = parse_program("X() := {a} || Y() ; Y() := X() main 0").unwrap_err();
        assert!(matches!(err, Error::UnguardedRecursion { .. }));
    }

    #[test]
    fn arity_mismatch_rejected() {
        let err = parse_program("X(a) := tau.0 main X(n, m)").unwrap_err();
        assert!(matches!(err, Error::ArityMismatch { expected: 1, found: 2, .. }));
        let err = parse_program("main lend(n) || lend()").unwrap_err();
        assert!(matches!(err, Error::ArityMismatch { .. }));
    }

    #[test]
    fn syntax_error_has_location() {
        match parse_program("main tau.\n  + 0").unwrap_err() {
            Error::Parse(e) => assert_eq!(e.pos.line, 2),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn sums_bind_tighter_than_parallel() {
        let p = parse_process("tau.0 + ask(a).0 || {b}").unwrap();
        let Process::Par(l, r) = p else { panic!() };
        assert!(matches!(*l, Process::Sum(ref b) if b.len() == 2));
        assert!(matches!(*r, Process::Constraint(_)));
    }

    #[test]
    fn names_and_variables() {
        let p = parse_process("(new n)(x) tell(c(n, x, m)).0").unwrap();
        let mut ids: Vec<Ident> = Vec::new();
        if let Process::Delim(a, body) = &p {
            ids.push(a.clone());
            if let Process::Delim(b, _) = &**body {
                ids.push(b.clone());
            }
        }
        assert_eq!(ids, vec![Ident::name("n"), Ident::var("x")]);
        assert_eq!(p.free_identifiers(), [Ident::name("m")].into_iter().collect());
    }

    #[test]
    fn fuse_on_name_rejected() {
        assert!(parse_process("fuse(n, p(n)).0").is_err());
        assert!(parse_process("(new n) fuse(n, p(n)).0").is_err());
    }

    #[test]
    fn non_horn_constraints_rejected() {
        assert!(parse_process("{(a ->> b) ->> c}").is_err());
        assert!(parse_process("ask(a -> b).0").is_err());
    }

    #[test]
    fn display_roundtrip() {
        for src in [
            "(x) (tell(ca(x)).fuse(x, a(x)).lendA(x) || {top})",
            "tau.0 + check(!paid(n), sent(n)).jail(n)",
            "(new o)(z) ({r(o,z)} || {r(o,z) -> p})",
            "tau.((x) ask(a(x)).0) || join(y, top).0",
        ] {
            let src = src.replace("join(y", "(y) join(y");
            let p = parse_process(&src).unwrap();
            let again = parse_process(&p.to_string()).unwrap();
            assert_eq!(again, p, "{src} printed as {p}");
        }
    }
}
