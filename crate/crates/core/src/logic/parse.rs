use super::formula::{Atom, Formula, Literal};
use super::ident::Ident;
use crate::error::ParseError;
use crate::syntax::{Cursor, Tok};

/// Maps an identifier occurring in an atom argument to a name or variable.
pub trait Resolve {
    fn resolve(&self, label: &str) -> Ident;
}

/// Every identifier is a name.
pub struct AllNames;

impl Resolve for AllNames {
    fn resolve(&self, label: &str) -> Ident {
        Ident::name(label)
    }
}

impl<F: Fn(&str) -> Ident> Resolve for F {
    fn resolve(&self, label: &str) -> Ident {
        self(label)
    }
}

const RESERVED: &[&str] = &["top", "bot"];

pub fn formula(cur: &mut Cursor, r: &dyn Resolve) -> Result<Formula, ParseError> {
    let lhs = disjunction(cur, r)?;
    match cur.peek() {
        Tok::Imp => {
            cur.bump();
            Ok(Formula::imp(lhs, formula(cur, r)?))
        }
        Tok::CImp => {
            cur.bump();
            Ok(Formula::cimp(lhs, formula(cur, r)?))
        }
        _ => Ok(lhs),
    }
}

fn disjunction(cur: &mut Cursor, r: &dyn Resolve) -> Result<Formula, ParseError> {
    let lhs = conjunction(cur, r)?;
    if cur.eat(&Tok::Or) {
        Ok(Formula::or(lhs, disjunction(cur, r)?))
    } else {
        Ok(lhs)
    }
}

fn conjunction(cur: &mut Cursor, r: &dyn Resolve) -> Result<Formula, ParseError> {
    let lhs = primary(cur, r)?;
    if cur.eat(&Tok::And) {
        Ok(Formula::and(lhs, conjunction(cur, r)?))
    } else {
        Ok(lhs)
    }
}

fn primary(cur: &mut Cursor, r: &dyn Resolve) -> Result<Formula, ParseError> {
    match cur.peek().clone() {
        Tok::LParen => {
            cur.bump();
            let f = formula(cur, r)?;
            cur.expect(&Tok::RParen)?;
            Ok(f)
        }
        Tok::Ident(s) if s == "top" => {
            cur.bump();
            Ok(Formula::Top)
        }
        Tok::Ident(s) if s == "bot" => {
            cur.bump();
            Ok(Formula::Bot)
        }
        Tok::Ident(_) => Ok(Formula::Atom(atom(cur, r)?)),
        other => Err(cur.error(format!("expected a formula, found {other}"))),
    }
}

pub fn atom(cur: &mut Cursor, r: &dyn Resolve) -> Result<Atom, ParseError> {
    let pred = cur.expect_ident()?;
    if RESERVED.contains(&pred.as_str()) {
        return Err(cur.error(format!("`{pred}` is not a predicate")));
    }
    let mut args = Vec::new();
    if cur.eat(&Tok::LParen) && !cur.eat(&Tok::RParen) {
        loop {
            let label = cur.expect_ident()?;
            args.push(r.resolve(&label));
            if cur.eat(&Tok::RParen) {
                break;
            }
            cur.expect(&Tok::Comma)?;
        }
    }
    Ok(Atom::new(pred, args))
}

pub fn literal(cur: &mut Cursor, r: &dyn Resolve) -> Result<Literal, ParseError> {
    if cur.eat(&Tok::Bang) {
        Ok(Literal::neg(atom(cur, r)?))
    } else {
        Ok(Literal::pos(atom(cur, r)?))
    }
}

/// Parses a single formula; identifiers are names.
pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    let mut cur = Cursor::new(src)?;
    let f = formula(&mut cur, &AllNames)?;
    if !cur.at_eof() {
        return Err(cur.error(format!("unexpected {}", cur.peek())));
    }
    Ok(f)
}

/// Parses a theory: formulas each terminated by `.` (the last one optionally).
pub fn parse_theory(src: &str) -> Result<Vec<Formula>, ParseError> {
    let mut cur = Cursor::new(src)?;
    let mut out = Vec::new();
    while !cur.at_eof() {
        out.push(formula(&mut cur, &AllNames)?);
        if !cur.eat(&Tok::Dot) && !cur.at_eof() {
            return Err(cur.error(format!("expected `.` after formula, found {}", cur.peek())));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arrows_are_right_associative_and_loosest() {
        let f = parse_formula("a /\\ b \\/ c ->> d -> e").unwrap();
        let expected = Formula::cimp(
            Formula::or(
                Formula::and(Formula::prop("a"), Formula::prop("b")),
                Formula::prop("c"),
            ),
            Formula::imp(Formula::prop("d"), Formula::prop("e")),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn atoms_with_arguments() {
        let f = parse_formula("msg(x, b)").unwrap();
        assert_eq!(
            f,
            Formula::atom("msg", vec![Ident::name("x"), Ident::name("b")])
        );
    }

    #[test]
    fn theory_with_terminators() {
        let t = parse_theory("b->>a. a->>b.").unwrap();
        assert_eq!(t.len(), 2);
        assert!(parse_theory("").unwrap().is_empty());
        assert!(parse_theory("a b").is_err());
    }

    #[test]
    fn print_parse_roundtrip() {
        for src in [
            "order(n) /\\ (pay(n) \\/ insurance(n)) ->> ship(n)",
            "(a ->> b) ->> c",
            "a -> b -> c",
            "top ->> top",
            "(a \\/ b) /\\ c",
        ] {
            let f = parse_formula(src).unwrap();
            assert_eq!(parse_formula(&f.to_string()).unwrap(), f, "{src}");
        }
    }
}
