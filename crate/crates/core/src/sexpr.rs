//! S-expression form of query ASTs, as stored in datasets.
//!
//! Grammar (whitespace = single ASCII space in rendered output):
//!
//! ```text
//! query   := "(and" (" " atom)+ ")"
//! atom    := "(" relname (" " term)* ")"
//! term    := "?x" | "?y" | entity | literal
//! entity  := "(entity " uint " " quoted ")"
//! literal := "(lit " symbol " " quoted ")"
//! quoted  := '"' chars '"'          ; `\"` and `\\` escapes
//! relname := symbol := [A-Za-z0-9_-]+
//! ```
//!
//! The single-atom case is still wrapped in `(and ...)` so one grammar
//! covers every category. Entity constants carry both the KB id and the
//! canonical name for readability; literals carry their kind tag.

use crate::kb::{Atom, EntityId, Literal, Term, Value, Var};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SexprError {
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected character '{0}' at byte {1}")]
    UnexpectedChar(char, usize),
    #[error("expected '{expected}' at byte {at}")]
    Expected { expected: String, at: usize },
    #[error("invalid integer at byte {0}")]
    BadInt(usize),
}

/// Renders the conjunction of atoms. The entity name for id lookups comes
/// from the caller so this module stays independent of any state type.
pub fn render_atoms(atoms: &[Atom], entity_name: impl Fn(EntityId) -> String) -> String {
    let mut out = String::from("(and");
    for atom in atoms {
        out.push_str(" (");
        out.push_str(&atom.relation);
        for term in &atom.args {
            out.push(' ');
            match term {
                Term::Var(v) => out.push_str(v.symbol()),
                Term::Const(Value::Entity(id)) => {
                    let _ = write!(out, "(entity {} {})", id.0, quote(&entity_name(*id)));
                }
                Term::Const(Value::Literal(l)) => {
                    let _ = write!(out, "(lit {} {})", l.kind, quote(&l.text));
                }
            }
        }
        out.push(')');
    }
    out.push(')');
    out
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Parses a rendered query back into atoms. Entity names are returned
/// alongside ids so callers can cross-check against the entity table.
pub fn parse_atoms(input: &str) -> Result<Vec<(Atom, Vec<Option<String>>)>, SexprError> {
    let mut p = Parser { input: input.as_bytes(), pos: 0 };
    p.expect_str("(and")?;
    let mut atoms = Vec::new();
    loop {
        p.skip_ws();
        match p.peek()? {
            b')' => {
                p.pos += 1;
                break;
            }
            b'(' => atoms.push(p.atom()?),
            c => return Err(SexprError::UnexpectedChar(c as char, p.pos)),
        }
    }
    p.skip_ws();
    if p.pos != p.input.len() {
        return Err(SexprError::UnexpectedChar(p.input[p.pos] as char, p.pos));
    }
    Ok(atoms)
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Result<u8, SexprError> {
        self.input.get(self.pos).copied().ok_or(SexprError::UnexpectedEnd)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect_str(&mut self, s: &str) -> Result<(), SexprError> {
        if self.input[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            Ok(())
        } else {
            Err(SexprError::Expected { expected: s.to_string(), at: self.pos })
        }
    }

    fn symbol(&mut self) -> Result<String, SexprError> {
        let start = self.pos;
        while self.pos < self.input.len()
            && (self.input[self.pos].is_ascii_alphanumeric()
                || self.input[self.pos] == b'_'
                || self.input[self.pos] == b'-')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(SexprError::Expected { expected: "symbol".into(), at: start });
        }
        Ok(String::from_utf8_lossy(&self.input[start..self.pos]).into_owned())
    }

    fn quoted(&mut self) -> Result<String, SexprError> {
        if self.peek()? != b'"' {
            return Err(SexprError::Expected { expected: "\"".into(), at: self.pos });
        }
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.peek()? {
                b'"' => {
                    self.pos += 1;
                    return Ok(out);
                }
                b'\\' => {
                    self.pos += 1;
                    out.push(self.peek()? as char);
                    self.pos += 1;
                }
                c => {
                    out.push(c as char);
                    self.pos += 1;
                }
            }
        }
    }

    /// Parses one atom, returning the optional entity name per argument.
    fn atom(&mut self) -> Result<(Atom, Vec<Option<String>>), SexprError> {
        self.expect_str("(")?;
        let relation = self.symbol()?;
        let mut args = Vec::new();
        let mut names = Vec::new();
        loop {
            self.skip_ws();
            match self.peek()? {
                b')' => {
                    self.pos += 1;
                    return Ok((Atom { relation, args }, names));
                }
                b'?' => {
                    self.pos += 1;
                    let v = match self.peek()? {
                        b'x' => Var::Answer,
                        b'y' => Var::Existential,
                        c => return Err(SexprError::UnexpectedChar(c as char, self.pos)),
                    };
                    self.pos += 1;
                    args.push(Term::Var(v));
                    names.push(None);
                }
                b'(' => {
                    self.pos += 1;
                    let tag = self.symbol()?;
                    self.skip_ws();
                    match tag.as_str() {
                        "entity" => {
                            let start = self.pos;
                            let num = self.symbol()?;
                            let id: u64 =
                                num.parse().map_err(|_| SexprError::BadInt(start))?;
                            self.skip_ws();
                            let name = self.quoted()?;
                            self.skip_ws();
                            self.expect_str(")")?;
                            args.push(Term::Const(Value::Entity(EntityId(id))));
                            names.push(Some(name));
                        }
                        "lit" => {
                            let kind = self.symbol()?;
                            self.skip_ws();
                            let text = self.quoted()?;
                            self.skip_ws();
                            self.expect_str(")")?;
                            args.push(Term::Const(Value::Literal(Literal { kind, text })));
                            names.push(None);
                        }
                        other => {
                            return Err(SexprError::Expected {
                                expected: format!("entity|lit, got {other}"),
                                at: self.pos,
                            })
                        }
                    }
                }
                c => return Err(SexprError::UnexpectedChar(c as char, self.pos)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_the_documented_form() {
        let atoms = vec![
            Atom {
                relation: "EnrolledInClass".into(),
                args: vec![Term::Var(Var::Answer), Term::Var(Var::Existential)],
            },
            Atom {
                relation: "CourseTaughtByMe".into(),
                args: vec![Term::Var(Var::Existential)],
            },
            Atom { relation: "Undergrad".into(), args: vec![Term::Var(Var::Answer)] },
        ];
        let s = render_atoms(&atoms, |_| unreachable!());
        assert_eq!(
            s,
            "(and (EnrolledInClass ?x ?y) (CourseTaughtByMe ?y) (Undergrad ?x))"
        );
    }

    #[test]
    fn roundtrips_constants() {
        let atoms = vec![Atom {
            relation: "Due".into(),
            args: vec![
                Term::Const(Value::Entity(EntityId(7))),
                Term::Var(Var::Answer),
            ],
        }];
        let s = render_atoms(&atoms, |_| "Homework \"3\"".to_string());
        let parsed = parse_atoms(&s).unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0].0, atoms[0]);
        assert_eq!(parsed[0].1[0].as_deref(), Some("Homework \"3\""));

        let lit = vec![Atom {
            relation: "ScheduledFor".into(),
            args: vec![
                Term::Var(Var::Answer),
                Term::Const(Value::Literal(Literal::new("date", "Friday"))),
            ],
        }];
        let s = render_atoms(&lit, |_| unreachable!());
        assert_eq!(s, "(and (ScheduledFor ?x (lit date \"Friday\")))");
        assert_eq!(parse_atoms(&s).unwrap()[0].0, lit[0]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_atoms("(and (R ?x)").is_err());
        assert!(parse_atoms("(or (R ?x))").is_err());
        assert!(parse_atoms("(and (R ?z))").is_err());
    }
}
