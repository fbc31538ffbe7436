use std::collections::HashMap;

use super::lexer::{tokenize, Tok, Token};
use super::term::Term;
use crate::error::ParseError;

/// One clause or directive as read, with its variable names.
#[derive(Clone, Debug)]
pub struct ReadTerm {
    pub term: Term,
    pub var_names: Vec<String>,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn infix_op(name: &str) -> Option<(u32, &'static str)> {
    Some(match name {
        ":-" | "-->" => (1200, "xfx"),
        ";" | "|" => (1100, "xfy"),
        "->" => (1050, "xfy"),
        "," => (1000, "xfy"),
        "=" | "\\=" | "==" | "\\==" | "@<" | "@>" | "@=<" | "@>=" | "=.." | "is" | "=:=" | "=\\=" | "<" | ">"
        | "=<" | ">=" => (700, "xfx"),
        "+" | "-" | "/\\" | "\\/" => (500, "yfx"),
        "*" | "/" | "//" | "mod" | "rem" | "<<" | ">>" => (400, "yfx"),
        "**" => (200, "xfx"),
        "^" | ":" => (200, "xfy"),
        _ => return None,
    })
}

fn prefix_op(name: &str) -> Option<(u32, &'static str)> {
    Some(match name {
        ":-" | "?-" => (1200, "fx"),
        "\\+" => (900, "fy"),
        "-" | "+" | "\\" => (200, "fy"),
        _ => return None,
    })
}

/// Reads every clause of `src`.
pub fn read_terms(src: &str) -> Result<Vec<ReadTerm>, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, vars: HashMap::new(), names: Vec::new() };
    let mut out = Vec::new();
    while p.peek().tok != Tok::Eof {
        let start = p.peek().clone();
        p.vars.clear();
        p.names.clear();
        let term = p.parse(1200)?;
        if p.peek().tok != Tok::End {
            return Err(p.err("expected `.` at end of clause"));
        }
        p.pos += 1;
        out.push(ReadTerm { term, var_names: std::mem::take(&mut p.names), line: start.line, col: start.col });
    }
    Ok(out)
}

/// Reads a single term such as a query; a trailing `.` is optional.
pub fn read_term(src: &str) -> Result<ReadTerm, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, vars: HashMap::new(), names: Vec::new() };
    let term = p.parse(1200)?;
    if p.peek().tok == Tok::End {
        p.pos += 1;
    }
    if p.peek().tok != Tok::Eof {
        return Err(p.err("unexpected text after term"));
    }
    Ok(ReadTerm { term, var_names: p.names, line: 1, col: 1 })
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    vars: HashMap<String, usize>,
    names: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn next(&mut self) -> Token {
        let t = self.peek().clone();
        self.pos += 1;
        t
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let t = self.peek();
        ParseError { line: t.line, col: t.col, msg: msg.into() }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek().tok == tok {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn var(&mut self, name: &str) -> Term {
        if name == "_" {
            self.names.push("_".into());
            return Term::Var(self.names.len() - 1);
        }
        if let Some(&i) = self.vars.get(name) {
            return Term::Var(i);
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.vars.insert(name.to_string(), i);
        Term::Var(i)
    }

    fn starts_term(&self) -> bool {
        match &self.peek().tok {
            Tok::Atom(a) => infix_op(a).is_none() || prefix_op(a).is_some(),
            Tok::Close | Tok::CloseList | Tok::CloseCurly | Tok::Comma | Tok::Bar | Tok::End | Tok::Eof => false,
            _ => true,
        }
    }

    fn parse(&mut self, max: u32) -> Result<Term, ParseError> {
        let (mut left, mut left_prec) = self.primary(max)?;
        loop {
            let name = match &self.peek().tok {
                Tok::Atom(a) => a.clone(),
                Tok::Comma => ",".into(),
                Tok::Bar => ";".into(),
                _ => break,
            };
            let Some((p, kind)) = infix_op(&name) else { break };
            let (la, ra) = match kind {
                "xfy" => (p - 1, p),
                "yfx" => (p, p - 1),
                _ => (p - 1, p - 1),
            };
            if p > max || left_prec > la {
                break;
            }
            self.pos += 1;
            let right = self.parse(ra)?;
            left = Term::compound(&name, vec![left, right]);
            left_prec = p;
        }
        Ok(left)
    }

    fn args(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut args = vec![self.parse(999)?];
        while self.peek().tok == Tok::Comma {
            self.pos += 1;
            args.push(self.parse(999)?);
        }
        self.expect(Tok::Close, "`)`")?;
        Ok(args)
    }

    fn primary(&mut self, max: u32) -> Result<(Term, u32), ParseError> {
        let t = self.next();
        Ok(match t.tok {
            Tok::Int(i) => (Term::Int(i), 0),
            Tok::Real(r) => (Term::Real(r.into()), 0),
            Tok::Var(v) => (self.var(&v), 0),
            Tok::Functor(f) => (Term::compound(&f, self.args()?), 0),
            Tok::Open => {
                let inner = self.parse(1200)?;
                self.expect(Tok::Close, "`)`")?;
                (inner, 0)
            }
            Tok::OpenCurly => {
                if self.peek().tok == Tok::CloseCurly {
                    self.pos += 1;
                    return Ok((Term::atom("{}"), 0));
                }
                let inner = self.parse(1200)?;
                self.expect(Tok::CloseCurly, "`}`")?;
                (Term::compound("{}", vec![inner]), 0)
            }
            Tok::OpenList => {
                if self.peek().tok == Tok::CloseList {
                    self.pos += 1;
                    return Ok((Term::nil(), 0));
                }
                let mut items = vec![self.parse(999)?];
                while self.peek().tok == Tok::Comma {
                    self.pos += 1;
                    items.push(self.parse(999)?);
                }
                let tail = if self.peek().tok == Tok::Bar {
                    self.pos += 1;
                    self.parse(999)?
                } else {
                    Term::nil()
                };
                self.expect(Tok::CloseList, "`]`")?;
                (Term::list(items, tail), 0)
            }
            Tok::Quoted(a) => (Term::atom(&a), 0),
            Tok::Atom(a) => {
                if a == "-" {
                    match self.peek().tok {
                        Tok::Int(i) => {
                            self.pos += 1;
                            return Ok((Term::Int(-i), 0));
                        }
                        Tok::Real(ref r) => {
                            let r = -r.clone();
                            self.pos += 1;
                            return Ok((Term::Real(r.into()), 0));
                        }
                        _ => {}
                    }
                }
                if let Some((p, kind)) = prefix_op(&a) {
                    if self.starts_term() {
                        let p = p.min(max.max(999));
                        let arg_max = if kind == "fy" { p } else { p - 1 };
                        let arg = self.parse(arg_max)?;
                        return Ok((Term::compound(&a, vec![arg]), p));
                    }
                }
                (Term::atom(&a), 0)
            }
            Tok::End | Tok::Eof => {
                self.pos -= 1;
                return Err(self.err("unexpected end of clause"));
            }
            _ => {
                self.pos -= 1;
                return Err(self.err("unexpected token"));
            }
        })
    }
}
