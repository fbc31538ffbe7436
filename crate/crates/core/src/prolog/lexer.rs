use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Atom(String),
    /// A quoted atom; never read as an operator.
    Quoted(String),
    Var(String),
    Int(i64),
    Real(BigRational),
    /// A name immediately followed by `(`, which is consumed.
    Functor(String),
    Open,
    Close,
    OpenList,
    CloseList,
    OpenCurly,
    CloseCurly,
    Comma,
    Bar,
    End,
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn is_symbol_char(c: char) -> bool {
    "+-*/\\^<>=~:.?@#&$".contains(c)
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut lx = Lexer { chars: src.chars().collect(), pos: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        let t = lx.next()?;
        let eof = t.tok == Tok::Eof;
        out.push(t);
        if eof {
            return Ok(out);
        }
    }
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl Lexer {
    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek(0)?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: self.col, msg: msg.into() }
    }

    fn skip_layout(&mut self) -> Result<(), ParseError> {
        loop {
            match self.peek(0) {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    while !matches!(self.peek(0), None | Some('\n')) {
                        self.bump();
                    }
                }
                Some('/') if self.peek(1) == Some('*') => {
                    self.bump();
                    self.bump();
                    loop {
                        match self.bump() {
                            None => return Err(self.err("unterminated block comment")),
                            Some('*') if self.peek(0) == Some('/') => {
                                self.bump();
                                break;
                            }
                            _ => {}
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek(0) {
            if !f(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn next(&mut self) -> Result<Token, ParseError> {
        self.skip_layout()?;
        let (line, col) = (self.line, self.col);
        let mut tok = self.scan()?;
        if let Tok::Atom(a) | Tok::Quoted(a) = &tok {
            if self.peek(0) == Some('(') {
                self.bump();
                tok = Tok::Functor(a.clone());
            }
        }
        Ok(Token { tok, line, col })
    }

    fn scan(&mut self) -> Result<Tok, ParseError> {
        let Some(c) = self.peek(0) else { return Ok(Tok::Eof) };
        if c.is_ascii_digit() {
            return self.number();
        }
        if c == '_' || c.is_uppercase() {
            return Ok(Tok::Var(self.take_while(|c| c.is_alphanumeric() || c == '_')));
        }
        if c.is_alphabetic() {
            return Ok(Tok::Atom(self.take_while(|c| c.is_alphanumeric() || c == '_')));
        }
        if c == '\'' {
            return self.quoted();
        }
        if c == '"' {
            return Err(self.err("double-quoted strings are not supported"));
        }
        if c == '.' && matches!(self.peek(1), None | Some('%')) || c == '.' && self.peek(1).is_some_and(char::is_whitespace)
        {
            self.bump();
            return Ok(Tok::End);
        }
        let single = match c {
            '(' => Some(Tok::Open),
            ')' => Some(Tok::Close),
            '[' => Some(Tok::OpenList),
            ']' => Some(Tok::CloseList),
            '{' => Some(Tok::OpenCurly),
            '}' => Some(Tok::CloseCurly),
            ',' => Some(Tok::Comma),
            '|' => Some(Tok::Bar),
            '!' => Some(Tok::Atom("!".into())),
            ';' => Some(Tok::Atom(";".into())),
            _ => None,
        };
        if let Some(t) = single {
            self.bump();
            return Ok(t);
        }
        if is_symbol_char(c) {
            return Ok(Tok::Atom(self.take_while(is_symbol_char)));
        }
        Err(self.err(format!("unexpected character `{c}`")))
    }

    fn number(&mut self) -> Result<Tok, ParseError> {
        let int = self.take_while(|c| c.is_ascii_digit());
        if self.peek(0) == Some('.') && self.peek(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            let frac = self.take_while(|c| c.is_ascii_digit());
            let mut num: BigInt = format!("{int}{frac}").parse().unwrap();
            let mut den = BigInt::from(10u32).pow(frac.len() as u32);
            if matches!(self.peek(0), Some('e' | 'E')) {
                self.bump();
                let neg = match self.peek(0) {
                    Some('-') => {
                        self.bump();
                        true
                    }
                    Some('+') => {
                        self.bump();
                        false
                    }
                    _ => false,
                };
                let exp = self.take_while(|c| c.is_ascii_digit());
                let e: u32 = exp.parse().map_err(|_| self.err("malformed exponent"))?;
                let scale = BigInt::from(10u32).pow(e);
                if neg {
                    den *= scale;
                } else {
                    num *= scale;
                }
            }
            return Ok(Tok::Real(BigRational::new(num, den)));
        }
        int.parse().map(Tok::Int).map_err(|_| self.err(format!("integer `{int}` out of range")))
    }

    fn quoted(&mut self) -> Result<Tok, ParseError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err("unterminated quoted atom")),
                Some('\'') if self.peek(0) == Some('\'') => {
                    self.bump();
                    s.push('\'');
                }
                Some('\'') => return Ok(Tok::Quoted(s)),
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some(c) => s.push(c),
                    None => return Err(self.err("unterminated quoted atom")),
                },
                Some(c) => s.push(c),
            }
        }
    }
}
