//! Structural comparison of printed forms and values, such as
//! `put(plate,on((0.5,0,-1)))`.

use std::fmt;

/// A parsed form: a name, a point, or a name applied to arguments.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Atom(String),
    Point(Vec<f64>),
    App(String, Vec<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for TermError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {}: {}", self.position, self.message)
    }
}

impl std::error::Error for TermError {}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn err<T>(&self, message: &str) -> Result<T, TermError> {
        Err(TermError {
            position: self.pos,
            message: message.into(),
        })
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn token(&mut self) -> &str {
        self.skip_ws();
        let start = self.pos;
        while self
            .src
            .get(self.pos)
            .is_some_and(|c| !matches!(c, b'(' | b')' | b',') && !c.is_ascii_whitespace())
        {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn term(&mut self) -> Result<Term, TermError> {
        if self.eat(b'(') {
            let mut coords = Vec::new();
            loop {
                let tok = self.token().to_string();
                match tok.parse::<f64>() {
                    Ok(x) => coords.push(x),
                    Err(_) => return self.err("expected a number"),
                }
                if self.eat(b')') {
                    return Ok(Term::Point(coords));
                }
                if !self.eat(b',') {
                    return self.err("expected ',' or ')'");
                }
            }
        }
        let name = self.token().to_string();
        if name.is_empty() {
            return self.err("expected a name");
        }
        if !self.eat(b'(') {
            return Ok(Term::Atom(name));
        }
        let mut args = Vec::new();
        if self.eat(b')') {
            return Ok(Term::App(name, args));
        }
        loop {
            args.push(self.term()?);
            if self.eat(b')') {
                return Ok(Term::App(name, args));
            }
            if !self.eat(b',') {
                return self.err("expected ',' or ')'");
            }
        }
    }
}

impl Term {
    pub fn parse(text: &str) -> Result<Term, TermError> {
        let mut p = Parser {
            src: text.as_bytes(),
            pos: 0,
        };
        let t = p.term()?;
        p.skip_ws();
        if p.pos != text.len() {
            return p.err("trailing input");
        }
        Ok(t)
    }

    /// Equality with coordinates compared to within `tolerance`.
    pub fn matches(&self, other: &Term, tolerance: f64) -> bool {
        match (self, other) {
            (Term::Atom(a), Term::Atom(b)) => a == b,
            (Term::Point(a), Term::Point(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tolerance)
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| x.matches(y, tolerance))
            }
            _ => false,
        }
    }
}
