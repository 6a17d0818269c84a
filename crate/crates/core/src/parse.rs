//! The element expression language.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor ("*"? factor)*
//! factor := atom ("^" sint)?
//! atom   := "p" | "t" uint | "g" uint | uint | "(" expr ")" | "-" atom
//! ```
//!
//! Juxtaposition multiplies (`3 t1 t2`), but only a token that can *start*
//! an atom other than "-" continues a term, so `a - b` stays a
//! subtraction. `p` is the prime of the ring, `t<i>` the i-th variable,
//! `g<i>` the i-th group generator `1 + t<i>`. Exponents are integers;
//! negative ones need a unit base.

use crate::error::{Error, Result};
use crate::ring::{Character, GroupWord, IwasawaElement, RingCtx};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElementAst {
    Prime,
    /// 1-based variable index as written.
    Var(usize),
    /// 1-based generator index as written.
    Gen(usize),
    Int(u128),
    Neg(Box<ElementAst>),
    Add(Box<ElementAst>, Box<ElementAst>),
    Sub(Box<ElementAst>, Box<ElementAst>),
    Mul(Box<ElementAst>, Box<ElementAst>),
    Pow(Box<ElementAst>, i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok {
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    At,
    Prime,
    Var(usize),
    Gen(usize),
    Int(u128),
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn number(&mut self) -> Result<u128> {
        let start = self.pos;
        let mut v: u128 = 0;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            v = v
                .checked_mul(10)
                .and_then(|v| v.checked_add((self.src[self.pos] - b'0') as u128))
                .ok_or_else(|| Error::Syntax {
                    offset: start,
                    message: "integer literal too large".into(),
                })?;
            self.pos += 1;
        }
        Ok(v)
    }

    /// Next token with the byte offset where it starts; None at the end.
    fn next(&mut self) -> Result<Option<(usize, Tok)>> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let at = self.pos;
        let tok = match self.src[self.pos] {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'[' => {
                self.pos += 1;
                Tok::LBracket
            }
            b']' => {
                self.pos += 1;
                Tok::RBracket
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            b'@' => {
                self.pos += 1;
                Tok::At
            }
            b'p' => {
                self.pos += 1;
                Tok::Prime
            }
            c @ (b't' | b'g') => {
                self.pos += 1;
                if self.pos >= self.src.len() || !self.src[self.pos].is_ascii_digit() {
                    return Err(Error::Syntax {
                        offset: at,
                        message: format!("'{}' must be followed by an index", c as char),
                    });
                }
                let n = self.number()?;
                let idx = usize::try_from(n).map_err(|_| Error::Syntax {
                    offset: at,
                    message: "index too large".into(),
                })?;
                if c == b't' {
                    Tok::Var(idx)
                } else {
                    Tok::Gen(idx)
                }
            }
            c if c.is_ascii_digit() => Tok::Int(self.number()?),
            c => {
                return Err(Error::Syntax {
                    offset: at,
                    message: format!("unexpected character '{}'", c as char),
                })
            }
        };
        Ok(Some((at, tok)))
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    end: usize,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Parser> {
        let mut lx = Lexer::new(src);
        let mut toks = Vec::new();
        while let Some(t) = lx.next()? {
            toks.push(t);
        }
        Ok(Parser { toks, end: src.len(), pos: 0 })
    }

    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.pos).map(|&(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|&(o, _)| o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.peek();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Syntax { offset: self.offset(), message: format!("expected {what}") })
        }
    }

    fn expr(&mut self) -> Result<ElementAst> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = ElementAst::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = ElementAst::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn starts_atom_for_juxtaposition(t: Tok) -> bool {
        matches!(
            t,
            Tok::Prime | Tok::Var(_) | Tok::Gen(_) | Tok::Int(_) | Tok::LParen
        )
    }

    fn term(&mut self) -> Result<ElementAst> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = ElementAst::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(t) if Self::starts_atom_for_juxtaposition(t) => {
                    lhs = ElementAst::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<ElementAst> {
        let base = self.atom()?;
        if self.peek() == Some(Tok::Caret) {
            self.pos += 1;
            let neg = if self.peek() == Some(Tok::Minus) {
                self.pos += 1;
                true
            } else {
                false
            };
            let at = self.offset();
            match self.bump() {
                Some(Tok::Int(n)) => {
                    let e = i64::try_from(n).map_err(|_| Error::Syntax {
                        offset: at,
                        message: "exponent too large".into(),
                    })?;
                    Ok(ElementAst::Pow(Box::new(base), if neg { -e } else { e }))
                }
                _ => Err(Error::Syntax {
                    offset: at,
                    message: "expected integer exponent after '^'".into(),
                }),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<ElementAst> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Prime) => Ok(ElementAst::Prime),
            Some(Tok::Var(i)) => Ok(ElementAst::Var(i)),
            Some(Tok::Gen(i)) => Ok(ElementAst::Gen(i)),
            Some(Tok::Int(n)) => Ok(ElementAst::Int(n)),
            Some(Tok::Minus) => Ok(ElementAst::Neg(Box::new(self.atom()?))),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            _ => Err(Error::Syntax {
                offset: at,
                message: "expected 'p', a variable, a generator, an integer, '-' or '('".into(),
            }),
        }
    }

    fn finish<T>(self, value: T) -> Result<T> {
        if self.pos == self.toks.len() {
            Ok(value)
        } else {
            Err(Error::Syntax {
                offset: self.offset(),
                message: "unexpected trailing input".into(),
            })
        }
    }
}

/// Parses an expression into its syntax tree without needing a ring.
pub fn parse(src: &str) -> Result<ElementAst> {
    let mut p = Parser::new(src)?;
    let ast = p.expr()?;
    p.finish(ast)
}

/// Parses a group word written as a bracketed integer vector, `[1,0,-2]`.
pub fn parse_word(src: &str) -> Result<GroupWord> {
    let mut p = Parser::new(src)?;
    let v = p.int_vector()?;
    p.finish(GroupWord(v))
}

/// Parses a character written as `[e1,...,ed] @ M`.
pub fn parse_character(src: &str, p: u64) -> Result<Character> {
    let mut ps = Parser::new(src)?;
    let v = ps.int_vector()?;
    ps.expect(Tok::At, "'@'")?;
    let at = ps.offset();
    let level = match ps.bump() {
        Some(Tok::Int(n)) => u32::try_from(n).map_err(|_| Error::Syntax {
            offset: at,
            message: "level too large".into(),
        })?,
        _ => {
            return Err(Error::Syntax {
                offset: at,
                message: "expected integer level after '@'".into(),
            })
        }
    };
    let exps: Vec<i128> = v.iter().map(|&a| a as i128).collect();
    ps.finish(())?;
    Character::new(p, level, &exps)
}

impl Parser {
    fn int_vector(&mut self) -> Result<Vec<i64>> {
        self.expect(Tok::LBracket, "'['")?;
        let mut v = Vec::new();
        if self.peek() == Some(Tok::RBracket) {
            self.pos += 1;
            return Ok(v);
        }
        loop {
            let neg = if self.peek() == Some(Tok::Minus) {
                self.pos += 1;
                true
            } else {
                false
            };
            let at = self.offset();
            match self.bump() {
                Some(Tok::Int(n)) => {
                    let x = i64::try_from(n).map_err(|_| Error::Syntax {
                        offset: at,
                        message: "entry too large".into(),
                    })?;
                    v.push(if neg { -x } else { x });
                }
                _ => {
                    return Err(Error::Syntax {
                        offset: at,
                        message: "expected integer entry".into(),
                    })
                }
            }
            match self.bump() {
                Some(Tok::Comma) => continue,
                Some(Tok::RBracket) => return Ok(v),
                _ => {
                    return Err(Error::Syntax {
                        offset: self.offset(),
                        message: "expected ',' or ']'".into(),
                    })
                }
            }
        }
    }
}

/// Evaluates a syntax tree in a concrete ring.
pub fn elaborate(ast: &ElementAst, ctx: RingCtx) -> Result<IwasawaElement> {
    match ast {
        ElementAst::Prime => Ok(ctx.constant(ctx.p as i128)),
        ElementAst::Var(i) => {
            if *i == 0 || *i > ctx.nvars {
                return Err(Error::Index { index: *i, nvars: ctx.nvars });
            }
            ctx.var(i - 1)
        }
        ElementAst::Gen(i) => {
            if *i == 0 || *i > ctx.nvars {
                return Err(Error::Index { index: *i, nvars: ctx.nvars });
            }
            ctx.one().add(&ctx.var(i - 1)?)
        }
        ElementAst::Int(n) => {
            let m = ctx.modulus() as u128;
            Ok(ctx.constant((n % m) as i128))
        }
        ElementAst::Neg(a) => Ok(elaborate(a, ctx)?.neg()),
        ElementAst::Add(a, b) => elaborate(a, ctx)?.add(&elaborate(b, ctx)?),
        ElementAst::Sub(a, b) => elaborate(a, ctx)?.sub(&elaborate(b, ctx)?),
        ElementAst::Mul(a, b) => elaborate(a, ctx)?.mul(&elaborate(b, ctx)?),
        ElementAst::Pow(a, e) => {
            let base = elaborate(a, ctx)?;
            if *e >= 0 {
                base.pow(*e as u64)
            } else {
                base.unit_inverse()?.pow(e.unsigned_abs())
            }
        }
    }
}

/// One-step convenience: parse then elaborate.
pub fn parse_element(src: &str, ctx: RingCtx) -> Result<IwasawaElement> {
    elaborate(&parse(src)?, ctx)
}

impl ElementAst {
    fn prec(&self) -> u8 {
        match self {
            ElementAst::Add(..) | ElementAst::Sub(..) => 1,
            ElementAst::Mul(..) => 2,
            ElementAst::Pow(..) => 3,
            ElementAst::Neg(..) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let me = self.prec();
        if me < min {
            write!(f, "(")?;
        }
        match self {
            ElementAst::Prime => write!(f, "p")?,
            ElementAst::Var(i) => write!(f, "t{i}")?,
            ElementAst::Gen(i) => write!(f, "g{i}")?,
            ElementAst::Int(n) => write!(f, "{n}")?,
            ElementAst::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 4)?;
            }
            ElementAst::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)?;
            }
            ElementAst::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            ElementAst::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)?;
            }
            ElementAst::Pow(a, e) => {
                a.fmt_prec(f, 5)?;
                write!(f, "^{e}")?;
            }
        }
        if me < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for ElementAst {
    /// Prints with the fewest parentheses that reparse to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
