//! Graded expressions: lexer, recursive-descent parser and evaluation in
//! the four reading modes.
//!
//! ```text
//! expr   := ('+'|'-')? term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' nat)?
//! atom   := rational | ident | 'd(' ident ')' | 'p[' ident ']' | '(' expr ')'
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use dpq_core::hbar::HbarOp;
use dpq_core::{GradedPoly, HalfDensityOp, Rational, Ring};
use num_bigint::BigInt;
use num_traits::{One, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// `d(x)` and `p[x]` are the momentum `p_x`.
    Polyvector,
    /// `d(x)` is the derivative and products are compositions.
    Operator,
    /// No momenta.
    Function,
    /// Operators with the formal parameter `hbar`.
    Hbar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExprError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    /// Empty unless the error is syntactic.
    pub expected: Vec<String>,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)?;
        if !self.expected.is_empty() {
            write!(f, "; expected one of: {}", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ExprError {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("number `{n}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn lex(text: &str, line: usize, col0: usize) -> Result<Vec<Spanned>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned { tok, col });
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Spanned { tok: Tok::Int(s.parse().expect("digits")), col });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Spanned { tok: Tok::Ident(chars[start..i].iter().collect()), col });
        } else {
            return Err(ExprError {
                line,
                column: col,
                message: format!("unexpected character `{c}`"),
                expected: vec![],
            });
        }
    }
    out.push(Spanned { tok: Tok::End, col: col0 + chars.len() });
    Ok(out)
}

/// Parsed expression; identifiers are resolved only at evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Rational),
    Ident { name: String, col: usize },
    Momentum { name: String, col: usize, bracket: bool },
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Mul(Box<Expr>, Box<Expr>, usize),
    Pow(Box<Expr>, u32, usize),
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    line: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ExprError> {
        let t = self.peek();
        Err(ExprError {
            line: self.line,
            column: t.col,
            message: format!("unexpected {}", t.tok.describe()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<Spanned, ExprError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            self.fail(&[name])
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = match self.peek().tok {
            Tok::Minus => {
                self.bump();
                Expr::Neg(Box::new(self.term()?))
            }
            Tok::Plus => {
                self.bump();
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.factor()?;
        while self.peek().tok == Tok::Star {
            let col = self.bump().col;
            acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?), col);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let atom = self.atom()?;
        if self.peek().tok != Tok::Caret {
            return Ok(atom);
        }
        let col = self.bump().col;
        match self.peek().tok.clone() {
            Tok::Int(n) => {
                self.bump();
                let e = u32::try_from(&n).map_err(|_| ExprError {
                    line: self.line,
                    column: col,
                    message: format!("exponent {n} is too large"),
                    expected: vec![],
                })?;
                Ok(Expr::Pow(Box::new(atom), e, col))
            }
            _ => self.fail(&["natural number"]),
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        const ATOM: [&str; 5] = ["number", "identifier", "`d(`", "`p[`", "`(`"];
        let t = self.peek().clone();
        match t.tok {
            Tok::Int(n) => {
                self.bump();
                if self.peek().tok == Tok::Slash {
                    self.bump();
                    match self.peek().tok.clone() {
                        Tok::Int(d) if !d.is_zero() => {
                            self.bump();
                            Ok(Expr::Num(Rational::new(n, d)))
                        }
                        Tok::Int(_) => Err(ExprError {
                            line: self.line,
                            column: self.peek().col,
                            message: "zero denominator".into(),
                            expected: vec![],
                        }),
                        _ => self.fail(&["natural number"]),
                    }
                } else {
                    Ok(Expr::Num(Rational::from_integer(n)))
                }
            }
            Tok::Ident(name) => {
                self.bump();
                let (close, closer, bracket) = match (name.as_str(), &self.peek().tok) {
                    ("d", Tok::LParen) => (Tok::RParen, "`)`", false),
                    ("p", Tok::LBracket) => (Tok::RBracket, "`]`", true),
                    _ => return Ok(Expr::Ident { name, col: t.col }),
                };
                self.bump();
                let inner = self.peek().clone();
                let Tok::Ident(coord) = inner.tok else {
                    return self.fail(&["identifier"]);
                };
                self.bump();
                self.expect(close, closer)?;
                Ok(Expr::Momentum {
                    name: coord,
                    col: t.col,
                    bracket,
                })
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => self.fail(&ATOM),
        }
    }
}

/// Parses `text`, reporting positions as `line` and `col0 + offset`.
pub fn parse_at(text: &str, line: usize, col0: usize) -> Result<Expr, ExprError> {
    let toks = lex(text, line, col0)?;
    let mut p = Parser { toks, pos: 0, line };
    let e = p.expr()?;
    if p.peek().tok != Tok::End {
        return p.fail(&["`+`", "`-`", "`*`", "`^`", "end of input"]);
    }
    Ok(e)
}

pub fn parse(text: &str) -> Result<Expr, ExprError> {
    parse_at(text, 1, 1)
}

/// Named subexpressions, expanded in place at evaluation.
pub type Definitions = BTreeMap<String, Expr>;

/// Values of one reading mode.
trait Carrier: Clone {
    fn constant(ring: &Arc<Ring>, c: Rational) -> Self;
    fn coord(ring: &Arc<Ring>, a: usize) -> Self;
    fn momentum(ring: &Arc<Ring>, a: usize) -> Option<Self>;
    fn hbar(ring: &Arc<Ring>) -> Option<Self>;
    fn add(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Result<Self, String>;
}

impl Carrier for GradedPoly {
    fn constant(ring: &Arc<Ring>, c: Rational) -> Self {
        GradedPoly::constant(ring, c)
    }
    fn coord(ring: &Arc<Ring>, a: usize) -> Self {
        GradedPoly::symbol(ring, a)
    }
    fn momentum(ring: &Arc<Ring>, a: usize) -> Option<Self> {
        Some(GradedPoly::symbol(ring, ring.momentum_index(a)))
    }
    fn hbar(_: &Arc<Ring>) -> Option<Self> {
        None
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, o: &Self) -> Result<Self, String> {
        Ok(self * o)
    }
}

impl Carrier for HalfDensityOp {
    fn constant(ring: &Arc<Ring>, c: Rational) -> Self {
        HalfDensityOp::identity(ring).scale(&c)
    }
    fn coord(ring: &Arc<Ring>, a: usize) -> Self {
        HalfDensityOp::from_normal_form(GradedPoly::symbol(ring, a))
    }
    fn momentum(ring: &Arc<Ring>, a: usize) -> Option<Self> {
        Some(HalfDensityOp::derivative(ring, a))
    }
    fn hbar(_: &Arc<Ring>) -> Option<Self> {
        None
    }
    fn add(&self, o: &Self) -> Self {
        HalfDensityOp::add(self, o)
    }
    fn neg(&self) -> Self {
        HalfDensityOp::neg(self)
    }
    fn mul(&self, o: &Self) -> Result<Self, String> {
        self.checked_compose(o).map_err(|e| e.to_string())
    }
}

/// `sum_n hbar^n D_n` before the order check.
#[derive(Clone)]
struct Series {
    ring: Arc<Ring>,
    terms: BTreeMap<u32, HalfDensityOp>,
}

impl Series {
    fn single(ring: &Arc<Ring>, n: u32, op: HalfDensityOp) -> Self {
        Series {
            ring: ring.clone(),
            terms: BTreeMap::from([(n, op)]),
        }
    }

    fn clean(mut self) -> Self {
        self.terms.retain(|_, op| !op.is_zero());
        self
    }
}

impl Carrier for Series {
    fn constant(ring: &Arc<Ring>, c: Rational) -> Self {
        Series::single(ring, 0, HalfDensityOp::identity(ring).scale(&c)).clean()
    }
    fn coord(ring: &Arc<Ring>, a: usize) -> Self {
        Series::single(ring, 0, HalfDensityOp::from_normal_form(GradedPoly::symbol(ring, a)))
    }
    fn momentum(ring: &Arc<Ring>, a: usize) -> Option<Self> {
        Some(Series::single(ring, 0, HalfDensityOp::derivative(ring, a)))
    }
    fn hbar(ring: &Arc<Ring>) -> Option<Self> {
        Some(Series::single(ring, 1, HalfDensityOp::identity(ring)))
    }
    fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (n, op) in &o.terms {
            let v = terms.remove(n).map_or_else(|| op.clone(), |t| t.add(op));
            terms.insert(*n, v);
        }
        Series { ring: self.ring.clone(), terms }.clean()
    }
    fn neg(&self) -> Self {
        Series {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(n, op)| (*n, op.neg())).collect(),
        }
    }
    fn mul(&self, o: &Self) -> Result<Self, String> {
        let max = self.ring.bounds().hbar_max;
        let mut out = Series {
            ring: self.ring.clone(),
            terms: BTreeMap::new(),
        };
        for (i, a) in &self.terms {
            for (j, b) in &o.terms {
                if i + j > max {
                    continue;
                }
                let c = a.checked_compose(b).map_err(|e| e.to_string())?;
                out = out.add(&Series::single(&self.ring, i + j, c));
            }
        }
        Ok(out)
    }
}

struct Evaluator<'a> {
    ring: &'a Arc<Ring>,
    defs: &'a Definitions,
    mode: Mode,
    line: usize,
    expanding: Vec<String>,
}

impl Evaluator<'_> {
    fn err(&self, column: usize, message: String) -> ExprError {
        ExprError {
            line: self.line,
            column,
            message,
            expected: vec![],
        }
    }

    fn coord_index(&self, name: &str, col: usize) -> Result<usize, ExprError> {
        self.ring
            .coord_index(name)
            .map_err(|_| self.err(col, format!("unknown identifier `{name}`")))
    }

    fn odd_atom(&self, e: &Expr) -> Option<String> {
        match e {
            Expr::Ident { name, .. } if !self.defs.contains_key(name) => {
                let a = self.ring.coord_index(name).ok()?;
                self.ring.coords()[a].is_odd().then(|| name.clone())
            }
            Expr::Momentum { name, .. } => {
                let a = self.ring.coord_index(name).ok()?;
                self.ring.coords()[a].is_odd().then(|| format!("d({name})"))
            }
            _ => None,
        }
    }

    fn eval<C: Carrier>(&mut self, e: &Expr) -> Result<C, ExprError> {
        match e {
            Expr::Num(q) => Ok(C::constant(self.ring, q.clone())),
            Expr::Ident { name, col } => {
                if let Some(def) = self.defs.get(name) {
                    if self.expanding.contains(name) {
                        return Err(self.err(*col, format!("definition `{name}` refers to itself")));
                    }
                    self.expanding.push(name.clone());
                    let v = self.eval(def);
                    self.expanding.pop();
                    return v.map_err(|mut err| {
                        err.message = format!("in definition `{name}`: {}", err.message);
                        err
                    });
                }
                if name == "hbar" {
                    return C::hbar(self.ring).ok_or_else(|| self.err(*col, "`hbar` is only allowed in hbar mode".into()));
                }
                Ok(C::coord(self.ring, self.coord_index(name, *col)?))
            }
            Expr::Momentum { name, col, .. } => {
                if self.mode == Mode::Function {
                    return Err(self.err(*col, format!("d({name}) is not allowed in a function")));
                }
                let a = self.coord_index(name, *col)?;
                C::momentum(self.ring, a).ok_or_else(|| self.err(*col, "momentum not allowed here".into()))
            }
            Expr::Add(a, b) => Ok(self.eval::<C>(a)?.add(&self.eval(b)?)),
            Expr::Sub(a, b) => Ok(self.eval::<C>(a)?.add(&self.eval::<C>(b)?.neg())),
            Expr::Neg(a) => Ok(self.eval::<C>(a)?.neg()),
            Expr::Mul(a, b, col) => {
                let x: C = self.eval(a)?;
                let y: C = self.eval(b)?;
                x.mul(&y).map_err(|m| self.err(*col, m))
            }
            Expr::Pow(a, k, col) => {
                if *k > 1 {
                    if let Some(s) = self.odd_atom(a) {
                        return Err(self.err(*col, format!("odd symbol `{s}` raised to the power {k}")));
                    }
                }
                let base: C = self.eval(a)?;
                let mut acc = C::constant(self.ring, Rational::one());
                for _ in 0..*k {
                    acc = acc.mul(&base).map_err(|m| self.err(*col, m))?;
                }
                Ok(acc)
            }
        }
    }
}

/// A parsed expression read in a given mode.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Poly(GradedPoly),
    Operator(HalfDensityOp),
    Hbar(HbarOp),
}

pub fn evaluate(e: &Expr, ring: &Arc<Ring>, defs: &Definitions, mode: Mode, line: usize) -> Result<Value, ExprError> {
    let mut ev = Evaluator {
        ring,
        defs,
        mode,
        line,
        expanding: Vec::new(),
    };
    match mode {
        Mode::Polyvector | Mode::Function => Ok(Value::Poly(ev.eval::<GradedPoly>(e)?)),
        Mode::Operator => Ok(Value::Operator(ev.eval::<HalfDensityOp>(e)?)),
        Mode::Hbar => {
            let s: Series = ev.eval(e)?;
            HbarOp::new(ring, s.terms)
                .map(Value::Hbar)
                .map_err(|err| ev.err(1, err.to_string()))
        }
    }
}

pub struct Reader<'a> {
    pub ring: &'a Arc<Ring>,
    pub defs: &'a Definitions,
    pub line: usize,
    pub column: usize,
}

impl<'a> Reader<'a> {
    pub fn new(ring: &'a Arc<Ring>, defs: &'a Definitions) -> Self {
        Reader { ring, defs, line: 1, column: 1 }
    }

    pub fn at(mut self, line: usize, column: usize) -> Self {
        self.line = line;
        self.column = column;
        self
    }

    fn read(&self, text: &str, mode: Mode) -> Result<Value, ExprError> {
        let e = parse_at(text, self.line, self.column)?;
        evaluate(&e, self.ring, self.defs, mode, self.line)
    }

    pub fn polyvector(&self, text: &str) -> Result<GradedPoly, ExprError> {
        match self.read(text, Mode::Polyvector)? {
            Value::Poly(p) => Ok(p),
            _ => unreachable!("polyvector mode yields polynomials"),
        }
    }

    pub fn function(&self, text: &str) -> Result<GradedPoly, ExprError> {
        match self.read(text, Mode::Function)? {
            Value::Poly(p) => Ok(p),
            _ => unreachable!("function mode yields polynomials"),
        }
    }

    pub fn operator(&self, text: &str) -> Result<HalfDensityOp, ExprError> {
        match self.read(text, Mode::Operator)? {
            Value::Operator(o) => Ok(o),
            _ => unreachable!("operator mode yields operators"),
        }
    }

    pub fn hbar(&self, text: &str) -> Result<HbarOp, ExprError> {
        match self.read(text, Mode::Hbar)? {
            Value::Hbar(h) => Ok(h),
            _ => unreachable!("hbar mode yields series"),
        }
    }
}

/// Canonical text of a polynomial or polyvector.
pub fn show_poly(p: &GradedPoly) -> String {
    p.format(false)
}

/// Canonical text of an operator as its normal-ordered word sum.
pub fn show_operator(op: &HalfDensityOp) -> String {
    op.format()
}

pub fn show_hbar(op: &HbarOp) -> String {
    op.format()
}
