//! Expression language for current-algebra elements.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor ('*' factor)*
//! factor  := '-' factor | primary ('^' uint)?
//! primary := uint ('/' uint)? | param | 't'
//!          | ident ('[' uint (',' uint)* ']')? '(' int ')'
//!          | '[' expr ',' expr ']' | '(' expr ')'
//! ```
//!
//! `name(n)` is the generator `name ⊗ A_n`, `t` the central element and
//! `a2`, `e1`, `e2` the family parameters. Rendering with `Display` on
//! [`ExtendedElement`] produces text this parser reads back exactly.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::central::{extended_bracket, Cocycle, ExtendedElement};
use crate::coefficients::{Param, ParamPoly, Rational};
use crate::current::{is_function_algebra, tensor, CurrentAlgebra};
use crate::error::{Error, Result};
use crate::kn::FnElement;
use crate::lie::RatMatrix;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("parse error at {}: {message}", position_text(*.pos, *.len))]
pub struct ParseError {
    /// Character offset of the offending token.
    pub pos: usize,
    /// Length of the input, to say "end of input" when `pos == len`.
    pub len: usize,
    pub message: String,
}

fn position_text(pos: usize, len: usize) -> String {
    if pos >= len {
        "end of input".into()
    } else {
        format!("position {pos}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Number(Rational),
    Param(Param),
    Central,
    /// `name[indices](degree)`; `indices` is empty for plain labels.
    Generator {
        name: String,
        indices: Vec<usize>,
        degree: i64,
    },
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Bracket(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String, Vec<usize>),
    Sym(char),
    End,
}

struct Lexer {
    chars: Vec<char>,
    toks: Vec<(usize, Tok)>,
}

impl Lexer {
    fn run(input: &str) -> std::result::Result<Vec<(usize, Tok)>, ParseError> {
        let mut lx = Lexer {
            chars: input.chars().collect(),
            toks: Vec::new(),
        };
        let len = lx.chars.len();
        let mut i = 0;
        while i < len {
            let c = lx.chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let start = i;
                while i < len && lx.chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = lx.chars[start..i].iter().collect();
                lx.toks.push((start, Tok::Int(s.parse().unwrap())));
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < len && (lx.chars[i].is_ascii_alphanumeric() || lx.chars[i] == '_') {
                    i += 1;
                }
                let name: String = lx.chars[start..i].iter().collect();
                let (indices, next) = lx.label_indices(i);
                i = next;
                lx.toks.push((start, Tok::Ident(name, indices)));
            } else if "+-*/^()[],".contains(c) {
                lx.toks.push((i, Tok::Sym(c)));
                i += 1;
            } else {
                return Err(ParseError {
                    pos: i,
                    len,
                    message: format!("unexpected character {c:?}"),
                });
            }
        }
        lx.toks.push((len, Tok::End));
        Ok(lx.toks)
    }

    /// `[1,2]` directly after an identifier; left alone unless it is a
    /// complete list of unsigned integers.
    fn label_indices(&self, at: usize) -> (Vec<usize>, usize) {
        if self.chars.get(at) != Some(&'[') {
            return (Vec::new(), at);
        }
        let mut i = at + 1;
        let mut out = Vec::new();
        loop {
            let start = i;
            while i < self.chars.len() && self.chars[i].is_ascii_digit() {
                i += 1;
            }
            if i == start {
                return (Vec::new(), at);
            }
            let s: String = self.chars[start..i].iter().collect();
            match s.parse() {
                Ok(v) => out.push(v),
                Err(_) => return (Vec::new(), at),
            }
            match self.chars.get(i) {
                Some(',') => i += 1,
                Some(']') => return (out, i + 1),
                _ => return (Vec::new(), at),
            }
        }
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    len: usize,
}

type PResult<T> = std::result::Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ParseError {
            pos: self.pos(),
            len: self.len,
            message: message.into(),
        })
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek() == &Tok::Sym(c)
    }

    fn expect(&mut self, c: char) -> PResult<()> {
        if self.is_sym(c) {
            self.bump();
            Ok(())
        } else {
            let found = self.describe();
            self.err(format!("expected '{c}', found {found}"))
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Int(n) => format!("number {n}"),
            Tok::Ident(s, _) => format!("identifier {s}"),
            Tok::Sym(c) => format!("'{c}'"),
            Tok::End => "end of input".into(),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        if self.is_sym('+') {
            self.bump();
        }
        let mut lhs = self.term()?;
        loop {
            if self.is_sym('+') {
                self.bump();
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.is_sym('-') {
                self.bump();
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.factor()?;
        while self.is_sym('*') {
            self.bump();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> PResult<Expr> {
        if self.is_sym('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.primary()?;
        if self.is_sym('^') {
            self.bump();
            let Tok::Int(e) = self.peek().clone() else {
                return self.err("exponent must be a non-negative integer");
            };
            let e: u32 = match e.try_into() {
                Ok(e) => e,
                Err(_) => return self.err("exponent too large"),
            };
            self.bump();
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn degree(&mut self) -> PResult<i64> {
        let neg = if self.is_sym('-') || self.is_sym('+') {
            self.bump() == Tok::Sym('-')
        } else {
            false
        };
        let Tok::Int(n) = self.peek().clone() else {
            return self.err("degree must be an integer");
        };
        self.bump();
        if self.is_sym('/') {
            return self.err("degree must be an integer");
        }
        let n: i64 = match n.try_into() {
            Ok(n) => n,
            Err(_) => return self.err("degree out of range"),
        };
        Ok(if neg { -n } else { n })
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                if self.is_sym('/') {
                    self.bump();
                    let Tok::Int(d) = self.peek().clone() else {
                        return self.err("expected a denominator");
                    };
                    if d.is_zero() {
                        return self.err("zero denominator");
                    }
                    self.bump();
                    return Ok(Expr::Number(Rational::new(n, d)));
                }
                Ok(Expr::Number(Rational::from_integer(n)))
            }
            Tok::Ident(name, indices) => {
                self.bump();
                if self.is_sym('(') {
                    self.bump();
                    let degree = self.degree()?;
                    self.expect(')')?;
                    return Ok(Expr::Generator { name, indices, degree });
                }
                if !indices.is_empty() {
                    return self.err(format!("generator {name} needs a degree"));
                }
                if name == "t" {
                    return Ok(Expr::Central);
                }
                match Param::from_name(&name) {
                    Some(p) => Ok(Expr::Param(p)),
                    None => self.err(format!("unknown symbol {name}")),
                }
            }
            Tok::Sym('[') => {
                self.bump();
                let a = self.expr()?;
                self.expect(',')?;
                let b = self.expr()?;
                self.expect(']')?;
                Ok(Expr::Bracket(Box::new(a), Box::new(b)))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            _ => {
                let found = self.describe();
                self.err(format!("expected an operand, found {found}"))
            }
        }
    }
}

/// Syntax only; names are resolved by [`EvalContext::eval`].
pub fn parse(input: &str) -> std::result::Result<Expr, ParseError> {
    let toks = Lexer::run(input)?;
    let len = input.chars().count();
    let mut p = Parser { toks, at: 0, len };
    let e = p.expr()?;
    if p.peek() != &Tok::End {
        let found = p.describe();
        return p.err(format!("unexpected {found}"));
    }
    Ok(e)
}

/// Where expressions are evaluated: a current algebra and, for the
/// extended algebra, a cocycle.
#[derive(Clone)]
pub struct EvalContext {
    algebra: CurrentAlgebra,
    cocycle: Option<Arc<dyn Cocycle>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Scalar(ParamPoly),
    Element(ExtendedElement),
}

impl EvalContext {
    pub fn new(algebra: CurrentAlgebra) -> Self {
        EvalContext { algebra, cocycle: None }
    }

    pub fn extended(algebra: CurrentAlgebra, cocycle: Arc<dyn Cocycle>) -> Self {
        EvalContext {
            algebra,
            cocycle: Some(cocycle),
        }
    }

    pub fn algebra(&self) -> &CurrentAlgebra {
        &self.algebra
    }

    pub fn is_extended(&self) -> bool {
        self.cocycle.is_some()
    }

    /// Parses, resolves names and checks parameters, without evaluating.
    pub fn parse_expr(&self, input: &str) -> Result<Expr> {
        let e = parse(input)?;
        self.resolve(&e)?;
        Ok(e)
    }

    fn resolve(&self, e: &Expr) -> Result<()> {
        match e {
            Expr::Number(_) => Ok(()),
            Expr::Param(p) => self.check_param(*p),
            Expr::Central => self.check_central(),
            Expr::Generator { name, indices, .. } => self.lie_element(name, indices).map(|_| ()),
            Expr::Neg(a) | Expr::Pow(a, _) => self.resolve(a),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Bracket(a, b) => {
                self.resolve(a)?;
                self.resolve(b)
            }
        }
    }

    fn check_param(&self, p: Param) -> Result<()> {
        let family = self.algebra.family();
        if family.params().contains(&p) {
            Ok(())
        } else {
            Err(Error::Eval(format!("parameter {} does not belong to the {family} family", p.name())))
        }
    }

    fn check_central(&self) -> Result<()> {
        if self.is_extended() {
            Ok(())
        } else {
            Err(Error::Eval("the central element t needs the extended algebra".into()))
        }
    }

    /// Basis label, or `E[i,j]` decomposed through the matrix realization.
    fn lie_element(&self, name: &str, indices: &[usize]) -> Result<crate::lie::LieElement> {
        let lie = self.algebra.lie();
        let label = if indices.is_empty() {
            name.to_string()
        } else {
            let idx: Vec<String> = indices.iter().map(ToString::to_string).collect();
            format!("{name}[{}]", idx.join(","))
        };
        if let Some(i) = lie.index_of(&label) {
            return Ok(crate::lie::LieElement::basis(lie.clone(), i));
        }
        let unknown = || Error::UnknownGenerator(label.clone());
        if name != "E" || indices.len() != 2 {
            return Err(unknown());
        }
        let size = lie.matrix_size().ok_or_else(unknown)?;
        let (r, c) = (indices[0], indices[1]);
        if r == 0 || c == 0 || r > size || c > size {
            return Err(unknown());
        }
        let mut m: RatMatrix = vec![vec![Rational::zero(); size]; size];
        m[r - 1][c - 1] = Rational::one();
        lie.decompose_matrix(&m).ok_or_else(unknown)
    }

    pub fn eval(&self, e: &Expr) -> Result<Value> {
        use Value::{Element, Scalar};
        let mismatch = |op: &str| Error::Eval(format!("cannot {op} a scalar and an element"));
        Ok(match e {
            Expr::Number(r) => Scalar(ParamPoly::constant(r.clone())),
            Expr::Param(p) => {
                self.check_param(*p)?;
                Scalar(ParamPoly::var(*p))
            }
            Expr::Central => {
                self.check_central()?;
                Element(ExtendedElement::central_unit(&self.algebra))
            }
            Expr::Generator { name, indices, degree } => {
                let x = self.lie_element(name, indices)?;
                let f = FnElement::basis(self.algebra.family(), *degree);
                Element(ExtendedElement::lift(tensor(&x, &f)))
            }
            Expr::Neg(a) => match self.eval(a)? {
                Scalar(s) => Scalar(-s),
                Element(u) => Element(u.scale(&ParamPoly::int(-1))),
            },
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let sign = if matches!(e, Expr::Add(..)) { 1 } else { -1 };
                match (self.eval(a)?, self.eval(b)?) {
                    (Scalar(x), Scalar(y)) => Scalar(x + y * ParamPoly::int(sign)),
                    (Element(u), Element(v)) => Element(u.add(&v.scale(&ParamPoly::int(sign)))?),
                    _ => return Err(mismatch("add")),
                }
            }
            Expr::Mul(a, b) => match (self.eval(a)?, self.eval(b)?) {
                (Scalar(x), Scalar(y)) => Scalar(x * y),
                (Scalar(x), Element(u)) | (Element(u), Scalar(x)) => Element(u.scale(&x)),
                (Element(u), Element(v)) => Element(self.function_product(&u, &v)?),
            },
            Expr::Pow(a, k) => match self.eval(a)? {
                Scalar(x) => Scalar(x.pow(*k)),
                Element(_) => return Err(Error::Eval("only scalars can be raised to a power".into())),
            },
            Expr::Bracket(a, b) => match (self.eval(a)?, self.eval(b)?) {
                (Element(u), Element(v)) => Element(self.bracket(&u, &v)?),
                _ => return Err(mismatch("bracket")),
            },
        })
    }

    fn bracket(&self, u: &ExtendedElement, v: &ExtendedElement) -> Result<ExtendedElement> {
        match &self.cocycle {
            Some(psi) => extended_bracket(psi.as_ref(), u, v),
            None => Ok(ExtendedElement::lift(u.current.bracket(&v.current)?)),
        }
    }

    /// `f * g` is only meaningful in the function algebra itself.
    fn function_product(&self, u: &ExtendedElement, v: &ExtendedElement) -> Result<ExtendedElement> {
        if !is_function_algebra(self.algebra.lie()) || !u.central.is_zero() || !v.central.is_zero() {
            return Err(Error::Eval(
                "elements can only be multiplied in the function algebra".into(),
            ));
        }
        let family = self.algebra.family();
        let as_fn = |x: &ExtendedElement| {
            FnElement::from_terms(family, x.current.coeffs().iter().map(|((_, n), c)| (*n, c.clone())))
        };
        let p = as_fn(u).mul(&as_fn(v))?;
        let lie = crate::lie::LieElement::basis(self.algebra.lie().clone(), 0);
        Ok(ExtendedElement::lift(tensor(&lie, &p)))
    }

    /// Parses and evaluates to an element; a bare scalar is an error unless
    /// it is zero.
    pub fn eval_element(&self, input: &str) -> Result<ExtendedElement> {
        match self.eval(&self.parse_expr(input)?)? {
            Value::Element(u) => Ok(u),
            Value::Scalar(s) if s.is_zero() => Ok(ExtendedElement::lift(self.algebra.zero())),
            Value::Scalar(s) => Err(Error::Eval(format!("{s} is a scalar, not an element"))),
        }
    }
}

/// Canonical text of an element.
pub fn render(u: &ExtendedElement) -> String {
    u.to_string()
}

impl fmt::Display for Expr {
    /// Fully parenthesized form; reparses to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(r) => write!(f, "{}", crate::coefficients::fmt_rational(r)),
            Expr::Param(p) => f.write_str(p.name()),
            Expr::Central => f.write_str("t"),
            Expr::Generator { name, indices, degree } => {
                f.write_str(name)?;
                if !indices.is_empty() {
                    let idx: Vec<String> = indices.iter().map(ToString::to_string).collect();
                    write!(f, "[{}]", idx.join(","))?;
                }
                write!(f, "({degree})")
            }
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Pow(a, k) => write!(f, "({a})^{k}"),
            Expr::Bracket(a, b) => write!(f, "[{a}, {b}]"),
        }
    }
}
