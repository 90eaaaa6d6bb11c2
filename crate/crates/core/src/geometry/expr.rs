//! Coefficient expressions in chart coordinates `y1..yN`.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = primary [ "^" [ "-" | "+" ] integer ] ;
//! primary = number | coord | func "(" expr ")" | "(" expr ")" ;
//! func    = ( "sin" | "cos" | "exp" | "bump" | "step" ) { "'" } ;
//! coord   = "y" integer ;                       (* 1 ≤ index ≤ N *)
//! number  = digit { digit } [ "." { digit } ] [ ("e" | "E") [ "+" | "-" ] digit { digit } ] ;
//! ```
//!
//! `bump(s)` is the C² spline `(1 - s²)³` on `|s| < 1` and `0` elsewhere;
//! `step(s)` is the C² smoothstep `10s³ - 15s⁴ + 6s⁵` clamped to `0` for
//! `s ≤ 0` and `1` for `s ≥ 1`. Each trailing `'` takes one derivative.

use std::fmt;

use super::{GeometryError, Jet2};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplineKind {
    Bump,
    Step,
}

/// A piecewise polynomial: `poly` on `[a, b]`, constants outside.
struct Piecewise {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    poly: Vec<f64>,
}

fn poly_derivative(p: &[f64]) -> Vec<f64> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect()
}

fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

impl SplineKind {
    fn name(self) -> &'static str {
        match self {
            SplineKind::Bump => "bump",
            SplineKind::Step => "step",
        }
    }

    fn piecewise(self, order: u8) -> Piecewise {
        let (a, b, mut left, mut right, mut poly) = match self {
            SplineKind::Bump => (-1.0, 1.0, 0.0, 0.0, vec![1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0]),
            SplineKind::Step => (0.0, 1.0, 0.0, 1.0, vec![0.0, 0.0, 0.0, 10.0, -15.0, 6.0]),
        };
        for _ in 0..order {
            poly = poly_derivative(&poly);
            left = 0.0;
            right = 0.0;
        }
        Piecewise {
            a,
            b,
            left,
            right,
            poly,
        }
    }

    /// Value of the `order`-th derivative at `s`.
    pub fn eval(self, order: u8, s: f64) -> f64 {
        let pw = self.piecewise(order);
        if s <= pw.a {
            pw.left
        } else if s >= pw.b {
            pw.right
        } else {
            poly_eval(&pw.poly, s)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    /// A spline primitive together with its derivative order.
    Spline(SplineKind, u8),
}

/// Expression tree. Coordinates are zero-based (`Var(0)` is `y1`).
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    // Smart constructors with light folding; they keep symbolic derivatives small.

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x - y),
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x * y),
            (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::Const(0.0),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), _) if x == 0.0 => Expr::Const(0.0),
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn pow(a: Expr, n: i32) -> Expr {
        match (n, a.as_const()) {
            (0, _) => Expr::Const(1.0),
            (1, _) => a,
            (_, Some(c)) => Expr::Const(c.powi(n)),
            _ => Expr::Pow(Box::new(a), n),
        }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    /// Largest coordinate index referenced, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.arity().max(b.arity())
            }
        }
    }

    /// Plain value at `p`. May be non-finite; callers check.
    pub fn eval(&self, p: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => p[*i],
            Expr::Neg(a) => -a.eval(p),
            Expr::Add(a, b) => a.eval(p) + b.eval(p),
            Expr::Sub(a, b) => a.eval(p) - b.eval(p),
            Expr::Mul(a, b) => a.eval(p) * b.eval(p),
            Expr::Div(a, b) => a.eval(p) / b.eval(p),
            Expr::Pow(a, n) => a.eval(p).powi(*n),
            Expr::Call(f, a) => {
                let x = a.eval(p);
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Spline(k, m) => k.eval(*m, x),
                }
            }
        }
    }

    /// Second-order jet at `p` by forward differentiation of the tree.
    pub fn jet(&self, p: &[f64]) -> Jet2 {
        let n = p.len();
        match self {
            Expr::Const(c) => Jet2::constant(*c, n),
            Expr::Var(i) => Jet2::variable(p[*i], *i, n),
            Expr::Neg(a) => -a.jet(p),
            Expr::Add(a, b) => a.jet(p) + b.jet(p),
            Expr::Sub(a, b) => a.jet(p) - b.jet(p),
            Expr::Mul(a, b) => a.jet(p) * b.jet(p),
            Expr::Div(a, b) => &a.jet(p) * &b.jet(p).recip(),
            Expr::Pow(a, k) => a.jet(p).powi(*k),
            Expr::Call(f, a) => {
                let inner = a.jet(p);
                match f {
                    Func::Sin => inner.sin(),
                    Func::Cos => inner.cos(),
                    Func::Exp => inner.exp(),
                    Func::Spline(k, m) => {
                        let s = inner.value;
                        inner.compose(k.eval(*m, s), k.eval(m + 1, s), k.eval(m + 2, s))
                    }
                }
            }
        }
    }

    /// Symbolic partial derivative with respect to coordinate `var` (zero-based).
    pub fn derivative(&self, var: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(i) => Expr::Const(if *i == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => Expr::neg(a.derivative(var)),
            Expr::Add(a, b) => Expr::add(a.derivative(var), b.derivative(var)),
            Expr::Sub(a, b) => Expr::sub(a.derivative(var), b.derivative(var)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.derivative(var), (**b).clone()),
                Expr::mul((**a).clone(), b.derivative(var)),
            ),
            Expr::Div(a, b) => Expr::div(
                Expr::sub(
                    Expr::mul(a.derivative(var), (**b).clone()),
                    Expr::mul((**a).clone(), b.derivative(var)),
                ),
                Expr::pow((**b).clone(), 2),
            ),
            Expr::Pow(a, k) => Expr::mul(
                Expr::mul(Expr::Const(*k as f64), Expr::pow((**a).clone(), k - 1)),
                a.derivative(var),
            ),
            Expr::Call(f, a) => {
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, (**a).clone()),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, (**a).clone())),
                    Func::Exp => self.clone(),
                    Func::Spline(k, m) => Expr::call(Func::Spline(*k, m + 1), (**a).clone()),
                };
                Expr::mul(outer, a.derivative(var))
            }
        }
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesized; `parse(print(e)) == e` for parsed trees.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "(-{:?})", -c)
                } else {
                    write!(f, "{:?}", c)
                }
            }
            Expr::Var(i) => write!(f, "y{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{})", a),
            Expr::Add(a, b) => write!(f, "({} + {})", a, b),
            Expr::Sub(a, b) => write!(f, "({} - {})", a, b),
            Expr::Mul(a, b) => write!(f, "({} * {})", a, b),
            Expr::Div(a, b) => write!(f, "({} / {})", a, b),
            Expr::Pow(a, n) => write!(f, "({}^{})", a, n),
            Expr::Call(func, a) => match func {
                Func::Sin => write!(f, "sin({})", a),
                Func::Cos => write!(f, "cos({})", a),
                Func::Exp => write!(f, "exp({})", a),
                Func::Spline(k, m) => {
                    write!(f, "{}{}({})", k.name(), "'".repeat(*m as usize), a)
                }
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Prime,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, GeometryError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| GeometryError::Syntax {
                position: start,
                message: format!("malformed number '{text}'"),
            })?;
            out.push((start, Token::Num(v)));
        } else if c.is_ascii_alphabetic() {
            while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((start, Token::Ident(src[start..i].to_string())));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Token::Op(c),
                '(' => Token::LParen,
                ')' => Token::RParen,
                '\'' => Token::Prime,
                _ => {
                    return Err(GeometryError::Syntax {
                        position: start,
                        message: format!("unexpected character '{c}'"),
                    })
                }
            };
            out.push((start, tok));
            i += c.len_utf8();
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
    dim: usize,
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn error(&self, message: impl Into<String>) -> GeometryError {
        GeometryError::Syntax {
            position: self.offset(),
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Token) -> Result<(), GeometryError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {:?}", tok)))
        }
    }

    fn expr(&mut self) -> Result<Expr, GeometryError> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, GeometryError> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, GeometryError> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, GeometryError> {
        let base = self.primary()?;
        if self.peek() != Some(&Token::Op('^')) {
            return Ok(base);
        }
        self.pos += 1;
        let mut sign = 1;
        match self.peek() {
            Some(Token::Op('-')) => {
                sign = -1;
                self.pos += 1;
            }
            Some(Token::Op('+')) => self.pos += 1,
            _ => {}
        }
        match self.peek().cloned() {
            Some(Token::Num(v)) if v.fract() == 0.0 && v <= i32::MAX as f64 => {
                self.pos += 1;
                Ok(Expr::Pow(Box::new(base), sign * v as i32))
            }
            _ => Err(self.error("exponent must be an integer literal")),
        }
    }

    fn primary(&mut self) -> Result<Expr, GeometryError> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                let base = match name.as_str() {
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "exp" => Some(Func::Exp),
                    "bump" => Some(Func::Spline(SplineKind::Bump, 0)),
                    "step" => Some(Func::Spline(SplineKind::Step, 0)),
                    _ => None,
                };
                if let Some(mut func) = base {
                    while self.peek() == Some(&Token::Prime) {
                        match &mut func {
                            Func::Spline(_, m) => *m += 1,
                            _ => return Err(self.error("only spline primitives take primes")),
                        }
                        self.pos += 1;
                    }
                    self.expect(Token::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Token::RParen)?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                if let Some(idx) = name.strip_prefix('y').and_then(|d| d.parse::<usize>().ok()) {
                    if idx >= 1 && idx <= self.dim && !name[1..].starts_with('0') {
                        return Ok(Expr::Var(idx - 1));
                    }
                }
                Err(GeometryError::UnknownIdentifier {
                    name,
                    position: offset,
                    source_text: self.src.to_string(),
                })
            }
            Some(_) => Err(self.error("unexpected token")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

/// Parse `src` as an expression in the coordinates `y1..y{dim}`.
pub fn parse_expr(src: &str, dim: usize) -> Result<Expr, GeometryError> {
    if src.trim().is_empty() {
        return Err(GeometryError::Syntax {
            position: 0,
            message: "empty expression".into(),
        });
    }
    let tokens = tokenize(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: src.len(),
        dim,
        src,
    };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(p.error("trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_unary_minus() {
        let e = parse_expr("-y1^2 + 3*y2/2", 2).unwrap();
        assert_eq!(e.eval(&[2.0, 4.0]), -4.0 + 6.0);
    }

    #[test]
    fn negative_exponent() {
        let e = parse_expr("y1^-2", 1).unwrap();
        assert_eq!(e.eval(&[2.0]), 0.25);
    }

    #[test]
    fn syntax_error_reports_position() {
        match parse_expr("y1 + * y2", 2) {
            Err(GeometryError::Syntax { position, .. }) => assert_eq!(position, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_identifiers() {
        for bad in ["y0", "y4", "x", "y01", "tan(y1)"] {
            assert!(
                matches!(parse_expr(bad, 3), Err(GeometryError::UnknownIdentifier { .. })),
                "{bad}"
            );
        }
    }

    #[test]
    fn fractional_exponent_rejected() {
        assert!(parse_expr("y1^0.5", 1).is_err());
    }

    #[test]
    fn spline_pieces() {
        assert_eq!(SplineKind::Bump.eval(0, 0.0), 1.0);
        assert_eq!(SplineKind::Bump.eval(0, 1.5), 0.0);
        assert_eq!(SplineKind::Step.eval(0, 2.0), 1.0);
        assert_eq!(SplineKind::Step.eval(1, 2.0), 0.0);
        assert!((SplineKind::Step.eval(0, 0.5) - 0.5).abs() < 1e-15);
        // C² at the knots
        for k in [SplineKind::Bump, SplineKind::Step] {
            for m in 0..3 {
                let left = k.eval(m, 1.0 - 1e-9);
                let right = k.eval(m, 1.0 + 1e-9);
                assert!((left - right).abs() < 1e-6, "{k:?} order {m}");
            }
        }
    }

    #[test]
    fn symbolic_derivative_matches_jet() {
        let e = parse_expr("sin(y1)*exp(y2) + y1^3/(1+y2^2) + bump(y1/2)", 2).unwrap();
        let p = [0.3, -0.7];
        let j = e.jet(&p);
        for v in 0..2 {
            let d = e.derivative(v);
            assert!((d.eval(&p) - j.grad[v]).abs() < 1e-12);
            for w in 0..2 {
                assert!((d.derivative(w).eval(&p) - j.h(v, w)).abs() < 1e-11);
            }
        }
    }
}
