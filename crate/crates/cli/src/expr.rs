//! Closed-form expressions over `t` and `eps`.
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, the functions `sin cos
//! tan exp log sqrt`, the constants `pi`, `e`, `i` and the interval ends `a`,
//! `b`, decimal literals with an optional imaginary suffix (`2.5i`), and in
//! boundary rows references `y(p)`, `y2''(p)` to the derivative of a
//! solution component at a point expression `p`.

use std::fmt;

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    Eps,
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    fn apply(self, z: Complex64) -> Complex64 {
        if z.im == 0.0 {
            let x = z.re;
            let real = match self {
                Func::Sin => Some(x.sin()),
                Func::Cos => Some(x.cos()),
                Func::Tan => Some(x.tan()),
                Func::Exp => Some(x.exp()),
                Func::Log if x > 0.0 => Some(x.ln()),
                Func::Sqrt if x >= 0.0 => Some(x.sqrt()),
                _ => None,
            };
            if let Some(v) = real {
                return Complex64::new(v, 0.0);
            }
        }
        match self {
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Tan => z.tan(),
            Func::Exp => z.exp(),
            Func::Log => z.ln(),
            Func::Sqrt => z.sqrt(),
        }
    }
}

/// `y_comp^{(order)}(point)`.
#[derive(Debug, Clone, PartialEq)]
pub struct YRef {
    /// Zero-based component.
    pub comp: usize,
    pub order: usize,
    pub point: Box<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    Y(YRef),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    /// One-based character column.
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Values of the free symbols during evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Env {
    pub t: f64,
    pub eps: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    /// A solution reference where none is allowed.
    UnexpectedY,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::UnexpectedY => f.write_str("solution references are only allowed in boundary rows"),
        }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn pow(base: Complex64, exp: Complex64) -> Complex64 {
    if exp.im == 0.0 {
        let k = exp.re;
        if k.fract() == 0.0 && k.abs() <= i32::MAX as f64 {
            return base.powi(k as i32);
        }
        if base.im == 0.0 && base.re >= 0.0 {
            return c(base.re.powf(k));
        }
    }
    if base == Complex64::new(0.0, 0.0) {
        return base;
    }
    base.powc(exp)
}

impl Expr {
    pub fn num(x: f64) -> Self {
        Expr::Const(c(x))
    }

    fn is_const(&self, v: f64) -> bool {
        matches!(self, Expr::Const(z) if *z == c(v))
    }

    fn as_const(&self) -> Option<Complex64> {
        match self {
            Expr::Const(z) => Some(*z),
            _ => None,
        }
    }

    fn add(l: Expr, r: Expr) -> Expr {
        match (l.as_const(), r.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x + y),
            _ if l.is_const(0.0) => r,
            _ if r.is_const(0.0) => l,
            _ => Expr::Add(Box::new(l), Box::new(r)),
        }
    }

    fn sub(l: Expr, r: Expr) -> Expr {
        match (l.as_const(), r.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x - y),
            _ if r.is_const(0.0) => l,
            _ if l.is_const(0.0) => Expr::neg(r),
            _ => Expr::Sub(Box::new(l), Box::new(r)),
        }
    }

    fn mul(l: Expr, r: Expr) -> Expr {
        match (l.as_const(), r.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x * y),
            _ if l.is_const(0.0) || r.is_const(0.0) => Expr::num(0.0),
            _ if l.is_const(1.0) => r,
            _ if r.is_const(1.0) => l,
            _ => Expr::Mul(Box::new(l), Box::new(r)),
        }
    }

    fn div(l: Expr, r: Expr) -> Expr {
        if l.is_const(0.0) {
            return Expr::num(0.0);
        }
        if r.is_const(1.0) {
            return l;
        }
        Expr::Div(Box::new(l), Box::new(r))
    }

    fn neg(e: Expr) -> Expr {
        match e {
            Expr::Const(z) => Expr::Const(-z),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    fn powe(l: Expr, r: Expr) -> Expr {
        if r.is_const(1.0) {
            return l;
        }
        if r.is_const(0.0) {
            return Expr::num(1.0);
        }
        Expr::Pow(Box::new(l), Box::new(r))
    }

    fn call(f: Func, e: Expr) -> Expr {
        Expr::Call(f, Box::new(e))
    }

    /// Whether the expression mentions `v` (inside point expressions too).
    pub fn uses(&self, v: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Neg(e) | Expr::Call(_, e) => e.uses(v),
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) | Expr::Pow(l, r) => l.uses(v) || r.uses(v),
            Expr::Y(y) => y.point.uses(v),
        }
    }

    pub fn has_y(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.has_y(),
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) | Expr::Pow(l, r) => l.has_y() || r.has_y(),
            Expr::Y(_) => true,
        }
    }

    /// Distinct solution references, in order of first appearance.
    pub fn y_refs(&self) -> Vec<YRef> {
        let mut out = Vec::new();
        self.collect_y(&mut out);
        out
    }

    fn collect_y(&self, out: &mut Vec<YRef>) {
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_y(out),
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) | Expr::Pow(l, r) => {
                l.collect_y(out);
                r.collect_y(out);
            }
            Expr::Y(y) => {
                if !out.contains(y) {
                    out.push(y.clone());
                }
            }
        }
    }

    pub fn eval(&self, env: &Env) -> Result<Complex64, EvalError> {
        self.eval_with(env, &|_| None)
    }

    /// Evaluate with `yval` supplying values of solution references.
    pub fn eval_with(&self, env: &Env, yval: &dyn Fn(&YRef) -> Option<Complex64>) -> Result<Complex64, EvalError> {
        Ok(match self {
            Expr::Const(z) => *z,
            Expr::Var(v) => c(match v {
                Var::T => env.t,
                Var::Eps => env.eps,
                Var::A => env.a,
                Var::B => env.b,
            }),
            Expr::Neg(e) => -e.eval_with(env, yval)?,
            Expr::Add(l, r) => l.eval_with(env, yval)? + r.eval_with(env, yval)?,
            Expr::Sub(l, r) => l.eval_with(env, yval)? - r.eval_with(env, yval)?,
            Expr::Mul(l, r) => l.eval_with(env, yval)? * r.eval_with(env, yval)?,
            Expr::Div(l, r) => l.eval_with(env, yval)? / r.eval_with(env, yval)?,
            Expr::Pow(l, r) => pow(l.eval_with(env, yval)?, r.eval_with(env, yval)?),
            Expr::Call(f, e) => f.apply(e.eval_with(env, yval)?),
            Expr::Y(y) => yval(y).ok_or(EvalError::UnexpectedY)?,
        })
    }

    /// Symbolic `d/dt`; `eps`, `a`, `b` are constants.
    pub fn diff(&self) -> Expr {
        match self {
            Expr::Const(_) => Expr::num(0.0),
            Expr::Var(Var::T) => Expr::num(1.0),
            Expr::Var(_) => Expr::num(0.0),
            Expr::Neg(e) => Expr::neg(e.diff()),
            Expr::Add(l, r) => Expr::add(l.diff(), r.diff()),
            Expr::Sub(l, r) => Expr::sub(l.diff(), r.diff()),
            Expr::Mul(l, r) => Expr::add(
                Expr::mul(l.diff(), (**r).clone()),
                Expr::mul((**l).clone(), r.diff()),
            ),
            Expr::Div(l, r) => Expr::div(
                Expr::sub(
                    Expr::mul(l.diff(), (**r).clone()),
                    Expr::mul((**l).clone(), r.diff()),
                ),
                Expr::powe((**r).clone(), Expr::num(2.0)),
            ),
            Expr::Pow(l, r) => {
                if !r.uses(Var::T) {
                    // v u^{v-1} u'
                    Expr::mul(
                        Expr::mul(
                            (**r).clone(),
                            Expr::powe((**l).clone(), Expr::sub((**r).clone(), Expr::num(1.0))),
                        ),
                        l.diff(),
                    )
                } else {
                    // u^v (v' log u + v u' / u)
                    Expr::mul(
                        self.clone(),
                        Expr::add(
                            Expr::mul(r.diff(), Expr::call(Func::Log, (**l).clone())),
                            Expr::div(Expr::mul((**r).clone(), l.diff()), (**l).clone()),
                        ),
                    )
                }
            }
            Expr::Call(f, e) => {
                let inner = e.diff();
                let u = (**e).clone();
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, u),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, u)),
                    Func::Tan => Expr::add(Expr::num(1.0), Expr::powe(Expr::call(Func::Tan, u), Expr::num(2.0))),
                    Func::Exp => Expr::call(Func::Exp, u),
                    Func::Log => Expr::div(Expr::num(1.0), u),
                    Func::Sqrt => Expr::div(Expr::num(0.5), Expr::call(Func::Sqrt, u)),
                };
                Expr::mul(outer, inner)
            }
            // solution references never depend on t
            Expr::Y(_) => Expr::num(0.0),
        }
    }

    /// `[e, e', ..., e^{(order)}]`.
    pub fn derivatives(&self, order: usize) -> Vec<Expr> {
        let mut out = vec![self.clone()];
        for k in 0..order {
            let next = out[k].diff();
            out.push(next);
        }
        out
    }
}

/// Parse an expression. `allow_y` enables solution references.
pub fn parse(src: &str, allow_y: bool) -> Result<Expr, ParseError> {
    let mut p = Parser {
        chars: src.chars().collect(),
        pos: 0,
        allow_y,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error(format!("unexpected '{}'", p.chars[p.pos])));
    }
    Ok(e)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    allow_y: bool,
}

impl Parser {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            column: self.pos + 1,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, ch: char) -> bool {
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, ch: char) -> Result<(), ParseError> {
        if self.eat(ch) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{ch}'")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.error("unexpected end of expression")),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(ch) if ch.is_ascii_digit() || ch == '.' => self.number(),
            Some(ch) if ch.is_ascii_alphabetic() || ch == '_' => self.identifier(),
            Some(ch) => Err(self.error(format!("unexpected '{ch}'"))),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let s = &self.chars;
        let mut end = start;
        while end < s.len() && (s[end].is_ascii_digit() || s[end] == '.') {
            end += 1;
        }
        if end < s.len() && (s[end] == 'e' || s[end] == 'E') {
            let mut k = end + 1;
            if k < s.len() && (s[k] == '+' || s[k] == '-') {
                k += 1;
            }
            if k < s.len() && s[k].is_ascii_digit() {
                while k < s.len() && s[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let text: String = s[start..end].iter().collect();
        let value: f64 = text.parse().map_err(|_| self.error(format!("invalid number '{text}'")))?;
        self.pos = end;
        let imaginary = self.pos < s.len()
            && s[self.pos] == 'i'
            && !(self.pos + 1 < s.len() && (s[self.pos + 1].is_ascii_alphanumeric() || s[self.pos + 1] == '_'));
        if imaginary {
            self.pos += 1;
            return Ok(Expr::Const(Complex64::new(0.0, value)));
        }
        Ok(Expr::num(value))
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.chars.len() && (self.chars[self.pos].is_ascii_alphanumeric() || self.chars[self.pos] == '_') {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        if let Some(f) = Func::from_name(&name) {
            self.expect('(')?;
            let arg = self.expr()?;
            self.expect(')')?;
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        match name.as_str() {
            "t" => return Ok(Expr::Var(Var::T)),
            "eps" => return Ok(Expr::Var(Var::Eps)),
            "a" => return Ok(Expr::Var(Var::A)),
            "b" => return Ok(Expr::Var(Var::B)),
            "pi" => return Ok(Expr::num(std::f64::consts::PI)),
            "e" => return Ok(Expr::num(std::f64::consts::E)),
            "i" => return Ok(Expr::Const(Complex64::new(0.0, 1.0))),
            _ => {}
        }
        if let Some(digits) = name.strip_prefix('y') {
            if digits.is_empty() || digits.chars().all(|c| c.is_ascii_digit()) {
                if !self.allow_y {
                    self.pos = start;
                    return Err(self.error("solution references are only allowed in boundary rows"));
                }
                let comp = if digits.is_empty() { 1 } else { digits.parse::<usize>().unwrap_or(0) };
                if comp == 0 {
                    self.pos = start;
                    return Err(self.error("components are numbered from 1"));
                }
                let mut order = 0;
                while self.pos < self.chars.len() && self.chars[self.pos] == '\'' {
                    order += 1;
                    self.pos += 1;
                }
                self.expect('(')?;
                let point = self.expr()?;
                self.expect(')')?;
                if point.has_y() || point.uses(Var::T) {
                    self.pos = start;
                    return Err(self.error("evaluation points may depend on eps, a and b only"));
                }
                return Ok(Expr::Y(YRef {
                    comp: comp - 1,
                    order,
                    point: Box::new(point),
                }));
            }
        }
        self.pos = start;
        Err(self.error(format!("unknown identifier '{name}'")))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(z) if z.im == 0.0 => write!(f, "{}", z.re),
            Expr::Const(z) if z.re == 0.0 => write!(f, "{}i", z.im),
            Expr::Const(z) => write!(f, "({} + {}i)", z.re, z.im),
            Expr::Var(v) => f.write_str(match v {
                Var::T => "t",
                Var::Eps => "eps",
                Var::A => "a",
                Var::B => "b",
            }),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(l, r) => write!(f, "({l} + {r})"),
            Expr::Sub(l, r) => write!(f, "({l} - {r})"),
            Expr::Mul(l, r) => write!(f, "({l} * {r})"),
            Expr::Div(l, r) => write!(f, "({l} / {r})"),
            Expr::Pow(l, r) => write!(f, "({l} ^ {r})"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Y(y) => write!(f, "y{}{}({})", y.comp + 1, "'".repeat(y.order), y.point),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(t: f64, eps: f64) -> Env {
        Env { t, eps, a: 0.0, b: 1.0 }
    }

    fn ev(s: &str, t: f64) -> Complex64 {
        parse(s, false).unwrap().eval(&env(t, 0.1)).unwrap()
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("1 + 2 * 3", 0.0), c(7.0));
        assert_eq!(ev("-2^2", 0.0), c(-4.0));
        assert_eq!(ev("2^3^2", 0.0), c(512.0));
        assert_eq!(ev("(1 + 2) * 3 - 4 / 2", 0.0), c(7.0));
        assert_eq!(ev("2.5e-1 * 4", 0.0), c(1.0));
        assert_eq!(ev("eps * 10", 0.0), c(1.0));
        assert_eq!(ev("b - a", 0.0), c(1.0));
    }

    #[test]
    fn complex_literals() {
        assert_eq!(ev("1 + 2i", 0.0), Complex64::new(1.0, 2.0));
        assert_eq!(ev("i * i", 0.0), c(-1.0));
        assert!((ev("exp(i * pi)", 0.0) - c(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn derivatives_match_closed_forms() {
        let cases: [(&str, fn(f64) -> f64); 6] = [
            ("sin(2*t)", |t| 2.0 * (2.0 * t).cos()),
            ("t^3", |t| 3.0 * t * t),
            ("exp(-t) * cos(t)", |t| -(-t).exp() * (t.cos() + t.sin())),
            ("sqrt(1 + t)", |t| 0.5 / (1.0 + t).sqrt()),
            ("log(2 + t) / (1 + t)", |t| (1.0 / (2.0 + t) * (1.0 + t) - (2.0 + t).ln()) / (1.0 + t).powi(2)),
            ("tan(t) + t^t", |t| 1.0 + t.tan().powi(2) + t.powf(t) * (t.ln() + 1.0)),
        ];
        for (s, d) in cases {
            let e = parse(s, false).unwrap().diff();
            for t in [0.3, 0.7] {
                assert!((e.eval(&env(t, 0.0)).unwrap().re - d(t)).abs() < 1e-12, "{s}");
            }
        }
        let second = parse("t^2", false).unwrap().derivatives(3);
        assert_eq!(second[2].eval(&env(0.0, 0.0)).unwrap(), c(2.0));
        assert_eq!(second[3].eval(&env(0.0, 0.0)).unwrap(), c(0.0));
    }

    #[test]
    fn y_references() {
        let e = parse("2*y(a) - eps*y2''(0.5 + eps)", true).unwrap();
        let refs = e.y_refs();
        assert_eq!(refs.len(), 2);
        assert_eq!((refs[1].comp, refs[1].order), (1, 2));
        assert!(parse("y(0)", false).is_err());
        assert!(parse("y(t)", true).is_err());
        assert!(parse("y0(0)", true).is_err());
    }

    #[test]
    fn errors_carry_columns() {
        let err = parse("1 + foo(t)", false).unwrap_err();
        assert_eq!(err.column, 5);
        let err = parse("(1 + 2", false).unwrap_err();
        assert!(err.message.contains("')'"));
        assert!(parse("1 +", false).is_err());
        assert!(parse("2 3", false).is_err());
    }
}
