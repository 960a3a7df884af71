//! A small real-analytic expression language.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?          right-associative
//! atom   := number | xK | name | func '(' expr ')' | '(' expr ')'
//! func   := exp | log | sin | cos | sinh | cosh | sqrt
//! ```
//!
//! Every building block is real-analytic on its real domain, so evaluating
//! an expression over complex arguments is its analytic continuation.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Byte range `[start, end)` into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Exp,
        Func::Log,
        Func::Sin,
        Func::Cos,
        Func::Sinh,
        Func::Cosh,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Const(f64),
    /// Zero-based state index; printed as `x{index + 1}`.
    Var(usize),
    Param(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Parsed expression node.
///
/// Equality is structural: spans are ignored, so an AST compares equal to
/// the AST obtained by re-parsing its printed form.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        use ExprKind::*;
        match (&self.kind, &other.kind) {
            (Const(a), Const(b)) => a.to_bits() == b.to_bits(),
            (Var(a), Var(b)) => a == b,
            (Param(a), Param(b)) => a == b,
            (Neg(a), Neg(b)) => a == b,
            (Binary(oa, la, ra), Binary(ob, lb, rb)) => oa == ob && la == lb && ra == rb,
            (Call(fa, a), Call(fb, b)) => fa == fb && a == b,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message} at byte {}", span.start)]
pub struct ParseError {
    pub message: String,
    pub span: Span,
    pub expected: Vec<String>,
}

/// Failure while evaluating an expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("pole or branch point: {what}")]
    PoleOrBranch { what: String, span: Span },
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("state has dimension {got}, expression needs at least {need}")]
    Dimension { need: usize, got: usize },
}

pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok<'a> {
    Num(f64),
    Ident(&'a str),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok<'_> {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next_token(&mut self) -> Result<(Tok<'a>, Span), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        if start >= bytes.len() {
            return Ok((Tok::End, Span::new(start, start)));
        }
        let c = bytes[start];
        let single = |tok| Ok((tok, Span::new(start, start + 1)));
        match c {
            b'+' => {
                self.pos += 1;
                single(Tok::Plus)
            }
            b'-' => {
                self.pos += 1;
                single(Tok::Minus)
            }
            b'*' => {
                self.pos += 1;
                single(Tok::Star)
            }
            b'/' => {
                self.pos += 1;
                single(Tok::Slash)
            }
            b'^' => {
                self.pos += 1;
                single(Tok::Caret)
            }
            b'(' => {
                self.pos += 1;
                single(Tok::LParen)
            }
            b')' => {
                self.pos += 1;
                single(Tok::RParen)
            }
            b'0'..=b'9' | b'.' => self.number(start),
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = start;
                while end < bytes.len()
                    && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_')
                {
                    end += 1;
                }
                self.pos = end;
                Ok((Tok::Ident(&self.src[start..end]), Span::new(start, end)))
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                let end = start + ch.len_utf8();
                Err(ParseError {
                    message: format!("unexpected character {ch:?}"),
                    span: Span::new(start, end),
                    expected: vec![],
                })
            }
        }
    }

    fn number(&mut self, start: usize) -> Result<(Tok<'a>, Span), ParseError> {
        let bytes = self.src.as_bytes();
        let mut end = start;
        let digits = |mut i: usize| {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            i
        };
        end = digits(end);
        if end < bytes.len() && bytes[end] == b'.' {
            end = digits(end + 1);
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut exp = end + 1;
            if exp < bytes.len() && (bytes[exp] == b'+' || bytes[exp] == b'-') {
                exp += 1;
            }
            let exp_end = digits(exp);
            if exp_end > exp {
                end = exp_end;
            }
        }
        let span = Span::new(start, end);
        self.pos = end;
        let text = &self.src[start..end];
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok((Tok::Num(v), span)),
            Ok(_) => Err(ParseError {
                message: format!("numeric literal `{text}` is not finite"),
                span,
                expected: vec![],
            }),
            Err(_) => Err(ParseError {
                message: format!("malformed number `{text}`"),
                span,
                expected: vec!["number".into()],
            }),
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok<'a>,
    span: Span,
    dimension: usize,
}

impl<'a> Parser<'a> {
    fn advance(&mut self) -> Result<(), ParseError> {
        let (tok, span) = self.lexer.next_token()?;
        self.tok = tok;
        self.span = span;
        Ok(())
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        ParseError {
            message: format!("unexpected {}", self.tok.describe()),
            span: self.span,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.term()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.unary()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Minus {
            let start = self.span;
            self.advance()?;
            let inner = self.unary()?;
            let span = start.join(inner.span);
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                span,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.tok == Tok::Caret {
            self.advance()?;
            let exponent = self.unary()?;
            return Ok(binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        const ATOM: &[&str] = &["number", "variable", "parameter", "function", "'('"];
        let span = self.span;
        match self.tok {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr {
                    kind: ExprKind::Const(v),
                    span,
                })
            }
            Tok::LParen => {
                self.advance()?;
                let inner = self.expr()?;
                if self.tok != Tok::RParen {
                    return Err(self.unexpected(&["')'", "operator"]));
                }
                let close = self.span;
                self.advance()?;
                Ok(Expr {
                    kind: inner.kind,
                    span: span.join(close),
                })
            }
            Tok::Ident(name) => {
                self.advance()?;
                if self.tok == Tok::LParen {
                    let Some(func) = Func::from_name(name) else {
                        return Err(ParseError {
                            message: format!("unknown function `{name}`"),
                            span,
                            expected: Func::ALL.iter().map(|f| f.name().to_string()).collect(),
                        });
                    };
                    self.advance()?;
                    let arg = self.expr()?;
                    if self.tok != Tok::RParen {
                        return Err(self.unexpected(&["')'", "operator"]));
                    }
                    let close = self.span;
                    self.advance()?;
                    return Ok(Expr {
                        kind: ExprKind::Call(func, Box::new(arg)),
                        span: span.join(close),
                    });
                }
                if Func::from_name(name).is_some() {
                    return Err(ParseError {
                        message: format!("function `{name}` needs an argument"),
                        span: self.span,
                        expected: vec!["'('".into()],
                    });
                }
                if let Some(index) = variable_index(name) {
                    if index == 0 || index > self.dimension {
                        return Err(ParseError {
                            message: format!(
                                "variable `{name}` out of range for dimension {}",
                                self.dimension
                            ),
                            span,
                            expected: vec![format!("x1..x{}", self.dimension)],
                        });
                    }
                    return Ok(Expr {
                        kind: ExprKind::Var(index - 1),
                        span,
                    });
                }
                Ok(Expr {
                    kind: ExprKind::Param(name.to_string()),
                    span,
                })
            }
            _ => Err(self.unexpected(ATOM)),
        }
    }
}

fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
    let span = lhs.span.join(rhs.span);
    Expr {
        kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
        span,
    }
}

/// `x12` -> `Some(12)`. Names like `x` or `x1a` are parameters.
fn variable_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    // Leading zeros would break print/parse symmetry.
    if digits.len() > 1 && digits.starts_with('0') {
        return None;
    }
    digits.parse().ok()
}

/// Parse `source` into an expression over the state variables `x1..x{dimension}`.
pub fn parse_expression(source: &str, dimension: usize) -> Result<Expr, ParseError> {
    if dimension == 0 {
        return Err(ParseError {
            message: "dimension must be at least 1".into(),
            span: Span::new(0, 0),
            expected: vec![],
        });
    }
    let mut parser = Parser {
        lexer: Lexer {
            src: source,
            pos: 0,
        },
        tok: Tok::End,
        span: Span::default(),
        dimension,
    };
    parser.advance()?;
    let expr = parser.expr()?;
    if parser.tok != Tok::End {
        return Err(parser.unexpected(&["operator", "end of input"]));
    }
    Ok(expr)
}

impl fmt::Display for Expr {
    /// Fully parenthesised form; re-parses to a structurally equal AST.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Const(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => {
                write!(f, "(0-{:?})", -v)
            }
            ExprKind::Const(v) => write!(f, "{v:?}"),
            ExprKind::Var(k) => write!(f, "x{}", k + 1),
            ExprKind::Param(name) => f.write_str(name),
            ExprKind::Neg(inner) => write!(f, "(-{inner})"),
            ExprKind::Binary(op, l, r) => write!(f, "({l}{}{r})", op.symbol()),
            ExprKind::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}

impl Expr {
    /// Number of state variables referenced, i.e. one past the largest index.
    pub fn min_dimension(&self) -> usize {
        match &self.kind {
            ExprKind::Const(_) | ExprKind::Param(_) => 0,
            ExprKind::Var(k) => k + 1,
            ExprKind::Neg(e) | ExprKind::Call(_, e) => e.min_dimension(),
            ExprKind::Binary(_, l, r) => l.min_dimension().max(r.min_dimension()),
        }
    }

    /// Parameter names referenced, sorted and deduplicated.
    pub fn parameters(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match &e.kind {
                ExprKind::Param(name) => out.push(name.clone()),
                ExprKind::Neg(e) | ExprKind::Call(_, e) => walk(e, out),
                ExprKind::Binary(_, l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out.dedup();
        out
    }

    /// Replace every parameter by its bound value.
    pub fn bind(&self, params: &Params) -> Result<Expr, EvalError> {
        let kind = match &self.kind {
            ExprKind::Param(name) => match params.get(name) {
                Some(v) => ExprKind::Const(*v),
                None => return Err(EvalError::UnboundParameter(name.clone())),
            },
            ExprKind::Const(v) => ExprKind::Const(*v),
            ExprKind::Var(k) => ExprKind::Var(*k),
            ExprKind::Neg(e) => ExprKind::Neg(Box::new(e.bind(params)?)),
            ExprKind::Call(f, e) => ExprKind::Call(*f, Box::new(e.bind(params)?)),
            ExprKind::Binary(op, l, r) => {
                ExprKind::Binary(*op, Box::new(l.bind(params)?), Box::new(r.bind(params)?))
            }
        };
        Ok(Expr {
            kind,
            span: self.span,
        })
    }

    /// Evaluate under complex arithmetic.
    pub fn eval(&self, z: &[Complex64], params: &Params) -> Result<Complex64, EvalError> {
        let need = self.min_dimension();
        if z.len() < need {
            return Err(EvalError::Dimension { need, got: z.len() });
        }
        self.eval_unchecked(z, params)
    }

    fn eval_unchecked(&self, z: &[Complex64], params: &Params) -> Result<Complex64, EvalError> {
        let pole = |what: &str| EvalError::PoleOrBranch {
            what: what.to_string(),
            span: self.span,
        };
        Ok(match &self.kind {
            ExprKind::Const(v) => Complex64::new(*v, 0.0),
            ExprKind::Var(k) => z[*k],
            ExprKind::Param(name) => match params.get(name) {
                Some(v) => Complex64::new(*v, 0.0),
                None => return Err(EvalError::UnboundParameter(name.clone())),
            },
            ExprKind::Neg(e) => -e.eval_unchecked(z, params)?,
            ExprKind::Binary(op, l, r) => {
                let a = l.eval_unchecked(z, params)?;
                let b = r.eval_unchecked(z, params)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.re == 0.0 && b.im == 0.0 {
                            return Err(pole("division by zero"));
                        }
                        a / b
                    }
                    BinOp::Pow => power(a, b).ok_or_else(|| pole("power at zero base"))?,
                }
            }
            ExprKind::Call(func, arg) => {
                let a = arg.eval_unchecked(z, params)?;
                match func {
                    Func::Exp => a.exp(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Sinh => a.sinh(),
                    Func::Cosh => a.cosh(),
                    Func::Log => {
                        if a.re == 0.0 && a.im == 0.0 {
                            return Err(pole("log at zero"));
                        }
                        real_preserving_ln(a)
                    }
                    Func::Sqrt => {
                        if a.re == 0.0 && a.im == 0.0 {
                            return Err(pole("sqrt at zero"));
                        }
                        if a.im == 0.0 && a.re > 0.0 {
                            Complex64::new(a.re.sqrt(), 0.0)
                        } else {
                            a.sqrt()
                        }
                    }
                }
            }
        })
    }
}

fn real_preserving_ln(a: Complex64) -> Complex64 {
    if a.im == 0.0 && a.re > 0.0 {
        Complex64::new(a.re.ln(), 0.0)
    } else {
        a.ln()
    }
}

/// Largest integer exponent evaluated by repeated squaring.
const MAX_INTEGER_EXPONENT: f64 = 2147483648.0;

/// `base^exponent`: exact repeated multiplication for integral real exponents,
/// principal branch otherwise. `None` at a pole or branch point.
fn power(base: Complex64, exponent: Complex64) -> Option<Complex64> {
    let zero_base = base.re == 0.0 && base.im == 0.0;
    if exponent.im == 0.0 && exponent.re.fract() == 0.0 && exponent.re.abs() <= MAX_INTEGER_EXPONENT
    {
        let k = exponent.re as i64;
        if k == 0 {
            return Some(Complex64::new(1.0, 0.0));
        }
        if zero_base {
            return if k > 0 {
                Some(Complex64::new(0.0, 0.0))
            } else {
                None
            };
        }
        let mut acc = Complex64::new(1.0, 0.0);
        let mut sq = base;
        let mut n = k.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                acc *= sq;
            }
            n >>= 1;
            if n > 0 {
                sq *= sq;
            }
        }
        return Some(if k < 0 {
            Complex64::new(1.0, 0.0) / acc
        } else {
            acc
        });
    }
    if zero_base {
        return None;
    }
    let w = exponent * real_preserving_ln(base);
    if w.im == 0.0 {
        Some(Complex64::new(w.re.exp(), 0.0))
    } else {
        Some(w.exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn negation_of_single_variable() {
        let e = parse_expression("-x1", 1).unwrap();
        match &e.kind {
            ExprKind::Neg(inner) => assert!(matches!(inner.kind, ExprKind::Var(0))),
            other => panic!("expected neg, got {other:?}"),
        }
    }

    #[test]
    fn product_with_parameter_at_complex_point() {
        let e = parse_expression("gamma*x1*x2", 2).unwrap();
        let params = Params::from([("gamma".to_string(), 5.0)]);
        let v = e.eval(&[c(1.0, 1.0), c(2.0, 0.0)], &params).unwrap();
        assert_eq!(v, c(10.0, 10.0));
    }

    #[test]
    fn syntax_error_points_at_operator() {
        let err = parse_expression("x1+*x2", 2).unwrap_err();
        assert_eq!(err.span.start, 3);
        assert_eq!(err.span.end, 4);
        assert!(!err.expected.is_empty());
    }

    #[test]
    fn unknown_function_and_range_errors() {
        let err = parse_expression("tan(x1)", 1).unwrap_err();
        assert!(err.message.contains("unknown function"));
        assert_eq!(err.span, Span::new(0, 3));
        let err = parse_expression("x1 + x3", 2).unwrap_err();
        assert!(err.message.contains("out of range"));
        assert_eq!(err.span, Span::new(5, 7));
        assert!(parse_expression("x0", 2).is_err());
        assert!(parse_expression("", 1).is_err());
        assert!(parse_expression("(x1", 1).is_err());
        assert!(parse_expression("x1 x1", 1).is_err());
        assert!(parse_expression("x1", 0).is_err());
    }

    #[test]
    fn error_spans_stay_inside_input() {
        for src in ["x1+", "x1 # 2", "sin x1", "1e999", "((x1)", "x1)", "é"] {
            let err = parse_expression(src, 1).unwrap_err();
            assert!(err.span.end <= src.len(), "{src}: {err:?}");
            assert!(err.span.start <= err.span.end);
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let p = Params::new();
        let ev = |s: &str| {
            parse_expression(s, 1)
                .unwrap()
                .eval(&[c(3.0, 0.0)], &p)
                .unwrap()
        };
        assert_eq!(ev("x1^2"), c(9.0, 0.0));
        assert_eq!(ev("-x1^2"), c(-9.0, 0.0));
        assert_eq!(ev("2^3^2"), c(512.0, 0.0));
        assert_eq!(ev("2^-1"), c(0.5, 0.0));
        assert_eq!(ev("1-2-3"), c(-4.0, 0.0));
        assert_eq!(ev("8/4/2"), c(1.0, 0.0));
        assert_eq!(ev("1+2*x1"), c(7.0, 0.0));
        assert_eq!(ev("--x1"), c(3.0, 0.0));
    }

    #[test]
    fn euler_identity() {
        let e = parse_expression("exp(x1)", 1).unwrap();
        let v = e
            .eval(&[c(0.0, std::f64::consts::PI)], &Params::new())
            .unwrap();
        // independent check: truncated Taylor series of exp
        let mut term = c(1.0, 0.0);
        let mut series = c(1.0, 0.0);
        for k in 1..60 {
            term = term * c(0.0, std::f64::consts::PI) / k as f64;
            series += term;
        }
        assert!((v - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((v - series).norm() < 1e-12);
    }

    #[test]
    fn exact_pole_is_reported() {
        let e = parse_expression("1/(1+x1)", 1).unwrap();
        let err = e.eval(&[c(-1.0, 0.0)], &Params::new()).unwrap_err();
        assert!(matches!(err, EvalError::PoleOrBranch { .. }));
        for src in ["log(x1)", "sqrt(x1)", "x1^0.5", "x1^-2"] {
            let e = parse_expression(src, 1).unwrap();
            assert!(
                matches!(
                    e.eval(&[c(0.0, 0.0)], &Params::new()),
                    Err(EvalError::PoleOrBranch { .. })
                ),
                "{src}"
            );
        }
    }

    #[test]
    fn unbound_parameter() {
        let e = parse_expression("k*x1", 1).unwrap();
        assert_eq!(
            e.eval(&[c(1.0, 0.0)], &Params::new()),
            Err(EvalError::UnboundParameter("k".into()))
        );
        assert_eq!(e.parameters(), vec!["k".to_string()]);
    }

    #[test]
    fn integer_powers_stay_real() {
        let p = Params::new();
        let e = parse_expression("x1^7 + x1^-3 + x1^2.5", 1).unwrap();
        let v = e.eval(&[c(1.3, 0.0)], &p).unwrap();
        assert_eq!(v.im, 0.0);
        let expect = 1.3f64.powi(7) + 1.3f64.powi(-3) + 1.3f64.powf(2.5);
        assert!((v.re - expect).abs() < 1e-12);
        // negative base with integer exponent is fine
        let e = parse_expression("x1^3", 1).unwrap();
        assert_eq!(e.eval(&[c(-2.0, 0.0)], &p).unwrap(), c(-8.0, 0.0));
    }

    #[test]
    fn bind_substitutes_parameters() {
        let e = parse_expression("-gamma*x1 + k", 1).unwrap();
        let params = Params::from([("gamma".to_string(), 2.0), ("k".to_string(), 1.0)]);
        let bound = e.bind(&params).unwrap();
        assert!(bound.parameters().is_empty());
        let z = [c(0.5, -1.0)];
        assert_eq!(bound.eval(&z, &Params::new()), e.eval(&z, &params));
        assert!(e.bind(&Params::new()).is_err());
    }

    #[test]
    fn printed_form_reparses() {
        for src in [
            "-x1^2",
            "2^3^2",
            "sin(x1)*cos(x2)/(1+x1)",
            "a-b-c",
            "-(-x1)",
            "1e-5*x2",
        ] {
            let ast = parse_expression(src, 2).unwrap();
            let printed = ast.to_string();
            assert_eq!(
                parse_expression(&printed, 2).unwrap(),
                ast,
                "{src} -> {printed}"
            );
        }
    }
}
