//! A small expression language for defining problems in configuration files.
//!
//! Grammar (byte offsets reported in every error):
//!
//! ```text
//! expr   := term  { ('+' | '-') term }
//! term   := factor { ('*' | '/') factor }
//! factor := '-' factor | power
//! power  := atom [ '^' factor ]          // right-associative
//! atom   := number | 't' | 's'
//!         | 'B' '(' expr ')'             // Brownian value lookup
//!         | 'ito' '(' expr ')'           // ∫₀ᵗ g(s) dB(s) on the bound path
//!         | func '(' expr ')'            // sin cos exp ln sqrt
//!         | '(' expr ')'
//! ```
//!
//! Numbers are non-negative decimal literals with an optional fraction and
//! exponent; there are no built-in constants (`e` and `pi` are rejected as
//! unknown identifiers — write `exp(1)`). `^` uses repeated multiplication for
//! integer exponents up to |8| and `exp(y·ln x)` otherwise, so negative bases
//! require integer exponents. Evaluation is plain IEEE double arithmetic with
//! positioned errors for `ln` of a non-positive value, `sqrt` of a negative
//! value, and division by zero.

use std::fmt;

use crate::brownian::BrownianPath;

/// Nesting limit; parsing deeper input fails with a positioned error instead
/// of exhausting the stack.
const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    S,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::S => "s",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Number(f64),
    Variable(Var),
    /// `B(arg)` — Brownian value at the evaluated argument.
    Brownian(Box<Expr>),
    /// `ito(g)` — left-point Itô integral `∫₀ᵗ g(s) dB(s)` of the integrand
    /// over the bound path, up to the current `t`.
    Ito(Box<Expr>),
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call {
        func: Func,
        arg: Box<Expr>,
    },
}

/// Position-annotated expression node. Equality is structural and ignores
/// offsets.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub offset: usize,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    fn new(kind: ExprKind, offset: usize) -> Self {
        Self { kind, offset }
    }

    /// Does the expression read the Brownian path anywhere (`B` or `ito`)?
    pub fn references_path(&self) -> bool {
        match &self.kind {
            ExprKind::Brownian(_) | ExprKind::Ito(_) => true,
            ExprKind::Number(_) | ExprKind::Variable(_) => false,
            ExprKind::Neg(inner) => inner.references_path(),
            ExprKind::Binary { lhs, rhs, .. } => lhs.references_path() || rhs.references_path(),
            ExprKind::Call { arg, .. } => arg.references_path(),
        }
    }

    pub fn references_ito(&self) -> bool {
        match &self.kind {
            ExprKind::Ito(_) => true,
            ExprKind::Number(_) | ExprKind::Variable(_) => false,
            ExprKind::Brownian(inner) | ExprKind::Neg(inner) => inner.references_ito(),
            ExprKind::Binary { lhs, rhs, .. } => lhs.references_ito() || rhs.references_ito(),
            ExprKind::Call { arg, .. } => arg.references_ito(),
        }
    }

    /// Does `var` occur free? Occurrences of `s` inside an `ito` integrand are
    /// bound by the integral and do not count.
    pub fn references_var(&self, var: Var) -> bool {
        match &self.kind {
            ExprKind::Variable(v) => *v == var,
            ExprKind::Number(_) => false,
            ExprKind::Ito(inner) => {
                if var == Var::S {
                    false
                } else {
                    inner.references_var(var)
                }
            }
            ExprKind::Brownian(inner) | ExprKind::Neg(inner) => inner.references_var(var),
            ExprKind::Binary { lhs, rhs, .. } => lhs.references_var(var) || rhs.references_var(var),
            ExprKind::Call { arg, .. } => arg.references_var(var),
        }
    }
}

/// Fully parenthesized form; reparsing it yields a structurally identical
/// tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Number(v) => write!(f, "{v:?}"),
            ExprKind::Variable(v) => f.write_str(v.name()),
            ExprKind::Brownian(arg) => write!(f, "B({arg})"),
            ExprKind::Ito(arg) => write!(f, "ito({arg})"),
            ExprKind::Neg(arg) => write!(f, "(-{arg})"),
            ExprKind::Binary { op, lhs, rhs } => write!(f, "({lhs} {} {rhs})", op.symbol()),
            ExprKind::Call { func, arg } => write!(f, "{}({arg})", func.name()),
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    /// Input ended where one of `expected` should appear.
    UnexpectedEnd {
        expected: &'static str,
    },
    /// A token that fits none of `expected`.
    Unexpected {
        found: String,
        expected: &'static str,
    },
    UnknownIdentifier {
        name: String,
    },
    /// Numeric literal that does not parse to a finite double.
    MalformedNumber {
        text: String,
    },
    TooDeep,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at byte {}: ", self.offset)?;
        match &self.kind {
            ParseErrorKind::UnexpectedEnd { expected } => {
                write!(f, "input ended, expected {expected}")
            }
            ParseErrorKind::Unexpected { found, expected } => {
                write!(f, "found {found}, expected {expected}")
            }
            ParseErrorKind::UnknownIdentifier { name } => {
                write!(f, "unknown identifier `{name}`")
            }
            ParseErrorKind::MalformedNumber { text } => {
                write!(f, "malformed number `{text}`")
            }
            ParseErrorKind::TooDeep => write!(f, "expression nests deeper than {MAX_DEPTH} levels"),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(v) => format!("number `{v:?}`"),
            Token::Ident(name) => format!("identifier `{name}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let b = bytes[pos];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => pos += 1,
            b'+' => {
                tokens.push((pos, Token::Plus));
                pos += 1;
            }
            b'-' => {
                tokens.push((pos, Token::Minus));
                pos += 1;
            }
            b'*' => {
                tokens.push((pos, Token::Star));
                pos += 1;
            }
            b'/' => {
                tokens.push((pos, Token::Slash));
                pos += 1;
            }
            b'^' => {
                tokens.push((pos, Token::Caret));
                pos += 1;
            }
            b'(' => {
                tokens.push((pos, Token::LParen));
                pos += 1;
            }
            b')' => {
                tokens.push((pos, Token::RParen));
                pos += 1;
            }
            b'0'..=b'9' => {
                let start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'.' {
                    pos += 1;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                }
                // exponent only when it is actually followed by digits
                if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
                    let mut probe = pos + 1;
                    if probe < bytes.len() && (bytes[probe] == b'+' || bytes[probe] == b'-') {
                        probe += 1;
                    }
                    if probe < bytes.len() && bytes[probe].is_ascii_digit() {
                        pos = probe;
                        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                            pos += 1;
                        }
                    }
                }
                let text = &src[start..pos];
                match text.parse::<f64>() {
                    Ok(v) if v.is_finite() => tokens.push((start, Token::Number(v))),
                    _ => {
                        return Err(ParseError {
                            offset: start,
                            kind: ParseErrorKind::MalformedNumber { text: text.into() },
                        })
                    }
                }
            }
            b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                let start = pos;
                while pos < bytes.len()
                    && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_')
                {
                    pos += 1;
                }
                tokens.push((start, Token::Ident(src[start..pos].into())));
            }
            _ => {
                // report the whole UTF-8 character, not a lone byte
                let ch = src[pos..].chars().next().unwrap_or('\u{fffd}');
                return Err(ParseError {
                    offset: pos,
                    kind: ParseErrorKind::Unexpected {
                        found: format!("`{}`", ch.escape_default()),
                        expected: "a number, identifier, operator, or parenthesis",
                    },
                });
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: &'a [(usize, Token)],
    pos: usize,
    end_offset: usize,
}

const ATOM_EXPECTED: &str = "a number, `t`, `s`, a function call, `(`, or `-`";

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(usize, Token)> {
        self.tokens.get(self.pos)
    }

    fn advance(&mut self) -> Option<&(usize, Token)> {
        let tok = self.tokens.get(self.pos);
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        match self.peek() {
            Some((offset, token)) => ParseError {
                offset: *offset,
                kind: ParseErrorKind::Unexpected {
                    found: token.describe(),
                    expected,
                },
            },
            None => ParseError {
                offset: self.end_offset,
                kind: ParseErrorKind::UnexpectedEnd { expected },
            },
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some((_, Token::RParen)) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.unexpected("`)`")),
        }
    }

    fn guard_depth(&self, depth: usize, offset: usize) -> Result<(), ParseError> {
        if depth > MAX_DEPTH {
            Err(ParseError {
                offset,
                kind: ParseErrorKind::TooDeep,
            })
        } else {
            Ok(())
        }
    }

    fn parse_expr(&mut self, depth: usize) -> Result<Expr, ParseError> {
        let offset = self.peek().map_or(self.end_offset, |(o, _)| *o);
        self.guard_depth(depth, offset)?;
        let mut lhs = self.parse_term(depth)?;
        while let Some((offset, token)) = self.peek() {
            let op = match token {
                Token::Plus => BinOp::Add,
                Token::Minus => BinOp::Sub,
                _ => break,
            };
            let offset = *offset;
            self.pos += 1;
            let rhs = self.parse_term(depth)?;
            lhs = Expr::new(
                ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                offset,
            );
        }
        Ok(lhs)
    }

    fn parse_term(&mut self, depth: usize) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_factor(depth)?;
        while let Some((offset, token)) = self.peek() {
            let op = match token {
                Token::Star => BinOp::Mul,
                Token::Slash => BinOp::Div,
                _ => break,
            };
            let offset = *offset;
            self.pos += 1;
            let rhs = self.parse_factor(depth)?;
            lhs = Expr::new(
                ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                offset,
            );
        }
        Ok(lhs)
    }

    fn parse_factor(&mut self, depth: usize) -> Result<Expr, ParseError> {
        let offset = self.peek().map_or(self.end_offset, |(o, _)| *o);
        self.guard_depth(depth, offset)?;
        if let Some((offset, Token::Minus)) = self.peek() {
            let offset = *offset;
            self.pos += 1;
            let inner = self.parse_factor(depth + 1)?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), offset));
        }
        self.parse_power(depth)
    }

    fn parse_power(&mut self, depth: usize) -> Result<Expr, ParseError> {
        let base = self.parse_atom(depth)?;
        if let Some((offset, Token::Caret)) = self.peek() {
            let offset = *offset;
            self.pos += 1;
            // right-associative; the exponent may carry its own unary minus
            let exponent = self.parse_factor(depth + 1)?;
            return Ok(Expr::new(
                ExprKind::Binary {
                    op: BinOp::Pow,
                    lhs: Box::new(base),
                    rhs: Box::new(exponent),
                },
                offset,
            ));
        }
        Ok(base)
    }

    fn parse_atom(&mut self, depth: usize) -> Result<Expr, ParseError> {
        let (offset, token) = match self.advance() {
            Some(pair) => (pair.0, pair.1.clone()),
            None => {
                return Err(ParseError {
                    offset: self.end_offset,
                    kind: ParseErrorKind::UnexpectedEnd {
                        expected: ATOM_EXPECTED,
                    },
                })
            }
        };
        match token {
            Token::Number(v) => Ok(Expr::new(ExprKind::Number(v), offset)),
            Token::LParen => {
                let inner = self.parse_expr(depth + 1)?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Token::Ident(name) => match name.as_str() {
                "t" => Ok(Expr::new(ExprKind::Variable(Var::T), offset)),
                "s" => Ok(Expr::new(ExprKind::Variable(Var::S), offset)),
                "B" => {
                    self.expect_lparen()?;
                    let arg = self.parse_expr(depth + 1)?;
                    self.expect_rparen()?;
                    Ok(Expr::new(ExprKind::Brownian(Box::new(arg)), offset))
                }
                "ito" => {
                    self.expect_lparen()?;
                    let arg = self.parse_expr(depth + 1)?;
                    self.expect_rparen()?;
                    Ok(Expr::new(ExprKind::Ito(Box::new(arg)), offset))
                }
                _ => match Func::from_name(&name) {
                    Some(func) => {
                        self.expect_lparen()?;
                        let arg = self.parse_expr(depth + 1)?;
                        self.expect_rparen()?;
                        Ok(Expr::new(
                            ExprKind::Call {
                                func,
                                arg: Box::new(arg),
                            },
                            offset,
                        ))
                    }
                    None => Err(ParseError {
                        offset,
                        kind: ParseErrorKind::UnknownIdentifier { name },
                    }),
                },
            },
            other => {
                self.pos -= 1; // report at the offending token
                let _ = other;
                Err(self.unexpected(ATOM_EXPECTED))
            }
        }
    }

    fn expect_lparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some((_, Token::LParen)) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.unexpected("`(` (function application requires parentheses)")),
        }
    }
}

/// Parses a source string into a position-annotated tree. Never panics; any
/// input yields either an expression or a positioned [`ParseError`].
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(src)?;
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        end_offset: src.len(),
    };
    let expr = parser.parse_expr(0)?;
    if parser.peek().is_some() {
        return Err(parser.unexpected("an operator or end of input"));
    }
    Ok(expr)
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Bindings available while evaluating: the time `t`, the kernel variable `s`
/// when present, and the Brownian path when the expression reads one.
#[derive(Debug, Clone, Copy)]
pub struct EvalEnv<'a> {
    pub t: f64,
    pub s: Option<f64>,
    pub path: Option<&'a BrownianPath>,
}

impl<'a> EvalEnv<'a> {
    /// Environment for scalar fields f(t) / exact solutions.
    pub fn scalar(t: f64, path: Option<&'a BrownianPath>) -> Self {
        Self { t, s: None, path }
    }

    /// Environment for kernel fields k(s, t).
    pub fn kernel(s: f64, t: f64) -> Self {
        Self {
            t,
            s: Some(s),
            path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalError {
    pub offset: usize,
    pub kind: EvalErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalErrorKind {
    /// `s` used outside a kernel (or ito integrand) context.
    MissingS,
    /// `B` or `ito` used with no path bound.
    MissingPath,
    LogNonPositive(f64),
    SqrtNegative(f64),
    DivisionByZero,
    /// Non-integer exponent over a non-positive base.
    PowNonPositiveBase(f64),
    /// `B(u)` with `u` outside `[0, T]`.
    BrownianOutOfDomain(f64),
    NestedIto,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "evaluation error at byte {}: ", self.offset)?;
        match &self.kind {
            EvalErrorKind::MissingS => write!(f, "`s` is not bound in this context"),
            EvalErrorKind::MissingPath => {
                write!(f, "no Brownian path is bound in this context")
            }
            EvalErrorKind::LogNonPositive(v) => write!(f, "ln of non-positive value {v}"),
            EvalErrorKind::SqrtNegative(v) => write!(f, "sqrt of negative value {v}"),
            EvalErrorKind::DivisionByZero => write!(f, "division by zero"),
            EvalErrorKind::PowNonPositiveBase(v) => {
                write!(f, "non-integer power of non-positive base {v}")
            }
            EvalErrorKind::BrownianOutOfDomain(v) => {
                write!(f, "B({v}) lies outside the path domain")
            }
            EvalErrorKind::NestedIto => write!(f, "ito(...) may not be nested"),
        }
    }
}

impl std::error::Error for EvalError {}

fn pow_eval(base: f64, exponent: f64, offset: usize) -> Result<f64, EvalError> {
    if exponent.fract() == 0.0 && exponent.abs() <= 8.0 {
        let n = exponent as i32;
        let mut acc = 1.0;
        for _ in 0..n.unsigned_abs() {
            acc *= base;
        }
        if n < 0 {
            if acc == 0.0 {
                return Err(EvalError {
                    offset,
                    kind: EvalErrorKind::DivisionByZero,
                });
            }
            return Ok(1.0 / acc);
        }
        Ok(acc)
    } else if base > 0.0 {
        Ok((exponent * base.ln()).exp())
    } else {
        Err(EvalError {
            offset,
            kind: EvalErrorKind::PowNonPositiveBase(base),
        })
    }
}

/// Evaluates an expression under the given bindings. Pure: equal inputs give
/// equal results.
pub fn evaluate(expr: &Expr, env: &EvalEnv) -> Result<f64, EvalError> {
    eval_inner(expr, env, false)
}

fn eval_inner(expr: &Expr, env: &EvalEnv, inside_ito: bool) -> Result<f64, EvalError> {
    let offset = expr.offset;
    match &expr.kind {
        ExprKind::Number(v) => Ok(*v),
        ExprKind::Variable(Var::T) => Ok(env.t),
        ExprKind::Variable(Var::S) => env.s.ok_or(EvalError {
            offset,
            kind: EvalErrorKind::MissingS,
        }),
        ExprKind::Neg(inner) => Ok(-eval_inner(inner, env, inside_ito)?),
        ExprKind::Binary { op, lhs, rhs } => {
            let a = eval_inner(lhs, env, inside_ito)?;
            let b = eval_inner(rhs, env, inside_ito)?;
            match op {
                BinOp::Add => Ok(a + b),
                BinOp::Sub => Ok(a - b),
                BinOp::Mul => Ok(a * b),
                BinOp::Div => {
                    if b == 0.0 {
                        Err(EvalError {
                            offset,
                            kind: EvalErrorKind::DivisionByZero,
                        })
                    } else {
                        Ok(a / b)
                    }
                }
                BinOp::Pow => pow_eval(a, b, offset),
            }
        }
        ExprKind::Call { func, arg } => {
            let v = eval_inner(arg, env, inside_ito)?;
            match func {
                Func::Sin => Ok(v.sin()),
                Func::Cos => Ok(v.cos()),
                Func::Exp => Ok(v.exp()),
                Func::Ln => {
                    if v <= 0.0 {
                        Err(EvalError {
                            offset,
                            kind: EvalErrorKind::LogNonPositive(v),
                        })
                    } else {
                        Ok(v.ln())
                    }
                }
                Func::Sqrt => {
                    if v < 0.0 {
                        Err(EvalError {
                            offset,
                            kind: EvalErrorKind::SqrtNegative(v),
                        })
                    } else {
                        Ok(v.sqrt())
                    }
                }
            }
        }
        ExprKind::Brownian(arg) => {
            let u = eval_inner(arg, env, inside_ito)?;
            let path = env.path.ok_or(EvalError {
                offset,
                kind: EvalErrorKind::MissingPath,
            })?;
            path.value_at(u).map_err(|_| EvalError {
                offset,
                kind: EvalErrorKind::BrownianOutOfDomain(u),
            })
        }
        ExprKind::Ito(integrand) => {
            if inside_ito {
                return Err(EvalError {
                    offset,
                    kind: EvalErrorKind::NestedIto,
                });
            }
            let path = env.path.ok_or(EvalError {
                offset,
                kind: EvalErrorKind::MissingPath,
            })?;
            let mut inner_err = None;
            let result = path.ito_integral_interp(
                |s_val| {
                    let inner_env = EvalEnv {
                        t: env.t,
                        s: Some(s_val),
                        path: env.path,
                    };
                    eval_inner(integrand, &inner_env, true).map_err(|e| {
                        inner_err = Some(e);
                        crate::Error::PathRequired // placeholder; real error kept above
                    })
                },
                env.t,
            );
            match result {
                Ok(v) => Ok(v),
                Err(_) => Err(inner_err.unwrap_or(EvalError {
                    offset,
                    kind: EvalErrorKind::BrownianOutOfDomain(env.t),
                })),
            }
        }
    }
}
