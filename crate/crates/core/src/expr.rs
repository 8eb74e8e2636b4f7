//! CGA expression strings: lexer, parser, canonical printer and evaluator.
//!
//! The language is deliberately tiny — products of `T(vec)`, `R(angle, ei, ej)`
//! and `D(s)` with plain arithmetic inside. Nothing else is evaluated.

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{ChainOp, OperationChain};
use crate::conformal::{self, ConformalError, Motor};
use crate::scene::{Scene, SceneError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("lexical error at {pos}: {msg}")]
    Lexical { pos: usize, msg: String },
    #[error("unknown identifier '{name}' at {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("'{name}' at {pos} is a conformal basis vector and cannot appear in an expression")]
    ReservedIdentifier { name: String, pos: usize },
    #[error("{head}() takes {expected} argument(s), got {found}")]
    Arity { head: char, expected: usize, found: usize },
    #[error("R() plane arguments must be basis vectors e1, e2, e3; got '{found}' at {pos}")]
    PlaneArgument { found: String, pos: usize },
    #[error("syntax error at {pos}: expected {expected}, found {found}")]
    Syntax { pos: usize, expected: String, found: String },
    #[error("empty expression")]
    Empty,
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error(transparent)]
    Conformal(#[from] ConformalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    E1,
    E2,
    E3,
}

impl Basis {
    pub fn index(self) -> usize {
        match self {
            Basis::E1 => 1,
            Basis::E2 => 2,
            Basis::E3 => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Basis> {
        match i {
            1 => Some(Basis::E1),
            2 => Some(Basis::E2),
            3 => Some(Basis::E3),
            _ => None,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.index())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

/// Scalar arithmetic. Literals are always non-negative; signs live in `Neg`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Scalar {
    Num(f64),
    Pi,
    Sqrt(Box<Scalar>),
    Neg(Box<Scalar>),
    Bin(BinOp, Box<Scalar>, Box<Scalar>),
}

impl Scalar {
    pub fn eval(&self) -> f64 {
        match self {
            Scalar::Num(v) => *v,
            Scalar::Pi => std::f64::consts::PI,
            Scalar::Sqrt(x) => x.eval().sqrt(),
            Scalar::Neg(x) => -x.eval(),
            Scalar::Bin(op, a, b) => {
                let (a, b) = (a.eval(), b.eval());
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Scalar::Bin(op, ..) => op.precedence(),
            _ => 3,
        }
    }
}

fn write_scalar_child(f: &mut fmt::Formatter<'_>, s: &Scalar, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({s})")
    } else {
        write!(f, "{s}")
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Num(v) => write!(f, "{v:?}"),
            Scalar::Pi => write!(f, "pi"),
            Scalar::Sqrt(x) => write!(f, "sqrt({x})"),
            Scalar::Neg(x) => {
                f.write_str("-")?;
                write_scalar_child(f, x, matches!(**x, Scalar::Bin(..)))
            }
            Scalar::Bin(op, a, b) => {
                let p = op.precedence();
                write_scalar_child(f, a, a.precedence() < p)?;
                write!(f, " {} ", op.symbol())?;
                write_scalar_child(f, b, b.precedence() <= p)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Term {
    Scaled(Scalar, Basis),
    Bare(Basis),
    Neg(Box<Term>),
}

impl Term {
    fn eval(&self) -> (f64, Basis) {
        match self {
            Term::Scaled(s, b) => (s.eval(), *b),
            Term::Bare(b) => (1.0, *b),
            Term::Neg(t) => {
                let (v, b) = t.eval();
                (-v, b)
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Scaled(s, b) => {
                let text = s.to_string();
                // A leading '-' would reparse as Term::Neg; additive scalars
                // would swallow neighbouring terms.
                if text.starts_with('-') || s.precedence() < 2 {
                    write!(f, "({text})*{b}")
                } else {
                    write!(f, "{text}*{b}")
                }
            }
            Term::Bare(b) => write!(f, "{b}"),
            Term::Neg(t) => write!(f, "-{t}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VecExpr {
    pub first: Term,
    pub rest: Vec<(Sign, Term)>,
}

impl VecExpr {
    pub fn eval(&self) -> [f64; 3] {
        let mut out = [0.0; 3];
        let (v, b) = self.first.eval();
        out[b.index() - 1] += v;
        for (sign, term) in &self.rest {
            let (v, b) = term.eval();
            out[b.index() - 1] += match sign {
                Sign::Plus => v,
                Sign::Minus => -v,
            };
        }
        out
    }
}

impl fmt::Display for VecExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.first)?;
        for (sign, term) in &self.rest {
            let s = match sign {
                Sign::Plus => "+",
                Sign::Minus => "-",
            };
            write!(f, " {s} {term}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Factor {
    T(VecExpr),
    R(Scalar, Basis, Basis),
    D(Scalar),
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::T(v) => write!(f, "T({v})"),
            Factor::R(a, i, j) => write!(f, "R({a}, {i}, {j})"),
            Factor::D(s) => write!(f, "D({s})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgaAst {
    pub factors: Vec<Factor>,
}

impl CgaAst {
    /// `Some(s)` iff the expression is exactly one `D(s)` factor.
    pub fn pure_dilation(&self) -> Option<&Scalar> {
        match self.factors.as_slice() {
            [Factor::D(s)] => Some(s),
            _ => None,
        }
    }
}

/// Canonical form; `parse_cga(&ast.to_string()) == Ok(ast)`.
impl fmt::Display for CgaAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Head(char),
    Basis(Basis),
    Pi,
    Sqrt,
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Head(c) => write!(f, "'{c}'"),
            Tok::Basis(b) => write!(f, "'{b}'"),
            Tok::Pi => write!(f, "'pi'"),
            Tok::Sqrt => write!(f, "'sqrt'"),
            Tok::LParen => write!(f, "'('"),
            Tok::RParen => write!(f, "')'"),
            Tok::Comma => write!(f, "','"),
            Tok::Plus => write!(f, "'+'"),
            Tok::Minus => write!(f, "'-'"),
            Tok::Star => write!(f, "'*'"),
            Tok::Slash => write!(f, "'/'"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

fn classify_ident(name: &str, pos: usize) -> Result<Tok, ExprError> {
    Ok(match name {
        "T" => Tok::Head('T'),
        "R" => Tok::Head('R'),
        "D" => Tok::Head('D'),
        "e1" => Tok::Basis(Basis::E1),
        "e2" => Tok::Basis(Basis::E2),
        "e3" => Tok::Basis(Basis::E3),
        "pi" | "np.pi" | "math.pi" => Tok::Pi,
        "sqrt" | "np.sqrt" | "math.sqrt" => Tok::Sqrt,
        "no" | "ni" => {
            return Err(ExprError::ReservedIdentifier {
                name: name.to_string(),
                pos,
            })
        }
        _ => {
            return Err(ExprError::UnknownIdentifier {
                name: name.to_string(),
                pos,
            })
        }
    })
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b',' => out.push((Tok::Comma, start)),
            b'+' => out.push((Tok::Plus, start)),
            b'-' => out.push((Tok::Minus, start)),
            b'*' => out.push((Tok::Star, start)),
            b'/' => out.push((Tok::Slash, start)),
            b'0'..=b'9' | b'.' => {
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
                let value: f64 = text.parse().map_err(|_| ExprError::Lexical {
                    pos: start,
                    msg: format!("malformed number '{text}'"),
                })?;
                if !value.is_finite() {
                    return Err(ExprError::Lexical {
                        pos: start,
                        msg: format!("number '{text}' overflows"),
                    });
                }
                out.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                loop {
                    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                        i += 1;
                    }
                    let dotted = i + 1 < bytes.len()
                        && bytes[i] == b'.'
                        && (bytes[i + 1].is_ascii_alphabetic() || bytes[i + 1] == b'_');
                    if !dotted {
                        break;
                    }
                    i += 1;
                }
                out.push((classify_ident(&src[start..i], start)?, start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ExprError::Lexical {
                    pos: start,
                    msg: format!("unexpected character '{ch}'"),
                });
            }
        }
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn syntax(&self, expected: &str) -> ExprError {
        ExprError::Syntax {
            pos: self.pos(),
            expected: expected.to_string(),
            found: self.peek().to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ExprError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(expected))
        }
    }

    fn expr(&mut self) -> Result<CgaAst, ExprError> {
        if *self.peek() == Tok::End {
            return Err(ExprError::Empty);
        }
        let mut factors = vec![self.factor()?];
        while *self.peek() == Tok::Star {
            self.bump();
            factors.push(self.factor()?);
        }
        if *self.peek() != Tok::End {
            return Err(self.syntax("'*' or end of expression"));
        }
        Ok(CgaAst { factors })
    }

    /// Number of top-level comma-separated arguments after the current '('.
    fn count_args(&self) -> usize {
        let mut depth = 0usize;
        let mut commas = 0;
        for (tok, _) in &self.toks[self.at + 1..] {
            match tok {
                Tok::LParen => depth += 1,
                Tok::RParen if depth == 0 => break,
                Tok::RParen => depth -= 1,
                Tok::Comma if depth == 0 => commas += 1,
                Tok::End => break,
                _ => {}
            }
        }
        let empty = matches!(self.toks.get(self.at + 1), Some((Tok::RParen, _)));
        if empty {
            0
        } else {
            commas + 1
        }
    }

    fn factor(&mut self) -> Result<Factor, ExprError> {
        let head = match self.peek() {
            Tok::Head(c) => *c,
            _ => return Err(self.syntax("T, R or D")),
        };
        self.bump();
        if *self.peek() != Tok::LParen {
            return Err(self.syntax("'('"));
        }
        let expected = if head == 'R' { 3 } else { 1 };
        let found = self.count_args();
        if found != expected {
            return Err(ExprError::Arity { head, expected, found });
        }
        self.bump();
        let factor = match head {
            'T' => Factor::T(self.vec()?),
            'D' => Factor::D(self.scalar()?),
            _ => {
                let angle = self.scalar()?;
                self.expect(Tok::Comma, "','")?;
                let i = self.plane_basis()?;
                self.expect(Tok::Comma, "','")?;
                let j = self.plane_basis()?;
                Factor::R(angle, i, j)
            }
        };
        self.expect(Tok::RParen, "')'")?;
        Ok(factor)
    }

    fn plane_basis(&mut self) -> Result<Basis, ExprError> {
        match self.peek().clone() {
            Tok::Basis(b) => {
                self.bump();
                Ok(b)
            }
            Tok::Num(v) => Err(ExprError::PlaneArgument {
                found: format!("{v}"),
                pos: self.pos(),
            }),
            Tok::RParen | Tok::Comma | Tok::End => Err(self.syntax("basis vector e1, e2 or e3")),
            other => Err(ExprError::PlaneArgument {
                found: other.to_string(),
                pos: self.pos(),
            }),
        }
    }

    fn vec(&mut self) -> Result<VecExpr, ExprError> {
        let first = self.term()?;
        let mut rest = Vec::new();
        loop {
            let sign = match self.peek() {
                Tok::Plus => Sign::Plus,
                Tok::Minus => Sign::Minus,
                _ => break,
            };
            self.bump();
            rest.push((sign, self.term()?));
        }
        Ok(VecExpr { first, rest })
    }

    fn term(&mut self) -> Result<Term, ExprError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Term::Neg(Box::new(self.term()?)))
            }
            Tok::Basis(b) => {
                let b = *b;
                self.bump();
                Ok(Term::Bare(b))
            }
            _ => {
                let s = self.product(true)?;
                self.expect(Tok::Star, "'*' followed by a basis vector")?;
                match self.bump() {
                    Tok::Basis(b) => Ok(Term::Scaled(s, b)),
                    _ => {
                        self.at -= 1;
                        Err(self.syntax("basis vector e1, e2 or e3"))
                    }
                }
            }
        }
    }

    fn scalar(&mut self) -> Result<Scalar, ExprError> {
        let mut lhs = self.product(false)?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product(false)?;
            lhs = Scalar::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    /// Multiplicative chain. Inside a vector term it stops before `* basis`.
    fn product(&mut self, in_term: bool) -> Result<Scalar, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            if in_term && op == BinOp::Mul && matches!(self.peek2(), Tok::Basis(_)) {
                return Ok(lhs);
            }
            self.bump();
            let rhs = self.unary()?;
            lhs = Scalar::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Scalar, ExprError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Scalar::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Scalar, ExprError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Scalar::Num(v))
            }
            Tok::Pi => {
                self.bump();
                Ok(Scalar::Pi)
            }
            Tok::Sqrt => {
                self.bump();
                self.expect(Tok::LParen, "'(' after sqrt")?;
                let inner = self.scalar()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Scalar::Sqrt(Box::new(inner)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.scalar()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            _ => Err(self.syntax("a number, pi, sqrt(...) or '('")),
        }
    }
}

pub fn parse_cga(expr: &str) -> Result<CgaAst, ExprError> {
    let toks = lex(expr)?;
    Parser { toks, at: 0 }.expr()
}

// ---------------------------------------------------------------------------
// Evaluation

#[derive(Debug, Clone)]
pub struct MotorProgram {
    /// One motor per factor, in written (left-to-right) order.
    pub factor_motors: Vec<Motor>,
    pub composed: Motor,
    /// Execution order: rightmost factor first.
    pub op_chain: OperationChain,
}

fn finite(value: f64, what: &str) -> Result<f64, ExprError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ExprError::NonFinite(what.to_string()))
    }
}

fn factor_op(factor: &Factor) -> Result<(Motor, ChainOp), ExprError> {
    Ok(match factor {
        Factor::T(v) => {
            let v = v.eval();
            for c in v {
                finite(c, "T() displacement")?;
            }
            (conformal::translator(v[0], v[1], v[2])?, ChainOp::Translate { v })
        }
        Factor::R(angle, i, j) => {
            let angle = finite(angle.eval(), "R() angle")?;
            let motor = conformal::plane_rotor(angle, i.index(), j.index())?;
            let axis = conformal::plane_axis(i.index(), j.index()).ok_or(ConformalError::DegeneratePlane)?;
            (motor, ChainOp::Rotate { axis, angle })
        }
        Factor::D(s) => {
            let s = finite(s.eval(), "D() factor")?;
            (conformal::dilator(s)?, ChainOp::Dilate { factor: s })
        }
    })
}

pub fn evaluate_cga(ast: &CgaAst) -> Result<MotorProgram, ExprError> {
    let mut factor_motors = Vec::with_capacity(ast.factors.len());
    let mut ops = Vec::with_capacity(ast.factors.len());
    for factor in &ast.factors {
        let (motor, op) = factor_op(factor)?;
        factor_motors.push(motor);
        ops.push(op);
    }
    ops.reverse();
    let composed = conformal::compose(&factor_motors)?;
    if !composed.value.is_finite() {
        return Err(ExprError::NonFinite("composed motor".into()));
    }
    Ok(MotorProgram {
        factor_motors,
        composed,
        op_chain: OperationChain::new(ops),
    })
}

// ---------------------------------------------------------------------------
// Requests

#[derive(Debug, Error)]
pub enum RequestError {
    #[error("edit request must be a JSON object of name -> expression strings: {0}")]
    Structure(String),
    #[error("edit request has no assignments")]
    Empty,
}

/// The model's output object: object name → CGA expression string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EditRequest {
    pub assignments: IndexMap<String, String>,
}

impl EditRequest {
    pub fn new(assignments: IndexMap<String, String>) -> Result<Self, RequestError> {
        if assignments.is_empty() {
            return Err(RequestError::Empty);
        }
        Ok(Self { assignments })
    }

    pub fn single(name: impl Into<String>, expr: impl Into<String>) -> Self {
        let mut assignments = IndexMap::new();
        assignments.insert(name.into(), expr.into());
        Self { assignments }
    }

    pub fn from_value(value: &serde_json::Value) -> Result<Self, RequestError> {
        let obj = value
            .as_object()
            .ok_or_else(|| RequestError::Structure("top level is not an object".into()))?;
        let mut assignments = IndexMap::new();
        for (name, v) in obj {
            let expr = v
                .as_str()
                .ok_or_else(|| RequestError::Structure(format!("value for '{name}' is not a string")))?;
            assignments.insert(name.clone(), expr.to_string());
        }
        Self::new(assignments)
    }

    pub fn from_json(text: &str) -> Result<Self, RequestError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| RequestError::Structure(e.to_string()))?;
        Self::from_value(&value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentStatus {
    pub name: String,
    pub expression: String,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Execution {
    pub scene: Scene,
    pub statuses: Vec<AssignmentStatus>,
    /// Non-fatal diagnostics (e.g. non-affine matrices).
    pub warnings: Vec<String>,
}

impl Execution {
    pub fn all_ok(&self) -> bool {
        self.statuses.iter().all(|s| s.ok)
    }

    pub fn errors(&self) -> Vec<String> {
        self.statuses
            .iter()
            .filter_map(|s| s.error.as_ref().map(|e| format!("{}: {e}", s.name)))
            .collect()
    }
}

#[derive(Debug, Error)]
enum AssignError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

fn execute_one(scene: &Scene, name: &str, expr: &str) -> Result<Scene, AssignError> {
    scene.object(name)?;
    let ast = parse_cga(expr)?;
    let program = evaluate_cga(&ast)?;
    if ast.pure_dilation().is_some() {
        let ChainOp::Dilate { factor } = program.op_chain.ops[0] else {
            unreachable!("pure dilation yields one dilate op")
        };
        Ok(scene.scale_object(name, factor)?)
    } else {
        Ok(scene.apply_motor_to_object(name, &program.composed)?)
    }
}

/// Applies each assignment in order. Failing assignments are reported and
/// skipped; the rest still apply.
pub fn execute_request(scene: &Scene, req: &EditRequest) -> Execution {
    let mut current = scene.clone();
    let mut statuses = Vec::with_capacity(req.assignments.len());
    for (name, expr) in &req.assignments {
        let result = execute_one(&current, name, expr);
        let error = match result {
            Ok(next) => {
                current = next;
                None
            }
            Err(e) => Some(e.to_string()),
        };
        statuses.push(AssignmentStatus {
            name: name.clone(),
            expression: expr.clone(),
            ok: error.is_none(),
            error,
        });
    }
    Execution {
        scene: current,
        statuses,
        warnings: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Multivector;
    use crate::scene::default_scene;
    use proptest::prelude::*;

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn parses_documented_examples() {
        let ast = parse_cga("T(3*e1)*R(np.pi/2,e1,e2)").unwrap();
        assert_eq!(ast.factors.len(), 2);
        assert!(matches!(ast.factors[0], Factor::T(_)));
        assert!(matches!(ast.factors[1], Factor::R(_, Basis::E1, Basis::E2)));

        let ast = parse_cga("T(2.0*e1 + 0.0*e2 + 0.0*e3)").unwrap();
        let Factor::T(v) = &ast.factors[0] else { panic!() };
        assert_eq!(v.eval(), [2.0, 0.0, 0.0]);

        let ast = parse_cga("T(7.0*e1 + 1.7*e2 + -2.0*e3)").unwrap();
        let Factor::T(v) = &ast.factors[0] else { panic!() };
        assert_eq!(v.eval(), [7.0, 1.7, -2.0]);
    }

    #[test]
    fn numeric_plane_arguments_are_rejected() {
        assert!(matches!(parse_cga("R(pi/2, 1, 2)"), Err(ExprError::PlaneArgument { .. })));
        assert!(matches!(parse_cga("R(pi/2, e1, 2)"), Err(ExprError::PlaneArgument { .. })));
        assert!(matches!(parse_cga("R(pi/2, e1+e2, e3)"), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn arity_errors() {
        assert_eq!(
            parse_cga("R(pi/2, e1)"),
            Err(ExprError::Arity { head: 'R', expected: 3, found: 2 })
        );
        assert_eq!(parse_cga("T()"), Err(ExprError::Arity { head: 'T', expected: 1, found: 0 }));
        assert_eq!(
            parse_cga("D(2, 3)"),
            Err(ExprError::Arity { head: 'D', expected: 1, found: 2 })
        );
        assert_eq!(
            parse_cga("R(sqrt(2), e1, e2, e3)"),
            Err(ExprError::Arity { head: 'R', expected: 3, found: 4 })
        );
    }

    #[test]
    fn lexical_and_identifier_errors() {
        assert!(matches!(parse_cga("T(2*e1) @ D(2)"), Err(ExprError::Lexical { .. })));
        assert!(matches!(parse_cga("D(1e999)"), Err(ExprError::Lexical { .. })));
        assert!(matches!(parse_cga("D(1.2.3)"), Err(ExprError::Lexical { .. })));
        assert!(matches!(parse_cga("__import__('os')"), Err(ExprError::Lexical { .. } | ExprError::UnknownIdentifier { .. })));
        assert!(matches!(parse_cga("D(os.system)"), Err(ExprError::UnknownIdentifier { .. })));
        assert!(matches!(parse_cga("D(exp(1))"), Err(ExprError::UnknownIdentifier { .. })));
        assert!(matches!(parse_cga("T(e4)"), Err(ExprError::UnknownIdentifier { .. })));
        assert!(matches!(parse_cga("T(2*ni)"), Err(ExprError::ReservedIdentifier { .. })));
        assert!(matches!(parse_cga("D(2**2)"), Err(ExprError::Syntax { .. })));
        assert_eq!(parse_cga("   "), Err(ExprError::Empty));
        assert!(matches!(parse_cga("T(2*e1)*"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse_cga("T(2*e1"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse_cga("T(e1*2)"), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn aliases_and_whitespace() {
        let a = parse_cga("R(math.pi/2,e1,e2)").unwrap();
        let b = parse_cga("  R( np.pi / 2 , e1 , e2 )").unwrap();
        let c = parse_cga("R(pi/2, e1, e2)").unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
        let s = parse_cga("D(math.sqrt(4) * np.sqrt(1) / sqrt(1))").unwrap();
        assert_eq!(s.pure_dilation().unwrap().eval(), 2.0);
        let sci = parse_cga("T(1.5e1*e1 - 2E-1*e2 + .5*e3)").unwrap();
        let Factor::T(v) = &sci.factors[0] else { panic!() };
        assert!(close(v.eval(), [15.0, -0.2, 0.5], 1e-15));
    }

    #[test]
    fn vector_terms() {
        let ast = parse_cga("T(e1 - e2 - -3*e3 + (1+1)*e1 + 2*3*e2)").unwrap();
        let Factor::T(v) = &ast.factors[0] else { panic!() };
        assert_eq!(v.eval(), [3.0, 5.0, 3.0]);
    }

    #[test]
    fn canonical_printing() {
        assert_eq!(parse_cga("T(2*e1)*R(np.pi/2,e1,e2)").unwrap().to_string(), "T(2.0*e1)*R(pi / 2.0, e1, e2)");
        assert_eq!(
            parse_cga("T(7.0*e1 + 1.7*e2 + -2.0*e3)").unwrap().to_string(),
            "T(7.0*e1 + 1.7*e2 + -2.0*e3)"
        );
        for src in ["D(1 - (2 - 3))", "D(-(1 + 2) * 3)", "D(--2)", "T((-1)*e1)", "D(2 / (3 / 4))", "T((1 + 2)*e2)"] {
            let ast = parse_cga(src).unwrap();
            assert_eq!(parse_cga(&ast.to_string()).unwrap(), ast, "{src} -> {ast}");
        }
    }

    #[test]
    fn translator_value_matches_closed_form() {
        // T(2*e1) = 1 - ½·(2e1)·ni = 1 - e1·ni
        let program = evaluate_cga(&parse_cga("T(2*e1)").unwrap()).unwrap();
        let expected = Multivector::one() - Multivector::e1() * conformal::ni();
        assert!(program.composed.value.approx_eq(&expected, 1e-12));
    }

    #[test]
    fn unit_dilation_is_identity() {
        let program = evaluate_cga(&parse_cga("D(1)").unwrap()).unwrap();
        assert!(program.composed.value.approx_eq(&Multivector::one(), 1e-12));
    }

    #[test]
    fn composite_matches_matrix_oracle() {
        let program = evaluate_cga(&parse_cga("T(3*e1)*R(pi/2,e1,e2)").unwrap()).unwrap();
        // 2D rotation matrix by 90°, then +3 on x.
        let (c, s) = (std::f64::consts::FRAC_PI_2.cos(), std::f64::consts::FRAC_PI_2.sin());
        let rotated = [c * 1.0 - s * 0.0, s * 1.0 + c * 0.0, 0.0];
        let expected = [rotated[0] + 3.0, rotated[1], rotated[2]];
        let got = program.composed.apply_to([1.0, 0.0, 0.0]).unwrap();
        assert!(close(got, expected, 1e-9), "{got:?}");
        assert_eq!(program.op_chain.kinds(), vec![crate::chain::OpKind::Rotate, crate::chain::OpKind::Translate]);
    }

    #[test]
    fn evaluation_errors() {
        assert!(matches!(evaluate_cga(&parse_cga("D(0)").unwrap()), Err(ExprError::Conformal(_))));
        assert!(matches!(evaluate_cga(&parse_cga("D(-2)").unwrap()), Err(ExprError::Conformal(_))));
        assert!(matches!(evaluate_cga(&parse_cga("T(1/0*e1)").unwrap()), Err(ExprError::NonFinite(_))));
        assert!(matches!(evaluate_cga(&parse_cga("D(sqrt(-1))").unwrap()), Err(ExprError::NonFinite(_))));
        assert!(evaluate_cga(&parse_cga("R(1, e1, e1)").unwrap()).is_err());
    }

    #[test]
    fn request_examples() {
        let scene = default_scene();
        let out = execute_request(&scene, &EditRequest::single("RedSphere", "T(2.0*e1 + 0.0*e2 + 0.0*e3)"));
        assert!(out.all_ok());
        assert!(close(out.scene.get("RedSphere").unwrap().center, [2.0, 0.0, 0.0], 1e-9));

        let out = execute_request(&scene, &EditRequest::single("GreenSphere", "T(7.0*e1 + 1.7*e2 + -2.0*e3)"));
        assert!(close(out.scene.get("GreenSphere").unwrap().center, [4.0, 1.7, 0.0], 1e-9));

        let out = execute_request(&scene, &EditRequest::single("RedSphere", "D(3)"));
        let red = out.scene.get("RedSphere").unwrap();
        assert_eq!((red.size, red.center), (3.0, [0.0, 0.0, 0.0]));
    }

    #[test]
    fn dilation_inside_chain_moves_center_not_size() {
        let scene = default_scene();
        let out = execute_request(&scene, &EditRequest::single("BlueCube", "D(2)*T(0*e1)"));
        let blue = out.scene.get("BlueCube").unwrap();
        assert_eq!(blue.size, 1.0);
        assert!(close(blue.center, [8.0, 0.0, 0.0], 1e-9));
        assert!(parse_cga("D(2)*T(0*e1)").unwrap().pure_dilation().is_none());
    }

    #[test]
    fn failing_assignments_do_not_abort_others() {
        let scene = default_scene();
        let req = EditRequest::from_json(
            r#"{"Teapot": "T(e1)", "RedSphere": "T(2*e1)", "BlueCube": "R(pi/2, 1, 2)"}"#,
        )
        .unwrap();
        let out = execute_request(&scene, &req);
        let oks: Vec<bool> = out.statuses.iter().map(|s| s.ok).collect();
        assert_eq!(oks, vec![false, true, false]);
        assert!(close(out.scene.get("RedSphere").unwrap().center, [2.0, 0.0, 0.0], 1e-9));
        assert_eq!(out.scene.get("BlueCube").unwrap().center, [4.0, 0.0, 0.0]);
        assert_eq!(out.errors().len(), 2);
    }

    #[test]
    fn structural_request_errors() {
        assert!(matches!(EditRequest::from_json("[1,2]"), Err(RequestError::Structure(_))));
        assert!(matches!(EditRequest::from_json(r#"{"A": 3}"#), Err(RequestError::Structure(_))));
        assert!(matches!(EditRequest::from_json("{}"), Err(RequestError::Empty)));
        assert!(matches!(EditRequest::from_json(r#"{"RedSphere": "T(2*e"#), Err(RequestError::Structure(_))));
    }

    // --- generators for property tests

    fn scalar_strategy() -> impl Strategy<Value = Scalar> {
        let leaf = prop_oneof![
            (0u32..1000).prop_map(|n| Scalar::Num(n as f64 / 8.0)),
            Just(Scalar::Pi),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|x| Scalar::Neg(Box::new(x))),
                inner.clone().prop_map(|x| Scalar::Sqrt(Box::new(x))),
                (
                    prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div)],
                    inner.clone(),
                    inner
                )
                    .prop_map(|(op, a, b)| Scalar::Bin(op, Box::new(a), Box::new(b))),
            ]
        })
    }

    fn basis_strategy() -> impl Strategy<Value = Basis> {
        prop_oneof![Just(Basis::E1), Just(Basis::E2), Just(Basis::E3)]
    }

    fn term_strategy() -> impl Strategy<Value = Term> {
        let base = prop_oneof![
            (scalar_strategy(), basis_strategy()).prop_map(|(s, b)| Term::Scaled(s, b)),
            basis_strategy().prop_map(Term::Bare),
        ];
        base.prop_recursive(2, 4, 1, |inner| inner.prop_map(|t| Term::Neg(Box::new(t))))
    }

    fn factor_strategy() -> impl Strategy<Value = Factor> {
        prop_oneof![
            (
                term_strategy(),
                prop::collection::vec((prop_oneof![Just(Sign::Plus), Just(Sign::Minus)], term_strategy()), 0..3)
            )
                .prop_map(|(first, rest)| Factor::T(VecExpr { first, rest })),
            (scalar_strategy(), basis_strategy(), basis_strategy()).prop_map(|(a, i, j)| Factor::R(a, i, j)),
            scalar_strategy().prop_map(Factor::D),
        ]
    }

    fn concrete_factor() -> impl Strategy<Value = String> {
        prop_oneof![
            prop::array::uniform3(-10f64..10.0).prop_map(|v| format!("T({:?}*e1 + {:?}*e2 + {:?}*e3)", v[0], v[1], v[2])),
            (-6.3f64..6.3, 1usize..=3, 1usize..=3)
                .prop_filter("distinct plane", |(_, i, j)| i != j)
                .prop_map(|(a, i, j)| format!("R({a:?}, e{i}, e{j})")),
            (0.2f64..5.0).prop_map(|s| format!("D({s:?})")),
        ]
    }

    proptest! {
        #[test]
        fn print_parse_roundtrip(factors in prop::collection::vec(factor_strategy(), 1..4)) {
            let ast = CgaAst { factors };
            let printed = ast.to_string();
            prop_assert_eq!(parse_cga(&printed), Ok(ast), "{}", printed);
        }

        #[test]
        fn composed_equals_sequential(
            factors in prop::collection::vec(concrete_factor(), 1..=5),
            p in prop::array::uniform3(-10f64..10.0),
        ) {
            let src = factors.join("*");
            let program = evaluate_cga(&parse_cga(&src).unwrap()).unwrap();
            let composed = program.composed.apply_to(p).unwrap();
            let mut seq = p;
            for m in program.factor_motors.iter().rev() {
                seq = m.apply_to(seq).unwrap();
            }
            prop_assert!(close(composed, seq, 1e-9), "{src}: {composed:?} vs {seq:?}");
        }

        #[test]
        fn arbitrary_text_never_panics(s in "\\PC{0,40}") {
            let _ = parse_cga(&s);
        }

        #[test]
        fn identifiers_outside_sandbox_are_rejected(name in "[a-zA-Z_][a-zA-Z0-9_]{0,8}") {
            let allowed = ["T", "R", "D", "e1", "e2", "e3", "no", "ni", "pi", "sqrt"];
            prop_assume!(!allowed.contains(&name.as_str()));
            let src = format!("D({name})");
            prop_assert!(parse_cga(&src).is_err());
        }
    }
}
