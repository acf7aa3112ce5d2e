//! Expression language and file format for chart domains and transition maps.
//!
//! Grammar, left-associative throughout:
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor ("*" factor)*
//! factor := INT | IDENT | "inv" "(" expr ")" | "-" factor | "(" expr ")"
//!         | "(" expr ("," expr)+ ")"
//! pred   := atom ("&&" atom)*
//! atom   := "true" | "invertible" "(" expr ")" | "nonzero" "(" expr ")"
//!         | "eq" "(" expr "," expr ")"
//! ```
//!
//! `a*b*c` is `(a*b)*c`. Evaluation follows the tree exactly, so over a
//! nonassociative algebra the parenthesization written in a file is the one
//! computed. There is no division token: write `inv(a)*b` or `b*inv(a)`.
//!
//! Coordinates are `x0 .. x{n-1}`; `u, v` alias `x0, x1` when `n = 2` and `u`
//! aliases `x0` when `n = 1`.
//!
//! Gluing files are INI-style:
//!
//! ```text
//! [model]
//! algebra = Fp:3
//! dim = 2
//! mode = cocycle        # or epos
//!
//! [charts]
//! ids = 0 1 2
//!
//! [domain.0]
//! pred = true
//!
//! [map.1->0]            # chart-1 coordinates rewritten into chart-0 coordinates
//! domain = invertible(u)
//! map = (inv(u), inv(u)*v)
//!
//! [epos]                # epos mode only
//! equiv = a~b
//! order = a<c, b<d
//! ```
//!
//! Morphism files use `[morphism]` with `source` and `target` keys and one
//! `[mor.<i>-><i'>]` section per component with a `map` key.

use std::fmt;

use thiserror::Error;

use crate::algebra::{Algebra, Elem, Point};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(u64),
    Var(String),
    Neg(Box<Expr>),
    Inv(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Tuple(Vec<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    Resolution,
    Arity,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line:{line}:col:{col}: {msg}")]
pub struct ParseError {
    pub kind: ErrorKind,
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl ParseError {
    fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Syntax, line, col, msg: msg.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("`{0}` is not invertible")]
    NotInvertible(String),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("tuple `{0}` used as a scalar")]
    Shape(String),
}

/// Position of a coordinate name among `dim` coordinates.
pub fn coord_index(name: &str, dim: usize) -> Option<usize> {
    match (name, dim) {
        ("u", 1 | 2) => return Some(0),
        ("v", 2) => return Some(1),
        _ => {}
    }
    let k: usize = name.strip_prefix('x')?.parse().ok()?;
    (k < dim && name == format!("x{k}")).then_some(k)
}

/// Canonical coordinate names for `dim` coordinates.
pub fn coord_names(dim: usize) -> Vec<String> {
    match dim {
        1 => vec!["u".into()],
        2 => vec!["u".into(), "v".into()],
        _ => (0..dim).map(|k| format!("x{k}")).collect(),
    }
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn inv(e: Expr) -> Expr {
        Expr::Inv(Box::new(e))
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    /// Every variable name, in order of first occurrence.
    pub fn variables(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Int(_) => {}
                Expr::Var(v) => {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
                Expr::Neg(a) | Expr::Inv(a) => walk(a, out),
                Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Expr::Tuple(es) => es.iter().for_each(|x| walk(x, out)),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Evaluates with `env[k]` bound to coordinate `k` of `env.len()`.
    pub fn eval(&self, alg: &Algebra, env: &[Elem]) -> Result<Elem, EvalError> {
        match self {
            Expr::Int(n) => Ok(alg.from_integer(*n as i64)),
            Expr::Var(v) => coord_index(v, env.len())
                .map(|k| env[k].clone())
                .ok_or_else(|| EvalError::Unbound(v.clone())),
            Expr::Neg(a) => Ok(alg.neg(&a.eval(alg, env)?)),
            Expr::Inv(a) => {
                let x = a.eval(alg, env)?;
                alg.inv(&x).map_err(|_| EvalError::NotInvertible(a.to_string()))
            }
            Expr::Add(a, b) => Ok(alg.add(&a.eval(alg, env)?, &b.eval(alg, env)?)),
            Expr::Sub(a, b) => Ok(alg.sub(&a.eval(alg, env)?, &b.eval(alg, env)?)),
            Expr::Mul(a, b) => Ok(alg.mul(&a.eval(alg, env)?, &b.eval(alg, env)?)),
            Expr::Tuple(_) => Err(EvalError::Shape(self.to_string())),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            _ => 3,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    /// Minimal parentheses that reproduce the same tree on reparse.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_operand(f, a, a.precedence() < 3)
            }
            Expr::Inv(a) => write!(f, "inv({a})"),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                let p = self.precedence();
                let op = match self {
                    Expr::Add(..) => " + ",
                    Expr::Sub(..) => " - ",
                    _ => "*",
                };
                write_operand(f, a, a.precedence() < p)?;
                write!(f, "{op}")?;
                write_operand(f, b, b.precedence() <= p)
            }
            Expr::Tuple(es) => {
                let parts: Vec<String> = es.iter().map(|e| e.to_string()).collect();
                write!(f, "({})", parts.join(", "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(u64),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    AndAnd,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::AndAnd => write!(f, "`&&`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

fn tokenize(text: &str, line: usize, col0: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
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
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, col));
            i += 1;
        } else if c == '&' && chars.get(i + 1) == Some(&'&') {
            out.push((Tok::AndAnd, col));
            i += 2;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s
                .parse()
                .map_err(|_| ParseError::syntax(line, col, format!("integer literal `{s}` too large")))?;
            out.push((Tok::Int(n), col));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else {
            return Err(ParseError::syntax(line, col, format!("unexpected character `{c}`")));
        }
    }
    out.push((Tok::Eof, col0 + chars.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
}

impl Parser {
    fn new(text: &str, line: usize, col: usize) -> Result<Self, ParseError> {
        Ok(Self { toks: tokenize(text, line, col)?, pos: 0, line })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::syntax(self.line, self.col(), msg)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.error(format!("expected {wanted}, found {}", self.peek()))
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&t.to_string()))
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of input")),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    e = Expr::add(e, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    e = Expr::sub(e, self.term()?);
                }
                _ => return Ok(e),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            e = Expr::mul(e, self.factor()?);
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n))
            }
            Tok::Ident(name) if name == "inv" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::inv(e))
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Expr::Var(name))
            }
            Tok::Minus => {
                self.bump();
                Ok(Expr::neg(self.factor()?))
            }
            Tok::LParen => {
                self.bump();
                let first = self.expr()?;
                if *self.peek() != Tok::Comma {
                    self.expect(Tok::RParen)?;
                    return Ok(first);
                }
                let mut items = vec![first];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    items.push(self.expr()?);
                }
                self.expect(Tok::RParen)?;
                Ok(Expr::Tuple(items))
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let col = self.col();
        let name = match self.bump() {
            Tok::Ident(n) => n,
            t => return Err(ParseError::syntax(self.line, col, format!("expected a predicate atom, found {t}"))),
        };
        if name == "true" {
            return Ok(Atom::True);
        }
        self.expect(Tok::LParen)?;
        let atom = match name.as_str() {
            "invertible" => Atom::Invertible(self.expr()?),
            "nonzero" => Atom::Nonzero(self.expr()?),
            "eq" => {
                let a = self.expr()?;
                self.expect(Tok::Comma)?;
                Atom::Eq(a, self.expr()?)
            }
            _ => return Err(ParseError::syntax(self.line, col, format!("unknown predicate `{name}`"))),
        };
        self.expect(Tok::RParen)?;
        Ok(atom)
    }

    fn predicate(&mut self) -> Result<Predicate, ParseError> {
        let mut atoms = vec![self.atom()?];
        while *self.peek() == Tok::AndAnd {
            self.bump();
            atoms.push(self.atom()?);
        }
        Ok(Predicate(atoms))
    }
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    parse_expr_at(text, 1, 1)
}

fn parse_expr_at(text: &str, line: usize, col: usize) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text, line, col)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

pub fn eval_expr(e: &Expr, env: &[Elem], alg: &Algebra) -> Result<Elem, EvalError> {
    e.eval(alg, env)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    True,
    Invertible(Expr),
    Nonzero(Expr),
    Eq(Expr, Expr),
}

/// A conjunction of atoms; an atom whose evaluation fails counts as false.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Predicate(pub Vec<Atom>);

impl Predicate {
    pub fn always() -> Self {
        Predicate(vec![Atom::True])
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse_predicate_at(text, 1, 1)
    }

    pub fn holds(&self, alg: &Algebra, x: &[Elem]) -> bool {
        self.0.iter().all(|a| match a {
            Atom::True => true,
            Atom::Invertible(e) => e.eval(alg, x).is_ok_and(|v| alg.is_invertible(&v)),
            Atom::Nonzero(e) => e.eval(alg, x).is_ok_and(|v| !alg.is_zero(&v)),
            Atom::Eq(a, b) => matches!((a.eval(alg, x), b.eval(alg, x)), (Ok(p), Ok(q)) if p == q),
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|a| *a == Atom::True)
    }

    fn exprs(&self) -> Vec<&Expr> {
        self.0
            .iter()
            .flat_map(|a| match a {
                Atom::True => vec![],
                Atom::Invertible(e) | Atom::Nonzero(e) => vec![e],
                Atom::Eq(a, b) => vec![a, b],
            })
            .collect()
    }
}

fn parse_predicate_at(text: &str, line: usize, col: usize) -> Result<Predicate, ParseError> {
    let mut p = Parser::new(text, line, col)?;
    let pred = p.predicate()?;
    p.finish()?;
    Ok(pred)
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::True => write!(f, "true"),
            Atom::Invertible(e) => write!(f, "invertible({e})"),
            Atom::Nonzero(e) => write!(f, "nonzero({e})"),
            Atom::Eq(a, b) => write!(f, "eq({a}, {b})"),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "{}", parts.join(" && "))
    }
}

/// A map `A^m → A^n` given by `n` component expressions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MapSpec {
    pub components: Vec<Expr>,
}

impl MapSpec {
    pub fn new(components: Vec<Expr>) -> Self {
        Self { components }
    }

    /// Parses without arity checks; a top-level tuple gives the components.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Ok(Self::from_expr(parse_expr(text)?))
    }

    fn from_expr(e: Expr) -> Self {
        match e {
            Expr::Tuple(items) => Self { components: items },
            other => Self { components: vec![other] },
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self { components: coord_names(dim).iter().map(|n| Expr::var(n)).collect() }
    }

    pub fn arity(&self) -> usize {
        self.components.len()
    }

    /// Checks that the map reads `in_dim` coordinates and produces `out_dim`.
    pub fn check(&self, in_dim: usize, out_dim: usize) -> Result<(), String> {
        if self.components.len() != out_dim {
            return Err(format!("map has {} components, expected {out_dim}", self.components.len()));
        }
        for e in &self.components {
            if let Some(v) = e.variables().into_iter().find(|v| coord_index(v, in_dim).is_none()) {
                return Err(format!("`{v}` is not a coordinate in dimension {in_dim}"));
            }
        }
        Ok(())
    }

    pub fn eval(&self, alg: &Algebra, x: &[Elem]) -> Result<Point, EvalError> {
        self.components.iter().map(|e| e.eval(alg, x)).collect()
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.components.as_slice() {
            [single] => write!(f, "{single}"),
            many => write!(f, "{}", Expr::Tuple(many.to_vec())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Top charts with a classical cocycle; the e-pos is generated.
    Cocycle,
    /// Explicit e-pos; maps are given for E-pairs.
    Epos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapDecl {
    pub from: String,
    pub to: String,
    pub domain: Predicate,
    pub map: MapSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct EposDecl {
    /// Generators of `E`.
    pub equiv: Vec<(String, String)>,
    /// Generators of `L`, `(lower, upper)`.
    pub order: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluingFile {
    pub algebra: Algebra,
    pub dim: usize,
    pub mode: Mode,
    pub charts: Vec<String>,
    /// One predicate per chart, parallel to `charts`.
    pub domains: Vec<Predicate>,
    pub maps: Vec<MapDecl>,
    pub epos: Option<EposDecl>,
}

impl GluingFile {
    pub fn chart(&self, name: &str) -> Option<usize> {
        self.charts.iter().position(|c| c == name)
    }

    pub fn map(&self, from: &str, to: &str) -> Option<&MapDecl> {
        self.maps.iter().find(|m| m.from == from && m.to == to)
    }

    pub fn to_text(&self) -> String {
        serialize(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentDecl {
    /// Source index name.
    pub from: String,
    /// Target index name.
    pub to: String,
    pub map: MapSpec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismFile {
    pub source: String,
    pub target: String,
    pub components: Vec<ComponentDecl>,
}

struct Entry {
    key: String,
    value: String,
    line: usize,
    col: usize,
}

struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<Entry> {
        let k = self.entries.iter().position(|e| e.key == key)?;
        Some(self.entries.remove(k))
    }

    fn require(&mut self, key: &str) -> Result<Entry, ParseError> {
        self.take(key).ok_or_else(|| resolution(self.line, 1, format!("[{}] is missing `{key}`", self.name)))
    }

    fn finish(self) -> Result<(), ParseError> {
        match self.entries.first() {
            Some(e) => Err(ParseError::syntax(e.line, 1, format!("unknown key `{}` in [{}]", e.key, self.name))),
            None => Ok(()),
        }
    }
}

fn resolution(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError { kind: ErrorKind::Resolution, line, col, msg: msg.into() }
}

fn arity_error(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError { kind: ErrorKind::Arity, line, col, msg: msg.into() }
}

fn sections(text: &str) -> Result<Vec<Section>, ParseError> {
    let mut out: Vec<Section> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ParseError::syntax(line, raw.len() + 1, "expected `]`"))?
                .trim()
                .to_string();
            if out.iter().any(|s| s.name == name) {
                return Err(ParseError::syntax(line, 1, format!("duplicate section [{name}]")));
            }
            out.push(Section { name, line, entries: Vec::new() });
            continue;
        }
        let Some(eq) = content.find('=') else {
            return Err(ParseError::syntax(line, 1, "expected `key = value`"));
        };
        let section = out
            .last_mut()
            .ok_or_else(|| ParseError::syntax(line, 1, "entry outside of any section"))?;
        let key = content[..eq].trim().to_string();
        let after = &content[eq + 1..];
        let lead = after.len() - after.trim_start().len();
        let col = content[..eq + 1 + lead].chars().count() + 1;
        if section.entries.iter().any(|e| e.key == key) {
            return Err(ParseError::syntax(line, 1, format!("duplicate key `{key}`")));
        }
        section.entries.push(Entry { key, value: after.trim().to_string(), line, col });
    }
    Ok(out)
}

fn split_list(s: &str) -> Vec<String> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn split_arrow(name: &str, prefix: &str) -> Option<(String, String)> {
    let rest = name.strip_prefix(prefix)?;
    let (a, b) = rest.split_once("->")?;
    Some((a.trim().to_string(), b.trim().to_string()))
}

fn parse_pairs(entry: &Entry, sep: char) -> Result<Vec<(String, String)>, ParseError> {
    split_list(&entry.value)
        .into_iter()
        .map(|item| match item.split_once(sep) {
            Some((a, b)) if !a.is_empty() && !b.is_empty() => Ok((a.to_string(), b.to_string())),
            _ => Err(ParseError::syntax(entry.line, entry.col, format!("expected `a{sep}b`, found `{item}`"))),
        })
        .collect()
}

fn parse_map_entry(e: &Entry, in_dim: usize, out_dim: usize) -> Result<MapSpec, ParseError> {
    let spec = MapSpec::from_expr(parse_expr_at(&e.value, e.line, e.col)?);
    spec.check(in_dim, out_dim).map_err(|m| arity_error(e.line, e.col, m))?;
    Ok(spec)
}

fn parse_pred_entry(e: &Entry, dim: usize) -> Result<Predicate, ParseError> {
    let p = parse_predicate_at(&e.value, e.line, e.col)?;
    for x in p.exprs() {
        if let Some(v) = x.variables().into_iter().find(|v| coord_index(v, dim).is_none()) {
            return Err(arity_error(e.line, e.col, format!("`{v}` is not a coordinate in dimension {dim}")));
        }
    }
    Ok(p)
}

pub fn parse_gluing_file(text: &str) -> Result<GluingFile, ParseError> {
    let mut secs = sections(text)?;
    let take = |secs: &mut Vec<Section>, name: &str| secs.iter().position(|s| s.name == name).map(|k| secs.remove(k));

    let mut model = take(&mut secs, "model").ok_or_else(|| resolution(1, 1, "missing [model] section"))?;
    let alg_entry = model.require("algebra")?;
    let algebra: Algebra = alg_entry
        .value
        .parse()
        .map_err(|e: crate::algebra::AlgebraError| ParseError::syntax(alg_entry.line, alg_entry.col, e.to_string()))?;
    let dim_entry = model.require("dim")?;
    let dim: usize = dim_entry
        .value
        .parse()
        .ok()
        .filter(|&d| d >= 1)
        .ok_or_else(|| ParseError::syntax(dim_entry.line, dim_entry.col, "dim must be a positive integer"))?;
    let mode = match model.take("mode") {
        None => Mode::Cocycle,
        Some(e) => match e.value.as_str() {
            "cocycle" => Mode::Cocycle,
            "epos" => Mode::Epos,
            other => return Err(ParseError::syntax(e.line, e.col, format!("unknown mode `{other}`"))),
        },
    };
    model.finish()?;

    let mut charts_sec = take(&mut secs, "charts").ok_or_else(|| resolution(1, 1, "missing [charts] section"))?;
    let ids = charts_sec.require("ids")?;
    let charts = split_list(&ids.value);
    if charts.is_empty() {
        return Err(ParseError::syntax(ids.line, ids.col, "no charts declared"));
    }
    for (k, c) in charts.iter().enumerate() {
        if charts[..k].contains(c) {
            return Err(ParseError::syntax(ids.line, ids.col, format!("chart `{c}` declared twice")));
        }
    }
    charts_sec.finish()?;

    let mut domains = vec![Predicate::always(); charts.len()];
    let mut maps = Vec::new();
    let mut epos = None;
    for mut s in secs {
        if let Some(c) = s.name.strip_prefix("domain.") {
            let k = charts
                .iter()
                .position(|x| x == c)
                .ok_or_else(|| resolution(s.line, 1, format!("undeclared chart `{c}`")))?;
            let e = s.require("pred")?;
            domains[k] = parse_pred_entry(&e, dim)?;
            s.finish()?;
        } else if let Some((from, to)) = split_arrow(&s.name, "map.") {
            for c in [&from, &to] {
                if !charts.contains(c) {
                    return Err(resolution(s.line, 1, format!("undeclared chart `{c}`")));
                }
            }
            let domain = match s.take("domain") {
                Some(e) => parse_pred_entry(&e, dim)?,
                None => Predicate::always(),
            };
            let map = parse_map_entry(&s.require("map")?, dim, dim)?;
            s.finish()?;
            maps.push(MapDecl { from, to, domain, map });
        } else if s.name == "epos" {
            let mut decl = EposDecl::default();
            if let Some(e) = s.take("equiv") {
                decl.equiv = parse_pairs(&e, '~')?;
            }
            if let Some(e) = s.take("order") {
                decl.order = parse_pairs(&e, '<')?;
            }
            for (a, b) in decl.equiv.iter().chain(&decl.order) {
                for c in [a, b] {
                    if !charts.contains(c) {
                        return Err(resolution(s.line, 1, format!("undeclared chart `{c}`")));
                    }
                }
            }
            s.finish()?;
            epos = Some(decl);
        } else {
            return Err(ParseError::syntax(s.line, 1, format!("unknown section [{}]", s.name)));
        }
    }
    match (mode, &epos) {
        (Mode::Epos, None) => return Err(resolution(1, 1, "mode = epos requires an [epos] section")),
        (Mode::Cocycle, Some(_)) => return Err(resolution(1, 1, "[epos] is only allowed with mode = epos")),
        _ => {}
    }
    Ok(GluingFile { algebra, dim, mode, charts, domains, maps, epos })
}

pub fn serialize(g: &GluingFile) -> String {
    let mut out = String::new();
    let mode = match g.mode {
        Mode::Cocycle => "cocycle",
        Mode::Epos => "epos",
    };
    out.push_str(&format!("[model]\nalgebra = {}\ndim = {}\nmode = {mode}\n", g.algebra, g.dim));
    out.push_str(&format!("\n[charts]\nids = {}\n", g.charts.join(" ")));
    for (c, p) in g.charts.iter().zip(&g.domains) {
        out.push_str(&format!("\n[domain.{c}]\npred = {p}\n"));
    }
    for m in &g.maps {
        out.push_str(&format!("\n[map.{}->{}]\n", m.from, m.to));
        if !m.domain.is_trivial() || m.domain.0.len() != 1 {
            out.push_str(&format!("domain = {}\n", m.domain));
        }
        out.push_str(&format!("map = {}\n", m.map));
    }
    if let Some(e) = &g.epos {
        out.push_str("\n[epos]\n");
        let eq: Vec<String> = e.equiv.iter().map(|(a, b)| format!("{a}~{b}")).collect();
        let ord: Vec<String> = e.order.iter().map(|(a, b)| format!("{a}<{b}")).collect();
        out.push_str(&format!("equiv = {}\norder = {}\n", eq.join(", "), ord.join(", ")));
    }
    out
}

impl fmt::Display for GluingFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize(self))
    }
}

/// Parses a morphism file. Component arities are checked later against the
/// resolved source and target data.
pub fn parse_morphism_file(text: &str) -> Result<MorphismFile, ParseError> {
    let mut secs = sections(text)?;
    let k = secs
        .iter()
        .position(|s| s.name == "morphism")
        .ok_or_else(|| resolution(1, 1, "missing [morphism] section"))?;
    let mut head = secs.remove(k);
    let source = head.require("source")?.value;
    let target = head.require("target")?.value;
    head.finish()?;
    let mut components = Vec::new();
    for mut s in secs {
        let (from, to) =
            split_arrow(&s.name, "mor.").ok_or_else(|| ParseError::syntax(s.line, 1, format!("unknown section [{}]", s.name)))?;
        let e = s.require("map")?;
        let map = MapSpec::from_expr(parse_expr_at(&e.value, e.line, e.col)?);
        s.finish()?;
        components.push(ComponentDecl { from, to, map });
    }
    Ok(MorphismFile { source, target, components })
}

pub fn serialize_morphism_file(m: &MorphismFile) -> String {
    let mut out = format!("[morphism]\nsource = {}\ntarget = {}\n", m.source, m.target);
    for c in &m.components {
        out.push_str(&format!("\n[mor.{}->{}]\nmap = {}\n", c.from, c.to, c.map));
    }
    out
}
