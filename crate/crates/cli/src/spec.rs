//! Map specifications.
//!
//! A spec is a list of statements separated by `;` or newlines:
//!
//! ```text
//! h = koebe(); g = 0
//! h = z; g' = lens(0.25)
//! h = z + 0.1z^2; w = 0.3z; koebe_transform(0.2-0.1i)
//! ```
//!
//! `h` is required; at most one of `g`, `g'` (the co-analytic derivative) or
//! `w` (the dilatation) may be given, `g = 0` otherwise. Directives
//! `koebe_transform(ζ)`, `affine(ε)` and `precompose_automorphism(ζ, θ)` are
//! applied in order after the map is built.
//!
//! Expressions use `+ - * / ^`, the variable `z`, complex literals such as
//! `0.3`, `2i`, `1-0.5i`, and the functions
//! `mobius(a,b,c,d)`, `automorphism(ζ,θ)`, `lens(α)`, `koebe()`, `exp(e)`,
//! `log(e)`, `pow(e,α)`, `compose(outer,inner)` and `scale(e,c)`.
//! Angles are in radians.

use std::fmt;

use num_complex::Complex64;
use schwlab_core::{AnalyticMap, HarmonicMap, MobiusParams};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("parse error at column {}: {message}", .position + 1)]
pub struct ParseError {
    /// Byte offset into the spec text.
    pub position: usize,
    pub message: String,
}

impl ParseError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        Self {
            position,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    /// A directive could not be applied, e.g. `h'` vanishes at `ζ`.
    #[error("while applying {directive}: {source}")]
    Eval {
        directive: String,
        source: schwlab_core::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Ident,
    Prime,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eq,
    Sep,
    End,
}

#[derive(Debug, Clone, Copy)]
struct Token {
    tok: Tok,
    start: usize,
    end: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b' ' | b'\t' | b'\r' => {
                i += 1;
                continue;
            }
            b'\n' | b';' => Some(Tok::Sep),
            b'\'' => Some(Tok::Prime),
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            b'=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(tok) = single {
            i += 1;
            out.push(Token { tok, start, end: i });
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v: f64 = text
                .parse()
                .map_err(|_| ParseError::new(start, format!("malformed number {text:?}")))?;
            let imaginary = i < bytes.len()
                && bytes[i] == b'i'
                && !bytes.get(i + 1).is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_');
            if imaginary {
                i += 1;
                out.push(Token { tok: Tok::Imag(v), start, end: i });
            } else {
                out.push(Token { tok: Tok::Num(v), start, end: i });
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident, start, end: i });
            continue;
        }
        let ch = src[start..].chars().next().unwrap_or('?');
        return Err(ParseError::new(start, format!("unexpected character {ch:?}")));
    }
    out.push(Token {
        tok: Tok::End,
        start: src.len(),
        end: src.len(),
    });
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
enum Expr {
    Const(Complex64),
    Z,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>, usize),
    Call(String, Vec<Expr>, usize),
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    k: usize,
}

fn is_integer(x: f64) -> bool {
    x.fract() == 0.0 && x.abs() <= 64.0
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Token {
        self.toks[self.k]
    }

    fn text(&self, t: Token) -> &'a str {
        &self.src[t.start..t.end]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.k];
        if t.tok != Tok::End {
            self.k += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, ParseError> {
        let t = self.peek();
        if t.tok == tok {
            Ok(self.bump())
        } else {
            Err(ParseError::new(t.start, format!("expected {what}, found {}", self.describe(t))))
        }
    }

    fn describe(&self, t: Token) -> String {
        match t.tok {
            Tok::End => "end of input".into(),
            Tok::Sep => "statement separator".into(),
            _ => format!("{:?}", self.text(t)),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let t = self.peek();
            let op = match t.tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), t.start);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let t = self.peek();
            let op = match t.tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                // juxtaposition such as `0.1z` or `2(z+1)`
                Tok::Ident | Tok::LParen if constant(&lhs).is_some() => {
                    let rhs = self.power()?;
                    lhs = Expr::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs), t.start);
                    continue;
                }
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), t.start);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().tok {
            Tok::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        let t = self.peek();
        if t.tok == Tok::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent), t.start));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump();
        match t.tok {
            Tok::Num(v) => Ok(Expr::Const(Complex64::new(v, 0.0))),
            Tok::Imag(v) => Ok(Expr::Const(Complex64::new(0.0, v))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident => {
                let name = self.text(t);
                match name {
                    "z" => Ok(Expr::Z),
                    "i" => Ok(Expr::Const(Complex64::new(0.0, 1.0))),
                    "pi" => Ok(Expr::Const(Complex64::new(std::f64::consts::PI, 0.0))),
                    _ => {
                        self.expect(Tok::LParen, &format!("'(' after {name}"))?;
                        let mut args = Vec::new();
                        if self.peek().tok != Tok::RParen {
                            loop {
                                args.push(self.expr()?);
                                if self.peek().tok == Tok::Comma {
                                    self.bump();
                                } else {
                                    break;
                                }
                            }
                        }
                        self.expect(Tok::RParen, "')' or ','")?;
                        Ok(Expr::Call(name.to_string(), args, t.start))
                    }
                }
            }
            _ => Err(ParseError::new(t.start, format!("expected an expression, found {}", self.describe(t)))),
        }
    }
}

/// Value of an expression that does not involve `z`.
fn constant(e: &Expr) -> Option<Complex64> {
    match e {
        Expr::Const(c) => Some(*c),
        Expr::Z | Expr::Call(..) => None,
        Expr::Neg(a) => constant(a).map(|c| -c),
        Expr::Bin(op, a, b, _) => {
            let (x, y) = (constant(a)?, constant(b)?);
            Some(match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x / y,
                BinOp::Pow => x.powc(y),
            })
        }
    }
}

fn const_arg(args: &[Expr], k: usize, pos: usize, name: &str) -> Result<Complex64, ParseError> {
    constant(&args[k]).ok_or_else(|| ParseError::new(pos, format!("argument {} of {name} must be a constant", k + 1)))
}

fn real_arg(args: &[Expr], k: usize, pos: usize, name: &str) -> Result<f64, ParseError> {
    let c = const_arg(args, k, pos, name)?;
    if c.im != 0.0 {
        return Err(ParseError::new(pos, format!("argument {} of {name} must be real", k + 1)));
    }
    Ok(c.re)
}

fn arity(args: &[Expr], n: usize, pos: usize, name: &str) -> Result<(), ParseError> {
    if args.len() != n {
        return Err(ParseError::new(pos, format!("{name} takes {n} argument(s), got {}", args.len())));
    }
    Ok(())
}

fn domain(pos: usize, e: schwlab_core::Error) -> ParseError {
    ParseError::new(pos, e.to_string())
}

fn build(e: &Expr) -> Result<AnalyticMap, ParseError> {
    if let Some(c) = constant(e) {
        return Ok(AnalyticMap::constant(c));
    }
    match e {
        Expr::Const(c) => Ok(AnalyticMap::constant(*c)),
        Expr::Z => Ok(AnalyticMap::identity()),
        Expr::Neg(a) => Ok(build(a)?.scale(Complex64::new(-1.0, 0.0))),
        Expr::Bin(op, a, b, pos) => {
            let (ca, cb) = (constant(a), constant(b));
            match op {
                BinOp::Add => Ok(build(a)? + build(b)?),
                BinOp::Sub => Ok(build(a)? - build(b)?),
                BinOp::Mul => match (ca, cb) {
                    (Some(c), _) => Ok(build(b)?.scale(c)),
                    (_, Some(c)) => Ok(build(a)?.scale(c)),
                    _ => Ok(build(a)? * build(b)?),
                },
                BinOp::Div => match cb {
                    Some(c) if c.norm() > 0.0 => Ok(build(a)?.scale(Complex64::new(1.0, 0.0) / c)),
                    Some(_) => Err(ParseError::new(*pos, "division by zero")),
                    None => Ok(build(a)?.div(&build(b)?)),
                },
                BinOp::Pow => {
                    let p = cb.filter(|c| c.im == 0.0).ok_or_else(|| ParseError::new(*pos, "exponent must be a real constant"))?;
                    pow(build(a)?, p.re)
                }
            }
        }
        Expr::Call(name, args, pos) => call(name, args, *pos),
    }
}

/// Non-negative integer powers are expanded into products so that no branch
/// cut is involved.
fn pow(base: AnalyticMap, p: f64) -> Result<AnalyticMap, ParseError> {
    if is_integer(p) && p >= 0.0 {
        let mut acc = AnalyticMap::constant(Complex64::new(1.0, 0.0));
        for _ in 0..p as u32 {
            acc = acc * base.clone();
        }
        Ok(acc)
    } else {
        Ok(base.powf(p))
    }
}

fn call(name: &str, args: &[Expr], pos: usize) -> Result<AnalyticMap, ParseError> {
    match name {
        "koebe" => {
            arity(args, 0, pos, name)?;
            Ok(AnalyticMap::koebe())
        }
        "lens" => {
            arity(args, 1, pos, name)?;
            AnalyticMap::lens(real_arg(args, 0, pos, name)?).map_err(|e| domain(pos, e))
        }
        "mobius" => {
            arity(args, 4, pos, name)?;
            let p = MobiusParams::new(
                const_arg(args, 0, pos, name)?,
                const_arg(args, 1, pos, name)?,
                const_arg(args, 2, pos, name)?,
                const_arg(args, 3, pos, name)?,
            );
            AnalyticMap::mobius(p).map_err(|e| domain(pos, e))
        }
        "automorphism" => {
            arity(args, 2, pos, name)?;
            AnalyticMap::disk_automorphism(const_arg(args, 0, pos, name)?, real_arg(args, 1, pos, name)?)
                .map_err(|e| domain(pos, e))
        }
        "exp" => {
            arity(args, 1, pos, name)?;
            Ok(build(&args[0])?.exp())
        }
        "log" => {
            arity(args, 1, pos, name)?;
            Ok(build(&args[0])?.ln())
        }
        "pow" => {
            arity(args, 2, pos, name)?;
            pow(build(&args[0])?, real_arg(args, 1, pos, name)?)
        }
        "compose" => {
            arity(args, 2, pos, name)?;
            Ok(build(&args[0])?.compose(&build(&args[1])?))
        }
        "scale" => {
            arity(args, 2, pos, name)?;
            Ok(build(&args[0])?.scale(const_arg(args, 1, pos, name)?))
        }
        _ => Err(ParseError::new(pos, format!("unknown function {name:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Directive {
    KoebeTransform(Complex64),
    Affine(Complex64),
    PrecomposeAutomorphism(Complex64, f64),
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Directive::KoebeTransform(z) => write!(f, "koebe_transform({z})"),
            Directive::Affine(e) => write!(f, "affine({e})"),
            Directive::PrecomposeAutomorphism(z, t) => write!(f, "precompose_automorphism({z}, {t})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Part {
    H,
    G,
    DG,
    W,
}

/// A parsed spec, ready to be turned into a [`HarmonicMap`].
#[derive(Debug, Clone)]
pub struct MapSpec {
    pub text: String,
    h: AnalyticMap,
    co: Option<(Part, AnalyticMap)>,
    directives: Vec<Directive>,
}

impl MapSpec {
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        let toks = lex(src)?;
        let mut p = Parser { src, toks, k: 0 };
        let mut h: Option<AnalyticMap> = None;
        let mut co: Option<(Part, AnalyticMap, usize)> = None;
        let mut directives = Vec::new();
        loop {
            while p.peek().tok == Tok::Sep {
                p.bump();
            }
            let t = p.peek();
            if t.tok == Tok::End {
                break;
            }
            let name_tok = p.expect(Tok::Ident, "'h', 'g', \"g'\", 'w' or a directive")?;
            let name = p.text(name_tok);
            match name {
                "koebe_transform" | "affine" | "precompose_automorphism" => {
                    p.expect(Tok::LParen, &format!("'(' after {name}"))?;
                    let mut args = Vec::new();
                    loop {
                        args.push(p.expr()?);
                        if p.peek().tok == Tok::Comma {
                            p.bump();
                        } else {
                            break;
                        }
                    }
                    p.expect(Tok::RParen, "')'")?;
                    let pos = name_tok.start;
                    directives.push(match name {
                        "koebe_transform" => {
                            arity(&args, 1, pos, name)?;
                            Directive::KoebeTransform(const_arg(&args, 0, pos, name)?)
                        }
                        "affine" => {
                            arity(&args, 1, pos, name)?;
                            Directive::Affine(const_arg(&args, 0, pos, name)?)
                        }
                        _ => {
                            arity(&args, 2, pos, name)?;
                            Directive::PrecomposeAutomorphism(const_arg(&args, 0, pos, name)?, real_arg(&args, 1, pos, name)?)
                        }
                    });
                }
                "h" | "g" | "w" | "omega" => {
                    let mut part = match name {
                        "h" => Part::H,
                        "g" => Part::G,
                        _ => Part::W,
                    };
                    if p.peek().tok == Tok::Prime {
                        let prime = p.bump();
                        if part != Part::G {
                            return Err(ParseError::new(prime.start, "only g may be primed"));
                        }
                        part = Part::DG;
                    }
                    p.expect(Tok::Eq, "'='")?;
                    let e = p.expr()?;
                    let map = build(&e)?;
                    if part == Part::H {
                        if h.is_some() {
                            return Err(ParseError::new(name_tok.start, "h is given twice"));
                        }
                        h = Some(map);
                    } else {
                        if let Some((_, _, first)) = co {
                            return Err(ParseError::new(
                                name_tok.start,
                                format!("only one of g, g', w may be given (first at column {})", first + 1),
                            ));
                        }
                        co = Some((part, map, name_tok.start));
                    }
                }
                _ => return Err(ParseError::new(name_tok.start, format!("unknown statement {name:?}"))),
            }
            let t = p.peek();
            if !matches!(t.tok, Tok::Sep | Tok::End) {
                return Err(ParseError::new(t.start, format!("expected ';' or end of input, found {}", p.describe(t))));
            }
        }
        let h = h.ok_or_else(|| ParseError::new(0, "missing h = ..."))?;
        Ok(Self {
            text: src.to_string(),
            h,
            co: co.map(|(p, m, _)| (p, m)),
            directives,
        })
    }

    pub fn harmonic(&self) -> Result<HarmonicMap, SpecError> {
        let mut f = match &self.co {
            None => HarmonicMap::analytic(self.h.clone()),
            Some((Part::G, g)) => HarmonicMap::new(self.h.clone(), g.clone()),
            Some((Part::DG, dg)) => HarmonicMap::from_co_analytic_derivative(self.h.clone(), dg.clone()),
            Some((_, w)) => HarmonicMap::from_dilatation(self.h.clone(), w.clone()),
        };
        for d in &self.directives {
            let out = match d {
                Directive::KoebeTransform(z) => f.koebe_transform(*z),
                Directive::Affine(e) => f.affine_transform(*e),
                Directive::PrecomposeAutomorphism(z, t) => {
                    AnalyticMap::disk_automorphism(*z, *t).map(|phi| f.precompose(&phi))
                }
            };
            f = out.map_err(|source| SpecError::Eval {
                directive: d.to_string(),
                source,
            })?;
        }
        Ok(f)
    }
}

/// Parse a spec and build its map.
pub fn parse_map(src: &str) -> Result<HarmonicMap, SpecError> {
    MapSpec::parse(src)?.harmonic()
}

/// Parse a constant complex literal such as `0.3-0.2i`.
pub fn parse_complex(src: &str) -> Result<Complex64, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { src, toks, k: 0 };
    let e = p.expr()?;
    let t = p.peek();
    if t.tok != Tok::End {
        return Err(ParseError::new(t.start, format!("unexpected {}", p.describe(t))));
    }
    constant(&e).ok_or_else(|| ParseError::new(0, "expected a constant"))
}
