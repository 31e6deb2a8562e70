//! A small language for homogeneous CPWL functions:
//! sums of optionally scaled `max`/`min` terms over variables `x1..xn`.
//!
//! ```text
//! expr := ['+' | '-'] term {('+' | '-') term}
//! term := [rational '*'] atom
//! atom := 'max(' expr {',' expr} ')' | 'min(' expr {',' expr} ')'
//!       | 'x' digits | rational | '(' expr ')'
//! ```

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::divisor::{fit_support, SupportFunction};
use crate::error::{Error, Result};
use crate::exact_math::{primitive_of_rational, LatticeVector, Rational, RationalVector};
use crate::fan::{arrangement_fan, HyperplaneSource};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// Zero-based variable index: `x1` is `Var(0)`.
    Var(usize),
    Const(Rational),
    Neg(Box<Expr>),
    Sum(Vec<Expr>),
    Scale(Rational, Box<Expr>),
    Max(Vec<Expr>),
}

impl Expr {
    /// `min(args)` in its canonical form `-max(-args)`.
    pub fn min(args: Vec<Expr>) -> Expr {
        Expr::Neg(Box::new(Expr::Max(args.into_iter().map(|a| Expr::Neg(Box::new(a))).collect())))
    }

    pub fn eval(&self, x: &RationalVector) -> Rational {
        match self {
            Expr::Var(i) => x.coords()[*i].clone(),
            Expr::Const(c) => c.clone(),
            Expr::Neg(e) => -e.eval(x),
            Expr::Sum(ts) => ts.iter().map(|t| t.eval(x)).sum(),
            Expr::Scale(k, e) => k * e.eval(x),
            Expr::Max(args) => args.iter().map(|a| a.eval(x)).max().expect("max has arguments"),
        }
    }

    /// Constant term, or an error if some `max` argument carries one.
    fn constant(&self) -> Result<Rational> {
        Ok(match self {
            Expr::Var(_) => Rational::zero(),
            Expr::Const(c) => c.clone(),
            Expr::Neg(e) => -e.constant()?,
            Expr::Sum(ts) => ts.iter().map(Expr::constant).sum::<Result<Rational>>()?,
            Expr::Scale(k, e) => k * e.constant()?,
            Expr::Max(args) => {
                for a in args {
                    let c = a.constant()?;
                    if !c.is_zero() {
                        return Err(Error::NotHomogeneous(format!("max argument {a} has constant {c}")));
                    }
                }
                Rational::zero()
            }
        })
    }

    pub fn check_homogeneous(&self) -> Result<()> {
        let c = self.constant()?;
        if c.is_zero() {
            Ok(())
        } else {
            Err(Error::NotHomogeneous(format!("constant term {c}")))
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Var(i) => Some(*i),
            Expr::Const(_) => None,
            Expr::Neg(e) | Expr::Scale(_, e) => e.max_var(),
            Expr::Sum(ts) | Expr::Max(ts) => ts.iter().filter_map(Expr::max_var).max(),
        }
    }
}

fn fmt_rational(f: &mut fmt::Formatter<'_>, r: &Rational) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// Prints a form that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Const(c) if c.is_negative() => {
                // not produced by the parser; printed as an equivalent negation
                f.write_str("(-")?;
                fmt_rational(f, &-c.clone())?;
                f.write_str(")")
            }
            Expr::Const(c) => fmt_rational(f, c),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Sum(ts) => {
                f.write_str("(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
            Expr::Scale(k, e) => {
                f.write_str("(")?;
                fmt_rational(f, k)?;
                write!(f, "*{e})")
            }
            Expr::Max(args) => {
                f.write_str("max(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { offset: self.pos, message: message.into() })
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(d) if d == c => {
                self.pos += 1;
                Ok(())
            }
            Some(d) => self.error(format!("expected `{}`, found `{}`", c as char, d as char)),
            None => self.error(format!("expected `{}`, found end of input", c as char)),
        }
    }

    /// Parses an expression and returns it with the offset of the first
    /// term whose constant is nonzero.
    fn expr(&mut self) -> Result<(Expr, Option<usize>)> {
        let mut terms = Vec::new();
        let mut first_const = None;
        let mut sign = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        loop {
            self.skip_ws();
            let start = self.pos;
            let t = self.term()?;
            if first_const.is_none() && !t.constant()?.is_zero() {
                first_const = Some(start);
            }
            terms.push(if sign { Expr::Neg(Box::new(t)) } else { t });
            match self.peek() {
                Some(b'+') => sign = false,
                Some(b'-') => sign = true,
                _ => break,
            }
            self.pos += 1;
        }
        let e = if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Sum(terms) };
        Ok((e, first_const))
    }

    fn term(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            let r = self.rational()?;
            if self.peek() == Some(b'*') {
                self.pos += 1;
                let a = self.atom()?;
                return Ok(Expr::Scale(r, Box::new(a)));
            }
            return Ok(Expr::Const(r));
        }
        self.atom()
    }

    fn digits(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.error("expected digits");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn rational(&mut self) -> Result<Rational> {
        self.skip_ws();
        let n = self.digits()?;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            let at = self.pos;
            let d = self.digits()?;
            if d.is_zero() {
                return Err(Error::Parse { offset: at, message: "zero denominator".into() });
            }
            return Ok(Rational::new(n, d));
        }
        Ok(Rational::from_integer(n))
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn args(&mut self) -> Result<Vec<Expr>> {
        self.expect(b'(')?;
        let mut args = Vec::new();
        loop {
            self.skip_ws();
            let start = self.pos;
            let (a, _) = self.expr()?;
            let c = a.constant()?;
            if !c.is_zero() {
                return Err(Error::InhomogeneousConstant { value: c.to_string(), offset: start });
            }
            args.push(a);
            match self.peek() {
                Some(b',') => self.pos += 1,
                _ => break,
            }
        }
        self.expect(b')')?;
        Ok(args)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let (e, _) = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => Ok(Expr::Const(self.rational()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let name = self.ident();
                match name.as_str() {
                    "max" => Ok(Expr::Max(self.args()?)),
                    "min" => Ok(Expr::min(self.args()?)),
                    _ => {
                        let index = name
                            .strip_prefix('x')
                            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
                            .and_then(|d| d.parse::<usize>().ok())
                            .filter(|&i| i >= 1 && i <= self.dim);
                        match index {
                            Some(i) => Ok(Expr::Var(i - 1)),
                            None => Err(Error::UnknownVariable { name, offset: start }),
                        }
                    }
                }
            }
            Some(c) => self.error(format!("unexpected `{}`", c as char)),
            None => self.error("unexpected end of input"),
        }
    }
}

/// Parse an expression over `x1..x{dim}`.
pub fn parse_expression(text: &str, dim: usize) -> Result<Expr> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, dim };
    let (e, first_const) = p.expr()?;
    if p.peek().is_some() {
        return p.error("unexpected trailing input");
    }
    let c = e.constant()?;
    if !c.is_zero() {
        return Err(Error::InhomogeneousConstant { value: c.to_string(), offset: first_const.unwrap_or(0) });
    }
    Ok(e)
}

/// A covector when every argument of every `max` is linear.
fn as_linear(e: &Expr, dim: usize) -> Option<RationalVector> {
    match e {
        Expr::Var(i) => {
            let mut v = RationalVector::zero(dim).into_coords();
            v[*i] = Rational::from_integer(1.into());
            Some(RationalVector::new(v))
        }
        Expr::Const(_) => Some(RationalVector::zero(dim)),
        Expr::Neg(e) => as_linear(e, dim).map(|v| v.neg()),
        Expr::Scale(k, e) => as_linear(e, dim).map(|v| v.scale(k)),
        Expr::Sum(ts) => ts.iter().try_fold(RationalVector::zero(dim), |acc, t| as_linear(t, dim).map(|v| acc.add(&v))),
        Expr::Max(_) => None,
    }
}

/// Pairwise differences of linear arguments of every `max` node.
fn candidate_normals(e: &Expr, dim: usize, out: &mut Vec<LatticeVector>) {
    match e {
        Expr::Var(_) | Expr::Const(_) => {}
        Expr::Neg(e) | Expr::Scale(_, e) => candidate_normals(e, dim, out),
        Expr::Sum(ts) => ts.iter().for_each(|t| candidate_normals(t, dim, out)),
        Expr::Max(args) => {
            args.iter().for_each(|a| candidate_normals(a, dim, out));
            let lin: Vec<RationalVector> = args.iter().filter_map(|a| as_linear(a, dim)).collect();
            for i in 0..lin.len() {
                for j in i + 1..lin.len() {
                    push_normal(&lin[i].sub(&lin[j]), out);
                }
            }
        }
    }
}

fn push_normal(v: &RationalVector, out: &mut Vec<LatticeVector>) -> bool {
    match primitive_of_rational(v) {
        Ok(p) => {
            let p = p.sign_canonical();
            let fresh = !out.contains(&p);
            if fresh {
                out.push(p);
            }
            fresh
        }
        Err(_) => false,
    }
}

/// Linear form of `e` on the cone spanned by `rays`, or a functional whose
/// sign change inside the cone prevents linearity.
fn linearize(e: &Expr, rays: &[RationalVector], dim: usize) -> std::result::Result<RationalVector, RationalVector> {
    Ok(match e {
        Expr::Var(_) | Expr::Const(_) => as_linear(e, dim).unwrap(),
        Expr::Neg(e) => linearize(e, rays, dim)?.neg(),
        Expr::Scale(k, e) => linearize(e, rays, dim)?.scale(k),
        Expr::Sum(ts) => {
            let mut acc = RationalVector::zero(dim);
            for t in ts {
                acc = acc.add(&linearize(t, rays, dim)?);
            }
            acc
        }
        Expr::Max(args) => {
            let lin: Vec<RationalVector> =
                args.iter().map(|a| linearize(a, rays, dim)).collect::<std::result::Result<_, _>>()?;
            let dominates = |i: usize| lin.iter().all(|b| rays.iter().all(|r| lin[i].dot(r) >= b.dot(r)));
            if let Some(i) = (0..lin.len()).find(|&i| dominates(i)) {
                return Ok(lin[i].clone());
            }
            for i in 0..lin.len() {
                for j in i + 1..lin.len() {
                    let d = lin[i].sub(&lin[j]);
                    let pos = rays.iter().any(|r| d.dot(r).is_positive());
                    let neg = rays.iter().any(|r| d.dot(r).is_negative());
                    if pos && neg {
                        return Err(d);
                    }
                }
            }
            unreachable!("sign-consistent arguments always have a maximum")
        }
    })
}

/// Support function of a homogeneous expression on the arrangement of its
/// breakpoint hyperplanes.
pub fn compile_expression(e: &Expr, dim: usize) -> Result<SupportFunction> {
    e.check_homogeneous()?;
    if let Some(i) = e.max_var().filter(|&i| i >= dim) {
        return Err(Error::UnknownVariable { name: format!("x{}", i + 1), offset: 0 });
    }
    let mut normals = Vec::new();
    candidate_normals(e, dim, &mut normals);
    loop {
        let fan = arrangement_fan(&normals, dim, HyperplaneSource::MaxArguments)?;
        let mut added = false;
        for c in 0..fan.cones().len() {
            let rays: Vec<RationalVector> = fan.cone_rays(c).iter().map(|r| r.to_rational()).collect();
            if let Err(d) = linearize(e, &rays, dim) {
                added |= push_normal(&d, &mut normals);
            }
        }
        if !added {
            return fit_support(Arc::new(fan), |x| Ok(e.eval(x)));
        }
    }
}

/// Parse and compile in one step.
pub fn compile_str(text: &str, dim: usize) -> Result<SupportFunction> {
    compile_expression(&parse_expression(text, dim)?, dim)
}
