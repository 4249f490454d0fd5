//! Rational-affine expressions in the named parameters u1, u2, alpha, rho.
//! These carry facet offsets and term energies symbolically until a model
//! binds its parameters, after which only u1 and u2 may remain free.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::rat::{fmt_rat, Rat};
use crate::Result;

/// The four recognized parameter names, in display order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    U1,
    U2,
    Alpha,
    Rho,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::U1, Var::U2, Var::Alpha, Var::Rho];

    pub fn name(self) -> &'static str {
        match self {
            Var::U1 => "u1",
            Var::U2 => "u2",
            Var::Alpha => "alpha",
            Var::Rho => "rho",
        }
    }

    pub fn parse(name: &str) -> Result<Var> {
        match name {
            "u1" => Ok(Var::U1),
            "u2" => Ok(Var::U2),
            "alpha" => Ok(Var::Alpha),
            "rho" => Ok(Var::Rho),
            other => Err(Error::Model(format!(
                "unknown parameter {other:?} (expected u1, u2, alpha, or rho)"
            ))),
        }
    }

    /// Parameters a model may bind to rational values (the fiber coordinates
    /// u1, u2 always stay free).
    pub fn is_bindable(self) -> bool {
        matches!(self, Var::Alpha | Var::Rho)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// constant + sum of coeff * var, all coefficients exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct AffineExpr {
    constant: Rat,
    coeffs: BTreeMap<Var, Rat>,
}

impl AffineExpr {
    pub fn constant(c: Rat) -> AffineExpr {
        AffineExpr { constant: c, coeffs: BTreeMap::new() }
    }

    pub fn zero() -> AffineExpr {
        AffineExpr::constant(Rat::zero())
    }

    pub fn var(v: Var) -> AffineExpr {
        AffineExpr::term(Rat::one(), v)
    }

    pub fn term(coeff: Rat, v: Var) -> AffineExpr {
        let mut e = AffineExpr::zero();
        e.add_term(&coeff, v);
        e
    }

    fn add_term(&mut self, coeff: &Rat, v: Var) {
        let slot = self.coeffs.entry(v).or_insert_with(Rat::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.coeffs.remove(&v);
        }
    }

    pub fn constant_part(&self) -> &Rat {
        &self.constant
    }

    pub fn coeff(&self, v: Var) -> Rat {
        self.coeffs.get(&v).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn add(&self, other: &AffineExpr) -> AffineExpr {
        let mut out = self.clone();
        out.constant += &other.constant;
        for (v, c) in &other.coeffs {
            out.add_term(c, *v);
        }
        out
    }

    pub fn sub(&self, other: &AffineExpr) -> AffineExpr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> AffineExpr {
        self.scale(&-Rat::one())
    }

    pub fn scale(&self, r: &Rat) -> AffineExpr {
        if r.is_zero() {
            return AffineExpr::zero();
        }
        AffineExpr {
            constant: &self.constant * r,
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, c * r)).collect(),
        }
    }

    pub fn add_const(&self, r: &Rat) -> AffineExpr {
        let mut out = self.clone();
        out.constant += r;
        out
    }

    /// Substitutes the given parameter values, folding them into the constant;
    /// variables absent from the map stay symbolic.
    pub fn bind(&self, values: &BTreeMap<Var, Rat>) -> AffineExpr {
        let mut out = AffineExpr::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            match values.get(v) {
                Some(r) => out.constant += c * r,
                None => out.add_term(c, *v),
            }
        }
        out
    }

    /// Full evaluation; every variable still present must be in the map.
    pub fn eval(&self, values: &BTreeMap<Var, Rat>) -> Result<Rat> {
        let bound = self.bind(values);
        match bound.coeffs.keys().next() {
            None => Ok(bound.constant),
            Some(v) => Err(Error::Model(format!("unbound parameter {v}"))),
        }
    }

    /// Evaluation at a fiber point (u1, u2); alpha/rho must already be bound.
    pub fn eval_u(&self, u: &[Rat]) -> Result<Rat> {
        let mut values = BTreeMap::new();
        if let Some(u1) = u.first() {
            values.insert(Var::U1, u1.clone());
        }
        if let Some(u2) = u.get(1) {
            values.insert(Var::U2, u2.clone());
        }
        self.eval(&values)
    }

    /// Parses the grammar: optional sign, then terms joined by + or -, each
    /// term a rational constant, a parameter name, or rational * parameter
    /// (the * may be omitted).
    pub fn parse(text: &str) -> Result<AffineExpr> {
        let tokens = tokenize(text)?;
        let mut pos = 0;
        let mut out = AffineExpr::zero();
        let mut first = true;
        while pos < tokens.len() {
            let sign = match &tokens[pos] {
                Token::Plus => {
                    pos += 1;
                    Rat::one()
                }
                Token::Minus => {
                    pos += 1;
                    -Rat::one()
                }
                _ if first => Rat::one(),
                t => {
                    return Err(Error::Model(format!(
                        "expected + or - before {t} in {text:?}"
                    )))
                }
            };
            first = false;
            match tokens.get(pos) {
                Some(Token::Number(r)) => {
                    pos += 1;
                    let coeff = &sign * r;
                    if matches!(tokens.get(pos), Some(Token::Star)) {
                        pos += 1;
                        match tokens.get(pos) {
                            Some(Token::Ident(v)) => {
                                pos += 1;
                                out.add_term(&coeff, *v);
                            }
                            _ => {
                                return Err(Error::Model(format!(
                                    "expected a parameter after * in {text:?}"
                                )))
                            }
                        }
                    } else if let Some(Token::Ident(v)) = tokens.get(pos) {
                        pos += 1;
                        out.add_term(&coeff, *v);
                    } else {
                        out.constant += coeff;
                    }
                }
                Some(Token::Ident(v)) => {
                    pos += 1;
                    out.add_term(&sign, *v);
                }
                Some(t) => {
                    return Err(Error::Model(format!("unexpected {t} in {text:?}")))
                }
                None => {
                    return Err(Error::Model(format!(
                        "dangling sign at the end of {text:?}"
                    )))
                }
            }
        }
        if text.trim().is_empty() {
            return Err(Error::Model("empty expression".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for AffineExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        if !self.constant.is_zero() || self.coeffs.is_empty() {
            write!(f, "{}", fmt_rat(&self.constant))?;
            wrote = true;
        }
        for (v, c) in &self.coeffs {
            let (sign, mag) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if wrote {
                write!(f, " {sign} ")?;
            } else if sign == "-" {
                write!(f, "-")?;
            }
            wrote = true;
            if mag.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{}*{v}", fmt_rat(&mag))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, PartialEq)]
enum Token {
    Number(Rat),
    Ident(Var),
    Plus,
    Minus,
    Star,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Number(r) => write!(f, "number {}", fmt_rat(r)),
            Token::Ident(v) => write!(f, "parameter {v}"),
            Token::Plus => write!(f, "'+'"),
            Token::Minus => write!(f, "'-'"),
            Token::Star => write!(f, "'*'"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'/' {
                    i += 1;
                    let denom_start = i;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                    if i == denom_start {
                        return Err(Error::MalformedRational(text[start..i].to_string()));
                    }
                }
                out.push(Token::Number(crate::rat::parse_rat(&text[start..i])?));
            }
            'a'..='z' | 'A'..='Z' => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push(Token::Ident(Var::parse(&text[start..i])?));
            }
            other => {
                return Err(Error::Model(format!(
                    "unexpected character {other:?} in expression {text:?}"
                )))
            }
        }
    }
    Ok(out)
}
