//! Exact rational numbers with the `p/q` text form used by the CLI, model
//! files, and structured output. Exponents, energies, and exact-mode
//! coefficients are all [`Rat`].

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

pub type Rat = num_rational::BigRational;

/// Builds n/d from machine integers. Panics on d = 0.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Builds the integer rational n.
pub fn rati(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses "p" or "p/q" with optional sign; q must be a positive integer.
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    let bad = || Error::MalformedRational(s.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = match den {
        Some(d) => d.parse().map_err(|_| bad())?,
        None => BigInt::one(),
    };
    if d.is_zero() || d.is_negative() {
        return Err(bad());
    }
    Ok(Rat::new(n, d))
}

/// Renders "p" for integers, "p/q" otherwise.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact square root when the radicand is a perfect rational square.
pub fn rat_sqrt(r: &Rat) -> Option<Rat> {
    rat_nth_root(r, 2)
}

/// Exact g-th root when one exists over the rationals.
pub fn rat_nth_root(r: &Rat, g: u32) -> Option<Rat> {
    if g == 0 {
        return None;
    }
    if r.is_zero() {
        return Some(Rat::zero());
    }
    if r.is_negative() && g.is_multiple_of(2) {
        return None;
    }
    let root = |x: &BigInt| -> Option<BigInt> {
        let c = x.nth_root(g);
        (c.pow(g) == *x).then_some(c)
    };
    let sign = if r.is_negative() { -BigInt::one() } else { BigInt::one() };
    let n = root(&r.numer().abs())?;
    let d = root(r.denom())?;
    Some(Rat::new(sign * n, d))
}
