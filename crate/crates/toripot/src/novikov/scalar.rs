//! Coefficient scalars. A computation runs either in exact mode (arbitrary
//! precision rationals, exact zero tests) or in float mode (complex f64,
//! |x| <= eps counts as zero). Binary operations refuse to mix the two.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::error::Error;
use crate::rat::{fmt_rat, rat_nth_root, Rat};
use crate::Result;

/// Per-run scalar backend. Float mode records the zero tolerance it was
/// configured with; joining two float modes keeps the looser tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalarMode {
    Exact,
    Float { eps: f64 },
}

impl ScalarMode {
    pub const DEFAULT_EPS: f64 = 1e-9;

    pub fn float_default() -> ScalarMode {
        ScalarMode::Float { eps: Self::DEFAULT_EPS }
    }

    /// Combines the modes of two operands; mixing exact and float is an error.
    pub fn join(self, other: ScalarMode) -> Result<ScalarMode> {
        match (self, other) {
            (ScalarMode::Exact, ScalarMode::Exact) => Ok(ScalarMode::Exact),
            (ScalarMode::Float { eps: a }, ScalarMode::Float { eps: b }) => {
                Ok(ScalarMode::Float { eps: a.max(b) })
            }
            _ => Err(Error::ModeMismatch),
        }
    }

    pub fn eps(&self) -> f64 {
        match self {
            ScalarMode::Exact => 0.0,
            ScalarMode::Float { eps } => *eps,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ScalarMode::Exact)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Rat(Rat),
    Cx(Complex64),
}

impl Scalar {
    pub fn zero(mode: ScalarMode) -> Scalar {
        Scalar::from_rat(&Rat::zero(), mode)
    }

    pub fn one(mode: ScalarMode) -> Scalar {
        Scalar::from_rat(&crate::rat::rati(1), mode)
    }

    /// Embeds an exact rational into the requested backend.
    pub fn from_rat(r: &Rat, mode: ScalarMode) -> Scalar {
        match mode {
            ScalarMode::Exact => Scalar::Rat(r.clone()),
            ScalarMode::Float { .. } => Scalar::Cx(Complex64::new(rat_to_f64(r), 0.0)),
        }
    }

    pub fn mode_kind_matches(&self, mode: ScalarMode) -> bool {
        matches!(
            (self, mode),
            (Scalar::Rat(_), ScalarMode::Exact) | (Scalar::Cx(_), ScalarMode::Float { .. })
        )
    }

    pub fn is_zero(&self, mode: ScalarMode) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Cx(z) => z.norm() <= mode.eps(),
        }
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            Scalar::Rat(r) => Some(r),
            Scalar::Cx(_) => None,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Rat(r) => Complex64::new(rat_to_f64(r), 0.0),
            Scalar::Cx(z) => *z,
        }
    }

    pub fn add(&self, other: &Scalar) -> Result<Scalar> {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Ok(Scalar::Rat(a + b)),
            (Scalar::Cx(a), Scalar::Cx(b)) => Ok(Scalar::Cx(a + b)),
            _ => Err(Error::ModeMismatch),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Result<Scalar> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Result<Scalar> {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Ok(Scalar::Rat(a * b)),
            (Scalar::Cx(a), Scalar::Cx(b)) => Ok(Scalar::Cx(a * b)),
            _ => Err(Error::ModeMismatch),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rat(a) => Scalar::Rat(-a),
            Scalar::Cx(a) => Scalar::Cx(-a),
        }
    }

    pub fn inv(&self, mode: ScalarMode) -> Result<Scalar> {
        if self.is_zero(mode) {
            return Err(Error::DivisionByZero);
        }
        match self {
            Scalar::Rat(a) => Ok(Scalar::Rat(a.recip())),
            Scalar::Cx(a) => Ok(Scalar::Cx(a.inv())),
        }
    }

    /// Integer power, negative exponents through the inverse.
    pub fn pow_i(&self, k: i64, mode: ScalarMode) -> Result<Scalar> {
        if k == 0 {
            return Ok(Scalar::one(mode));
        }
        let base = if k < 0 { self.inv(mode)? } else { self.clone() };
        let mut acc = Scalar::one(mode);
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }

    /// A g-th root of the scalar, if the backend can represent one.
    /// Exact mode takes the rational root when it exists (preferring the
    /// positive sign); float mode takes the principal complex root.
    pub fn nth_root(&self, g: u32, mode: ScalarMode) -> Result<Scalar> {
        match self {
            Scalar::Rat(a) => rat_nth_root(a, g).map(Scalar::Rat).ok_or_else(|| {
                Error::NotRepresentable(format!(
                    "{} has no rational {g}-th root; rerun in float mode",
                    fmt_rat(a)
                ))
            }),
            Scalar::Cx(a) => {
                let _ = mode;
                Ok(Scalar::Cx(a.powf(1.0 / f64::from(g))))
            }
        }
    }

    /// Fixed total order used for deterministic sorting and multiset pairing:
    /// rationals by value, complex numbers lexicographically by (re, im).
    pub fn total_cmp(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => a.cmp(b),
            (Scalar::Cx(a), Scalar::Cx(b)) => {
                a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
            }
            (Scalar::Rat(_), Scalar::Cx(_)) => Ordering::Less,
            (Scalar::Cx(_), Scalar::Rat(_)) => Ordering::Greater,
        }
    }

    /// Equality within the mode's tolerance (exact equality in exact mode).
    pub fn approx_eq(&self, other: &Scalar, mode: ScalarMode) -> bool {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => a == b,
            (Scalar::Cx(a), Scalar::Cx(b)) => (a - b).norm() <= mode.eps(),
            _ => false,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => write!(f, "{}", fmt_rat(r)),
            Scalar::Cx(z) => {
                if z.im == 0.0 {
                    write!(f, "{}", z.re)
                } else {
                    write!(f, "({}{:+}i)", z.re, z.im)
                }
            }
        }
    }
}

pub(crate) fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rati};

    #[test]
    fn mode_join_rules() {
        assert_eq!(ScalarMode::Exact.join(ScalarMode::Exact).unwrap(), ScalarMode::Exact);
        let f1 = ScalarMode::Float { eps: 1e-9 };
        let f2 = ScalarMode::Float { eps: 1e-6 };
        assert_eq!(f1.join(f2).unwrap(), f2);
        assert!(matches!(ScalarMode::Exact.join(f1), Err(Error::ModeMismatch)));
    }

    #[test]
    fn exact_arithmetic() {
        let a = Scalar::Rat(rat(1, 2));
        let b = Scalar::Rat(rat(1, 3));
        assert_eq!(a.add(&b).unwrap(), Scalar::Rat(rat(5, 6)));
        assert_eq!(a.mul(&b).unwrap(), Scalar::Rat(rat(1, 6)));
        assert_eq!(a.inv(ScalarMode::Exact).unwrap(), Scalar::Rat(rati(2)));
        assert_eq!(a.pow_i(-2, ScalarMode::Exact).unwrap(), Scalar::Rat(rati(4)));
    }

    #[test]
    fn float_zero_tolerance() {
        let mode = ScalarMode::Float { eps: 1e-9 };
        let tiny = Scalar::Cx(Complex64::new(1e-12, 0.0));
        assert!(tiny.is_zero(mode));
        assert!(matches!(tiny.inv(mode), Err(Error::DivisionByZero)));
    }

    #[test]
    fn roots_by_mode() {
        let exact = Scalar::Rat(rat(9, 4)).nth_root(2, ScalarMode::Exact).unwrap();
        assert_eq!(exact, Scalar::Rat(rat(3, 2)));
        assert!(matches!(
            Scalar::Rat(rati(2)).nth_root(2, ScalarMode::Exact),
            Err(Error::NotRepresentable(_))
        ));
        let mode = ScalarMode::float_default();
        let f = Scalar::Cx(Complex64::new(2.0, 0.0)).nth_root(2, mode).unwrap();
        assert!(f.mul(&f).unwrap().approx_eq(&Scalar::Cx(Complex64::new(2.0, 0.0)), mode));
    }
}
