//! Truncated series sum_i a_i T^(l_i) with strictly increasing rational
//! exponents l_i and an explicit cutoff E: the element is only known modulo
//! T^E, and every stored exponent is strictly below E.
//!
//! Binary operations join the operands' scalar modes (mixing is an error) and
//! propagate cutoffs honestly: addition keeps min(E_x, E_y); multiplication
//! keeps min(E_x + val(y), E_y + val(x)), which always preserves the leading
//! product term, so valuations stay additive. Iterating callers truncate to
//! their working cutoff explicitly.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::scalar::{Scalar, ScalarMode};
use crate::error::Error;
use crate::rat::{fmt_rat, parse_rat, rati, Rat};
use crate::Result;

/// T-adic valuation: the smallest exponent, or Infinite for the zero series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Valuation {
    Finite(Rat),
    Infinite,
}

impl Valuation {
    pub fn at_least(&self, bound: &Rat) -> bool {
        match self {
            Valuation::Finite(v) => v >= bound,
            Valuation::Infinite => true,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Valuation::Finite(v) => v.is_positive(),
            Valuation::Infinite => true,
        }
    }

    pub fn finite(&self) -> Option<&Rat> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{}", fmt_rat(v)),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesRepr", into = "SeriesRepr")]
pub struct NovikovSeries {
    mode: ScalarMode,
    cutoff: Rat,
    terms: Vec<(Rat, Scalar)>,
}

impl NovikovSeries {
    pub fn zero(mode: ScalarMode, cutoff: Rat) -> NovikovSeries {
        NovikovSeries { mode, cutoff, terms: Vec::new() }
    }

    pub fn one(mode: ScalarMode, cutoff: Rat) -> NovikovSeries {
        NovikovSeries::constant(Scalar::one(mode), mode, cutoff)
    }

    pub fn constant(c: Scalar, mode: ScalarMode, cutoff: Rat) -> NovikovSeries {
        NovikovSeries::from_terms(mode, cutoff, vec![(Rat::zero(), c)])
    }

    pub fn monomial(exp: Rat, c: Scalar, mode: ScalarMode, cutoff: Rat) -> NovikovSeries {
        NovikovSeries::from_terms(mode, cutoff, vec![(exp, c)])
    }

    /// Normalizing constructor: sorts, merges equal exponents, drops zero
    /// coefficients and anything at or above the cutoff.
    pub fn from_terms(
        mode: ScalarMode,
        cutoff: Rat,
        terms: Vec<(Rat, Scalar)>,
    ) -> NovikovSeries {
        let mut map: BTreeMap<Rat, Scalar> = BTreeMap::new();
        for (e, c) in terms {
            debug_assert!(c.mode_kind_matches(mode), "coefficient backend does not match mode");
            match map.entry(e) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert(c);
                }
                std::collections::btree_map::Entry::Occupied(mut slot) => {
                    let sum = slot.get().add(&c).expect("same mode by construction");
                    *slot.get_mut() = sum;
                }
            }
        }
        let terms = map
            .into_iter()
            .filter(|(e, c)| *e < cutoff && !c.is_zero(mode))
            .collect();
        NovikovSeries { mode, cutoff, terms }
    }

    /// Convenience constructor from rational (exponent, coefficient) pairs.
    pub fn from_rat_terms(mode: ScalarMode, cutoff: Rat, pairs: &[(Rat, Rat)]) -> NovikovSeries {
        let terms = pairs
            .iter()
            .map(|(e, c)| (e.clone(), Scalar::from_rat(c, mode)))
            .collect();
        NovikovSeries::from_terms(mode, cutoff, terms)
    }

    pub fn mode(&self) -> ScalarMode {
        self.mode
    }

    pub fn cutoff(&self) -> &Rat {
        &self.cutoff
    }

    pub fn terms(&self) -> &[(Rat, Scalar)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn valuation(&self) -> Valuation {
        match self.terms.first() {
            Some((e, _)) => Valuation::Finite(e.clone()),
            None => Valuation::Infinite,
        }
    }

    /// Valuation with the zero series counted at its cutoff (a zero series of
    /// cutoff E stands for "some element of valuation >= E").
    fn effective_valuation(&self) -> Rat {
        match self.terms.first() {
            Some((e, _)) => e.clone(),
            None => self.cutoff.clone(),
        }
    }

    pub fn leading(&self) -> Option<(&Rat, &Scalar)> {
        self.terms.first().map(|(e, c)| (e, c))
    }

    /// Coefficient at an exact exponent, zero if absent.
    pub fn coefficient_at(&self, exp: &Rat) -> Scalar {
        match self.terms.binary_search_by(|(e, _)| e.cmp(exp)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => Scalar::zero(self.mode),
        }
    }

    /// Restricts knowledge to exponents below `e` (cutoff can only shrink).
    pub fn truncate(&self, e: &Rat) -> NovikovSeries {
        if *e >= self.cutoff {
            return self.clone();
        }
        let terms = self.terms.iter().filter(|(x, _)| x < e).cloned().collect();
        NovikovSeries { mode: self.mode, cutoff: e.clone(), terms }
    }

    pub fn neg(&self) -> NovikovSeries {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect();
        NovikovSeries { mode: self.mode, cutoff: self.cutoff.clone(), terms }
    }

    pub fn add(&self, other: &NovikovSeries) -> Result<NovikovSeries> {
        let mode = self.mode.join(other.mode)?;
        let cutoff = self.cutoff.clone().min(other.cutoff.clone());
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        terms.extend(self.terms.iter().cloned());
        terms.extend(other.terms.iter().cloned());
        Ok(NovikovSeries::from_terms(mode, cutoff, terms))
    }

    pub fn sub(&self, other: &NovikovSeries) -> Result<NovikovSeries> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &NovikovSeries) -> Result<NovikovSeries> {
        let mode = self.mode.join(other.mode)?;
        let cutoff = (self.cutoff.clone() + other.effective_valuation())
            .min(other.cutoff.clone() + self.effective_valuation());
        let mut map: BTreeMap<Rat, Scalar> = BTreeMap::new();
        for (ex, cx) in &self.terms {
            for (ey, cy) in &other.terms {
                let e = ex + ey;
                if e >= cutoff {
                    continue;
                }
                let p = cx.mul(cy)?;
                match map.entry(e) {
                    std::collections::btree_map::Entry::Vacant(slot) => {
                        slot.insert(p);
                    }
                    std::collections::btree_map::Entry::Occupied(mut slot) => {
                        let sum = slot.get().add(&p)?;
                        *slot.get_mut() = sum;
                    }
                }
            }
        }
        let terms = map.into_iter().filter(|(_, c)| !c.is_zero(mode)).collect();
        Ok(NovikovSeries { mode, cutoff, terms })
    }

    /// Multiplies by the monomial c*T^exp (shifts exponents and cutoff).
    pub fn mul_monomial(&self, exp: &Rat, c: &Scalar) -> NovikovSeries {
        let cutoff = self.cutoff.clone() + exp;
        if c.is_zero(self.mode) {
            return NovikovSeries::zero(self.mode, cutoff);
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, x)| (e + exp, x.mul(c).expect("same mode")))
            .filter(|(_, x)| !x.is_zero(self.mode))
            .collect();
        NovikovSeries { mode: self.mode, cutoff, terms }
    }

    pub fn mul_rat(&self, r: &Rat) -> NovikovSeries {
        self.mul_monomial(&Rat::zero(), &Scalar::from_rat(r, self.mode))
    }

    /// Integer power, valid modulo `e`; negative exponents go through invert.
    pub fn pow_i(&self, k: i64, e: &Rat) -> Result<NovikovSeries> {
        if k == 0 {
            return Ok(NovikovSeries::one(self.mode, e.clone()));
        }
        let base = if k < 0 { self.invert(e)? } else { self.truncate(e) };
        let mut acc: Option<NovikovSeries> = None;
        let mut sq = base;
        let mut n = k.unsigned_abs();
        loop {
            if n & 1 == 1 {
                acc = Some(match acc {
                    None => sq.clone(),
                    Some(a) => a.mul(&sq)?.truncate(e),
                });
            }
            n >>= 1;
            if n == 0 {
                break;
            }
            sq = sq.mul(&sq)?.truncate(e);
        }
        Ok(acc.expect("k != 0"))
    }

    /// Multiplicative inverse modulo min(e, E_x - 2*val(x)), by Newton
    /// iteration with doubling precision.
    pub fn invert(&self, e: &Rat) -> Result<NovikovSeries> {
        let (lam, lead) = match self.leading() {
            Some((l, c)) => (l.clone(), c.clone()),
            None => return Err(Error::DivisionByZero),
        };
        let target = e.clone().min(self.cutoff.clone() - rati(2) * &lam);
        // u = x / (lead*T^lam) = 1 + z with val(z) > 0, known mod E_x - lam.
        let u = self.mul_monomial(&-lam.clone(), &lead.inv(self.mode)?);
        // Precision needed on u^-1 so the final shift lands on `target`.
        let prec = target.clone() + &lam;
        let one = NovikovSeries::one(self.mode, prec.clone());
        let mut w = one.clone();
        for _ in 0..64 {
            let r = one.sub(&u.mul(&w)?.truncate(&prec))?;
            if r.is_zero() {
                break;
            }
            w = w.add(&w.mul(&r)?)?.truncate(&prec);
        }
        Ok(w.mul_monomial(&-lam, &lead.inv(self.mode)?))
    }

    /// Square root with an explicit branch choice for the leading coefficient.
    pub fn sqrt(&self, branch: &Scalar, e: &Rat) -> Result<NovikovSeries> {
        self.nth_root(2, branch, e)
    }

    /// g-th root: the branch scalar must satisfy branch^g = leading
    /// coefficient. In exact mode a leading coefficient with no rational g-th
    /// root at all is NotRepresentable; a representable one with a wrong
    /// branch is a BranchMismatch.
    pub fn nth_root(&self, g: u32, branch: &Scalar, e: &Rat) -> Result<NovikovSeries> {
        if g == 0 {
            return Err(Error::Domain("0-th root".into()));
        }
        let gq = rati(i64::from(g));
        let (lam, lead) = match self.leading() {
            Some((l, c)) => (l.clone(), c.clone()),
            None => {
                // A zero series mod E_x has g-th roots of valuation >= E_x/g.
                let cut = e.clone().min(self.cutoff.clone() / &gq);
                return Ok(NovikovSeries::zero(self.mode, cut));
            }
        };
        if self.mode.is_exact() {
            // Representability check independent of the chosen branch.
            lead.nth_root(g, self.mode)?;
        }
        if !branch.pow_i(i64::from(g), self.mode)?.approx_eq(&lead, self.mode) {
            return Err(Error::BranchMismatch {
                branch: branch.to_string(),
                leading: lead.to_string(),
            });
        }
        let root_shift = lam.clone() / &gq;
        let target = e
            .clone()
            .min(self.cutoff.clone() - &lam + &root_shift);
        // (1+z)^(1/g) as a binomial series, needed mod target - lam/g.
        let u = self.mul_monomial(&-lam.clone(), &lead.inv(self.mode)?);
        let z = u.sub(&NovikovSeries::one(self.mode, u.cutoff().clone()))?;
        let prec = target.clone() - &root_shift;
        let mut acc = NovikovSeries::one(self.mode, prec.clone());
        if let Valuation::Finite(vz) = z.valuation() {
            let mut pow = NovikovSeries::one(self.mode, prec.clone());
            let mut coef = Rat::one();
            let ginv = gq.recip();
            let mut k: i64 = 0;
            let mut reach = Rat::zero();
            while reach < prec {
                k += 1;
                // C(1/g, k) = C(1/g, k-1) * (1/g - (k-1)) / k
                coef *= (ginv.clone() - rati(k - 1)) / rati(k);
                pow = pow.mul(&z)?.truncate(&prec);
                let term = pow.mul_rat(&coef);
                acc = acc.add(&term)?;
                reach = &vz * rati(k + 1);
            }
        }
        Ok(acc.mul_monomial(&root_shift, branch))
    }

    /// exp of a series of strictly positive valuation, modulo min(e, E_z).
    pub fn exp(&self, e: &Rat) -> Result<NovikovSeries> {
        if !self.valuation().is_positive() {
            return Err(Error::Domain(
                "exp needs a series of strictly positive valuation".into(),
            ));
        }
        let target = e.clone().min(self.cutoff.clone());
        let mut acc = NovikovSeries::one(self.mode, target.clone());
        if let Valuation::Finite(vz) = self.valuation() {
            let mut pow = NovikovSeries::one(self.mode, target.clone());
            let mut kfact = Rat::one();
            let mut k: i64 = 0;
            let mut reach = Rat::zero();
            while reach < target {
                k += 1;
                kfact *= rati(k);
                pow = pow.mul(self)?.truncate(&target);
                acc = acc.add(&pow.mul_rat(&kfact.recip()))?;
                reach = &vz * rati(k + 1);
            }
        }
        Ok(acc)
    }

    /// Structural equality after truncating both sides to a common cutoff.
    pub fn eq_mod(&self, other: &NovikovSeries, e: &Rat) -> bool {
        let a = self.truncate(e);
        let b = other.truncate(e);
        a.terms == b.terms
    }

    /// Mode-aware comparison modulo `e` (float mode compares within eps).
    pub fn approx_eq_mod(&self, other: &NovikovSeries, e: &Rat) -> bool {
        let Ok(mode) = self.mode.join(other.mode) else {
            return false;
        };
        let a = self.truncate(e);
        let b = other.truncate(e);
        if a.terms.len() != b.terms.len() {
            return false;
        }
        a.terms
            .iter()
            .zip(&b.terms)
            .all(|((ea, ca), (eb, cb))| ea == eb && ca.approx_eq(cb, mode))
    }

    /// Deterministic total order: compare coefficients exponent by exponent
    /// (missing = 0) under the fixed scalar order; ties fall through to the
    /// cutoff. Sorting critical values with this realizes "by valuation, then
    /// leading coefficient, then next order" pairing.
    pub fn lex_cmp(&self, other: &NovikovSeries) -> Ordering {
        let mut i = 0;
        let mut j = 0;
        let zero_a = Scalar::zero(self.mode);
        let zero_b = Scalar::zero(other.mode);
        while i < self.terms.len() || j < other.terms.len() {
            let ea = self.terms.get(i).map(|(e, _)| e);
            let eb = other.terms.get(j).map(|(e, _)| e);
            let (ca, cb) = match (ea, eb) {
                (Some(a), Some(b)) => match a.cmp(b) {
                    Ordering::Less => {
                        let c = (&self.terms[i].1, &zero_b);
                        i += 1;
                        c
                    }
                    Ordering::Greater => {
                        let c = (&zero_a, &other.terms[j].1);
                        j += 1;
                        c
                    }
                    Ordering::Equal => {
                        let c = (&self.terms[i].1, &other.terms[j].1);
                        i += 1;
                        j += 1;
                        c
                    }
                },
                (Some(_), None) => {
                    let c = (&self.terms[i].1, &zero_b);
                    i += 1;
                    c
                }
                (None, Some(_)) => {
                    let c = (&zero_a, &other.terms[j].1);
                    j += 1;
                    c
                }
                (None, None) => break,
            };
            let ord = ca.total_cmp(cb);
            if ord != Ordering::Equal {
                return ord;
            }
        }
        self.cutoff.cmp(&other.cutoff)
    }
}

impl fmt::Display for NovikovSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        } else {
            for (i, (e, c)) in self.terms.iter().enumerate() {
                let (sign, mag) = match c {
                    Scalar::Rat(r) if r.is_negative() => ("-", Scalar::Rat(-r)),
                    other => ("+", other.clone()),
                };
                if i == 0 {
                    if sign == "-" {
                        write!(f, "-")?;
                    }
                } else {
                    write!(f, " {sign} ")?;
                }
                let is_one = matches!(&mag, Scalar::Rat(r) if r.is_one());
                if e.is_zero() {
                    write!(f, "{mag}")?;
                } else if is_one {
                    write!(f, "T^({})", fmt_rat(e))?;
                } else {
                    write!(f, "{mag}*T^({})", fmt_rat(e))?;
                }
            }
        }
        write!(f, " + O(T^({}))", fmt_rat(&self.cutoff))
    }
}

/// Wire form used by structured CLI output: exponents and exact coefficients
/// as "p/q" strings, float coefficients as [re, im] pairs.
#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    mode: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    eps: Option<f64>,
    cutoff: String,
    terms: Vec<(String, CoeffRepr)>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CoeffRepr {
    Rat(String),
    Cx([f64; 2]),
}

impl From<NovikovSeries> for SeriesRepr {
    fn from(s: NovikovSeries) -> SeriesRepr {
        let (mode, eps) = match s.mode {
            ScalarMode::Exact => ("exact".to_string(), None),
            ScalarMode::Float { eps } => ("float".to_string(), Some(eps)),
        };
        let terms = s
            .terms
            .iter()
            .map(|(e, c)| {
                let coeff = match c {
                    Scalar::Rat(r) => CoeffRepr::Rat(fmt_rat(r)),
                    Scalar::Cx(z) => CoeffRepr::Cx([z.re, z.im]),
                };
                (fmt_rat(e), coeff)
            })
            .collect();
        SeriesRepr { mode, eps, cutoff: fmt_rat(&s.cutoff), terms }
    }
}

impl TryFrom<SeriesRepr> for NovikovSeries {
    type Error = Error;

    fn try_from(r: SeriesRepr) -> Result<NovikovSeries> {
        let mode = match r.mode.as_str() {
            "exact" => ScalarMode::Exact,
            "float" => ScalarMode::Float { eps: r.eps.unwrap_or(ScalarMode::DEFAULT_EPS) },
            other => return Err(Error::Model(format!("unknown scalar mode {other:?}"))),
        };
        let cutoff = parse_rat(&r.cutoff)?;
        let mut terms = Vec::with_capacity(r.terms.len());
        for (e, c) in r.terms {
            let exp = parse_rat(&e)?;
            let coeff = match (c, mode) {
                (CoeffRepr::Rat(s), ScalarMode::Exact) => Scalar::Rat(parse_rat(&s)?),
                (CoeffRepr::Cx(z), ScalarMode::Float { .. }) => {
                    Scalar::Cx(num_complex::Complex64::new(z[0], z[1]))
                }
                _ => return Err(Error::ModeMismatch),
            };
            terms.push((exp, coeff));
        }
        Ok(NovikovSeries::from_terms(mode, cutoff, terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    const X: ScalarMode = ScalarMode::Exact;

    fn s(cutoff: Rat, pairs: &[(Rat, Rat)]) -> NovikovSeries {
        NovikovSeries::from_rat_terms(X, cutoff, pairs)
    }

    #[test]
    fn valuation_basics() {
        let x = s(rati(2), &[(rat(1, 2), rati(2)), (rati(1), rati(1))]);
        assert_eq!(x.valuation(), Valuation::Finite(rat(1, 2)));
        assert_eq!(NovikovSeries::zero(X, rati(2)).valuation(), Valuation::Infinite);
        assert!(Valuation::Infinite > Valuation::Finite(rati(1_000_000)));
    }

    #[test]
    fn add_merges_and_truncates() {
        let x = s(rati(2), &[(Rat::zero(), rati(1)), (rati(1), rati(3))]);
        let y = s(rat(3, 2), &[(rati(1), rati(-3)), (rat(5, 4), rati(7))]);
        let z = x.add(&y).unwrap();
        assert_eq!(z.cutoff(), &rat(3, 2));
        assert_eq!(z, s(rat(3, 2), &[(Rat::zero(), rati(1)), (rat(5, 4), rati(7))]));
    }

    #[test]
    fn mul_square_binomial() {
        // (1 + T^(1/4))^2 = 1 + 2 T^(1/4) + T^(1/2)
        let x = s(rati(2), &[(Rat::zero(), rati(1)), (rat(1, 4), rati(1))]);
        let sq = x.mul(&x).unwrap();
        assert_eq!(
            sq,
            s(rati(2), &[(Rat::zero(), rati(1)), (rat(1, 4), rati(2)), (rat(1, 2), rati(1))])
        );
    }

    #[test]
    fn mul_cutoff_preserves_leading_product_term() {
        // x = T^2 known mod T^4: x*x = T^4 must survive, known mod T^6.
        let x = s(rati(4), &[(rati(2), rati(1))]);
        let p = x.mul(&x).unwrap();
        assert_eq!(p.cutoff(), &rati(6));
        assert_eq!(p.valuation(), Valuation::Finite(rati(4)));
    }

    #[test]
    fn geometric_cancellation() {
        // (1 - T)(1 + T + T^2 + T^3) = 1 mod T^4
        let a = s(rati(4), &[(Rat::zero(), rati(1)), (rati(1), rati(-1))]);
        let b = s(
            rati(4),
            &[
                (Rat::zero(), rati(1)),
                (rati(1), rati(1)),
                (rati(2), rati(1)),
                (rati(3), rati(1)),
            ],
        );
        let p = a.mul(&b).unwrap();
        assert_eq!(p, s(rati(4), &[(Rat::zero(), rati(1))]));
    }

    #[test]
    fn mode_mixing_is_an_error() {
        let x = s(rati(2), &[(Rat::zero(), rati(1))]);
        let y = NovikovSeries::one(ScalarMode::float_default(), rati(2));
        assert!(matches!(x.add(&y), Err(Error::ModeMismatch)));
        assert!(matches!(x.mul(&y), Err(Error::ModeMismatch)));
    }

    #[test]
    fn invert_unit() {
        // (1 + T^(1/2))^-1 = 1 - T^(1/2) + T mod T^(3/2)
        let x = s(rat(3, 2), &[(Rat::zero(), rati(1)), (rat(1, 2), rati(1))]);
        let inv = x.invert(&rat(3, 2)).unwrap();
        assert_eq!(
            inv,
            s(
                rat(3, 2),
                &[(Rat::zero(), rati(1)), (rat(1, 2), rati(-1)), (rati(1), rati(1))]
            )
        );
        assert!(x.mul(&inv).unwrap().eq_mod(&NovikovSeries::one(X, rat(3, 2)), &rat(3, 2)));
    }

    #[test]
    fn invert_shifts_and_shrinks_cutoff() {
        // x = 2T^(1/2)(1 + T^(1/4)) mod T^(3/2): 1/x is only known mod T^(1/2).
        let x = s(rat(3, 2), &[(rat(1, 2), rati(2)), (rat(3, 4), rati(2))]);
        let inv = x.invert(&rati(1)).unwrap();
        assert_eq!(inv.cutoff(), &rat(1, 2));
        assert_eq!(
            inv,
            s(
                rat(1, 2),
                &[
                    (rat(-1, 2), rat(1, 2)),
                    (rat(-1, 4), rat(-1, 2)),
                    (Rat::zero(), rat(1, 2)),
                    (rat(1, 4), rat(-1, 2)),
                ]
            )
        );
    }

    #[test]
    fn invert_zero_fails() {
        let z = NovikovSeries::zero(X, rati(2));
        assert!(matches!(z.invert(&rati(2)), Err(Error::DivisionByZero)));
    }

    #[test]
    fn sqrt_perfect_square() {
        // sqrt(1 + 2T^(1/4) + T^(1/2)) = 1 + T^(1/4), both branches.
        let x = s(
            rati(2),
            &[(Rat::zero(), rati(1)), (rat(1, 4), rati(2)), (rat(1, 2), rati(1))],
        );
        let r = x.sqrt(&Scalar::Rat(rati(1)), &rati(2)).unwrap();
        assert_eq!(r, s(rati(2), &[(Rat::zero(), rati(1)), (rat(1, 4), rati(1))]));
        let n = x.sqrt(&Scalar::Rat(rati(-1)), &rati(2)).unwrap();
        assert_eq!(n, r.neg());
    }

    #[test]
    fn sqrt_binomial_tail() {
        // sqrt(1 + T) = 1 + T/2 - T^2/8 mod T^2... exponents below 2.
        let x = s(rati(2), &[(Rat::zero(), rati(1)), (rati(1), rati(1))]);
        let r = x.sqrt(&Scalar::Rat(rati(1)), &rati(2)).unwrap();
        assert_eq!(r, s(rati(2), &[(Rat::zero(), rati(1)), (rati(1), rat(1, 2))]));
        assert!(r.mul(&r).unwrap().eq_mod(&x, &rati(2)));
    }

    #[test]
    fn sqrt_of_odd_valuation_halves_the_exponent() {
        let x = s(rati(2), &[(rat(1, 2), rati(4))]);
        let r = x.sqrt(&Scalar::Rat(rati(2)), &rati(1)).unwrap();
        assert_eq!(r.leading().map(|(e, _)| e.clone()), Some(rat(1, 4)));
    }

    #[test]
    fn sqrt_error_paths() {
        let two = s(rati(2), &[(Rat::zero(), rati(2))]);
        assert!(matches!(
            two.sqrt(&Scalar::Rat(rati(1)), &rati(2)),
            Err(Error::NotRepresentable(_))
        ));
        let four = s(rati(2), &[(Rat::zero(), rati(4))]);
        assert!(matches!(
            four.sqrt(&Scalar::Rat(rati(3)), &rati(2)),
            Err(Error::BranchMismatch { .. })
        ));
        assert_eq!(
            four.sqrt(&Scalar::Rat(rati(-2)), &rati(2)).unwrap(),
            s(rati(2), &[(Rat::zero(), rati(-2))])
        );
    }

    #[test]
    fn exp_even_combination() {
        // exp(T^(1/4)) + exp(-T^(1/4)) = 2 + T^(1/2) + T/12 mod T^(3/2)
        let e = rat(3, 2);
        let z = s(e.clone(), &[(rat(1, 4), rati(1))]);
        let sum = z.exp(&e).unwrap().add(&z.neg().exp(&e).unwrap()).unwrap();
        assert_eq!(
            sum,
            s(
                e,
                &[(Rat::zero(), rati(2)), (rat(1, 2), rati(1)), (rati(1), rat(1, 12))]
            )
        );
    }

    #[test]
    fn exp_needs_positive_valuation() {
        let bad = s(rati(2), &[(Rat::zero(), rati(1)), (rati(1), rati(1))]);
        assert!(matches!(bad.exp(&rati(2)), Err(Error::Domain(_))));
        let zero = NovikovSeries::zero(X, rati(2));
        assert_eq!(zero.exp(&rati(2)).unwrap(), NovikovSeries::one(X, rati(2)));
    }

    #[test]
    fn pow_i_negative_through_invert() {
        let x = s(rati(3), &[(Rat::zero(), rati(1)), (rati(1), rati(1))]);
        let p = x.pow_i(-2, &rati(3)).unwrap();
        let direct = x.mul(&x).unwrap().invert(&rati(3)).unwrap();
        assert!(p.eq_mod(&direct, &rati(3)));
    }

    #[test]
    fn json_round_trip() {
        let x = s(rati(4), &[(rat(-1, 2), rat(3, 4)), (Rat::zero(), rati(1)), (rat(5, 2), rati(-7))]);
        let text = serde_json::to_string(&x).unwrap();
        let back: NovikovSeries = serde_json::from_str(&text).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn display_reads_naturally() {
        let x = s(rati(2), &[(Rat::zero(), rati(2)), (rat(1, 2), rati(1)), (rati(1), rat(-1, 12))]);
        assert_eq!(x.to_string(), "2 + T^(1/2) - 1/12*T^(1) + O(T^(2))");
        assert_eq!(NovikovSeries::zero(X, rati(1)).to_string(), "0 + O(T^(1))");
    }

    #[test]
    fn lex_order_sorts_by_valuation_then_coefficients() {
        let a = s(rati(2), &[(Rat::zero(), rati(-2)), (rati(1), rati(5))]);
        let b = s(rati(2), &[(Rat::zero(), rati(2)), (rati(1), rati(-5))]);
        let c = s(rati(2), &[(Rat::zero(), rati(2)), (rati(1), rati(5))]);
        let mut v = vec![c.clone(), a.clone(), b.clone()];
        v.sort_by(|x, y| x.lex_cmp(y));
        assert_eq!(v, vec![a, b, c]);
    }
}
