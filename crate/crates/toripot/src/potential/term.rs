//! Potential functions as finite multisets of terms coeff * T^energy * y^v.
//! Coefficients are exact rationals (model data is always rational); series
//! coefficients only appear after evaluation. Terms with equal energy, vector,
//! and class tag merge automatically; class tags keep otherwise-equal terms
//! separate so that bulk deformation can treat them individually, and
//! `collapse_classes` forgets the tags for display and comparison.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::affine::{AffineExpr, Var};
use crate::error::Error;
use crate::novikov::NovikovSeries;
use crate::rat::{fmt_rat, rati, Rat};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PotentialTerm {
    pub coeff: Rat,
    pub energy: AffineExpr,
    pub vector: Vec<i64>,
    pub class: Option<String>,
}

impl PotentialTerm {
    pub fn new(coeff: Rat, energy: AffineExpr, vector: Vec<i64>) -> PotentialTerm {
        PotentialTerm { coeff, energy, vector, class: None }
    }

    pub fn with_class(mut self, class: impl Into<String>) -> PotentialTerm {
        self.class = Some(class.into());
        self
    }

    fn key(&self) -> (AffineExpr, Vec<i64>, Option<String>) {
        (self.energy.clone(), self.vector.clone(), self.class.clone())
    }
}

impl fmt::Display for PotentialTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        let energy_is_zero = self.energy.is_constant() && self.energy.constant_part().is_zero();
        if !energy_is_zero {
            parts.push(format!("T^({})", self.energy));
        }
        for (i, v) in self.vector.iter().enumerate() {
            if *v == 0 {
                continue;
            }
            if *v == 1 {
                parts.push(format!("y{}", i + 1));
            } else {
                parts.push(format!("y{}^({})", i + 1, v));
            }
        }
        let mag = self.coeff.abs();
        if parts.is_empty() {
            parts.push(fmt_rat(&mag));
        } else if !mag.is_one() {
            parts.insert(0, fmt_rat(&mag));
        }
        if self.coeff.is_negative() {
            write!(f, "-{}", parts.join("*"))
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Potential {
    dim: usize,
    terms: Vec<PotentialTerm>,
}

impl Potential {
    /// Normalizing constructor: merges terms with equal (energy, vector,
    /// class), drops zero coefficients, and fixes a deterministic term order.
    pub fn new(dim: usize, terms: Vec<PotentialTerm>) -> Potential {
        let mut map: BTreeMap<(AffineExpr, Vec<i64>, Option<String>), Rat> = BTreeMap::new();
        for t in terms {
            debug_assert_eq!(t.vector.len(), dim, "term dimension mismatch");
            *map.entry(t.key()).or_insert_with(Rat::zero) += &t.coeff;
        }
        let terms = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((energy, vector, class), coeff)| PotentialTerm { coeff, energy, vector, class })
            .collect();
        Potential { dim, terms }
    }

    pub fn empty(dim: usize) -> Potential {
        Potential { dim, terms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[PotentialTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Forgets class tags, merging terms that agree on (energy, vector).
    pub fn collapse_classes(&self) -> Potential {
        let terms = self
            .terms
            .iter()
            .map(|t| PotentialTerm::new(t.coeff.clone(), t.energy.clone(), t.vector.clone()))
            .collect();
        Potential::new(self.dim, terms)
    }

    /// Substitutes bound parameter values into every energy.
    pub fn bind(&self, values: &BTreeMap<Var, Rat>) -> Potential {
        let terms = self
            .terms
            .iter()
            .map(|t| PotentialTerm {
                coeff: t.coeff.clone(),
                energy: t.energy.bind(values),
                vector: t.vector.clone(),
                class: t.class.clone(),
            })
            .collect();
        Potential::new(self.dim, terms)
    }

    /// The i-th entry is y_i d/dy_i applied termwise: coefficients scaled by
    /// v_i, terms with v_i = 0 dropped. Energies and vectors are unchanged.
    pub fn log_derivatives(&self) -> Vec<Potential> {
        (0..self.dim)
            .map(|i| {
                let terms = self
                    .terms
                    .iter()
                    .filter(|t| t.vector[i] != 0)
                    .map(|t| PotentialTerm {
                        coeff: &t.coeff * rati(t.vector[i]),
                        energy: t.energy.clone(),
                        vector: t.vector.clone(),
                        class: t.class.clone(),
                    })
                    .collect();
                Potential::new(self.dim, terms)
            })
            .collect()
    }

    /// Evaluates every energy at the fiber point u, keeping terms whose
    /// energy is below `keep_below` when a bound is given.
    pub fn specialize(&self, u: &[Rat], keep_below: Option<&Rat>) -> Result<Potential> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let e = t.energy.eval_u(u)?;
            if let Some(bound) = keep_below {
                if e >= *bound {
                    continue;
                }
            }
            terms.push(PotentialTerm {
                coeff: t.coeff.clone(),
                energy: AffineExpr::constant(e),
                vector: t.vector.clone(),
                class: t.class.clone(),
            });
        }
        Ok(Potential::new(self.dim, terms))
    }

    /// Sum of coeff * T^(energy(u)) * y^v modulo T^e. Every y_i must be a
    /// unit (valuation 0); interior membership of u is the caller's check.
    pub fn evaluate(&self, u: &[Rat], y: &[NovikovSeries], e: &Rat) -> Result<NovikovSeries> {
        if y.len() != self.dim {
            return Err(Error::Unsupported(format!(
                "evaluation needs {} coordinates, got {}",
                self.dim,
                y.len()
            )));
        }
        let mut mode = y
            .first()
            .map(NovikovSeries::mode)
            .unwrap_or(crate::novikov::ScalarMode::Exact);
        for (i, yi) in y.iter().enumerate() {
            mode = mode.join(yi.mode())?;
            match yi.valuation().finite() {
                Some(v) if v.is_zero() => {}
                other => {
                    return Err(Error::NonUnitCoordinate {
                        index: i + 1,
                        valuation: other
                            .map(fmt_rat)
                            .unwrap_or_else(|| "inf".to_string()),
                    })
                }
            }
        }
        let mut acc = NovikovSeries::zero(mode, e.clone());
        for t in &self.terms {
            let exp = t.energy.eval_u(u)?;
            if exp >= *e {
                continue;
            }
            let mut factor = NovikovSeries::one(mode, e.clone() - &exp);
            for (i, v) in t.vector.iter().enumerate() {
                if *v != 0 {
                    factor = factor.mul(&y[i].pow_i(*v, &(e.clone() - &exp))?)?;
                }
            }
            let coeff = crate::novikov::Scalar::from_rat(&t.coeff, mode);
            acc = acc.add(&factor.mul_monomial(&exp, &coeff))?;
        }
        Ok(acc.truncate(e))
    }

    /// Multiplies each term whose class meets the divisor by exp(m T^rho)
    /// expanded through shifts k*rho < e, where m is the class's intersection
    /// number with the divisor. If no class table mentions the divisor the
    /// potential is returned unchanged; if some table mentions it, every
    /// tagged term must resolve to an intersection number.
    pub fn bulk_deform(
        &self,
        intersections: &BTreeMap<String, BTreeMap<String, i64>>,
        divisor: &str,
        rho: &Rat,
        e: &Rat,
    ) -> Result<Potential> {
        if !rho.is_positive() {
            return Err(Error::Domain(format!(
                "bulk parameter rho must be positive, got {}",
                fmt_rat(rho)
            )));
        }
        let mentioned = intersections.values().any(|t| t.contains_key(divisor));
        if !mentioned {
            return Ok(self.clone());
        }
        let mut terms = Vec::new();
        for t in &self.terms {
            let Some(class) = &t.class else {
                terms.push(t.clone());
                continue;
            };
            let m = intersections
                .get(class)
                .and_then(|table| table.get(divisor))
                .copied()
                .ok_or_else(|| Error::IncompleteBulkData {
                    class: class.clone(),
                    divisor: divisor.to_string(),
                })?;
            if m == 0 {
                terms.push(t.clone());
                continue;
            }
            // exp(m T^rho) = sum_k (m^k / k!) T^(k rho), shifts below e.
            let mut coeff = t.coeff.clone();
            let mut shift = Rat::zero();
            let mut k: i64 = 0;
            while shift < *e {
                terms.push(PotentialTerm {
                    coeff: coeff.clone(),
                    energy: t.energy.add_const(&shift),
                    vector: t.vector.clone(),
                    class: t.class.clone(),
                });
                k += 1;
                coeff = coeff * rati(m) / rati(k);
                shift += rho;
            }
        }
        Ok(Potential::new(self.dim, terms))
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i == 0 {
                write!(f, "{t}")?;
            } else if t.coeff.is_negative() {
                let flipped = PotentialTerm { coeff: -&t.coeff, ..t.clone() };
                write!(f, " - {flipped}")?;
            } else {
                write!(f, " + {t}")?;
            }
        }
        Ok(())
    }
}
