//! Toric models: moment-polytope facets plus correction terms, intersection
//! tables for bulk deformation, and bound parameter values. The registry
//! holds the built-in models; arbitrary models load from files.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::affine::{AffineExpr, Var};
use super::term::{Potential, PotentialTerm};
use crate::error::Error;
use crate::rat::{fmt_rat, rati, Rat};
use crate::Result;

/// One facet inequality <u, normal> + offset >= 0; the offset may reference
/// bindable parameters (alpha, rho) but never u itself. The optional class
/// label ties the facet's potential term to an intersection table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: AffineExpr,
    pub class: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToricModel {
    pub name: String,
    pub dim: usize,
    pub facets: Vec<Facet>,
    pub corrections: Vec<PotentialTerm>,
    pub intersections: BTreeMap<String, BTreeMap<String, i64>>,
    pub betti_sum: u32,
    pub params: BTreeMap<Var, Rat>,
}

/// Names resolvable by `ToricModel::registry`.
pub const REGISTRY_NAMES: [&str; 4] = ["F2", "S2xS2", "F2hat", "square"];

impl ToricModel {
    /// Builds a built-in model. "F2" and "S2xS2" require the parameter alpha;
    /// "F2hat" and "square" take no parameters.
    pub fn registry(name: &str, params: &BTreeMap<Var, Rat>) -> Result<ToricModel> {
        let model = match name {
            "F2" => {
                let alpha = require_param(name, params, Var::Alpha)?;
                hirzebruch("F2", alpha)
            }
            "F2hat" => {
                reject_params(name, params)?;
                let mut m = hirzebruch("F2hat", Rat::zero());
                m.corrections = vec![PotentialTerm::new(
                    rati(1),
                    AffineExpr::parse("1 - u2").expect("static expression"),
                    vec![0, -1],
                )
                .with_class("beta1+S2van")];
                m
            }
            "S2xS2" => {
                let alpha = require_param(name, params, Var::Alpha)?;
                let mut binds = BTreeMap::new();
                binds.insert(Var::Alpha, alpha);
                ToricModel {
                    name: "S2xS2".into(),
                    dim: 2,
                    facets: vec![
                        facet(&[1, 0], "0", None),
                        facet(&[-1, 0], "1 - alpha", None),
                        facet(&[0, 1], "0", None),
                        facet(&[0, -1], "1 + alpha", None),
                    ],
                    corrections: Vec::new(),
                    intersections: BTreeMap::new(),
                    betti_sum: 4,
                    params: binds,
                }
            }
            "square" => {
                reject_params(name, params)?;
                ToricModel {
                    name: "square".into(),
                    dim: 2,
                    facets: vec![
                        facet(&[1, 0], "0", None),
                        facet(&[0, 1], "0", None),
                        facet(&[-1, 0], "1", None),
                        facet(&[0, -1], "1", None),
                    ],
                    corrections: Vec::new(),
                    intersections: BTreeMap::new(),
                    betti_sum: 4,
                    params: BTreeMap::new(),
                }
            }
            other => {
                return Err(Error::Model(format!(
                    "unknown model {other:?}; registry has {}",
                    REGISTRY_NAMES.join(", ")
                )))
            }
        };
        model.validate()?;
        Ok(model)
    }

    /// Structural checks: primitive normals of the right dimension, offsets
    /// free of u, parameters bound, and a certified interior point of the
    /// polytope. Only dimension 2 is supported end to end.
    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 {
            return Err(Error::Unsupported(format!(
                "only 2-dimensional models are supported, got dimension {}",
                self.dim
            )));
        }
        for f in &self.facets {
            if f.normal.len() != self.dim {
                return Err(Error::Model(format!(
                    "facet normal {:?} has dimension {}, expected {}",
                    f.normal,
                    f.normal.len(),
                    self.dim
                )));
            }
            if !is_primitive(&f.normal) {
                return Err(Error::Model(format!(
                    "facet normal {:?} is not primitive",
                    f.normal
                )));
            }
            for v in f.offset.vars() {
                if !v.is_bindable() {
                    return Err(Error::Model(format!(
                        "facet offset {} must not reference {}",
                        f.offset, v
                    )));
                }
                if !self.params.contains_key(&v) {
                    return Err(Error::Model(format!("unbound parameter {v}")));
                }
            }
        }
        for t in &self.corrections {
            if t.vector.len() != self.dim {
                return Err(Error::Model(format!(
                    "correction vector {:?} has dimension {}, expected {}",
                    t.vector,
                    t.vector.len(),
                    self.dim
                )));
            }
            for v in t.energy.vars() {
                if v.is_bindable() && !self.params.contains_key(&v) {
                    return Err(Error::Model(format!("unbound parameter {v}")));
                }
            }
        }
        self.interior_sample()?;
        Ok(())
    }

    /// The bound parameter substitution used on every symbolic expression.
    fn binds(&self) -> &BTreeMap<Var, Rat> {
        &self.params
    }

    /// Facet function ell_j(u) = <u, normal_j> + offset_j at a fiber point.
    pub fn ell(&self, j: usize, u: &[Rat]) -> Result<Rat> {
        let f = &self.facets[j];
        let mut acc = f.offset.eval(self.binds())?;
        for (n, ui) in f.normal.iter().zip(u) {
            acc += rati(*n) * ui;
        }
        Ok(acc)
    }

    /// True when every facet function is strictly positive at u.
    pub fn contains_interior(&self, u: &[Rat]) -> bool {
        (0..self.facets.len()).all(|j| match self.ell(j, u) {
            Ok(v) => v.is_positive(),
            Err(_) => false,
        })
    }

    /// Interior membership as a domain error with the offending point.
    pub fn check_interior(&self, u: &[Rat]) -> Result<()> {
        if self.contains_interior(u) {
            Ok(())
        } else {
            let coords: Vec<String> = u.iter().map(fmt_rat).collect();
            Err(Error::Domain(format!(
                "u = ({}) is not in the interior of the moment polytope of {}",
                coords.join(", "),
                self.name
            )))
        }
    }

    /// Polytope vertices (dimension 2): intersections of facet-line pairs
    /// that satisfy every inequality, deduplicated.
    pub fn vertices(&self) -> Result<Vec<[Rat; 2]>> {
        if self.dim != 2 {
            return Err(Error::Unsupported(
                "vertex enumeration only supports dimension 2".into(),
            ));
        }
        let n = self.facets.len();
        let mut out: Vec<[Rat; 2]> = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (&self.facets[i].normal, &self.facets[j].normal);
                let det = rati(a[0] * b[1] - a[1] * b[0]);
                if det.is_zero() {
                    continue;
                }
                let ci = -self.facets[i].offset.eval(self.binds())?;
                let cj = -self.facets[j].offset.eval(self.binds())?;
                // Solve a.u = ci, b.u = cj by Cramer's rule.
                let u1 = (&ci * rati(b[1]) - rati(a[1]) * &cj) / &det;
                let u2 = (rati(a[0]) * &cj - &ci * rati(b[0])) / &det;
                let u = [u1, u2];
                let inside = (0..n).try_fold(true, |acc, k| {
                    Ok::<bool, Error>(acc && !self.ell(k, &u)?.is_negative())
                })?;
                if inside && !out.contains(&u) {
                    out.push(u);
                }
            }
        }
        Ok(out)
    }

    /// A certified interior point: the vertex centroid, checked strictly.
    pub fn interior_sample(&self) -> Result<[Rat; 2]> {
        let vertices = self.vertices()?;
        if vertices.len() < 3 {
            return Err(Error::Model(format!(
                "moment polytope of {} has empty interior",
                self.name
            )));
        }
        let count = rati(vertices.len() as i64);
        let mut centroid = [Rat::zero(), Rat::zero()];
        for v in &vertices {
            centroid[0] += &v[0];
            centroid[1] += &v[1];
        }
        centroid[0] /= &count;
        centroid[1] /= &count;
        if self.contains_interior(&centroid) {
            Ok(centroid)
        } else {
            Err(Error::Model(format!(
                "could not certify an interior point for {}",
                self.name
            )))
        }
    }

    /// One term per facet: coefficient 1, energy ell_j(u), vector the normal.
    pub fn leading_potential(&self) -> Potential {
        let terms = self
            .facets
            .iter()
            .map(|f| {
                let mut energy = f.offset.bind(self.binds());
                for (i, n) in f.normal.iter().enumerate() {
                    if *n != 0 {
                        energy = energy.add(&AffineExpr::term(rati(*n), Var::ALL[i]));
                    }
                }
                PotentialTerm {
                    coeff: rati(1),
                    energy,
                    vector: f.normal.clone(),
                    class: f.class.clone(),
                }
            })
            .collect();
        Potential::new(self.dim, terms)
    }

    /// Leading potential plus correction terms, parameters bound.
    pub fn full_potential(&self) -> Potential {
        let mut terms: Vec<PotentialTerm> = self.leading_potential().terms().to_vec();
        for t in &self.corrections {
            terms.push(PotentialTerm {
                coeff: t.coeff.clone(),
                energy: t.energy.bind(self.binds()),
                vector: t.vector.clone(),
                class: t.class.clone(),
            });
        }
        Potential::new(self.dim, terms)
    }

    /// Full potential with the bulk deformation for the given divisor.
    pub fn bulk_potential(&self, divisor: &str, rho: &Rat, e: &Rat) -> Result<Potential> {
        self.full_potential().bulk_deform(&self.intersections, divisor, rho, e)
    }
}

/// The Hirzebruch-type model shared by "F2" (free alpha) and "F2hat" (alpha
/// fixed to 0, plus its own correction): facets u1 >= 0, u2 >= 0,
/// 2 - u1 - 2u2 >= 0, 1 - alpha - u2 >= 0, with the standard correction
/// T^(2 alpha) on the fourth facet's term for the smooth case.
fn hirzebruch(name: &str, alpha: Rat) -> ToricModel {
    let mut params = BTreeMap::new();
    params.insert(Var::Alpha, alpha);
    let mut intersections = BTreeMap::new();
    intersections.insert("beta1".to_string(), BTreeMap::from([("S2van".to_string(), 1)]));
    intersections
        .insert("beta1+S2van".to_string(), BTreeMap::from([("S2van".to_string(), -1)]));
    ToricModel {
        name: name.into(),
        dim: 2,
        facets: vec![
            facet(&[1, 0], "0", None),
            facet(&[0, 1], "0", None),
            facet(&[-1, -2], "2", None),
            facet(&[0, -1], "1 - alpha", Some("beta1")),
        ],
        corrections: vec![PotentialTerm::new(
            rati(1),
            AffineExpr::parse("1 + alpha - u2").expect("static expression"),
            vec![0, -1],
        )
        .with_class("beta1+S2van")],
        intersections,
        betti_sum: 4,
        params,
    }
}

fn facet(normal: &[i64], offset: &str, class: Option<&str>) -> Facet {
    Facet {
        normal: normal.to_vec(),
        offset: AffineExpr::parse(offset).expect("static expression"),
        class: class.map(str::to_string),
    }
}

fn require_param(model: &str, params: &BTreeMap<Var, Rat>, v: Var) -> Result<Rat> {
    params
        .get(&v)
        .cloned()
        .ok_or_else(|| Error::Model(format!("model {model} needs the parameter {v}")))
}

fn reject_params(model: &str, params: &BTreeMap<Var, Rat>) -> Result<()> {
    match params.keys().next() {
        None => Ok(()),
        Some(v) => Err(Error::Model(format!("model {model} has no free parameter {v}"))),
    }
}

pub(crate) fn is_primitive(normal: &[i64]) -> bool {
    let g = normal.iter().fold(0i64, |acc, n| acc.gcd(n));
    g == 1
}
