//! Model files are TOML:
//!
//! ```toml
//! name = "custom"            # optional
//! dim = 2
//! betti_sum = 4
//!
//! [params]                   # optional; rationals as "p/q" strings
//! alpha = "1/4"
//!
//! [[facets]]
//! normal = [0, -1]           # primitive integer vector
//! offset = "1 - alpha"       # affine expression in bound parameters
//! class = "beta1"            # optional label into [intersections]
//!
//! [[corrections]]            # optional
//! coeff = "1"
//! energy = "1 + alpha - u2"  # affine expression; u1/u2 allowed here
//! vector = [0, -1]
//! class = "beta1+S2van"      # optional
//!
//! [intersections]            # optional: class label -> divisor -> integer
//! "beta1" = { S2van = 1 }
//! "beta1+S2van" = { S2van = -1 }
//! ```
//!
//! Semantic failures (non-primitive normals, unbound parameters, malformed
//! rationals, an empty polytope) are reported with the source line they come
//! from.

use std::collections::BTreeMap;

use serde::Deserialize;
use toml::Spanned;

use super::affine::{AffineExpr, Var};
use super::model::{Facet, ToricModel};
use super::term::PotentialTerm;
use crate::error::Error;
use crate::rat::{parse_rat, Rat};
use crate::Result;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    name: Option<String>,
    dim: Spanned<usize>,
    betti_sum: u32,
    #[serde(default)]
    params: BTreeMap<String, Spanned<String>>,
    #[serde(default)]
    facets: Vec<FacetFile>,
    #[serde(default)]
    corrections: Vec<CorrectionFile>,
    #[serde(default)]
    intersections: BTreeMap<String, BTreeMap<String, i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FacetFile {
    normal: Spanned<Vec<i64>>,
    offset: Spanned<String>,
    class: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CorrectionFile {
    coeff: Spanned<String>,
    energy: Spanned<String>,
    vector: Spanned<Vec<i64>>,
    class: Option<String>,
}

/// Parses a model file; `overrides` (for example command-line alpha) win over
/// the file's own [params] section.
pub fn parse_model(text: &str, overrides: &BTreeMap<Var, Rat>) -> Result<ToricModel> {
    let file: ModelFile = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(1),
        msg: e.message().to_string(),
    })?;

    let dim_line = line_of(text, file.dim.span().start);
    let dim = *file.dim.get_ref();
    if dim != 2 {
        return Err(Error::Unsupported(format!(
            "only 2-dimensional models are supported, got dimension {dim}"
        ))
        .at_line(dim_line));
    }

    let mut params: BTreeMap<Var, Rat> = BTreeMap::new();
    for (key, value) in &file.params {
        let line = line_of(text, value.span().start);
        let var = Var::parse(key).map_err(|e| e.at_line(line))?;
        if !var.is_bindable() {
            return Err(Error::Model(format!(
                "parameter {var} cannot be bound to a value"
            ))
            .at_line(line));
        }
        let rat = parse_rat(value.get_ref()).map_err(|e| e.at_line(line))?;
        params.insert(var, rat);
    }
    for (var, value) in overrides {
        params.insert(*var, value.clone());
    }

    let mut facets = Vec::with_capacity(file.facets.len());
    let mut first_facet_line = dim_line;
    for (i, f) in file.facets.iter().enumerate() {
        let normal_line = line_of(text, f.normal.span().start);
        if i == 0 {
            first_facet_line = normal_line;
        }
        let normal = f.normal.get_ref().clone();
        if normal.len() != dim {
            return Err(Error::Model(format!(
                "facet normal {normal:?} has dimension {}, expected {dim}",
                normal.len()
            ))
            .at_line(normal_line));
        }
        if !super::model::is_primitive(&normal) {
            return Err(Error::Model(format!("facet normal {normal:?} is not primitive"))
                .at_line(normal_line));
        }
        let offset_line = line_of(text, f.offset.span().start);
        let offset = AffineExpr::parse(f.offset.get_ref()).map_err(|e| e.at_line(offset_line))?;
        for v in offset.vars() {
            if !v.is_bindable() {
                return Err(Error::Model(format!(
                    "facet offset {offset} must not reference {v}"
                ))
                .at_line(offset_line));
            }
            if !params.contains_key(&v) {
                return Err(Error::Model(format!("unbound parameter {v}")).at_line(offset_line));
            }
        }
        facets.push(Facet { normal, offset, class: f.class.clone() });
    }

    let mut corrections = Vec::with_capacity(file.corrections.len());
    for c in &file.corrections {
        let coeff_line = line_of(text, c.coeff.span().start);
        let coeff = parse_rat(c.coeff.get_ref()).map_err(|e| e.at_line(coeff_line))?;
        let energy_line = line_of(text, c.energy.span().start);
        let energy = AffineExpr::parse(c.energy.get_ref()).map_err(|e| e.at_line(energy_line))?;
        for v in energy.vars() {
            if v.is_bindable() && !params.contains_key(&v) {
                return Err(Error::Model(format!("unbound parameter {v}")).at_line(energy_line));
            }
        }
        let vector_line = line_of(text, c.vector.span().start);
        let vector = c.vector.get_ref().clone();
        if vector.len() != dim {
            return Err(Error::Model(format!(
                "correction vector {vector:?} has dimension {}, expected {dim}",
                vector.len()
            ))
            .at_line(vector_line));
        }
        let mut term = PotentialTerm::new(coeff, energy, vector);
        term.class = c.class.clone();
        corrections.push(term);
    }

    let model = ToricModel {
        name: file.name.unwrap_or_else(|| "model".to_string()),
        dim,
        facets,
        corrections,
        intersections: file.intersections,
        betti_sum: file.betti_sum,
        params,
    };
    // Geometric checks (primitivity, interior) report against the facet
    // block since the facets define the polytope.
    model.validate().map_err(|e| e.at_line(first_facet_line))?;
    Ok(model)
}

fn line_of(text: &str, byte_offset: usize) -> usize {
    text.as_bytes()[..byte_offset.min(text.len())]
        .iter()
        .filter(|b| **b == b'\n')
        .count()
        + 1
}
