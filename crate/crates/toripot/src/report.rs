//! Result rendering: serializable wire forms for structured output and the
//! plain-text renderers used by the command-line front end. Exact rationals
//! travel as "p/q" strings; structured output carries no timing or host
//! data, so a repeated run serializes byte for byte.

use serde::{Deserialize, Serialize};

use crate::matcher::MatchOutcome;
use crate::novikov::{NovikovSeries, Scalar};
use crate::potential::Potential;
use crate::rat::{fmt_rat, Rat};
use crate::solver::{BalancedReport, CriticalProfile, FamilyReport};

fn rats(v: &[Rat]) -> Vec<String> {
    v.iter().map(fmt_rat).collect()
}

fn point(v: &[Rat]) -> String {
    format!("({})", rats(v).join(", "))
}

fn scalars(v: &[Scalar]) -> String {
    let inner: Vec<String> = v.iter().map(|c| c.to_string()).collect();
    format!("({})", inner.join(", "))
}

/// One potential term on the wire: exact coefficient, energy as an affine
/// expression over the fiber coordinates, and the monomial vector.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermRepr {
    pub coeff: String,
    pub energy: String,
    pub vector: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub class: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PotentialRepr {
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub u: Option<Vec<String>>,
    pub terms: Vec<TermRepr>,
}

impl PotentialRepr {
    pub fn new(model: &str, u: Option<&[Rat]>, potential: &Potential) -> PotentialRepr {
        let terms = potential
            .terms()
            .iter()
            .map(|t| TermRepr {
                coeff: fmt_rat(&t.coeff),
                energy: t.energy.to_string(),
                vector: t.vector.clone(),
                class: t.class.clone(),
            })
            .collect();
        PotentialRepr { model: model.to_string(), u: u.map(rats), terms }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointRepr {
    pub y: Vec<NovikovSeries>,
    pub leading: Vec<String>,
    pub value: NovikovSeries,
    pub multiplicity: usize,
    pub residual_valuation: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstraintRepr {
    pub vector: Vec<i64>,
    pub target: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyRepr {
    pub constraints: Vec<ConstraintRepr>,
    pub free_parameters: usize,
    pub witnesses: Vec<Vec<String>>,
    pub witness_values: Vec<NovikovSeries>,
}

impl FamilyRepr {
    fn new(family: &FamilyReport) -> FamilyRepr {
        FamilyRepr {
            constraints: family
                .constraints
                .iter()
                .map(|(v, target)| ConstraintRepr {
                    vector: v.clone(),
                    target: target.to_string(),
                })
                .collect(),
            free_parameters: family.free_parameters,
            witnesses: family
                .witnesses
                .iter()
                .map(|w| w.iter().map(|c| c.to_string()).collect())
                .collect(),
            witness_values: family.witness_values.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileRepr {
    pub u: Vec<String>,
    pub points: Vec<PointRepr>,
    pub families: Vec<FamilyRepr>,
    pub total_multiplicity: usize,
}

impl ProfileRepr {
    pub fn new(profile: &CriticalProfile) -> ProfileRepr {
        ProfileRepr {
            u: rats(&profile.u),
            points: profile
                .points
                .iter()
                .map(|p| PointRepr {
                    y: p.y.clone(),
                    leading: p.leading.iter().map(|c| c.to_string()).collect(),
                    value: p.value.clone(),
                    multiplicity: p.multiplicity,
                    residual_valuation: fmt_rat(&p.residual_valuation),
                })
                .collect(),
            families: profile.families.iter().map(FamilyRepr::new).collect(),
            total_multiplicity: profile.total_multiplicity,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SegmentRepr {
    pub start: Vec<String>,
    pub end: Vec<String>,
    pub witness: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BalancedRepr {
    pub model: String,
    pub points: Vec<Vec<String>>,
    pub segments: Vec<SegmentRepr>,
}

impl BalancedRepr {
    pub fn new(model: &str, report: &BalancedReport) -> BalancedRepr {
        BalancedRepr {
            model: model.to_string(),
            points: report.points.iter().map(|p| rats(p)).collect(),
            segments: report
                .segments
                .iter()
                .map(|s| SegmentRepr {
                    start: rats(&s.start),
                    end: rats(&s.end),
                    witness: rats(&s.witness),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BulkRepr {
    pub divisor: String,
    pub rho: String,
    pub profile: ProfileRepr,
}

impl BulkRepr {
    pub fn new(divisor: &str, rho: &Rat, profile: &CriticalProfile) -> BulkRepr {
        BulkRepr {
            divisor: divisor.to_string(),
            rho: fmt_rat(rho),
            profile: ProfileRepr::new(profile),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRepr {
    pub samples: Vec<ProfileRepr>,
}

impl SweepRepr {
    pub fn new(samples: &[CriticalProfile]) -> SweepRepr {
        SweepRepr { samples: samples.iter().map(ProfileRepr::new).collect() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelRepr {
    pub exponent: String,
    pub coefficient: String,
    pub cutoff: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatchRepr {
    pub correction: NovikovSeries,
    pub levels: Vec<LevelRepr>,
    pub model_values: Vec<NovikovSeries>,
    pub reference_values: Vec<NovikovSeries>,
}

impl MatchRepr {
    pub fn new(outcome: &MatchOutcome) -> MatchRepr {
        MatchRepr {
            correction: outcome.correction.clone(),
            levels: outcome
                .levels
                .iter()
                .map(|l| LevelRepr {
                    exponent: fmt_rat(&l.exponent),
                    coefficient: fmt_rat(&l.coefficient),
                    cutoff: fmt_rat(&l.cutoff),
                })
                .collect(),
            model_values: outcome.model_values.clone(),
            reference_values: outcome.reference_values.clone(),
        }
    }
}

/// Renders a potential with its model name and, when fixed, the fiber point.
pub fn potential_text(model: &str, u: Option<&[Rat]>, potential: &Potential) -> String {
    let mut out = match u {
        Some(u) => format!("potential of {} at u = {}\n", model, point(u)),
        None => format!("potential of {model}\n"),
    };
    out.push_str(&format!("PO = {potential}\n"));
    out
}

pub fn profile_text(profile: &CriticalProfile) -> String {
    let mut out = format!("u = {}\n", point(&profile.u));
    out.push_str(&format!(
        "critical points: {} (total multiplicity {})\n",
        profile.points.len(),
        profile.total_multiplicity
    ));
    for (i, p) in profile.points.iter().enumerate() {
        out.push_str(&format!(
            "point {}: leading y = ({}), multiplicity {}, residual valuation >= {}\n",
            i + 1,
            p.leading.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", "),
            p.multiplicity,
            fmt_rat(&p.residual_valuation)
        ));
        for (k, yk) in p.y.iter().enumerate() {
            out.push_str(&format!("  y{} = {}\n", k + 1, yk));
        }
        out.push_str(&format!("  value = {}\n", p.value));
    }
    out.push_str(&format!("families: {}\n", profile.families.len()));
    for (i, fam) in profile.families.iter().enumerate() {
        out.push_str(&format!(
            "family {}: {} free parameter{}\n",
            i + 1,
            fam.free_parameters,
            if fam.free_parameters == 1 { "" } else { "s" }
        ));
        for (v, target) in &fam.constraints {
            let exps: Vec<String> = v.iter().map(|k| k.to_string()).collect();
            out.push_str(&format!("  constraint: y^({}) = {}\n", exps.join(", "), target));
        }
        for (w, value) in fam.witnesses.iter().zip(&fam.witness_values) {
            out.push_str(&format!("  witness y = {}, value = {}\n", scalars(w), value));
        }
    }
    out
}

pub fn balanced_text(model: &str, report: &BalancedReport) -> String {
    let mut out = format!("balanced points of {}: {}\n", model, report.points.len());
    for p in &report.points {
        out.push_str(&format!("  {}\n", point(p)));
    }
    out.push_str(&format!("balanced segments: {}\n", report.segments.len()));
    for s in &report.segments {
        out.push_str(&format!(
            "  open segment {} .. {}, witness {}\n",
            point(&s.start),
            point(&s.end),
            point(&s.witness)
        ));
    }
    out
}

pub fn bulk_text(divisor: &str, rho: &Rat, profile: &CriticalProfile) -> String {
    format!(
        "bulk divisor {}, rho = {}\n{}",
        divisor,
        fmt_rat(rho),
        profile_text(profile)
    )
}

pub fn sweep_text(samples: &[CriticalProfile]) -> String {
    let mut out = format!("sweep samples: {}\n", samples.len());
    for profile in samples {
        out.push_str(&profile_text(profile));
    }
    out
}

pub fn match_text(outcome: &MatchOutcome) -> String {
    let mut out = format!("correction = {}\n", outcome.correction);
    out.push_str(&format!("levels: {}\n", outcome.levels.len()));
    for l in &outcome.levels {
        out.push_str(&format!(
            "  T^({}): coefficient {}, matched mod T^({})\n",
            fmt_rat(&l.exponent),
            fmt_rat(&l.coefficient),
            fmt_rat(&l.cutoff)
        ));
    }
    out.push_str(&format!("model values: {}\n", outcome.model_values.len()));
    for v in &outcome.model_values {
        out.push_str(&format!("  {v}\n"));
    }
    out.push_str(&format!("reference values: {}\n", outcome.reference_values.len()));
    for v in &outcome.reference_values {
        out.push_str(&format!("  {v}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::novikov::ScalarMode;
    use crate::potential::{ToricModel, Var};
    use crate::rat::{rat, rati};
    use crate::solver::{critical_profile, find_balanced};
    use std::collections::BTreeMap;

    fn profile() -> CriticalProfile {
        let params: BTreeMap<Var, Rat> = [(Var::Alpha, rat(1, 4))].into_iter().collect();
        let model = ToricModel::registry("F2", &params).unwrap();
        critical_profile(&model, &[rat(5, 8), rat(3, 8)], &rati(2), ScalarMode::Exact).unwrap()
    }

    #[test]
    fn structured_output_is_byte_deterministic() {
        let a = serde_json::to_string_pretty(&ProfileRepr::new(&profile())).unwrap();
        let b = serde_json::to_string_pretty(&ProfileRepr::new(&profile())).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn profile_repr_round_trips_through_json() {
        let repr = ProfileRepr::new(&profile());
        let json = serde_json::to_string(&repr).unwrap();
        let back: ProfileRepr = serde_json::from_str(&json).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
        for (p, q) in repr.points.iter().zip(&back.points) {
            assert_eq!(p.y, q.y);
            assert_eq!(p.value, q.value);
        }
    }

    #[test]
    fn text_renderers_name_the_essentials() {
        let p = profile();
        let text = profile_text(&p);
        assert!(text.contains("u = (5/8, 3/8)"));
        assert!(text.contains("critical points: 4 (total multiplicity 4)"));
        assert!(text.contains("value = 2*T^(3/8) + 2*T^(5/8)"));
        assert!(text.contains("families: 0"));

        let params: BTreeMap<Var, Rat> = [(Var::Alpha, rat(1, 4))].into_iter().collect();
        let model = ToricModel::registry("F2", &params).unwrap();
        let balanced = find_balanced(&model, ScalarMode::Exact).unwrap();
        let text = balanced_text("F2", &balanced);
        assert!(text.contains("balanced points of F2: 1"));
        assert!(text.contains("  (5/8, 3/8)"));

        let text = potential_text("F2", None, &model.full_potential().collapse_classes());
        assert!(text.starts_with("potential of F2\nPO = "));
    }
}
