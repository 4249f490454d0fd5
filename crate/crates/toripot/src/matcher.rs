//! Order-by-order determination of an unknown correction coefficient: the
//! coefficient is a series on a fixed exponent grid, and each grid level is
//! pinned down by comparing critical-value multisets against a reference
//! model at successively finer cutoffs.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::error::Error;
use crate::novikov::{NovikovSeries, ScalarMode};
use crate::potential::{AffineExpr, Potential, PotentialTerm, ToricModel, Var};
use crate::rat::{fmt_rat, rati, Rat};
use crate::solver::{find_balanced, potential_profile};
use crate::Result;

/// The unknown slot: a term direction and base energy whose coefficient is
/// an undetermined series c = sum of c_k T^(k step), k >= 1.
#[derive(Clone, Debug)]
pub struct UnknownCorrection {
    pub energy: AffineExpr,
    pub vector: Vec<i64>,
    pub step: Rat,
}

/// A matching problem: determine the unknown correction of `model` so that
/// its critical values at `fiber` reproduce those of `reference` at
/// `reference_fiber` as multisets.
#[derive(Clone, Debug)]
pub struct MatchProblem {
    /// The model carrying the unknown slot, with no corrections of its own.
    pub model: ToricModel,
    pub unknown: UnknownCorrection,
    pub reference: ToricModel,
    pub fiber: Vec<Rat>,
    pub reference_fiber: Vec<Rat>,
}

/// One solved grid level.
#[derive(Clone, Debug)]
pub struct LevelAudit {
    /// Exponent k * step of this level's monomial.
    pub exponent: Rat,
    pub coefficient: Rat,
    /// Cutoff at which the level was pinned down (E for levels that were
    /// already matched and therefore zero).
    pub cutoff: Rat,
}

/// The recovered correction with its per-level audit trail and the final
/// matched value multisets.
#[derive(Clone, Debug)]
pub struct MatchOutcome {
    pub correction: NovikovSeries,
    pub levels: Vec<LevelAudit>,
    pub model_values: Vec<NovikovSeries>,
    pub reference_values: Vec<NovikovSeries>,
}

/// The standard problem: recover the correction of the smooth Hirzebruch
/// model "F2" against the product model "S2xS2" at the same alpha, with the
/// unknown riding the fourth facet's term on the exponent grid 2 alpha.
pub fn f2_problem(alpha: &Rat) -> Result<MatchProblem> {
    if !alpha.is_positive() {
        return Err(Error::Domain(format!(
            "the matching grid needs alpha > 0, got {}",
            fmt_rat(alpha)
        )));
    }
    let params: BTreeMap<Var, Rat> = [(Var::Alpha, alpha.clone())].into_iter().collect();
    let hypothesized = ToricModel::registry("F2", &params)?;
    let reference = ToricModel::registry("S2xS2", &params)?;
    let fiber = unique_balanced(&hypothesized)?;
    let reference_fiber = unique_balanced(&reference)?;
    let mut model = hypothesized;
    model.corrections.clear();
    let energy = AffineExpr::parse("1 - alpha - u2")
        .expect("static expression")
        .bind(&params);
    Ok(MatchProblem {
        model,
        unknown: UnknownCorrection { energy, vector: vec![0, -1], step: alpha * rati(2) },
        reference,
        fiber,
        reference_fiber,
    })
}

fn unique_balanced(model: &ToricModel) -> Result<Vec<Rat>> {
    let report = find_balanced(model, ScalarMode::Exact)?;
    if report.points.len() != 1 || !report.segments.is_empty() {
        return Err(Error::Unsupported(format!(
            "matching needs a unique balanced fiber point, {} has {} points and {} segments",
            model.name,
            report.points.len(),
            report.segments.len()
        )));
    }
    Ok(report.points[0].clone())
}

/// Determines the unknown coefficients level by level. A level's monomial
/// first moves the critical values at (base + k step), where base is the
/// smallest valuation among the reference values, so comparing multisets
/// modulo base + (k+1) step pins down c_k once the lower levels are fixed;
/// the dependence is affine there because quadratic effects of c_k start at
/// base + 2k step. Runs in exact mode only.
pub fn solve_correction(problem: &MatchProblem, e: &Rat, mode: ScalarMode) -> Result<MatchOutcome> {
    if !mode.is_exact() {
        return Err(Error::Unsupported(
            "the correction matcher runs in exact mode".to_string(),
        ));
    }
    if !problem.unknown.step.is_positive() {
        return Err(Error::Domain("the matching grid step must be positive".to_string()));
    }
    let delta = &problem.unknown.step;
    let reference_values = value_multiset(
        &problem.reference,
        &problem.reference.full_potential(),
        &problem.reference_fiber,
        e,
        mode,
    )?;
    let Some(base) = reference_values
        .iter()
        .filter_map(|v| v.valuation().finite().cloned())
        .min()
    else {
        return Err(Error::MatchFailure(
            "every reference critical value vanishes to the cutoff".to_string(),
        ));
    };

    // Largest level whose monomial is visible below e at all.
    let mut k_max = 0i64;
    while &base + delta * rati(k_max + 1) < *e {
        k_max += 1;
    }

    let mut coefficients: BTreeMap<i64, (Rat, Rat)> = BTreeMap::new(); // k -> (c_k, cutoff)
    let mut partial: Vec<(Rat, Rat)> = Vec::new(); // (exponent, coefficient)
    let mut next_level = 1i64;
    let mut prev_mismatch: Option<Rat> = None;
    let mut matched_values = None;
    while next_level <= k_max {
        // Scan for the first mismatch at an escalating cutoff: a mismatch at
        // the next unsolved level already shows up well below e, so the full
        // cutoff is only ever paid once, by the scan that certifies a match.
        let mut scan = (&base + delta * rati(next_level + 1)).min(e.clone());
        let (values, mismatch) = loop {
            let v = trial_values(problem, &partial, &scan, mode)?;
            pair_counts(&v, &reference_values)?;
            if let Some(nu) = mismatch_valuation(&v, &reference_values)? {
                break (v, Some(nu));
            }
            if scan == *e {
                break (v, None);
            }
            scan = ((&scan - &base) * rati(2) + &base).min(e.clone());
        };
        let Some(nu) = mismatch else {
            matched_values = Some(values);
            break; // multisets agree modulo e: all remaining levels are zero
        };
        if let Some(prev) = &prev_mismatch {
            if nu <= *prev {
                return Err(Error::MatchFailure(format!(
                    "no progress: the mismatch stays at valuation {}",
                    fmt_rat(&nu)
                )));
            }
        }
        prev_mismatch = Some(nu.clone());
        // Attribute the mismatch to its grid level.
        let offset = &nu - &base;
        let ratio = &offset / delta;
        if !ratio.is_integer() {
            return Err(Error::MatchFailure(format!(
                "the value mismatch at valuation {} sits off the exponent grid",
                fmt_rat(&nu)
            )));
        }
        let k = match i64::try_from(ratio.to_integer()) {
            Ok(k) if k >= next_level => k,
            _ => {
                return Err(Error::MatchFailure(format!(
                    "the value mismatch at valuation {} precedes the unsolved levels",
                    fmt_rat(&nu)
                )))
            }
        };
        if k > k_max {
            return Err(Error::MatchFailure(format!(
                "the value mismatch at valuation {} is beyond the determinable levels",
                fmt_rat(&nu)
            )));
        }
        let ek = (&base + delta * rati(k + 1)).min(e.clone());
        let c_k = solve_level(problem, &partial, &values, &reference_values, k, &ek, mode)?;
        coefficients.insert(k, (c_k.clone(), ek));
        partial.push((delta * rati(k), c_k));
        next_level = k + 1;
    }
    let model_values = match matched_values {
        Some(v) => v,
        None => {
            // Levels exhausted: the final correction must already match.
            let values = trial_values(problem, &partial, e, mode)?;
            pair_counts(&values, &reference_values)?;
            if let Some(nu) = mismatch_valuation(&values, &reference_values)? {
                return Err(Error::MatchFailure(format!(
                    "a value mismatch at valuation {} remains after all determinable levels",
                    fmt_rat(&nu)
                )));
            }
            values
        }
    };

    let c_cutoff = (delta * rati(k_max + 1)).min(e.clone());
    let terms: Vec<(Rat, Rat)> = partial.clone();
    let correction = NovikovSeries::from_rat_terms(mode, c_cutoff, &terms);
    let levels = (1..=k_max)
        .map(|k| {
            let (coefficient, cutoff) =
                coefficients.get(&k).cloned().unwrap_or((Rat::zero(), e.clone()));
            LevelAudit { exponent: delta * rati(k), coefficient, cutoff }
        })
        .collect();
    Ok(MatchOutcome { correction, levels, model_values, reference_values })
}

/// Pins down c_k from the affine response of the value multiset: samples at
/// c_k = 0, 1, 2 give the slope, a linearity check, and the candidate, which
/// is then re-verified against the reference modulo the level cutoff.
fn solve_level(
    problem: &MatchProblem,
    partial: &[(Rat, Rat)],
    values_at_zero: &[NovikovSeries],
    reference: &[NovikovSeries],
    k: i64,
    ek: &Rat,
    mode: ScalarMode,
) -> Result<Rat> {
    let exponent = &problem.unknown.step * rati(k);
    let with = |t: i64| -> Vec<(Rat, Rat)> {
        let mut c = partial.to_vec();
        c.push((exponent.clone(), rati(t)));
        c
    };
    let v1 = trial_values(problem, &with(1), ek, mode)?;
    let v2 = trial_values(problem, &with(2), ek, mode)?;
    if v1.len() != values_at_zero.len() || v2.len() != values_at_zero.len() {
        return Err(Error::MatchFailure(
            "the critical point count changes with the trial coefficient".to_string(),
        ));
    }
    let mut candidate: Option<Rat> = None;
    for i in 0..values_at_zero.len() {
        let v0 = values_at_zero[i].truncate(ek);
        let slope = v1[i].sub(&v0)?;
        let again = v2[i].sub(&v1[i])?;
        if !again.eq_mod(&slope, ek) {
            return Err(Error::MatchFailure(format!(
                "critical value {} responds nonlinearly to the level-{} coefficient",
                i + 1,
                k
            )));
        }
        if slope.truncate(ek).is_zero() {
            continue;
        }
        let (mu, _) = slope.leading().expect("nonzero mod ek");
        let a = v0.sub(&reference[i].truncate(ek))?.coefficient_at(mu);
        let b = slope.coefficient_at(mu);
        let t = a
            .as_rat()
            .zip(b.as_rat())
            .map(|(a, b)| -(a / b))
            .ok_or(Error::ModeMismatch)?;
        candidate = Some(t);
        break;
    }
    let Some(t) = candidate else {
        return Err(Error::MatchFailure(format!(
            "the level-{k} coefficient cannot influence the critical values"
        )));
    };
    // Cross-pair verification: the one candidate must close every pair.
    let mut c = partial.to_vec();
    c.push((exponent, t.clone()));
    let verify = trial_values(problem, &c, ek, mode)?;
    pair_counts(&verify, reference)?;
    for (v, r) in verify.iter().zip(reference) {
        if !v.eq_mod(r, ek) {
            return Err(Error::MatchFailure(format!(
                "the level-{} candidate {} fails cross-pair verification",
                k,
                fmt_rat(&t)
            )));
        }
    }
    Ok(t)
}

/// Critical values of the model with the given partial correction, as a
/// lex-sorted multiset (points repeated by multiplicity).
fn trial_values(
    problem: &MatchProblem,
    correction: &[(Rat, Rat)],
    e: &Rat,
    mode: ScalarMode,
) -> Result<Vec<NovikovSeries>> {
    let mut terms: Vec<PotentialTerm> = problem.model.full_potential().terms().to_vec();
    for (exp, coeff) in correction {
        if coeff.is_zero() {
            continue;
        }
        let energy = problem.unknown.energy.add(&AffineExpr::constant(exp.clone()));
        terms.push(PotentialTerm::new(coeff.clone(), energy, problem.unknown.vector.clone()));
    }
    let potential = Potential::new(problem.model.dim, terms);
    value_multiset(&problem.model, &potential, &problem.fiber, e, mode)
}

fn value_multiset(
    model: &ToricModel,
    potential: &Potential,
    u: &[Rat],
    e: &Rat,
    mode: ScalarMode,
) -> Result<Vec<NovikovSeries>> {
    let profile = potential_profile(model, potential, u, e, mode)?;
    if !profile.families.is_empty() {
        return Err(Error::MatchFailure(
            "the critical locus has a positive-dimensional component".to_string(),
        ));
    }
    let mut values = Vec::with_capacity(profile.total_multiplicity);
    for p in &profile.points {
        for _ in 0..p.multiplicity {
            values.push(p.value.clone());
        }
    }
    values.sort_by(|a, b| a.lex_cmp(b));
    Ok(values)
}

fn pair_counts(a: &[NovikovSeries], b: &[NovikovSeries]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::MatchFailure(format!(
            "critical value counts differ: {} against {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Smallest valuation at which the sorted multisets disagree; None when they
/// agree to both cutoffs.
fn mismatch_valuation(a: &[NovikovSeries], b: &[NovikovSeries]) -> Result<Option<Rat>> {
    let mut nu: Option<Rat> = None;
    for (x, y) in a.iter().zip(b) {
        let d = x.sub(y)?;
        if let Some(v) = d.valuation().finite() {
            if nu.as_ref().is_none_or(|n| v < n) {
                nu = Some(v.clone());
            }
        }
    }
    Ok(nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn recovers_the_standard_correction() {
        let problem = f2_problem(&rat(1, 4)).unwrap();
        let e = rati(3);
        let outcome = solve_correction(&problem, &e, ScalarMode::Exact).unwrap();
        let expected = NovikovSeries::from_rat_terms(
            ScalarMode::Exact,
            outcome.correction.cutoff().clone(),
            &[(rat(1, 2), rati(1))],
        );
        assert_eq!(outcome.correction, expected);
        assert_eq!(outcome.levels[0].exponent, rat(1, 2));
        assert_eq!(outcome.levels[0].coefficient, rati(1));
        assert!(outcome.levels[1..].iter().all(|l| l.coefficient.is_zero()));
        assert_eq!(outcome.model_values.len(), 4);
        for (v, r) in outcome.model_values.iter().zip(&outcome.reference_values) {
            assert!(v.eq_mod(r, &e));
        }
    }

    #[test]
    fn identical_models_need_no_correction() {
        let params: BTreeMap<Var, Rat> = [(Var::Alpha, rat(1, 4))].into_iter().collect();
        let model = ToricModel::registry("S2xS2", &params).unwrap();
        let fiber = unique_balanced(&model).unwrap();
        let problem = MatchProblem {
            model: model.clone(),
            unknown: UnknownCorrection {
                energy: AffineExpr::parse("1 - alpha - u2").unwrap().bind(&params),
                vector: vec![0, -1],
                step: rat(1, 2),
            },
            reference: model,
            fiber: fiber.clone(),
            reference_fiber: fiber,
        };
        let outcome = solve_correction(&problem, &rati(3), ScalarMode::Exact).unwrap();
        assert!(outcome.correction.is_zero());
        assert!(outcome.levels.iter().all(|l| l.coefficient.is_zero()));
    }

    #[test]
    fn planted_coefficients_round_trip() {
        // Reference = the same model with a known correction series planted
        // into its correction slot; the solver must read it back.
        let problem = f2_problem(&rat(1, 4)).unwrap();
        let planted = [(rat(1, 2), rati(2)), (rat(3, 2), rat(-1, 3))];
        let mut reference = problem.model.clone();
        for (exp, coeff) in &planted {
            reference.corrections.push(PotentialTerm::new(
                coeff.clone(),
                problem.unknown.energy.add(&AffineExpr::constant(exp.clone())),
                problem.unknown.vector.clone(),
            ));
        }
        let problem = MatchProblem {
            reference,
            reference_fiber: problem.fiber.clone(),
            ..problem
        };
        let e = rati(3);
        let outcome = solve_correction(&problem, &e, ScalarMode::Exact).unwrap();
        let expected = NovikovSeries::from_rat_terms(
            ScalarMode::Exact,
            outcome.correction.cutoff().clone(),
            &planted,
        );
        assert_eq!(outcome.correction, expected);
    }

    #[test]
    fn facet_order_does_not_change_the_outcome() {
        let baseline = solve_correction(
            &f2_problem(&rat(1, 4)).unwrap(),
            &rati(2),
            ScalarMode::Exact,
        )
        .unwrap();
        let mut shuffled = f2_problem(&rat(1, 4)).unwrap();
        shuffled.model.facets.rotate_left(2);
        shuffled.reference.facets.rotate_left(1);
        let outcome = solve_correction(&shuffled, &rati(2), ScalarMode::Exact).unwrap();
        assert_eq!(outcome.correction, baseline.correction);
        assert_eq!(outcome.model_values.len(), baseline.model_values.len());
    }

    #[test]
    fn float_mode_is_rejected() {
        let problem = f2_problem(&rat(1, 4)).unwrap();
        let err = solve_correction(&problem, &rati(2), ScalarMode::float_default());
        assert!(matches!(err, Err(Error::Unsupported(_))));
    }
}
