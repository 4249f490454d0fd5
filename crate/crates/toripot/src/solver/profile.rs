//! Whole-fiber critical data: profiles (lifted points, families, values),
//! the balanced-fiber search over the moment polytope, and parameter sweeps
//! along line segments of fiber points.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::leading::{leading_system, solve_leading, SolutionFamily};
use super::lift::{lift_point, refine_family, FamilyRefinement, LiftedPoint};
use crate::error::Error;
use crate::novikov::{NovikovSeries, Scalar, ScalarMode};
use crate::potential::{Potential, ToricModel};
use crate::rat::{fmt_rat, rat, Rat};
use crate::Result;

/// A lifted critical point together with its critical value mod T^e.
#[derive(Clone, Debug)]
pub struct CriticalPoint {
    pub y: Vec<NovikovSeries>,
    pub leading: Vec<Scalar>,
    pub value: NovikovSeries,
    pub multiplicity: usize,
    pub residual_valuation: Rat,
}

/// A leading-order family that survived refinement, with potential values
/// sampled at its witness points.
#[derive(Clone, Debug)]
pub struct FamilyReport {
    pub constraints: Vec<(Vec<i64>, Scalar)>,
    pub free_parameters: usize,
    pub witnesses: Vec<Vec<Scalar>>,
    pub witness_values: Vec<NovikovSeries>,
}

/// All critical data of a potential on one fiber.
#[derive(Clone, Debug)]
pub struct CriticalProfile {
    pub u: Vec<Rat>,
    pub points: Vec<CriticalPoint>,
    pub families: Vec<FamilyReport>,
    pub total_multiplicity: usize,
}

/// How the bulk parameter rho is chosen along a sweep.
#[derive(Clone, Debug)]
pub enum RhoSpec {
    /// rho = (u2 - u1) / 2, matching the divisor scale to the fiber gap.
    Auto,
    Fixed(Rat),
}

impl RhoSpec {
    pub fn resolve(&self, u: &[Rat]) -> Result<Rat> {
        let rho = match self {
            RhoSpec::Auto => {
                if u.len() != 2 {
                    return Err(Error::Domain(
                        "automatic rho needs a 2-dimensional fiber point".to_string(),
                    ));
                }
                (&u[1] - &u[0]) / rat(2, 1)
            }
            RhoSpec::Fixed(r) => r.clone(),
        };
        if !rho.is_positive() {
            return Err(Error::Domain(format!(
                "bulk parameter rho must be positive, got {}",
                fmt_rat(&rho)
            )));
        }
        Ok(rho)
    }
}

/// Critical profile of an explicit potential at an interior fiber point:
/// leading solutions are computed, isolated ones lifted, and families
/// refined (which can replace a family by the isolated points it contains).
pub fn potential_profile(
    model: &ToricModel,
    potential: &Potential,
    u: &[Rat],
    e: &Rat,
    mode: ScalarMode,
) -> Result<CriticalProfile> {
    model.check_interior(u)?;
    let sys = leading_system(potential, u)?;
    let sol = solve_leading(&sys, mode)?;
    let mut points: Vec<CriticalPoint> = Vec::new();
    for (y0, mult) in &sol.points {
        let lifted = lift_point(potential, u, y0, *mult, e, mode)?;
        points.push(with_value(potential, u, lifted, e)?);
    }
    let mut families = Vec::new();
    for fam in &sol.families {
        match refine_family(potential, u, fam, e, mode)? {
            FamilyRefinement::Stands => {
                families.push(family_report(potential, u, fam, e, mode)?);
            }
            FamilyRefinement::Points(pts) => {
                for lifted in pts {
                    points.push(with_value(potential, u, lifted, e)?);
                }
            }
        }
    }
    points.sort_by(|a, b| {
        a.y[0]
            .lex_cmp(&b.y[0])
            .then_with(|| a.y[1].lex_cmp(&b.y[1]))
    });
    let total_multiplicity = points.iter().map(|p| p.multiplicity).sum();
    Ok(CriticalProfile { u: u.to_vec(), points, families, total_multiplicity })
}

/// Critical profile of the model's corrected potential.
pub fn critical_profile(
    model: &ToricModel,
    u: &[Rat],
    e: &Rat,
    mode: ScalarMode,
) -> Result<CriticalProfile> {
    potential_profile(model, &model.full_potential(), u, e, mode)
}

/// Critical profile after deforming by the divisor. Newton lifting works at
/// energies up to e plus the leading energies of both derivatives, so the
/// deformed potential is built out to that cutoff (building it only to e
/// would silently solve a shorter deformation and pollute the top reported
/// coefficients). Residual valuations are still capped at e: beyond its own
/// expansion the deformation carries no information.
pub fn bulk_profile(
    model: &ToricModel,
    divisor: &str,
    rho: &RhoSpec,
    u: &[Rat],
    e: &Rat,
    mode: ScalarMode,
) -> Result<CriticalProfile> {
    let rho = rho.resolve(u)?;
    model.check_interior(u)?;
    let probe = model.bulk_potential(divisor, &rho, e)?;
    let headroom: Rat = leading_system(&probe, u)?.min_energies().iter().sum();
    let potential = model.bulk_potential(divisor, &rho, &(e + &headroom))?;
    let mut profile = potential_profile(model, &potential, u, e, mode)?;
    for p in &mut profile.points {
        if p.residual_valuation > *e {
            p.residual_valuation = e.clone();
        }
    }
    Ok(profile)
}

fn with_value(
    potential: &Potential,
    u: &[Rat],
    lifted: LiftedPoint,
    e: &Rat,
) -> Result<CriticalPoint> {
    let value = potential.evaluate(u, &lifted.y, e)?;
    Ok(CriticalPoint {
        y: lifted.y,
        leading: lifted.leading,
        value,
        multiplicity: lifted.multiplicity,
        residual_valuation: lifted.residual_valuation,
    })
}

fn family_report(
    potential: &Potential,
    u: &[Rat],
    fam: &SolutionFamily,
    e: &Rat,
    mode: ScalarMode,
) -> Result<FamilyReport> {
    let mut witness_values = Vec::with_capacity(fam.witnesses.len());
    for w in &fam.witnesses {
        let y: Vec<NovikovSeries> = w
            .iter()
            .map(|c| NovikovSeries::constant(c.clone(), mode, e.clone()))
            .collect();
        witness_values.push(potential.evaluate(u, &y, e)?);
    }
    Ok(FamilyReport {
        constraints: fam.constraints.clone(),
        free_parameters: fam.free_parameters,
        witnesses: fam.witnesses.clone(),
        witness_values,
    })
}

/// Fiber points whose every derivative can vanish: where energies tie.
#[derive(Clone, Debug)]
pub struct BalancedReport {
    pub points: Vec<Vec<Rat>>,
    pub segments: Vec<SegmentReport>,
}

/// An open segment of balanced fiber points, with a sample point strictly
/// inside it. Endpoints themselves are excluded (they sit on the polytope
/// boundary or on another tie line where the behavior changes).
#[derive(Clone, Debug)]
pub struct SegmentReport {
    pub start: Vec<Rat>,
    pub end: Vec<Rat>,
    pub witness: Vec<Rat>,
}

/// A tie line a*u1 + b*u2 + c = 0 in canonical integer form: (a, b, c)
/// divided by their gcd, first nonzero of (a, b) positive.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct TieLine {
    a: BigInt,
    b: BigInt,
    c: BigInt,
}

impl TieLine {
    /// Canonicalizes the zero locus of an affine expression; None when the
    /// expression has no u-dependence.
    fn from_difference(a: &Rat, b: &Rat, c: &Rat) -> Option<TieLine> {
        if a.is_zero() && b.is_zero() {
            return None;
        }
        let lcm = [a, b, c]
            .iter()
            .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let scale = Rat::from_integer(lcm);
        let mut ia = (a * &scale).to_integer();
        let mut ib = (b * &scale).to_integer();
        let mut ic = (c * &scale).to_integer();
        let g = ia.gcd(&ib).gcd(&ic);
        if !g.is_zero() {
            ia /= &g;
            ib /= &g;
            ic /= &g;
        }
        let flip = if ia.is_zero() { ib.is_negative() } else { ia.is_negative() };
        if flip {
            ia = -ia;
            ib = -ib;
            ic = -ic;
        }
        Some(TieLine { a: ia, b: ib, c: ic })
    }

    fn value_at(&self, u: &[Rat]) -> Rat {
        Rat::from_integer(self.a.clone()) * &u[0]
            + Rat::from_integer(self.b.clone()) * &u[1]
            + Rat::from_integer(self.c.clone())
    }

    /// Intersection point of two non-parallel lines.
    fn intersect(&self, other: &TieLine) -> Option<[Rat; 2]> {
        let det = &self.a * &other.b - &other.a * &self.b;
        if det.is_zero() {
            return None;
        }
        let det = Rat::from_integer(det);
        let x = Rat::from_integer(&self.b * &other.c - &other.b * &self.c) / &det;
        let y = Rat::from_integer(&other.a * &self.c - &self.a * &other.c) / &det;
        Some([x, y])
    }
}

/// Finds every fiber point where all leading polynomials can vanish
/// simultaneously. Candidates come from intersecting tie lines (loci where
/// two distinct monomials of one derivative share the minimal energy);
/// coincident tie lines from both derivatives produce candidate segments,
/// which are clipped to the polytope interior, subdivided at crossings with
/// every other tie line, and sampled at midpoints.
pub fn find_balanced(model: &ToricModel, mode: ScalarMode) -> Result<BalancedReport> {
    let full = model.full_potential();
    let derivs = full.log_derivatives();
    if derivs.len() != 2 {
        return Err(Error::Unsupported(
            "the balanced-fiber search is implemented for 2 variables".to_string(),
        ));
    }
    let mut lines: Vec<BTreeSet<TieLine>> = Vec::with_capacity(2);
    for d in &derivs {
        let d = d.collapse_classes();
        let mut set = BTreeSet::new();
        let terms = d.terms();
        for j in 0..terms.len() {
            for k in (j + 1)..terms.len() {
                if terms[j].vector == terms[k].vector {
                    continue;
                }
                let diff = terms[j].energy.sub(&terms[k].energy);
                let a = diff.coeff(crate::potential::Var::U1);
                let b = diff.coeff(crate::potential::Var::U2);
                let c = diff.constant_part();
                match TieLine::from_difference(&a, &b, c) {
                    Some(line) => {
                        set.insert(line);
                    }
                    None if c.is_zero() => {
                        return Err(Error::Unsupported(
                            "two distinct monomials tie on the whole fiber plane".to_string(),
                        ));
                    }
                    None => {}
                }
            }
        }
        lines.push(set);
    }

    let keep = |u: &[Rat]| -> Result<bool> {
        if !model.contains_interior(u) {
            return Ok(false);
        }
        let sys = match leading_system(&full, u) {
            Ok(sys) => sys,
            Err(Error::DegenerateDirection { .. }) => return Ok(false),
            Err(e) => return Err(e),
        };
        match solve_leading(&sys, mode) {
            Ok(sol) => Ok(!(sol.points.is_empty() && sol.families.is_empty())),
            Err(Error::DegenerateDirection { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };

    let mut point_candidates: BTreeSet<(Rat, Rat)> = BTreeSet::new();
    let mut coincident: BTreeSet<TieLine> = BTreeSet::new();
    for l1 in &lines[0] {
        for l2 in &lines[1] {
            match l1.intersect(l2) {
                Some([x, y]) => {
                    point_candidates.insert((x, y));
                }
                None if l1 == l2 => {
                    coincident.insert(l1.clone());
                }
                None => {}
            }
        }
    }

    let mut points = Vec::new();
    for (x, y) in point_candidates {
        let u = vec![x, y];
        if keep(&u)? {
            points.push(u);
        }
    }

    let all_lines: Vec<&TieLine> = lines[0].union(&lines[1]).collect();
    let mut segments = Vec::new();
    for line in &coincident {
        segments.extend(balanced_segments(model, line, &all_lines, &keep)?);
    }
    points.sort();
    segments.sort_by(|a, b| (&a.start, &a.end).cmp(&(&b.start, &b.end)));
    Ok(BalancedReport { points, segments })
}

/// Clips one coincident tie line to the polytope, splits it at crossings
/// with other tie lines, and keeps the maximal runs of subintervals whose
/// midpoints are balanced.
fn balanced_segments(
    model: &ToricModel,
    line: &TieLine,
    all_lines: &[&TieLine],
    keep: &dyn Fn(&[Rat]) -> Result<bool>,
) -> Result<Vec<SegmentReport>> {
    // Parameterize the line as p0 + t * dir.
    let dir = [
        Rat::from_integer(-line.b.clone()),
        Rat::from_integer(line.a.clone()),
    ];
    let p0 = if line.a.is_zero() {
        // b u2 + c = 0
        [Rat::zero(), -Rat::from_integer(line.c.clone()) / Rat::from_integer(line.b.clone())]
    } else {
        [-Rat::from_integer(line.c.clone()) / Rat::from_integer(line.a.clone()), Rat::zero()]
    };
    let at = |t: &Rat| -> Vec<Rat> {
        vec![&p0[0] + &dir[0] * t, &p0[1] + &dir[1] * t]
    };

    // Clip against every facet half-plane ell_j >= 0.
    let mut tmin: Option<Rat> = None;
    let mut tmax: Option<Rat> = None;
    for j in 0..model.facets.len() {
        let base = model.ell(j, &at(&Rat::zero()))?;
        let slope = model.ell(j, &at(&Rat::one()))? - &base;
        if slope.is_zero() {
            if !base.is_positive() {
                return Ok(Vec::new());
            }
            continue;
        }
        let bound = -&base / &slope;
        if slope.is_positive() {
            if tmin.as_ref().is_none_or(|t| bound > *t) {
                tmin = Some(bound);
            }
        } else if tmax.as_ref().is_none_or(|t| bound < *t) {
            tmax = Some(bound);
        }
    }
    let (Some(tmin), Some(tmax)) = (tmin, tmax) else {
        return Ok(Vec::new()); // unbounded: not a polytope direction
    };
    if tmin >= tmax {
        return Ok(Vec::new());
    }

    // Crossings with all other tie lines subdivide the parameter range.
    let mut cuts: BTreeSet<Rat> = BTreeSet::new();
    for other in all_lines {
        if *other == line {
            continue;
        }
        let base = other.value_at(&at(&Rat::zero()));
        let slope = other.value_at(&at(&Rat::one())) - &base;
        if slope.is_zero() {
            continue;
        }
        let t = -base / slope;
        if t > tmin && t < tmax {
            cuts.insert(t);
        }
    }
    let mut boundaries = vec![tmin];
    boundaries.extend(cuts);
    boundaries.push(tmax);

    // Sample each subinterval's midpoint and merge adjacent balanced ones.
    let mut runs: Vec<(Rat, Rat, Rat)> = Vec::new(); // (start, end, witness t)
    for w in boundaries.windows(2) {
        let mid = (&w[0] + &w[1]) / rat(2, 1);
        if keep(&at(&mid))? {
            match runs.last_mut() {
                Some((_, end, _)) if *end == w[0] => *end = w[1].clone(),
                _ => runs.push((w[0].clone(), w[1].clone(), mid)),
            }
        }
    }
    Ok(runs
        .into_iter()
        .map(|(a, b, wit)| {
            let (mut start, mut end) = (at(&a), at(&b));
            if start > end {
                std::mem::swap(&mut start, &mut end);
            }
            SegmentReport { start, end, witness: at(&wit) }
        })
        .collect())
}

/// Critical profiles along the segment from start to end sampled at `steps`
/// evenly spaced fiber points (endpoints included; a single step uses the
/// start). With the `parallel` feature the samples run on the rayon pool;
/// results and the surfaced error are identical either way.
pub fn sweep_family(
    model: &ToricModel,
    start: &[Rat],
    end: &[Rat],
    steps: usize,
    e: &Rat,
    mode: ScalarMode,
    bulk: Option<(&str, &RhoSpec)>,
) -> Result<Vec<CriticalProfile>> {
    if start.len() != 2 || end.len() != 2 {
        return Err(Error::Domain(
            "sweep endpoints must be 2-dimensional fiber points".to_string(),
        ));
    }
    let samples: Vec<Vec<Rat>> = if steps <= 1 {
        vec![start.to_vec()]
    } else {
        let n = rat(steps as i64 - 1, 1);
        (0..steps)
            .map(|k| {
                let t = rat(k as i64, 1) / &n;
                (0..2)
                    .map(|i| &start[i] + (&end[i] - &start[i]) * &t)
                    .collect()
            })
            .collect()
    };
    let run = |u: &Vec<Rat>| -> Result<CriticalProfile> {
        match bulk {
            Some((divisor, rho)) => bulk_profile(model, divisor, rho, u, e, mode),
            None => critical_profile(model, u, e, mode),
        }
    };
    #[cfg(feature = "parallel")]
    let results: Vec<Result<CriticalProfile>> = {
        use rayon::prelude::*;
        samples.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<CriticalProfile>> = samples.iter().map(run).collect();
    // Surface the first error in sample order regardless of scheduling.
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Var;
    use crate::rat::rati;
    use std::collections::BTreeMap;

    fn f2(alpha: Rat) -> ToricModel {
        let params: BTreeMap<Var, Rat> = [(Var::Alpha, alpha)].into_iter().collect();
        ToricModel::registry("F2", &params).unwrap()
    }

    fn s2xs2(alpha: Rat) -> ToricModel {
        let params: BTreeMap<Var, Rat> = [(Var::Alpha, alpha)].into_iter().collect();
        ToricModel::registry("S2xS2", &params).unwrap()
    }

    #[test]
    fn balanced_fiber_of_the_corrected_model_is_unique() {
        let model = f2(rat(1, 4));
        let report = find_balanced(&model, ScalarMode::Exact).unwrap();
        assert_eq!(report.points, vec![vec![rat(5, 8), rat(3, 8)]]);
        assert!(report.segments.is_empty());
    }

    #[test]
    fn balanced_fiber_of_the_product_model_is_unique() {
        let model = s2xs2(rat(1, 4));
        let report = find_balanced(&model, ScalarMode::Exact).unwrap();
        assert_eq!(report.points, vec![vec![rat(3, 8), rat(5, 8)]]);
        assert!(report.segments.is_empty());
    }

    #[test]
    fn degenerate_model_has_a_balanced_segment() {
        let model = ToricModel::registry("F2hat", &BTreeMap::new()).unwrap();
        let report = find_balanced(&model, ScalarMode::Exact).unwrap();
        assert_eq!(report.points, vec![vec![rat(1, 2), rat(1, 2)]]);
        assert_eq!(report.segments.len(), 1);
        let seg = &report.segments[0];
        assert_eq!(seg.start, vec![rat(0, 1), rati(1)]);
        assert_eq!(seg.end, vec![rat(1, 2), rat(1, 2)]);
        // Witness strictly inside, on u1 + u2 = 1 with u2 > 1/2.
        assert_eq!(&seg.witness[0] + &seg.witness[1], rati(1));
        assert!(seg.witness[1] > rat(1, 2));
    }

    #[test]
    fn profile_at_the_symmetric_fiber_lifts_two_points() {
        let model = ToricModel::registry("F2hat", &BTreeMap::new()).unwrap();
        let e = rati(2);
        let profile =
            critical_profile(&model, &[rat(1, 2), rat(1, 2)], &e, ScalarMode::Exact).unwrap();
        assert!(profile.families.is_empty());
        assert_eq!(profile.points.len(), 2);
        assert_eq!(profile.total_multiplicity, 2);
        // Critical values +-4 T^(1/2).
        let values: Vec<NovikovSeries> = profile.points.iter().map(|p| p.value.clone()).collect();
        let expect = NovikovSeries::from_rat_terms(
            ScalarMode::Exact,
            e.clone(),
            &[(rat(1, 2), rati(4))],
        );
        assert!(values.iter().any(|v| v.eq_mod(&expect, &e)));
        assert!(values.iter().any(|v| v.eq_mod(&expect.neg(), &e)));
    }

    #[test]
    fn sweep_reports_only_the_family_on_the_monotone_line() {
        let model = ToricModel::registry("F2hat", &BTreeMap::new()).unwrap();
        let e = rati(2);
        let profiles = sweep_family(
            &model,
            &[rat(9, 20), rat(11, 20)],
            &[rat(1, 4), rat(3, 4)],
            5,
            &e,
            ScalarMode::Exact,
            None,
        )
        .unwrap();
        assert_eq!(profiles.len(), 5);
        for p in &profiles {
            assert_eq!(p.points.len(), 0);
            assert_eq!(p.families.len(), 1);
            assert_eq!(p.families[0].constraints.len(), 1);
            assert_eq!(p.families[0].constraints[0].0, vec![1, 1]);
            assert_eq!(p.families[0].constraints[0].1, Scalar::Rat(rati(-1)));
        }
        // Endpoints included and evenly spaced.
        assert_eq!(profiles[0].u, vec![rat(9, 20), rat(11, 20)]);
        assert_eq!(profiles[4].u, vec![rat(1, 4), rat(3, 4)]);
        assert_eq!(profiles[2].u, vec![rat(7, 20), rat(13, 20)]);
    }

    #[test]
    fn bulk_sweep_splits_every_family() {
        let model = ToricModel::registry("F2hat", &BTreeMap::new()).unwrap();
        let e = rati(2);
        let profiles = sweep_family(
            &model,
            &[rat(9, 20), rat(11, 20)],
            &[rat(2, 5), rat(3, 5)],
            2,
            &e,
            ScalarMode::Exact,
            Some(("S2van", &RhoSpec::Auto)),
        )
        .unwrap();
        for p in &profiles {
            assert!(p.families.is_empty());
            assert_eq!(p.points.len(), 2);
            for pt in &p.points {
                assert!(pt.residual_valuation >= e);
                assert_eq!(pt.residual_valuation, e);
            }
        }
    }

    #[test]
    fn balanced_profiles_carry_multiplicity_four() {
        for model in [f2(rat(1, 4)), s2xs2(rat(1, 4))] {
            let report = find_balanced(&model, ScalarMode::Exact).unwrap();
            let u = report.points[0].clone();
            let profile = critical_profile(&model, &u, &rati(2), ScalarMode::Exact).unwrap();
            assert_eq!(profile.total_multiplicity, model.betti_sum as usize);
        }
    }

    #[test]
    fn bulk_coefficients_are_stable_across_cutoffs() {
        // Raising the cutoff must extend the reported series, never rewrite
        // coefficients below the coarser cutoff.
        let model = ToricModel::registry("F2hat", &BTreeMap::new()).unwrap();
        let u = [rat(2, 5), rat(3, 5)];
        let spec = RhoSpec::Auto;
        let coarse =
            bulk_profile(&model, "S2van", &spec, &u, &rati(2), ScalarMode::Exact).unwrap();
        let fine =
            bulk_profile(&model, "S2van", &spec, &u, &rati(3), ScalarMode::Exact).unwrap();
        assert_eq!(coarse.points.len(), 2);
        assert_eq!(fine.points.len(), 2);
        for (a, b) in coarse.points.iter().zip(&fine.points) {
            for k in 0..2 {
                assert!(
                    a.y[k].eq_mod(&b.y[k], &rati(2)),
                    "coordinate {k} drifts below the coarse cutoff"
                );
            }
            assert!(a.value.eq_mod(&b.value, &rati(2)));
        }
    }

    #[test]
    fn rho_resolution() {
        assert_eq!(
            RhoSpec::Auto.resolve(&[rat(2, 5), rat(3, 5)]).unwrap(),
            rat(1, 10)
        );
        assert!(RhoSpec::Auto.resolve(&[rat(3, 5), rat(2, 5)]).is_err());
        assert!(RhoSpec::Fixed(rat(-1, 2)).resolve(&[rat(1, 2), rat(1, 2)]).is_err());
    }
}
