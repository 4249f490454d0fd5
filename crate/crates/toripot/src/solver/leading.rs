//! Leading-term extraction: at a fixed fiber point u every logarithmic
//! derivative of the potential has a minimal energy level, and the terms at
//! that level assemble into a Laurent polynomial over the rationals. Critical
//! points at first order are the common torus zeros of those polynomials.
//! This module builds the polynomial system and solves it exactly (rational
//! roots) or numerically (Durand-Kerner), reporting isolated zeros with
//! multiplicities and positive-dimensional components as monomial-constraint
//! families with sample witnesses.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::Zero;

use super::poly::{
    complex_roots, poly_gcd, rat_c64, rational_roots, resultant_y1, trim, BiPoly, RESIDUAL_FLOOR,
};
use crate::error::Error;
use crate::novikov::{Scalar, ScalarMode};
use crate::potential::Potential;
use crate::rat::{rat, rati, Rat};
use crate::Result;

/// The minimal-energy data of every logarithmic derivative at a fiber point.
#[derive(Clone, Debug)]
pub struct LeadingTermSystem {
    u: Vec<Rat>,
    min_energies: Vec<Rat>,
    tying: Vec<Vec<(Rat, Vec<i64>)>>,
    polys: Vec<BiPoly>,
}

impl LeadingTermSystem {
    pub fn u(&self) -> &[Rat] {
        &self.u
    }

    /// Minimal energy of the i-th logarithmic derivative at u.
    pub fn min_energies(&self) -> &[Rat] {
        &self.min_energies
    }

    /// Terms achieving the minimum: (assembled coefficient, exponent vector).
    pub fn tying(&self) -> &[Vec<(Rat, Vec<i64>)>] {
        &self.tying
    }

    /// Laurent-cleared leading polynomials (same zero sets on the torus).
    pub fn polys(&self) -> &[BiPoly] {
        &self.polys
    }

    /// Does the point solve every leading polynomial (in the mode's sense)?
    pub fn is_solution(&self, y: &[Scalar], mode: ScalarMode) -> bool {
        y.len() == 2 && self.polys.iter().all(|p| vanishes_at(p, &y[0], &y[1], mode))
    }
}

/// A positive-dimensional piece of the leading solution set, cut out by
/// monomial constraints y^w = value, together with sample solutions.
#[derive(Clone, Debug)]
pub struct SolutionFamily {
    pub constraints: Vec<(Vec<i64>, Scalar)>,
    pub free_parameters: usize,
    pub witnesses: Vec<Vec<Scalar>>,
}

/// Zeros of the leading system: isolated points with multiplicities, plus
/// families for positive-dimensional components.
#[derive(Clone, Debug, Default)]
pub struct LeadingSolutions {
    pub points: Vec<(Vec<Scalar>, usize)>,
    pub families: Vec<SolutionFamily>,
}

/// Extracts the leading polynomial system of the potential at u. Coefficients
/// of terms that tie at the minimal energy are summed per exponent vector; a
/// level that cancels completely is skipped in favour of the next one, and a
/// derivative with no surviving terms at all is a degenerate direction.
pub fn leading_system(p: &Potential, u: &[Rat]) -> Result<LeadingTermSystem> {
    if p.dim() != 2 {
        return Err(Error::Unsupported(format!(
            "leading-term solving is implemented for 2 variables, got {}",
            p.dim()
        )));
    }
    if u.len() != p.dim() {
        return Err(Error::Domain(format!(
            "fiber point has {} coordinates, expected {}",
            u.len(),
            p.dim()
        )));
    }
    let mut min_energies = Vec::with_capacity(p.dim());
    let mut tying = Vec::with_capacity(p.dim());
    let mut polys = Vec::with_capacity(p.dim());
    for (i, d) in p.log_derivatives().iter().enumerate() {
        // Group by energy value at u, then by exponent vector. Class tags
        // are irrelevant here: only the summed coefficient matters.
        let mut levels: BTreeMap<Rat, BTreeMap<Vec<i64>, Rat>> = BTreeMap::new();
        for t in d.terms() {
            let e = t.energy.eval_u(u)?;
            *levels
                .entry(e)
                .or_default()
                .entry(t.vector.clone())
                .or_insert_with(Rat::zero) += &t.coeff;
        }
        let leading = levels.into_iter().find_map(|(e, groups)| {
            let terms: Vec<(Rat, Vec<i64>)> = groups
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(v, c)| (c, v))
                .collect();
            (!terms.is_empty()).then_some((e, terms))
        });
        let Some((e, terms)) = leading else {
            return Err(Error::DegenerateDirection {
                index: i + 1,
                reason: "every term in this direction cancels".to_string(),
            });
        };
        polys.push(clear_laurent(&terms));
        min_energies.push(e);
        tying.push(terms);
    }
    Ok(LeadingTermSystem { u: u.to_vec(), min_energies, tying, polys })
}

/// Shifts a set of Laurent monomials by the componentwise minimal exponent,
/// giving an ordinary polynomial with the same torus zeros.
fn clear_laurent(terms: &[(Rat, Vec<i64>)]) -> BiPoly {
    let s1 = terms.iter().map(|(_, v)| v[0]).min().unwrap_or(0);
    let s2 = terms.iter().map(|(_, v)| v[1]).min().unwrap_or(0);
    BiPoly::from_terms(
        terms
            .iter()
            .map(|(c, v)| (((v[0] - s1) as usize, (v[1] - s2) as usize), c.clone()))
            .collect(),
    )
}

/// Solves the leading polynomial system on the torus. Isolated zeros are
/// found by eliminating y1 with an exact resultant and enumerating roots;
/// an identically vanishing resultant signals a positive-dimensional
/// component, which is factored through a binomial equation into monomial
/// constraints. Exact mode refuses (NotRepresentable) when true zeros exist
/// outside the rationals; float mode enumerates complex zeros.
pub fn solve_leading(sys: &LeadingTermSystem, mode: ScalarMode) -> Result<LeadingSolutions> {
    let p1 = &sys.polys()[0];
    let p2 = &sys.polys()[1];
    // A single monomial never vanishes on the torus.
    if p1.n_terms() == 1 || p2.n_terms() == 1 {
        return Ok(LeadingSolutions::default());
    }
    // Both equations free of the same variable: common roots of univariate
    // polynomials, with the other coordinate free.
    if p1.deg1() == 0 && p2.deg1() == 0 {
        return shared_univariate(p1, p2, 1, mode);
    }
    if p1.deg2() == 0 && p2.deg2() == 0 {
        return shared_univariate(&p1.transpose(), &p2.transpose(), 0, mode);
    }
    let r = resultant_y1(p1, p2);
    if r.is_empty() {
        return component_solutions(sys, mode);
    }
    // Coordinates are units, so the y2^k factor planted by Laurent clearing
    // is stripped exactly before any numeric root finding sees it.
    let shift = r.iter().position(|c| !c.is_zero()).unwrap_or(0);
    let mut out = LeadingSolutions::default();
    for (r2, mu) in univariate_roots(&r[shift..], mode)? {
        if r2.is_zero(mode) {
            continue;
        }
        specialized_points(sys, &r2, mu, mode, &mut out)?;
    }
    sort_solutions(&mut out);
    Ok(out)
}

/// Roots of an exact univariate polynomial in the requested mode, zeros
/// included. Exact mode insists on a full rational factorization.
fn univariate_roots(coeffs: &[Rat], mode: ScalarMode) -> Result<Vec<(Scalar, usize)>> {
    match mode {
        ScalarMode::Exact => {
            let (roots, leftover) = rational_roots(coeffs);
            if leftover > 0 {
                return Err(Error::NotRepresentable(
                    "the leading system has roots outside the rationals; rerun in float mode"
                        .to_string(),
                ));
            }
            Ok(roots.into_iter().map(|(r, m)| (Scalar::Rat(r), m)).collect())
        }
        ScalarMode::Float { eps } => {
            let cx: Vec<Complex64> = coeffs.iter().map(rat_c64).collect();
            Ok(complex_roots(&cx, eps)
                .into_iter()
                .map(|(r, m)| (Scalar::Cx(r), m))
                .collect())
        }
    }
}

/// Roots of a univariate polynomial with scalar coefficients (used for
/// restrictions to components, where coefficients live in the scalar mode).
pub(crate) fn scalar_poly_roots(
    coeffs: &[Scalar],
    mode: ScalarMode,
) -> Result<Vec<(Scalar, usize)>> {
    match mode {
        ScalarMode::Exact => {
            let rats: Vec<Rat> = coeffs
                .iter()
                .map(|c| c.as_rat().cloned().ok_or(Error::ModeMismatch))
                .collect::<Result<_>>()?;
            univariate_roots(&rats, mode)
        }
        ScalarMode::Float { eps } => {
            let cx: Vec<Complex64> = coeffs.iter().map(Scalar::to_complex).collect();
            Ok(complex_roots(&cx, eps)
                .into_iter()
                .map(|(r, m)| (Scalar::Cx(r), m))
                .collect())
        }
    }
}

/// Both leading polynomials depend on a single shared variable (index
/// `bound`); their common roots constrain that variable and leave the other
/// one free, giving a family per common root.
fn shared_univariate(
    p1: &BiPoly,
    p2: &BiPoly,
    bound: usize,
    mode: ScalarMode,
) -> Result<LeadingSolutions> {
    // After the transposition applied by the caller both polys live in y2.
    let coeffs = |p: &BiPoly| -> Vec<Rat> {
        let mut out = vec![Rat::zero(); p.deg2() + 1];
        for ((_, j), c) in p.terms() {
            out[*j] += c;
        }
        trim(&mut out);
        out
    };
    let common = match mode {
        ScalarMode::Exact => poly_gcd(&coeffs(p1), &coeffs(p2)),
        ScalarMode::Float { .. } => coeffs(p1),
    };
    let mut out = LeadingSolutions::default();
    for (root, _) in univariate_roots(&common, mode)? {
        if root.is_zero(mode) {
            continue;
        }
        if let ScalarMode::Float { .. } = mode {
            // The float path enumerates roots of p1 and keeps those where p2
            // also vanishes within tolerance.
            let v = root.to_complex();
            let other = p2.eval_point_complex(Complex64::new(1.0, 0.0), v);
            let scale = p2.eval_magnitude(1.0, v.norm()).max(1.0);
            if other.norm() > mode.eps().max(RESIDUAL_FLOOR) * scale {
                continue;
            }
        }
        let mut constraint = vec![0i64; 2];
        constraint[bound] = 1;
        let witnesses = [rati(1), rati(2), rat(1, 2)]
            .iter()
            .map(|t| {
                let mut y = vec![Scalar::from_rat(t, mode); 2];
                y[bound] = root.clone();
                y
            })
            .collect();
        out.families.push(SolutionFamily {
            constraints: vec![(constraint, root)],
            free_parameters: 1,
            witnesses,
        });
    }
    sort_solutions(&mut out);
    Ok(out)
}

/// Points (and degenerate sub-families) of the system above one root r2 of
/// the eliminating resultant. The resultant root's multiplicity mu is
/// distributed over the surviving partners proportionally to their own
/// multiplicities.
fn specialized_points(
    sys: &LeadingTermSystem,
    r2: &Scalar,
    mu: usize,
    mode: ScalarMode,
    out: &mut LeadingSolutions,
) -> Result<()> {
    let p1 = &sys.polys()[0];
    let p2 = &sys.polys()[1];
    let (s1, s2): (Vec<Scalar>, Vec<Scalar>) = match (mode, r2) {
        (ScalarMode::Exact, Scalar::Rat(r)) => (
            p1.eval_y2(r).into_iter().map(Scalar::Rat).collect(),
            p2.eval_y2(r).into_iter().map(Scalar::Rat).collect(),
        ),
        (ScalarMode::Float { .. }, s) => {
            let t = s.to_complex();
            (
                p1.eval_y2_complex(t).into_iter().map(Scalar::Cx).collect(),
                p2.eval_y2_complex(t).into_iter().map(Scalar::Cx).collect(),
            )
        }
        _ => return Err(Error::ModeMismatch),
    };
    let degree = |cs: &[Scalar]| cs.iter().rposition(|c| !c.is_zero(mode));
    let (d1, d2) = (degree(&s1), degree(&s2));
    if d1.is_none() && d2.is_none() {
        // Both equations vanish identically on the line y2 = r2.
        let witnesses = [rati(1), rati(2), rat(1, 2)]
            .iter()
            .map(|t| vec![Scalar::from_rat(t, mode), r2.clone()])
            .collect();
        out.families.push(SolutionFamily {
            constraints: vec![(vec![0, 1], r2.clone())],
            free_parameters: 1,
            witnesses,
        });
        return Ok(());
    }
    // Enumerate y1 candidates from whichever specialization has positive
    // degree, then keep those where both polynomials vanish.
    let candidate = match (d1, d2) {
        (Some(d), _) if d > 0 => &s1,
        (_, Some(d)) if d > 0 => &s2,
        _ => return Ok(()), // two nonzero constants: no common zero
    };
    let survivors: Vec<(Scalar, usize)> = scalar_poly_roots(candidate, mode)?
        .into_iter()
        .filter(|(s, _)| !s.is_zero(mode) && vanishes_at(p1, s, r2, mode) && vanishes_at(p2, s, r2, mode))
        .collect();
    let total: usize = survivors.iter().map(|(_, nu)| nu).sum();
    for (s, nu) in survivors {
        let weighted = mu * nu;
        if !weighted.is_multiple_of(total) {
            return Err(Error::Unsupported(
                "cannot distribute the resultant multiplicity over partner roots".to_string(),
            ));
        }
        out.points.push((vec![s, r2.clone()], weighted / total));
    }
    Ok(())
}

/// Does the polynomial vanish at the point, in the given mode's sense?
fn vanishes_at(p: &BiPoly, y1: &Scalar, y2: &Scalar, mode: ScalarMode) -> bool {
    match mode {
        ScalarMode::Exact => match (y1.as_rat(), y2.as_rat()) {
            (Some(a), Some(b)) => p.eval_point(a, b).is_zero(),
            _ => false,
        },
        ScalarMode::Float { eps } => {
            let (a, b) = (y1.to_complex(), y2.to_complex());
            let scale = p.eval_magnitude(a.norm(), b.norm()).max(1.0);
            p.eval_point_complex(a, b).norm() <= eps.max(RESIDUAL_FLOOR) * scale
        }
    }
}

/// The resultant vanished identically: the solution set has a component of
/// positive dimension. One of the equations must be binomial; its zero set
/// splits into monomial components y^w0 = s, and the other equation either
/// vanishes identically on a component (a family), excludes it, or cuts
/// isolated points out of it.
fn component_solutions(sys: &LeadingTermSystem, mode: ScalarMode) -> Result<LeadingSolutions> {
    let (bi, other) = if sys.polys()[0].n_terms() == 2 {
        (0, 1)
    } else if sys.polys()[1].n_terms() == 2 {
        (1, 0)
    } else {
        return Err(Error::Unsupported(
            "the leading system has a positive-dimensional component but no binomial equation"
                .to_string(),
        ));
    };
    let (w0, g, target) = binomial_constraint(&sys.polys()[bi], mode)?;
    let v = unimodular_complement(w0);
    let mut out = LeadingSolutions::default();
    for s in component_roots(&target, g, mode)? {
        match restrict_to_component(&sys.tying()[other], w0, v, &s, mode)? {
            Restriction::IdenticallyZero => {
                let witnesses = [rati(1), rati(2), rat(1, 2)]
                    .iter()
                    .map(|t| {
                        point_on_component(w0, v, &s, &Scalar::from_rat(t, mode), mode)
                    })
                    .collect::<Result<Vec<_>>>()?;
                out.families.push(SolutionFamily {
                    constraints: vec![(vec![w0.0, w0.1], s.clone())],
                    free_parameters: 1,
                    witnesses,
                });
            }
            Restriction::NoZeros => {}
            Restriction::Roots(roots) => {
                for (t, m) in roots {
                    out.points.push((point_on_component(w0, v, &s, &t, mode)?, m));
                }
            }
        }
    }
    sort_solutions(&mut out);
    Ok(out)
}

/// Reads a binomial c_a y^a + c_b y^b = 0 as y^(g w0) = target with w0
/// primitive and lexicographically positive.
fn binomial_constraint(
    p: &BiPoly,
    mode: ScalarMode,
) -> Result<((i64, i64), u32, Scalar)> {
    let terms: Vec<(&(usize, usize), &Rat)> = p.terms().collect();
    debug_assert_eq!(terms.len(), 2);
    let ((a1, a2), ca) = (terms[0].0, terms[0].1);
    let ((b1, b2), cb) = (terms[1].0, terms[1].1);
    let w = (*a1 as i64 - *b1 as i64, *a2 as i64 - *b2 as i64);
    // c_a y^a + c_b y^b = 0 on the torus iff y^(a-b) = -c_b / c_a.
    let mut target = Scalar::from_rat(&(-cb / ca), mode);
    let g = w.0.abs().gcd(&w.1.abs());
    let mut w0 = (w.0 / g, w.1 / g);
    if w0.0 < 0 || (w0.0 == 0 && w0.1 < 0) {
        w0 = (-w0.0, -w0.1);
        target = target.inv(mode)?;
    }
    Ok((w0, g as u32, target))
}

/// The g solutions of z^g = target that the mode can represent. Exact mode
/// handles g = 1 and rational square roots for g = 2; anything beyond needs
/// complex arithmetic and is refused rather than silently truncated.
fn component_roots(target: &Scalar, g: u32, mode: ScalarMode) -> Result<Vec<Scalar>> {
    match mode {
        ScalarMode::Exact => match g {
            1 => Ok(vec![target.clone()]),
            2 => {
                let r = target.nth_root(2, mode).map_err(|_| {
                    Error::NotRepresentable(format!(
                        "component constraint z^2 = {target} has no rational solution; \
                         rerun in float mode"
                    ))
                })?;
                Ok(vec![r.clone(), r.neg()])
            }
            _ => Err(Error::NotRepresentable(format!(
                "component constraint of order {g} needs complex roots; rerun in float mode"
            ))),
        },
        ScalarMode::Float { .. } => {
            let t = target.to_complex();
            let mag = t.norm().powf(1.0 / f64::from(g));
            let arg = t.arg();
            Ok((0..g)
                .map(|k| {
                    let theta = (arg + 2.0 * std::f64::consts::PI * f64::from(k)) / f64::from(g);
                    Scalar::Cx(Complex64::from_polar(mag, theta))
                })
                .collect())
        }
    }
}

enum Restriction {
    IdenticallyZero,
    NoZeros,
    Roots(Vec<(Scalar, usize)>),
}

/// Restricts a tying-term list to the component y^w0 = s. With t the
/// complementary torus coordinate, each monomial y^m becomes
/// s^(v2 m1 - v1 m2) t^(w01 m2 - w02 m1); grouping by the t-exponent gives a
/// univariate Laurent polynomial whose torus zeros are the solutions.
fn restrict_to_component(
    tying: &[(Rat, Vec<i64>)],
    w0: (i64, i64),
    v: (i64, i64),
    s: &Scalar,
    mode: ScalarMode,
) -> Result<Restriction> {
    let mut coeffs: BTreeMap<i64, Scalar> = BTreeMap::new();
    for (c, m) in tying {
        let d1 = v.1 * m[0] - v.0 * m[1];
        let d2 = w0.0 * m[1] - w0.1 * m[0];
        let term = Scalar::from_rat(c, mode).mul(&s.pow_i(d1, mode)?)?;
        let entry = coeffs.entry(d2).or_insert_with(|| Scalar::zero(mode));
        *entry = entry.add(&term)?;
    }
    coeffs.retain(|_, c| !c.is_zero(mode));
    if coeffs.is_empty() {
        return Ok(Restriction::IdenticallyZero);
    }
    if coeffs.len() == 1 {
        return Ok(Restriction::NoZeros);
    }
    let dmin = *coeffs.keys().next().expect("nonempty");
    let dmax = *coeffs.keys().next_back().expect("nonempty");
    let mut poly = vec![Scalar::zero(mode); (dmax - dmin + 1) as usize];
    for (d, c) in &coeffs {
        poly[(d - dmin) as usize] = c.clone();
    }
    let roots = scalar_poly_roots(&poly, mode)?
        .into_iter()
        .filter(|(t, _)| !t.is_zero(mode))
        .collect();
    Ok(Restriction::Roots(roots))
}

/// The point with y^w0 = s and complementary coordinate t.
fn point_on_component(
    w0: (i64, i64),
    v: (i64, i64),
    s: &Scalar,
    t: &Scalar,
    mode: ScalarMode,
) -> Result<Vec<Scalar>> {
    let y1 = s.pow_i(v.1, mode)?.mul(&t.pow_i(-w0.1, mode)?)?;
    let y2 = s.pow_i(-v.0, mode)?.mul(&t.pow_i(w0.0, mode)?)?;
    Ok(vec![y1, y2])
}

/// An integer vector v with det [[w0], [v]] = 1, from the extended gcd of the
/// primitive vector w0.
pub(crate) fn unimodular_complement(w0: (i64, i64)) -> (i64, i64) {
    let (g, a, b) = egcd(w0.0, w0.1);
    debug_assert_eq!(g, 1, "w0 must be primitive");
    (-b, a)
}

/// Extended gcd: returns (g, x, y) with x*a + y*b = g >= 0.
fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = egcd(b, a.rem_euclid(b));
        (g, y, x - (a.div_euclid(b)) * y)
    }
}

/// Fixes a deterministic order on points (coordinatewise) and families (by
/// constraint data).
fn sort_solutions(out: &mut LeadingSolutions) {
    out.points.sort_by(|(a, _), (b, _)| {
        a[0].total_cmp(&b[0]).then_with(|| a[1].total_cmp(&b[1]))
    });
    out.families.sort_by(|a, b| {
        let ka = &a.constraints[0];
        let kb = &b.constraints[0];
        ka.0.cmp(&kb.0).then_with(|| ka.1.total_cmp(&kb.1))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{AffineExpr, PotentialTerm};

    fn expr(text: &str) -> AffineExpr {
        AffineExpr::parse(text).unwrap()
    }

    /// The reference surface potential with correction, parameters bound to
    /// alpha = 0: terms at the symmetric fiber tie at energy 1/2.
    fn degenerate_potential() -> Potential {
        Potential::new(
            2,
            vec![
                PotentialTerm::new(rati(1), expr("u1"), vec![1, 0]),
                PotentialTerm::new(rati(1), expr("u2"), vec![0, 1]),
                PotentialTerm::new(rati(1), expr("2 - u1 - 2u2"), vec![-1, -2]),
                PotentialTerm::new(rati(2), expr("1 - u2"), vec![0, -1]),
            ],
        )
    }

    #[test]
    fn symmetric_fiber_has_two_simple_points() {
        let u = [rat(1, 2), rat(1, 2)];
        let sys = leading_system(&degenerate_potential(), &u).unwrap();
        assert_eq!(sys.min_energies(), &[rat(1, 2), rat(1, 2)]);
        let sol = solve_leading(&sys, ScalarMode::Exact).unwrap();
        assert!(sol.families.is_empty());
        assert_eq!(sol.points.len(), 2);
        let expect = [
            (vec![Scalar::Rat(rat(-1, 2)), Scalar::Rat(rati(-2))], 1),
            (vec![Scalar::Rat(rat(1, 2)), Scalar::Rat(rati(2))], 1),
        ];
        assert_eq!(sol.points[0], expect[0]);
        assert_eq!(sol.points[1], expect[1]);
    }

    #[test]
    fn symmetric_fiber_float_agrees() {
        let u = [rat(1, 2), rat(1, 2)];
        let sys = leading_system(&degenerate_potential(), &u).unwrap();
        let sol = solve_leading(&sys, ScalarMode::float_default()).unwrap();
        assert_eq!(sol.points.len(), 2);
        let got = sol.points[1].0[0].to_complex();
        assert!((got - Complex64::new(0.5, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn monotone_line_gives_one_family() {
        // On u1 = 1 - u2 with u2 > 1/2 the first derivative ties into a
        // binomial and the second excludes one branch.
        let u = [rat(2, 5), rat(3, 5)];
        let sys = leading_system(&degenerate_potential(), &u).unwrap();
        let sol = solve_leading(&sys, ScalarMode::Exact).unwrap();
        assert!(sol.points.is_empty());
        assert_eq!(sol.families.len(), 1);
        let fam = &sol.families[0];
        assert_eq!(fam.free_parameters, 1);
        assert_eq!(fam.constraints, vec![(vec![1, 1], Scalar::Rat(rati(-1)))]);
        assert_eq!(fam.witnesses.len(), 3);
        for w in &fam.witnesses {
            let prod = w[0].mul(&w[1]).unwrap();
            assert_eq!(prod, Scalar::Rat(rati(-1)));
        }
    }

    #[test]
    fn cancelling_level_is_skipped() {
        // Two classes cancel at energy u1; the next level u1 + 1/4 leads.
        let p = Potential::new(
            2,
            vec![
                PotentialTerm::new(rati(1), expr("u1"), vec![0, -1]).with_class("a"),
                PotentialTerm::new(rati(-1), expr("u1"), vec![0, -1]).with_class("b"),
                PotentialTerm::new(rati(1), expr("u1 + 1/4"), vec![0, -1]),
                PotentialTerm::new(rati(1), expr("u2"), vec![0, 1]),
                PotentialTerm::new(rati(1), expr("u1"), vec![1, 0]),
                PotentialTerm::new(rati(-1), expr("u1"), vec![-1, 0]),
            ],
        );
        let sys = leading_system(&p, &[rat(1, 4), rat(1, 2)]).unwrap();
        assert_eq!(sys.min_energies()[1], rat(1, 2));
        assert_eq!(sys.tying()[1].len(), 2);
    }

    #[test]
    fn empty_direction_is_degenerate() {
        let p = Potential::new(
            2,
            vec![PotentialTerm::new(rati(1), expr("u1"), vec![1, 0])],
        );
        let err = leading_system(&p, &[rat(1, 4), rat(1, 2)]);
        assert!(matches!(err, Err(Error::DegenerateDirection { index: 2, .. })));
    }

    #[test]
    fn product_fiber_has_four_unit_points() {
        // Two independent binomials y1^2 = 1, y2^2 = 1.
        let p = Potential::new(
            2,
            vec![
                PotentialTerm::new(rati(1), expr("u1"), vec![1, 0]),
                PotentialTerm::new(rati(1), expr("1 - alpha - u1"), vec![-1, 0]),
                PotentialTerm::new(rati(1), expr("u2"), vec![0, 1]),
                PotentialTerm::new(rati(1), expr("1 + alpha - u2"), vec![0, -1]),
            ],
        )
        .bind(&[(crate::potential::Var::Alpha, rat(1, 4))].into_iter().collect());
        let u = [rat(3, 8), rat(5, 8)];
        let sys = leading_system(&p, &u).unwrap();
        let sol = solve_leading(&sys, ScalarMode::Exact).unwrap();
        assert!(sol.families.is_empty());
        assert_eq!(sol.points.len(), 4);
        let total: usize = sol.points.iter().map(|(_, m)| m).sum();
        assert_eq!(total, 4);
        for (y, m) in &sol.points {
            assert_eq!(*m, 1);
            for c in y {
                let sq = c.mul(c).unwrap();
                assert_eq!(sq, Scalar::Rat(rati(1)));
            }
        }
    }

    #[test]
    fn irrational_roots_are_refused_exactly() {
        // Derivatives y1 - 2 y1^{-1} and y2 - y2^{-1}: the minus signs come
        // from the exponent factors, so both stored coefficients are positive.
        let p = Potential::new(
            2,
            vec![
                PotentialTerm::new(rati(1), expr("u1"), vec![1, 0]),
                PotentialTerm::new(rati(2), expr("u1"), vec![-1, 0]),
                PotentialTerm::new(rati(1), expr("u2"), vec![0, 1]),
                PotentialTerm::new(rati(1), expr("u2"), vec![0, -1]),
            ],
        );
        let sys = leading_system(&p, &[rat(1, 2), rat(1, 2)]).unwrap();
        let err = solve_leading(&sys, ScalarMode::Exact);
        assert!(matches!(err, Err(Error::NotRepresentable(_))));
        let sol = solve_leading(&sys, ScalarMode::float_default()).unwrap();
        assert_eq!(sol.points.len(), 4);
        let r2 = 2.0f64.sqrt();
        assert!(sol
            .points
            .iter()
            .any(|(y, _)| (y[0].to_complex() - Complex64::new(r2, 0.0)).norm() < 1e-7));
    }
}
