//! Newton lifting: turns zeros of the leading polynomial system into series
//! solutions of the full critical-point equations, to any requested cutoff.
//! Isolated zeros lift through a two-variable Newton iteration in logarithmic
//! coordinates (multiplicative updates y <- y exp(-delta) keep coordinates
//! unital); a positive-dimensional leading component refines through its
//! binomial constraint, which holds exactly, leaving a one-variable equation
//! along the component that either stays trivial (the family stands) or picks
//! out finitely many points to lift by a one-variable Newton iteration.

use super::leading::{
    leading_system, scalar_poly_roots, unimodular_complement, SolutionFamily,
};
use crate::error::Error;
use crate::novikov::{NovikovSeries, Scalar, ScalarMode, Valuation};
use crate::potential::Potential;
use crate::rat::{fmt_rat, Rat};
use crate::Result;

use num_integer::Integer;
use num_traits::Zero;
use std::collections::BTreeMap;

const MAX_NEWTON_ITERATIONS: usize = 64;

/// A critical point lifted to series coordinates: every logarithmic
/// derivative of the potential vanishes at y to valuation at least the
/// requested cutoff (the verified bound is `residual_valuation`).
#[derive(Clone, Debug)]
pub struct LiftedPoint {
    pub y: Vec<NovikovSeries>,
    pub leading: Vec<Scalar>,
    pub multiplicity: usize,
    pub residual_valuation: Rat,
}

/// Outcome of refining a leading-term family against the full equations.
#[derive(Clone, Debug)]
pub enum FamilyRefinement {
    /// The restricted equation stays monomial (or vanishes), so no isolated
    /// critical points sit on the component; the family stands as a
    /// leading-order locus.
    Stands,
    /// The component collapses to finitely many series critical points.
    Points(Vec<LiftedPoint>),
}

/// Lifts a solution of the leading system at u to a series solution of the
/// full critical-point equations modulo T^e.
pub fn lift_point(
    potential: &Potential,
    u: &[Rat],
    y0: &[Scalar],
    multiplicity: usize,
    e: &Rat,
    mode: ScalarMode,
) -> Result<LiftedPoint> {
    let sys = leading_system(potential, u)?;
    if y0.len() != 2 || y0.iter().any(|c| !c.mode_kind_matches(mode)) {
        return Err(Error::Domain(
            "the starting point must have two coordinates in the run's scalar mode".to_string(),
        ));
    }
    if !sys.is_solution(y0, mode) {
        return Err(Error::Domain(
            "the starting point does not solve the leading-term system".to_string(),
        ));
    }
    // Leading Jacobian in logarithmic coordinates: row i collects the tying
    // terms of the i-th derivative, differentiated once more.
    let mut j0 = [[Scalar::zero(mode), Scalar::zero(mode)], [
        Scalar::zero(mode),
        Scalar::zero(mode),
    ]];
    for (i, tie) in sys.tying().iter().enumerate() {
        for (c, v) in tie {
            let monomial = y0[0].pow_i(v[0], mode)?.mul(&y0[1].pow_i(v[1], mode)?)?;
            for k in 0..2 {
                if v[k] != 0 {
                    let contrib = Scalar::from_rat(&(c * crate::rat::rati(v[k])), mode)
                        .mul(&monomial)?;
                    j0[i][k] = j0[i][k].add(&contrib)?;
                }
            }
        }
    }
    let det0 = j0[0][0].mul(&j0[1][1])?.sub(&j0[0][1].mul(&j0[1][0])?)?;
    if det0.is_zero(mode) {
        return Err(Error::NotLiftable(
            "the leading Jacobian is singular at this point".to_string(),
        ));
    }

    let lams = sys.min_energies().to_vec();
    let lam: Rat = lams.iter().sum();
    let work = e + &lam;
    let derivs = potential.log_derivatives();
    let jpots: Vec<Vec<Potential>> = derivs.iter().map(Potential::log_derivatives).collect();
    let mut y: Vec<NovikovSeries> = y0
        .iter()
        .map(|c| NovikovSeries::constant(c.clone(), mode, work.clone()))
        .collect();

    // Each iteration runs at a staged cutoff near twice the accuracy reached
    // so far (plus the Jacobian's energy shift), because a Newton step can
    // only double the accuracy anyway: early rounds stay short and cheap, and
    // only the last rounds pay for series at the full working precision.
    // Zero-padding the iterate up to the full cutoff after an update is sound
    // here precisely because the next round recomputes every term it relies
    // on; certification happens only at the full cutoff.
    let mut prev_stage: Option<(Rat, Rat)> = None;
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let w = match &prev_stage {
            None => (&lam + e * &crate::rat::rat(1, 4)).min(work.clone()),
            Some((_, p)) => (p * &crate::rat::rati(2) + &lam).min(work.clone()),
        };
        let yw: Vec<NovikovSeries> = y.iter().map(|s| s.truncate(&w)).collect();
        let f: Vec<NovikovSeries> = derivs
            .iter()
            .map(|d| d.evaluate(u, &yw, &w))
            .collect::<Result<_>>()?;
        let floors: Vec<Rat> = f.iter().map(residual_floor).collect();
        // A residual of order v in row i pins the coordinates only to order
        // v minus that row's leading energy (the Jacobian shifts coordinate
        // errors up by exactly that much), so certifying the coordinates
        // below e needs every row to clear e by its own margin.
        let progress = floors
            .iter()
            .zip(&lams)
            .map(|(f, l)| f - l)
            .min()
            .expect("two rows");
        if w == work && progress >= *e {
            return Ok(LiftedPoint {
                y: y.iter().map(|s| s.truncate(e)).collect(),
                leading: y0.to_vec(),
                multiplicity,
                residual_valuation: floors.into_iter().min().expect("two rows"),
            });
        }
        if let Some((pw, pp)) = &prev_stage {
            if w <= *pw && progress <= *pp {
                return Err(Error::NotLiftable(format!(
                    "Newton iteration stalled at residual valuation {}",
                    fmt_rat(floors.iter().min().expect("two rows"))
                )));
            }
        }
        prev_stage = Some((w.clone(), progress));

        let mut j = Vec::with_capacity(2);
        for row in &jpots {
            let entries: Vec<NovikovSeries> = row
                .iter()
                .map(|p| p.evaluate(u, &yw, &w))
                .collect::<Result<_>>()?;
            j.push(entries);
        }
        let det = j[0][0].mul(&j[1][1])?.sub(&j[0][1].mul(&j[1][0])?)?;
        if det.is_zero() {
            return Err(Error::NotLiftable(
                "the Jacobian determinant vanishes to working precision".to_string(),
            ));
        }
        let det_inv = det.invert(&w)?;
        let num = [
            j[1][1].mul(&f[0])?.sub(&j[0][1].mul(&f[1])?)?,
            j[0][0].mul(&f[1])?.sub(&j[1][0].mul(&f[0])?)?,
        ];
        for k in 0..2 {
            let delta = num[k].mul(&det_inv)?;
            if !delta.valuation().is_positive() {
                return Err(Error::NotLiftable(
                    "the Newton step fails to contract".to_string(),
                ));
            }
            let updated = yw[k].mul(&delta.neg().exp(&w)?)?;
            y[k] = NovikovSeries::from_terms(mode, work.clone(), updated.terms().to_vec());
        }
    }
    Err(Error::NotLiftable(format!(
        "no convergence within {MAX_NEWTON_ITERATIONS} Newton iterations"
    )))
}

/// Lower bound on the valuation of a residual series: its leading exponent,
/// or its cutoff when it vanishes entirely.
fn residual_floor(s: &NovikovSeries) -> Rat {
    match s.valuation() {
        Valuation::Finite(v) => v,
        Valuation::Infinite => s.cutoff().clone(),
    }
}

/// Refines a one-parameter leading family against the full equations at u.
/// The method needs one full derivative to be binomial in the family's
/// direction; that equation then holds exactly on y^w0 = tau for a series
/// root tau, and the other derivative restricts to a one-variable equation
/// g(s) = 0 along the component.
pub fn refine_family(
    potential: &Potential,
    u: &[Rat],
    family: &SolutionFamily,
    e: &Rat,
    mode: ScalarMode,
) -> Result<FamilyRefinement> {
    if family.constraints.len() != 1 || family.free_parameters != 1 {
        return Ok(FamilyRefinement::Stands);
    }
    let (w0_vec, branch) = &family.constraints[0];
    let w0 = (w0_vec[0], w0_vec[1]);
    let derivs = potential.log_derivatives();
    let Some((constraint_idx, g_order, target)) = binomial_derivative(&derivs, u, w0)? else {
        return Ok(FamilyRefinement::Stands);
    };
    let other_idx = 1 - constraint_idx;

    // Pass 1: restrict the other derivative at cutoff e. If it vanishes
    // entirely the whole component is critical to this precision; if its
    // leading part is a monomial no zeros exist near the component.
    let v = unimodular_complement(w0);
    let probe = restricted_equation(
        &derivs[other_idx],
        u,
        w0,
        v,
        g_order,
        &target,
        branch,
        e,
        mode,
    )?;
    let Some(lam_g) = probe.leading_valuation() else {
        return Ok(FamilyRefinement::Stands);
    };
    let phi = probe.leading_coefficients(&lam_g, mode);
    if phi.len() < 2 {
        return Ok(FamilyRefinement::Stands);
    }

    // Pass 2: rebuild with enough working precision for the one-variable
    // Newton iteration (each step divides by a series of valuation lam_g).
    let work = e + &lam_g + &lam_g;
    let eq = restricted_equation(
        &derivs[other_idx],
        u,
        w0,
        v,
        g_order,
        &target,
        branch,
        &work,
        mode,
    )?;
    let mut points = Vec::new();
    let phi_poly = eq.leading_coefficients(&lam_g, mode);
    let mut leading_roots = Vec::new();
    for (root, mult) in scalar_poly_roots(&phi_poly, mode)? {
        if root.is_zero(mode) {
            continue;
        }
        if mult > 1 {
            return Err(Error::NotLiftable(
                "a leading root on the component is multiple".to_string(),
            ));
        }
        leading_roots.push(root);
    }
    // The equation's derivative has valuation lam_g, so a residual must
    // clear e by that margin before s itself is certified below e.
    let newton_target = e + &lam_g;
    for s0 in leading_roots {
        let s = eq.newton_lift(&s0, &newton_target, &work, mode)?;
        let y = eq.reconstruct(&s, &work)?;
        // Verify every original equation, not only the restricted one.
        let mut floors = Vec::with_capacity(2);
        for d in &derivs {
            let res = d.evaluate(u, &y, &work)?;
            let floor = residual_floor(&res);
            if floor < *e {
                return Err(Error::NotLiftable(format!(
                    "a refined point fails the residual check at valuation {}",
                    fmt_rat(&floor)
                )));
            }
            floors.push(floor);
        }
        let leading = y
            .iter()
            .map(|s| s.leading().map(|(_, c)| c.clone()).unwrap_or(Scalar::zero(mode)))
            .collect();
        points.push(LiftedPoint {
            y: y.iter().map(|s| s.truncate(e)).collect(),
            leading,
            multiplicity: 1,
            residual_valuation: floors.into_iter().min().expect("two rows"),
        });
    }
    if points.is_empty() {
        return Ok(FamilyRefinement::Stands);
    }
    points.sort_by(|a, b| {
        a.y[0]
            .lex_cmp(&b.y[0])
            .then_with(|| a.y[1].lex_cmp(&b.y[1]))
    });
    Ok(FamilyRefinement::Points(points))
}

/// Finds a derivative that is a two-term Laurent polynomial in the family
/// direction w0 after specializing energies at u. Returns its index, the
/// order g with exponent difference g*w0, and the exact monomial target of
/// y^(g w0). Both terms must share the same energy: the family's tying pair.
fn binomial_derivative(
    derivs: &[Potential],
    u: &[Rat],
    w0: (i64, i64),
) -> Result<Option<(usize, u32, Rat)>> {
    for (i, d) in derivs.iter().enumerate() {
        // Group by (energy at u, vector) and drop cancellations.
        let mut groups: BTreeMap<(Rat, Vec<i64>), Rat> = BTreeMap::new();
        for t in d.terms() {
            *groups
                .entry((t.energy.eval_u(u)?, t.vector.clone()))
                .or_insert_with(Rat::zero) += &t.coeff;
        }
        let terms: Vec<((Rat, Vec<i64>), Rat)> =
            groups.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if terms.len() != 2 {
            continue;
        }
        let ((ea, va), ca) = &terms[0];
        let ((eb, vb), cb) = &terms[1];
        if ea != eb {
            // Unequal energies would force non-unit coordinates; such a
            // binomial cannot pin down this family's fiber.
            continue;
        }
        let w = (va[0] - vb[0], va[1] - vb[1]);
        let g = w.0.abs().gcd(&w.1.abs());
        if g == 0 {
            continue;
        }
        let mut dir = (w.0 / g, w.1 / g);
        // c_a y^va + c_b y^vb = 0 iff y^(va - vb) = -c_b/c_a.
        let mut target = -(cb / ca);
        if dir.0 < 0 || (dir.0 == 0 && dir.1 < 0) {
            dir = (-dir.0, -dir.1);
            target = target.recip();
        }
        if dir == w0 {
            return Ok(Some((i, g as u32, target)));
        }
    }
    Ok(None)
}

/// The restriction of a derivative to the component y^(g w0) = target, in
/// coordinates (z, s) with z = y^w0 pinned to the series root tau and s free:
/// a Laurent polynomial in s with series coefficients.
struct RestrictedEquation {
    coeffs: BTreeMap<i64, NovikovSeries>,
    tau: NovikovSeries,
    w0: (i64, i64),
    v: (i64, i64),
}

#[allow(clippy::too_many_arguments)]
fn restricted_equation(
    derivative: &Potential,
    u: &[Rat],
    w0: (i64, i64),
    v: (i64, i64),
    g_order: u32,
    target: &Rat,
    branch: &Scalar,
    cutoff: &Rat,
    mode: ScalarMode,
) -> Result<RestrictedEquation> {
    // tau solves z^g = target with the family's leading branch. The target is
    // an exact constant, so give it enough headroom for later powers.
    let target_series = NovikovSeries::constant(
        Scalar::from_rat(target, mode),
        mode,
        cutoff.clone() + crate::rat::rati(1),
    );
    let tau = target_series.nth_root(g_order, branch, cutoff)?;
    let mut coeffs: BTreeMap<i64, NovikovSeries> = BTreeMap::new();
    for t in derivative.terms() {
        let energy = t.energy.eval_u(u)?;
        if energy >= *cutoff {
            continue;
        }
        let m = &t.vector;
        let d_tau = v.1 * m[0] - v.0 * m[1];
        let d_s = w0.0 * m[1] - w0.1 * m[0];
        let factor = tau
            .pow_i(d_tau, &(cutoff - &energy))?
            .mul_monomial(&energy, &Scalar::from_rat(&t.coeff, mode));
        let entry = coeffs
            .entry(d_s)
            .or_insert_with(|| NovikovSeries::zero(mode, cutoff.clone()));
        *entry = entry.add(&factor)?;
    }
    coeffs.retain(|_, c| !c.is_zero());
    Ok(RestrictedEquation { coeffs, tau, w0, v })
}

impl RestrictedEquation {
    /// Minimal valuation over all coefficients; None when they all vanish.
    fn leading_valuation(&self) -> Option<Rat> {
        self.coeffs
            .values()
            .filter_map(|c| c.valuation().finite().cloned())
            .min()
    }

    /// Scalar coefficients at the leading valuation, as an ordinary
    /// polynomial in s (cleared by the minimal s-exponent).
    fn leading_coefficients(&self, lam: &Rat, mode: ScalarMode) -> Vec<Scalar> {
        let live: Vec<(&i64, Scalar)> = self
            .coeffs
            .iter()
            .map(|(d, c)| (d, c.coefficient_at(lam)))
            .filter(|(_, c)| !c.is_zero(mode))
            .collect();
        let Some(dmin) = live.iter().map(|(d, _)| **d).min() else {
            return Vec::new();
        };
        let dmax = live.iter().map(|(d, _)| **d).max().expect("nonempty");
        let mut out = vec![Scalar::zero(mode); (dmax - dmin + 1) as usize];
        for (d, c) in live {
            out[(*d - dmin) as usize] = c;
        }
        out
    }

    /// Evaluates g and its logarithmic s-derivative at the series s.
    fn eval_with_derivative(
        &self,
        s: &NovikovSeries,
        work: &Rat,
    ) -> Result<(NovikovSeries, NovikovSeries)> {
        let mode = s.mode();
        let mut g = NovikovSeries::zero(mode, work.clone());
        let mut h = NovikovSeries::zero(mode, work.clone());
        for (d, c) in &self.coeffs {
            let term = c.mul(&s.pow_i(*d, work)?)?;
            g = g.add(&term)?;
            if *d != 0 {
                h = h.add(&term.mul_rat(&crate::rat::rati(*d)))?;
            }
        }
        Ok((g, h))
    }

    /// One-variable Newton iteration from the leading root s0: repeats
    /// s <- s exp(-g / (s dg/ds)) until g vanishes past the target order.
    fn newton_lift(
        &self,
        s0: &Scalar,
        target: &Rat,
        work: &Rat,
        mode: ScalarMode,
    ) -> Result<NovikovSeries> {
        let lam = self.leading_valuation().unwrap_or_else(|| work.clone());
        let mut s = NovikovSeries::constant(s0.clone(), mode, work.clone());
        // Staged cutoffs, as in the two-variable iteration: a residual of
        // order v pins s to order v - lam, a step doubles that, and only the
        // final rounds run at the full working precision.
        let mut prev_stage: Option<(Rat, Rat)> = None;
        for _ in 0..MAX_NEWTON_ITERATIONS {
            let w = match &prev_stage {
                None => (&lam + target * &crate::rat::rat(1, 4)).min(work.clone()),
                Some((_, floor)) => {
                    ((floor - &lam) * &crate::rat::rati(2) + &lam).min(work.clone())
                }
            };
            let sw = s.truncate(&w);
            let (g, h) = self.eval_with_derivative(&sw, &w)?;
            let floor = residual_floor(&g);
            if w == *work && floor >= *target {
                return Ok(s);
            }
            if let Some((pw, pf)) = &prev_stage {
                if w <= *pw && floor <= *pf {
                    return Err(Error::NotLiftable(format!(
                        "component Newton iteration stalled at valuation {}",
                        fmt_rat(&floor)
                    )));
                }
            }
            prev_stage = Some((w.clone(), floor));
            if h.is_zero() {
                return Err(Error::NotLiftable(
                    "the component equation is critical along the fiber".to_string(),
                ));
            }
            let delta = g.mul(&h.invert(&w)?)?;
            if !delta.valuation().is_positive() {
                return Err(Error::NotLiftable(
                    "the component Newton step fails to contract".to_string(),
                ));
            }
            let updated = sw.mul(&delta.neg().exp(&w)?)?;
            s = NovikovSeries::from_terms(mode, work.clone(), updated.terms().to_vec());
        }
        Err(Error::NotLiftable(format!(
            "no component convergence within {MAX_NEWTON_ITERATIONS} Newton iterations"
        )))
    }

    /// Series coordinates of the point with y^w0 = tau and complement s.
    fn reconstruct(&self, s: &NovikovSeries, work: &Rat) -> Result<Vec<NovikovSeries>> {
        let y1 = self
            .tau
            .pow_i(self.v.1, work)?
            .mul(&s.pow_i(-self.w0.1, work)?)?;
        let y2 = self
            .tau
            .pow_i(-self.v.0, work)?
            .mul(&s.pow_i(self.w0.0, work)?)?;
        Ok(vec![y1, y2])
    }
}
