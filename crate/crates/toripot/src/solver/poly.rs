//! Polynomial utilities for the leading-term solver: univariate rational
//! root enumeration with multiplicities, Durand-Kerner complex roots for
//! float mode, and exact bivariate resultants by evaluation at rational
//! points, Gaussian determinants, and Lagrange interpolation. Coefficients
//! here are always exact rationals: leading polynomials are assembled from
//! model data, so only root values ever need the float backend.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rat::Rat;

/// Drops trailing (highest-degree) zero coefficients.
pub fn trim(coeffs: &mut Vec<Rat>) {
    while coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
}

/// Degree of a coefficient vector (ascending powers); None for zero.
pub fn degree(coeffs: &[Rat]) -> Option<usize> {
    coeffs.iter().rposition(|c| !c.is_zero())
}

/// Horner evaluation.
pub fn eval_rat(coeffs: &[Rat], x: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// All rational roots with multiplicities (including 0 when present), plus
/// the degree of the rootless remainder after deflation. A positive leftover
/// degree means the polynomial has irrational or non-real roots.
pub fn rational_roots(coeffs: &[Rat]) -> (Vec<(Rat, usize)>, usize) {
    let mut work: Vec<Rat> = coeffs.to_vec();
    trim(&mut work);
    if work.len() <= 1 {
        return (Vec::new(), 0);
    }
    let mut roots: Vec<(Rat, usize)> = Vec::new();

    // Factor out powers of x first: x = 0 roots.
    let zeros = work.iter().take_while(|c| c.is_zero()).count();
    if zeros > 0 {
        work.drain(..zeros);
        roots.push((Rat::zero(), zeros));
    }

    'outer: while work.len() > 1 {
        // Integerize: candidates p/q with p | constant, q | leading.
        let denom_lcm = work
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = work
            .iter()
            .map(|c| (c * Rat::from_integer(denom_lcm.clone())).to_integer())
            .collect();
        let p_divs = divisors(&ints[0]);
        let q_divs = divisors(ints.last().expect("nonempty"));
        for p in &p_divs {
            for q in &q_divs {
                for sign in [1i32, -1] {
                    let cand = Rat::new(p * BigInt::from(sign), q.clone());
                    if eval_rat(&work, &cand).is_zero() {
                        let mut mult = 0;
                        while eval_rat(&work, &cand).is_zero() && work.len() > 1 {
                            work = deflate(&work, &cand);
                            mult += 1;
                        }
                        merge_root(&mut roots, cand, mult);
                        continue 'outer;
                    }
                }
            }
        }
        break;
    }
    let leftover = degree(&work).unwrap_or(0);
    (roots, leftover)
}

fn merge_root(roots: &mut Vec<(Rat, usize)>, root: Rat, mult: usize) {
    match roots.iter_mut().find(|(r, _)| *r == root) {
        Some((_, m)) => *m += mult,
        None => roots.push((root, mult)),
    }
}

/// Synthetic division by (x - r); the division must be exact.
fn deflate(coeffs: &[Rat], r: &Rat) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); coeffs.len() - 1];
    let mut carry = Rat::zero();
    for i in (0..coeffs.len()).rev() {
        let v = &coeffs[i] + &carry;
        if i == 0 {
            debug_assert!(v.is_zero(), "deflation by a non-root");
        } else {
            carry = &v * r;
            out[i - 1] = v;
        }
    }
    out
}

/// Positive divisors by trial division; inputs here are small resultant
/// coefficients, so this stays cheap.
fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    if n.is_zero() {
        return vec![BigInt::one()];
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut i = BigInt::one();
    while &i * &i <= n {
        if (&n % &i).is_zero() {
            small.push(i.clone());
            let other = &n / &i;
            if other != i {
                large.push(other);
            }
        }
        i += 1;
    }
    large.reverse();
    small.extend(large);
    small
}

/// Iterates at an m-fold root stagnate near machine-eps^(1/m) of the root
/// radius, so clusters are formed no tighter than this floor; genuinely
/// distinct roots closer than it merge into one root of higher multiplicity.
pub(crate) const ROOT_CLUSTER_FLOOR: f64 = 1e-7;

/// Residuals evaluated at numerically computed roots inherit the root error,
/// so float-mode "does this vanish" filters use at least this relative
/// tolerance. Genuine non-solutions in non-degenerate systems sit orders of
/// magnitude above it.
pub(crate) const RESIDUAL_FLOOR: f64 = 1e-6;

/// Durand-Kerner roots of a complex polynomial (ascending coefficients),
/// clustered into (root, multiplicity) pairs within the given tolerance
/// (floored at `ROOT_CLUSTER_FLOOR` times the root radius).
pub fn complex_roots(coeffs: &[Complex64], eps: f64) -> Vec<(Complex64, usize)> {
    let deg = match coeffs.iter().rposition(|c| c.norm() > 0.0) {
        Some(d) if d > 0 => d,
        _ => return Vec::new(),
    };
    let lead = coeffs[deg];
    let monic: Vec<Complex64> = coeffs[..=deg].iter().map(|c| c / lead).collect();
    let radius = 1.0
        + monic
            .iter()
            .take(deg)
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|j| seed.powi(j as i32 + 1) * radius / seed.norm().powi(j as i32 + 1) * 0.9)
        .collect();
    let eval = |x: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in monic.iter().rev() {
            acc = acc * x + c;
        }
        acc
    };
    for _ in 0..1000 {
        let mut moved = 0.0f64;
        for j in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for k in 0..deg {
                if k != j {
                    denom *= z[j] - z[k];
                }
            }
            if denom.norm() == 0.0 {
                // Perturb coincident iterates and keep going.
                z[j] += Complex64::new(1e-6 * radius, 1e-6 * radius);
                continue;
            }
            let step = eval(z[j]) / denom;
            z[j] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-14 * radius.max(1.0) {
            break;
        }
    }
    // Cluster within a tolerance specified by the scalar mode.
    let tol = eps.max(ROOT_CLUSTER_FLOOR) * radius.max(1.0);
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    let mut z_sorted = z;
    z_sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    for root in z_sorted {
        match clusters.iter_mut().find(|(c, _)| (*c - root).norm() < tol) {
            Some((c, m)) => {
                *c = (*c * *m as f64 + root) / (*m as f64 + 1.0);
                *m += 1;
            }
            None => clusters.push((root, 1)),
        }
    }
    // Polish each representative. Iterates stagnate around an m-fold root
    // (where evaluating p itself also drowns in cancellation), so the
    // averaged centroid can carry errors near the zero tolerance. A true
    // m-fold root of p is a simple root of the (m-1)-th derivative, and
    // plain Newton against that derivative restores machine accuracy; a
    // representative never moves past its own cluster radius.
    let derivative = |c: &[Complex64]| -> Vec<Complex64> {
        c.iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as f64)
            .collect()
    };
    let horner = |c: &[Complex64], x: Complex64| {
        c.iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
    };
    for (root, m) in &mut clusters {
        let mut p = monic.clone();
        for _ in 1..*m {
            p = derivative(&p);
        }
        let dp = derivative(&p);
        let mut zp = *root;
        for _ in 0..40 {
            let d = horner(&dp, zp);
            if d.norm() == 0.0 {
                break;
            }
            let step = horner(&p, zp) / d;
            zp -= step;
            if step.norm() <= 1e-15 * zp.norm().max(1.0) {
                break;
            }
        }
        if (zp - *root).norm() < tol {
            *root = zp;
        }
    }
    clusters
}

/// Exact determinant by Gaussian elimination with column pivoting.
pub fn determinant(mut mat: Vec<Vec<Rat>>) -> Rat {
    let n = mat.len();
    debug_assert!(mat.iter().all(|row| row.len() == n));
    let mut det = Rat::one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !mat[r][col].is_zero());
        let Some(pivot) = pivot else {
            return Rat::zero();
        };
        if pivot != col {
            mat.swap(pivot, col);
            det = -det;
        }
        let p = mat[col][col].clone();
        det *= &p;
        let pivot_row = mat[col].clone();
        for row in mat.iter_mut().skip(col + 1) {
            if row[col].is_zero() {
                continue;
            }
            let factor = &row[col] / &p;
            for (c, pc) in pivot_row.iter().enumerate().skip(col) {
                let sub = &factor * pc;
                row[c] -= sub;
            }
        }
    }
    det
}

/// Monic gcd of two rational polynomials by the Euclidean algorithm.
pub fn poly_gcd(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(&a, &b);
        a = b;
        b = r;
    }
    if let Some(lead) = a.last().cloned() {
        for c in &mut a {
            *c /= &lead;
        }
    }
    a
}

/// Remainder of polynomial long division (trimmed).
fn poly_rem(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut rem = a.to_vec();
    trim(&mut rem);
    let db = b.len() - 1;
    let lead = b.last().expect("nonzero divisor");
    while rem.len() > db {
        let k = rem.len() - 1 - db;
        let factor = rem.last().expect("nonempty") / lead;
        for (i, c) in b.iter().enumerate() {
            let sub = &factor * c;
            rem[k + i] -= sub;
        }
        // The leading term cancels exactly, so each pass shortens rem.
        trim(&mut rem);
    }
    rem
}

/// Unique interpolating polynomial through distinct rational points.
pub fn lagrange(points: &[(Rat, Rat)]) -> Vec<Rat> {
    let mut acc = vec![Rat::zero(); points.len()];
    for (k, (xk, yk)) in points.iter().enumerate() {
        // Basis polynomial prod_{j != k} (x - x_j) / (x_k - x_j).
        let mut basis = vec![Rat::one()];
        let mut denom = Rat::one();
        for (j, (xj, _)) in points.iter().enumerate() {
            if j == k {
                continue;
            }
            let mut next = vec![Rat::zero(); basis.len() + 1];
            for (i, b) in basis.iter().enumerate() {
                next[i + 1] += b;
                next[i] -= b * xj;
            }
            basis = next;
            denom *= xk - xj;
        }
        let scale = yk / denom;
        for (i, b) in basis.iter().enumerate() {
            acc[i] += b * &scale;
        }
    }
    trim(&mut acc);
    acc
}

/// Bivariate polynomial with nonnegative exponents and rational coefficients
/// (Laurent-cleared leading polynomials).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiPoly {
    terms: BTreeMap<(usize, usize), Rat>,
}

impl BiPoly {
    pub fn from_terms(terms: Vec<((usize, usize), Rat)>) -> BiPoly {
        let mut map: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
        for (k, c) in terms {
            *map.entry(k).or_insert_with(Rat::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        BiPoly { terms: map }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &Rat)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn deg1(&self) -> usize {
        self.terms.keys().map(|(i, _)| *i).max().unwrap_or(0)
    }

    pub fn deg2(&self) -> usize {
        self.terms.keys().map(|(_, j)| *j).max().unwrap_or(0)
    }

    /// Swaps the two variables.
    pub fn transpose(&self) -> BiPoly {
        BiPoly {
            terms: self.terms.iter().map(|((i, j), c)| ((*j, *i), c.clone())).collect(),
        }
    }

    /// Specializes y2 = t, returning ascending y1 coefficients of formal
    /// degree deg1 (the vector always has deg1 + 1 entries so resultant
    /// matrices keep their generic shape).
    pub fn eval_y2(&self, t: &Rat) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.deg1() + 1];
        for ((i, j), c) in &self.terms {
            out[*i] += c * pow_rat(t, *j);
        }
        out
    }

    /// Full evaluation at a rational point.
    pub fn eval_point(&self, y1: &Rat, y2: &Rat) -> Rat {
        self.terms
            .iter()
            .map(|((i, j), c)| c * pow_rat(y1, *i) * pow_rat(y2, *j))
            .sum()
    }

    /// Full evaluation at a complex point.
    pub fn eval_point_complex(&self, y1: Complex64, y2: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|((i, j), c)| {
                rat_c64(c) * y1.powi(*i as i32) * y2.powi(*j as i32)
            })
            .sum()
    }

    /// Specializes y2 = t complex, ascending y1 coefficients.
    pub fn eval_y2_complex(&self, t: Complex64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.deg1() + 1];
        for ((i, j), c) in &self.terms {
            out[*i] += rat_c64(c) * t.powi(*j as i32);
        }
        out
    }

    /// Sum of term magnitudes at |y1| = a1, |y2| = a2; the natural scale for
    /// float-mode zero tests of evaluations (how much cancellation occurred).
    pub fn eval_magnitude(&self, a1: f64, a2: f64) -> f64 {
        self.terms
            .iter()
            .map(|((i, j), c)| {
                rat_c64(c).norm() * a1.powi(*i as i32) * a2.powi(*j as i32)
            })
            .sum()
    }
}

fn pow_rat(x: &Rat, k: usize) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..k {
        acc *= x;
    }
    acc
}

pub(crate) fn rat_c64(r: &Rat) -> Complex64 {
    Complex64::new(
        r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN),
        0.0,
    )
}

/// Resultant eliminating y1: determinant of the generic Sylvester matrix,
/// computed exactly by evaluating y2 at enough rational points and
/// interpolating. Returns ascending y2 coefficients; identically zero comes
/// back as an empty vector. Degrees are the formal y1-degrees, so the
/// specialization-then-determinant route agrees with the symbolic
/// determinant at every point.
pub fn resultant_y1(p: &BiPoly, q: &BiPoly) -> Vec<Rat> {
    let n = p.deg1();
    let m = q.deg1();
    if n == 0 && m == 0 {
        return vec![Rat::one()];
    }
    let bound = n * q.deg2() + m * p.deg2();
    let samples: Vec<Rat> = sample_points(bound + 1);
    let mut values = Vec::with_capacity(samples.len());
    for t in &samples {
        let a = p.eval_y2(t);
        let b = q.eval_y2(t);
        values.push((t.clone(), sylvester_det(&a, &b, n, m)));
    }
    lagrange(&values)
}

fn sample_points(count: usize) -> Vec<Rat> {
    let mut out = Vec::with_capacity(count);
    let mut k: i64 = 0;
    while out.len() < count {
        out.push(Rat::from_integer(BigInt::from(k)));
        if out.len() < count && k > 0 {
            out.push(Rat::from_integer(BigInt::from(-k)));
        }
        k += 1;
    }
    out
}

/// Sylvester determinant for ascending coefficient vectors of formal degrees
/// n and m (vectors have n+1 and m+1 entries).
fn sylvester_det(a: &[Rat], b: &[Rat], n: usize, m: usize) -> Rat {
    let size = n + m;
    if size == 0 {
        return Rat::one();
    }
    let mut mat = vec![vec![Rat::zero(); size]; size];
    for row in 0..m {
        for k in 0..=n {
            mat[row][row + k] = a[n - k].clone();
        }
    }
    for row in 0..n {
        for k in 0..=m {
            mat[m + row][row + k] = b[m - k].clone();
        }
    }
    determinant(mat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rati};

    fn poly(cs: &[i64]) -> Vec<Rat> {
        cs.iter().map(|c| rati(*c)).collect()
    }

    #[test]
    fn rational_roots_with_multiplicity() {
        // (x - 1)^2 (x + 2) = x^3 - 3x + 2
        let (roots, leftover) = rational_roots(&poly(&[2, -3, 0, 1]));
        assert_eq!(leftover, 0);
        let mut roots = roots;
        roots.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(roots, vec![(rati(-2), 1), (rati(1), 2)]);
    }

    #[test]
    fn rational_roots_fractional_and_zero() {
        // x^2 (2x - 1) = 2x^3 - x^2
        let (roots, leftover) = rational_roots(&poly(&[0, 0, -1, 2]));
        assert_eq!(leftover, 0);
        assert!(roots.contains(&(Rat::zero(), 2)));
        assert!(roots.contains(&(rat(1, 2), 1)));
    }

    #[test]
    fn irrational_leftover_is_reported() {
        // (x^2 - 2)(x - 3)
        let (roots, leftover) = rational_roots(&poly(&[6, -2, -3, 1]));
        assert_eq!(roots, vec![(rati(3), 1)]);
        assert_eq!(leftover, 2);
    }

    #[test]
    fn complex_roots_of_a_quartic() {
        // (x^2 + 1)(x - 2)^2
        let coeffs: Vec<Complex64> = [4.0, -4.0, 5.0, -4.0, 1.0]
            .iter()
            .map(|c| Complex64::new(*c, 0.0))
            .collect();
        let roots = complex_roots(&coeffs, 1e-9);
        let mut found_two = 0;
        let mut found_i = 0;
        for (r, m) in &roots {
            if (r - Complex64::new(2.0, 0.0)).norm() < 1e-6 {
                found_two += m;
            }
            if (r.norm() - 1.0).abs() < 1e-6 && r.re.abs() < 1e-6 {
                found_i += m;
            }
        }
        assert_eq!(found_two, 2);
        assert_eq!(found_i, 2);
    }

    #[test]
    fn double_roots_are_polished_to_machine_accuracy() {
        // (x^2 - 1)^2: raw iterates stagnate around the double roots, so the
        // representatives need the derivative polish to land on +-1 exactly
        // enough for downstream zero tests at tolerance 1e-9.
        let coeffs: Vec<Complex64> = [1.0, 0.0, -2.0, 0.0, 1.0]
            .iter()
            .map(|c| Complex64::new(*c, 0.0))
            .collect();
        let mut roots = complex_roots(&coeffs, 1e-9);
        roots.sort_by(|a, b| a.0.re.total_cmp(&b.0.re));
        assert_eq!(roots.len(), 2);
        assert_eq!((roots[0].1, roots[1].1), (2, 2));
        assert!((roots[0].0 - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((roots[1].0 - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn determinant_and_lagrange() {
        let mat = vec![
            vec![rati(2), rati(1), rati(0)],
            vec![rati(1), rati(3), rati(1)],
            vec![rati(0), rati(1), rati(4)],
        ];
        assert_eq!(determinant(mat), rati(18));
        let pts = vec![
            (rati(0), rati(1)),
            (rati(1), rati(0)),
            (rati(-1), rati(4)),
        ];
        // Through (0,1), (1,0), (-1,4): 1 - 2x + x^2.
        assert_eq!(lagrange(&pts), poly(&[1, -2, 1]));
    }

    #[test]
    fn gcd_extracts_the_shared_factor() {
        // (x^2 - 1)(x + 3) and (x^2 - 1)(x - 5) share x^2 - 1.
        let a = poly(&[-3, -1, 3, 1]);
        let b = poly(&[5, -1, -5, 1]);
        assert_eq!(poly_gcd(&a, &b), poly(&[-1, 0, 1]));
        // Coprime pair reduces to 1.
        assert_eq!(poly_gcd(&poly(&[1, 1]), &poly(&[2, 1])), poly(&[1]));
    }

    #[test]
    fn resultant_detects_common_roots() {
        // p = y1^2 y2^2 - 1, q = y1 (y2^3 - 2 y2) - 2.
        let p = BiPoly::from_terms(vec![((2, 2), rati(1)), ((0, 0), rati(-1))]);
        let q = BiPoly::from_terms(vec![
            ((1, 3), rati(1)),
            ((1, 1), rati(-2)),
            ((0, 0), rati(-2)),
        ]);
        let r = resultant_y1(&p, &q);
        // 4 y2^2 - y2^2 (y2^2 - 2)^2 = -y2^6 + 4 y2^4 up to sign.
        let (roots, leftover) = rational_roots(&r);
        assert_eq!(leftover, 0);
        let mut nonzero: Vec<(Rat, usize)> =
            roots.into_iter().filter(|(r, _)| !r.is_zero()).collect();
        nonzero.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(nonzero, vec![(rati(-2), 1), (rati(2), 1)]);
    }

    #[test]
    fn resultant_of_y1_free_polynomial_powers_up() {
        // p = y1^2 - 1 (no y2), q = y2^2 - 1 (no y1): Res_y1 = (y2^2-1)^2.
        let p = BiPoly::from_terms(vec![((2, 0), rati(1)), ((0, 0), rati(-1))]);
        let q = BiPoly::from_terms(vec![((0, 2), rati(1)), ((0, 0), rati(-1))]);
        let r = resultant_y1(&p, &q);
        // (y2^2 - 1)^2 = y2^4 - 2y2^2 + 1.
        assert_eq!(r, poly(&[1, 0, -2, 0, 1]));
    }

    #[test]
    fn resultant_vanishes_identically_on_shared_factors() {
        // p = y1^2 y2^2 - 1, q = -2 - 2 y1 y2 share the component y1 y2 = -1.
        let p = BiPoly::from_terms(vec![((2, 2), rati(1)), ((0, 0), rati(-1))]);
        let q = BiPoly::from_terms(vec![((1, 1), rati(-2)), ((0, 0), rati(-2))]);
        let r = resultant_y1(&p, &q);
        assert!(r.is_empty(), "expected empty coefficients, got {r:?}");
    }
}
