//! Orthonormal bases of symmetric and rotationally symmetric polynomials.
//!
//! Fully symmetric polynomials on the triangle are generated by the
//! elementary symmetric values `e2` and `e3` (weights 2 and 3); adding the
//! alternating polynomial (weight 3, exponent 0 or 1) generates the
//! rotationally symmetric ones. This module enumerates the monomials in
//! those generators up to a weighted degree, orthonormalises them by
//! classical Gram-Schmidt in exact rational arithmetic, and compiles the
//! result into a Horner evaluation plan over `(e2, e3)` for fast floating
//! point evaluation.
//!
//! The orthogonalised polynomials are stored with exact rational
//! coefficients and exact rational squared norms; normalisation by the
//! (generally irrational) square root of the norm happens only in the
//! floating point mirror.

use std::collections::HashMap;
use std::fmt;

use num::{BigRational, One, Signed, ToPrimitive, Zero};

use crate::bases::{cardinality, BasisKind};
use crate::geometry::{elementary_values, ArealPoint, RationalArealPoly, SymmetryMode};

/// A monomial `e2^i e3^j alt^k` in the symmetric generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymMonomial {
    /// Exponent of the pairwise-product sum (weight 2).
    pub i: u32,
    /// Exponent of the signed triple product (weight 3).
    pub j: u32,
    /// Exponent of the alternating polynomial (weight 3), 0 or 1.
    pub k: u32,
}

impl SymMonomial {
    pub fn new(i: u32, j: u32, k: u32) -> Self {
        debug_assert!(k <= 1);
        Self { i, j, k }
    }

    pub fn weighted_degree(&self) -> u32 {
        2 * self.i + 3 * self.j + 3 * self.k
    }
}

/// Number of basis polynomials at weighted degree `phi`: the dimension of
/// the symmetric (resp. rotationally symmetric) polynomial space.
pub fn basis_size(mode: SymmetryMode, phi: u32) -> usize {
    match mode {
        SymmetryMode::Full => cardinality(BasisKind::Minimal, phi),
        SymmetryMode::Rotational => cardinality(BasisKind::Rotational, phi),
    }
}

/// All monomials of weighted degree at most `phi`, in weighted graded
/// order: weighted degree ascending, then alternating exponent ascending,
/// then triple-product exponent ascending.
pub fn monomial_set(mode: SymmetryMode, phi: u32) -> Vec<SymMonomial> {
    let kmax = match mode {
        SymmetryMode::Full => 0,
        SymmetryMode::Rotational => 1,
    };
    let mut out = Vec::new();
    for k in 0..=kmax {
        if 3 * k > phi {
            break;
        }
        for j in 0..=((phi - 3 * k) / 3) {
            for i in 0..=((phi - 3 * k - 3 * j) / 2) {
                out.push(SymMonomial::new(i, j, k));
            }
        }
    }
    out.sort_by_key(|m| (m.weighted_degree(), m.k, m.j));
    out
}

/// Memoised exact integrals of products of the symmetric generators.
struct IntegralCache {
    e2_pows: Vec<RationalArealPoly>,
    e3_pows: Vec<RationalArealPoly>,
    alt_squared: RationalArealPoly,
    integrals: HashMap<(u32, u32, u32), BigRational>,
}

impl IntegralCache {
    fn new() -> Self {
        let alt = RationalArealPoly::alternating();
        Self {
            e2_pows: vec![RationalArealPoly::one()],
            e3_pows: vec![RationalArealPoly::one()],
            alt_squared: alt.mul(&alt),
            integrals: HashMap::new(),
        }
    }

    fn e2_pow(&mut self, i: u32) -> RationalArealPoly {
        while self.e2_pows.len() <= i as usize {
            let next = self.e2_pows.last().unwrap().mul(&RationalArealPoly::pair_sum());
            self.e2_pows.push(next);
        }
        self.e2_pows[i as usize].clone()
    }

    fn e3_pow(&mut self, j: u32) -> RationalArealPoly {
        while self.e3_pows.len() <= j as usize {
            let next = self.e3_pows.last().unwrap().mul(&RationalArealPoly::neg_triple());
            self.e3_pows.push(next);
        }
        self.e3_pows[j as usize].clone()
    }

    /// `(1/A)` integral of `e2^i e3^j alt^k` over the triangle.
    fn integral(&mut self, i: u32, j: u32, k: u32) -> BigRational {
        if k % 2 == 1 {
            // antisymmetric integrand over a symmetric domain
            return BigRational::zero();
        }
        if let Some(v) = self.integrals.get(&(i, j, k)) {
            return v.clone();
        }
        let mut poly = self.e2_pow(i).mul(&self.e3_pow(j));
        for _ in 0..(k / 2) {
            poly = poly.mul(&self.alt_squared);
        }
        let value = poly.integrate();
        self.integrals.insert((i, j, k), value.clone());
        value
    }

    fn product_integral(&mut self, a: SymMonomial, b: SymMonomial) -> BigRational {
        self.integral(a.i + b.i, a.j + b.j, a.k + b.k)
    }
}

/// Exact inner product `(1/A) integral` of two symmetric monomials.
pub fn inner_product_exact(a: SymMonomial, b: SymMonomial) -> BigRational {
    IntegralCache::new().product_integral(a, b)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymBasisError {
    /// A monomial turned out linearly dependent on its predecessors.
    /// Cannot happen for the generated monomial sets; indicates a bug.
    LinearDependence { index: usize },
}

impl fmt::Display for SymBasisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymBasisError::LinearDependence { index } => {
                write!(f, "monomial {index} is linearly dependent on its predecessors")
            }
        }
    }
}

impl std::error::Error for SymBasisError {}

/// Dense 2-D coefficient grid over `(e2, e3)` powers, evaluated by a
/// Horner scheme with `e2` as the outer variable.
#[derive(Debug, Clone, Default)]
struct Grid {
    rows: Vec<Vec<f64>>,
}

impl Grid {
    fn add(&mut self, i: usize, j: usize, c: f64) {
        if self.rows.len() <= i {
            self.rows.resize(i + 1, Vec::new());
        }
        let row = &mut self.rows[i];
        if row.len() <= j {
            row.resize(j + 1, 0.0);
        }
        row[j] += c;
    }

    fn eval(&self, e2: f64, e3: f64) -> f64 {
        let mut acc = 0.0;
        for row in self.rows.iter().rev() {
            let mut inner = 0.0;
            for &c in row.iter().rev() {
                inner = inner * e3 + c;
            }
            acc = acc * e2 + inner;
        }
        acc
    }

    fn derivative_e2(&self) -> Grid {
        let mut out = Grid::default();
        for (i, row) in self.rows.iter().enumerate().skip(1) {
            for (j, &c) in row.iter().enumerate() {
                if c != 0.0 {
                    out.add(i - 1, j, i as f64 * c);
                }
            }
        }
        out
    }

    fn derivative_e3(&self) -> Grid {
        let mut out = Grid::default();
        for (i, row) in self.rows.iter().enumerate() {
            for (j, &c) in row.iter().enumerate().skip(1) {
                if c != 0.0 {
                    out.add(i, j - 1, j as f64 * c);
                }
            }
        }
        out
    }
}

/// Compiled evaluation plan for one orthonormal polynomial: the part free
/// of the alternating factor, the part multiplying it, and their partial
/// derivatives.
#[derive(Debug, Clone)]
struct PolyPlan {
    plain: Grid,
    alternating: Grid,
    plain_d2: Grid,
    plain_d3: Grid,
    alternating_d2: Grid,
    alternating_d3: Grid,
}

/// An orthonormalised symmetric (or rotationally symmetric) polynomial
/// basis.
///
/// Row `k` of the rational coefficient table expresses the *unnormalised*
/// orthogonal polynomial `q_k` in the monomials (lower triangular, unit
/// diagonal); its exact squared norm is stored alongside. The orthonormal
/// polynomial is `q_k / sqrt(norm2_k)`, realised in the floating point
/// mirror and the Horner plan.
pub struct OrthoSymBasis {
    mode: SymmetryMode,
    degree: u32,
    monomials: Vec<SymMonomial>,
    coeffs: Vec<Vec<BigRational>>,
    norms2: Vec<BigRational>,
    plans: Vec<PolyPlan>,
}

/// Orthonormalise the monomial set of `mode` at weighted degree `phi` by
/// classical Gram-Schmidt in exact rational arithmetic.
pub fn orthonormalize(mode: SymmetryMode, phi: u32) -> Result<OrthoSymBasis, SymBasisError> {
    let monomials = monomial_set(mode, phi);
    let n = monomials.len();
    let mut cache = IntegralCache::new();

    // gram[a][b] for b <= a
    let mut gram: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    for a in 0..n {
        let row = (0..=a)
            .map(|b| cache.product_integral(monomials[a], monomials[b]))
            .collect();
        gram.push(row);
    }
    let gram_at = |a: usize, b: usize| -> &BigRational {
        if b <= a {
            &gram[a][b]
        } else {
            &gram[b][a]
        }
    };

    let mut coeffs: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    let mut norms2: Vec<BigRational> = Vec::with_capacity(n);
    for k in 0..n {
        let mut row = vec![BigRational::zero(); k + 1];
        row[k] = BigRational::one();
        for l in 0..k {
            // <m_k, q_l> = sum_m C_l[m] * <m_k, m_m>
            let mut dot = BigRational::zero();
            for (m, c) in coeffs[l].iter().enumerate() {
                if !c.is_zero() {
                    dot += c * gram_at(k, m);
                }
            }
            if dot.is_zero() {
                continue;
            }
            let proj = dot / &norms2[l];
            for (m, c) in coeffs[l].iter().enumerate() {
                if !c.is_zero() {
                    let delta = &proj * c;
                    row[m] -= delta;
                }
            }
        }
        // norm^2 = <m_k, q_k> by orthogonality to the predecessors
        let mut norm2 = BigRational::zero();
        for (m, c) in row.iter().enumerate() {
            if !c.is_zero() {
                norm2 += c * gram_at(k, m);
            }
        }
        if !norm2.is_positive() {
            return Err(SymBasisError::LinearDependence { index: k });
        }
        coeffs.push(row);
        norms2.push(norm2);
    }

    let plans = build_plans(&monomials, &coeffs, &norms2);
    Ok(OrthoSymBasis { mode, degree: phi, monomials, coeffs, norms2, plans })
}

fn build_plans(
    monomials: &[SymMonomial],
    coeffs: &[Vec<BigRational>],
    norms2: &[BigRational],
) -> Vec<PolyPlan> {
    coeffs
        .iter()
        .zip(norms2)
        .map(|(row, norm2)| {
            let scale = 1.0 / norm2.to_f64().expect("norm fits in f64").sqrt();
            let mut plain = Grid::default();
            let mut alternating = Grid::default();
            for (m, c) in row.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let c = c.to_f64().expect("coefficient fits in f64") * scale;
                let mono = monomials[m];
                if mono.k == 0 {
                    plain.add(mono.i as usize, mono.j as usize, c);
                } else {
                    alternating.add(mono.i as usize, mono.j as usize, c);
                }
            }
            PolyPlan {
                plain_d2: plain.derivative_e2(),
                plain_d3: plain.derivative_e3(),
                alternating_d2: alternating.derivative_e2(),
                alternating_d3: alternating.derivative_e3(),
                plain,
                alternating,
            }
        })
        .collect()
}

impl OrthoSymBasis {
    pub fn mode(&self) -> SymmetryMode {
        self.mode
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[SymMonomial] {
        &self.monomials
    }

    /// Rational coefficients of the unnormalised orthogonal polynomials,
    /// one triangular row per polynomial.
    pub fn coefficient_rows(&self) -> &[Vec<BigRational>] {
        &self.coeffs
    }

    /// Exact squared norms of the unnormalised polynomials.
    pub fn norms_squared(&self) -> &[BigRational] {
        &self.norms2
    }

    /// Values of all orthonormal basis polynomials at a point.
    pub fn eval(&self, p: ArealPoint) -> Vec<f64> {
        let e = elementary_values(p);
        self.plans
            .iter()
            .map(|plan| plan.plain.eval(e.e2, e.e3) + e.alt * plan.alternating.eval(e.e2, e.e3))
            .collect()
    }

    /// Values and `(L1, L2)` gradients of all basis polynomials at a point.
    pub fn eval_with_gradients(&self, p: ArealPoint) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let e = elementary_values(p);
        let (l1, l2, l3) = (p.l1, p.l2, p.l3);
        let de2 = (l3 - l1, l3 - l2);
        let de3 = (l2 * (l1 - l3), l1 * (l2 - l3));
        let (u, v, w) = (l1 - l2, l1 - l3, l2 - l3);
        let dalt = (v * w + 2.0 * u * w + u * v, -v * w + u * w + 2.0 * u * v);

        let n = self.len();
        let mut values = Vec::with_capacity(n);
        let mut gl1 = Vec::with_capacity(n);
        let mut gl2 = Vec::with_capacity(n);
        for plan in &self.plans {
            let plain = plan.plain.eval(e.e2, e.e3);
            let alt_part = plan.alternating.eval(e.e2, e.e3);
            values.push(plain + e.alt * alt_part);
            let d_e2 = plan.plain_d2.eval(e.e2, e.e3) + e.alt * plan.alternating_d2.eval(e.e2, e.e3);
            let d_e3 = plan.plain_d3.eval(e.e2, e.e3) + e.alt * plan.alternating_d3.eval(e.e2, e.e3);
            let d_alt = alt_part;
            gl1.push(d_e2 * de2.0 + d_e3 * de3.0 + d_alt * dalt.0);
            gl2.push(d_e2 * de2.1 + d_e3 * de3.1 + d_alt * dalt.1);
        }
        (values, gl1, gl2)
    }

    /// Exact value of the *unnormalised* polynomial `k` at a rational
    /// point, the oracle the floating point path is checked against.
    pub fn eval_raw_rational(&self, k: usize, coords: &[BigRational; 3]) -> BigRational {
        let e2 = RationalArealPoly::pair_sum().eval_rational(coords);
        let e3 = RationalArealPoly::neg_triple().eval_rational(coords);
        let alt = RationalArealPoly::alternating().eval_rational(coords);
        let mut acc = BigRational::zero();
        for (m, c) in self.coeffs[k].iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mono = self.monomials[m];
            let mut term = c.clone();
            for _ in 0..mono.i {
                term *= &e2;
            }
            for _ in 0..mono.j {
                term *= &e3;
            }
            for _ in 0..mono.k {
                term *= &alt;
            }
            acc += term;
        }
        acc
    }

    /// Exact Gram entry `<q_a, q_b>` of the unnormalised polynomials.
    pub fn raw_gram_entry(&self, a: usize, b: usize) -> BigRational {
        let mut cache = IntegralCache::new();
        self.gram_entry_with(&mut cache, a, b)
    }

    /// Exact Gram matrix of the unnormalised polynomials. Orthonormality
    /// means: zero off the diagonal, and on the diagonal exactly the
    /// stored squared norms (so the normalised diagonal is exactly 1).
    pub fn raw_gram(&self) -> Vec<Vec<BigRational>> {
        let mut cache = IntegralCache::new();
        (0..self.len())
            .map(|a| (0..self.len()).map(|b| self.gram_entry_with(&mut cache, a, b)).collect())
            .collect()
    }

    fn gram_entry_with(&self, cache: &mut IntegralCache, a: usize, b: usize) -> BigRational {
        let mut acc = BigRational::zero();
        for (ma, ca) in self.coeffs[a].iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (mb, cb) in self.coeffs[b].iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                acc += ca * cb * cache.product_integral(self.monomials[ma], self.monomials[mb]);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{expand_orbit, OrbitKind};
    use num::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn monomial_sets_at_low_degrees() {
        let set = monomial_set(SymmetryMode::Full, 2);
        assert_eq!(set, vec![SymMonomial::new(0, 0, 0), SymMonomial::new(1, 0, 0)]);

        let set = monomial_set(SymmetryMode::Rotational, 3);
        assert_eq!(
            set,
            vec![
                SymMonomial::new(0, 0, 0),
                SymMonomial::new(1, 0, 0),
                SymMonomial::new(0, 1, 0),
                SymMonomial::new(0, 0, 1),
            ]
        );

        assert_eq!(monomial_set(SymmetryMode::Full, 7).len(), 8);
    }

    #[test]
    fn monomial_counts_match_closed_forms() {
        for phi in 0..=30 {
            for mode in [SymmetryMode::Full, SymmetryMode::Rotational] {
                assert_eq!(
                    monomial_set(mode, phi).len(),
                    basis_size(mode, phi),
                    "count mismatch for {mode:?} at degree {phi}"
                );
            }
        }
    }

    #[test]
    fn no_monomial_has_weighted_degree_one() {
        for phi in 0..=20 {
            for mode in [SymmetryMode::Full, SymmetryMode::Rotational] {
                assert!(monomial_set(mode, phi)
                    .iter()
                    .all(|m| m.weighted_degree() != 1));
            }
        }
    }

    #[test]
    fn inner_products_of_low_monomials() {
        let one = SymMonomial::new(0, 0, 0);
        let e2 = SymMonomial::new(1, 0, 0);
        let alt = SymMonomial::new(0, 0, 1);
        assert_eq!(inner_product_exact(one, one), rat(1, 1));
        assert_eq!(inner_product_exact(one, alt), rat(0, 1));
        // frozen from the expansion oracle
        assert_eq!(inner_product_exact(e2, e2), rat(1, 15));
        // symmetry of the product
        let e3 = SymMonomial::new(0, 1, 0);
        assert_eq!(inner_product_exact(e2, e3), inner_product_exact(e3, e2));
    }

    #[test]
    fn orthonormalize_smallest_cases() {
        let basis = orthonormalize(SymmetryMode::Full, 0).unwrap();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis.coefficient_rows()[0], vec![rat(1, 1)]);
        assert_eq!(basis.norms_squared()[0], rat(1, 1));

        // second polynomial at degree 2 is e2 - <e2, 1> = e2 - 1/4, monic
        let basis = orthonormalize(SymmetryMode::Full, 2).unwrap();
        assert_eq!(basis.coefficient_rows()[1], vec![rat(-1, 4), rat(1, 1)]);

        // fourth rotational polynomial at degree 3 is the bare alternating
        // polynomial: all cross inner products vanish
        let basis = orthonormalize(SymmetryMode::Rotational, 3).unwrap();
        assert_eq!(
            basis.coefficient_rows()[3],
            vec![rat(0, 1), rat(0, 1), rat(0, 1), rat(1, 1)]
        );
    }

    #[test]
    fn raw_gram_matrix_is_exactly_diagonal() {
        for (mode, phi) in [(SymmetryMode::Full, 8), (SymmetryMode::Rotational, 7)] {
            let basis = orthonormalize(mode, phi).unwrap();
            for a in 0..basis.len() {
                for b in 0..=a {
                    let entry = basis.raw_gram_entry(a, b);
                    if a == b {
                        assert_eq!(entry, basis.norms_squared()[a], "diagonal at {a}");
                    } else {
                        assert!(entry.is_zero(), "off-diagonal ({a},{b}) = {entry}");
                    }
                }
            }
        }
    }

    #[test]
    fn lower_degree_basis_is_a_prefix() {
        for mode in [SymmetryMode::Full, SymmetryMode::Rotational] {
            let big = orthonormalize(mode, 9).unwrap();
            for phi in 0..9 {
                let small = orthonormalize(mode, phi).unwrap();
                for k in 0..small.len() {
                    assert_eq!(small.coefficient_rows()[k], big.coefficient_rows()[k]);
                    assert_eq!(small.norms_squared()[k], big.norms_squared()[k]);
                }
            }
        }
    }

    #[test]
    fn float_evaluation_matches_rational_oracle() {
        let points = [
            [rat(3, 10), rat(1, 2), rat(1, 5)],
            [rat(1, 7), rat(2, 7), rat(4, 7)],
            [rat(9, 10), rat(1, 20), rat(1, 20)],
        ];
        for mode in [SymmetryMode::Full, SymmetryMode::Rotational] {
            let basis = orthonormalize(mode, 6).unwrap();
            for coords in &points {
                let p = ArealPoint::new(
                    coords[0].to_f64().unwrap(),
                    coords[1].to_f64().unwrap(),
                    coords[2].to_f64().unwrap(),
                );
                let values = basis.eval(p);
                for k in 0..basis.len() {
                    let raw = basis.eval_raw_rational(k, coords).to_f64().unwrap();
                    let want = raw / basis.norms_squared()[k].to_f64().unwrap().sqrt();
                    assert!(
                        (values[k] - want).abs() <= 1e-13 * (1.0 + want.abs()),
                        "{mode:?} poly {k}: {} vs {want}",
                        values[k]
                    );
                }
            }
        }
    }

    #[test]
    fn constant_component_is_one_everywhere() {
        let basis = orthonormalize(SymmetryMode::Rotational, 5).unwrap();
        for p in [
            ArealPoint::centroid(),
            ArealPoint::from_pair(0.7, 0.1),
            ArealPoint::from_pair(-0.2, 0.5),
        ] {
            assert!((basis.eval(p)[0] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn alternating_components_vanish_on_the_symmetry_axis() {
        let basis = orthonormalize(SymmetryMode::Rotational, 7).unwrap();
        let axis_point = ArealPoint::from_pair(0.28, 0.28);
        let values = basis.eval(axis_point);
        for (k, mono) in basis.monomials().iter().enumerate() {
            // polynomials whose top monomial carries the alternating factor
            // are pure alternating multiples and vanish here
            if mono.k == 1 {
                assert!(values[k].abs() < 1e-13, "component {k}: {}", values[k]);
            }
        }
    }

    #[test]
    fn basis_values_are_constant_on_orbits() {
        let basis = orthonormalize(SymmetryMode::Full, 6).unwrap();
        let kind = OrbitKind::new(SymmetryMode::Full, 2).unwrap();
        let pts = expand_orbit(kind, &[0.22, 0.31]).unwrap();
        let gen_values = basis.eval(pts[0]);
        let orbit_sum: Vec<f64> = pts.iter().fold(vec![0.0; basis.len()], |mut acc, &p| {
            for (a, v) in acc.iter_mut().zip(basis.eval(p)) {
                *a += v;
            }
            acc
        });
        for (sum, gen) in orbit_sum.iter().zip(&gen_values) {
            assert!((sum - 6.0 * gen).abs() < 1e-12 * (1.0 + gen.abs()));
        }

        let basis = orthonormalize(SymmetryMode::Rotational, 6).unwrap();
        let kind = OrbitKind::new(SymmetryMode::Rotational, 1).unwrap();
        let pts = expand_orbit(kind, &[0.4, 0.15]).unwrap();
        let gen_values = basis.eval(pts[0]);
        for &p in &pts {
            for (a, b) in basis.eval(p).iter().zip(&gen_values) {
                assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let h = 1e-6;
        for mode in [SymmetryMode::Full, SymmetryMode::Rotational] {
            let basis = orthonormalize(mode, 7).unwrap();
            for p in [ArealPoint::from_pair(0.3, 0.45), ArealPoint::from_pair(0.15, 0.2)] {
                let (_, gl1, gl2) = basis.eval_with_gradients(p);
                let vp1 = basis.eval(ArealPoint::from_pair(p.l1 + h, p.l2));
                let vm1 = basis.eval(ArealPoint::from_pair(p.l1 - h, p.l2));
                let vp2 = basis.eval(ArealPoint::from_pair(p.l1, p.l2 + h));
                let vm2 = basis.eval(ArealPoint::from_pair(p.l1, p.l2 - h));
                for k in 0..basis.len() {
                    let fd1 = (vp1[k] - vm1[k]) / (2.0 * h);
                    let fd2 = (vp2[k] - vm2[k]) / (2.0 * h);
                    assert!(
                        ((gl1[k] - fd1) / (1.0 + gl1[k].abs())).abs() < 1e-6,
                        "{mode:?} poly {k} dL1: {} vs {fd1}",
                        gl1[k]
                    );
                    assert!(
                        ((gl2[k] - fd2) / (1.0 + gl2[k].abs())).abs() < 1e-6,
                        "{mode:?} poly {k} dL2: {} vs {fd2}",
                        gl2[k]
                    );
                }
            }
        }
    }
}
