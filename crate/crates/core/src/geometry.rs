//! Areal-coordinate geometry on the triangle.
//!
//! Everything in this crate works in areal (barycentric) coordinates
//! `(L1, L2, L3)` with `L1 + L2 + L3 = 1`, so no reference triangle is ever
//! fixed. This module provides exact rational monomial moments under the
//! area-normalised measure, expansion of symmetry orbits, the symmetric /
//! rotational / antisymmetric sums over coordinate permutations, and the
//! elementary symmetric values used by the symmetric bases.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

/// Symmetry group acting on the areal coordinates: all six permutations
/// (full symmetry) or only the three cyclic ones (rotational symmetry).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymmetryMode {
    Full,
    Rotational,
}

impl fmt::Display for SymmetryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymmetryMode::Full => write!(f, "full"),
            SymmetryMode::Rotational => write!(f, "rot"),
        }
    }
}

/// A point on (or off) the triangle in areal coordinates.
///
/// The coordinates always sum to 1 (up to rounding relative to their
/// magnitudes); points outside the triangle, i.e. with negative
/// coordinates, are representable on purpose — rule quality classification
/// deals with them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArealPoint {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

impl ArealPoint {
    pub fn new(l1: f64, l2: f64, l3: f64) -> Self {
        let p = Self { l1, l2, l3 };
        debug_assert!(
            (l1 + l2 + l3 - 1.0).abs() <= 1e-12 * (1.0 + l1.abs() + l2.abs() + l3.abs()),
            "areal coordinates must sum to 1, got {p:?}"
        );
        p
    }

    /// Point from the two free coordinates, with `L3 = 1 - L1 - L2`.
    pub fn from_pair(l1: f64, l2: f64) -> Self {
        Self { l1, l2, l3: 1.0 - l1 - l2 }
    }

    pub fn centroid() -> Self {
        Self { l1: 1.0 / 3.0, l2: 1.0 / 3.0, l3: 1.0 / 3.0 }
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.l1, self.l2, self.l3]
    }

    /// Difference and sum of the second and first coordinate, the two
    /// values the PKD basis polynomials are built from.
    pub fn diff_sum(&self) -> (f64, f64) {
        (self.l2 - self.l1, self.l2 + self.l1)
    }

    /// Smallest areal coordinate; negative for points outside the triangle.
    pub fn min_coord(&self) -> f64 {
        self.l1.min(self.l2).min(self.l3)
    }

    fn permuted(&self, idx: [usize; 3]) -> ArealPoint {
        let c = self.coords();
        ArealPoint { l1: c[idx[0]], l2: c[idx[1]], l3: c[idx[2]] }
    }
}

/// A monomial `L1^a L2^b L3^c` in the areal coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArealMonomial {
    pub a: u32,
    pub b: u32,
    pub c: u32,
}

impl ArealMonomial {
    pub fn new(a: u32, b: u32, c: u32) -> Self {
        Self { a, b, c }
    }

    pub fn degree(&self) -> u32 {
        self.a + self.b + self.c
    }

    pub fn eval(&self, p: ArealPoint) -> f64 {
        p.l1.powi(self.a as i32) * p.l2.powi(self.b as i32) * p.l3.powi(self.c as i32)
    }

    /// All monomials of total degree exactly `degree`, lexicographic in (a, b).
    pub fn of_degree(degree: u32) -> Vec<ArealMonomial> {
        let mut out = Vec::new();
        for a in 0..=degree {
            for b in 0..=(degree - a) {
                out.push(ArealMonomial::new(a, b, degree - a - b));
            }
        }
        out
    }
}

/// Kind of symmetry orbit: the symmetry mode plus the orbit type index.
///
/// Full symmetry admits types 0/1/2 with 1/3/6 points and 0/1/2 free
/// coordinates; rotational symmetry admits types 0/1 with 1/3 points and
/// 0/2 free coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrbitKind {
    mode: SymmetryMode,
    type_index: u8,
}

impl OrbitKind {
    pub fn new(mode: SymmetryMode, type_index: u8) -> Result<Self, GeometryError> {
        let max = match mode {
            SymmetryMode::Full => 2,
            SymmetryMode::Rotational => 1,
        };
        if type_index > max {
            return Err(GeometryError::InvalidOrbitType { mode, type_index });
        }
        Ok(Self { mode, type_index })
    }

    pub fn mode(&self) -> SymmetryMode {
        self.mode
    }

    pub fn type_index(&self) -> u8 {
        self.type_index
    }

    pub fn point_count(&self) -> usize {
        match (self.mode, self.type_index) {
            (_, 0) => 1,
            (SymmetryMode::Full, 1) | (SymmetryMode::Rotational, 1) => 3,
            (SymmetryMode::Full, _) => 6,
            _ => unreachable!(),
        }
    }

    pub fn param_count(&self) -> usize {
        match (self.mode, self.type_index) {
            (_, 0) => 0,
            (SymmetryMode::Full, 1) => 1,
            _ => 2,
        }
    }
}

/// A symmetry orbit: an orbit kind together with its free parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub kind: OrbitKind,
    pub params: Vec<f64>,
}

impl Orbit {
    pub fn new(kind: OrbitKind, params: Vec<f64>) -> Result<Self, GeometryError> {
        if params.len() != kind.param_count() {
            return Err(GeometryError::ParamCount {
                kind,
                expected: kind.param_count(),
                got: params.len(),
            });
        }
        Ok(Self { kind, params })
    }

    /// Generator point of the orbit.
    pub fn generator(&self) -> ArealPoint {
        match (self.kind.mode, self.kind.type_index) {
            (_, 0) => ArealPoint::centroid(),
            (SymmetryMode::Full, 1) => {
                let a = self.params[0];
                ArealPoint { l1: a, l2: a, l3: 1.0 - 2.0 * a }
            }
            _ => ArealPoint::from_pair(self.params[0], self.params[1]),
        }
    }

    /// All points of the orbit, in a deterministic canonical order.
    pub fn expand(&self) -> Vec<ArealPoint> {
        let g = self.generator();
        match (self.kind.mode, self.kind.type_index) {
            (_, 0) => vec![g],
            (SymmetryMode::Full, 1) => {
                // permutations of (a, a, c): the repeated value leads
                vec![g, g.permuted([0, 2, 1]), g.permuted([2, 0, 1])]
            }
            (SymmetryMode::Rotational, 1) => cyclic_orbit(g),
            (SymmetryMode::Full, _) => {
                let mut pts = cyclic_orbit(g);
                pts.extend(cyclic_orbit(g.permuted([1, 0, 2])));
                pts
            }
            _ => unreachable!(),
        }
    }

    /// Rewrite the parameters so equal orbits get identical encodings:
    /// the generator of a two-parameter orbit is the lexicographically
    /// smallest coordinate triple among the orbit's permutations.
    pub fn canonicalize(&mut self) {
        match (self.kind.mode, self.kind.type_index) {
            (_, 0) | (SymmetryMode::Full, 1) => {}
            _ => {
                let pts = self.expand();
                let best = pts
                    .iter()
                    .min_by(|p, q| {
                        p.coords()
                            .partial_cmp(&q.coords())
                            .unwrap_or(std::cmp::Ordering::Equal)
                    })
                    .expect("orbit is never empty");
                self.params = vec![best.l1, best.l2];
            }
        }
    }
}

/// Cyclic permutation orbit of a point: `(a,b,c), (c,a,b), (b,c,a)`.
fn cyclic_orbit(g: ArealPoint) -> Vec<ArealPoint> {
    vec![g, g.permuted([2, 0, 1]), g.permuted([1, 2, 0])]
}

/// Expand an orbit kind with the given parameters into its points.
pub fn expand_orbit(kind: OrbitKind, params: &[f64]) -> Result<Vec<ArealPoint>, GeometryError> {
    Ok(Orbit::new(kind, params.to_vec())?.expand())
}

/// Which permutation sum to take in [`symmetrized_sum`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumMode {
    /// Sum over all six permutations of the coordinates.
    Full,
    /// Sum over the three cyclic permutations.
    Rotational,
    /// Cyclic permutations minus the three transposed ones.
    Anti,
}

/// The six argument orders of the full permutation sum; the first three are
/// the cyclic ones.
const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [2, 0, 1],
    [1, 2, 0],
    [0, 2, 1],
    [1, 0, 2],
    [2, 1, 0],
];

/// Sum of `f` over permutations of the coordinates of `p`.
///
/// `Full` gives the six-term symmetric sum, `Rotational` the three-term
/// cyclic sum and `Anti` the alternating six-term sum; for any polynomial
/// `f` the rotational sum equals half the sum of the other two.
pub fn symmetrized_sum<F: Fn(ArealPoint) -> f64>(f: F, p: ArealPoint, mode: SumMode) -> f64 {
    let term = |idx: [usize; 3]| f(p.permuted(idx));
    match mode {
        SumMode::Full => PERMUTATIONS.iter().map(|&idx| term(idx)).sum(),
        SumMode::Rotational => PERMUTATIONS[..3].iter().map(|&idx| term(idx)).sum(),
        SumMode::Anti => {
            let even: f64 = PERMUTATIONS[..3].iter().map(|&idx| term(idx)).sum();
            let odd: f64 = PERMUTATIONS[3..].iter().map(|&idx| term(idx)).sum();
            even - odd
        }
    }
}

/// Values of the elementary symmetric polynomials and the alternating
/// polynomial at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementaryValues {
    /// Sum of pairwise products `L1 L2 + L2 L3 + L3 L1`.
    pub e2: f64,
    /// Signed triple product `-L1 L2 L3`.
    pub e3: f64,
    /// Alternating polynomial `(L1 - L2)(L1 - L3)(L2 - L3)`.
    pub alt: f64,
}

/// Evaluate the elementary symmetric values at a point.
///
/// `e2` and `e3` are invariant under any coordinate permutation; `alt`
/// flips sign under a transposition and is invariant under rotations.
pub fn elementary_values(p: ArealPoint) -> ElementaryValues {
    let (l1, l2, l3) = (p.l1, p.l2, p.l3);
    ElementaryValues {
        e2: l1 * l2 + l2 * l3 + l3 * l1,
        e3: -(l1 * l2 * l3),
        alt: (l1 - l2) * (l1 - l3) * (l2 - l3),
    }
}

fn factorial(n: u32) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n as u64 {
        acc *= k;
    }
    acc
}

/// Exact moment of an areal monomial under the area-normalised measure:
/// `(1/A) ∫ L1^a L2^b L3^c dA = 2 a! b! c! / (a+b+c+2)!`.
pub fn exact_moment(m: ArealMonomial) -> BigRational {
    let num = BigInt::from(2) * factorial(m.a) * factorial(m.b) * factorial(m.c);
    let den = factorial(m.degree() + 2);
    BigRational::new(num, den)
}

/// A polynomial in the areal coordinates with exact rational coefficients.
///
/// Used to expand products of elementary symmetric polynomials so that
/// their integrals reduce to sums of exact monomial moments.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalArealPoly {
    terms: BTreeMap<ArealMonomial, BigRational>,
}

impl RationalArealPoly {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert(ArealMonomial::new(0, 0, 0), c);
        }
        p
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn add_term(&mut self, m: ArealMonomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ArealMonomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ArealMonomial::new(ma.a + mb.a, ma.b + mb.b, ma.c + mb.c);
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    /// Elementary symmetric polynomial `L1 L2 + L2 L3 + L3 L1`.
    pub fn pair_sum() -> Self {
        let mut p = Self::zero();
        p.add_term(ArealMonomial::new(1, 1, 0), BigRational::one());
        p.add_term(ArealMonomial::new(0, 1, 1), BigRational::one());
        p.add_term(ArealMonomial::new(1, 0, 1), BigRational::one());
        p
    }

    /// Signed triple product `-L1 L2 L3`.
    pub fn neg_triple() -> Self {
        let mut p = Self::zero();
        p.add_term(ArealMonomial::new(1, 1, 1), -BigRational::one());
        p
    }

    /// Alternating polynomial `(L1 - L2)(L1 - L3)(L2 - L3)` expanded.
    pub fn alternating() -> Self {
        let mut p = Self::zero();
        let one = BigRational::one;
        p.add_term(ArealMonomial::new(2, 1, 0), one());
        p.add_term(ArealMonomial::new(2, 0, 1), -one());
        p.add_term(ArealMonomial::new(1, 2, 0), -one());
        p.add_term(ArealMonomial::new(1, 0, 2), one());
        p.add_term(ArealMonomial::new(0, 2, 1), one());
        p.add_term(ArealMonomial::new(0, 1, 2), -one());
        p
    }

    /// Exact integral under the area-normalised measure.
    pub fn integrate(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            acc += c * exact_moment(*m);
        }
        acc
    }

    /// Exact evaluation at a rational point.
    pub fn eval_rational(&self, coords: &[BigRational; 3]) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for _ in 0..m.a {
                t *= &coords[0];
            }
            for _ in 0..m.b {
                t *= &coords[1];
            }
            for _ in 0..m.c {
                t *= &coords[2];
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, p: ArealPoint) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| c.to_f64().unwrap_or(f64::NAN) * m.eval(p))
            .sum()
    }

    /// Largest total degree among the terms, 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn abs_coeff_sum(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.terms.values() {
            acc += c.abs();
        }
        acc
    }
}

/// Errors from orbit construction and expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeometryError {
    InvalidOrbitType { mode: SymmetryMode, type_index: u8 },
    ParamCount { kind: OrbitKind, expected: usize, got: usize },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::InvalidOrbitType { mode, type_index } => {
                write!(f, "orbit type {type_index} does not exist in {mode} symmetry")
            }
            GeometryError::ParamCount { kind, expected, got } => write!(
                f,
                "orbit {kind:?} takes {expected} parameter(s), got {got}"
            ),
        }
    }
}

impl std::error::Error for GeometryError {}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn moments_of_low_monomials() {
        assert_eq!(exact_moment(ArealMonomial::new(0, 0, 0)), rat(1, 1));
        assert_eq!(exact_moment(ArealMonomial::new(1, 0, 0)), rat(1, 3));
        assert_eq!(exact_moment(ArealMonomial::new(1, 1, 1)), rat(1, 60));
        assert_eq!(exact_moment(ArealMonomial::new(2, 0, 0)), rat(1, 6));
    }

    #[test]
    fn moment_is_permutation_invariant() {
        for (a, b, c) in [(3, 1, 0), (2, 2, 1), (5, 0, 2)] {
            let base = exact_moment(ArealMonomial::new(a, b, c));
            assert_eq!(base, exact_moment(ArealMonomial::new(b, a, c)));
            assert_eq!(base, exact_moment(ArealMonomial::new(c, b, a)));
            assert_eq!(base, exact_moment(ArealMonomial::new(b, c, a)));
        }
    }

    // Test-local Gauss-Legendre nodes on [-1, 1] by Newton iteration, kept
    // independent of the orthopoly module on purpose.
    fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for m in 1..n {
                    let m = m as f64;
                    let p2 = ((2.0 * m + 1.0) * x * p1 - m * p0) / (m + 1.0);
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (mut p0, mut p1) = (1.0, x);
            for m in 1..n {
                let m = m as f64;
                let p2 = ((2.0 * m + 1.0) * x * p1 - m * p0) / (m + 1.0);
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        out
    }

    // Brute-force (1/A) integral over the triangle: iterated Gauss on the
    // unit right triangle with L1 = x, L2 = y, L3 = 1 - x - y.
    fn brute_force_moment(m: ArealMonomial, n: usize) -> f64 {
        let gl = gauss_legendre(n);
        let mut acc = 0.0;
        for &(xi, wi) in &gl {
            let x = 0.5 * (xi + 1.0);
            let span = 1.0 - x;
            for &(yj, wj) in &gl {
                let y = 0.5 * (yj + 1.0) * span;
                let p = ArealPoint::from_pair(x, y);
                acc += wi * wj * 0.25 * span * m.eval(p);
            }
        }
        2.0 * acc
    }

    #[test]
    fn moments_match_numerical_integration() {
        assert!(
            (exact_moment(ArealMonomial::new(1, 1, 1)).to_f64().unwrap()
                - brute_force_moment(ArealMonomial::new(1, 1, 1), 20))
            .abs()
                < 1e-12
        );
        for degree in 0..=10 {
            for m in ArealMonomial::of_degree(degree) {
                let exact = exact_moment(m).to_f64().unwrap();
                let approx = brute_force_moment(m, 20);
                assert!(
                    (exact - approx).abs() < 1e-10,
                    "moment mismatch for {m:?}: {exact} vs {approx}"
                );
            }
        }
    }

    #[test]
    fn orbit_expansion_matches_known_layouts() {
        let full0 = OrbitKind::new(SymmetryMode::Full, 0).unwrap();
        let pts = expand_orbit(full0, &[]).unwrap();
        assert_eq!(pts.len(), 1);
        assert!((pts[0].l1 - 1.0 / 3.0).abs() < 1e-15);

        let full1 = OrbitKind::new(SymmetryMode::Full, 1).unwrap();
        let pts = expand_orbit(full1, &[1.0 / 6.0]).unwrap();
        let expected = [
            [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
            [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
        ];
        for (p, e) in pts.iter().zip(expected) {
            for (x, y) in p.coords().iter().zip(e) {
                assert!((x - y).abs() < 1e-15);
            }
        }

        let rot1 = OrbitKind::new(SymmetryMode::Rotational, 1).unwrap();
        let (a, b) = (0.2, 0.5);
        let c = 1.0 - a - b;
        let pts = expand_orbit(rot1, &[a, b]).unwrap();
        let expected = [[a, b, c], [c, a, b], [b, c, a]];
        for (p, e) in pts.iter().zip(expected) {
            for (x, y) in p.coords().iter().zip(e) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn orbit_param_count_is_enforced() {
        let full1 = OrbitKind::new(SymmetryMode::Full, 1).unwrap();
        assert!(matches!(
            expand_orbit(full1, &[0.1, 0.2]),
            Err(GeometryError::ParamCount { .. })
        ));
        assert!(OrbitKind::new(SymmetryMode::Rotational, 2).is_err());
    }

    #[test]
    fn full_orbit_is_union_of_rotational_orbits() {
        let full2 = OrbitKind::new(SymmetryMode::Full, 2).unwrap();
        let rot1 = OrbitKind::new(SymmetryMode::Rotational, 1).unwrap();
        let (a, b) = (0.11, 0.31);
        let full = expand_orbit(full2, &[a, b]).unwrap();
        let mut rot = expand_orbit(rot1, &[a, b]).unwrap();
        rot.extend(expand_orbit(rot1, &[b, a]).unwrap());
        assert_eq!(full.len(), 6);
        for (p, q) in full.iter().zip(&rot) {
            for (x, y) in p.coords().iter().zip(q.coords()) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn symmetrized_sums_of_simple_polynomials() {
        let p = ArealPoint::from_pair(0.37, 0.21);
        let first = |q: ArealPoint| q.l1;
        assert!((symmetrized_sum(first, p, SumMode::Full) - 2.0).abs() < 1e-14);
        assert!((symmetrized_sum(first, p, SumMode::Rotational) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn antisymmetric_sum_equals_alternating_polynomial() {
        // For f = L1^2 L2 the six-term alternating sum expands exactly to
        // the alternating polynomial.
        let f = |q: ArealPoint| q.l1 * q.l1 * q.l2;
        for p in [
            ArealPoint::from_pair(0.5, 1.0 / 3.0),
            ArealPoint::from_pair(0.1, 0.7),
            ArealPoint::from_pair(0.42, 0.13),
        ] {
            let anti = symmetrized_sum(f, p, SumMode::Anti);
            assert!((anti - elementary_values(p).alt).abs() < 1e-14);
        }
        let p = ArealPoint::new(0.5, 1.0 / 3.0, 1.0 / 6.0);
        assert!((symmetrized_sum(f, p, SumMode::Anti) - 1.0 / 108.0).abs() < 1e-15);
    }

    #[test]
    fn rotational_sum_is_mean_of_full_and_anti() {
        let f = |q: ArealPoint| 0.3 * q.l1 * q.l1 * q.l3 + q.l2 * q.l3 - 1.7 * q.l1;
        for p in [ArealPoint::from_pair(0.2, 0.5), ArealPoint::from_pair(0.61, 0.07)] {
            let ts = symmetrized_sum(f, p, SumMode::Full);
            let ta = symmetrized_sum(f, p, SumMode::Anti);
            let tr = symmetrized_sum(f, p, SumMode::Rotational);
            assert!((tr - 0.5 * (ts + ta)).abs() < 1e-12);
        }
    }

    #[test]
    fn elementary_values_at_reference_points() {
        let v = elementary_values(ArealPoint::centroid());
        assert!((v.e2 - 1.0 / 3.0).abs() < 1e-15);
        assert!((v.e3 + 1.0 / 27.0).abs() < 1e-15);
        assert_eq!(v.alt, 0.0);

        let v = elementary_values(ArealPoint::new(1.0, 0.0, 0.0));
        assert_eq!((v.e2, v.e3, v.alt), (0.0, 0.0, 0.0));

        let v = elementary_values(ArealPoint::new(0.5, 1.0 / 3.0, 1.0 / 6.0));
        assert!((v.e2 - 11.0 / 36.0).abs() < 1e-15);
        assert!((v.e3 + 1.0 / 36.0).abs() < 1e-15);
        assert!((v.alt - 1.0 / 108.0).abs() < 1e-15);
    }

    #[test]
    fn elementary_values_symmetry_behaviour() {
        let p = ArealPoint::from_pair(0.12, 0.55);
        let base = elementary_values(p);
        let swap = elementary_values(ArealPoint::new(p.l2, p.l1, p.l3));
        let cycle = elementary_values(ArealPoint::new(p.l3, p.l1, p.l2));
        assert!((base.e2 - swap.e2).abs() < 1e-15);
        assert!((base.e3 - swap.e3).abs() < 1e-15);
        assert!((base.alt + swap.alt).abs() < 1e-15);
        assert!((base.alt - cycle.alt).abs() < 1e-14);
    }

    #[test]
    fn full_orbit_sum_matches_symmetric_sum_at_generator() {
        let full2 = OrbitKind::new(SymmetryMode::Full, 2).unwrap();
        let m = ArealMonomial::new(3, 1, 2);
        for (a, b) in [(0.15, 0.25), (0.4, 0.35), (0.05, 0.6)] {
            let orbit_sum: f64 = expand_orbit(full2, &[a, b])
                .unwrap()
                .iter()
                .map(|&p| m.eval(p))
                .sum();
            let g = ArealPoint::from_pair(a, b);
            let ts = symmetrized_sum(|q| m.eval(q), g, SumMode::Full);
            assert!((orbit_sum - ts).abs() < 1e-13);
        }
    }

    #[test]
    fn rational_poly_expansion_of_alternating_polynomial() {
        let alt = RationalArealPoly::alternating();
        for p in [ArealPoint::from_pair(0.3, 0.5), ArealPoint::from_pair(0.9, 0.02)] {
            assert!((alt.eval_f64(p) - elementary_values(p).alt).abs() < 1e-14);
        }
        // antisymmetric integrand over a symmetric domain
        assert!(alt.integrate().is_zero());
    }

    #[test]
    fn rational_poly_products_integrate_exactly() {
        let e2 = RationalArealPoly::pair_sum();
        assert_eq!(e2.integrate(), rat(1, 4));
        assert_eq!(e2.mul(&e2).integrate(), rat(1, 15));
    }

    #[test]
    fn canonicalize_picks_lexicographically_smallest_generator() {
        let full2 = OrbitKind::new(SymmetryMode::Full, 2).unwrap();
        let mut orbit = Orbit::new(full2, vec![0.5, 0.3]).unwrap();
        orbit.canonicalize();
        assert!(orbit.params[0] <= orbit.params[1]);
        assert!((orbit.params[0] - 0.2).abs() < 1e-15);
        assert!((orbit.params[1] - 0.3).abs() < 1e-15);

        let rot1 = OrbitKind::new(SymmetryMode::Rotational, 1).unwrap();
        let mut orbit = Orbit::new(rot1, vec![0.5, 0.3]).unwrap();
        orbit.canonicalize();
        // smallest coordinate leads among the three cyclic images
        assert!((orbit.params[0] - 0.2).abs() < 1e-15);
        assert!((orbit.params[1] - 0.5).abs() < 1e-15);
    }
}
