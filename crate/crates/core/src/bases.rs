//! The PKD orthonormal basis on the triangle and its reduced index-set
//! families.
//!
//! A basis polynomial is indexed by a pair `(i, j)`; its degree is
//! `i + j`. The full family contains every pair with `i + j <= phi`.
//! For symmetric or rotationally symmetric rules only a subset of the
//! pairs is needed to express the moment equations ("objective" bases),
//! and this module generates the nine published families together with
//! their closed-form cardinalities and per-degree counts.

use std::collections::HashMap;
use std::fmt;

use num::{BigRational, One, ToPrimitive, Zero};

use crate::geometry::{ArealPoint, Orbit, SymmetryMode};
use crate::orthopoly::{jacobi_derivative_unchecked, jacobi_unchecked};

/// Below this value of `s = L1 + L2` the first PKD factor is evaluated in
/// its expanded homogeneous form, which is exact in the `s -> 0` limit.
const SMALL_S: f64 = 1e-8;

/// The nine index-set families.
///
/// `Full` spans all polynomials of a degree. `Objective` and its swapped
/// twin suffice for fully symmetric rules at roughly half the size;
/// `Even` drops the odd first indices; the three `Minimal*` variants meet
/// the dimension of the symmetric polynomial space exactly. `Rotational`
/// and its swapped twin are the minimal families for rotationally
/// symmetric rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Full,
    Objective,
    ObjectiveSwapped,
    Even,
    Minimal,
    MinimalHigh,
    MinimalMinMax,
    Rotational,
    RotationalSwapped,
}

impl BasisKind {
    pub const ALL: [BasisKind; 9] = [
        BasisKind::Full,
        BasisKind::Objective,
        BasisKind::ObjectiveSwapped,
        BasisKind::Even,
        BasisKind::Minimal,
        BasisKind::MinimalHigh,
        BasisKind::MinimalMinMax,
        BasisKind::Rotational,
        BasisKind::RotationalSwapped,
    ];

    /// Short code used in CLI flags and table headers.
    pub fn code(&self) -> &'static str {
        match self {
            BasisKind::Full => "f",
            BasisKind::Objective => "w",
            BasisKind::ObjectiveSwapped => "w2",
            BasisKind::Even => "e",
            BasisKind::Minimal => "m",
            BasisKind::MinimalHigh => "m2",
            BasisKind::MinimalMinMax => "m3",
            BasisKind::Rotational => "r",
            BasisKind::RotationalSwapped => "r2",
        }
    }

    pub fn from_code(code: &str) -> Option<BasisKind> {
        BasisKind::ALL.iter().copied().find(|k| k.code() == code)
    }

    /// Whether residual rows in this basis may be assembled over orbits of
    /// the given symmetry mode. The full family spans everything and so
    /// serves both modes; the rotational families serve rotational orbits
    /// only; the remaining families serve fully symmetric orbits only.
    pub fn supports_mode(&self, mode: SymmetryMode) -> bool {
        match self {
            BasisKind::Full => true,
            BasisKind::Rotational | BasisKind::RotationalSwapped => {
                mode == SymmetryMode::Rotational
            }
            _ => mode == SymmetryMode::Full,
        }
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// Index pair of a PKD basis polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex {
    pub i: u32,
    pub j: u32,
}

impl BasisIndex {
    pub fn new(i: u32, j: u32) -> Self {
        Self { i, j }
    }

    pub fn degree(&self) -> u32 {
        self.i + self.j
    }
}

/// An ordered index set: all pairs of one family at one degree, sorted by
/// (degree, first index).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisIndexSet {
    kind: BasisKind,
    degree: u32,
    members: Vec<BasisIndex>,
}

impl BasisIndexSet {
    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn members(&self) -> &[BasisIndex] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, idx: BasisIndex) -> bool {
        self.members.binary_search_by(canonical_cmp(idx)).is_ok()
    }
}

fn canonical_cmp(target: BasisIndex) -> impl Fn(&BasisIndex) -> std::cmp::Ordering {
    move |probe: &BasisIndex| {
        (probe.degree(), probe.i).cmp(&(target.degree(), target.i))
    }
}

/// Indicator of `omega = 1 (mod a)`, the correction term in the minimal
/// cardinality formulas.
fn kappa(a: i64, omega: i64) -> i64 {
    i64::from(omega.rem_euclid(a) == 1)
}

fn member_of(kind: BasisKind, phi: i64, i: i64, j: i64) -> bool {
    if i < 0 || j < 0 || i + j > phi {
        return false;
    }
    match kind {
        BasisKind::Full => true,
        BasisKind::Objective => i <= j && j <= phi - i,
        BasisKind::ObjectiveSwapped => j <= i && i <= phi - j,
        BasisKind::Even => i % 2 == 0 && i <= j && j <= phi - i,
        BasisKind::Minimal => {
            i % 2 == 0 && i <= phi / 3 && 2 * i <= j && j <= phi - i && j != 2 * i + 1
        }
        BasisKind::MinimalHigh => i % 2 == 0 && j <= (phi - i).min(i / 2),
        BasisKind::MinimalMinMax => {
            i % 2 == 0
                && i <= 2 * (phi / 3) + 2 * kappa(6, phi - 1)
                && 2 * (i / 4) <= j
                && j <= (phi - i).min(2 * i)
        }
        BasisKind::Rotational => {
            i <= phi / 3 && 2 * i <= j && j <= phi - i && j != 2 * i + 1
        }
        BasisKind::RotationalSwapped => j <= (phi - i).min(i / 2 - kappa(2, i)),
    }
}

/// The exact index set of a family at a degree, in canonical order.
pub fn index_set(kind: BasisKind, phi: u32) -> BasisIndexSet {
    let phi_i = phi as i64;
    let mut members = Vec::new();
    for i in 0..=phi_i {
        for j in 0..=(phi_i - i) {
            if member_of(kind, phi_i, i, j) {
                members.push(BasisIndex::new(i as u32, j as u32));
            }
        }
    }
    members.sort_by_key(|m| (m.degree(), m.i));
    BasisIndexSet { kind, degree: phi, members }
}

/// Closed-form cardinality of a family at degree `phi`.
pub fn cardinality(kind: BasisKind, phi: u32) -> usize {
    let p = phi as i64;
    let n = match kind {
        BasisKind::Full => (p + 1) * (p + 2) / 2,
        BasisKind::Objective | BasisKind::ObjectiveSwapped => (p + 2) * (p + 2) / 4,
        BasisKind::Even => (p + 3) * (p + 3) / 8,
        BasisKind::Minimal | BasisKind::MinimalHigh | BasisKind::MinimalMinMax => {
            ((p + 3) * (p + 3) + 3) / 12
        }
        BasisKind::Rotational | BasisKind::RotationalSwapped => 1 + (p + 3) * p / 6,
    };
    n as usize
}

/// Closed-form count of family members of degree exactly `omega`.
pub fn per_degree(kind: BasisKind, omega: u32) -> usize {
    let w = omega as i64;
    let m = match kind {
        BasisKind::Full => w + 1,
        BasisKind::Objective | BasisKind::ObjectiveSwapped => 1 + w / 2,
        BasisKind::Even => 1 + w / 4,
        BasisKind::Minimal | BasisKind::MinimalHigh | BasisKind::MinimalMinMax => {
            1 + w / 6 - kappa(6, w)
        }
        BasisKind::Rotational | BasisKind::RotationalSwapped => 1 + w / 3 - kappa(3, w),
    };
    m as usize
}

/// Monomial coefficients of the Legendre polynomial of degree `n`, exact.
fn legendre_coefficients(n: u32) -> Vec<BigRational> {
    let mut rows: Vec<Vec<BigRational>> = vec![vec![BigRational::one()]];
    if n >= 1 {
        rows.push(vec![BigRational::zero(), BigRational::one()]);
    }
    for m in 1..n as usize {
        let prev = &rows[m - 1];
        let cur = &rows[m];
        let mf = BigRational::from_integer(m.into());
        let k1 = (BigRational::from_integer(2.into()) * &mf + BigRational::one())
            / (&mf + BigRational::one());
        let k2 = &mf / (&mf + BigRational::one());
        let mut next = vec![BigRational::zero(); m + 2];
        for (pow, c) in cur.iter().enumerate() {
            next[pow + 1] += &k1 * c;
        }
        for (pow, c) in prev.iter().enumerate() {
            next[pow] -= &k2 * c;
        }
        rows.push(next);
    }
    rows.swap_remove(n as usize)
}

fn legendre_coefficients_f64(n: u32) -> Vec<f64> {
    legendre_coefficients(n)
        .into_iter()
        .map(|c| c.to_f64().unwrap_or(f64::NAN))
        .collect()
}

/// First PKD factor `s^i P_i(d/s)` together with its partial derivatives
/// with respect to `d` and `s`.
fn first_factor(i: u32, d: f64, s: f64, coeffs: &[f64]) -> (f64, f64, f64) {
    if i == 0 {
        return (1.0, 0.0, 0.0);
    }
    if s.abs() > SMALL_S {
        let x = d / s;
        let p = jacobi_unchecked(i, 0.0, 0.0, x);
        let dp = jacobi_derivative_unchecked(i, 0.0, 0.0, x);
        let s_im1 = s.powi(i as i32 - 1);
        let g = p * s_im1 * s;
        let gd = dp * s_im1;
        let gs = i as f64 * p * s_im1 - d * dp * s_im1 / s;
        (g, gd, gs)
    } else {
        // homogeneous form: sum_m c_m d^m s^(i-m); only parities m = i (mod 2)
        let (mut g, mut gd, mut gs) = (0.0, 0.0, 0.0);
        for (m, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let m = m as u32;
            let dp = d.powi(m as i32);
            let sp = s.powi((i - m) as i32);
            g += c * dp * sp;
            if m >= 1 {
                gd += c * m as f64 * d.powi(m as i32 - 1) * sp;
            }
            if i - m >= 1 {
                gs += c * (i - m) as f64 * dp * s.powi((i - m) as i32 - 1);
            }
        }
        (g, gd, gs)
    }
}

/// Value of the PKD basis polynomial with index pair `(i, j)` at a point.
pub fn eval_pkd(i: u32, j: u32, p: ArealPoint) -> f64 {
    let (d, s) = p.diff_sum();
    let coeffs;
    let table: &[f64] = if s.abs() > SMALL_S {
        &[]
    } else {
        coeffs = legendre_coefficients_f64(i);
        &coeffs
    };
    let (g, _, _) = first_factor(i, d, s, table);
    let alpha = 2.0 * i as f64 + 1.0;
    let scale = (alpha * 2.0 * (i + j + 1) as f64).sqrt();
    scale * g * jacobi_unchecked(j, alpha, 0.0, 1.0 - 2.0 * s)
}

/// Gradient of the PKD basis polynomial with respect to `(L1, L2)`,
/// holding `L3 = 1 - L1 - L2`.
pub fn eval_pkd_gradient(i: u32, j: u32, p: ArealPoint) -> (f64, f64) {
    let (d, s) = p.diff_sum();
    let coeffs;
    let table: &[f64] = if s.abs() > SMALL_S {
        &[]
    } else {
        coeffs = legendre_coefficients_f64(i);
        &coeffs
    };
    let (g, gd, gs) = first_factor(i, d, s, table);
    let alpha = 2.0 * i as f64 + 1.0;
    let scale = (alpha * 2.0 * (i + j + 1) as f64).sqrt();
    let z = 1.0 - 2.0 * s;
    let b = jacobi_unchecked(j, alpha, 0.0, z);
    let bs = -2.0 * jacobi_derivative_unchecked(j, alpha, 0.0, z);
    // d(d)/dL1 = -1, d(s)/dL1 = 1; d(d)/dL2 = +1, d(s)/dL2 = 1
    let gl1 = scale * ((-gd + gs) * b + g * bs);
    let gl2 = scale * ((gd + gs) * b + g * bs);
    (gl1, gl2)
}

/// Batch evaluator for PKD basis polynomials up to a degree.
///
/// Evaluates the triangular family at a point with one recurrence sweep
/// per first index, in the canonical (degree, first index) order. An
/// evaluator restricted to a subset of the family skips the recurrence
/// sweeps no subset member needs; value positions always refer to the
/// full family's canonical order.
pub struct PkdEvaluator {
    degree: u32,
    members: Vec<BasisIndex>,
    position: HashMap<(u32, u32), usize>,
    /// Largest second index needed per first index; `None` skips the row.
    max_j: Vec<Option<u32>>,
    legendre_tables: Vec<Vec<f64>>,
}

impl PkdEvaluator {
    pub fn new(degree: u32) -> Self {
        let max_j = (0..=degree).map(|i| Some(degree - i)).collect();
        Self::with_rows(degree, max_j)
    }

    /// Evaluator computing only the rows needed by the given members.
    pub fn for_members(degree: u32, needed: &[BasisIndex]) -> Self {
        let mut max_j: Vec<Option<u32>> = vec![None; degree as usize + 1];
        for m in needed {
            let slot = &mut max_j[m.i as usize];
            *slot = Some(slot.map_or(m.j, |j| j.max(m.j)));
        }
        Self::with_rows(degree, max_j)
    }

    fn with_rows(degree: u32, max_j: Vec<Option<u32>>) -> Self {
        let set = index_set(BasisKind::Full, degree);
        let members = set.members().to_vec();
        let position = members
            .iter()
            .enumerate()
            .map(|(pos, m)| ((m.i, m.j), pos))
            .collect();
        let legendre_tables = (0..=degree).map(legendre_coefficients_f64).collect();
        Self { degree, members, position, max_j, legendre_tables }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[BasisIndex] {
        &self.members
    }

    pub fn position(&self, idx: BasisIndex) -> Option<usize> {
        self.position.get(&(idx.i, idx.j)).copied()
    }

    /// Values of every basis polynomial at `p`, canonical order.
    pub fn values(&self, p: ArealPoint) -> Vec<f64> {
        let mut values = vec![0.0; self.len()];
        self.fill(p, &mut values, None);
        values
    }

    /// Values and `(L1, L2)` gradients of every basis polynomial at `p`.
    pub fn values_and_gradients(&self, p: ArealPoint) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut values = vec![0.0; self.len()];
        let mut gl1 = vec![0.0; self.len()];
        let mut gl2 = vec![0.0; self.len()];
        self.fill(p, &mut values, Some((&mut gl1, &mut gl2)));
        (values, gl1, gl2)
    }

    /// As [`values`](Self::values), writing into a caller-provided buffer.
    pub fn values_into(&self, p: ArealPoint, out: &mut [f64]) {
        self.fill(p, out, None);
    }

    /// As [`values_and_gradients`](Self::values_and_gradients) with
    /// caller-provided buffers.
    pub fn values_and_gradients_into(
        &self,
        p: ArealPoint,
        values: &mut [f64],
        gl1: &mut [f64],
        gl2: &mut [f64],
    ) {
        self.fill(p, values, Some((gl1, gl2)));
    }

    fn fill(&self, p: ArealPoint, values: &mut [f64], grads: Option<(&mut [f64], &mut [f64])>) {
        let (d, s) = p.diff_sum();
        let z = 1.0 - 2.0 * s;
        let want_grads = grads.is_some();
        let (mut gl1, mut gl2) = match grads {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        };
        for i in 0..=self.degree {
            let Some(j_top) = self.max_j[i as usize] else {
                continue;
            };
            let alpha = 2.0 * i as f64 + 1.0;
            let (g, gd, gs) = first_factor(i, d, s, &self.legendre_tables[i as usize]);
            // second-factor recurrence over j, plus the derivative family
            let mut b_prev = 0.0;
            let mut b_cur = 1.0;
            let mut db_prev = 0.0;
            let mut db_cur = 1.0; // P_0^(alpha+1,1)
            for j in 0..=j_top {
                if j > 0 {
                    let next = jacobi_step(j, alpha, 0.0, z, b_cur, b_prev);
                    b_prev = b_cur;
                    b_cur = next;
                    if want_grads && j > 1 {
                        let next = jacobi_step(j - 1, alpha + 1.0, 1.0, z, db_cur, db_prev);
                        db_prev = db_cur;
                        db_cur = next;
                    }
                }
                let pos = self.position[&(i, j)];
                let scale = (alpha * 2.0 * (i + j + 1) as f64).sqrt();
                values[pos] = scale * g * b_cur;
                if want_grads {
                    let dpj = if j == 0 {
                        0.0
                    } else {
                        0.5 * (j as f64 + alpha + 1.0) * db_cur
                    };
                    let bs = -2.0 * dpj;
                    let v1 = scale * ((-gd + gs) * b_cur + g * bs);
                    let v2 = scale * ((gd + gs) * b_cur + g * bs);
                    gl1.as_mut().unwrap()[pos] = v1;
                    gl2.as_mut().unwrap()[pos] = v2;
                }
            }
        }
    }
}

/// One step of the Jacobi three-term recurrence: the value at degree
/// `target >= 1` from the values at the two preceding degrees.
fn jacobi_step(target: u32, alpha: f64, beta: f64, x: f64, cur: f64, prev: f64) -> f64 {
    if target == 1 {
        return (alpha + 1.0) + (alpha + beta + 2.0) * (x - 1.0) / 2.0;
    }
    let m = target as f64;
    let a = m + alpha;
    let b = m + beta;
    let c = 2.0 * m + alpha + beta;
    let denom = 2.0 * m * (m + alpha + beta) * (c - 2.0);
    ((c - 1.0) * (c * (c - 2.0) * x + alpha * alpha - beta * beta) * cur
        - 2.0 * (a - 1.0) * (b - 1.0) * c * prev)
        / denom
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasesError {
    /// Basis family cannot serve orbits of this symmetry mode.
    ModeMismatch { kind: BasisKind, mode: SymmetryMode },
}

impl fmt::Display for BasesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasesError::ModeMismatch { kind, mode } => {
                write!(f, "basis family '{kind}' cannot be used with {mode}-symmetry orbits")
            }
        }
    }
}

impl std::error::Error for BasesError {}

/// Sum of one PKD basis polynomial over all points of an orbit, the
/// residual-row contribution of that orbit.
///
/// For an even first index the polynomial is even in `d`, so over a
/// six-point orbit the sum is twice the sum over the three cyclic points.
pub fn symmetrized_residual_row(
    kind: BasisKind,
    index: BasisIndex,
    orbit: &Orbit,
) -> Result<f64, BasesError> {
    let mode = orbit.kind.mode();
    if !kind.supports_mode(mode) {
        return Err(BasesError::ModeMismatch { kind, mode });
    }
    let points = orbit.expand();
    if index.i % 2 == 0 && points.len() == 6 {
        let half: f64 = points[..3].iter().map(|&p| eval_pkd(index.i, index.j, p)).sum();
        return Ok(2.0 * half);
    }
    Ok(points.iter().map(|&p| eval_pkd(index.i, index.j, p)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ArealMonomial, OrbitKind, RationalArealPoly};

    #[test]
    fn full_index_set_at_degree_two() {
        let set = index_set(BasisKind::Full, 2);
        let got: Vec<(u32, u32)> = set.members().iter().map(|m| (m.i, m.j)).collect();
        assert_eq!(got, vec![(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]);
    }

    #[test]
    fn rotational_index_set_at_degree_three() {
        let set = index_set(BasisKind::Rotational, 3);
        let got: Vec<(u32, u32)> = set.members().iter().map(|m| (m.i, m.j)).collect();
        assert_eq!(got, vec![(0, 0), (0, 2), (0, 3), (1, 2)]);
        assert_eq!(set.len(), cardinality(BasisKind::Rotational, 3));
    }

    #[test]
    fn cardinality_spot_values() {
        assert_eq!(cardinality(BasisKind::Full, 15), 136);
        assert_eq!(cardinality(BasisKind::Objective, 15), 72);
        assert_eq!(cardinality(BasisKind::Even, 15), 40);
        assert_eq!(cardinality(BasisKind::Minimal, 15), 27);
        assert_eq!(cardinality(BasisKind::Rotational, 15), 46);
        assert_eq!(per_degree(BasisKind::Minimal, 1), 0);
        assert_eq!(per_degree(BasisKind::Minimal, 7), 1);
    }

    #[test]
    fn enumeration_matches_closed_forms() {
        for kind in BasisKind::ALL {
            for phi in 0..=30 {
                let set = index_set(kind, phi);
                assert_eq!(
                    set.len(),
                    cardinality(kind, phi),
                    "cardinality mismatch for {kind} at degree {phi}"
                );
                for omega in 0..=phi {
                    let count = set.members().iter().filter(|m| m.degree() == omega).count();
                    assert_eq!(
                        count,
                        per_degree(kind, omega),
                        "per-degree mismatch for {kind} at degree {phi}, omega {omega}"
                    );
                }
            }
        }
    }

    #[test]
    fn swapped_families_are_index_swaps() {
        for phi in 0..=20 {
            let pairs = [
                (BasisKind::Objective, BasisKind::ObjectiveSwapped),
                (BasisKind::Rotational, BasisKind::RotationalSwapped),
            ];
            for (base, swapped) in pairs {
                let mut expect: Vec<(u32, u32)> = index_set(base, phi)
                    .members()
                    .iter()
                    .map(|m| (m.j, m.i))
                    .collect();
                expect.sort_by_key(|&(i, j)| (i + j, i));
                let got: Vec<(u32, u32)> = index_set(swapped, phi)
                    .members()
                    .iter()
                    .map(|m| (m.i, m.j))
                    .collect();
                assert_eq!(got, expect, "{base}/{swapped} at degree {phi}");
            }
        }
    }

    #[test]
    fn family_inclusions() {
        for phi in 0..=20 {
            let w = index_set(BasisKind::Objective, phi);
            let e = index_set(BasisKind::Even, phi);
            let m = index_set(BasisKind::Minimal, phi);
            let r = index_set(BasisKind::Rotational, phi);
            for idx in e.members() {
                assert!(w.contains(*idx), "even not in objective at {phi}: {idx:?}");
            }
            for idx in m.members() {
                assert!(e.contains(*idx), "minimal not in even at {phi}: {idx:?}");
                assert!(r.contains(*idx), "minimal not in rotational at {phi}: {idx:?}");
            }
        }
    }

    #[test]
    fn pkd_values_at_special_points() {
        let sqrt2 = 2.0_f64.sqrt();
        for p in [ArealPoint::centroid(), ArealPoint::from_pair(0.2, 0.3)] {
            assert!((eval_pkd(0, 0, p) - sqrt2).abs() < 1e-14);
        }
        assert!(eval_pkd(1, 0, ArealPoint::centroid()).abs() < 1e-15);
        assert!(eval_pkd(0, 1, ArealPoint::centroid()).abs() < 1e-14);
    }

    #[test]
    fn pkd_norm_of_a_low_mode_is_one() {
        // psi_01 = 4 - 6 L1 - 6 L2; under f -> (1/(2A)) integral of f^2
        // its norm must be exactly 1, pinning the measure convention.
        let mut poly = RationalArealPoly::zero();
        poly.add_term(ArealMonomial::new(0, 0, 0), BigRational::from_integer(4.into()));
        poly.add_term(ArealMonomial::new(1, 0, 0), BigRational::from_integer((-6).into()));
        poly.add_term(ArealMonomial::new(0, 1, 0), BigRational::from_integer((-6).into()));
        let norm2 = poly.mul(&poly).integrate() / BigRational::from_integer(2.into());
        assert!(norm2.is_one());
    }

    #[test]
    fn pkd_gradients_match_finite_differences() {
        let h = 1e-6;
        let pts = [
            ArealPoint::from_pair(0.25, 0.4),
            ArealPoint::from_pair(0.11, 0.17),
            ArealPoint::from_pair(0.55, 0.1),
        ];
        for &(i, j) in &[(0u32, 0u32), (0, 1), (1, 0), (2, 3), (3, 2), (5, 4), (4, 0)] {
            for &p in &pts {
                let (g1, g2) = eval_pkd_gradient(i, j, p);
                let fd1 = (eval_pkd(i, j, ArealPoint::from_pair(p.l1 + h, p.l2))
                    - eval_pkd(i, j, ArealPoint::from_pair(p.l1 - h, p.l2)))
                    / (2.0 * h);
                let fd2 = (eval_pkd(i, j, ArealPoint::from_pair(p.l1, p.l2 + h))
                    - eval_pkd(i, j, ArealPoint::from_pair(p.l1, p.l2 - h)))
                    / (2.0 * h);
                assert!(
                    ((g1 - fd1) / (1.0 + g1.abs())).abs() < 1e-7,
                    "dL1 mismatch at ({i},{j}): {g1} vs {fd1}"
                );
                assert!(
                    ((g2 - fd2) / (1.0 + g2.abs())).abs() < 1e-7,
                    "dL2 mismatch at ({i},{j}): {g2} vs {fd2}"
                );
            }
        }
    }

    #[test]
    fn gradient_examples() {
        let (g1, g2) = eval_pkd_gradient(0, 0, ArealPoint::from_pair(0.3, 0.3));
        assert_eq!((g1, g2), (0.0, 0.0));
        let (g1, g2) = eval_pkd_gradient(0, 1, ArealPoint::centroid());
        assert!((g1 + 6.0).abs() < 1e-13 && (g2 + 6.0).abs() < 1e-13);
        // odd first factor: antisymmetric partials on the symmetry axis
        for a in [0.1, 0.3, 0.45] {
            let p = ArealPoint::from_pair(a, a);
            let (g1, g2) = eval_pkd_gradient(1, 0, p);
            assert!((g1 + g2).abs() < 1e-12);
        }
    }

    #[test]
    fn small_s_evaluation_is_continuous() {
        // approach the vertex L3 = 1 along a ray; the homogeneous branch
        // must agree with the recurrence branch just above the threshold
        for &(i, j) in &[(2u32, 1u32), (3, 0), (4, 2), (5, 1)] {
            let near = ArealPoint::from_pair(0.4e-8, 0.2e-8); // s below threshold
            let above = ArealPoint::from_pair(0.4e-7, 0.2e-7); // s above threshold
            let v_near = eval_pkd(i, j, near);
            let v_above = eval_pkd(i, j, above);
            assert!(
                (v_near - v_above).abs() < 1e-6 * (1.0 + v_above.abs()),
                "discontinuity at ({i},{j}): {v_near} vs {v_above}"
            );
        }
        // exactly at the vertex the value is finite
        let vertex = ArealPoint::new(0.0, 0.0, 1.0);
        for &(i, j) in &[(0u32, 0u32), (1, 0), (2, 0), (3, 2)] {
            assert!(eval_pkd(i, j, vertex).is_finite());
        }
    }

    #[test]
    fn batch_evaluator_matches_single_evaluations() {
        let ev = PkdEvaluator::new(9);
        let pts = [
            ArealPoint::from_pair(0.2, 0.5),
            ArealPoint::from_pair(0.05, 0.03),
            ArealPoint::from_pair(0.6, 0.39),
            ArealPoint::from_pair(1e-9, 2e-9),
            ArealPoint::from_pair(-0.1, 0.4),
        ];
        for &p in &pts {
            let (vals, gl1, gl2) = ev.values_and_gradients(p);
            for (pos, m) in ev.members().iter().enumerate() {
                let v = eval_pkd(m.i, m.j, p);
                let (g1, g2) = eval_pkd_gradient(m.i, m.j, p);
                assert!(
                    (vals[pos] - v).abs() < 1e-11 * (1.0 + v.abs()),
                    "value mismatch at {m:?} {p:?}: {} vs {v}",
                    vals[pos]
                );
                assert!((gl1[pos] - g1).abs() < 1e-9 * (1.0 + g1.abs()));
                assert!((gl2[pos] - g2).abs() < 1e-9 * (1.0 + g2.abs()));
            }
        }
    }

    #[test]
    fn residual_rows_over_orbits() {
        let full1 = Orbit::new(OrbitKind::new(SymmetryMode::Full, 1).unwrap(), vec![0.21]).unwrap();
        let row = symmetrized_residual_row(BasisKind::Full, BasisIndex::new(1, 0), &full1).unwrap();
        assert!(row.abs() < 1e-13, "odd first index must cancel: {row}");

        let full2 =
            Orbit::new(OrbitKind::new(SymmetryMode::Full, 2).unwrap(), vec![0.15, 0.3]).unwrap();
        let row = symmetrized_residual_row(BasisKind::Full, BasisIndex::new(0, 0), &full2).unwrap();
        assert!((row - 6.0 * 2.0_f64.sqrt()).abs() < 1e-12);

        let full0 = Orbit::new(OrbitKind::new(SymmetryMode::Full, 0).unwrap(), vec![]).unwrap();
        let row = symmetrized_residual_row(BasisKind::Full, BasisIndex::new(0, 1), &full0).unwrap();
        assert!(row.abs() < 1e-13);
    }

    #[test]
    fn residual_row_even_shortcut_matches_plain_sum() {
        let full2 =
            Orbit::new(OrbitKind::new(SymmetryMode::Full, 2).unwrap(), vec![0.12, 0.37]).unwrap();
        for &(i, j) in &[(0u32, 2u32), (2, 1), (2, 4), (4, 0)] {
            let row =
                symmetrized_residual_row(BasisKind::Even, BasisIndex::new(i, j), &full2).unwrap();
            let plain: f64 = full2.expand().iter().map(|&p| eval_pkd(i, j, p)).sum();
            assert!((row - plain).abs() < 1e-12 * (1.0 + plain.abs()));
        }
    }

    #[test]
    fn residual_row_rejects_mode_mismatch() {
        let rot1 =
            Orbit::new(OrbitKind::new(SymmetryMode::Rotational, 1).unwrap(), vec![0.2, 0.3])
                .unwrap();
        assert!(matches!(
            symmetrized_residual_row(BasisKind::Minimal, BasisIndex::new(0, 2), &rot1),
            Err(BasesError::ModeMismatch { .. })
        ));
        let full1 = Orbit::new(OrbitKind::new(SymmetryMode::Full, 1).unwrap(), vec![0.2]).unwrap();
        assert!(matches!(
            symmetrized_residual_row(BasisKind::Rotational, BasisIndex::new(0, 2), &full1),
            Err(BasesError::ModeMismatch { .. })
        ));
        // the full family serves both modes
        assert!(symmetrized_residual_row(BasisKind::Full, BasisIndex::new(0, 2), &rot1).is_ok());
    }
}
