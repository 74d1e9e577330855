//! Enumeration of orbit combinations and the nonlinear least-squares
//! search for cubature rules.
//!
//! A candidate rule is a set of symmetry orbits with free coordinates and
//! one weight per orbit. Requiring exactness for every polynomial of a
//! basis yields a square-ish nonlinear system; the search repeatedly draws
//! random orbit coordinates, solves for the weights by linear least
//! squares, then polishes coordinates and weights jointly with damped
//! Gauss-Newton (Levenberg-Marquardt damping). Every converged candidate
//! is re-verified against exact monomial moments before it is returned.

use std::fmt;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bases::{index_set, BasisKind, PkdEvaluator};
use crate::geometry::{ArealPoint, Orbit, OrbitKind, SymmetryMode};
use crate::rulekit;
use crate::symbasis::{orthonormalize, OrthoSymBasis};

/// Areal coordinates at or above `-BOUNDARY_TOL` count as inside the
/// triangle; shared by quality classification and verification.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Points this close to the boundary demote an otherwise PI rule during
/// selection.
const NEAR_BOUNDARY: f64 = 1e-6;

/// Two rules with the same combination whose canonical parameter/weight
/// lists agree componentwise to this tolerance are duplicates.
const DUPLICATE_TOL: f64 = 1e-9;

const LAMBDA_INIT: f64 = 1e-3;
const LAMBDA_SHRINK: f64 = 0.3;
const LAMBDA_GROW: f64 = 10.0;
const LAMBDA_MAX: f64 = 1e10;

/// Rule quality: `P`/`N` for all-positive weights or not, `I`/`O` for all
/// points inside the triangle or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quality {
    PI,
    NI,
    PO,
    NO,
}

impl Quality {
    pub fn parse(s: &str) -> Option<Quality> {
        match s {
            "PI" => Some(Quality::PI),
            "NI" => Some(Quality::NI),
            "PO" => Some(Quality::PO),
            "NO" => Some(Quality::NO),
            _ => None,
        }
    }
}

impl fmt::Display for Quality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Quality::PI => "PI",
            Quality::NI => "NI",
            Quality::PO => "PO",
            Quality::NO => "NO",
        };
        write!(f, "{s}")
    }
}

/// Orbit-structure of a rule: how many orbits of each type it uses.
///
/// Full symmetry uses counts `[n0, n1, n2]` for `n0 + 3 n1 + 6 n2` points;
/// rotational symmetry uses `[n0, n1]` for `n0 + 3 n1` points. At most one
/// centroid orbit is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrbitCombination {
    mode: SymmetryMode,
    counts: [usize; 3],
}

impl OrbitCombination {
    pub fn new(mode: SymmetryMode, counts: [usize; 3]) -> Result<Self, SolverError> {
        if counts[0] > 1 || (mode == SymmetryMode::Rotational && counts[2] != 0) {
            return Err(SolverError::InvalidCombination { mode, counts });
        }
        Ok(Self { mode, counts })
    }

    pub fn mode(&self) -> SymmetryMode {
        self.mode
    }

    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn point_count(&self) -> usize {
        self.counts[0] + 3 * self.counts[1] + 6 * self.counts[2]
    }

    /// Number of unknowns: free coordinates plus one weight per orbit.
    pub fn unknown_count(&self) -> usize {
        let per_type1 = match self.mode {
            SymmetryMode::Full => 2,       // one coordinate + weight
            SymmetryMode::Rotational => 3, // two coordinates + weight
        };
        self.counts[0] + per_type1 * self.counts[1] + 3 * self.counts[2]
    }

    /// The orbit kinds of the combination, type 0 first.
    pub fn orbit_kinds(&self) -> Vec<OrbitKind> {
        let mut kinds = Vec::new();
        for (type_index, &count) in self.counts.iter().enumerate() {
            for _ in 0..count {
                kinds.push(OrbitKind::new(self.mode, type_index as u8).expect("valid type"));
            }
        }
        kinds
    }
}

impl fmt::Display for OrbitCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            SymmetryMode::Full => {
                write!(f, "[{},{},{}]", self.counts[0], self.counts[1], self.counts[2])
            }
            SymmetryMode::Rotational => write!(f, "[{},{}]", self.counts[0], self.counts[1]),
        }
    }
}

/// All orbit combinations with the given total point count, sorted by the
/// number of type-1 orbits.
///
/// For rotational symmetry there is exactly one combination when
/// `npoints mod 3` is 0 or 1, and none when it is 2.
pub fn enumerate_combinations(mode: SymmetryMode, npoints: usize) -> Vec<OrbitCombination> {
    let mut out = Vec::new();
    match mode {
        SymmetryMode::Full => {
            for n0 in 0..=1usize.min(npoints) {
                let rem = npoints - n0;
                if rem % 3 != 0 {
                    continue;
                }
                let thirds = rem / 3;
                for n2 in 0..=(thirds / 2) {
                    let n1 = thirds - 2 * n2;
                    out.push(OrbitCombination { mode, counts: [n0, n1, n2] });
                }
            }
            out.sort_by_key(|c| c.counts[1]);
        }
        SymmetryMode::Rotational => {
            let n0 = npoints % 3;
            if n0 <= 1 && npoints >= 1 {
                out.push(OrbitCombination { mode, counts: [n0, (npoints - n0) / 3, 0] });
            }
        }
    }
    out
}

/// Where a rule came from: the search seed and the attempt that found it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Provenance {
    pub seed: u64,
    pub attempt: u64,
}

/// One orbit of a rule together with its per-point weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedOrbit {
    pub orbit: Orbit,
    pub weight: f64,
}

/// A candidate (or certified) cubature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRule {
    pub mode: SymmetryMode,
    pub degree: u32,
    pub orbits: Vec<WeightedOrbit>,
    pub provenance: Provenance,
}

impl CandidateRule {
    pub fn new(
        mode: SymmetryMode,
        degree: u32,
        orbits: Vec<WeightedOrbit>,
    ) -> Result<Self, SolverError> {
        for wo in &orbits {
            if wo.orbit.kind.mode() != mode {
                return Err(SolverError::OrbitModeMismatch { mode });
            }
            if !wo.weight.is_finite() {
                return Err(SolverError::NonFiniteWeight);
            }
        }
        Ok(Self { mode, degree, orbits, provenance: Provenance::default() })
    }

    pub fn point_count(&self) -> usize {
        self.orbits.iter().map(|wo| wo.orbit.kind.point_count()).sum()
    }

    pub fn combination(&self) -> OrbitCombination {
        let mut counts = [0usize; 3];
        for wo in &self.orbits {
            counts[wo.orbit.kind.type_index() as usize] += 1;
        }
        OrbitCombination { mode: self.mode, counts }
    }

    /// Every point of the rule with its weight.
    pub fn expanded(&self) -> Vec<(ArealPoint, f64)> {
        let mut out = Vec::with_capacity(self.point_count());
        for wo in &self.orbits {
            for p in wo.orbit.expand() {
                out.push((p, wo.weight));
            }
        }
        out
    }

    /// Canonical form: canonical orbit generators, orbits sorted by type
    /// then parameters then weight.
    pub fn canonicalize(&mut self) {
        for wo in &mut self.orbits {
            wo.orbit.canonicalize();
        }
        self.orbits.sort_by(|a, b| {
            let ka = (a.orbit.kind.type_index(), &a.orbit.params, a.weight);
            let kb = (b.orbit.kind.type_index(), &b.orbit.params, b.weight);
            ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
        });
    }

    /// Canonical flattened parameter/weight list, for duplicate detection.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut flat = Vec::new();
        for wo in &self.orbits {
            flat.extend_from_slice(&wo.orbit.params);
            flat.push(wo.weight);
        }
        flat
    }
}

/// Basis the moment system is assembled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverBasis {
    Objective(BasisKind),
    OrthoSymmetric,
    OrthoRotational,
}

impl SolverBasis {
    /// The search default: the minimal objective family found to perform
    /// best, per symmetry mode.
    pub fn default_for(mode: SymmetryMode) -> Self {
        match mode {
            SymmetryMode::Full => SolverBasis::Objective(BasisKind::MinimalHigh),
            SymmetryMode::Rotational => SolverBasis::Objective(BasisKind::RotationalSwapped),
        }
    }

    pub fn supports_mode(&self, mode: SymmetryMode) -> bool {
        match self {
            SolverBasis::Objective(kind) => kind.supports_mode(mode),
            SolverBasis::OrthoSymmetric => mode == SymmetryMode::Full,
            SolverBasis::OrthoRotational => mode == SymmetryMode::Rotational,
        }
    }

    pub fn code(&self) -> String {
        match self {
            SolverBasis::Objective(kind) => kind.code().to_string(),
            SolverBasis::OrthoSymmetric => "ortho-sym".to_string(),
            SolverBasis::OrthoRotational => "ortho-rot".to_string(),
        }
    }

    pub fn from_code(code: &str) -> Option<SolverBasis> {
        match code {
            "ortho-sym" => Some(SolverBasis::OrthoSymmetric),
            "ortho-rot" => Some(SolverBasis::OrthoRotational),
            other => BasisKind::from_code(other).map(SolverBasis::Objective),
        }
    }
}

impl fmt::Display for SolverBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// Search configuration.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Basis to assemble the moment system in; `None` picks the default
    /// for the symmetry mode.
    pub basis: Option<SolverBasis>,
    /// Convergence threshold on the maximum absolute residual.
    pub residual_tol: f64,
    /// Cap on outer Gauss-Newton iterations per attempt.
    pub max_iterations: usize,
    /// Random restarts per orbit combination.
    pub attempts: u64,
    /// Wall-clock budget for the whole search; `None` means unlimited.
    pub budget: Option<Duration>,
    /// RNG seed; every attempt uses an independent stream derived from it.
    pub seed: u64,
    /// Worker threads for attempt-level parallelism; 1 runs sequentially.
    pub jobs: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            basis: None,
            residual_tol: 1e-14,
            max_iterations: 200,
            attempts: 1000,
            budget: None,
            seed: 0,
            jobs: 1,
        }
    }
}

/// How a search ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchStatus {
    Completed,
    /// The wall-clock budget ran out; the rule list is partial.
    BudgetExhausted,
    /// No orbit combination exists for the requested point count.
    NoCombinations(String),
}

/// Result of a search: verified rules plus the completion status.
#[derive(Debug)]
pub struct SearchOutcome {
    pub rules: Vec<CandidateRule>,
    pub status: SearchStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    InvalidCombination { mode: SymmetryMode, counts: [usize; 3] },
    IncompatibleBasis { basis: SolverBasis, mode: SymmetryMode },
    DegreeMismatch { basis_degree: u32, rule_degree: u32 },
    OrbitModeMismatch { mode: SymmetryMode },
    NonFiniteWeight,
    EmptySelection,
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::InvalidCombination { mode, counts } => {
                write!(f, "invalid orbit combination {counts:?} for {mode} symmetry")
            }
            SolverError::IncompatibleBasis { basis, mode } => {
                write!(f, "basis '{basis}' cannot serve {mode}-symmetry rules")
            }
            SolverError::DegreeMismatch { basis_degree, rule_degree } => {
                write!(f, "basis degree {basis_degree} does not match rule degree {rule_degree}")
            }
            SolverError::OrbitModeMismatch { mode } => {
                write!(f, "rule orbits must all have symmetry mode {mode}")
            }
            SolverError::NonFiniteWeight => write!(f, "rule weights must be finite"),
            SolverError::EmptySelection => write!(f, "cannot select from an empty rule list"),
        }
    }
}

impl std::error::Error for SolverError {}

/// Expanded points of an orbit written as permutations of the generator
/// coordinates, so parameter derivatives can be chained through them.
fn orbit_perms(kind: OrbitKind) -> &'static [[usize; 3]] {
    match (kind.mode(), kind.type_index()) {
        (_, 0) => &[[0, 1, 2]],
        (SymmetryMode::Full, 1) => &[[0, 1, 2], [0, 2, 1], [2, 0, 1]],
        (SymmetryMode::Rotational, 1) => &[[0, 1, 2], [2, 0, 1], [1, 2, 0]],
        (SymmetryMode::Full, _) => &[
            [0, 1, 2],
            [2, 0, 1],
            [1, 2, 0],
            [1, 0, 2],
            [2, 1, 0],
            [0, 2, 1],
        ],
        _ => unreachable!(),
    }
}

/// Generator coordinates and their derivatives with respect to each free
/// parameter.
fn generator_coords(kind: OrbitKind, params: &[f64]) -> ([f64; 3], &'static [[f64; 3]]) {
    match (kind.mode(), kind.type_index()) {
        (_, 0) => ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], &[]),
        (SymmetryMode::Full, 1) => {
            let a = params[0];
            ([a, a, 1.0 - 2.0 * a], &[[1.0, 1.0, -2.0]])
        }
        _ => {
            let (a, b) = (params[0], params[1]);
            ([a, b, 1.0 - a - b], &[[1.0, 0.0, -1.0], [0.0, 1.0, -1.0]])
        }
    }
}

enum Backend {
    Pkd(PkdEvaluator),
    Ortho(OrthoSymBasis),
}

/// Moment-residual system for one orbit combination under one basis.
pub struct MomentSystem {
    mode: SymmetryMode,
    degree: u32,
    combination: OrbitCombination,
    backend: Backend,
    /// Positions of the basis rows within the backend's value table.
    positions: Vec<usize>,
    /// Every row polynomial is even in `d`, enabling the half-orbit
    /// shortcut on six-point orbits.
    even_only: bool,
    kinds: Vec<OrbitKind>,
    theta_len: usize,
}

impl MomentSystem {
    pub fn new(
        degree: u32,
        combination: OrbitCombination,
        basis: SolverBasis,
    ) -> Result<Self, SolverError> {
        let mode = combination.mode();
        if !basis.supports_mode(mode) {
            return Err(SolverError::IncompatibleBasis { basis, mode });
        }
        let (backend, positions, even_only) = match basis {
            SolverBasis::Objective(kind) => {
                let set = index_set(kind, degree);
                let evaluator = PkdEvaluator::for_members(degree, set.members());
                let positions: Vec<usize> = set
                    .members()
                    .iter()
                    .map(|m| evaluator.position(*m).expect("member of the full family"))
                    .collect();
                let even_only = set.members().iter().all(|m| m.i % 2 == 0);
                (Backend::Pkd(evaluator), positions, even_only)
            }
            SolverBasis::OrthoSymmetric | SolverBasis::OrthoRotational => {
                let basis_mode = match basis {
                    SolverBasis::OrthoSymmetric => SymmetryMode::Full,
                    _ => SymmetryMode::Rotational,
                };
                let ortho = orthonormalize(basis_mode, degree).expect("independent monomials");
                let positions = (0..ortho.len()).collect();
                (Backend::Ortho(ortho), positions, false)
            }
        };
        let kinds = combination.orbit_kinds();
        let theta_len = kinds.iter().map(|k| k.param_count() + 1).sum();
        Ok(Self { mode, degree, combination, backend, positions, even_only, kinds, theta_len })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn combination(&self) -> OrbitCombination {
        self.combination
    }

    /// Number of residual rows (basis polynomials).
    pub fn rows(&self) -> usize {
        self.positions.len()
    }

    pub fn theta_len(&self) -> usize {
        self.theta_len
    }

    /// Right-hand side: the exact integral of each basis polynomial.
    fn rhs(&self) -> DVector<f64> {
        let mut rhs = DVector::zeros(self.rows());
        rhs[0] = match &self.backend {
            // the constant PKD polynomial is sqrt(2); its normalised
            // integral is likewise sqrt(2)
            Backend::Pkd(_) => std::f64::consts::SQRT_2,
            Backend::Ortho(_) => 1.0,
        };
        rhs
    }

    /// Flatten a rule into the parameter vector (orbit parameters then
    /// weight, orbits in combination order).
    pub fn pack(&self, rule: &CandidateRule) -> Result<DVector<f64>, SolverError> {
        if rule.degree != self.degree {
            return Err(SolverError::DegreeMismatch {
                basis_degree: self.degree,
                rule_degree: rule.degree,
            });
        }
        let mut sorted: Vec<&WeightedOrbit> = rule.orbits.iter().collect();
        sorted.sort_by_key(|wo| wo.orbit.kind.type_index());
        let mut theta = Vec::with_capacity(self.theta_len);
        for (wo, kind) in sorted.iter().zip(&self.kinds) {
            if wo.orbit.kind != *kind {
                return Err(SolverError::OrbitModeMismatch { mode: self.mode });
            }
            theta.extend_from_slice(&wo.orbit.params);
            theta.push(wo.weight);
        }
        Ok(DVector::from_vec(theta))
    }

    /// Rebuild a rule from the parameter vector.
    pub fn unpack(&self, theta: &DVector<f64>) -> CandidateRule {
        let mut orbits = Vec::with_capacity(self.kinds.len());
        let mut at = 0;
        for &kind in &self.kinds {
            let pc = kind.param_count();
            let params = theta.as_slice()[at..at + pc].to_vec();
            let weight = theta[at + pc];
            at += pc + 1;
            orbits.push(WeightedOrbit {
                orbit: Orbit::new(kind, params).expect("parameter count by construction"),
                weight,
            });
        }
        CandidateRule {
            mode: self.mode,
            degree: self.degree,
            orbits,
            provenance: Provenance::default(),
        }
    }

    /// Per-orbit basis sums: entry `(b, k)` is the sum of basis polynomial
    /// `b` over the points of orbit `k`. The residual is `S w - rhs`.
    pub fn orbit_sums(&self, theta: &DVector<f64>) -> DMatrix<f64> {
        let rows = self.rows();
        let mut sums = DMatrix::zeros(rows, self.kinds.len());
        let mut scratch = Scratch::new(self.rows_full());
        let mut at = 0;
        for (k, &kind) in self.kinds.iter().enumerate() {
            let pc = kind.param_count();
            let params = &theta.as_slice()[at..at + pc];
            at += pc + 1;
            let (gen, _) = generator_coords(kind, params);
            let (factor, perms) = self.orbit_eval_set(kind);
            for perm in perms {
                let p = point_from_perm(&gen, perm);
                self.basis_values(p, &mut scratch);
                for (b, &pos) in self.positions.iter().enumerate() {
                    sums[(b, k)] += factor * scratch.values[pos];
                }
            }
        }
        sums
    }

    fn rows_full(&self) -> usize {
        match &self.backend {
            Backend::Pkd(evaluator) => evaluator.len(),
            Backend::Ortho(b) => b.len(),
        }
    }

    /// Which expanded points to evaluate and the multiplicity factor.
    /// The orthonormal bases are constant on their orbits, so only the
    /// generator is evaluated, scaled by the orbit size; objective bases
    /// whose members are all even in `d` need only the three cyclic points
    /// of a six-point orbit, doubled.
    fn orbit_eval_set(&self, kind: OrbitKind) -> (f64, &'static [[usize; 3]]) {
        let perms = orbit_perms(kind);
        match &self.backend {
            Backend::Ortho(_) => (perms.len() as f64, &perms[..1]),
            Backend::Pkd(_) => {
                if self.even_only && perms.len() == 6 {
                    (2.0, &perms[..3])
                } else {
                    (1.0, perms)
                }
            }
        }
    }

    fn basis_values(&self, p: ArealPoint, scratch: &mut Scratch) {
        match &self.backend {
            Backend::Pkd(evaluator) => evaluator.values_into(p, &mut scratch.values),
            Backend::Ortho(b) => {
                scratch.values.clear();
                scratch.values.extend(b.eval(p));
            }
        }
    }

    fn basis_values_and_gradients(&self, p: ArealPoint, scratch: &mut Scratch) {
        match &self.backend {
            Backend::Pkd(evaluator) => evaluator.values_and_gradients_into(
                p,
                &mut scratch.values,
                &mut scratch.gl1,
                &mut scratch.gl2,
            ),
            Backend::Ortho(b) => {
                let (v, g1, g2) = b.eval_with_gradients(p);
                scratch.values.clear();
                scratch.values.extend(v);
                scratch.gl1.clear();
                scratch.gl1.extend(g1);
                scratch.gl2.clear();
                scratch.gl2.extend(g2);
            }
        }
    }

    /// Residual vector at `theta`.
    pub fn residual(&self, theta: &DVector<f64>) -> DVector<f64> {
        let sums = self.orbit_sums(theta);
        let mut r = -self.rhs();
        let mut at = 0;
        for (k, &kind) in self.kinds.iter().enumerate() {
            let pc = kind.param_count();
            let w = theta[at + pc];
            at += pc + 1;
            for b in 0..self.rows() {
                r[b] += w * sums[(b, k)];
            }
        }
        r
    }

    /// Residual and Jacobian at `theta`; the Jacobian holds partials with
    /// respect to every orbit parameter and weight.
    pub fn residual_and_jacobian(&self, theta: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let rows = self.rows();
        let mut r = -self.rhs();
        let mut jac = DMatrix::zeros(rows, self.theta_len);
        let mut scratch = Scratch::new(self.rows_full());
        let mut at = 0;
        for &kind in &self.kinds {
            let pc = kind.param_count();
            let params = &theta.as_slice()[at..at + pc];
            let w = theta[at + pc];
            let (gen, dgen) = generator_coords(kind, params);
            let (factor, perms) = self.orbit_eval_set(kind);
            for perm in perms {
                let p = point_from_perm(&gen, perm);
                self.basis_values_and_gradients(p, &mut scratch);
                for (b, &pos) in self.positions.iter().enumerate() {
                    let v = factor * scratch.values[pos];
                    r[b] += w * v;
                    jac[(b, at + pc)] += v;
                    for (q, dg) in dgen.iter().enumerate() {
                        let dl1 = dg[perm[0]];
                        let dl2 = dg[perm[1]];
                        jac[(b, at + q)] +=
                            w * factor * (scratch.gl1[pos] * dl1 + scratch.gl2[pos] * dl2);
                    }
                }
            }
            at += pc + 1;
        }
        (r, jac)
    }
}

fn point_from_perm(gen: &[f64; 3], perm: &[usize; 3]) -> ArealPoint {
    ArealPoint::new(gen[perm[0]], gen[perm[1]], gen[perm[2]])
}

struct Scratch {
    values: Vec<f64>,
    gl1: Vec<f64>,
    gl2: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self { values: vec![0.0; n], gl1: vec![0.0; n], gl2: vec![0.0; n] }
    }
}

/// Assemble the residual vector and Jacobian of a rule under a basis.
pub fn assemble_system(
    rule: &CandidateRule,
    basis: SolverBasis,
) -> Result<(DVector<f64>, DMatrix<f64>), SolverError> {
    let system = MomentSystem::new(rule.degree, rule.combination(), basis)?;
    let theta = system.pack(rule)?;
    Ok(system.residual_and_jacobian(&theta))
}

/// Residual vector of a rule under a basis.
pub fn residual_under(rule: &CandidateRule, basis: SolverBasis) -> Result<DVector<f64>, SolverError> {
    let system = MomentSystem::new(rule.degree, rule.combination(), basis)?;
    let theta = system.pack(rule)?;
    Ok(system.residual(&theta))
}

/// Classify the quality of a rule from its expanded weights and points.
pub fn classify_quality(rule: &CandidateRule) -> Quality {
    let expanded = rule.expanded();
    let positive = expanded.iter().all(|(_, w)| *w > 0.0);
    let inside = expanded.iter().all(|(p, _)| p.min_coord() >= -BOUNDARY_TOL);
    match (positive, inside) {
        (true, true) => Quality::PI,
        (false, true) => Quality::NI,
        (true, false) => Quality::PO,
        (false, false) => Quality::NO,
    }
}

/// Ratio of the largest to the smallest expanded weight.
pub fn weight_ratio(rule: &CandidateRule) -> f64 {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for wo in &rule.orbits {
        min = min.min(wo.weight);
        max = max.max(wo.weight);
    }
    max / min
}

/// Pick the best rule of a batch sharing degree, point count and quality:
/// prefer rules with no point near the boundary (for PI batches), then the
/// smallest max/min weight ratio, then earliest provenance.
pub fn select_best(rules: &[CandidateRule]) -> Result<&CandidateRule, SolverError> {
    if rules.is_empty() {
        return Err(SolverError::EmptySelection);
    }
    let score = |rule: &CandidateRule| {
        let quality = classify_quality(rule);
        let min_coord = rule
            .expanded()
            .iter()
            .map(|(p, _)| p.min_coord())
            .fold(f64::INFINITY, f64::min);
        let demoted = quality == Quality::PI && min_coord < NEAR_BOUNDARY;
        (demoted, weight_ratio(rule), rule.provenance.attempt)
    };
    Ok(rules
        .iter()
        .min_by(|a, b| score(a).partial_cmp(&score(b)).unwrap_or(std::cmp::Ordering::Equal))
        .expect("non-empty"))
}

/// One random restart: draw orbit coordinates, fit weights linearly, then
/// polish everything with damped Gauss-Newton. Returns the converged
/// parameter vector if the residual dropped below tolerance.
fn run_attempt(
    system: &MomentSystem,
    rng: &mut ChaCha8Rng,
    config: &SolverConfig,
) -> Option<DVector<f64>> {
    // random initial coordinates
    let mut theta = DVector::zeros(system.theta_len());
    let mut at = 0;
    for &kind in &system.kinds {
        match (kind.mode(), kind.type_index()) {
            (_, 0) => {}
            (SymmetryMode::Full, 1) => theta[at] = rng.gen_range(0.0..0.5),
            _ => {
                // uniform on the open simplex via normalised exponentials
                let e1 = -rng.gen::<f64>().max(1e-300).ln();
                let e2 = -rng.gen::<f64>().max(1e-300).ln();
                let e3 = -rng.gen::<f64>().max(1e-300).ln();
                let total = e1 + e2 + e3;
                theta[at] = e1 / total;
                theta[at + 1] = e2 / total;
            }
        }
        at += kind.param_count() + 1;
    }

    // weights by linear least squares at the drawn positions
    let sums = system.orbit_sums(&theta);
    let rhs = system.rhs();
    let weights = sums
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-13)
        .unwrap_or_else(|_| DVector::zeros(system.kinds.len()));
    let mut at = 0;
    for (k, &kind) in system.kinds.iter().enumerate() {
        theta[at + kind.param_count()] = weights[k];
        at += kind.param_count() + 1;
    }

    // joint polish
    let mut lambda = LAMBDA_INIT;
    let (mut r, mut jac) = system.residual_and_jacobian(&theta);
    if !r.iter().all(|v| v.is_finite()) {
        return None;
    }
    let mut cost = r.norm_squared();
    let mut stuck = 0;
    for _ in 0..config.max_iterations {
        if r.amax() < config.residual_tol {
            return Some(theta);
        }
        let jt = jac.transpose();
        let mut normal = &jt * &jac;
        for d in 0..normal.nrows() {
            normal[(d, d)] += lambda;
        }
        let gradient = &jt * &r;
        let step = match normal.clone().cholesky() {
            Some(chol) => chol.solve(&(-&gradient)),
            None => normal.lu().solve(&(-&gradient))?,
        };
        let trial = &theta + &step;
        let r_trial = system.residual(&trial);
        let trial_cost = r_trial.norm_squared();
        if trial_cost.is_finite() && trial_cost < cost {
            theta = trial;
            cost = trial_cost;
            lambda = (lambda * LAMBDA_SHRINK).max(1e-12);
            stuck = 0;
            let pair = system.residual_and_jacobian(&theta);
            r = pair.0;
            jac = pair.1;
        } else {
            lambda *= LAMBDA_GROW;
            if lambda >= LAMBDA_MAX {
                lambda = LAMBDA_MAX;
                stuck += 1;
                if stuck >= 3 {
                    return None;
                }
            }
        }
    }
    if r.amax() < config.residual_tol {
        Some(theta)
    } else {
        None
    }
}

fn stream_for(combination: OrbitCombination, attempt: u64) -> u64 {
    let c = combination.counts();
    ((c[0] as u64) << 56) | ((c[1] as u64) << 44) | ((c[2] as u64) << 32) | attempt
}

/// Search a single orbit combination for rules of the given degree.
pub fn seek_rules_in_combination(
    combination: OrbitCombination,
    degree: u32,
    config: &SolverConfig,
    deadline: Option<Instant>,
) -> Result<SearchOutcome, SolverError> {
    let mode = combination.mode();
    let basis = config.basis.unwrap_or_else(|| SolverBasis::default_for(mode));
    let system = MomentSystem::new(degree, combination, basis)?;

    let attempt_once = |attempt: u64| -> Option<(u64, CandidateRule)> {
        if let Some(deadline) = deadline {
            if Instant::now() >= deadline {
                return None;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(stream_for(combination, attempt));
        let theta = run_attempt(&system, &mut rng, config)?;
        let mut rule = system.unpack(&theta);
        rule.canonicalize();
        rule.provenance = Provenance { seed: config.seed, attempt };
        let report = rulekit::verify(&rule, rulekit::DEFAULT_TOLERANCE);
        if report.attained_degree >= degree as i64 {
            Some((attempt, rule))
        } else {
            None
        }
    };

    let mut found: Vec<(u64, CandidateRule)> = if config.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .expect("thread pool");
        pool.install(|| (0..config.attempts).into_par_iter().filter_map(attempt_once).collect())
    } else {
        (0..config.attempts).filter_map(attempt_once).collect()
    };
    found.sort_by_key(|(attempt, _)| *attempt);

    let mut rules: Vec<CandidateRule> = Vec::new();
    for (_, rule) in found {
        let flat = rule.flat_params();
        let duplicate = rules.iter().any(|kept| {
            let kept_flat = kept.flat_params();
            kept_flat.len() == flat.len()
                && kept_flat
                    .iter()
                    .zip(&flat)
                    .all(|(a, b)| (a - b).abs() <= DUPLICATE_TOL)
        });
        if !duplicate {
            rules.push(rule);
        }
    }

    let status = match deadline {
        Some(deadline) if Instant::now() >= deadline => SearchStatus::BudgetExhausted,
        _ => SearchStatus::Completed,
    };
    Ok(SearchOutcome { rules, status })
}

/// Search every orbit combination with the given point count for rules of
/// the given degree. Deterministic for a fixed seed when run with one job.
pub fn seek_rules(
    mode: SymmetryMode,
    degree: u32,
    npoints: usize,
    config: &SolverConfig,
) -> Result<SearchOutcome, SolverError> {
    let combinations = enumerate_combinations(mode, npoints);
    if combinations.is_empty() {
        let reason = match mode {
            SymmetryMode::Rotational => format!(
                "no rotationally symmetric orbit combination has {npoints} points \
                 ({npoints} = 2 mod 3: a centroid contributes 1 point and every \
                 other orbit 3)"
            ),
            SymmetryMode::Full => {
                format!("no fully symmetric orbit combination has {npoints} points")
            }
        };
        return Ok(SearchOutcome { rules: Vec::new(), status: SearchStatus::NoCombinations(reason) });
    }
    let deadline = config.budget.map(|b| Instant::now() + b);
    let mut rules = Vec::new();
    let mut exhausted = false;
    for combination in combinations {
        let outcome = seek_rules_in_combination(combination, degree, config, deadline)?;
        rules.extend(outcome.rules);
        if outcome.status == SearchStatus::BudgetExhausted {
            exhausted = true;
            break;
        }
    }
    rules.sort_by_key(|r| {
        let c = r.combination().counts();
        (c[1], c[2], r.provenance.attempt)
    });
    let status = if exhausted { SearchStatus::BudgetExhausted } else { SearchStatus::Completed };
    Ok(SearchOutcome { rules, status })
}
