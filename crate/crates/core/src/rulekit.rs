//! Independent verification of cubature rules, canonical rule file I/O,
//! and a small regression corpus of classical rules.
//!
//! Verification never consults the search basis: a rule is checked against
//! the exact rational moments of every areal monomial through one degree
//! past its claimed degree, so the attained degree is certified two-sided.

use std::fmt;

use num::ToPrimitive;

use crate::geometry::{exact_moment, ArealMonomial, ArealPoint, Orbit, OrbitKind, SymmetryMode};
use crate::orthopoly::{jacobi_derivative_unchecked, jacobi_unchecked};
use crate::solver::{classify_quality, weight_ratio, CandidateRule, Quality, WeightedOrbit};

/// Default verification tolerance on monomial residuals.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Outcome of verifying a rule against exact moments.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    /// Worst absolute monomial residual at each degree `0..=phi+1`.
    pub residual_by_degree: Vec<f64>,
    /// Largest degree through which every monomial residual is below the
    /// tolerance; -1 if even the constant fails.
    pub attained_degree: i64,
    pub quality: Quality,
    /// Ratio of the largest to the smallest weight.
    pub weight_ratio: f64,
    /// Smallest areal coordinate over all points: distance to the
    /// boundary, negative outside the triangle.
    pub min_coordinate: f64,
}

/// Verify a rule against the exact moments of every areal monomial of
/// degree up to one past the rule's claimed degree.
pub fn verify(rule: &CandidateRule, tolerance: f64) -> VerificationReport {
    let expanded = rule.expanded();
    let mut residual_by_degree = Vec::with_capacity(rule.degree as usize + 2);
    for omega in 0..=rule.degree + 1 {
        let mut worst = 0.0f64;
        for m in ArealMonomial::of_degree(omega) {
            // compensated summation on the rule side
            let mut sum = 0.0;
            let mut carry = 0.0;
            for (p, w) in &expanded {
                let term = w * m.eval(*p);
                let y = term - carry;
                let t = sum + y;
                carry = (t - sum) - y;
                sum = t;
            }
            let exact = exact_moment(m).to_f64().expect("moment fits in f64");
            worst = worst.max((sum - exact).abs());
        }
        residual_by_degree.push(worst);
    }
    let mut attained_degree: i64 = -1;
    for (omega, residual) in residual_by_degree.iter().enumerate() {
        if *residual < tolerance {
            attained_degree = omega as i64;
        } else {
            break;
        }
    }
    let min_coordinate = expanded
        .iter()
        .map(|(p, _)| p.min_coord())
        .fold(f64::INFINITY, f64::min);
    VerificationReport {
        residual_by_degree,
        attained_degree,
        quality: classify_quality(rule),
        weight_ratio: weight_ratio(rule),
        min_coordinate,
    }
}

/// Format a float with 17 significant digits and a C-style two-digit
/// signed exponent, guaranteeing bit-exact round trips.
pub fn format_f64(x: f64) -> String {
    let s = format!("{x:.16e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(rest) => ('-', rest),
        None => ('+', exp),
    };
    format!("{mantissa}e{sign}{digits:0>2}")
}

/// Errors from parsing a rule file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleParseError {
    Malformed { line: usize, reason: String },
    Inconsistent { reason: String },
}

impl fmt::Display for RuleParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleParseError::Malformed { line, reason } => {
                write!(f, "malformed rule file at line {line}: {reason}")
            }
            RuleParseError::Inconsistent { reason } => {
                write!(f, "inconsistent rule file: {reason}")
            }
        }
    }
}

impl std::error::Error for RuleParseError {}

/// Serialise a rule: four header lines (`mode`, `degree`, `npoints`,
/// `quality`) then one line per orbit, `type params... weight`, each
/// number with 17 significant digits.
pub fn write_rule(rule: &CandidateRule, quality: Quality) -> String {
    let mut out = String::new();
    out.push_str(&format!("mode {}\n", rule.mode));
    out.push_str(&format!("degree {}\n", rule.degree));
    out.push_str(&format!("npoints {}\n", rule.point_count()));
    out.push_str(&format!("quality {quality}\n"));
    for wo in &rule.orbits {
        out.push_str(&wo.orbit.kind.type_index().to_string());
        for p in &wo.orbit.params {
            out.push(' ');
            out.push_str(&format_f64(*p));
        }
        out.push(' ');
        out.push_str(&format_f64(wo.weight));
        out.push('\n');
    }
    out
}

/// Serialise a rule in expanded per-point form: the same header followed
/// by one `L1 L2 L3 weight` line per point.
pub fn write_rule_expanded(rule: &CandidateRule, quality: Quality) -> String {
    let mut out = String::new();
    out.push_str(&format!("mode {}\n", rule.mode));
    out.push_str(&format!("degree {}\n", rule.degree));
    out.push_str(&format!("npoints {}\n", rule.point_count()));
    out.push_str(&format!("quality {quality}\n"));
    for (p, w) in rule.expanded() {
        out.push_str(&format!(
            "{} {} {} {}\n",
            format_f64(p.l1),
            format_f64(p.l2),
            format_f64(p.l3),
            format_f64(w)
        ));
    }
    out
}

fn header_value<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    key: &str,
) -> Result<(usize, String), RuleParseError> {
    let (line_no, line) = lines.next().ok_or_else(|| RuleParseError::Malformed {
        line: 0,
        reason: format!("missing '{key}' header"),
    })?;
    match line.split_once(' ') {
        Some((k, v)) if k == key => Ok((line_no, v.trim().to_string())),
        _ => Err(RuleParseError::Malformed {
            line: line_no,
            reason: format!("expected '{key} <value>', got '{line}'"),
        }),
    }
}

/// Parse a rule file produced by [`write_rule`].
pub fn read_rule(text: &str) -> Result<(CandidateRule, Quality), RuleParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line_no, mode_str) = header_value(&mut lines, "mode")?;
    let mode = match mode_str.as_str() {
        "full" => SymmetryMode::Full,
        "rot" => SymmetryMode::Rotational,
        other => {
            return Err(RuleParseError::Malformed {
                line: line_no,
                reason: format!("unknown mode '{other}'"),
            })
        }
    };
    let (line_no, degree_str) = header_value(&mut lines, "degree")?;
    let degree: u32 = degree_str.parse().map_err(|_| RuleParseError::Malformed {
        line: line_no,
        reason: format!("degree must be a non-negative integer, got '{degree_str}'"),
    })?;
    let (line_no, npoints_str) = header_value(&mut lines, "npoints")?;
    let npoints: usize = npoints_str.parse().map_err(|_| RuleParseError::Malformed {
        line: line_no,
        reason: format!("npoints must be a positive integer, got '{npoints_str}'"),
    })?;
    let (line_no, quality_str) = header_value(&mut lines, "quality")?;
    let quality = Quality::parse(&quality_str).ok_or_else(|| RuleParseError::Malformed {
        line: line_no,
        reason: format!("unknown quality '{quality_str}'"),
    })?;

    let mut orbits = Vec::new();
    for (line_no, line) in lines {
        let mut tokens = line.split_whitespace();
        let type_str = tokens.next().expect("non-empty line");
        let type_index: u8 = type_str.parse().map_err(|_| RuleParseError::Malformed {
            line: line_no,
            reason: format!("orbit type must be an integer, got '{type_str}'"),
        })?;
        let kind = OrbitKind::new(mode, type_index).map_err(|e| RuleParseError::Malformed {
            line: line_no,
            reason: e.to_string(),
        })?;
        let mut numbers = Vec::new();
        for token in tokens {
            let value: f64 = token.parse().map_err(|_| RuleParseError::Malformed {
                line: line_no,
                reason: format!("expected a number, got '{token}'"),
            })?;
            numbers.push(value);
        }
        if numbers.len() != kind.param_count() + 1 {
            return Err(RuleParseError::Malformed {
                line: line_no,
                reason: format!(
                    "orbit type {type_index} takes {} number(s), got {}",
                    kind.param_count() + 1,
                    numbers.len()
                ),
            });
        }
        let weight = numbers.pop().expect("at least the weight");
        let orbit = Orbit::new(kind, numbers).expect("parameter count checked");
        orbits.push(WeightedOrbit { orbit, weight });
    }
    if orbits.is_empty() {
        return Err(RuleParseError::Inconsistent { reason: "rule has no orbits".to_string() });
    }
    let rule = CandidateRule::new(mode, degree, orbits).map_err(|e| {
        RuleParseError::Inconsistent { reason: e.to_string() }
    })?;
    if rule.point_count() != npoints {
        return Err(RuleParseError::Inconsistent {
            reason: format!(
                "npoints header says {npoints} but the orbits expand to {} points",
                rule.point_count()
            ),
        });
    }
    Ok((rule, quality))
}

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let p = jacobi_unchecked(n as u32, 0.0, 0.0, x);
            let dp = jacobi_derivative_unchecked(n as u32, 0.0, 0.0, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let dp = jacobi_derivative_unchecked(n as u32, 0.0, 0.0, x);
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite nodes"));
    out
}

/// Gauss-Jacobi nodes and weights on [-1, 1] for the weight `(1 - x)`.
fn gauss_jacobi_10(n: usize) -> Vec<(f64, f64)> {
    // bracket the roots of P_n^(1,0) on a fine grid, then polish
    let n_u32 = n as u32;
    let grid = 8 * n + 16;
    let mut roots = Vec::with_capacity(n);
    let mut prev_x = -1.0f64;
    let mut prev_v = jacobi_unchecked(n_u32, 1.0, 0.0, prev_x);
    for g in 1..=grid {
        let x = -1.0 + 2.0 * g as f64 / grid as f64;
        let v = jacobi_unchecked(n_u32, 1.0, 0.0, x);
        if prev_v == 0.0 {
            roots.push(prev_x);
        } else if prev_v.signum() != v.signum() {
            let mut root = 0.5 * (prev_x + x);
            for _ in 0..100 {
                let p = jacobi_unchecked(n_u32, 1.0, 0.0, root);
                let dp = jacobi_derivative_unchecked(n_u32, 1.0, 0.0, root);
                let dx = p / dp;
                root -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            roots.push(root);
        }
        prev_x = x;
        prev_v = v;
    }
    assert_eq!(roots.len(), n, "failed to bracket all Gauss-Jacobi nodes");
    // weights from the moment equations in the Jacobi basis itself:
    // integral of P_k^(1,0) (1-x) dx = 2 if k = 0 else 0
    let vmat = nalgebra::DMatrix::from_fn(n, n, |k, i| {
        jacobi_unchecked(k as u32, 1.0, 0.0, roots[i])
    });
    let mut rhs = nalgebra::DVector::zeros(n);
    rhs[0] = 2.0;
    let weights = vmat.lu().solve(&rhs).expect("distinct nodes");
    roots.into_iter().zip(weights.iter().copied()).collect()
}

/// Interpolatory reference rule of at least the given degree, built as a
/// conical product of 1-D Gauss rules. Returns areal points and weights
/// under the area-normalised measure (weights sum to 1).
pub fn reference_rule(degree: u32) -> (Vec<ArealPoint>, Vec<f64>) {
    let n = (degree as usize + 2) / 2; // 2n - 1 >= degree
    let n = n.max(1);
    let radial = gauss_jacobi_10(n);
    let angular = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for &(xi, wi) in &radial {
        let l3 = 0.5 * (xi + 1.0);
        for &(yj, vj) in &angular {
            let t = 0.5 * (yj + 1.0);
            points.push(ArealPoint::new((1.0 - l3) * (1.0 - t), (1.0 - l3) * t, l3));
            weights.push(wi * vj / 4.0);
        }
    }
    (points, weights)
}

/// A corpus rule with its certified degree and quality.
pub struct CorpusEntry {
    pub name: &'static str,
    pub rule: CandidateRule,
    pub expected_degree: u32,
    pub expected_quality: Quality,
}

/// Classical reference rules plus one rotationally symmetric rule found by
/// this crate's own search, frozen after verification against the exact
/// moment oracle. Frozen values keep the full 17 significant digits they
/// were serialised with.
#[allow(clippy::excessive_precision)]
pub fn regression_corpus() -> Vec<CorpusEntry> {
    let full0 = OrbitKind::new(SymmetryMode::Full, 0).expect("valid");
    let full1 = OrbitKind::new(SymmetryMode::Full, 1).expect("valid");
    let rot1 = OrbitKind::new(SymmetryMode::Rotational, 1).expect("valid");
    let orbit = |kind: OrbitKind, params: Vec<f64>, weight: f64| WeightedOrbit {
        orbit: Orbit::new(kind, params).expect("valid orbit"),
        weight,
    };

    let centroid = CandidateRule::new(
        SymmetryMode::Full,
        1,
        vec![orbit(full0, vec![], 1.0)],
    )
    .expect("valid rule");

    let degree2 = CandidateRule::new(
        SymmetryMode::Full,
        2,
        vec![orbit(full1, vec![1.0 / 6.0], 1.0 / 3.0)],
    )
    .expect("valid rule");

    let s15 = 15.0f64.sqrt();
    let degree5 = CandidateRule::new(
        SymmetryMode::Full,
        5,
        vec![
            orbit(full0, vec![], 9.0 / 40.0),
            orbit(full1, vec![(6.0 - s15) / 21.0], (155.0 - s15) / 1200.0),
            orbit(full1, vec![(6.0 + s15) / 21.0], (155.0 + s15) / 1200.0),
        ],
    )
    .expect("valid rule");

    // 7-point degree-4 rotationally symmetric rule found by this crate's
    // own search (mode rot, degree 4, 7 points, seed 1, attempt 21) and
    // verified against the exact moments before freezing.
    let rot0 = OrbitKind::new(SymmetryMode::Rotational, 0).expect("valid");
    let rot4 = CandidateRule::new(
        SymmetryMode::Rotational,
        4,
        vec![
            orbit(rot0, vec![], 1.7046380083374729e-01),
            orbit(
                rot1,
                vec![6.7447887028161457e-02, 8.0890822924540495e-01],
                1.1140711499065234e-01,
            ),
            orbit(
                rot1,
                vec![7.8799873939281312e-02, 3.9233262796188006e-01],
                1.6510495139809928e-01,
            ),
        ],
    )
    .expect("valid rule");

    vec![
        CorpusEntry {
            name: "centroid",
            rule: centroid,
            expected_degree: 1,
            expected_quality: Quality::PI,
        },
        CorpusEntry {
            name: "three-point-degree-2",
            rule: degree2,
            expected_degree: 2,
            expected_quality: Quality::PI,
        },
        CorpusEntry {
            name: "seven-point-degree-5",
            rule: degree5,
            expected_degree: 5,
            expected_quality: Quality::PI,
        },
        CorpusEntry {
            name: "seven-point-rotational-degree-4",
            rule: rot4,
            expected_degree: 4,
            expected_quality: Quality::PI,
        },
    ]
}
