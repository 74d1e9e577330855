//! Jacobi polynomial values and derivatives by forward three-term
//! recurrence, plus the scaled variant the PKD basis is built from.

use std::fmt;

/// Parameter bundle for a Jacobi polynomial evaluation; `alpha` and `beta`
/// must both exceed -1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiParams {
    pub n: u32,
    pub alpha: f64,
    pub beta: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OrthopolyError {
    /// `alpha` or `beta` outside the admissible range `(-1, inf)`.
    InvalidParameter { alpha: f64, beta: f64 },
}

impl fmt::Display for OrthopolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrthopolyError::InvalidParameter { alpha, beta } => {
                write!(f, "Jacobi parameters must be > -1, got alpha={alpha}, beta={beta}")
            }
        }
    }
}

impl std::error::Error for OrthopolyError {}

fn check_params(alpha: f64, beta: f64) -> Result<(), OrthopolyError> {
    if alpha > -1.0 && beta > -1.0 && alpha.is_finite() && beta.is_finite() {
        Ok(())
    } else {
        Err(OrthopolyError::InvalidParameter { alpha, beta })
    }
}

/// Jacobi polynomial value by forward recurrence, without parameter checks.
/// Callers on hot paths use this with parameters known to be valid.
pub(crate) fn jacobi_unchecked(n: u32, alpha: f64, beta: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = (alpha + 1.0) + (alpha + beta + 2.0) * (x - 1.0) / 2.0;
    for m in 2..=n as u64 {
        let m = m as f64;
        let a = m + alpha;
        let b = m + beta;
        let c = 2.0 * m + alpha + beta;
        // 2m(m+a+b)(c-2) P_m = (c-1)[c(c-2)x + a^2 - b^2] P_{m-1} - 2(m+a-1)(m+b-1)c P_{m-2}
        let denom = 2.0 * m * (m + alpha + beta) * (c - 2.0);
        let next = ((c - 1.0) * (c * (c - 2.0) * x + alpha * alpha - beta * beta) * cur
            - 2.0 * (a - 1.0) * (b - 1.0) * c * prev)
            / denom;
        prev = cur;
        cur = next;
    }
    cur
}

/// Value of the classical Jacobi polynomial `P_n^(alpha,beta)(x)`.
pub fn jacobi(n: u32, alpha: f64, beta: f64, x: f64) -> Result<f64, OrthopolyError> {
    check_params(alpha, beta)?;
    Ok(jacobi_unchecked(n, alpha, beta, x))
}

pub(crate) fn jacobi_derivative_unchecked(n: u32, alpha: f64, beta: f64, x: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    // d/dx P_n^(a,b) = (n + a + b + 1)/2 * P_{n-1}^(a+1,b+1)
    0.5 * (n as f64 + alpha + beta + 1.0) * jacobi_unchecked(n - 1, alpha + 1.0, beta + 1.0, x)
}

/// Derivative of the Jacobi polynomial with respect to its argument,
/// computed analytically via the shifted-parameter identity.
pub fn jacobi_derivative(n: u32, alpha: f64, beta: f64, x: f64) -> Result<f64, OrthopolyError> {
    check_params(alpha, beta)?;
    Ok(jacobi_derivative_unchecked(n, alpha, beta, x))
}

pub(crate) fn scaled_jacobi_unchecked(n: u32, alpha: f64, x: f64) -> f64 {
    (2.0 * n as f64 + alpha + 1.0).sqrt() * jacobi_unchecked(n, alpha, 0.0, x)
}

/// Scaled Jacobi polynomial `sqrt(2n + alpha + 1) P_n^(alpha,0)(x)`, the
/// normalisation entering the PKD basis.
pub fn scaled_jacobi(n: u32, alpha: f64, x: f64) -> Result<f64, OrthopolyError> {
    check_params(alpha, 0.0)?;
    Ok(scaled_jacobi_unchecked(n, alpha, x))
}
