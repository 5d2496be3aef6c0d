//! Formal power-series solutions of `P û = g` by coefficient recurrence, and
//! the convergent / Gevrey-2 dichotomy for the Euler operator `z²∂ + 1`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::gamma::ln_factorial;
use crate::newton::vanishing_order;
use crate::operator::LinearOperator;
use crate::series::FormalPowerSeries;
use crate::{Error, Result};

/// A pivot with modulus at or below this fraction of the level's scale counts
/// as vanishing.
pub const PIVOT_TOLERANCE: f64 = 1e-10;
/// Relative tolerance for the consistency test of a level whose pivot vanished.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// Coefficients `a₀..=a_N`, or the prefix before the first resonance.
    /// `None` when the very first level is already inconsistent.
    pub solution: Option<FormalPowerSeries>,
    /// Indices left undetermined by the recurrence and taken from the
    /// caller's initial data.
    pub free_indices: Vec<usize>,
    /// Indices where the pivot vanished and the equation was inconsistent.
    pub resonance_indices: Vec<usize>,
}

/// One level of the recurrence: coefficient of `zⁿ` on both sides.
struct Level {
    pivot: Complex64,
    known: Complex64,
    /// Largest `|γ_{j,l}| (m+j)!/m!` among the level's terms.
    scale: f64,
    /// Sum of the moduli of the known terms.
    magnitude: f64,
}

/// Solves `P û = g` for `a₀..=a_N`.
///
/// Level `n` of the recurrence reads
/// `Σⱼ Σ_{l+m=n} γ_{j,l} (m+j)!/m! a_{m+j} = gₙ`, where `γ_{j,l}` is the
/// coefficient of `zˡ` in `cⱼ`. Its highest unknown is `a_{n+σ}` with
/// `σ = maxⱼ (j − oⱼ)`, so the levels are solved in increasing `n`. Indices
/// below `σ`, and indices whose pivot vanishes on a consistent level, are free
/// and must be present in `initial`.
pub fn formal_solve(
    op: &LinearOperator,
    rhs: &FormalPowerSeries,
    initial: &BTreeMap<usize, Complex64>,
    n: usize,
) -> Result<SolveResult> {
    let terms: Vec<(usize, usize, &FormalPowerSeries)> = op
        .terms()
        .filter_map(|(j, c)| vanishing_order(c).map(|o| (j, o, c)))
        .collect();
    if terms.is_empty() {
        return Err(Error::ZeroOperator);
    }
    let sigma = terms
        .iter()
        .map(|&(j, o, _)| j as i64 - o as i64)
        .max()
        .expect("nonempty");
    let last_level = n as i64 - sigma;

    check_truncation(&terms, rhs, last_level)?;

    let zero = Complex64::new(0.0, 0.0);
    let mut coeffs: Vec<Complex64> = Vec::with_capacity(n + 1);
    let mut free_indices = Vec::new();

    // Indices the recurrence never reaches.
    for t in 0..(sigma.max(0) as usize).min(n + 1) {
        let value = initial.get(&t).copied().ok_or(Error::Underdetermined(t))?;
        coeffs.push(value);
        free_indices.push(t);
    }

    for level in 0..=last_level.max(-1) {
        let level = level as usize;
        let target = level as i64 + sigma;
        let eq = assemble_level(&terms, &coeffs, level, target);
        let g = rhs.coeff(level).unwrap_or(zero);
        let remainder = g - eq.known;

        if eq.pivot.norm() > PIVOT_TOLERANCE * eq.scale && target >= 0 {
            coeffs.push(remainder / eq.pivot);
            continue;
        }

        let consistent =
            remainder.norm() <= CONSISTENCY_TOLERANCE * (1.0 + g.norm() + eq.magnitude);
        if !consistent {
            let index = target.max(0) as usize;
            let solution = if coeffs.is_empty() {
                None
            } else {
                Some(FormalPowerSeries::new(coeffs)?)
            };
            return Ok(SolveResult {
                solution,
                free_indices,
                resonance_indices: vec![index],
            });
        }
        if target >= 0 {
            let t = target as usize;
            let value = initial.get(&t).copied().ok_or(Error::Underdetermined(t))?;
            coeffs.push(value);
            free_indices.push(t);
        }
    }

    debug_assert_eq!(coeffs.len(), n + 1);
    Ok(SolveResult {
        solution: Some(FormalPowerSeries::new(coeffs)?),
        free_indices,
        resonance_indices: Vec::new(),
    })
}

fn check_truncation(
    terms: &[(usize, usize, &FormalPowerSeries)],
    rhs: &FormalPowerSeries,
    last_level: i64,
) -> Result<()> {
    if last_level < 0 {
        return Ok(());
    }
    let need = last_level as usize;
    for &(j, _, c) in terms {
        if c.coeff(need).is_none() {
            return Err(Error::TruncationTooShort(format!(
                "coefficient of D^{j} is known to order {} but order {need} is required",
                c.truncation_order()
            )));
        }
    }
    if rhs.coeff(need).is_none() {
        return Err(Error::TruncationTooShort(format!(
            "right-hand side is known to order {} but order {need} is required",
            rhs.truncation_order()
        )));
    }
    Ok(())
}

fn assemble_level(
    terms: &[(usize, usize, &FormalPowerSeries)],
    coeffs: &[Complex64],
    level: usize,
    target: i64,
) -> Level {
    let mut eq = Level {
        pivot: Complex64::new(0.0, 0.0),
        known: Complex64::new(0.0, 0.0),
        scale: 0.0,
        magnitude: 0.0,
    };
    for &(j, o, c) in terms {
        for l in o..=level {
            let gamma = c.coeff(l).unwrap_or_default();
            if gamma == Complex64::new(0.0, 0.0) {
                continue;
            }
            let m = level - l;
            let factor = gamma * falling_factorial(m + j, j);
            eq.scale = eq.scale.max(factor.norm());
            let index = (m + j) as i64;
            if index == target {
                eq.pivot += factor;
            } else {
                // index < target by the choice of σ
                let term = factor * coeffs[index as usize];
                eq.magnitude += term.norm();
                eq.known += term;
            }
        }
    }
    eq
}

/// `top! / (top − count)!`
fn falling_factorial(top: usize, count: usize) -> f64 {
    (top + 1 - count..=top).map(|x| x as f64).product()
}

/// `max |(P u)ₙ − gₙ| / (1 + |gₙ|)` over the orders known on both sides.
pub fn residual_check(
    op: &LinearOperator,
    candidate: &FormalPowerSeries,
    rhs: &FormalPowerSeries,
) -> f64 {
    let lhs = op.apply(candidate);
    let orders = if rhs.is_polynomial() {
        lhs.truncation_order()
    } else {
        lhs.truncation_order().min(rhs.truncation_order())
    };
    let zero = Complex64::new(0.0, 0.0);
    (0..=orders)
        .map(|k| {
            let g = rhs.coeff(k).unwrap_or(zero);
            (lhs.coeffs()[k] - g).norm() / (1.0 + g.norm())
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EulerVerdict {
    /// `α(g) = 0`: the formal solution converges.
    Convergent,
    /// `α(g) ≠ 0`: the formal solution is Gevrey-2 and no smaller order holds.
    Gevrey2Sharp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerClassification {
    pub alpha: Complex64,
    pub verdict: EulerVerdict,
    /// Bound on the neglected tail `Σ_{n≥N} (−1)ⁿ b_{n+1}/n!`.
    pub alpha_tail_bound: f64,
}

/// `α(g) = Σ (−1)ⁿ b_{n+1}/n!` for `z²∂u + u = g`, summed to `n = N−1`, with
/// the tail bounded through the envelope `|bₖ| ≤ M Cᵏ`.
pub fn euler_alpha(
    rhs: &FormalPowerSeries,
    n: usize,
    growth: (f64, f64),
) -> Result<EulerClassification> {
    if n < 8 {
        return Err(Error::InvalidArgument(format!(
            "alpha needs N >= 8 terms (got {n})"
        )));
    }
    if rhs.coeff(n).is_none() {
        return Err(Error::TruncationTooShort(format!(
            "right-hand side is known to order {} but N = {n}",
            rhs.truncation_order()
        )));
    }
    let (m, c) = growth;
    if !(m >= 0.0 && c > 0.0 && m.is_finite() && c.is_finite()) {
        return Err(Error::InvalidGrowthEnvelope(format!(
            "need M >= 0 and C > 0 (got M = {m}, C = {c})"
        )));
    }
    let zero = Complex64::new(0.0, 0.0);
    for k in 1..=n.max(rhs.truncation_order()) {
        let b = rhs.coeff(k).unwrap_or(zero).norm();
        let bound = m * c.powi(k as i32);
        if b > bound * (1.0 + 1e-12) {
            return Err(Error::InvalidGrowthEnvelope(format!(
                "|b_{k}| = {b:e} exceeds M C^k = {bound:e}"
            )));
        }
    }

    let mut alpha = zero;
    let mut inv_fact = 1.0;
    for k in 0..n {
        if k > 0 {
            inv_fact /= k as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        alpha += rhs.coeff(k + 1).unwrap_or(zero) * (sign * inv_fact);
    }

    let tail = m * ((n as f64 + 1.0) * c.ln() - ln_factorial(n) + c).exp();
    let verdict = if alpha.norm() > tail {
        EulerVerdict::Gevrey2Sharp
    } else {
        EulerVerdict::Convergent
    };
    Ok(EulerClassification {
        alpha,
        verdict,
        alpha_tail_bound: tail,
    })
}

/// Smallest envelope `|bₖ| ≤ M Cᵏ` (k ≥ 1) read off the stored coefficients,
/// with `C = maxₖ |bₖ|^(1/k)`. Only a heuristic for the true growth.
pub fn fit_growth_envelope(rhs: &FormalPowerSeries) -> (f64, f64) {
    let nonzero: Vec<(usize, f64)> = rhs
        .coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, b)| (k, b.norm()))
        .filter(|&(_, b)| b > 0.0)
        .collect();
    if nonzero.is_empty() {
        return (0.0, 1.0);
    }
    let c = nonzero
        .iter()
        .map(|&(k, b)| b.powf(1.0 / k as f64))
        .fold(0.0, f64::max);
    let m = nonzero
        .iter()
        .map(|&(k, b)| b / c.powi(k as i32))
        .fold(0.0, f64::max);
    (m, c)
}
