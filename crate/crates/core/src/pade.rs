//! Padé approximants from truncated Taylor data, used as the automatic
//! analytic continuation of Borel transforms.
//!
//! The denominator is the null vector of the Toeplitz system, found by SVD.
//! When that system is rank deficient the degrees are lowered until it has
//! full rank, so exactly rational data returns its reduced form instead of a
//! spurious pole–zero pair.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::roots::polynomial_roots;
use crate::series::FormalPowerSeries;
use crate::{Error, Result};

/// Relative singular-value threshold for the rank decision.
pub const RANK_TOLERANCE: f64 = 1e-14;
/// Largest accepted condition estimate of the (reduced) denominator system.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct Pade {
    /// Numerator coefficients in increasing degree.
    pub numerator: Vec<Complex64>,
    /// Denominator coefficients in increasing degree, normalised to `b₀ = 1`.
    pub denominator: Vec<Complex64>,
    /// Roots of the denominator.
    pub poles: Vec<Complex64>,
    /// Degrees that were asked for.
    pub requested: (usize, usize),
    /// Condition estimate of the denominator system that was solved.
    pub condition: f64,
}

impl Pade {
    pub fn eval(&self, u: Complex64) -> Complex64 {
        horner(&self.numerator, u) / horner(&self.denominator, u)
    }

    pub fn numerator_degree(&self) -> usize {
        self.numerator.len() - 1
    }

    pub fn denominator_degree(&self) -> usize {
        self.denominator.len() - 1
    }

    /// Poles within `tolerance` of the ray `{t e^{iη} : t ≥ 0}`.
    pub fn poles_near_ray(&self, eta: f64, tolerance: f64) -> Vec<Complex64> {
        let dir = Complex64::from_polar(1.0, eta);
        self.poles
            .iter()
            .copied()
            .filter(|&p| {
                let t = (p * dir.conj()).re.max(0.0);
                (p - dir * t).norm() < tolerance
            })
            .collect()
    }
}

fn horner(coeffs: &[Complex64], u: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * u + c)
}

/// `[num_deg / den_deg]` Padé approximant matching the first
/// `num_deg + den_deg + 1` coefficients of `a`.
pub fn pade_continuation(a: &FormalPowerSeries, num_deg: usize, den_deg: usize) -> Result<Pade> {
    let available = a.truncation_order() + 1;
    if num_deg + den_deg + 1 > available {
        return Err(Error::InvalidArgument(format!(
            "Padé degrees ({num_deg}, {den_deg}) need {} coefficients, only {available} available",
            num_deg + den_deg + 1
        )));
    }
    let c = &a.coeffs()[..num_deg + den_deg + 1];
    let norm_c = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let threshold = RANK_TOLERANCE * norm_c;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);

    let max_num = c[..=num_deg].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let max_all = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if max_all == 0.0 || max_num <= RANK_TOLERANCE * max_all {
        return Ok(Pade {
            numerator: vec![zero],
            denominator: vec![one],
            poles: Vec::new(),
            requested: (num_deg, den_deg),
            condition: 1.0,
        });
    }

    let coeff = |i: i64| -> Complex64 {
        if i < 0 {
            zero
        } else {
            c[i as usize]
        }
    };

    let (mut l, mut m) = (num_deg, den_deg);
    let (denominator, condition) = loop {
        if m == 0 {
            break (vec![one], 1.0);
        }
        let system = DMatrix::from_fn(m, m + 1, |i, j| coeff(l as i64 + 1 + i as i64 - j as i64));
        let svd = system.svd(false, true);
        let mut sv: Vec<(usize, f64)> = svd.singular_values.iter().copied().enumerate().collect();
        sv.sort_by(|x, y| y.1.total_cmp(&x.1));
        let rank = sv.iter().filter(|s| s.1 > threshold).count();
        if rank < m {
            l = l.saturating_sub(m - rank);
            m = rank;
            continue;
        }
        let condition = sv[0].1 / sv[m - 1].1;
        // The null vector is the right singular vector orthogonal to the m
        // returned ones: complete the basis via the (m+1)-th row of V^H.
        let v_t = svd.v_t.expect("requested V^T");
        let null = null_vector(&v_t, m + 1);
        break (null, condition);
    };
    if condition > MAX_CONDITION {
        return Err(Error::UnstablePade(condition));
    }

    let mut numerator: Vec<Complex64> = (0..=l)
        .map(|i| {
            (0..denominator.len())
                .map(|j| coeff(i as i64 - j as i64) * denominator[j])
                .sum()
        })
        .collect();
    let mut denominator = denominator;

    // Strip common powers of u and negligible top coefficients.
    let b_tol = RANK_TOLERANCE * denominator.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if let Some(lead) = denominator.iter().position(|b| b.norm() > b_tol) {
        if lead > 0 {
            denominator.drain(..lead);
            let shift = lead.min(numerator.len() - 1);
            numerator.drain(..shift);
        }
    }
    while denominator.len() > 1 && denominator.last().is_some_and(|b| b.norm() <= b_tol) {
        denominator.pop();
    }
    while numerator.len() > 1 && numerator.last().is_some_and(|x| x.norm() <= threshold) {
        numerator.pop();
    }

    let b0 = denominator[0];
    let numerator: Vec<Complex64> = numerator.iter().map(|&x| x / b0).collect();
    let denominator: Vec<Complex64> = denominator.iter().map(|&x| x / b0).collect();
    let poles = polynomial_roots(&denominator);
    Ok(Pade {
        numerator,
        denominator,
        poles,
        requested: (num_deg, den_deg),
        condition,
    })
}

/// Unit vector orthogonal to the rows of `v_t` (an `m × n` matrix with
/// orthonormal rows, `m = n − 1`), by Gram–Schmidt against the standard basis.
fn null_vector(v_t: &DMatrix<Complex64>, n: usize) -> Vec<Complex64> {
    let rows: Vec<Vec<Complex64>> = (0..v_t.nrows())
        .map(|r| (0..n).map(|c| v_t[(r, c)].conj()).collect())
        .collect();
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    for e in 0..n {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[e] = Complex64::new(1.0, 0.0);
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for row in &rows {
                let dot: Complex64 = row.iter().zip(&v).map(|(r, x)| r.conj() * x).sum();
                for (x, r) in v.iter_mut().zip(row) {
                    *x -= dot * r;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if best.as_ref().is_none_or(|b| norm > b.0) {
            best = Some((norm, v));
        }
    }
    let (norm, v) = best.expect("n >= 1");
    v.into_iter().map(|x| x / norm).collect()
}
