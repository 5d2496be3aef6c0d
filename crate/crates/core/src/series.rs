//! Truncated formal power series `Σ aₖ zᵏ` over double-precision complex
//! coefficients.
//!
//! A series is either *truncated* (only `a₀..=a_N` are known) or a
//! *polynomial* (every coefficient beyond `N` is known to be zero). Binary
//! operations truncate to the shorter truncated operand; polynomials never
//! limit the result, since their zero tail is genuine data.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::gamma::ln_factorial;
use crate::{Error, Result};

/// Coefficients with modulus at or below this are treated as absent by the
/// logarithmic fits.
pub const FIT_ZERO: f64 = 1e-300;

#[derive(Clone, PartialEq)]
pub struct FormalPowerSeries {
    coeffs: Vec<Complex64>,
    polynomial: bool,
}

impl FormalPowerSeries {
    /// Truncated series with the given coefficients `a₀..=a_N`.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::validate(&coeffs)?;
        Ok(Self {
            coeffs,
            polynomial: false,
        })
    }

    /// Polynomial with the given coefficients; all higher coefficients are
    /// exactly zero.
    pub fn polynomial(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::validate(&coeffs)?;
        Ok(Self {
            coeffs,
            polynomial: true,
        })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn polynomial_from_real(coeffs: &[f64]) -> Result<Self> {
        Self::polynomial(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Truncated series of order `order` with coefficient `k` given by `f(k)`.
    pub fn from_fn(order: usize, f: impl FnMut(usize) -> Complex64) -> Result<Self> {
        Self::new((0..=order).map(f).collect())
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); order + 1],
            polynomial: false,
        }
    }

    /// `zᵏ` as a polynomial.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = Complex64::new(1.0, 0.0);
        Self {
            coeffs,
            polynomial: true,
        }
    }

    fn validate(coeffs: &[Complex64]) -> Result<()> {
        if coeffs.is_empty() {
            return Err(Error::InvalidSeries("no coefficients".into()));
        }
        if let Some(k) = coeffs
            .iter()
            .position(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::InvalidSeries(format!(
                "coefficient {k} is not finite"
            )));
        }
        Ok(())
    }

    pub fn truncation_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_polynomial(&self) -> bool {
        self.polynomial
    }

    /// Coefficient of `zᵏ`, or `None` if it lies beyond the truncation of a
    /// truncated series.
    pub fn coeff(&self, k: usize) -> Option<Complex64> {
        match self.coeffs.get(k) {
            Some(&c) => Some(c),
            None if self.polynomial => Some(Complex64::new(0.0, 0.0)),
            None => None,
        }
    }

    /// Drops every coefficient above `order`. The result is a truncated series
    /// even when `self` was a polynomial.
    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.truncation_order());
        Self {
            coeffs: self.coeffs[..=n].to_vec(),
            polynomial: self.polynomial && n == self.truncation_order(),
        }
    }

    /// Pads a polynomial with its (genuine) zero coefficients up to `order`.
    pub fn extend_to(&self, order: usize) -> Result<Self> {
        if order <= self.truncation_order() {
            return Ok(self.clone());
        }
        if !self.polynomial {
            return Err(Error::TruncationTooShort(format!(
                "series is truncated at order {} and cannot be extended to {order}",
                self.truncation_order()
            )));
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, Complex64::new(0.0, 0.0));
        Ok(Self {
            coeffs,
            polynomial: true,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&c| c * factor).collect(),
            polynomial: self.polynomial,
        }
    }

    /// Maps every coefficient `aₖ` to `f(k, aₖ)`, keeping the truncation.
    pub fn map_coeffs(&self, mut f: impl FnMut(usize, Complex64) -> Complex64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| f(k, c))
                .collect(),
            polynomial: self.polynomial,
        }
    }

    /// Order of a binary operation's result, or `None` when both operands are
    /// polynomials.
    fn joint_order(&self, other: &Self) -> Option<usize> {
        match (self.polynomial, other.polynomial) {
            (true, true) => None,
            (true, false) => Some(other.truncation_order()),
            (false, true) => Some(self.truncation_order()),
            (false, false) => Some(self.truncation_order().min(other.truncation_order())),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (len, polynomial) = match self.joint_order(other) {
            Some(n) => (n + 1, false),
            None => (self.coeffs.len().max(other.coeffs.len()), true),
        };
        let zero = Complex64::new(0.0, 0.0);
        let coeffs = (0..len)
            .map(|k| self.coeff(k).unwrap_or(zero) + other.coeff(k).unwrap_or(zero))
            .collect();
        Self { coeffs, polynomial }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Cauchy product.
    pub fn mul(&self, other: &Self) -> Self {
        let (len, polynomial) = match self.joint_order(other) {
            Some(n) => (n + 1, false),
            None => (self.coeffs.len() + other.coeffs.len() - 1, true),
        };
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
        for (i, &a) in self.coeffs.iter().enumerate().take(len) {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(len - i) {
                coeffs[i + j] += a * b;
            }
        }
        Self { coeffs, polynomial }
    }

    /// Term-wise derivative; the truncation order drops by one (a truncated
    /// series of order 0 becomes the zero series of order 0).
    pub fn derive(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self {
                coeffs: vec![Complex64::new(0.0, 0.0)],
                polynomial: self.polynomial,
            };
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(k, &c)| c * (k as f64 + 1.0))
            .collect();
        Self {
            coeffs,
            polynomial: self.polynomial,
        }
    }

    /// Horner evaluation of the stored coefficients.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn nonzero_count(&self) -> usize {
        self.coeffs.iter().filter(|c| c.norm() > FIT_ZERO).count()
    }
}

impl fmt::Debug for FormalPowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FormalPowerSeries")
            .field("order", &self.truncation_order())
            .field("polynomial", &self.polynomial)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Add for &FormalPowerSeries {
    type Output = FormalPowerSeries;
    fn add(self, rhs: Self) -> FormalPowerSeries {
        FormalPowerSeries::add(self, rhs)
    }
}

impl Sub for &FormalPowerSeries {
    type Output = FormalPowerSeries;
    fn sub(self, rhs: Self) -> FormalPowerSeries {
        FormalPowerSeries::sub(self, rhs)
    }
}

impl Mul for &FormalPowerSeries {
    type Output = FormalPowerSeries;
    fn mul(self, rhs: Self) -> FormalPowerSeries {
        FormalPowerSeries::mul(self, rhs)
    }
}

impl Neg for &FormalPowerSeries {
    type Output = FormalPowerSeries;
    fn neg(self) -> FormalPowerSeries {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

// Exchange format: a JSON array of [re, im] pairs, index = power of z.
impl Serialize for FormalPowerSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.coeffs.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FormalPowerSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        FormalPowerSeries::new(pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect())
            .map_err(serde::de::Error::custom)
    }
}

/// Fitted Gevrey envelope `|aₖ| ≈ M Cᵏ k!^(s−1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevreyFit {
    pub s_hat: f64,
    pub log_c: f64,
    pub log_m: f64,
    /// Largest absolute deviation of the fitted log-model.
    pub residual: f64,
}

/// Least-squares fit of `log|aₖ| ≈ log M + k log C + (s−1) log k!` over the
/// nonzero coefficients with `k ≥ 2`.
pub fn estimate_gevrey_order(a: &FormalPowerSeries) -> Result<GevreyFit> {
    if a.nonzero_count() < 8 {
        return Err(Error::InsufficientData(format!(
            "Gevrey fit needs at least 8 nonzero coefficients, found {}",
            a.nonzero_count()
        )));
    }
    let points: Vec<(usize, f64)> = a
        .coeffs()
        .iter()
        .enumerate()
        .skip(2)
        .filter(|(_, c)| c.norm() > FIT_ZERO)
        .map(|(k, c)| (k, c.norm().ln()))
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientData(
            "Gevrey fit needs at least 3 nonzero coefficients with k >= 2".into(),
        ));
    }

    let design = DMatrix::from_fn(points.len(), 3, |r, c| {
        let k = points[r].0;
        match c {
            0 => 1.0,
            1 => k as f64,
            _ => ln_factorial(k),
        }
    });
    let target = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let beta = least_squares(&design, &target)?;

    let residual = (&design * &beta - &target).amax();
    Ok(GevreyFit {
        s_hat: (1.0 + beta[2]).max(1.0),
        log_c: beta[1],
        log_m: beta[0],
        residual,
    })
}

pub(crate) fn least_squares(design: &DMatrix<f64>, target: &DVector<f64>) -> Result<DVector<f64>> {
    design
        .clone()
        .svd(true, true)
        .solve(target, 1e-12)
        .map_err(|e| Error::InsufficientData(format!("least squares failed: {e}")))
}

/// Verdict of [`is_sharp_class`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpClass {
    pub sharp: bool,
    /// Radius estimate of `Σ aₖ zᵏ / k!^(s−1)`; may be `0` or `+∞`.
    pub radius: f64,
}

/// Band within which a radius estimate counts as finite and positive.
pub const SHARP_BAND: (f64, f64) = (1e-6, 1e6);

/// Decides whether Gevrey order `s` is sharp for `a`: the series
/// `Σ aₖ zᵏ / k!^(s−1)` must have a finite positive radius, which rules out
/// every smaller order.
pub fn is_sharp_class(a: &FormalPowerSeries, s: f64) -> Result<SharpClass> {
    if !(s > 1.0) {
        return Err(Error::SharpnessOrder(s));
    }
    let logs: Vec<(usize, f64)> = a
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > FIT_ZERO)
        .map(|(k, c)| (k, c.norm().ln() - (s - 1.0) * ln_factorial(k)))
        .collect();
    let radius = radius_from_logs(&logs, a.truncation_order())?;
    Ok(SharpClass {
        sharp: radius > SHARP_BAND.0 && radius < SHARP_BAND.1,
        radius,
    })
}

/// Cauchy–Hadamard estimate from `(k, ln|cₖ|)` pairs, using the last third
/// of the index range `0..=order`.
///
/// A clear downward (upward) trend of the roots `|cₖ|^(1/k)` across the tail
/// is read as radius `+∞` (`0`).
pub(crate) fn radius_from_logs(logs: &[(usize, f64)], order: usize) -> Result<f64> {
    let tail_len = (order + 1).div_ceil(3);
    let start = (order + 1 - tail_len).max(1);
    let roots: Vec<(f64, f64)> = logs
        .iter()
        .filter(|(k, _)| *k >= start)
        .map(|&(k, l)| ((k as f64).ln(), l / k as f64))
        .collect();
    if roots.is_empty() {
        return Err(Error::InsufficientData(
            "no nonzero coefficients in the tail".into(),
        ));
    }
    if roots.len() >= 3 {
        let slope = trend(&roots);
        if slope < -ROOT_TREND {
            return Ok(f64::INFINITY);
        }
        if slope > ROOT_TREND {
            return Ok(0.0);
        }
    }
    let log_root = roots.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    Ok((-log_root).exp())
}

/// Minimum elasticity of `|cₖ|^(1/k)` in `k` that counts as a trend. Geometric
/// sequences have elasticity → 0; `1/k!` has −1 and `k!` has +1.
const ROOT_TREND: f64 = 0.25;

/// Ordinary least-squares slope of `y` against `x`.
pub(crate) fn trend(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn euler(order: usize) -> FormalPowerSeries {
        FormalPowerSeries::from_fn(order, |k| {
            if k == 0 {
                c(0.0)
            } else {
                let f: f64 = (1..k).map(|j| j as f64).product();
                c(if k % 2 == 1 { f } else { -f })
            }
        })
        .unwrap()
    }

    #[test]
    fn add_cancels() {
        let a = FormalPowerSeries::from_real(&[1.0, 1.0]).unwrap();
        let b = FormalPowerSeries::from_real(&[1.0, -1.0]).unwrap();
        assert_eq!((&a + &b).coeffs(), &[c(2.0), c(0.0)]);
    }

    #[test]
    fn add_zero_is_identity() {
        let s = euler(10);
        assert_eq!(s.add(&FormalPowerSeries::zero(10)), s);
    }

    #[test]
    fn euler_doubles() {
        let e = euler(12);
        let d = &e + &e;
        for k in 1..=12 {
            assert_eq!(d.coeffs()[k], e.coeffs()[k] * 2.0);
        }
        assert_eq!(d.coeffs()[3], c(4.0));
    }

    #[test]
    fn add_truncates_to_shorter() {
        let a = FormalPowerSeries::from_real(&[1.0, 2.0, 3.0]).unwrap();
        let b = FormalPowerSeries::from_real(&[1.0]).unwrap();
        assert_eq!(a.add(&b).truncation_order(), 0);
        let p = FormalPowerSeries::polynomial_from_real(&[1.0]).unwrap();
        assert_eq!(a.add(&p).coeffs(), &[c(2.0), c(2.0), c(3.0)]);
    }

    #[test]
    fn mul_difference_of_squares() {
        let a = FormalPowerSeries::polynomial_from_real(&[1.0, 1.0]).unwrap();
        let b = FormalPowerSeries::polynomial_from_real(&[1.0, -1.0]).unwrap();
        assert_eq!(a.mul(&b).coeffs(), &[c(1.0), c(0.0), c(-1.0)]);
    }

    #[test]
    fn mul_by_one() {
        let s = euler(9);
        let one = FormalPowerSeries::polynomial_from_real(&[1.0]).unwrap();
        assert_eq!(s.mul(&one), s);
    }

    #[test]
    fn geometric_times_one_minus_z() {
        let geo = FormalPowerSeries::from_real(&[1.0; 11]).unwrap();
        let lin =
            FormalPowerSeries::from_real(&[1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
                .unwrap();
        // brute-force convolution
        let mut expected = [0.0; 11];
        for (k, slot) in expected.iter_mut().enumerate() {
            for l in 0..=k {
                let b = match k - l {
                    0 => 1.0,
                    1 => -1.0,
                    _ => 0.0,
                };
                *slot += 1.0 * b;
            }
        }
        let prod = geo.mul(&lin);
        assert_eq!(prod.truncation_order(), 10);
        for (got, want) in prod.coeffs().iter().zip(expected) {
            assert_eq!(*got, c(want));
        }
        assert_eq!(prod.coeffs()[0], c(1.0));
    }

    #[test]
    fn derive_examples() {
        let z = FormalPowerSeries::from_real(&[0.0, 1.0]).unwrap();
        assert_eq!(z.derive().coeffs(), &[c(1.0)]);

        let exp = FormalPowerSeries::from_fn(10, |k| c(1.0 / crate::gamma::gamma(k as f64 + 1.0)))
            .unwrap();
        let d = exp.derive();
        assert_eq!(d.truncation_order(), 9);
        for k in 0..=9 {
            assert!((d.coeffs()[k] - exp.coeffs()[k]).norm() < 1e-15);
        }

        let e = euler(12).derive();
        for k in 0..=11 {
            let fact: f64 = (1..=k).map(|j| j as f64).product();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(e.coeffs()[k], c((k as f64 + 1.0) * sign * fact));
        }
    }

    #[test]
    fn derive_of_order_zero_is_zero() {
        let s = FormalPowerSeries::from_real(&[5.0]).unwrap();
        assert_eq!(s.derive(), FormalPowerSeries::zero(0));
    }

    #[test]
    fn gevrey_order_examples() {
        let fit = estimate_gevrey_order(&euler(40)).unwrap();
        assert!((1.9..=2.1).contains(&fit.s_hat), "{fit:?}");

        let ones = FormalPowerSeries::from_real(&[1.0; 41]).unwrap();
        let fit = estimate_gevrey_order(&ones).unwrap();
        assert!((1.0..=1.1).contains(&fit.s_hat), "{fit:?}");

        let sq = FormalPowerSeries::from_fn(30, |k| c(crate::gamma::gamma(k as f64 + 1.0).powi(2)))
            .unwrap();
        let fit = estimate_gevrey_order(&sq).unwrap();
        assert!((2.9..=3.1).contains(&fit.s_hat), "{fit:?}");
    }

    #[test]
    fn gevrey_fit_needs_data() {
        let s =
            FormalPowerSeries::from_real(&[1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            estimate_gevrey_order(&s),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn sharpness_examples() {
        let r = is_sharp_class(&euler(40), 2.0).unwrap();
        assert!(r.sharp);
        assert!((r.radius - 1.0).abs() < 0.2, "{r:?}");

        let ones = FormalPowerSeries::from_real(&[1.0; 41]).unwrap();
        let r = is_sharp_class(&ones, 2.0).unwrap();
        assert!(!r.sharp);
        assert!(r.radius.is_infinite());

        let s = FormalPowerSeries::from_fn(40, |k| {
            c(crate::gamma::gamma(k as f64 + 1.0) * 2f64.powi(k as i32))
        })
        .unwrap();
        let r = is_sharp_class(&s, 2.0).unwrap();
        assert!(r.sharp);
        assert!((r.radius - 0.5).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn sharpness_rejects_radius_zero() {
        let sq = FormalPowerSeries::from_fn(40, |k| c(crate::gamma::gamma(k as f64 + 1.0).powi(2)))
            .unwrap();
        let r = is_sharp_class(&sq, 2.0).unwrap();
        assert!(!r.sharp);
        assert_eq!(r.radius, 0.0);
    }

    #[test]
    fn sharpness_requires_s_above_one() {
        assert_eq!(
            is_sharp_class(&euler(10), 1.0),
            Err(Error::SharpnessOrder(1.0))
        );
    }

    #[test]
    fn json_format_is_pairs() {
        let s = FormalPowerSeries::new(vec![Complex64::new(1.0, -2.0), c(0.5)]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, "[[1.0,-2.0],[0.5,0.0]]");
        let back: FormalPowerSeries = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<FormalPowerSeries>("[]").is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(FormalPowerSeries::from_real(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn polynomial_extension() {
        let p = FormalPowerSeries::polynomial_from_real(&[0.0, 1.0]).unwrap();
        assert_eq!(p.extend_to(4).unwrap().truncation_order(), 4);
        assert_eq!(p.coeff(7), Some(c(0.0)));
        let t = FormalPowerSeries::from_real(&[0.0, 1.0]).unwrap();
        assert_eq!(t.coeff(7), None);
        assert!(t.extend_to(4).is_err());
    }
}
