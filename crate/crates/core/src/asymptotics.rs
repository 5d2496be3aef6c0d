//! Finite-sample checks of Gevrey asymptotic expansions on sectors.
//!
//! All checks sample a deterministic grid on the subsector obtained by
//! shrinking the opening and the radius by 10%. The verdicts are fits over
//! finitely many points and orders, not proofs.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::gamma::ln_factorial;
use crate::series::{trend, FormalPowerSeries};
use crate::{Error, Result};

/// Relative accuracy assumed for sampled function values; remainders below
/// this level are treated as unresolved.
pub const DEFAULT_VALUE_ACCURACY: f64 = 1e-10;
/// Largest elasticity `d log rₙ / d log n` of the root sequence accepted as
/// "no growth trend".
pub const MAX_ROOT_ELASTICITY: f64 = 0.3;
const SHRINK: f64 = 0.9;
const INNER_RADIUS: f64 = 1e-3;
/// Radius used for the grid when the sector itself is unbounded.
pub const UNBOUNDED_GRID_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sector {
    pub direction: f64,
    pub opening: f64,
    pub radius: f64,
    pub n_radii: usize,
    pub n_angles: usize,
}

impl Sector {
    /// Sector `|arg z − θ| < α/2`, `0 < |z| < ρ` with the default 24 × 9 grid.
    pub fn new(direction: f64, opening: f64, radius: f64) -> Result<Self> {
        if !(opening > 0.0 && opening <= 2.0 * PI) {
            return Err(Error::InvalidArgument(format!(
                "sector opening must lie in (0, 2π] (got {opening})"
            )));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sector radius must be positive (got {radius})"
            )));
        }
        if !direction.is_finite() {
            return Err(Error::InvalidArgument(
                "sector direction must be finite".into(),
            ));
        }
        Ok(Self {
            direction: crate::borel::normalize_angle(direction),
            opening,
            radius,
            n_radii: 24,
            n_angles: 9,
        })
    }

    pub fn with_grid(mut self, n_radii: usize, n_angles: usize) -> Self {
        self.n_radii = n_radii.max(2);
        self.n_angles = n_angles.max(1);
        self
    }

    fn grid_radius(&self) -> f64 {
        if self.radius.is_finite() {
            self.radius
        } else {
            UNBOUNDED_GRID_RADIUS
        }
    }

    /// Log-spaced radii in `[ρ·1e-3, ρ·0.9]`.
    pub fn radii(&self) -> Vec<f64> {
        let rho = self.grid_radius();
        let (lo, hi) = ((rho * INNER_RADIUS).ln(), (rho * SHRINK).ln());
        (0..self.n_radii)
            .map(|i| (lo + (hi - lo) * i as f64 / (self.n_radii - 1) as f64).exp())
            .collect()
    }

    /// Angles at the midpoints of `n_angles` equal cells of the shrunk opening.
    pub fn angles(&self) -> Vec<f64> {
        let width = SHRINK * self.opening;
        (0..self.n_angles)
            .map(|j| self.direction - width / 2.0 + width * (j as f64 + 0.5) / self.n_angles as f64)
            .collect()
    }

    /// Grid points, one ring per radius (innermost first).
    pub fn rings(&self) -> Vec<Vec<Complex64>> {
        let angles = self.angles();
        self.radii()
            .into_iter()
            .map(|r| {
                angles
                    .iter()
                    .map(|&a| Complex64::from_polar(r, a))
                    .collect()
            })
            .collect()
    }

    pub fn grid(&self) -> Vec<Complex64> {
        self.rings().into_iter().flatten().collect()
    }

    /// Membership in the open (unshrunk) sector.
    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        if !(r > 0.0 && r < self.radius) {
            return false;
        }
        let dev = crate::borel::normalize_angle(z.arg() - self.direction).abs();
        dev < self.opening / 2.0 || self.opening >= 2.0 * PI
    }
}

fn evaluate(f: &dyn Fn(Complex64) -> Complex64, z: Complex64) -> Result<Complex64> {
    let v = f(z);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation { re: z.re, im: z.im })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RemainderSample {
    pub n: usize,
    pub z: (f64, f64),
    /// `|f(z) − Σ_{k<n} aₖzᵏ| / (n!^{s−1}|z|ⁿ)`
    pub remainder: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticFit {
    #[serde(rename = "M")]
    pub m_const: f64,
    #[serde(rename = "C")]
    pub c_const: f64,
    pub ok: bool,
    pub n_max: usize,
    /// `(n, rₙ)` with `rₙ = (max_z Rₙ)^{1/n}`, for the orders that were resolved.
    pub root_sequence: Vec<(usize, f64)>,
    /// Fitted `d log rₙ / d log n` over the last third of the orders.
    pub elasticity: f64,
    pub worst_point: Option<(f64, f64)>,
    #[serde(skip)]
    pub samples: Vec<RemainderSample>,
}

impl AsymptoticFit {
    pub fn remainders_csv(&self) -> String {
        let mut out = String::from("n,re,im,remainder\n");
        for s in &self.samples {
            out.push_str(&format!("{},{},{},{}\n", s.n, s.z.0, s.z.1, s.remainder));
        }
        out
    }
}

/// Fits `|f(z) − Σ_{k<n} aₖzᵏ| ≤ M Cⁿ n!^{s−1} |z|ⁿ` on the sector grid for
/// `n ≤ n_max`, with `C = maxₙ rₙ` over `n ≥ 2` and `M = max(R₀, R₁, 1)`.
///
/// `ok` requires a finite `C` and no growth trend in the last third of the
/// root sequence.
pub fn check_asymptotic_fit(
    f: &dyn Fn(Complex64) -> Complex64,
    a: &FormalPowerSeries,
    s: f64,
    sector: &Sector,
    n_max: usize,
) -> Result<AsymptoticFit> {
    check_asymptotic_fit_with_accuracy(f, a, s, sector, n_max, DEFAULT_VALUE_ACCURACY)
}

/// [`check_asymptotic_fit`] with an explicit relative accuracy of the values of `f`.
pub fn check_asymptotic_fit_with_accuracy(
    f: &dyn Fn(Complex64) -> Complex64,
    a: &FormalPowerSeries,
    s: f64,
    sector: &Sector,
    n_max: usize,
    value_accuracy: f64,
) -> Result<AsymptoticFit> {
    if a.coeff(n_max.saturating_sub(1)).is_none() {
        return Err(Error::InvalidArgument(format!(
            "n_max = {n_max} exceeds the series truncation {}",
            a.truncation_order()
        )));
    }
    if !(s >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "Gevrey order must be >= 1 (got {s})"
        )));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut best: Vec<Option<(f64, Complex64)>> = vec![None; n_max + 1];
    let mut samples = Vec::new();

    for z in sector.grid() {
        let fz = evaluate(f, z)?;
        let log_abs_z = z.norm().ln();
        let mut partial = zero;
        let mut magnitude = 0.0;
        let mut power = Complex64::new(1.0, 0.0);
        for (n, slot) in best.iter_mut().enumerate() {
            if n > 0 {
                let term = a.coeff(n - 1).unwrap_or(zero) * power;
                partial += term;
                magnitude += term.norm();
                power *= z;
            }
            let rem = (fz - partial).norm();
            if rem <= value_accuracy * (fz.norm() + magnitude) {
                continue;
            }
            let log_r = rem.ln() - (s - 1.0) * ln_factorial(n) - n as f64 * log_abs_z;
            samples.push(RemainderSample {
                n,
                z: (z.re, z.im),
                remainder: log_r.exp(),
            });
            if slot.is_none_or(|(b, _)| log_r > b) {
                *slot = Some((log_r, z));
            }
        }
    }

    let m_const = best[..2.min(n_max + 1)]
        .iter()
        .flatten()
        .map(|(l, _)| l.exp())
        .fold(1.0, f64::max);

    let root_sequence: Vec<(usize, f64, Complex64)> = best
        .iter()
        .enumerate()
        .skip(2)
        .filter_map(|(n, b)| b.map(|(l, z)| (n, (l / n as f64).exp(), z)))
        .collect();
    let worst = root_sequence
        .iter()
        .fold(None::<&(usize, f64, Complex64)>, |acc, r| match acc {
            Some(a) if a.1 >= r.1 => Some(a),
            _ => Some(r),
        });
    let c_const = worst.map_or(0.0, |w| w.1);

    let first_tail = n_max
        .saturating_sub((n_max.saturating_sub(1)).div_ceil(3))
        .max(2);
    let tail: Vec<(f64, f64)> = root_sequence
        .iter()
        .filter(|r| r.0 >= first_tail && r.1 > 0.0)
        .map(|r| ((r.0 as f64).ln(), r.1.ln()))
        .collect();
    let elasticity = if tail.len() >= 2 { trend(&tail) } else { 0.0 };

    Ok(AsymptoticFit {
        m_const,
        c_const,
        ok: c_const.is_finite() && elasticity <= MAX_ROOT_ELASTICITY,
        n_max,
        root_sequence: root_sequence.iter().map(|r| (r.0, r.1)).collect(),
        elasticity,
        worst_point: worst.map(|w| (w.2.re, w.2.im)),
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatDecayFit {
    #[serde(rename = "B")]
    pub big_b: f64,
    pub b: f64,
    pub ok: bool,
    pub worst_point: Option<(f64, f64)>,
    /// Grid points that entered the fit.
    pub points_used: usize,
}

/// Fits `|f(z)| ≤ B e^{−b|z|^{−1/(s−1)}}` on the sector grid.
///
/// Only complete rings enter the fit: a ring where `f` underflows at some
/// angle would bias `b` toward the slowest-decaying direction. `ok` requires
/// `b > 0` and that the exponential model explains the data better than a
/// power law `A|z|ᵖ`.
pub fn check_flat_decay(
    f: &dyn Fn(Complex64) -> Complex64,
    s: f64,
    sector: &Sector,
) -> Result<FlatDecayFit> {
    if !(s > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "flat-decay test requires s > 1 (got {s})"
        )));
    }
    let exponent = -1.0 / (s - 1.0);
    let mut points: Vec<(f64, f64, f64, Complex64)> = Vec::new(); // (x, log|z|, log|f|, z)
    let mut all_zero = true;
    for ring in sector.rings() {
        let values = ring
            .iter()
            .map(|&z| evaluate(f, z).map(|v| (z, v.norm())))
            .collect::<Result<Vec<_>>>()?;
        if values.iter().any(|v| v.1 > 0.0) {
            all_zero = false;
        }
        if values.iter().any(|v| v.1 < f64::MIN_POSITIVE) {
            continue;
        }
        for (z, v) in values {
            points.push((z.norm().powf(exponent), z.norm().ln(), v.ln(), z));
        }
    }
    if all_zero {
        return Ok(FlatDecayFit {
            big_b: 0.0,
            b: f64::INFINITY,
            ok: true,
            worst_point: None,
            points_used: 0,
        });
    }
    if points.len() < 3 {
        return Err(Error::InsufficientData(
            "fewer than 3 resolvable grid points for the flat-decay fit".into(),
        ));
    }

    let exp_pts: Vec<(f64, f64)> = points.iter().map(|p| (p.0, p.2)).collect();
    let b = -trend(&exp_pts);
    let (log_b, worst) = points.iter().map(|p| (p.2 + b * p.0, p.3)).fold(
        (f64::NEG_INFINITY, None),
        |acc, (v, z)| {
            if v > acc.0 {
                (v, Some(z))
            } else {
                acc
            }
        },
    );

    let pow_pts: Vec<(f64, f64)> = points.iter().map(|p| (p.1, p.2)).collect();
    let ok = b > 0.0 && log_b.is_finite() && ssr(&exp_pts) <= ssr(&pow_pts);
    Ok(FlatDecayFit {
        big_b: log_b.exp(),
        b,
        ok,
        worst_point: worst.map(|z| (z.re, z.im)),
        points_used: points.len(),
    })
}

/// Residual sum of squares of the least-squares line through `points`.
fn ssr(points: &[(f64, f64)]) -> f64 {
    let slope = trend(points);
    let n = points.len() as f64;
    let intercept = points.iter().map(|p| p.1 - slope * p.0).sum::<f64>() / n;
    points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeBounds {
    #[serde(rename = "M")]
    pub m_const: f64,
    #[serde(rename = "C")]
    pub c_const: f64,
    /// False when `C` fitted on the inner half of the radii exceeds four times
    /// the outer-half value: the derivatives blow up toward the vertex.
    pub bounded: bool,
    pub worst_point: Option<(f64, f64)>,
    pub skipped_points: usize,
    pub warnings: Vec<String>,
}

const CAUCHY_DELTA: f64 = 0.1;
const CAUCHY_NODES: usize = 64;

/// `(z, |f(z)|, [(k, |f⁽ᵏ⁾(z)|)])`
type PointEstimate = (Complex64, f64, Vec<(usize, f64)>);

/// Estimates `|f⁽ᵏ⁾(z)| ≤ M Cᵏ k!^s` on the grid from Cauchy integrals over
/// circles of radius `0.1|z|` (64-node trapezoidal rule), `k ≤ k_max ≤ 8`.
pub fn derivative_bounds_check(
    f: &dyn Fn(Complex64) -> Complex64,
    sector: &Sector,
    s: f64,
    k_max: usize,
) -> Result<DerivativeBounds> {
    if k_max == 0 || k_max > 8 {
        return Err(Error::InvalidArgument(format!(
            "derivative order must lie in 1..=8 (got {k_max})"
        )));
    }
    let radii = sector.radii();
    let split = radii[radii.len() / 2];
    let nodes: Vec<Complex64> = (0..CAUCHY_NODES)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / CAUCHY_NODES as f64))
        .collect();

    let mut warnings = Vec::new();
    let mut skipped = 0;
    let mut estimates: Vec<PointEstimate> = Vec::new();
    for z in sector.grid() {
        let r = CAUCHY_DELTA * z.norm();
        if nodes.iter().any(|&w| !sector.contains(z + w * r)) {
            skipped += 1;
            warnings.push(format!(
                "circle around {:.4e}{:+.4e}i leaves the sector; point skipped",
                z.re, z.im
            ));
            continue;
        }
        let values = nodes
            .iter()
            .map(|&w| evaluate(f, z + w * r))
            .collect::<Result<Vec<_>>>()?;
        let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut derivs = Vec::new();
        for k in 1..=k_max {
            // k-th Taylor coefficient at z, times r^k
            let ck: Complex64 = values
                .iter()
                .zip(&nodes)
                .map(|(v, w)| v * w.powi(-(k as i32)))
                .sum::<Complex64>()
                / CAUCHY_NODES as f64;
            if ck.norm() <= DEFAULT_VALUE_ACCURACY * scale {
                continue;
            }
            let log_d = ck.norm().ln() + ln_factorial(k) - k as f64 * r.ln();
            derivs.push((k, log_d));
        }
        estimates.push((z, evaluate(f, z)?.norm(), derivs));
    }
    if estimates.is_empty() {
        return Err(Error::InsufficientData(
            "every Cauchy circle left the sector".into(),
        ));
    }

    let m_const = estimates
        .iter()
        .map(|e| e.1)
        .fold(f64::MIN_POSITIVE, f64::max);
    let log_m = m_const.ln();
    let c_of = |e: &(Complex64, f64, Vec<(usize, f64)>)| -> f64 {
        e.2.iter()
            .map(|&(k, log_d)| ((log_d - log_m - s * ln_factorial(k)) / k as f64).exp())
            .fold(0.0, f64::max)
    };
    let mut c_const = 0.0;
    let mut worst = None;
    let (mut c_inner, mut c_outer) = (0.0f64, 0.0f64);
    for e in &estimates {
        let c = c_of(e);
        if c > c_const {
            c_const = c;
            worst = Some((e.0.re, e.0.im));
        }
        if e.0.norm() < split {
            c_inner = c_inner.max(c);
        } else {
            c_outer = c_outer.max(c);
        }
    }
    let bounded = c_const.is_finite() && (c_outer == 0.0 || c_inner <= 4.0 * c_outer);
    Ok(DerivativeBounds {
        m_const,
        c_const,
        bounded,
        worst_point: worst,
        skipped_points: skipped,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_inside_and_deterministic() {
        let s = Sector::new(0.3, PI / 2.0, 2.0).unwrap();
        let g1 = s.grid();
        let g2 = Sector::new(0.3, PI / 2.0, 2.0).unwrap().grid();
        assert_eq!(g1.len(), 24 * 9);
        for (a, b) in g1.iter().zip(&g2) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        assert!(g1.iter().all(|&z| s.contains(z)));
        let radii = s.radii();
        assert!((radii[0] - 2e-3).abs() < 1e-15);
        assert!((radii[23] - 1.8).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_sectors() {
        assert!(Sector::new(0.0, 0.0, 1.0).is_err());
        assert!(Sector::new(0.0, 7.0, 1.0).is_err());
        assert!(Sector::new(0.0, 1.0, -1.0).is_err());
        assert!(Sector::new(0.0, 1.0, f64::INFINITY).is_ok());
    }

    #[test]
    fn exp_taylor_fit() {
        let a = FormalPowerSeries::from_fn(20, |k| {
            Complex64::new(1.0 / crate::gamma::gamma(k as f64 + 1.0), 0.0)
        })
        .unwrap();
        let sector = Sector::new(0.0, PI / 2.0, 1.0).unwrap();
        let fit = check_asymptotic_fit(&|z: Complex64| z.exp(), &a, 1.0, &sector, 12).unwrap();
        assert!(fit.ok, "{fit:?}");
        assert!(fit.c_const <= 2.0);
    }

    #[test]
    fn zero_function_zero_series() {
        let sector = Sector::new(0.0, PI, 1.0).unwrap();
        let fit = check_asymptotic_fit(
            &|_| Complex64::new(0.0, 0.0),
            &FormalPowerSeries::zero(12),
            2.0,
            &sector,
            12,
        )
        .unwrap();
        assert!(fit.ok);
        assert_eq!(fit.m_const, 1.0);
        assert_eq!(fit.c_const, 0.0);
    }

    #[test]
    fn evaluation_failure_names_point() {
        let sector = Sector::new(0.0, PI, 1.0).unwrap();
        let err = check_asymptotic_fit(
            &|_| Complex64::new(f64::NAN, 0.0),
            &FormalPowerSeries::zero(4),
            2.0,
            &sector,
            4,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Evaluation { .. }));
        assert!(err.to_string().contains("z = "));
    }

    #[test]
    fn flat_exponential() {
        let sector = Sector::new(0.0, PI / 2.0, 1.0).unwrap();
        let fit = check_flat_decay(&|z: Complex64| (-z.inv()).exp(), 2.0, &sector).unwrap();
        assert!(fit.ok, "{fit:?}");
        assert!(fit.b >= (PI / 4.0).cos(), "{fit:?}");
    }

    #[test]
    fn polynomial_is_not_flat() {
        let sector = Sector::new(0.0, PI / 2.0, 1.0).unwrap();
        let fit = check_flat_decay(&|z: Complex64| z * z * z, 2.0, &sector).unwrap();
        assert!(!fit.ok, "{fit:?}");
    }

    #[test]
    fn identically_zero_is_flat() {
        let sector = Sector::new(0.0, PI / 2.0, 1.0).unwrap();
        let fit = check_flat_decay(&|_| Complex64::new(0.0, 0.0), 2.0, &sector).unwrap();
        assert!(fit.ok);
        assert!(fit.b.is_infinite());
    }

    #[test]
    fn exp_derivatives() {
        let sector = Sector::new(0.0, PI / 2.0, 1.0).unwrap();
        let d = derivative_bounds_check(&|z: Complex64| z.exp(), &sector, 1.0, 6).unwrap();
        assert!(d.bounded);
        assert!(d.c_const <= 1.5, "{d:?}");
        assert_eq!(d.skipped_points, 0);
    }

    #[test]
    fn reciprocal_is_unbounded() {
        let sector = Sector::new(0.0, PI / 2.0, 1.0).unwrap();
        let d = derivative_bounds_check(&|z: Complex64| z.inv(), &sector, 1.0, 6).unwrap();
        assert!(!d.bounded, "{d:?}");
    }

    #[test]
    fn derivative_order_limit() {
        let sector = Sector::new(0.0, PI / 2.0, 1.0).unwrap();
        assert!(derivative_bounds_check(&|z| z, &sector, 1.0, 9).is_err());
    }
}
