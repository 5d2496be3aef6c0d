//! Borel and Laplace transforms of index `m`, and the Borel-sum pipeline.
//!
//! The Laplace transform of index `m` along the ray of direction `η` is
//!
//! ```text
//! (𝓛ₘ f)(z) = m / zᵐ ∫₀^{∞e^{iη}} f(u) e^{−(u/z)ᵐ} u^{m−1} du,
//! ```
//!
//! and the formal Borel transform divides `aₖ` by `Γ(1 + k/m)`, so that
//! `𝓛ₘ uᵏ = Γ(1 + k/m) zᵏ`. A Gevrey-`s` series with `1 < s < 3` is summed by
//! taking `m = 1/(s−1)`, continuing its Borel transform along the ray and
//! applying `𝓛ₘ`.
//!
//! Branches: `zᵐ = exp(m log z)` with `arg z ∈ (−π, π]`, and `(u/z)ᵐ` is taken as
//! `(t/|z|)ᵐ e^{im(η − arg z)}` for `u = t e^{iη}`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::gamma::{gamma, ln_gamma};
use crate::pade::{pade_continuation, Pade};
use crate::quad::{integrate, integrate_half_line, Quadrature};
use crate::series::{radius_from_logs, FormalPowerSeries, FIT_ZERO};
use crate::{Error, Result};

/// A holomorphic function sampled on the Laplace ray.
pub type RayFunction = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

pub const DEFAULT_QUAD_REL_TOL: f64 = 1e-10;
/// Padé poles closer than this to the integration ray raise a warning.
pub const POLE_WARNING_DISTANCE: f64 = 1e-3;

#[derive(Clone)]
pub enum Continuation {
    /// The Borel transform in closed form.
    ClosedForm(RayFunction),
    /// Padé approximant of the derivative of the Borel transform; `None`
    /// selects `(⌊(N−1)/2⌋, ⌊(N−1)/2⌋)` from the `N` available coefficients.
    Pade(Option<(usize, usize)>),
}

impl fmt::Debug for Continuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Continuation::ClosedForm(_) => f.write_str("ClosedForm(..)"),
            Continuation::Pade(d) => f.debug_tuple("Pade").field(d).finish(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BorelSumPlan {
    pub m: f64,
    pub eta: f64,
    pub continuation: Continuation,
    pub quad_rel_tol: f64,
}

impl BorelSumPlan {
    /// Plan with the default Padé continuation and quadrature tolerance.
    /// `eta` is normalised into `(−π, π]`.
    pub fn new(m: f64, eta: f64) -> Result<Self> {
        if !(m > 0.5) || !m.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "index m must exceed 1/2 (got {m})"
            )));
        }
        if !eta.is_finite() {
            return Err(Error::InvalidArgument(
                "ray direction must be finite".into(),
            ));
        }
        Ok(Self {
            m,
            eta: normalize_angle(eta),
            continuation: Continuation::Pade(None),
            quad_rel_tol: DEFAULT_QUAD_REL_TOL,
        })
    }

    /// Plan for summing a Gevrey-`s` series (`m = 1/(s−1)`).
    pub fn for_order(s: f64, eta: f64) -> Result<Self> {
        check_order(s)?;
        Self::new(1.0 / (s - 1.0), eta)
    }

    pub fn with_continuation(mut self, continuation: Continuation) -> Self {
        self.continuation = continuation;
        self
    }

    pub fn with_closed_form(
        self,
        f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        self.with_continuation(Continuation::ClosedForm(Arc::new(f)))
    }

    pub fn with_tolerance(mut self, quad_rel_tol: f64) -> Self {
        self.quad_rel_tol = quad_rel_tol;
        self
    }

    fn direction(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.eta)
    }
}

/// Maps an angle into `(−π, π]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}

fn check_order(s: f64) -> Result<()> {
    if s > 1.0 && s < 3.0 {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange(s))
    }
}

fn check_index(m: f64) -> Result<()> {
    if m > 0.0 && m.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "index m must be positive (got {m})"
        )))
    }
}

/// `aₖ ↦ aₖ / Γ(1 + k/m)`.
pub fn formal_borel(a: &FormalPowerSeries, m: f64) -> Result<FormalPowerSeries> {
    check_index(m)?;
    rescale_by_gamma(a, m, -1.0)
}

/// `aₖ ↦ aₖ Γ(1 + k/m)`.
pub fn formal_laplace(a: &FormalPowerSeries, m: f64) -> Result<FormalPowerSeries> {
    check_index(m)?;
    rescale_by_gamma(a, m, 1.0)
}

fn rescale_by_gamma(a: &FormalPowerSeries, m: f64, power: f64) -> Result<FormalPowerSeries> {
    let out = a.map_coeffs(|k, c| {
        let x = 1.0 + k as f64 / m;
        let g = gamma(x);
        if g.is_finite() {
            if power > 0.0 {
                c * g
            } else {
                c / g
            }
        } else if c.norm() == 0.0 {
            c
        } else {
            // log space for arguments beyond the range of Γ
            let (r, phase) = c.to_polar();
            Complex64::from_polar((r.ln() + power * ln_gamma(x)).exp(), phase)
        }
    });
    if out
        .coeffs()
        .iter()
        .any(|c| !c.re.is_finite() || !c.im.is_finite())
    {
        return Err(Error::InvalidSeries(
            "coefficient overflow in Gamma rescaling".into(),
        ));
    }
    Ok(out)
}

/// Cauchy–Hadamard radius `1 / limsup |aₖ|^{1/k}` from the last third of the
/// coefficients; `+∞` when the roots tend to zero.
pub fn radius_estimate(a: &FormalPowerSeries) -> Result<f64> {
    if a.nonzero_count() < 8 {
        return Err(Error::InsufficientData(format!(
            "radius estimate needs at least 8 nonzero coefficients, found {}",
            a.nonzero_count()
        )));
    }
    let logs: Vec<(usize, f64)> = a
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > FIT_ZERO)
        .map(|(k, c)| (k, c.norm().ln()))
        .collect();
    radius_from_logs(&logs, a.truncation_order())
}

/// Envelope `|f(t e^{iη})| ≤ B e^{b tᵐ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    #[serde(rename = "B")]
    pub big_b: f64,
    pub b: f64,
    pub m: f64,
}

/// Least-squares fit of `log|f(t e^{iη})| ≈ log B + b tᵐ` over the sample
/// radii, with `B` raised until the bound holds at every sample.
pub fn fit_exponential_growth(
    f: &dyn Fn(Complex64) -> Complex64,
    eta: f64,
    m: f64,
    samples: &[f64],
) -> Result<GrowthFit> {
    if samples.len() < 8 {
        return Err(Error::InvalidArgument(format!(
            "growth fit needs at least 8 sample radii (got {})",
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| !(w[1] > w[0])) || samples[0] < 0.0 {
        return Err(Error::InvalidArgument(
            "sample radii must be non-negative and increasing".into(),
        ));
    }
    let dir = Complex64::from_polar(1.0, eta);
    let points: Vec<(f64, f64)> = samples
        .iter()
        .filter_map(|&t| {
            let v = f(dir * t).norm();
            (v > 0.0 && v.is_finite()).then(|| (t.powf(m), v.ln()))
        })
        .collect();
    if points.is_empty() {
        return Ok(GrowthFit {
            big_b: f64::MIN_POSITIVE,
            b: 0.0,
            m,
        });
    }
    let b = crate::series::trend(&points);
    let log_b = points
        .iter()
        .map(|&(x, y)| y - b * x)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(GrowthFit {
        big_b: log_b.exp(),
        b,
        m,
    })
}

/// Sample radii used when a transform checks its own domain: `2^{j/2}`,
/// `j = 0..16`.
pub fn default_growth_samples() -> Vec<f64> {
    (0..16).map(|j| 2f64.powf(j as f64 / 2.0)).collect()
}

/// Values of `cos[m(η − arg z)]` below this count as the boundary.
const DOMAIN_MARGIN: f64 = 1e-12;

/// `b|z|ᵐ < cos[m(η − arg z)]` with a positive cosine.
pub fn domain_check(plan: &BorelSumPlan, z: Complex64, growth: &GrowthFit) -> bool {
    let c = (plan.m * (plan.eta - z.arg())).cos();
    c > DOMAIN_MARGIN && growth.b * z.norm().powf(plan.m) < c
}

/// Pieces of the Laplace integrand in the ray parameter `t`.
struct RayKernel {
    m: f64,
    abs_z: f64,
    /// `e^{im(η − arg z)}`
    rotation: Complex64,
    dir: Complex64,
}

impl RayKernel {
    fn new(plan: &BorelSumPlan, z: Complex64) -> Result<Self> {
        if z.norm() == 0.0 || !z.norm().is_finite() {
            return Err(Error::InvalidArgument(
                "z must be nonzero and finite".into(),
            ));
        }
        Ok(Self {
            m: plan.m,
            abs_z: z.norm(),
            rotation: Complex64::from_polar(1.0, plan.m * (plan.eta - z.arg())),
            dir: plan.direction(),
        })
    }

    /// `e^{−(u/z)ᵐ}` at `u = t e^{iη}`.
    fn decay(&self, t: f64) -> Complex64 {
        (-(self.rotation * (t / self.abs_z).powf(self.m))).exp()
    }

    /// `m/zᵐ · u^{m−1} du/dt` at `u = t e^{iη}`.
    fn weight(&self, t: f64) -> Complex64 {
        self.rotation * (self.m * t.powf(self.m - 1.0) / self.abs_z.powf(self.m))
    }

    /// Length scale of the decay along the ray.
    fn scale(&self) -> f64 {
        let c = self.rotation.re.max(0.05);
        self.abs_z / c.powf(1.0 / self.m)
    }

    fn laplace_integrand<'a>(
        &'a self,
        f: &'a dyn Fn(Complex64) -> Complex64,
    ) -> impl Fn(f64) -> Complex64 + 'a {
        move |t| {
            let d = self.decay(t);
            if d.norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            f(self.dir * t) * d * self.weight(t)
        }
    }
}

/// `(𝓛ₘ f)(z)` along the plan's ray.
pub fn laplace_numeric(
    f: &dyn Fn(Complex64) -> Complex64,
    plan: &BorelSumPlan,
    z: Complex64,
) -> Result<Complex64> {
    laplace_with_error(f, plan, z).map(|q| q.value)
}

/// [`laplace_numeric`] together with the quadrature error estimate.
pub fn laplace_with_error(
    f: &dyn Fn(Complex64) -> Complex64,
    plan: &BorelSumPlan,
    z: Complex64,
) -> Result<Quadrature> {
    let kernel = RayKernel::new(plan, z)?;
    let growth = fit_exponential_growth(f, plan.eta, plan.m, &default_growth_samples())?;
    ensure_domain(plan, z, &growth)?;
    let integrand = kernel.laplace_integrand(f);
    integrate_half_line(&integrand, kernel.scale(), plan.quad_rel_tol)
}

fn ensure_domain(plan: &BorelSumPlan, z: Complex64, growth: &GrowthFit) -> Result<()> {
    if domain_check(plan, z, growth) {
        Ok(())
    } else {
        Err(Error::OutsideDomain(format!(
            "b = {:.4}, |z|^m = {:.4}, cos = {:.4}",
            growth.b,
            z.norm().powf(plan.m),
            (plan.m * (plan.eta - z.arg())).cos()
        )))
    }
}

/// Laplace integral restricted to `t ∈ (0, ρ)`.
pub fn truncated_laplace_numeric(
    g: &dyn Fn(Complex64) -> Complex64,
    plan: &BorelSumPlan,
    rho: f64,
    z: Complex64,
) -> Result<Complex64> {
    laplace_segment(g, plan, 0.0, rho, z)
}

/// Laplace integral restricted to `t ∈ (ρ₀, ρ₁)`; equals the difference of the
/// two truncated transforms without the cancellation.
pub fn laplace_segment(
    g: &dyn Fn(Complex64) -> Complex64,
    plan: &BorelSumPlan,
    rho0: f64,
    rho1: f64,
    z: Complex64,
) -> Result<Complex64> {
    if !(rho0 >= 0.0 && rho1 > rho0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= rho0 < rho1 (got {rho0}, {rho1})"
        )));
    }
    let kernel = RayKernel::new(plan, z)?;
    let integrand = kernel.laplace_integrand(g);
    integrate(&integrand, rho0, rho1, plan.quad_rel_tol, 0.0).map(|q| q.value)
}

/// Result of [`borel_sum`].
#[derive(Debug, Clone, PartialEq)]
pub struct BorelSum {
    pub value: Complex64,
    pub est_error: f64,
    pub domain_ok: bool,
    pub growth: GrowthFit,
    /// Singularities of the Padé continuation (empty for closed forms).
    pub poles: Vec<Complex64>,
    pub pade: Option<Pade>,
    pub warnings: Vec<String>,
}

/// Borel sum of a Gevrey-`s` series at `z`: formal Borel transform of index
/// `m = 1/(s−1)`, continuation along the ray, Laplace transform.
///
/// With a Padé continuation the approximant is built for the derivative `φ′`
/// of the Borel transform `φ`, and the sum is evaluated in the integrated-by-
/// parts form `φ(0) + ∫ φ′(u) e^{−(u/z)ᵐ} du`, which equals `𝓛ₘ φ`.
pub fn borel_sum(
    a: &FormalPowerSeries,
    s: f64,
    plan: &BorelSumPlan,
    z: Complex64,
) -> Result<BorelSum> {
    check_order(s)?;
    let m = 1.0 / (s - 1.0);
    if (plan.m - m).abs() > 1e-12 * m {
        return Err(Error::InvalidArgument(format!(
            "plan index m = {} does not match 1/(s-1) = {m}",
            plan.m
        )));
    }
    let borel = formal_borel(a, m)?;

    match &plan.continuation {
        Continuation::ClosedForm(f) => {
            let growth = fit_exponential_growth(&|u| f(u), plan.eta, m, &default_growth_samples())?;
            let q = laplace_with_error(&|u| f(u), plan, z)?;
            Ok(BorelSum {
                value: q.value,
                est_error: q.abs_error,
                domain_ok: true,
                growth,
                poles: Vec::new(),
                pade: None,
                warnings: Vec::new(),
            })
        }
        Continuation::Pade(degrees) => {
            let derivative = borel.derive();
            let available = derivative.truncation_order() + 1;
            let (num, den) = degrees.unwrap_or(((available - 1) / 2, (available - 1) / 2));
            if num + den + 1 > available {
                return Err(Error::InvalidArgument(format!(
                    "Padé degrees ({num}, {den}) need {} coefficients of the Borel derivative, only {available} available",
                    num + den + 1
                )));
            }
            let pade = pade_continuation(&derivative, num, den)?;
            let mut warnings = Vec::new();
            for p in pade.poles_near_ray(plan.eta, POLE_WARNING_DISTANCE) {
                warnings.push(format!(
                    "Padé pole {:.6}{:+.6}i lies within {POLE_WARNING_DISTANCE} of the ray",
                    p.re, p.im
                ));
            }

            let kernel = RayKernel::new(plan, z)?;
            let eval = |u: Complex64| pade.eval(u);
            let growth = fit_exponential_growth(&eval, plan.eta, m, &default_growth_samples())?;
            ensure_domain(plan, z, &growth)?;
            let dir = kernel.dir;
            let integrand = |t: f64| {
                let d = kernel.decay(t);
                if d.norm() == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                pade.eval(dir * t) * d * dir
            };
            let q = integrate_half_line(&integrand, kernel.scale(), plan.quad_rel_tol)?;
            Ok(BorelSum {
                value: borel.coeffs()[0] + q.value,
                est_error: q.abs_error,
                domain_ok: true,
                growth,
                poles: pade.poles.clone(),
                pade: Some(pade),
                warnings,
            })
        }
    }
}
