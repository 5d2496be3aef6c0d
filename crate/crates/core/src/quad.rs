//! Adaptive Gauss–Legendre quadrature of complex-valued integrands on real
//! intervals and half-lines.
//!
//! Every panel is integrated with a fixed 20-point rule, and its error is
//! estimated against the sum over its two halves. The panel with the largest
//! error is bisected until the global target is met. Panel sums are always
//! combined in left-to-right order, so results are bit-reproducible.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::{Error, Result};

const ORDER: usize = 20;
const MAX_PANELS: usize = 4000;
/// Cap on the number of interval doublings along a half-line.
pub const MAX_DOUBLINGS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    /// Estimated absolute error.
    pub abs_error: f64,
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            deriv = dp;
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, dp) = legendre(n, x);
                deriv = dp;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn fixed_rule(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64) -> Complex64 {
    let (nodes, weights) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(weights)
        .map(|(&x, &w)| f(mid + half * x) * w)
        .sum::<Complex64>()
        * half
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    left: Complex64,
    right: Complex64,
    error: f64,
}

impl Panel {
    fn new(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, whole: Complex64) -> Self {
        let mid = 0.5 * (a + b);
        let left = fixed_rule(f, a, mid);
        let right = fixed_rule(f, mid, b);
        let mut error = (whole - left - right).norm();
        if !error.is_finite() {
            error = f64::INFINITY;
        }
        Self {
            a,
            b,
            left,
            right,
            error,
        }
    }

    fn value(&self) -> Complex64 {
        self.left + self.right
    }
}

/// `∫ₐᵇ f(t) dt` to `max(rel_tol·|I|, abs_tol)`.
pub fn integrate(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature {
            value: Complex64::new(0.0, 0.0),
            abs_error: 0.0,
        });
    }
    let whole = fixed_rule(f, a, b);
    let mut panels = vec![Panel::new(f, a, b, whole)];
    loop {
        let value: Complex64 = panels.iter().map(Panel::value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let target = (rel_tol * value.norm()).max(abs_tol);
        if error <= target && value.re.is_finite() && value.im.is_finite() {
            return Ok(Quadrature {
                value,
                abs_error: error,
            });
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::QuadratureFailed {
                achieved: error / value.norm().max(f64::MIN_POSITIVE),
                target: rel_tol,
            });
        }
        // worst panel; ties resolve to the leftmost
        let worst = panels.iter().enumerate().fold(0, |best, (i, p)| {
            if p.error > panels[best].error {
                i
            } else {
                best
            }
        });
        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            return Err(Error::QuadratureFailed {
                achieved: error / value.norm().max(f64::MIN_POSITIVE),
                target: rel_tol,
            });
        }
        let left = Panel::new(f, p.a, mid, p.left);
        let right = Panel::new(f, mid, p.b, p.right);
        panels[worst] = left;
        panels.insert(worst + 1, right);
    }
}

/// `∫₀^∞ f(t) dt` over `[0, scale]` and then doubling intervals
/// `[T, 2T]`, stopping once two consecutive intervals each contribute less than
/// `rel_tol` times the running total.
pub fn integrate_half_line(
    f: &dyn Fn(f64) -> Complex64,
    scale: f64,
    rel_tol: f64,
) -> Result<Quadrature> {
    let mut total = integrate(f, 0.0, scale, rel_tol, 0.0)?;
    let mut t = scale;
    let mut quiet = 0;
    for _ in 0..MAX_DOUBLINGS {
        let segment = integrate(f, t, 2.0 * t, rel_tol, 0.1 * rel_tol * total.value.norm())?;
        total.value += segment.value;
        total.abs_error += segment.abs_error;
        t *= 2.0;
        if segment.value.norm() < rel_tol * total.value.norm() {
            quiet += 1;
            if quiet >= 2 {
                total.abs_error += segment.value.norm();
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::QuadratureFailed {
        achieved: total.abs_error / total.value.norm().max(f64::MIN_POSITIVE),
        target: rel_tol,
    })
}
