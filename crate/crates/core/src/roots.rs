//! Roots of complex polynomials (Aberth–Ehrlich iteration).

use num_complex::Complex64;

/// All roots of `Σ cₖ xᵏ` (coefficients in increasing degree). Trailing
/// zero coefficients are ignored; the zero polynomial has no roots.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let degree = match coeffs.iter().rposition(|c| c.norm() > 0.0) {
        Some(d) => d,
        None => return Vec::new(),
    };
    let p = &coeffs[..=degree];
    match degree {
        0 => return Vec::new(),
        1 => return vec![-p[0] / p[1]],
        _ => {}
    }

    // Initial guesses on a circle at the geometric mean of the root moduli,
    // rotated off the axes.
    let lead = p[degree];
    let trailing = p.iter().position(|c| c.norm() > 0.0).unwrap_or(0);
    let radius = if trailing > 0 {
        1.0
    } else {
        (p[0] / lead)
            .norm()
            .powf(1.0 / degree as f64)
            .clamp(1e-12, 1e12)
    };
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / degree as f64 + 0.4;
            Complex64::from_polar(radius, angle)
        })
        .collect();

    for _ in 0..500 {
        let mut converged = true;
        for i in 0..degree {
            let (value, deriv) = eval_with_derivative(p, z[i]);
            if value.norm() == 0.0 {
                continue;
            }
            let ratio = value / deriv;
            let repulsion: Complex64 = (0..degree)
                .filter(|&j| j != i)
                .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.norm() > 1e-15 * z[i].norm().max(1e-300) {
                converged = false;
            }
            z[i] -= step;
        }
        if converged {
            break;
        }
    }
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    z
}

fn eval_with_derivative(p: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut deriv = Complex64::new(0.0, 0.0);
    for &c in p.iter().rev() {
        deriv = deriv * x + value;
        value = value * x + c;
    }
    (value, deriv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn linear_and_quadratic() {
        assert_eq!(
            polynomial_roots(&[c(1.0, 0.0), c(1.0, 0.0)]),
            vec![c(-1.0, 0.0)]
        );
        let r = polynomial_roots(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(r.len(), 2);
        assert!((r[0] - c(0.0, -1.0)).norm() < 1e-14 || (r[0] - c(0.0, 1.0)).norm() < 1e-14);
        assert!((r[0] * r[1] - c(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn recovers_prescribed_roots() {
        let roots = [
            c(-1.0, 0.0),
            c(2.0, 0.5),
            c(0.3, -0.7),
            c(-4.0, 1.0),
            c(0.0, 3.0),
        ];
        let mut p = vec![c(1.0, 0.0)];
        for r in roots {
            let mut next = vec![c(0.0, 0.0); p.len() + 1];
            for (k, &a) in p.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            p = next;
        }
        let found = polynomial_roots(&p);
        for r in roots {
            let best = found
                .iter()
                .map(|f| (f - r).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-10, "{r}: {best:e}");
        }
    }
}
