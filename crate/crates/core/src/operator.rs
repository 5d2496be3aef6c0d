use num_complex::Complex64;

use crate::newton::vanishing_order;
use crate::series::FormalPowerSeries;
use crate::{Error, Result};

/// Linear differential operator `P = Σⱼ cⱼ(z) ∂ʲ`, `j = 0..=n`.
///
/// Absent coefficients (and coefficients that vanish to within the
/// zero-tolerance) are stored as `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    coeffs: Vec<Option<FormalPowerSeries>>,
}

impl LinearOperator {
    /// Builds an operator from coefficients indexed by the derivative order.
    ///
    /// The highest present coefficient fixes the order `n`, which must be at
    /// least one.
    pub fn new(coeffs: Vec<Option<FormalPowerSeries>>) -> Result<Self> {
        let mut coeffs: Vec<Option<FormalPowerSeries>> = coeffs
            .into_iter()
            .map(|c| c.filter(|s| vanishing_order(s).is_some()))
            .collect();
        while matches!(coeffs.last(), Some(None)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(Error::ZeroOperator);
        }
        if coeffs.len() < 2 {
            return Err(Error::InvalidOperator(
                "operator must contain a derivative (order n >= 1)".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    /// Operator with polynomial coefficients given as coefficient lists
    /// (`coeffs[j][l]` is the coefficient of `zˡ ∂ʲ`).
    pub fn from_polynomials(coeffs: Vec<Vec<Complex64>>) -> Result<Self> {
        let series = coeffs
            .into_iter()
            .map(|p| {
                if p.is_empty() {
                    Ok(None)
                } else {
                    FormalPowerSeries::polynomial(p).map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(series)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, j: usize) -> Option<&FormalPowerSeries> {
        self.coeffs.get(j).and_then(Option::as_ref)
    }

    /// Present coefficients as `(j, cⱼ)`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &FormalPowerSeries)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter_map(|(j, c)| c.as_ref().map(|c| (j, c)))
    }

    /// True when every coefficient is a polynomial.
    pub fn is_polynomial(&self) -> bool {
        self.terms().all(|(_, c)| c.is_polynomial())
    }

    /// Replaces (or inserts) the coefficient of `∂ʲ`.
    pub fn with_coefficient(&self, j: usize, c: Option<FormalPowerSeries>) -> Result<Self> {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() <= j {
            coeffs.resize(j + 1, None);
        }
        coeffs[j] = c;
        Self::new(coeffs)
    }

    /// `P u` by series arithmetic.
    pub fn apply(&self, u: &FormalPowerSeries) -> FormalPowerSeries {
        let mut derivative = u.clone();
        let mut acc: Option<FormalPowerSeries> = None;
        for (j, c) in self.coeffs.iter().enumerate() {
            if j > 0 {
                derivative = derivative.derive();
            }
            if let Some(c) = c {
                let term = c.mul(&derivative);
                acc = Some(match acc {
                    Some(a) => a.add(&term),
                    None => term,
                });
            }
        }
        acc.expect("operator has a leading coefficient")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[f64]) -> Option<FormalPowerSeries> {
        Some(FormalPowerSeries::polynomial_from_real(c).unwrap())
    }

    #[test]
    fn order_and_trailing_zero_terms() {
        let op =
            LinearOperator::new(vec![poly(&[1.0]), poly(&[0.0, 0.0, 1.0]), poly(&[0.0])]).unwrap();
        assert_eq!(op.order(), 1);
    }

    #[test]
    fn rejects_zero_and_order_zero() {
        assert_eq!(
            LinearOperator::new(vec![poly(&[0.0]), None]),
            Err(Error::ZeroOperator)
        );
        assert!(matches!(
            LinearOperator::new(vec![poly(&[1.0])]),
            Err(Error::InvalidOperator(_))
        ));
    }

    #[test]
    fn apply_euler_operator_to_z() {
        let op = LinearOperator::new(vec![poly(&[1.0]), poly(&[0.0, 0.0, 1.0])]).unwrap();
        let z = FormalPowerSeries::polynomial_from_real(&[0.0, 1.0]).unwrap();
        let out = op.apply(&z);
        assert_eq!(
            out.coeffs(),
            FormalPowerSeries::polynomial_from_real(&[0.0, 1.0, 1.0])
                .unwrap()
                .coeffs()
        );
    }
}
