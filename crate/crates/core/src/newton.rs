//! Newton polygon of a linear differential operator at the origin.
//!
//! Each nonzero coefficient `cⱼ` with vanishing order `oⱼ` contributes the
//! base point `(j, oⱼ − j)`. The polygon is the convex hull of the quadrants
//! `{x ≤ j, y ≥ oⱼ − j}`; only its lower-right boundary chain carries
//! information, and the positive slopes `k` of that chain give the candidate
//! Gevrey orders `1 + 1/k` of formal solutions.

use std::fmt::Write as _;

use num_rational::Ratio;
use serde::Serialize;

use crate::operator::LinearOperator;
use crate::series::FormalPowerSeries;
use crate::{Error, Result};

/// Exact slope of a polygon edge.
pub type Slope = Ratio<i64>;

/// Relative tolerance below which a coefficient counts as zero.
pub const ZERO_TOLERANCE: f64 = 1e-12;

/// Index of the first coefficient whose modulus exceeds `1e-12 × max |aₖ|`,
/// or `None` if the series is identically zero.
pub fn vanishing_order(c: &FormalPowerSeries) -> Option<usize> {
    let max = c.max_abs();
    if max == 0.0 {
        return None;
    }
    let tol = ZERO_TOLERANCE * max;
    c.coeffs().iter().position(|a| a.norm() > tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonPolygon {
    /// `(j, oⱼ − j)` for each nonzero coefficient, ordered by `j`.
    pub base_points: Vec<(usize, i64)>,
    /// Vertices of the lower-right chain, left to right.
    pub vertices: Vec<(usize, i64)>,
    /// Positive slopes of the chain, strictly increasing.
    pub finite_slopes: Vec<Slope>,
    /// The vertical edge above the rightmost vertex (slope ∞). Always present.
    pub has_vertical_ray: bool,
}

pub fn newton_polygon(op: &LinearOperator) -> Result<NewtonPolygon> {
    let base_points: Vec<(usize, i64)> = op
        .terms()
        .filter_map(|(j, c)| vanishing_order(c).map(|o| (j, o as i64 - j as i64)))
        .collect();
    if base_points.is_empty() {
        return Err(Error::ZeroOperator);
    }
    Ok(polygon_from_points(base_points))
}

pub(crate) fn polygon_from_points(mut base_points: Vec<(usize, i64)>) -> NewtonPolygon {
    base_points.sort_unstable();
    base_points.dedup();

    // A point is dominated when another sits weakly to its right and weakly below.
    let survivors: Vec<(usize, i64)> = base_points
        .iter()
        .copied()
        .filter(|&(j, h)| {
            !base_points
                .iter()
                .any(|&(j2, h2)| j2 >= j && h2 <= h && (j2, h2) != (j, h))
        })
        .collect();

    // Lower convex chain (monotone chain) over survivors sorted by j.
    let mut chain: Vec<(usize, i64)> = Vec::with_capacity(survivors.len());
    for p in survivors {
        while chain.len() >= 2 {
            let a = chain[chain.len() - 2];
            let b = chain[chain.len() - 1];
            if cross(a, b, p) <= 0 {
                chain.pop();
            } else {
                break;
            }
        }
        chain.push(p);
    }

    let finite_slopes = chain
        .windows(2)
        .map(|w| Slope::new(w[1].1 - w[0].1, w[1].0 as i64 - w[0].0 as i64))
        .collect();

    NewtonPolygon {
        base_points,
        vertices: chain,
        finite_slopes,
        has_vertical_ray: true,
    }
}

fn cross(o: (usize, i64), a: (usize, i64), b: (usize, i64)) -> i64 {
    let (ox, oy) = (o.0 as i64, o.1);
    (a.0 as i64 - ox) * (b.1 - oy) - (a.1 - oy) * (b.0 as i64 - ox)
}

/// `{1 + 1/k : k ∈ finite_slopes} ∪ {1}`, ascending. The `1` comes from the
/// vertical edge.
pub fn gevrey_candidates(poly: &NewtonPolygon) -> Vec<f64> {
    let mut out: Vec<f64> = poly
        .finite_slopes
        .iter()
        .map(|k| 1.0 + *k.denom() as f64 / *k.numer() as f64)
        .collect();
    out.push(1.0);
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Slopes are always written as `p/q`, including integers (`"1/1"`).
pub fn slope_string(k: &Slope) -> String {
    format!("{}/{}", k.numer(), k.denom())
}

/// JSON view of a polygon.
#[derive(Debug, Clone, Serialize)]
pub struct PolygonExport {
    pub base_points: Vec<(usize, i64)>,
    pub vertices: Vec<(usize, i64)>,
    pub finite_slopes: Vec<String>,
    pub gevrey_candidates: Vec<f64>,
}

impl NewtonPolygon {
    pub fn export(&self) -> PolygonExport {
        PolygonExport {
            base_points: self.base_points.clone(),
            vertices: self.vertices.clone(),
            finite_slopes: self.finite_slopes.iter().map(slope_string).collect(),
            gevrey_candidates: gevrey_candidates(self),
        }
    }

    /// Vertices as `j,h` lines with a header, for plotting.
    pub fn vertices_csv(&self) -> String {
        let mut out = String::from("j,h\n");
        for (j, h) in &self.vertices {
            let _ = writeln!(out, "{j},{h}");
        }
        out
    }
}
