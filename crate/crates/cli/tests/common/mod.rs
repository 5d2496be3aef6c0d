//! Oracles and generators shared by the integration targets.
#![allow(dead_code)]

use std::collections::BTreeSet;

use gevrey_cli::Outcome;
use gevrey_core::{Complex64, FormalPowerSeries, Slope};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|j| j as f64).product()
}

/// Formal solution of `z²u' + u = z`: `aₖ = (−1)^{k−1}(k−1)!`, `a₀ = 0`.
pub fn euler_series(order: usize) -> FormalPowerSeries {
    FormalPowerSeries::from_fn(order, |k| {
        if k == 0 {
            c(0.0)
        } else {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            c(sign * factorial(k - 1))
        }
    })
    .unwrap()
}

/// `E₁(x) = −γ − ln x − Σ_{k≥1} (−x)ᵏ/(k·k!)`, for moderate `|x|`.
pub fn exp_integral_e1(x: Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for k in 1..80 {
        term *= -x / k as f64;
        sum += term / k as f64;
    }
    -EULER_GAMMA - x.ln() - sum
}

/// `∫₀^∞ e^{−t} h(t) dt` by composite Simpson on `[0, 50]`.
pub fn simpson_laplace(h: impl Fn(f64) -> Complex64) -> Complex64 {
    let (len, n) = (50.0, 200_000);
    let step = len / n as f64;
    let f = |t: f64| h(t) * (-t).exp();
    let mut acc = f(0.0) + f(len);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(i as f64 * step) * w;
    }
    acc * (step / 3.0)
}

/// Random operator text exercising the grammar: complex literals, implicit
/// and explicit products, parentheses and non-normal-ordered `D*z` terms.
pub fn random_operator_text(rng: &mut ChaCha8Rng) -> String {
    // distinct D powers keep the top-order coefficient from cancelling
    let mut powers = vec![0, 1, 2, 3];
    powers.shuffle(rng);
    powers.truncate(rng.gen_range(1..=4));
    let mut text = String::new();
    for (t, &d) in powers.iter().enumerate() {
        let coeff = random_coeff(rng);
        let term = match (d, rng.gen_range(0..3)) {
            (0, _) => coeff,
            (1, 0) => format!("{coeff}*D"),
            (_, 0) => format!("{coeff}*D^{d}"),
            (_, 1) => format!("({coeff}) D^{d}"),
            // D to the left of a polynomial: expands by the product rule
            _ => format!("D^{d}*({coeff})"),
        };
        if t > 0 {
            text.push_str(if rng.gen_bool(0.5) { " + " } else { " - " });
        }
        text.push_str(&term);
    }
    if powers == [0] {
        text.push_str(" + D");
    }
    text
}

fn random_coeff(rng: &mut ChaCha8Rng) -> String {
    let k = rng.gen_range(0..=4);
    let re = (rng.gen_range(-40..=40) as f64) / 8.0;
    let im = (rng.gen_range(-40..=40) as f64) / 8.0;
    let scalar = match rng.gen_range(0..3) {
        // signs only come from the separators outside parentheses
        0 => format!("{}", re.abs()),
        1 if im < 0.0 => format!("({re}-{}*i)", -im),
        1 => format!("({re}+{im}*i)"),
        _ => "i".to_string(),
    };
    match k {
        0 => scalar,
        1 => format!("{scalar}*z"),
        _ => format!("{scalar}*z^{k} + z"),
    }
}

/// Runs the CLI in process and parses whichever stream carries the JSON.
pub fn run_json(args: &[&str]) -> (i32, Value) {
    let out: Outcome =
        gevrey_cli::run_with_env(std::iter::once("gevrey").chain(args.iter().copied()), None);
    let text = if out.code == 0 {
        &out.stdout
    } else {
        &out.stderr
    };
    let v = serde_json::from_str(text)
        .unwrap_or_else(|e| panic!("{args:?}: invalid JSON ({e}):\n{text}"));
    (out.code, v)
}

pub fn complex_of(v: &Value) -> Complex64 {
    Complex64::new(v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

/// Slopes of the hull of the union of quadrants `{x ≤ j, y ≥ oⱼ − j}`,
/// rasterized on the integer points of a bounding box. Box edges are
/// horizontal or vertical, so the positive finite slopes of the hull are
/// exactly the polygon's.
pub fn raster_slopes(orders: &[Option<usize>]) -> BTreeSet<Slope> {
    let base: Vec<(i64, i64)> = orders
        .iter()
        .enumerate()
        .filter_map(|(j, o)| o.map(|o| (j as i64, o as i64 - j as i64)))
        .collect();
    let mut pts = Vec::new();
    for x in -3..=5 {
        for y in -6..=12 {
            if base.iter().any(|&(j, h)| x <= j && y >= h) {
                pts.push((x, y));
            }
        }
    }
    let hull = convex_hull(pts);
    let mut slopes = BTreeSet::new();
    for i in 0..hull.len() {
        let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        if dx != 0 && dy != 0 && (dy > 0) == (dx > 0) {
            slopes.insert(Slope::new(dy.abs(), dx.abs()));
        }
    }
    slopes
}

fn convex_hull(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort_unstable();
    pts.dedup();
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let chain = |iter: &mut dyn Iterator<Item = &(i64, i64)>| {
        let mut h: Vec<(i64, i64)> = Vec::new();
        for &p in iter {
            while h.len() >= 2 && cross(h[h.len() - 2], h[h.len() - 1], p) <= 0 {
                h.pop();
            }
            h.push(p);
        }
        h.pop();
        h
    };
    let mut lower = chain(&mut pts.iter());
    lower.extend(chain(&mut pts.iter().rev()));
    lower
}

/// Vanishing orders of a random operator of order `n ≤ 4` with `oⱼ ≤ 5`.
pub fn random_orders(rng: &mut ChaCha8Rng) -> Vec<Option<usize>> {
    let n = rng.gen_range(1..=4);
    (0..=n)
        .map(|j| {
            if j == n || rng.gen_bool(0.75) {
                Some(rng.gen_range(0..=5))
            } else {
                None
            }
        })
        .collect()
}

/// Coefficient polynomials realizing the given vanishing orders.
pub fn polynomials_with_orders(
    orders: &[Option<usize>],
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<Complex64>> {
    orders
        .iter()
        .map(|o| match o {
            None => Vec::new(),
            Some(o) => {
                let mut p = vec![c(0.0); o + 3];
                p[*o] = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(-3.0..3.0));
                p[o + 1] = Complex64::new(rng.gen_range(-2.0..2.0), 0.0);
                p[o + 2] = Complex64::new(0.0, rng.gen_range(-2.0..2.0));
                p
            }
        })
        .collect()
}
