//! Gevrey classification, formal solutions and Borel–Laplace summation of
//! divergent power series arising from linear complex ODEs.
//!
//! The crate is organised bottom-up:
//!
//! - [`series`]: truncated formal power series, the differential-algebra
//!   operations and Gevrey-order estimation.
//! - [`operator`] / [`newton`]: linear differential operators and their
//!   Newton polygon at the origin.
//! - [`solver`]: formal solutions by coefficient recurrence and the
//!   Euler-operator classification.
//! - [`borel`] / [`pade`] / [`quad`]: formal and numerical Borel and Laplace
//!   transforms of index `m`, analytic continuation and the summation pipeline.
//! - [`asymptotics`]: finite-sample checks of Gevrey asymptotic expansions
//!   and flat decay on sectors.
//!
//! Everything is a pure function over immutable values.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod borel;
mod error;
pub mod gamma;
pub mod newton;
pub mod operator;
pub mod pade;
pub mod quad;
pub mod roots;
pub mod series;
pub mod solver;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use asymptotics::{
    check_asymptotic_fit, check_flat_decay, derivative_bounds_check, AsymptoticFit,
    DerivativeBounds, FlatDecayFit, Sector,
};
pub use borel::{
    borel_sum, domain_check, fit_exponential_growth, formal_borel, formal_laplace, laplace_numeric,
    laplace_segment, radius_estimate, truncated_laplace_numeric, BorelSum, BorelSumPlan,
    Continuation, GrowthFit,
};
pub use newton::{gevrey_candidates, newton_polygon, vanishing_order, NewtonPolygon, Slope};
pub use operator::LinearOperator;
pub use pade::{pade_continuation, Pade};
pub use series::{estimate_gevrey_order, is_sharp_class, FormalPowerSeries, GevreyFit, SharpClass};
pub use solver::{
    euler_alpha, formal_solve, residual_check, EulerClassification, EulerVerdict, SolveResult,
};
