//! Curvature of the single-probe success curve.
//!
//! With `y = c·x` the stationarity condition becomes the monic cubic
//! `y³ − 2y² + (1−P_I)y + P_I c² = 0`, which defines `y(P_I)` implicitly on
//! the `q > 0` branch. Differentiating it twice gives closed forms for `y′`
//! and `y″`, and from those the second derivative of `P_S` along the curve.
//! On the `q = 0` arc the second derivative is explicit and negative.
//!
//! Each analytic value is checked here against a central second difference
//! of the corresponding `P_S` branch.

use serde::{Deserialize, Serialize};

use crate::cubic::Cubic;
use crate::strategies::{boundary_pib, concave_branch, single_pure_curve, single_qubit_max_inconclusive};
use crate::{Error, Result, EXACT_TOL};

/// Default stencil for second differences.
pub const DEFAULT_H2: f64 = 1e-4;
/// Default stencil for first differences.
pub const DEFAULT_H1: f64 = 1e-5;
/// Margin kept away from `P_I = 0`, `P_IB` and the unambiguous end point.
pub const BOUNDARY_MARGIN: f64 = 1e-3;

/// Everything that enters the analytic second derivative on the convex branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeBundle {
    pub y: f64,
    pub y_prime: f64,
    pub y_double_prime: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub d2ps_dpi2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `q > 0`, `P_I < P_IB`.
    Convex,
    /// `q = 0`, `P_I ≥ P_IB`.
    Concave,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Convex => "convex",
            Branch::Concave => "concave",
        }
    }
}

pub fn y_cubic(c: f64, p_inc: f64) -> Cubic {
    Cubic::new(1.0, -2.0, 1.0 - p_inc, p_inc * c * c)
}

fn theta_for(c: f64) -> f64 {
    0.5 * c.acos()
}

fn check_convex_domain(c: f64, p_inc: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::domain(format!("overlap c must lie in (0, 1), got {c}")));
    }
    let pib = boundary_pib(c)?;
    if !(0.0..pib).contains(&p_inc) {
        return Err(Error::domain(format!("p_inc = {p_inc} outside the convex branch [0, {pib})")));
    }
    Ok(pib)
}

/// Success along the convex branch written in `y`.
pub fn success_in_y(c: f64, y: f64, p_inc: f64) -> f64 {
    0.5 * (1.0 - p_inc) + (1.0 - c * c).sqrt() / (2.0 * c) * (c * c - y * y).max(0.0).sqrt() * (1.0 - p_inc / (1.0 - y))
}

/// Root of the `y`-cubic that maximizes the success probability.
///
/// Admissible roots satisfy `|y| ≤ c` and `q = 1 − 2P_I/(1−y) ≥ 0`; ties go
/// to the larger root.
pub fn y_root(c: f64, p_inc: f64) -> Result<f64> {
    check_convex_domain(c, p_inc)?;
    let mut best: Option<(f64, f64)> = None;
    for y in y_cubic(c, p_inc).real_roots() {
        if y.abs() > c + EXACT_TOL || 1.0 - y < 2.0 * p_inc {
            continue;
        }
        let ps = success_in_y(c, y, p_inc);
        match best {
            Some((by, bps)) if ps < bps - EXACT_TOL || ((ps - bps).abs() <= EXACT_TOL && y <= by) => {}
            _ => best = Some((y, ps)),
        }
    }
    best.map(|(y, _)| y)
        .ok_or_else(|| Error::domain(format!("no admissible root of the y-cubic at c = {c}, p_inc = {p_inc}")))
}

/// `dy/dP_I` and `d²y/dP_I²` by implicit differentiation of the `y`-cubic.
pub fn y_derivatives(c: f64, y: f64, p_inc: f64) -> Result<(f64, f64)> {
    let denom = 3.0 * y * y - 4.0 * y + 1.0 - p_inc;
    if denom.abs() <= 1e-10 {
        return Err(Error::Singularity {
            what: format!("implicit derivative of y at c = {c}, p_inc = {p_inc} (3y^2 - 4y + 1 - p_inc)"),
            denominator: denom,
        });
    }
    let y1 = (y - c * c) / denom;
    let y2 = 2.0 * (y1 + y1 * y1 * (2.0 - 3.0 * y)) / denom;
    Ok((y1, y2))
}

/// `d²P_S/dP_I²` on the convex branch, with all intermediate quantities.
pub fn second_derivative(c: f64, p_inc: f64) -> Result<DerivativeBundle> {
    check_convex_domain(c, p_inc)?;
    let y = y_root(c, p_inc)?;
    let (y1, y2) = y_derivatives(c, y, p_inc)?;
    let c2 = c * c;
    let root = (c2 - y * y).sqrt();
    let one_minus_y = 1.0 - y;
    let alpha = 2.0 * (y - c2) / (root * one_minus_y.powi(2));
    let beta = (p_inc * (3.0 * c2 * y * y + c2 - 2.0 * c2 * c2 - 2.0 * y.powi(3)) - c2 * one_minus_y.powi(3))
        / (root.powi(3) * one_minus_y.powi(3));
    let gamma = (y - c2) * p_inc / (root * one_minus_y.powi(2)) - y / root;
    let d2 = (1.0 - c2).sqrt() / (2.0 * c) * (alpha * y1 + beta * y1 * y1 + gamma * y2);
    Ok(DerivativeBundle { y, y_prime: y1, y_double_prime: y2, alpha, beta, gamma, d2ps_dpi2: d2 })
}

/// `d²P_S/dP_I² = −c√(1−c²)·[c² − (1−2P_I)²]^(−3/2)` on the `q = 0` arc.
pub fn concave_second_derivative(c: f64, p_inc: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::domain(format!("overlap c outside [0, 1]: {c}")));
    }
    let bracket = c * c - (1.0 - 2.0 * p_inc).powi(2);
    if bracket <= 0.0 {
        return Err(Error::domain(format!(
            "c^2 - (1 - 2 p_inc)^2 = {bracket:.3e} is not positive at c = {c}, p_inc = {p_inc}"
        )));
    }
    Ok(-c * (1.0 - c * c).sqrt() * bracket.powf(-1.5))
}

/// Analytic value against a central second difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteDifferenceCheck {
    pub branch: Branch,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_err: f64,
}

/// Which branch `p_inc` belongs to.
pub fn branch_of(c: f64, p_inc: f64) -> Result<Branch> {
    Ok(if p_inc < boundary_pib(c)? { Branch::Convex } else { Branch::Concave })
}

/// Compares the analytic second derivative at `(c, p_inc)` with the central
/// difference `[P_S(P+h) − 2P_S(P) + P_S(P−h)]/h²` of the branch's `P_S`.
pub fn finite_difference_check(c: f64, p_inc: f64, h: f64) -> Result<FiniteDifferenceCheck> {
    if !(h > 0.0) {
        return Err(Error::domain("finite-difference step must be positive"));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::domain(format!("overlap c must lie in (0, 1), got {c}")));
    }
    let pib = boundary_pib(c)?;
    let (lo, hi) = (p_inc - h, p_inc + h);
    if lo < pib && hi >= pib {
        return Err(Error::BranchCrossing { lo, hi, boundary: pib });
    }
    finite_difference_on_branch(c, p_inc, h, branch_of(c, p_inc)?)
}

/// Finite-difference check of one branch formula, without the boundary
/// guard. The convex branch still needs `P_I < P_IB`; the concave one needs
/// the whole stencil on the `q = 0` arc up to the end point `U`.
pub fn finite_difference_on_branch(c: f64, p_inc: f64, h: f64, branch: Branch) -> Result<FiniteDifferenceCheck> {
    if !(h > 0.0) {
        return Err(Error::domain("finite-difference step must be positive"));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::domain(format!("overlap c must lie in (0, 1), got {c}")));
    }
    let (lo, hi) = (p_inc - h, p_inc + h);
    let theta = theta_for(c);
    let (analytic, ps): (f64, Box<dyn Fn(f64) -> Result<f64>>) = match branch {
        Branch::Convex => (
            second_derivative(c, p_inc)?.d2ps_dpi2,
            Box::new(move |p| {
                if p < 0.0 {
                    return Err(Error::domain(format!("stencil leaves [0, P_IB): {p}")));
                }
                single_pure_curve(theta, p).map(|(pt, _)| pt.p_success)
            }),
        ),
        Branch::Concave => {
            let u_end = single_qubit_max_inconclusive(c);
            if hi > u_end {
                return Err(Error::domain(format!("stencil passes the unambiguous end point {u_end}")));
            }
            (concave_second_derivative(c, p_inc)?, Box::new(move |p| concave_branch(theta, p).map(|pt| pt.p_success)))
        }
    };
    let numeric = (ps(hi)? - 2.0 * ps(p_inc)? + ps(lo)?) / (h * h);
    let rel_err = (analytic - numeric).abs() / analytic.abs().max(1e-12);
    Ok(FiniteDifferenceCheck { branch, analytic, numeric, rel_err })
}
