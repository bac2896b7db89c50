//! Optimal success probabilities at a fixed inconclusive rate.
//!
//! Two families are covered. The entanglement-assisted scheme sends half of
//! a singlet through the unknown measurement, undoes the outcome-dependent
//! `σ_Y` on the partner qubit and then discriminates `|φ⟩` from `|ψ⟩` with a
//! filter and a `|±⟩` readout. The single-qubit scheme measures one probe
//! `|ϑ⟩`, guesses `M` on outcome 0 and, on outcome 1, guesses `N` with
//! probability `q` or declares an inconclusive result. Its pure-probe curve
//! is convex below `P_IB`, so the true optimum is the convex hull: a mixture
//! of the minimum-error point `A` and the tangent point `T`, followed by the
//! concave `q = 0` arc up to the unambiguous endpoint `U`.
//!
//! Throughout, `c = cos 2θ` and `x = cos 2ϑ`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cubic::Cubic;
use crate::geometry::{check_probability, check_theta, overlap_for_theta, MeasurementPair, PureQubitState};
use crate::hull::UpperHull;
use crate::{rng, Error, Result, EXACT_TOL};

/// Below this overlap the single-probe formulas switch to their `c → 0` limits.
const C_ZERO: f64 = 1e-12;

/// Outcome statistics of a discrimination strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyPoint {
    pub p_success: f64,
    pub p_error: f64,
    pub p_inconclusive: f64,
}

impl StrategyPoint {
    /// Completes `(P_S, P_I)` with `P_E = 1 − P_S − P_I`. Rounding residue
    /// below 1e-12 in `P_E` is flushed to zero.
    pub fn from_success(p_success: f64, p_inconclusive: f64) -> Self {
        let mut p_error = 1.0 - p_success - p_inconclusive;
        if p_error.abs() < EXACT_TOL {
            p_error = 0.0;
        }
        Self { p_success, p_error, p_inconclusive }
    }

    pub fn sum(&self) -> f64 {
        self.p_success + self.p_error + self.p_inconclusive
    }

    /// Success rate among conclusive outcomes, `P_S / (1 − P_I)`.
    pub fn relative_success(&self) -> Result<f64> {
        relative_success(self)
    }
}

pub fn relative_success(point: &StrategyPoint) -> Result<f64> {
    let conclusive = 1.0 - point.p_inconclusive;
    if conclusive <= 0.0 {
        return Err(Error::domain("relative success undefined when every outcome is inconclusive"));
    }
    Ok(point.p_success / conclusive)
}

/// A single probe `|ϑ⟩` with post-processing probability `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureStrategy {
    /// `ϑ ∈ [0, π/2]`.
    pub probe_angle: f64,
    /// `cos 2ϑ`.
    pub x: f64,
    /// Probability of a conclusive `N` guess after outcome 1.
    pub q: f64,
}

impl PureStrategy {
    pub fn from_x(x: f64, q: f64) -> Self {
        let x = x.clamp(-1.0, 1.0);
        Self { probe_angle: 0.5 * x.acos(), x, q }
    }

    pub fn from_angle(probe_angle: f64, q: f64) -> Self {
        Self { probe_angle, x: (2.0 * probe_angle).cos(), q }
    }
}

/// How a single-qubit optimum is realized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SingleQubitStrategy {
    Pure(PureStrategy),
    /// Two pure strategies used with the given weights (summing to one).
    Mixture([(f64, PureStrategy); 2]),
}

impl SingleQubitStrategy {
    pub fn weights(&self) -> Vec<f64> {
        match self {
            Self::Pure(_) => vec![1.0],
            Self::Mixture(parts) => parts.iter().map(|(w, _)| *w).collect(),
        }
    }
}

impl fmt::Display for SingleQubitStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Pure(s) => write!(f, "pure(x={:.6},q={:.6})", s.x, s.q),
            Self::Mixture([(wa, a), (wb, b)]) => {
                write!(f, "mix({:.6}*[x={:.6},q={:.6}]+{:.6}*[x={:.6},q={:.6}])", wa, a.x, a.q, wb, b.x, b.q)
            }
        }
    }
}

fn sin_2theta(theta: f64) -> f64 {
    (2.0 * theta).sin()
}

/// Entanglement-assisted optimum
/// `P_S = ½(1 − P_I + sin 2θ·√(1 − P_I/cos²θ))` for `P_I ∈ [0, cos 2θ]`.
pub fn entangled_success(theta: f64, p_inc: f64) -> Result<StrategyPoint> {
    check_theta(theta)?;
    // cos 2θ evaluates to −1e-16 at θ = π/4
    let p_inc = if (-EXACT_TOL..0.0).contains(&p_inc) { 0.0 } else { p_inc };
    check_probability(p_inc, "inconclusive rate")?;
    let c = overlap_for_theta(theta);
    if p_inc > c + EXACT_TOL {
        return Err(Error::domain(format!("inconclusive rate {p_inc} exceeds the IDP point cos 2theta = {c}")));
    }
    let root = (1.0 - p_inc / theta.cos().powi(2)).max(0.0).sqrt();
    let p_success = 0.5 * (1.0 - p_inc + sin_2theta(theta) * root);
    Ok(StrategyPoint::from_success(p_success, p_inc))
}

/// Minimum-error point: `P_I = 0`, `P_S = (1 + sin 2θ)/2`.
pub fn helstrom_point(theta: f64) -> Result<StrategyPoint> {
    check_theta(theta)?;
    Ok(StrategyPoint::from_success(0.5 * (1.0 + sin_2theta(theta)), 0.0))
}

/// Success and inconclusive rates of probe `ϑ` with post-processing `q`,
/// directly from the probe angle.
pub fn pure_strategy_point(theta: f64, probe_angle: f64, q: f64) -> StrategyPoint {
    let c = (2.0 * theta).cos();
    let x = (2.0 * probe_angle).cos();
    let p_success =
        0.5 * (1.0 + sin_2theta(theta) * (2.0 * probe_angle).sin() - (1.0 - q) * (theta + probe_angle).sin().powi(2));
    let p_inc = 0.5 * (1.0 - q) * (1.0 - c * x);
    StrategyPoint::from_success(p_success, p_inc)
}

/// `P_S` along the pure-probe family with `q` eliminated in favour of `P_I`.
pub fn success_at_x(c: f64, x: f64, p_inc: f64) -> f64 {
    0.5 * (1.0 - p_inc) + 0.5 * ((1.0 - c * c) * (1.0 - x * x)).max(0.0).sqrt() * (1.0 - p_inc / (1.0 - x * c))
}

/// Stationarity condition `c²x³ − 2cx² + (1−P_I)x + P_I c = 0`.
pub fn stationarity_cubic(c: f64, p_inc: f64) -> Cubic {
    Cubic::new(c * c, -2.0 * c, 1.0 - p_inc, p_inc * c)
}

/// End of the `q > 0` regime: `P_IB = (3 + √(1 + 8c²))/8`.
pub fn boundary_pib(c: f64) -> Result<f64> {
    check_overlap(c)?;
    Ok((3.0 + (1.0 + 8.0 * c * c).sqrt()) / 8.0)
}

/// Abscissa of the tangent from `A` to the concave arc:
/// `P_IT = (1 + 3c² + 2c²√(1 + 3c²)) / (2(1 + 4c²))`.
pub fn tangent_pit(c: f64) -> Result<f64> {
    check_overlap(c)?;
    if c <= 0.0 {
        return Err(Error::domain("tangent point undefined for c = 0 (orthogonal bases)"));
    }
    let c2 = c * c;
    let pit = (1.0 + 3.0 * c2 + 2.0 * c2 * (1.0 + 3.0 * c2).sqrt()) / (2.0 * (1.0 + 4.0 * c2));
    debug_assert!(pit >= boundary_pib(c)? - EXACT_TOL);
    Ok(pit)
}

fn check_overlap(c: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::domain(format!("overlap c outside [0, 1]: {c}")));
    }
    Ok(())
}

/// Largest inconclusive rate reachable with one probe, `(1 + c²)/2`.
pub fn single_qubit_max_inconclusive(c: f64) -> f64 {
    0.5 * (1.0 + c * c)
}

fn check_single_domain(theta: f64, p_inc: f64) -> Result<f64> {
    check_theta(theta)?;
    check_probability(p_inc, "inconclusive rate")?;
    let c = overlap_for_theta(theta);
    let max = single_qubit_max_inconclusive(c);
    if p_inc > max + EXACT_TOL {
        return Err(Error::domain(format!(
            "inconclusive rate {p_inc} exceeds the single-probe unambiguous point {max}"
        )));
    }
    Ok(c)
}

/// `q = 0` arc:
/// `P_S = ½(1−P_I) + ¼ sin 2θ·√(1 − (1−2P_I)²/cos²2θ)`, valid for `|1−2P_I| ≤ c`.
pub fn concave_branch(theta: f64, p_inc: f64) -> Result<StrategyPoint> {
    check_theta(theta)?;
    check_probability(p_inc, "inconclusive rate")?;
    let c = overlap_for_theta(theta);
    let u = 1.0 - 2.0 * p_inc;
    if u.abs() > c + EXACT_TOL {
        return Err(Error::domain(format!("|1 - 2 p_inc| = {} exceeds c = {c}; q = 0 arc undefined", u.abs())));
    }
    let ratio = if c <= C_ZERO { 0.0 } else { (u / c).clamp(-1.0, 1.0) };
    let p_success = 0.5 * (1.0 - p_inc) + 0.25 * sin_2theta(theta) * (1.0 - ratio * ratio).sqrt();
    Ok(StrategyPoint::from_success(p_success, p_inc))
}

fn concave_strategy(c: f64, p_inc: f64) -> PureStrategy {
    let x = if c <= C_ZERO { 0.0 } else { (1.0 - 2.0 * p_inc) / c };
    PureStrategy::from_x(x, 0.0)
}

/// Best single pure probe at a fixed inconclusive rate (no mixing).
///
/// Below `P_IB` the probe comes from the stationarity cubic; among its real
/// roots in `[−1, 1]` with `q ≥ 0` the one with the largest `P_S` wins, ties
/// going to the larger `x`. From `P_IB` on, `q = 0` and `x = (1 − 2P_I)/c`.
pub fn single_pure_curve(theta: f64, p_inc: f64) -> Result<(StrategyPoint, SingleQubitStrategy)> {
    let c = check_single_domain(theta, p_inc)?;
    if c <= C_ZERO {
        // c → 0: P_S = ½(1 − P_I)(1 + √(1 − x²)) peaks at x = 0
        let q = (1.0 - 2.0 * p_inc).max(0.0);
        let point = StrategyPoint::from_success(1.0 - p_inc, p_inc);
        return Ok((point, SingleQubitStrategy::Pure(PureStrategy::from_x(0.0, q))));
    }
    let pib = boundary_pib(c)?;
    if p_inc >= pib {
        let point = concave_branch(theta, p_inc)?;
        return Ok((point, SingleQubitStrategy::Pure(concave_strategy(c, p_inc))));
    }

    let x = maximizing_root(c, p_inc).unwrap_or_else(|| concave_strategy(c, p_inc).x);
    let q = (1.0 - 2.0 * p_inc / (1.0 - x * c)).clamp(0.0, 1.0);
    let p_success = success_at_x(c, x, p_inc);
    Ok((StrategyPoint::from_success(p_success, p_inc), SingleQubitStrategy::Pure(PureStrategy::from_x(x, q))))
}

/// Admissible stationary point of `P_S(x)` with the largest success.
fn maximizing_root(c: f64, p_inc: f64) -> Option<f64> {
    let admissible = |x: f64| (-1.0..=1.0).contains(&x) && 1.0 - x * c >= 2.0 * p_inc;
    let mut best: Option<(f64, f64)> = None;
    for x in stationarity_cubic(c, p_inc).real_roots() {
        if !admissible(x) {
            continue;
        }
        let ps = success_at_x(c, x, p_inc);
        match best {
            Some((bx, bps)) if ps < bps - EXACT_TOL || ((ps - bps).abs() <= EXACT_TOL && x <= bx) => {}
            _ => best = Some((x, ps)),
        }
    }
    best.map(|(x, _)| x)
}

/// Optimal single-qubit strategy: convex hull of the pure-probe curve.
pub fn single_optimal(theta: f64, p_inc: f64) -> Result<(StrategyPoint, SingleQubitStrategy)> {
    let c = check_single_domain(theta, p_inc)?;
    let helstrom = PureStrategy::from_x(0.0, 1.0);
    let ps0 = helstrom_point(theta)?.p_success;
    let (pit, pst, t_strategy) = if c <= C_ZERO {
        // T merges with U = (1/2, 1/2)
        (0.5, 0.5, PureStrategy::from_x(0.0, 0.0))
    } else {
        let pit = tangent_pit(c)?;
        if p_inc >= pit {
            let point = concave_branch(theta, p_inc)?;
            return Ok((point, SingleQubitStrategy::Pure(concave_strategy(c, p_inc))));
        }
        (pit, concave_branch(theta, pit)?.p_success, concave_strategy(c, pit))
    };
    let p_inc = p_inc.min(pit);
    let w_t = p_inc / pit;
    let w_a = 1.0 - w_t;
    let p_success = w_a * ps0 + w_t * pst;
    Ok((
        StrategyPoint::from_success(p_success, p_inc),
        SingleQubitStrategy::Mixture([(w_a, helstrom), (w_t, t_strategy)]),
    ))
}

/// Error-free end points: `(2sin²θ, 0, cos 2θ)` with entanglement and
/// `((1−c²)/2, 0, (1+c²)/2)` with a single probe.
pub fn unambiguous_points(theta: f64) -> Result<(StrategyPoint, StrategyPoint)> {
    check_theta(theta)?;
    let c = overlap_for_theta(theta);
    let entangled = StrategyPoint::from_success(2.0 * theta.sin().powi(2), c);
    let single = StrategyPoint::from_success(0.5 * (1.0 - c * c), single_qubit_max_inconclusive(c));
    Ok((entangled, single))
}

/// Entangled optimum over all of `[0, 1]`: the closed form up to `cos 2θ`,
/// then the error-free point mixed with always-inconclusive, `P_S = 1 − P_I`.
pub fn entangled_envelope(theta: f64, p_inc: f64) -> Result<StrategyPoint> {
    check_theta(theta)?;
    check_probability(p_inc, "inconclusive rate")?;
    if p_inc > overlap_for_theta(theta) {
        return Ok(StrategyPoint::from_success(1.0 - p_inc, p_inc));
    }
    entangled_success(theta, p_inc)
}

/// Single-probe optimum over all of `[0, 1]`: [`single_optimal`] up to `U`,
/// then `P_S = 1 − P_I`.
pub fn single_envelope(theta: f64, p_inc: f64) -> Result<StrategyPoint> {
    check_theta(theta)?;
    check_probability(p_inc, "inconclusive rate")?;
    if p_inc > single_qubit_max_inconclusive(overlap_for_theta(theta)) {
        return Ok(StrategyPoint::from_success(1.0 - p_inc, p_inc));
    }
    single_optimal(theta, p_inc).map(|(p, _)| p)
}

/// Gain of the entangled scheme over the best single-qubit scheme.
pub fn advantage(theta: f64, p_inc: f64) -> Result<f64> {
    let ent = entangled_success(theta, p_inc)?;
    let (single, _) = single_optimal(theta, p_inc)?;
    Ok(ent.p_success - single.p_success)
}

/// Probabilities `Tr[X_i ρ]` of the four measurement outcomes on a probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeProbabilities {
    pub p_m0: f64,
    pub p_m1: f64,
    pub p_n0: f64,
    pub p_n1: f64,
}

impl OutcomeProbabilities {
    pub fn for_probe(pair: &MeasurementPair, probe: &PureQubitState) -> Self {
        Self {
            p_m0: probe.expectation(&pair.m0),
            p_m1: probe.expectation(&pair.m1),
            p_n0: probe.expectation(&pair.n0),
            p_n1: probe.expectation(&pair.n1),
        }
    }

    fn relabeled(&self, r: Relabeling) -> Self {
        let mut p = *self;
        if r.swap_outcomes {
            p = Self { p_m0: p.p_m1, p_m1: p.p_m0, p_n0: p.p_n1, p_n1: p.p_n0 };
        }
        if r.swap_measurements {
            p = Self { p_m0: p.p_n0, p_m1: p.p_n1, p_n0: p.p_m0, p_n1: p.p_m1 };
        }
        p
    }

    /// `P_M0/P_N0 ≥ P_N1/P_M1 ≥ 1`, compared without division.
    pub fn is_canonical(&self) -> bool {
        self.p_m0 * self.p_m1 >= self.p_n0 * self.p_n1 - EXACT_TOL && self.p_n1 >= self.p_m1 - EXACT_TOL
    }

    /// Rates of the strategy "guess M on 0; on 1 guess N with probability q".
    pub fn q_strategy(&self, q: f64) -> StrategyPoint {
        let p_success = 0.5 * (self.p_m0 + q * self.p_n1);
        let p_inc = 0.5 * (1.0 - q) * (self.p_m1 + self.p_n1);
        StrategyPoint::from_success(p_success, p_inc)
    }
}

/// A permutation of measurement labels and/or outcome labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Relabeling {
    pub swap_measurements: bool,
    pub swap_outcomes: bool,
}

/// Picks the labeling under which the `q`-strategy is optimal for a fixed
/// probe. Candidates are tried in the order identity, outcome swap,
/// measurement swap, both; the first canonical one is returned.
pub fn canonical_relabeling(probs: &OutcomeProbabilities) -> (Relabeling, OutcomeProbabilities) {
    let candidates = [(false, false), (false, true), (true, false), (true, true)];
    for (swap_measurements, swap_outcomes) in candidates {
        let r = Relabeling { swap_measurements, swap_outcomes };
        let p = probs.relabeled(r);
        if p.is_canonical() {
            return (r, p);
        }
    }
    unreachable!("the four relabelings cover both orderings of each inequality")
}

/// Inclusive grid `start, start + step, …, stop` with `stop` always present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl ProbabilityGrid {
    pub const DEFAULT_STEP: f64 = 0.01;

    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) || stop < start {
            return Err(Error::domain(format!("invalid grid {start}:{stop}:{step}")));
        }
        if step <= 0.0 && stop > start {
            return Err(Error::domain("grid step must be positive"));
        }
        Ok(Self { start, stop, step })
    }

    /// Parses `start:stop:step`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let [a, b, s] = parts[..] else {
            return Err(Error::domain(format!("grid must be start:stop:step, got {spec:?}")));
        };
        let num =
            |v: &str| v.trim().parse::<f64>().map_err(|_| Error::domain(format!("bad number {v:?} in grid {spec:?}")));
        Self::new(num(a)?, num(b)?, num(s)?)
    }

    pub fn points(&self) -> Vec<f64> {
        if self.stop == self.start {
            return vec![self.start];
        }
        let span = (self.stop - self.start) / self.step;
        let n = (span + 1e-9).floor() as usize;
        let mut pts: Vec<f64> = (0..=n).map(|k| self.start + k as f64 * self.step).collect();
        let last = *pts.last().unwrap();
        if (self.stop - last).abs() <= 1e-9 * self.step {
            *pts.last_mut().unwrap() = self.stop;
        } else {
            pts.push(self.stop);
        }
        pts
    }
}

/// One row of a materialized curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub p_inc: f64,
    pub p_success: f64,
    pub relative_success: f64,
    pub descriptor: String,
}

/// Curve sampled at strictly increasing inconclusive rates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    rows: Vec<CurveRow>,
}

impl CurveTable {
    pub fn push(&mut self, row: CurveRow) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if row.p_inc <= last.p_inc {
                return Err(Error::domain(format!(
                    "curve rows must have increasing P_I ({} after {})",
                    row.p_inc, last.p_inc
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[CurveRow] {
        &self.rows
    }
}

fn tabulate(
    theta: f64,
    grid: &ProbabilityGrid,
    max_p: f64,
    f: impl Fn(f64) -> Result<(StrategyPoint, String)>,
) -> Result<CurveTable> {
    check_theta(theta)?;
    let mut table = CurveTable::default();
    for p in grid.points().into_iter().filter(|p| *p <= max_p + EXACT_TOL) {
        let (point, descriptor) = f(p)?;
        let relative_success = point.relative_success().unwrap_or(f64::NAN);
        table.push(CurveRow { p_inc: p, p_success: point.p_success, relative_success, descriptor })?;
    }
    Ok(table)
}

/// Entangled optimum on the part of `grid` inside `[0, cos 2θ]`.
pub fn entangled_curve(theta: f64, grid: &ProbabilityGrid) -> Result<CurveTable> {
    let c = overlap_for_theta(theta);
    tabulate(theta, grid, c, |p| {
        let f = crate::geometry::filter_for_budget(theta, p)?;
        Ok((entangled_success(theta, p)?, format!("filter(f={:.6})", f.attenuation())))
    })
}

/// Single-qubit optimum on the part of `grid` inside `[0, (1+c²)/2]`.
pub fn single_curve(theta: f64, grid: &ProbabilityGrid) -> Result<CurveTable> {
    let c = overlap_for_theta(theta);
    tabulate(theta, grid, single_qubit_max_inconclusive(c), |p| {
        let (point, strategy) = single_optimal(theta, p)?;
        Ok((point, strategy.to_string()))
    })
}

/// Sample with the largest slope as seen from `a`, i.e. the hull vertex
/// after `a`, found without any collinearity tolerance.
fn steepest_from(a: (f64, f64), samples: &[(f64, f64)]) -> (f64, f64) {
    samples
        .iter()
        .copied()
        .filter(|p| p.0 > a.0)
        .max_by(|p, q| ((p.1 - a.1) / (p.0 - a.0)).total_cmp(&((q.1 - a.1) / (q.0 - a.0))))
        .unwrap_or(a)
}

/// Outcome of the numerical convex-hull check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HullReport {
    pub c: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// All sampled `(P_I, P_S)` pairs.
    pub samples: Vec<(f64, f64)>,
    pub hull_vertices: Vec<(f64, f64)>,
    pub point_a: (f64, f64),
    pub point_u: (f64, f64),
    /// Analytic tangent point; `None` when the hull degenerates.
    pub analytic_t: Option<(f64, f64)>,
    /// First hull vertex after `A`.
    pub tangent_vertex: Option<(f64, f64)>,
    /// `|P_I(tangent vertex) − P_IT|`.
    pub tangent_error: Option<f64>,
    /// Largest gap between the numerical hull and the analytic optimum.
    pub max_deviation: f64,
    /// Largest amount by which any sample exceeds the analytic optimum.
    pub max_excess: f64,
    /// The hull is a single straight segment.
    pub degenerate: bool,
}

/// Tolerance for [`hull_verify`] at `n = 10⁴`.
pub const HULL_TOLERANCE: f64 = 1e-6;

/// Convexifies sampled single-probe strategies and compares the resulting
/// upper hull with the closed-form optimum.
///
/// Half of the budget goes to the best-pure-probe curve on a uniform `P_I`
/// grid, a quarter to random `(ϑ, q)` strategies, and the rest to four
/// rounds of local resampling around the hull vertex that follows `A`, so
/// the tangent point is resolved well below the grid spacing.
pub fn hull_verify(c: f64, n_samples: usize, seed: u64) -> Result<HullReport> {
    check_overlap(c)?;
    if n_samples < 100 {
        return Err(Error::domain(format!("hull check needs at least 100 samples, got {n_samples}")));
    }
    let theta = 0.5 * c.acos();
    let p_max = single_qubit_max_inconclusive(overlap_for_theta(theta));
    let optimum = |p: f64| single_envelope(theta, p).map(|pt| pt.p_success);
    let pure = |p: f64| single_pure_curve(theta, p.min(p_max)).map(|(pt, _)| (p.min(p_max), pt.p_success));

    let n_grid = n_samples / 2;
    let n_random = n_samples / 4;
    let n_refine = n_samples - n_grid - n_random;
    let rounds = 4;

    let mut samples = Vec::with_capacity(n_samples);
    let mut grid_abscissae = Vec::with_capacity(n_grid);
    for k in 0..n_grid {
        let p = p_max * k as f64 / (n_grid - 1) as f64;
        let s = pure(p)?;
        grid_abscissae.push(s.0);
        samples.push(s);
    }
    let mut rng = rng::stream(seed, 0);
    for _ in 0..n_random {
        let probe_angle = rng.random_range(0.0..=std::f64::consts::FRAC_PI_2);
        let q: f64 = rng.random_range(0.0..=1.0);
        let pt = pure_strategy_point(theta, probe_angle, q);
        samples.push((pt.p_inconclusive, pt.p_success));
    }

    let point_a = (0.0, helstrom_point(theta)?.p_success);
    // the closed-form optimum ends at U; random probes can land beyond it
    let in_range = |s: &[(f64, f64)]| s.iter().copied().filter(|p| p.0 <= p_max).collect::<Vec<_>>();
    let mut hull = UpperHull::new(&in_range(&samples));
    let per_round = n_refine / rounds;
    // the tangent point lies at most one sample spacing left of the vertex
    let mut spacing = p_max / (n_grid - 1) as f64;
    for _ in 0..rounds {
        let v = hull.vertices();
        if v.len() < 3 || per_round < 2 {
            break;
        }
        let xt = steepest_from(point_a, &samples).0;
        let (lo, hi) = ((xt - spacing).max(0.0), (xt + spacing).min(p_max));
        for k in 0..per_round {
            let p = lo + (hi - lo) * k as f64 / (per_round - 1) as f64;
            samples.push(pure(p)?);
        }
        spacing = (hi - lo) / (per_round - 1) as f64;
        hull = UpperHull::new(&in_range(&samples));
    }
    // any budget left by integer division goes to the grid end
    while samples.len() < n_samples {
        samples.push(pure(p_max)?);
    }

    let point_u = (p_max, 0.5 * (1.0 - c * c));
    let degenerate = c >= 1.0 - EXACT_TOL || c <= C_ZERO || hull.len() < 3;
    let analytic_t = if degenerate {
        None
    } else {
        let pit = tangent_pit(c)?;
        Some((pit, concave_branch(theta, pit)?.p_success))
    };
    let tangent_vertex = (!degenerate).then(|| steepest_from(point_a, &in_range(&samples)));
    let tangent_error = analytic_t.zip(tangent_vertex).map(|(t, v)| (t.0 - v.0).abs());

    let mut max_deviation: f64 = 0.0;
    for &(x, y) in hull.vertices() {
        max_deviation = max_deviation.max((y - optimum(x)?).abs());
    }
    for &x in &grid_abscissae {
        if let Some(h) = hull.eval(x) {
            max_deviation = max_deviation.max((h - optimum(x)?).abs());
        }
    }
    let mut max_excess = f64::NEG_INFINITY;
    for &(x, y) in &samples {
        max_excess = max_excess.max(y - optimum(x)?);
    }

    Ok(HullReport {
        c,
        n_samples: samples.len(),
        seed,
        hull_vertices: hull.vertices().to_vec(),
        samples,
        point_a,
        point_u,
        analytic_t,
        tangent_vertex,
        tangent_error,
        max_deviation,
        max_excess,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    // mpmath, 40 digits
    const ENT_PI6_03: f64 = 0.685_410_196_624_968_5;
    const REL_PI6_03: f64 = 0.979_157_423_749_954_9;
    const HELSTROM_PI6: f64 = 0.933_012_701_892_219_3;
    const PURE_X_05_03: f64 = -0.170_820_393_249_936_9;
    const PURE_Q_05_03: f64 = 0.447_213_595_499_958;
    const PURE_PS_05_03: f64 = 0.658_725_654_090_723_8;
    const PIB_09: f64 = 0.716_869_858_279_433_6;
    const PIB_05: f64 = 0.591_506_350_946_109_7;
    const PIT_09: f64 = 0.758_287_970_135_288_4;
    const PIT_05: f64 = 0.602_859_456_941_536_9;
    const PST_05: f64 = 0.395_902_349_733_128_96;
    const OPT_05_03: f64 = 0.665_731_325_126_235_9;
    const W_A_05_03: f64 = 0.502_371_578_407_381_8;
    const ADV_PI6_03: f64 = 0.019_678_871_498_732_59;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn entangled_examples() {
        let p = entangled_success(FRAC_PI_4, 0.0).unwrap();
        assert!(close(p.p_success, 1.0, 1e-12));
        let p = entangled_success(FRAC_PI_6, 0.3).unwrap();
        assert!(close(p.p_success, ENT_PI6_03, 1e-12));
        assert!(close(p.sum(), 1.0, 1e-12));
        let theta = 0.5;
        let p = entangled_success(theta, (2.0 * theta).cos()).unwrap();
        assert!(close(p.p_success, 2.0 * theta.sin().powi(2), 1e-12));
        assert_eq!(p.p_error, 0.0);
    }

    #[test]
    fn entangled_rejects_budget_past_idp() {
        assert!(matches!(entangled_success(FRAC_PI_6, 0.51), Err(Error::Domain(_))));
    }

    #[test]
    fn relative_success_examples() {
        let theta: f64 = 0.3;
        let p = entangled_success(theta, (2.0 * theta).cos()).unwrap();
        assert!(close(p.relative_success().unwrap(), 1.0, 1e-12));
        let p = StrategyPoint::from_success(0.7, 0.0);
        assert_eq!(p.relative_success().unwrap(), 0.7);
        let p = StrategyPoint::from_success(ENT_PI6_03, 0.3);
        assert!(close(p.relative_success().unwrap(), REL_PI6_03, 1e-12));
        let all_inc = StrategyPoint::from_success(0.0, 1.0);
        assert!(matches!(relative_success(&all_inc), Err(Error::Domain(_))));
    }

    #[test]
    fn helstrom_examples() {
        assert!(close(helstrom_point(FRAC_PI_4).unwrap().p_success, 1.0, 1e-12));
        assert!(close(helstrom_point(0.0).unwrap().p_success, 0.5, 1e-12));
        assert!(close(helstrom_point(FRAC_PI_6).unwrap().p_success, HELSTROM_PI6, 1e-12));
    }

    #[test]
    fn pure_curve_factored_cubic_case() {
        // c = 0.5 ⇔ θ = π/6
        let (pt, s) = single_pure_curve(FRAC_PI_6, 0.3).unwrap();
        let SingleQubitStrategy::Pure(s) = s else { panic!("expected pure") };
        assert!(close(s.x, PURE_X_05_03, 1e-12));
        assert!(close(s.q, PURE_Q_05_03, 1e-12));
        assert!(close(pt.p_success, PURE_PS_05_03, 1e-12));
        assert!(close(pt.sum(), 1.0, 1e-12));
    }

    #[test]
    fn pure_curve_at_zero_is_helstrom() {
        for theta in [0.1, 0.4, 0.7] {
            let (pt, s) = single_pure_curve(theta, 0.0).unwrap();
            let SingleQubitStrategy::Pure(s) = s else { panic!() };
            assert!(close(s.x, 0.0, 1e-12));
            assert!(close(s.q, 1.0, 1e-12));
            assert!(close(pt.p_success, helstrom_point(theta).unwrap().p_success, 1e-12));
        }
    }

    #[test]
    fn pure_curve_q_zero_branch() {
        let (pt, s) = single_pure_curve(FRAC_PI_6, 0.625).unwrap();
        let SingleQubitStrategy::Pure(s) = s else { panic!() };
        assert_eq!(s.q, 0.0);
        assert!(close(s.x, -0.5, 1e-12));
        assert!(close(pt.p_success, 0.375, 1e-12));
        assert!(matches!(single_pure_curve(FRAC_PI_6, 0.63), Err(Error::Domain(_))));
    }

    #[test]
    fn characteristic_points() {
        assert!(close(boundary_pib(1.0).unwrap(), 0.75, 1e-15));
        assert!(close(boundary_pib(0.9).unwrap(), PIB_09, 1e-12));
        assert!(close(boundary_pib(0.5).unwrap(), PIB_05, 1e-12));
        assert!(close(tangent_pit(1.0).unwrap(), 0.8, 1e-15));
        assert!(close(tangent_pit(0.9).unwrap(), PIT_09, 1e-12));
        assert!(close(tangent_pit(0.5).unwrap(), PIT_05, 1e-12));
        assert!(matches!(tangent_pit(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn q_vanishes_at_boundary() {
        for c in [0.2, 0.5, 0.9] {
            let pib = boundary_pib(c).unwrap();
            let x = maximizing_root(c, pib - 1e-12).unwrap();
            let q = 1.0 - 2.0 * pib / (1.0 - x * c);
            assert!(q.abs() < 1e-6, "c = {c}: q = {q}");
            assert!(close(x, (1.0 - 2.0 * pib) / c, 1e-5));
        }
    }

    #[test]
    fn concave_branch_examples() {
        let theta: f64 = 0.35;
        let c = (2.0 * theta).cos();
        let pt = concave_branch(theta, 0.5 * (1.0 + c * c)).unwrap();
        assert!(close(pt.p_success, 0.5 * (1.0 - c * c), 1e-12));
        let pt = concave_branch(theta, 0.5).unwrap();
        assert!(close(pt.p_success, 0.25 + 0.25 * (2.0 * theta).sin(), 1e-12));
        let pt = concave_branch(FRAC_PI_6, PIT_05).unwrap();
        assert!(close(pt.p_success, PST_05, 1e-12));
        assert!(matches!(concave_branch(FRAC_PI_6, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn single_optimal_examples() {
        let (pt, s) = single_optimal(FRAC_PI_6, 0.3).unwrap();
        assert!(close(pt.p_success, OPT_05_03, 1e-12));
        let w = s.weights();
        assert!(close(w[0], W_A_05_03, 1e-12));
        assert!(close(w[0] + w[1], 1.0, 1e-15));
        let (pt, s) = single_optimal(0.4, 0.0).unwrap();
        assert!(close(pt.p_success, helstrom_point(0.4).unwrap().p_success, 1e-12));
        assert_eq!(s.weights()[1], 0.0);
        let (pt, _) = single_optimal(FRAC_PI_6, 0.625).unwrap();
        assert!(close(pt.p_success, 0.375, 1e-12));
    }

    #[test]
    fn orthogonal_limit() {
        let (pt, _) = single_pure_curve(FRAC_PI_4, 0.3).unwrap();
        assert!(close(pt.p_success, 0.7, 1e-12));
        let (pt, _) = single_optimal(FRAC_PI_4, 0.5).unwrap();
        assert!(close(pt.p_success, 0.5, 1e-12));
        assert!(matches!(single_optimal(FRAC_PI_4, 0.51), Err(Error::Domain(_))));
    }

    #[test]
    fn unambiguous_point_examples() {
        let (e, s) = unambiguous_points(FRAC_PI_4).unwrap();
        assert!(close(e.p_success, 1.0, 1e-12) && close(e.p_inconclusive, 0.0, 1e-12));
        assert!(close(s.p_success, 0.5, 1e-12) && close(s.p_inconclusive, 0.5, 1e-12));
        let (e, s) = unambiguous_points(FRAC_PI_6).unwrap();
        assert!(close(e.p_inconclusive, 0.5, 1e-12));
        assert!(close(s.p_inconclusive, 0.625, 1e-12));
        let (e, s) = unambiguous_points(0.0).unwrap();
        assert_eq!((e.p_success, e.p_inconclusive), (0.0, 1.0));
        assert_eq!((s.p_success, s.p_inconclusive), (0.0, 1.0));
        assert_eq!(e.p_error, 0.0);
        assert_eq!(s.p_error, 0.0);
    }

    #[test]
    fn advantage_examples() {
        assert!(advantage(0.3, 0.0).unwrap().abs() < 1e-12);
        assert!(close(advantage(FRAC_PI_6, 0.3).unwrap(), ADV_PI6_03, 1e-12));
        let a = advantage(FRAC_PI_6, 0.5).unwrap();
        let (single, _) = single_optimal(FRAC_PI_6, 0.5).unwrap();
        assert!(close(a, 2.0 * FRAC_PI_6.sin().powi(2) - single.p_success, 1e-12));
        assert!(a > 0.0);
    }

    #[test]
    fn eq10_matches_eliminated_form() {
        let theta: f64 = 0.4;
        let c = (2.0 * theta).cos();
        for i in 0..=20 {
            let probe = std::f64::consts::FRAC_PI_2 * i as f64 / 20.0;
            for j in 0..=10 {
                let q = j as f64 / 10.0;
                let pt = pure_strategy_point(theta, probe, q);
                let x = (2.0 * probe).cos();
                let ps = success_at_x(c, x, pt.p_inconclusive);
                assert!(close(ps, pt.p_success, 1e-12));
            }
        }
    }

    #[test]
    fn relabeling_makes_q_strategy_best_guess() {
        let pair = MeasurementPair::new(0.3).unwrap();
        for i in 0..=60 {
            let probe = PureQubitState::probe(std::f64::consts::PI * i as f64 / 60.0);
            let raw = OutcomeProbabilities::for_probe(&pair, &probe);
            let (_, canon) = canonical_relabeling(&raw);
            assert!(canon.is_canonical());
            let best = 0.5 * (raw.p_m0 + raw.p_n1).max(raw.p_m1 + raw.p_n0);
            assert!(close(canon.q_strategy(1.0).p_success, best, 1e-12));
        }
    }

    #[test]
    fn relabeling_ties_resolve_to_identity() {
        let pair = MeasurementPair::new(0.0).unwrap();
        let probs = OutcomeProbabilities::for_probe(&pair, &PureQubitState::plus());
        assert_eq!(canonical_relabeling(&probs).0, Relabeling::default());
    }

    #[test]
    fn q_strategy_matches_closed_form_on_canonical_probe() {
        let theta = 0.25;
        let pair = MeasurementPair::new(theta).unwrap();
        let probe_angle = 1.0;
        let probs = OutcomeProbabilities::for_probe(&pair, &PureQubitState::probe(probe_angle));
        assert!(probs.is_canonical());
        for q in [0.0, 0.4, 1.0] {
            let a = probs.q_strategy(q);
            let b = pure_strategy_point(theta, probe_angle, q);
            assert!(close(a.p_success, b.p_success, 1e-12));
            assert!(close(a.p_inconclusive, b.p_inconclusive, 1e-12));
        }
    }

    #[test]
    fn grid_points() {
        let g = ProbabilityGrid::parse("0:0.5:0.01").unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 51);
        assert_eq!(pts[50], 0.5);
        assert_eq!(ProbabilityGrid::parse("0:0:1").unwrap().points(), vec![0.0]);
        let odd = ProbabilityGrid::new(0.0, 0.25, 0.1).unwrap().points();
        assert_eq!(odd.len(), 4);
        assert_eq!(odd[3], 0.25);
        assert!(ProbabilityGrid::parse("0:1").is_err());
        assert!(ProbabilityGrid::parse("1:0:0.1").is_err());
    }

    #[test]
    fn curve_tables_increase() {
        let g = ProbabilityGrid::new(0.0, 1.0, 0.01).unwrap();
        let e = entangled_curve(FRAC_PI_6, &g).unwrap();
        assert_eq!(e.rows().len(), 51);
        assert!(e.rows().windows(2).all(|w| w[0].relative_success <= w[1].relative_success + 1e-15));
        let s = single_curve(FRAC_PI_6, &g).unwrap();
        assert_eq!(s.rows().last().unwrap().p_inc, 0.62);
        let mut t = CurveTable::default();
        let row = CurveRow { p_inc: 0.1, p_success: 0.5, relative_success: 0.5, descriptor: String::new() };
        t.push(row.clone()).unwrap();
        assert!(t.push(row).is_err());
    }

    #[test]
    fn hull_small_checks() {
        let r = hull_verify(1.0, 1000, 3).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.hull_vertices.len(), 2);
        assert!(r.max_deviation < 1e-12);
        let r = hull_verify(0.5, 2000, 3).unwrap();
        assert!(!r.degenerate);
        assert!(r.max_excess < 1e-12);
        assert!(r.hull_vertices.contains(&r.point_a));
        assert!(r.tangent_error.unwrap() < 1e-6);
        assert!(matches!(hull_verify(0.5, 50, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn hull_orthogonal_case_is_trivial() {
        let r = hull_verify(0.0, 500, 1).unwrap();
        assert!(r.degenerate);
        assert!(r.analytic_t.is_none());
        assert!(r.max_deviation < 1e-12);
    }

    #[test]
    fn envelopes_extend_past_error_free_points() {
        let theta: f64 = 0.6283;
        let c = (2.0 * theta).cos();
        let at = entangled_envelope(theta, c).unwrap();
        assert!((at.p_success - 2.0 * theta.sin().powi(2)).abs() < 1e-12);
        let past = entangled_envelope(theta, 0.45).unwrap();
        assert!((past.p_success - 0.55).abs() < 1e-15);
        assert_eq!(past.p_error, 0.0);
        let u = single_qubit_max_inconclusive(c);
        let s_at = single_envelope(theta, u).unwrap();
        assert!((s_at.p_success - (1.0 - u)).abs() < 1e-12);
        assert!((single_envelope(theta, 0.9).unwrap().p_success - 0.1).abs() < 1e-15);
        for k in 0..=100 {
            let p = k as f64 / 100.0;
            let e = entangled_envelope(theta, p).unwrap().p_success;
            let s = single_envelope(theta, p).unwrap().p_success;
            assert!(e >= s - 1e-12);
        }
    }
}
