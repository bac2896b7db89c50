use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::tester::{inv_sqrt_spd, sqrt_spd, PovmTriple, Tester, TesterComponent};
use crate::geometry::MeasurementPair;
use crate::hull::UpperHull;
use crate::strategies::StrategyPoint;
use crate::{rng, Error, Result};

/// Penalty weights applied in sequence.
pub const PENALTY_SCHEDULE: [f64; 3] = [1e2, 1e3, 1e4];
pub const MIN_RESTARTS: usize = 20;
const MULTIPLIER_ROUNDS: usize = 30;
const FEASIBILITY_TOL: f64 = 1e-11;
const BFGS_MAX_ITER: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Grid,
    Ascent,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Method::Grid),
            "ascent" => Ok(Method::Ascent),
            other => Err(Error::Domain(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub method: Method,
    pub tol: f64,
    pub seed: u64,
    /// Ascent restarts; at least [`MIN_RESTARTS`].
    pub restarts: usize,
    /// Directions and eigenvalue splits of `H_I` for the grid method.
    pub grid_resolution: usize,
    /// Also run the ascent with a free probe density `ρ`.
    pub free_rho: bool,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            method: Method::Ascent,
            tol: 1e-4,
            seed: 0,
            restarts: MIN_RESTARTS,
            grid_resolution: 256,
            free_rho: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub index: usize,
    pub p_success: f64,
    /// Inconclusive rate before the feasibility polish.
    pub p_inconclusive_raw: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeRhoDiagnostic {
    pub point: StrategyPoint,
    pub rho: Matrix2<f64>,
    /// Free-ρ success minus the covariant optimum; should not exceed tol.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub point: StrategyPoint,
    pub triple: PovmTriple,
    /// False when fewer than three restarts (ascent) agree within tol, or no
    /// grid point fell in the target bin.
    pub certified: bool,
    pub agreeing_restarts: usize,
    pub restarts: Vec<RestartSummary>,
    pub free_rho: Option<FreeRhoDiagnostic>,
}

/// Maximizes `P_S` over covariant triples at `P_I = target`.
pub fn optimize_povm(pair: &MeasurementPair, target: f64, opts: &OptimizeOptions) -> Result<OptimizeResult> {
    let c = pair.overlap();
    if !target.is_finite() || target < 0.0 || target > c + 1e-12 {
        return Err(Error::Domain(format!("target P_I = {target} outside [0, cos 2θ = {c}]")));
    }
    let target = target.min(c);
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!("tol must be positive, got {}", opts.tol)));
    }
    let mut result = match opts.method {
        Method::Ascent => ascent(pair, target, opts)?,
        Method::Grid => grid(pair, target, opts)?,
    };
    if opts.free_rho {
        let d = free_rho_ascent(pair, target, opts)?;
        result.free_rho =
            Some(FreeRhoDiagnostic { excess: d.0.p_success - result.point.p_success, point: d.0, rho: d.1 });
    }
    Ok(result)
}

fn point_of(triple: &PovmTriple, pair: &MeasurementPair) -> StrategyPoint {
    let (ps, pe, pi) = triple.probabilities_unchecked(pair);
    StrategyPoint { p_success: ps, p_error: pe, p_inconclusive: pi }
}

/// Moves a triple onto `P_I = target` exactly: mixes in the all-inconclusive
/// triple when short, or hands part of `H_I` evenly to `H_M` and `H_N` when over.
fn polish_triple(t: &PovmTriple, pi: f64, target: f64) -> PovmTriple {
    let half = 0.5 * Matrix2::identity();
    if pi < target {
        let lam = (target - pi) / (1.0 - pi);
        PovmTriple { h_m: (1.0 - lam) * t.h_m, h_n: (1.0 - lam) * t.h_n, h_i: (1.0 - lam) * t.h_i + lam * half }
    } else if pi > target {
        let moved = (1.0 - target / pi) * t.h_i;
        PovmTriple { h_m: t.h_m + 0.5 * moved, h_n: t.h_n + 0.5 * moved, h_i: t.h_i - moved }
    } else {
        *t
    }
}

fn polish_tester(t: &Tester, pi: f64, target: f64) -> Tester {
    let map =
        |f: &dyn Fn(&TesterComponent, usize) -> TesterComponent| Tester { m: f(&t.m, 0), n: f(&t.n, 1), i: f(&t.i, 2) };
    if pi < target {
        let lam = (target - pi) / (1.0 - pi);
        let (r0, r1) = (t.m.h0 + t.n.h0 + t.i.h0, t.m.h1 + t.n.h1 + t.i.h1);
        map(&|c, k| {
            let (a0, a1) = if k == 2 { (lam * r0, lam * r1) } else { (Matrix2::zeros(), Matrix2::zeros()) };
            TesterComponent { h0: (1.0 - lam) * c.h0 + a0, h1: (1.0 - lam) * c.h1 + a1 }
        })
    } else if pi > target {
        let s = 1.0 - target / pi;
        let (m0, m1) = (s * t.i.h0, s * t.i.h1);
        map(&|c, k| match k {
            2 => TesterComponent { h0: c.h0 - m0, h1: c.h1 - m1 },
            _ => TesterComponent { h0: c.h0 + 0.5 * m0, h1: c.h1 + 0.5 * m1 },
        })
    } else {
        *t
    }
}

fn gram(p: &[f64]) -> Matrix2<f64> {
    let a = Matrix2::new(p[0], p[1], p[2], p[3]);
    a * a.transpose()
}

/// `H_k = ½ S^{-1/2} G_k S^{-1/2}` with `G_k = A_k A_kᵀ`, `S = ΣG_k`.
fn triple_from_params(p: &[f64]) -> Option<PovmTriple> {
    let g = [gram(&p[0..4]), gram(&p[4..8]), gram(&p[8..12])];
    let s = g[0] + g[1] + g[2];
    if s.determinant() <= 1e-14 * s.trace() * s.trace() {
        return None;
    }
    let w = inv_sqrt_spd(&s);
    let h = |k: usize| 0.5 * w * g[k] * w;
    Some(PovmTriple { h_m: h(0), h_n: h(1), h_i: h(2) })
}

fn tester_from_params(p: &[f64]) -> Option<(Tester, Matrix2<f64>)> {
    let b = gram(&p[0..4]);
    let rho = b / b.trace();
    let r = sqrt_spd(&rho);
    let g: Vec<Matrix2<f64>> = (0..6).map(|j| gram(&p[4 + 4 * j..8 + 4 * j])).collect();
    let mut blocks = [[Matrix2::zeros(); 2]; 3];
    for i in 0..2 {
        let s = g[i] + g[2 + i] + g[4 + i];
        if s.determinant() <= 1e-14 * s.trace() * s.trace() {
            return None;
        }
        let w = r * inv_sqrt_spd(&s);
        for k in 0..3 {
            blocks[k][i] = w * g[2 * k + i] * w.transpose();
        }
    }
    let comp = |k: usize| TesterComponent { h0: blocks[k][0], h1: blocks[k][1] };
    Some((Tester { m: comp(0), n: comp(1), i: comp(2) }, rho))
}

/// Rank-1 block `√w (cos a, sin a)` plus a small second column.
fn push_rank_one(v: &mut Vec<f64>, rng: &mut ChaCha8Rng, weight: f64) {
    let a = rng.random_range(0.0..PI);
    let col = weight.sqrt() * Vector2::new(a.cos(), a.sin());
    let e0: f64 = 0.05 * rng.random_range(-1.0..1.0);
    let e1: f64 = 0.05 * rng.random_range(-1.0..1.0);
    v.extend_from_slice(&[col[0], e0, col[1], e1]);
}

fn simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

fn covariant_start(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let w = simplex(rng, 3);
    let mut v = Vec::with_capacity(12);
    for wk in w {
        push_rank_one(&mut v, rng, wk);
    }
    v
}

fn free_start(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v = Vec::with_capacity(28);
    push_rank_one(&mut v, rng, 1.0);
    v[1] += 0.5;
    v[3] += 0.5;
    // blocks stored in (k, i) order, weights drawn per outcome i
    let mut blocks: Vec<Vec<f64>> = (0..6).map(|_| Vec::with_capacity(4)).collect();
    for i in 0..2 {
        let w = simplex(rng, 3);
        for (k, wk) in w.into_iter().enumerate() {
            push_rank_one(&mut blocks[2 * k + i], rng, wk);
        }
    }
    v.extend(blocks.into_iter().flatten());
    v
}

/// `x ↦ (P_S, P_I)`, `None` outside the feasible set.
type Objective<'a> = dyn Fn(&[f64]) -> Option<(f64, f64)> + Sync + 'a;

/// Augmented-Lagrangian ascent of `P_S` at `P_I = target` for one start.
fn constrained_ascent(eval: &Objective<'_>, x0: Vec<f64>, target: f64) -> (Vec<f64>, usize) {
    let mut x = x0;
    let mut lam = 0.0;
    let mut iterations = 0;
    let step = |x: Vec<f64>, mu: f64, lam: f64, iterations: &mut usize| {
        let f = |p: &[f64]| match eval(p) {
            Some((ps, pi)) => {
                let g = pi - target;
                ps - lam * g - mu * g * g
            }
            None => f64::NEG_INFINITY,
        };
        let (x, it) = bfgs_maximize(&f, x, BFGS_MAX_ITER);
        *iterations += it;
        x
    };
    for mu in PENALTY_SCHEDULE {
        x = step(x, mu, lam, &mut iterations);
    }
    let mu = PENALTY_SCHEDULE[PENALTY_SCHEDULE.len() - 1];
    for _ in 0..MULTIPLIER_ROUNDS {
        let Some((_, pi)) = eval(&x) else { break };
        let g = pi - target;
        if g.abs() < FEASIBILITY_TOL {
            break;
        }
        lam += 2.0 * mu * g;
        x = step(x, mu, lam, &mut iterations);
    }
    (x, iterations)
}

fn ascent(pair: &MeasurementPair, target: f64, opts: &OptimizeOptions) -> Result<OptimizeResult> {
    if opts.restarts < MIN_RESTARTS {
        return Err(Error::Domain(format!("ascent needs at least {MIN_RESTARTS} restarts, got {}", opts.restarts)));
    }
    let eval = |p: &[f64]| {
        triple_from_params(p).map(|t| {
            let (ps, _, pi) = t.probabilities_unchecked(pair);
            (ps, pi)
        })
    };
    let runs: Vec<(PovmTriple, RestartSummary)> = (0..opts.restarts)
        .into_par_iter()
        .map(|idx| {
            let mut r = rng::stream(opts.seed, idx as u64);
            let mut x0 = covariant_start(&mut r);
            while triple_from_params(&x0).is_none() {
                x0 = covariant_start(&mut r);
            }
            let (x, iterations) = constrained_ascent(&eval, x0, target);
            let raw = triple_from_params(&x).expect("ascent keeps S invertible");
            let (_, _, pi) = raw.probabilities_unchecked(pair);
            let polished = polish_triple(&raw, pi, target);
            let p = point_of(&polished, pair);
            (polished, RestartSummary { index: idx, p_success: p.p_success, p_inconclusive_raw: pi, iterations })
        })
        .collect();

    let mut best = 0;
    for (k, (_, s)) in runs.iter().enumerate() {
        if s.p_success > runs[best].1.p_success {
            best = k;
        }
    }
    let best_ps = runs[best].1.p_success;
    let agreeing = runs.iter().filter(|(_, s)| s.p_success >= best_ps - opts.tol).count();
    let triple = runs[best].0;
    triple.validate()?;
    Ok(OptimizeResult {
        point: point_of(&triple, pair),
        triple,
        certified: agreeing >= 3,
        agreeing_restarts: agreeing,
        restarts: runs.into_iter().map(|(_, s)| s).collect(),
        free_rho: None,
    })
}

/// Best `H_M`, `H_N` for a fixed `H_I`: with `Q = 𝕀/2 − H_I` and
/// `H_M = Q^{1/2} E Q^{1/2}`, `0 ≤ E ≤ 𝕀`, the optimum takes `E` as the
/// projector onto the positive part of `Q^{1/2}(M_0 − N_0)Q^{1/2}`.
fn split_remainder(pair: &MeasurementPair, h_i: &Matrix2<f64>) -> PovmTriple {
    let q = 0.5 * Matrix2::<f64>::identity() - h_i;
    let qs = if q.trace() > 1e-15 { sqrt_spd(&q) } else { Matrix2::zeros() };
    let d = qs * (pair.m0 - pair.n0) * qs;
    let eig = d.symmetric_eigen();
    let mut proj = Matrix2::zeros();
    for k in 0..2 {
        if eig.eigenvalues[k] > 0.0 {
            let e = eig.eigenvectors.column(k);
            proj += e * e.transpose();
        }
    }
    let h_m = qs * proj * qs;
    PovmTriple { h_m, h_n: q - h_m, h_i: *h_i }
}

/// Grid over the inconclusive block `H_I = c₁|w⟩⟨w| + c₂|w⊥⟩⟨w⊥|`: `n`
/// directions `w` in `[0, π)` times `n` values of `c₂`, with `c₁` fixed by
/// `P_I = target`. `H_M` and `H_N` are optimal for each grid point.
fn grid(pair: &MeasurementPair, target: f64, opts: &OptimizeOptions) -> Result<OptimizeResult> {
    let n = opts.grid_resolution;
    if n < 4 {
        return Err(Error::Domain(format!("grid resolution must be at least 4, got {n}")));
    }
    let both = pair.m0 + pair.n0;
    let quad = |m: &Matrix2<f64>, u: &Vector2<f64>| (u.transpose() * m * u)[(0, 0)];

    let candidate = |iw: usize, ic: usize| -> Option<(f64, PovmTriple)> {
        let a = PI * iw as f64 / n as f64;
        let (w, wp) = (Vector2::new(a.cos(), a.sin()), Vector2::new(-a.sin(), a.cos()));
        let (kw, kp) = (quad(&both, &w), quad(&both, &wp));
        let c2 = 0.5 * ic as f64 / (n - 1) as f64;
        if kw < 1e-14 {
            return None;
        }
        let c1 = (target - c2 * kp) / kw;
        if !(0.0..=0.5).contains(&c1) {
            return None;
        }
        let h_i = c1 * w * w.transpose() + c2 * wp * wp.transpose();
        let t = split_remainder(pair, &h_i);
        Some((point_of(&t, pair).p_success, t))
    };

    // ties keep the lowest (direction, split) index
    let best = (0..n)
        .into_par_iter()
        .map(|iw| {
            let mut best: Option<(f64, PovmTriple)> = None;
            for ic in 0..n {
                if let Some(c) = candidate(iw, ic) {
                    if best.as_ref().map_or(true, |b| c.0 > b.0) {
                        best = Some(c);
                    }
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<(f64, PovmTriple)>, x| match acc {
            Some(a) if a.0 >= x.0 => Some(a),
            _ => Some(x),
        });

    let evaluated = n * n;
    let (triple, certified) = match best {
        Some((_, t)) => (t, true),
        None => {
            let t = PovmTriple { h_m: Matrix2::zeros(), h_n: Matrix2::zeros(), h_i: 0.5 * Matrix2::identity() };
            (polish_triple(&t, 1.0, target), false)
        }
    };
    if triple.min_eigenvalue() < -1e-9 {
        return Err(Error::Validation {
            what: "grid triple not positive semidefinite".into(),
            residual: -triple.min_eigenvalue(),
        });
    }
    let point = point_of(&triple, pair);
    Ok(OptimizeResult {
        point,
        triple,
        certified,
        agreeing_restarts: certified as usize,
        restarts: vec![RestartSummary {
            index: 0,
            p_success: point.p_success,
            p_inconclusive_raw: point.p_inconclusive,
            iterations: evaluated,
        }],
        free_rho: None,
    })
}

/// Ascent over general block testers with free `ρ`; returns the best point.
fn free_rho_ascent(
    pair: &MeasurementPair,
    target: f64,
    opts: &OptimizeOptions,
) -> Result<(StrategyPoint, Matrix2<f64>)> {
    let eval = |p: &[f64]| {
        tester_from_params(p).map(|(t, _)| {
            let (ps, _, pi) = t.probabilities_unchecked(pair);
            (ps, pi)
        })
    };
    let runs: Vec<(StrategyPoint, Matrix2<f64>)> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|idx| {
            let mut r = rng::stream(opts.seed ^ 0x5eed_f4ee, idx as u64);
            let mut x0 = free_start(&mut r);
            while tester_from_params(&x0).is_none() {
                x0 = free_start(&mut r);
            }
            let (x, _) = constrained_ascent(&eval, x0, target);
            let (t, rho) = tester_from_params(&x).expect("ascent keeps blocks invertible");
            let (_, _, pi) = t.probabilities_unchecked(pair);
            let t = polish_tester(&t, pi, target);
            let (ps, pe, pi) = t.probabilities_unchecked(pair);
            (StrategyPoint { p_success: ps, p_error: pe, p_inconclusive: pi }, rho)
        })
        .collect();
    let mut best = 0;
    for (k, r) in runs.iter().enumerate() {
        if r.0.p_success > runs[best].0.p_success {
            best = k;
        }
    }
    Ok(runs[best])
}

/// Quasi-Newton ascent with central-difference gradients and Armijo
/// backtracking. Returns the final point and the iteration count.
fn bfgs_maximize(f: &dyn Fn(&[f64]) -> f64, mut x: Vec<f64>, max_iter: usize) -> (Vec<f64>, usize) {
    let n = x.len();
    let mut fx = f(&x);
    let mut g = gradient(f, &x);
    let mut h = identity(n);
    for it in 0..max_iter {
        if g.iter().all(|v| v.abs() < 1e-11) {
            return (x, it);
        }
        let mut d = mat_vec(&h, &g);
        let mut slope = dot(&g, &d);
        if !(slope > 0.0) {
            h = identity(n);
            d = g.clone();
            slope = dot(&g, &d);
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
            let fnew = f(&xn);
            if fnew >= fx + 1e-4 * alpha * slope {
                accepted = Some((xn, fnew));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fnew)) = accepted else {
            return (x, it);
        };
        let gn = gradient(f, &xn);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        // curvature of −f
        let y: Vec<f64> = g.iter().zip(&gn).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-18 {
            bfgs_update(&mut h, &s, &y, sy);
        }
        let improved = fnew - fx;
        x = xn;
        fx = fnew;
        g = gn;
        if improved.abs() <= 1e-16 * (1.0 + fx.abs()) && s.iter().all(|v| v.abs() < 1e-12) {
            return (x, it + 1);
        }
    }
    (x, max_iter)
}

fn gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = 1e-6 * (1.0 + x[i].abs());
            xp[i] = x[i] + h;
            let fp = f(&xp);
            xp[i] = x[i] - h;
            let fm = f(&xp);
            xp[i] = x[i];
            let d = (fp - fm) / (2.0 * h);
            if d.is_finite() {
                d
            } else {
                0.0
            }
        })
        .collect()
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// `H ← (I − ρsyᵀ) H (I − ρysᵀ) + ρssᵀ`.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i][j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Single-qubit brute force: every real probe on a grid of `resolution + 1`
/// angles over `[0, π]`, every deterministic outcome-to-guess assignment, and
/// all mixtures via the upper hull, read off at `target`.
pub fn brute_force_single(pair: &MeasurementPair, target: f64, resolution: usize) -> Result<StrategyPoint> {
    if resolution < 100 {
        return Err(Error::Domain(format!("resolution must be at least 100, got {resolution}")));
    }
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::Domain(format!("target P_I = {target} outside [0, 1]")));
    }
    let mut pts = Vec::with_capacity(9 * (resolution + 1));
    for k in 0..=resolution {
        let a = PI * k as f64 / resolution as f64;
        let probe = Vector2::new(a.cos(), a.sin());
        let pm0 = (probe.transpose() * pair.m0 * probe)[(0, 0)];
        let pn0 = (probe.transpose() * pair.n0 * probe)[(0, 0)];
        let (pm, pn) = ([pm0, 1.0 - pm0], [pn0, 1.0 - pn0]);
        // decision per outcome: 0 = guess M, 1 = guess N, 2 = inconclusive
        for rule in 0..9 {
            let d = [rule % 3, rule / 3];
            let (mut ps, mut pi) = (0.0, 0.0);
            for i in 0..2 {
                match d[i] {
                    0 => ps += 0.5 * pm[i],
                    1 => ps += 0.5 * pn[i],
                    _ => pi += 0.5 * (pm[i] + pn[i]),
                }
            }
            pts.push((pi, ps));
        }
    }
    let hull = UpperHull::new(&pts);
    let ps = hull.eval(target).ok_or_else(|| Error::Domain(format!("target P_I = {target} outside sampled range")))?;
    Ok(StrategyPoint::from_success(ps, target))
}
