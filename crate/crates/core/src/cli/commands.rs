//! Canonical parameter sets and the computations behind each command.
//!
//! A `*Params` value is what a manifest stores: angles already in radians,
//! grids already expanded, noise models already resolved. Running the same
//! params always yields the same bytes.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::f64::consts::FRAC_PI_4;

use super::format::{json_document, Cell, Table};
use crate::convexity::{self, Branch, BOUNDARY_MARGIN};
use crate::geometry::MeasurementPair;
use crate::manifest::RunManifest;
use crate::oracle::{self, Method, OptimizeOptions};
use crate::simulator::{self, ExperimentConfig, ImperfectionModel, ScanTable};
use crate::strategies::{self, ProbabilityGrid};
use crate::{Error, Result};

/// Inputs this close outside `[0, π/4]` are taken as the endpoint, so that
/// rounded literals such as `0.7854` select the orthogonal case.
pub const THETA_SNAP: f64 = 5e-5;

pub const CONVEXITY_THRESHOLD: f64 = -1e-9;
pub const REL_ERR_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Outcome of a command besides its output bytes.
#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    /// A numerical acceptance threshold was exceeded.
    Breach(String),
    /// The optimizer could not certify its result.
    NonConvergence(String),
}

pub struct Output {
    pub body: String,
    pub status: Status,
}

pub fn normalize_theta(value: f64, degrees: bool) -> Result<f64> {
    let theta = if degrees { value.to_radians() } else { value };
    if !theta.is_finite() {
        return Err(Error::Domain(format!("theta outside [0, pi/4]: {value}")));
    }
    if (-THETA_SNAP..0.0).contains(&theta) {
        return Ok(0.0);
    }
    if theta > FRAC_PI_4 && theta <= FRAC_PI_4 + THETA_SNAP {
        return Ok(FRAC_PI_4);
    }
    if !(0.0..=FRAC_PI_4).contains(&theta) {
        return Err(Error::Domain(format!("theta outside [0, pi/4]: {value}")));
    }
    Ok(theta)
}

/// `start:stop:step` or a single number.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    if spec.contains(':') {
        Ok(ProbabilityGrid::parse(spec)?.points())
    } else {
        let v = spec.trim().parse::<f64>().map_err(|_| Error::Domain(format!("bad number {spec:?}")))?;
        Ok(vec![v])
    }
}

fn check_unit(values: &[f64], what: &str) -> Result<()> {
    for &v in values {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("{what} {v} outside [0, 1]")));
        }
    }
    Ok(())
}

fn render(table: &Table, format: Format, manifest: &RunManifest) -> String {
    match format {
        Format::Csv => table.to_csv(manifest),
        Format::Json => table.to_json(manifest),
    }
}

// ---------------------------------------------------------------- curves

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvesParams {
    pub theta: f64,
    pub pi_grid: Vec<f64>,
    pub format: Format,
}

pub fn run_curves(p: &CurvesParams, manifest: &RunManifest) -> Result<Output> {
    check_unit(&p.pi_grid, "inconclusive rate")?;
    let theta = p.theta;
    let mut table = Table::new(&[
        "p_inc",
        "ps_entangled",
        "ps_single_optimal",
        "ps_single_pure",
        "pts_entangled",
        "pts_single",
        "advantage",
    ]);
    let rel = |ps: f64, pi: f64| if pi < 1.0 { ps / (1.0 - pi) } else { f64::NAN };
    for &pi in &p.pi_grid {
        let ent = strategies::entangled_envelope(theta, pi)?.p_success;
        let single = strategies::single_envelope(theta, pi)?.p_success;
        let pure = strategies::single_pure_curve(theta, pi).map_or(f64::NAN, |(pt, _)| pt.p_success);
        table.push(vec![
            pi.into(),
            ent.into(),
            single.into(),
            pure.into(),
            rel(ent, pi).into(),
            rel(single, pi).into(),
            (ent - single).into(),
        ]);
    }
    Ok(Output { body: render(&table, p.format, manifest), status: Status::Ok })
}

// ---------------------------------------------------------------- hull

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullParams {
    pub c: f64,
    pub samples: usize,
    pub seed: u64,
    pub format: Format,
}

pub fn run_hull(p: &HullParams, manifest: &RunManifest) -> Result<Output> {
    let r = strategies::hull_verify(p.c, p.samples, p.seed)?;
    let tol = strategies::HULL_TOLERANCE;
    let mut problems = Vec::new();
    if r.max_deviation > tol {
        problems.push(format!("hull deviation {:.3e} > {tol:e}", r.max_deviation));
    }
    if let Some(e) = r.tangent_error.filter(|e| *e > tol) {
        problems.push(format!("tangent vertex off by {e:.3e} > {tol:e}"));
    }
    let body = match p.format {
        Format::Csv => {
            let mut t = Table::new(&["kind", "p_inc", "p_success", "value"]);
            let point = |t: &mut Table, kind: &str, (x, y): (f64, f64)| {
                t.push(vec![kind.into(), x.into(), y.into(), Cell::Empty])
            };
            point(&mut t, "A", r.point_a);
            if let Some(pt) = r.analytic_t {
                point(&mut t, "T", pt);
            }
            point(&mut t, "U", r.point_u);
            for &v in &r.hull_vertices {
                point(&mut t, "vertex", v);
            }
            for &s in &r.samples {
                point(&mut t, "sample", s);
            }
            let metric =
                |t: &mut Table, kind: &str, v: f64| t.push(vec![kind.into(), Cell::Empty, Cell::Empty, v.into()]);
            metric(&mut t, "max_deviation", r.max_deviation);
            metric(&mut t, "max_excess", r.max_excess);
            if let Some(e) = r.tangent_error {
                metric(&mut t, "tangent_error", e);
            }
            metric(&mut t, "degenerate", if r.degenerate { 1.0 } else { 0.0 });
            t.to_csv(manifest)
        }
        Format::Json => json_document(manifest, serde_json::to_value(&r).expect("report serializes")),
    };
    let status = if problems.is_empty() { Status::Ok } else { Status::Breach(problems.join("; ")) };
    Ok(Output { body, status })
}

// ---------------------------------------------------------------- convexity

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BranchChoice {
    Auto,
    Convex,
    Concave,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityParams {
    pub c_grid: Vec<f64>,
    /// Explicit `P_I` values; `None` selects the default per-`c` grids.
    pub pi_grid: Option<Vec<f64>>,
    /// Default-grid points on the convex branch.
    pub points: usize,
    pub h: f64,
    pub branch: BranchChoice,
    pub format: Format,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Default grid: `points` values in `[1e-3, P_IB − 1e-3]` and a third as many
/// in `[P_IB + 1e-3, U − 1e-3]` when that interval is not empty.
pub fn default_convexity_grid(c: f64, points: usize) -> Result<Vec<f64>> {
    let pib = strategies::boundary_pib(c)?;
    let u = strategies::single_qubit_max_inconclusive(c);
    let mut grid = linspace(BOUNDARY_MARGIN, pib - BOUNDARY_MARGIN, points);
    let (lo, hi) = (pib + BOUNDARY_MARGIN, u - BOUNDARY_MARGIN);
    if hi > lo {
        grid.extend(linspace(lo, hi, points.div_ceil(3)));
    }
    Ok(grid)
}

pub fn run_convexity(p: &ConvexityParams, manifest: &RunManifest) -> Result<Output> {
    if !(p.h > 0.0) {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {}", p.h)));
    }
    let mut table = Table::new(&["c", "p_inc", "d2_analytic", "d2_numeric", "rel_err", "branch"]);
    let mut problems = Vec::new();
    for &c in &p.c_grid {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::Domain(format!("overlap c must lie in (0, 1), got {c}")));
        }
        let grid = match &p.pi_grid {
            Some(g) => g.clone(),
            None => default_convexity_grid(c, p.points)?,
        };
        let pib = strategies::boundary_pib(c)?;
        for pi in grid {
            let check = match p.branch {
                BranchChoice::Auto if (pi - pib).abs() < BOUNDARY_MARGIN => None,
                BranchChoice::Auto => convexity::finite_difference_check(c, pi, p.h).ok(),
                BranchChoice::Convex => convexity::finite_difference_on_branch(c, pi, p.h, Branch::Convex).ok(),
                BranchChoice::Concave => convexity::finite_difference_on_branch(c, pi, p.h, Branch::Concave).ok(),
            };
            let Some(chk) = check else {
                table.push(vec![c.into(), pi.into(), Cell::Empty, Cell::Empty, Cell::Empty, "excluded".into()]);
                continue;
            };
            let bad_sign = match chk.branch {
                Branch::Convex => chk.analytic < CONVEXITY_THRESHOLD,
                Branch::Concave => chk.analytic >= 0.0,
            };
            if bad_sign {
                problems.push(format!(
                    "{} second derivative {:.3e} at c={c}, P_I={pi}",
                    chk.branch.as_str(),
                    chk.analytic
                ));
            }
            if chk.rel_err > REL_ERR_THRESHOLD {
                problems.push(format!("finite-difference mismatch {:.3e} at c={c}, P_I={pi}", chk.rel_err));
            }
            table.push(vec![
                c.into(),
                pi.into(),
                chk.analytic.into(),
                chk.numeric.into(),
                chk.rel_err.into(),
                chk.branch.as_str().into(),
            ]);
        }
    }
    let status = if problems.is_empty() {
        Status::Ok
    } else {
        Status::Breach(format!("{} problem(s), first: {}", problems.len(), problems[0]))
    };
    Ok(Output { body: render(&table, p.format, manifest), status })
}

// ---------------------------------------------------------------- oracle

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub theta: f64,
    pub pi: f64,
    pub method: Method,
    pub tol: f64,
    pub seed: u64,
    pub restarts: usize,
    pub grid_resolution: usize,
    pub free_rho: bool,
    pub format: Format,
}

fn matrix_rows(m: &Matrix2<f64>) -> Value {
    json!([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]])
}

pub fn run_oracle(p: &OracleParams, manifest: &RunManifest) -> Result<Output> {
    let pair = MeasurementPair::new(p.theta)?;
    let opts = OptimizeOptions {
        method: p.method,
        tol: p.tol,
        seed: p.seed,
        restarts: p.restarts,
        grid_resolution: p.grid_resolution,
        free_rho: p.free_rho,
    };
    let r = oracle::optimize_povm(&pair, p.pi, &opts)?;
    let closed = strategies::entangled_success(p.theta, p.pi)?.p_success;
    let gap = closed - r.point.p_success;

    let status = if !r.certified {
        Status::NonConvergence(format!("only {} restart(s) agree within tol", r.agreeing_restarts))
    } else if gap.abs() > p.tol {
        Status::Breach(format!("gap to closed form {gap:.3e} exceeds tol {:e}", p.tol))
    } else {
        Status::Ok
    };
    let body = match p.format {
        Format::Json => {
            let free_rho = r.free_rho.as_ref().map(|d| {
                json!({
                    "p_success": d.point.p_success,
                    "p_error": d.point.p_error,
                    "p_inconclusive": d.point.p_inconclusive,
                    "rho": matrix_rows(&d.rho),
                    "excess": d.excess,
                })
            });
            json_document(
                manifest,
                json!({
                    "theta": p.theta,
                    "p_inc_target": p.pi,
                    "method": p.method,
                    "p_success": r.point.p_success,
                    "p_error": r.point.p_error,
                    "p_inconclusive": r.point.p_inconclusive,
                    "closed_form": closed,
                    "gap": gap,
                    "converged": r.certified,
                    "agreeing_restarts": r.agreeing_restarts,
                    "blocks": {
                        "h_m": matrix_rows(&r.triple.h_m),
                        "h_n": matrix_rows(&r.triple.h_n),
                        "h_i": matrix_rows(&r.triple.h_i),
                    },
                    "min_eigenvalue": r.triple.min_eigenvalue(),
                    "restarts": r.restarts,
                    "free_rho": free_rho,
                }),
            )
        }
        Format::Csv => {
            let mut t = Table::new(&[
                "theta",
                "p_inc_target",
                "p_success",
                "p_error",
                "p_inconclusive",
                "closed_form",
                "gap",
                "converged",
            ]);
            t.push(vec![
                p.theta.into(),
                p.pi.into(),
                r.point.p_success.into(),
                r.point.p_error.into(),
                r.point.p_inconclusive.into(),
                closed.into(),
                gap.into(),
                Cell::Int(r.certified as u64),
            ]);
            t.to_csv(manifest)
        }
    };
    Ok(Output { body, status })
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Intermediate,
    Unambiguous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateParams {
    pub mode: Mode,
    /// Intermediate mode only.
    pub thetas: Vec<f64>,
    pub transmittances: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub noise: ImperfectionModel,
    pub feed_forward: bool,
    pub format: Format,
}

/// `ideal`, `preset_paperlike`, or a path to a TOML preset.
pub fn resolve_noise(spec: &str) -> Result<ImperfectionModel> {
    match spec {
        "ideal" => Ok(ImperfectionModel::ideal()),
        "preset_paperlike" | "paperlike" => Ok(ImperfectionModel::paperlike()),
        path => ImperfectionModel::load(std::path::Path::new(path)),
    }
}

pub fn run_simulate(p: &SimulateParams, manifest: &RunManifest) -> Result<Output> {
    check_unit(&p.transmittances, "transmittance")?;
    p.noise.validate()?;
    let table: ScanTable = match p.mode {
        Mode::Unambiguous => simulator::scan_unambiguous(&p.transmittances, p.trials, p.seed, &p.noise)?,
        Mode::Intermediate if p.feed_forward => {
            simulator::scan_intermediate(&p.thetas, &p.transmittances, p.trials, p.seed, &p.noise)?
        }
        Mode::Intermediate => {
            // diagnostic path; same seeding as the scan
            let mut rows = Vec::new();
            let with_ff = simulator::scan_intermediate(&p.thetas, &p.transmittances, 1, p.seed, &p.noise)?;
            for row in with_ff.rows {
                let cfg = ExperimentConfig {
                    theta: row.theta,
                    transmittance: row.transmittance,
                    trials: p.trials,
                    seed: row.seed,
                    imperfections: p.noise,
                    feed_forward: false,
                };
                let est = simulator::estimate(&simulator::run_trials(&cfg)?, &p.noise)?;
                rows.push(simulator::ScanRow { estimate: est, ..row });
            }
            ScanTable { rows }
        }
    };
    let mut t = Table::new(&[
        "theta",
        "transmittance",
        "p_success",
        "sigma_success",
        "p_error",
        "sigma_error",
        "p_inc",
        "sigma_inc",
        "relative_success",
        "sigma_relative",
        "registered",
        "row_seed",
    ]);
    for row in &table.rows {
        let e = &row.estimate;
        t.push(vec![
            row.theta.into(),
            row.transmittance.into(),
            e.point.p_success.into(),
            e.sigma_success.into(),
            e.point.p_error.into(),
            e.sigma_error.into(),
            e.point.p_inconclusive.into(),
            e.sigma_inconclusive.into(),
            e.relative_success.into(),
            e.sigma_relative.into(),
            e.registered.into(),
            row.seed.into(),
        ]);
    }
    Ok(Output { body: render(&t, p.format, manifest), status: Status::Ok })
}

// ---------------------------------------------------------------- dispatch

/// A command with its canonical parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Curves(CurvesParams),
    Hull(HullParams),
    Convexity(ConvexityParams),
    Oracle(OracleParams),
    Simulate(SimulateParams),
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Curves(_) => "curves",
            Job::Hull(_) => "hull",
            Job::Convexity(_) => "convexity",
            Job::Oracle(_) => "oracle",
            Job::Simulate(_) => "simulate",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Job::Hull(p) => Some(p.seed),
            Job::Oracle(p) => Some(p.seed),
            Job::Simulate(p) => Some(p.seed),
            Job::Curves(_) | Job::Convexity(_) => None,
        }
    }

    pub fn params(&self) -> Value {
        let v = match self {
            Job::Curves(p) => serde_json::to_value(p),
            Job::Hull(p) => serde_json::to_value(p),
            Job::Convexity(p) => serde_json::to_value(p),
            Job::Oracle(p) => serde_json::to_value(p),
            Job::Simulate(p) => serde_json::to_value(p),
        };
        v.expect("params serialize")
    }

    pub fn from_manifest(m: &RunManifest) -> Result<Self> {
        let bad = |e: serde_json::Error| Error::Config(format!("manifest params for {}: {e}", m.command));
        let p = m.params.clone();
        Ok(match m.command.as_str() {
            "curves" => Job::Curves(serde_json::from_value(p).map_err(bad)?),
            "hull" => Job::Hull(serde_json::from_value(p).map_err(bad)?),
            "convexity" => Job::Convexity(serde_json::from_value(p).map_err(bad)?),
            "oracle" => Job::Oracle(serde_json::from_value(p).map_err(bad)?),
            "simulate" => Job::Simulate(serde_json::from_value(p).map_err(bad)?),
            other => return Err(Error::Config(format!("unknown command in manifest: {other}"))),
        })
    }

    pub fn manifest(&self) -> RunManifest {
        RunManifest::new(self.name(), self.params(), self.seed())
    }

    pub fn run(&self, manifest: &RunManifest) -> Result<Output> {
        match self {
            Job::Curves(p) => run_curves(p, manifest),
            Job::Hull(p) => run_hull(p, manifest),
            Job::Convexity(p) => run_convexity(p, manifest),
            Job::Oracle(p) => run_oracle(p, manifest),
            Job::Simulate(p) => run_simulate(p, manifest),
        }
    }
}
