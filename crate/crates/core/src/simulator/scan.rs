use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{estimate, run_trials, Estimate, ExperimentConfig, ImperfectionModel};
use crate::{rng, Result};

/// VRC settings of the intermediate scan, from 1 down to 0.1.
pub const DEFAULT_TRANSMITTANCES: [f64; 10] = [1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1];

/// `θ_j = jπ/30`, `j = 1..7`.
pub fn default_thetas() -> Vec<f64> {
    (1..=7).map(|j| j as f64 * std::f64::consts::PI / 30.0).collect()
}

/// `T = 0, 0.1, …, 1`.
pub fn unambiguous_transmittances() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub theta: f64,
    pub transmittance: f64,
    pub seed: u64,
    pub estimate: Estimate,
}

/// Simulated rows in scan order. Unlike a closed-form curve, `P_I` need not
/// increase from row to row.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
}

fn row_seed(seed: u64, row: usize) -> u64 {
    rng::stream(seed, row as u64).random()
}

fn run_row(cfg: ExperimentConfig, row: usize) -> Result<ScanRow> {
    let seed = row_seed(cfg.seed, row);
    let cfg = ExperimentConfig { seed, ..cfg };
    let counts = run_trials(&cfg)?;
    Ok(ScanRow {
        theta: cfg.theta,
        transmittance: cfg.transmittance,
        seed,
        estimate: estimate(&counts, &cfg.imperfections)?,
    })
}

/// Every `(θ, T)` combination, θ-major. Row `r` uses its own seed derived
/// from `(seed, r)`.
pub fn scan_intermediate(
    thetas: &[f64],
    transmittances: &[f64],
    trials: u64,
    seed: u64,
    imperfections: &ImperfectionModel,
) -> Result<ScanTable> {
    let mut rows = Vec::with_capacity(thetas.len() * transmittances.len());
    for &theta in thetas {
        for &t in transmittances {
            let cfg = ExperimentConfig {
                theta,
                transmittance: t,
                trials,
                seed,
                imperfections: *imperfections,
                feed_forward: true,
            };
            rows.push(run_row(cfg, rows.len())?);
        }
    }
    Ok(ScanTable { rows })
}

/// For each `T` sets `θ = arctan √T`, so that the coupler realizes exactly
/// the error-free filter.
pub fn scan_unambiguous(
    transmittances: &[f64],
    trials: u64,
    seed: u64,
    imperfections: &ImperfectionModel,
) -> Result<ScanTable> {
    let mut rows = Vec::with_capacity(transmittances.len());
    for (r, &t) in transmittances.iter().enumerate() {
        if !(0.0..=1.0).contains(&t) {
            return Err(crate::Error::Domain(format!("transmittance {t} outside [0, 1]")));
        }
        let theta = t.sqrt().atan();
        let cfg = ExperimentConfig {
            theta,
            transmittance: t,
            trials,
            seed,
            imperfections: *imperfections,
            feed_forward: true,
        };
        rows.push(run_row(cfg, r)?);
    }
    Ok(ScanTable { rows })
}
