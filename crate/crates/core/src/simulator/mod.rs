//! Monte Carlo model of the feed-forward photonic experiment.
//!
//! Each trial picks the measurement, samples the outcome on the first qubit
//! of a (possibly Werner-degraded) singlet, collapses the partner, applies
//! the conditional correction, filters it on a variable-ratio coupler and
//! reads it out on a two-port interferometer. Detector `B` sits on the `|+⟩`
//! port and `A` on the `|−⟩` port.
//!
//! The correction is the π phase shift on the `|+⟩` arm, i.e. `σ_X` up to a
//! global sign, which maps `|φ^⊥⟩ → |ψ⟩` and `|ψ^⊥⟩ → |φ⟩`. After it the
//! partner carries `|φ⟩` for `(M, 1)` and `(N, 0)` and `|ψ⟩` otherwise, so
//! the success cells are `C_0A^M, C_1B^M, C_1A^N, C_0B^N`.

mod config;
mod estimate;
mod scan;

pub use config::{ExperimentConfig, ImperfectionModel};
pub use estimate::{estimate, Estimate};
pub use scan::{
    default_thetas, scan_intermediate, scan_unambiguous, unambiguous_transmittances, ScanRow, ScanTable,
    DEFAULT_TRANSMITTANCES,
};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::MeasurementPair;
use crate::rng::StreamFamily;
use crate::Result;

/// Trials per parallel batch. Only affects scheduling, never the counts.
const BATCH: u64 = 1 << 15;

/// Which measurement was applied to the first qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    M = 0,
    N = 1,
}

/// Second-photon detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Detector {
    A = 0,
    B = 1,
    I = 2,
}

/// Coincidence counts `C_ik^X`, indexed `[X][i][k]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoincidenceCounts {
    pub cells: [[[u64; 3]; 2]; 2],
}

impl CoincidenceCounts {
    pub fn get(&self, x: Basis, i: usize, k: Detector) -> u64 {
        self.cells[x as usize][i][k as usize]
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().flatten().sum()
    }

    fn record(&mut self, x: usize, i: usize, k: usize) {
        self.cells[x][i][k] += 1;
    }

    fn merge(mut self, other: Self) -> Self {
        for x in 0..2 {
            for i in 0..2 {
                for k in 0..3 {
                    self.cells[x][i][k] += other.cells[x][i][k];
                }
            }
        }
        self
    }
}

struct TrialModel {
    pair: MeasurementPair,
    transmittance: f64,
    visibility: f64,
    reflectance: f64,
    phase: Option<Normal<f64>>,
    eta_first: [f64; 2],
    eta_second: [f64; 3],
    feed_forward: bool,
}

impl TrialModel {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let imp = &cfg.imperfections;
        let sigma = imp.phase_noise_sigma_rad;
        Ok(Self {
            pair: MeasurementPair::new(cfg.theta)?,
            transmittance: cfg.transmittance,
            visibility: imp.singlet_visibility,
            reflectance: 0.5 * (1.0 + imp.splitter_imbalance),
            phase: (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("sigma validated")),
            eta_first: [imp.eta_d0, imp.eta_d1],
            eta_second: [imp.eta_da, imp.eta_db, imp.eta_di],
            feed_forward: cfg.feed_forward,
        })
    }

    /// Returns `(X, i, k)` or `None` when the coincidence is lost.
    fn trial(&self, rng: &mut ChaCha8Rng) -> Option<(usize, usize, usize)> {
        let x = usize::from(rng.random::<f64>() >= 0.5);
        let i = usize::from(rng.random::<f64>() >= 0.5);
        let (mut b0, mut b1) = if rng.random::<f64>() < self.visibility {
            // partner collapses onto the state orthogonal to the outcome
            pair_state(&self.pair, x, 1 - i)
        } else if rng.random::<f64>() < 0.5 {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        };
        if self.feed_forward && i == 0 {
            (b0, b1) = (b1, b0);
        }

        let k = if rng.random::<f64>() < b0 * b0 * (1.0 - self.transmittance) {
            Detector::I as usize
        } else {
            let (a0, a1) = (self.transmittance.sqrt() * b0, b1);
            let norm = a0 * a0 + a1 * a1;
            let chi = self.phase.map_or(0.0, |d| d.sample(rng));
            let r = self.reflectance;
            let p_plus =
                (r * a0 * a0 + (1.0 - r) * a1 * a1 + 2.0 * (r * (1.0 - r)).sqrt() * a0 * a1 * chi.cos()) / norm;
            if rng.random::<f64>() < p_plus {
                Detector::B as usize
            } else {
                Detector::A as usize
            }
        };

        let eta = self.eta_first[i] * self.eta_second[k];
        if eta < 1.0 && rng.random::<f64>() >= eta {
            return None;
        }
        Some((x, i, k))
    }
}

/// Real amplitudes of basis state `j` of measurement `x`.
fn pair_state(pair: &MeasurementPair, x: usize, j: usize) -> (f64, f64) {
    let s = match (x, j) {
        (0, 0) => pair.phi,
        (0, _) => pair.phi_perp,
        (_, 0) => pair.psi,
        _ => pair.psi_perp,
    };
    let a = s.amplitudes();
    (a[0], a[1])
}

/// Runs `cfg.trials` trials; trial `t` draws from stream `t` of `cfg.seed`,
/// so the counts do not depend on the number of worker threads.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<CoincidenceCounts> {
    let model = TrialModel::new(cfg)?;
    let family = StreamFamily::new(cfg.seed);
    let batches = cfg.trials.div_ceil(BATCH);
    let counts = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut counts = CoincidenceCounts::default();
            for t in b * BATCH..((b + 1) * BATCH).min(cfg.trials) {
                if let Some((x, i, k)) = model.trial(&mut family.get(t)) {
                    counts.record(x, i, k);
                }
            }
            counts
        })
        .reduce(CoincidenceCounts::default, CoincidenceCounts::merge);
    Ok(counts)
}
