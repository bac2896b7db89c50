use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::geometry::check_theta;
use crate::{Error, Result};

const PAPERLIKE: &str = include_str!("../../presets/preset_paperlike.toml");

/// Detector efficiencies, readout phase noise, singlet visibility and final
/// coupler imbalance (reflectance `½(1 + ε)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImperfectionModel {
    pub phase_noise_sigma_rad: f64,
    #[serde(rename = "eta_D0")]
    pub eta_d0: f64,
    #[serde(rename = "eta_D1")]
    pub eta_d1: f64,
    #[serde(rename = "eta_DA")]
    pub eta_da: f64,
    #[serde(rename = "eta_DB")]
    pub eta_db: f64,
    #[serde(rename = "eta_DI")]
    pub eta_di: f64,
    pub singlet_visibility: f64,
    pub splitter_imbalance: f64,
}

impl Default for ImperfectionModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl ImperfectionModel {
    pub fn ideal() -> Self {
        Self {
            phase_noise_sigma_rad: 0.0,
            eta_d0: 1.0,
            eta_d1: 1.0,
            eta_da: 1.0,
            eta_db: 1.0,
            eta_di: 1.0,
            singlet_visibility: 1.0,
            splitter_imbalance: 0.0,
        }
    }

    /// The frozen paper-like preset (`presets/preset_paperlike.toml`).
    pub fn paperlike() -> Self {
        Self::from_toml_str(PAPERLIKE).expect("bundled preset parses")
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let m: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("plain struct serializes")
    }

    /// First-qubit efficiencies `[η_D0, η_D1]`.
    pub fn eta_first(&self) -> [f64; 2] {
        [self.eta_d0, self.eta_d1]
    }

    /// Second-qubit efficiencies `[η_DA, η_DB, η_DI]`.
    pub fn eta_second(&self) -> [f64; 3] {
        [self.eta_da, self.eta_db, self.eta_di]
    }

    pub fn validate(&self) -> Result<()> {
        let etas = [
            ("eta_D0", self.eta_d0),
            ("eta_D1", self.eta_d1),
            ("eta_DA", self.eta_da),
            ("eta_DB", self.eta_db),
            ("eta_DI", self.eta_di),
        ];
        for (name, eta) in etas {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::Config(format!("{name} = {eta} outside (0, 1]")));
            }
        }
        let s = self.phase_noise_sigma_rad;
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::Config(format!("phase_noise_sigma_rad = {s} must be finite and non-negative")));
        }
        let v = self.singlet_visibility;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Config(format!("singlet_visibility = {v} outside [0, 1]")));
        }
        let e = self.splitter_imbalance;
        if !(-1.0..=1.0).contains(&e) {
            return Err(Error::Config(format!("splitter_imbalance = {e} outside [-1, 1]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub theta: f64,
    /// VRC transmittance `T = f²`.
    pub transmittance: f64,
    pub trials: u64,
    pub seed: u64,
    pub imperfections: ImperfectionModel,
    /// Diagnostic switch; `false` skips the conditional correction.
    pub feed_forward: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            theta: std::f64::consts::FRAC_PI_6,
            transmittance: 1.0,
            trials: 1_000_000,
            seed: 0,
            imperfections: ImperfectionModel::ideal(),
            feed_forward: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        check_theta(self.theta)?;
        if !(0.0..=1.0).contains(&self.transmittance) {
            return Err(Error::Domain(format!("transmittance {} outside [0, 1]", self.transmittance)));
        }
        if self.trials == 0 {
            return Err(Error::Domain("trials must be at least 1".into()));
        }
        self.imperfections.validate()
    }
}
