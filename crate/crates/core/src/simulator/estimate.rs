use serde::{Deserialize, Serialize};

use super::{CoincidenceCounts, ImperfectionModel};
use crate::strategies::StrategyPoint;
use crate::{Error, Result};

/// Estimated probabilities with binomial standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub point: StrategyPoint,
    pub sigma_success: f64,
    pub sigma_error: f64,
    pub sigma_inconclusive: f64,
    /// `P_S / (1 − P_I)`; NaN when every event was inconclusive.
    pub relative_success: f64,
    pub sigma_relative: f64,
    /// Registered (unscaled) coincidences.
    pub registered: u64,
}

/// Rescales `C_ik^X → C_ik^X / (η_i η_k)` and forms
/// `P_S = (C_0A^M + C_1B^M + C_1A^N + C_0B^N)/C_tot`,
/// `P_I = ΣC_iI^X / C_tot`, `P_E = 1 − P_S − P_I` (summed from the error
/// cells, so an error-free run gives exactly zero).
pub fn estimate(counts: &CoincidenceCounts, imperfections: &ImperfectionModel) -> Result<Estimate> {
    let registered = counts.total();
    if registered == 0 {
        return Err(Error::EmptyCounts);
    }
    let (eta1, eta2) = (imperfections.eta_first(), imperfections.eta_second());
    let scaled = |x: usize, i: usize, k: usize| counts.cells[x][i][k] as f64 / (eta1[i] * eta2[k]);

    // [X][i] -> success detector (A = 0, B = 1)
    const SUCCESS: [[usize; 2]; 2] = [[0, 1], [1, 0]];
    let (mut s, mut err, mut inc) = (0.0, 0.0, 0.0);
    for (x, row) in SUCCESS.iter().enumerate() {
        for (i, &k) in row.iter().enumerate() {
            s += scaled(x, i, k);
            err += scaled(x, i, 1 - k);
            inc += scaled(x, i, 2);
        }
    }
    let tot = s + err + inc;
    let ps = s / tot;
    let pi = inc / tot;
    let pe = err / tot;
    let n = registered as f64;
    let sd = |p: f64| (p * (1.0 - p) / n).max(0.0).sqrt();

    let conclusive = tot - inc;
    let (rel, sigma_rel) = if conclusive > 0.0 {
        let r = s / conclusive;
        let n_c = (n * (1.0 - pi)).max(1.0);
        (r, (r * (1.0 - r) / n_c).max(0.0).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(Estimate {
        point: StrategyPoint { p_success: ps, p_error: pe, p_inconclusive: pi },
        sigma_success: sd(ps),
        sigma_error: sd(pe),
        sigma_inconclusive: sd(pi),
        relative_success: rel,
        sigma_relative: sigma_rel,
        registered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(f: impl Fn(usize, usize, usize) -> u64) -> CoincidenceCounts {
        let mut c = CoincidenceCounts::default();
        for x in 0..2 {
            for i in 0..2 {
                for k in 0..3 {
                    c.cells[x][i][k] = f(x, i, k);
                }
            }
        }
        c
    }

    #[test]
    fn all_success_cells() {
        let c = counts(|x, i, k| u64::from(k == [[0, 1], [1, 0]][x][i]) * 10);
        let e = estimate(&c, &ImperfectionModel::ideal()).unwrap();
        assert_eq!((e.point.p_success, e.point.p_error, e.point.p_inconclusive), (1.0, 0.0, 0.0));
    }

    #[test]
    fn all_inconclusive_cells() {
        let c = counts(|_, _, k| u64::from(k == 2) * 7);
        let e = estimate(&c, &ImperfectionModel::ideal()).unwrap();
        assert_eq!((e.point.p_success, e.point.p_error, e.point.p_inconclusive), (0.0, 0.0, 1.0));
        assert!(e.relative_success.is_nan());
    }

    #[test]
    fn uniform_cells() {
        let e = estimate(&counts(|_, _, _| 5), &ImperfectionModel::ideal()).unwrap();
        for p in [e.point.p_success, e.point.p_error, e.point.p_inconclusive] {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((e.point.sum() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rescaling_undoes_efficiencies() {
        let mut imp = ImperfectionModel::ideal();
        imp.eta_di = 0.5;
        let c = counts(|_, _, k| if k == 2 { 5 } else { 10 });
        let e = estimate(&c, &imp).unwrap();
        for p in [e.point.p_success, e.point.p_error, e.point.p_inconclusive] {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_counts() {
        assert_eq!(estimate(&CoincidenceCounts::default(), &ImperfectionModel::ideal()), Err(Error::EmptyCounts));
    }
}
