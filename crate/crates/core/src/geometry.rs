//! Measurement bases, probe states and the intermediate filter.
//!
//! Everything here is real-valued: the two measurements are real projective
//! bases in the `x–z` plane of the Bloch sphere, so complex amplitudes never
//! appear. Equality of states is always judged on projectors, which removes
//! the global sign ambiguity.

use std::f64::consts::FRAC_PI_4;

use nalgebra::{Matrix2, Vector2};

use crate::{Error, Result, EXACT_TOL};

/// Pauli `σ_Y` in its real form `|0⟩⟨1| − |1⟩⟨0|`.
pub fn sigma_y() -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -1.0, 0.0)
}

/// Conjugation `U X U†` for a real matrix `U`.
pub fn conjugate(u: &Matrix2<f64>, x: &Matrix2<f64>) -> Matrix2<f64> {
    u * x * u.transpose()
}

/// Largest absolute entry of a matrix difference.
pub fn max_abs_diff(a: &Matrix2<f64>, b: &Matrix2<f64>) -> f64 {
    (a - b).amax()
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_4 + EXACT_TOL).contains(&theta) {
        return Err(Error::domain(format!("theta outside [0, pi/4]: {theta}")));
    }
    Ok(())
}

pub(crate) fn check_probability(p: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("{name} outside [0, 1]: {p}")));
    }
    Ok(())
}

/// Overlap `c = cos 2θ` of the two measurement bases, clamped at zero.
pub fn overlap_for_theta(theta: f64) -> f64 {
    (2.0 * theta).cos().max(0.0)
}

/// A pure qubit state with real amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubitState(Vector2<f64>);

impl PureQubitState {
    /// Builds a state from amplitudes that must already be unit-norm.
    pub fn new(a0: f64, a1: f64) -> Result<Self> {
        let v = Vector2::new(a0, a1);
        let norm_err = (v.norm_squared() - 1.0).abs();
        if norm_err > EXACT_TOL {
            return Err(Error::Validation { what: "state is not normalized".into(), residual: norm_err });
        }
        Ok(Self(v))
    }

    /// Normalizes arbitrary amplitudes; `None` for the zero vector.
    pub fn normalized(a0: f64, a1: f64) -> Option<Self> {
        let v = Vector2::new(a0, a1);
        let n = v.norm();
        (n > 0.0).then(|| Self(v / n))
    }

    pub fn zero() -> Self {
        Self(Vector2::new(1.0, 0.0))
    }

    pub fn one() -> Self {
        Self(Vector2::new(0.0, 1.0))
    }

    pub fn plus() -> Self {
        Self(Vector2::new(1.0, 1.0) / 2f64.sqrt())
    }

    pub fn minus() -> Self {
        Self(Vector2::new(1.0, -1.0) / 2f64.sqrt())
    }

    /// Probe `cos ϑ|0⟩ + sin ϑ|1⟩`.
    pub fn probe(angle: f64) -> Self {
        Self(Vector2::new(angle.cos(), angle.sin()))
    }

    pub fn amplitudes(&self) -> Vector2<f64> {
        self.0
    }

    pub fn projector(&self) -> Matrix2<f64> {
        self.0 * self.0.transpose()
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.0.dot(&other.0)
    }

    /// Probability of the projector `p` in this state.
    pub fn expectation(&self, p: &Matrix2<f64>) -> f64 {
        (self.0.transpose() * p * self.0)[(0, 0)]
    }

    /// Same ray in Hilbert space, judged on projectors.
    pub fn same_ray(&self, other: &Self, tol: f64) -> bool {
        max_abs_diff(&self.projector(), &other.projector()) <= tol
    }

    pub fn negated(&self) -> Self {
        Self(-self.0)
    }
}

/// The two projective bases `M = {|φ⟩, |φ⊥⟩}` and `N = {|ψ⟩, |ψ⊥⟩}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPair {
    pub theta: f64,
    pub phi: PureQubitState,
    pub phi_perp: PureQubitState,
    pub psi: PureQubitState,
    pub psi_perp: PureQubitState,
    pub m0: Matrix2<f64>,
    pub m1: Matrix2<f64>,
    pub n0: Matrix2<f64>,
    pub n1: Matrix2<f64>,
}

impl MeasurementPair {
    /// Builds the pair for `θ ∈ [0, π/4]`. Angles outside that range are
    /// rejected; mapping arbitrary bases into normal form is left to callers.
    pub fn new(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        let (s, c) = theta.sin_cos();
        let phi = PureQubitState(Vector2::new(c, s));
        let phi_perp = PureQubitState(Vector2::new(s, -c));
        let psi = PureQubitState(Vector2::new(c, -s));
        let psi_perp = PureQubitState(Vector2::new(s, c));
        Ok(Self {
            theta,
            m0: phi.projector(),
            m1: phi_perp.projector(),
            n0: psi.projector(),
            n1: psi_perp.projector(),
            phi,
            phi_perp,
            psi,
            psi_perp,
        })
    }

    /// `|⟨ψ|φ⟩| = cos 2θ`, the inconclusive rate of error-free discrimination.
    pub fn overlap(&self) -> f64 {
        self.phi.inner(&self.psi).abs()
    }

    /// Projector of measurement `m` (0 = M, 1 = N) for outcome `i`.
    pub fn projector(&self, m: usize, i: usize) -> &Matrix2<f64> {
        match (m, i) {
            (0, 0) => &self.m0,
            (0, _) => &self.m1,
            (_, 0) => &self.n0,
            _ => &self.n1,
        }
    }
}

pub fn measurement_pair(theta: f64) -> Result<MeasurementPair> {
    MeasurementPair::new(theta)
}

pub fn overlap(pair: &MeasurementPair) -> f64 {
    pair.overlap()
}

pub fn apply_sigma_y(state: &PureQubitState) -> PureQubitState {
    PureQubitState(sigma_y() * state.0)
}

/// Probabilistic filter `F = f|0⟩⟨0| + |1⟩⟨1|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterOperator {
    f: f64,
}

impl FilterOperator {
    pub fn new(f: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::domain(format!("filter attenuation outside [0, 1]: {f}")));
        }
        Ok(Self { f })
    }

    pub fn identity() -> Self {
        Self { f: 1.0 }
    }

    pub fn attenuation(&self) -> f64 {
        self.f
    }

    /// Intensity transmittance `f²` of the `|0⟩` arm.
    pub fn transmittance(&self) -> f64 {
        self.f * self.f
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.f, 0.0, 0.0, 1.0)
    }
}

/// Optimal filter for an inconclusive budget `p_inc ≤ cos 2θ`:
/// `f = √(1 − p_inc / cos²θ)`.
pub fn filter_for_budget(theta: f64, p_inc: f64) -> Result<FilterOperator> {
    check_theta(theta)?;
    check_probability(p_inc, "inconclusive budget")?;
    let c = overlap_for_theta(theta);
    if p_inc > c + EXACT_TOL {
        return Err(Error::domain(format!("budget exceeds IDP point: p_inc = {p_inc} > cos 2theta = {c}")));
    }
    let cos2 = theta.cos().powi(2);
    let f = (1.0 - p_inc / cos2).max(0.0).sqrt();
    FilterOperator::new(f.min(1.0))
}

/// Result of passing a state through a filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterOutcome {
    /// Normalized output; `None` when the filter annihilates the state.
    pub state: Option<PureQubitState>,
    pub success_prob: f64,
}

pub fn apply_filter(filter: &FilterOperator, state: &PureQubitState) -> FilterOutcome {
    let out = filter.matrix() * state.0;
    let success_prob = out.norm_squared().clamp(0.0, 1.0);
    FilterOutcome { state: PureQubitState::normalized(out[0], out[1]), success_prob }
}
