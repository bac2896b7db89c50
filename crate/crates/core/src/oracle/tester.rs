use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{conjugate, sigma_y, FilterOperator, MeasurementPair, PureQubitState};
use crate::strategies::StrategyPoint;
use crate::{rng, Error, Result};

/// Residual allowed on `ΣT_k = ρ ⊗ 𝕀` for general testers.
pub const TESTER_TOL: f64 = 1e-8;
/// Residual allowed on `ΣH_k = 𝕀/2` for reduced triples.
pub const TRIPLE_TOL: f64 = 1e-10;

fn ket_bra(i: usize) -> Matrix2<f64> {
    let mut m = Matrix2::zeros();
    m[(i, i)] = 1.0;
    m
}

fn min_eigenvalue2(m: &Matrix2<f64>) -> f64 {
    let sym = 0.5 * (m + m.transpose());
    let (a, b, d) = (sym[(0, 0)], sym[(0, 1)], sym[(1, 1)]);
    0.5 * (a + d) - (0.25 * (a - d) * (a - d) + b * b).sqrt()
}

fn min_eigenvalue4(m: &Matrix4<f64>) -> f64 {
    let sym = 0.5 * (m + m.transpose());
    SymmetricEigen::new(sym).eigenvalues.min()
}

/// Blocks `H_{k,0}`, `H_{k,1}` of `T_k = H_{k,0}⊗|0⟩⟨0| + H_{k,1}⊗|1⟩⟨1|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TesterComponent {
    pub h0: Matrix2<f64>,
    pub h1: Matrix2<f64>,
}

impl TesterComponent {
    pub fn to_operator(&self) -> Matrix4<f64> {
        self.h0.kronecker(&ket_bra(0)) + self.h1.kronecker(&ket_bra(1))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue2(&self.h0).min(min_eigenvalue2(&self.h1))
    }

    fn block(&self, i: usize) -> &Matrix2<f64> {
        if i == 0 {
            &self.h0
        } else {
            &self.h1
        }
    }
}

/// Block-diagonal tester; outcomes guess `M`, guess `N`, inconclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tester {
    pub m: TesterComponent,
    pub n: TesterComponent,
    pub i: TesterComponent,
}

impl Tester {
    pub fn components(&self) -> [&TesterComponent; 3] {
        [&self.m, &self.n, &self.i]
    }

    pub fn to_process_povm(&self) -> ProcessPovm {
        ProcessPovm { t_m: self.m.to_operator(), t_n: self.n.to_operator(), t_i: self.i.to_operator() }
    }

    /// Outcome probabilities via the block form, skipping validation.
    pub(crate) fn probabilities_unchecked(&self, pair: &MeasurementPair) -> (f64, f64, f64) {
        let mut ps = 0.0;
        let mut pe = 0.0;
        let mut pi = 0.0;
        for i in 0..2 {
            let (mi, ni) = (pair.projector(0, i), pair.projector(1, i));
            let (hm, hn, hi) = (self.m.block(i), self.n.block(i), self.i.block(i));
            ps += hm.dot(mi) + hn.dot(ni);
            pe += hm.dot(ni) + hn.dot(mi);
            pi += hi.dot(&(mi + ni));
        }
        (0.5 * ps, 0.5 * pe, 0.5 * pi)
    }

    /// `ρ = ΣH_{k,0}`; the caller is responsible for validity.
    pub fn density(&self) -> Matrix2<f64> {
        self.m.h0 + self.n.h0 + self.i.h0
    }
}

/// General process POVM `{T_M, T_N, T_I}` on probe ⊗ outcome register.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessPovm {
    pub t_m: Matrix4<f64>,
    pub t_n: Matrix4<f64>,
    pub t_i: Matrix4<f64>,
}

impl ProcessPovm {
    /// Checks `T_k ≥ 0` and `ΣT_k = ρ ⊗ 𝕀` for a density `ρ`; returns `ρ`.
    pub fn validate(&self) -> Result<Matrix2<f64>> {
        for (name, t) in [("T_M", &self.t_m), ("T_N", &self.t_n), ("T_I", &self.t_i)] {
            let ev = min_eigenvalue4(t);
            if ev < -TESTER_TOL {
                return Err(Error::Validation { what: format!("{name} is not positive semidefinite"), residual: -ev });
            }
        }
        let sum = self.t_m + self.t_n + self.t_i;
        // ρ = ½ Tr_register(ΣT_k)
        let rho = Matrix2::from_fn(|a, b| 0.5 * (sum[(2 * a, 2 * b)] + sum[(2 * a + 1, 2 * b + 1)]));
        let residual = (sum - rho.kronecker(&Matrix2::identity())).amax();
        if residual > TESTER_TOL {
            return Err(Error::Validation { what: "sum of tester elements is not rho (x) I".into(), residual });
        }
        let trace_err = (rho.trace() - 1.0).abs();
        if trace_err > TESTER_TOL {
            return Err(Error::Validation { what: "rho does not have unit trace".into(), residual: trace_err });
        }
        let ev = min_eigenvalue2(&rho);
        if ev < -TESTER_TOL {
            return Err(Error::Validation { what: "rho is not positive semidefinite".into(), residual: -ev });
        }
        Ok(rho)
    }
}

/// `E_X = X_0ᵀ⊗|0⟩⟨0| + X_1ᵀ⊗|1⟩⟨1|` for both measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementOperatorPair {
    pub e_m: Matrix4<f64>,
    pub e_n: Matrix4<f64>,
}

pub fn measurement_operators(pair: &MeasurementPair) -> MeasurementOperatorPair {
    let e = |x0: &Matrix2<f64>, x1: &Matrix2<f64>| {
        x0.transpose().kronecker(&ket_bra(0)) + x1.transpose().kronecker(&ket_bra(1))
    };
    MeasurementOperatorPair { e_m: e(&pair.m0, &pair.m1), e_n: e(&pair.n0, &pair.n1) }
}

/// `P_S = ½(Tr[T_M E_Mᵀ] + Tr[T_N E_Nᵀ])`, `P_E = ½(Tr[T_M E_Nᵀ] + Tr[T_N E_Mᵀ])`,
/// `P_I = ½Tr[T_I(E_Mᵀ + E_Nᵀ)]`.
pub fn tester_probabilities(povm: &ProcessPovm, pair: &MeasurementPair) -> Result<StrategyPoint> {
    povm.validate()?;
    let ops = measurement_operators(pair);
    let (em, en) = (ops.e_m.transpose(), ops.e_n.transpose());
    let tr = |a: &Matrix4<f64>, b: &Matrix4<f64>| (a * b).trace();
    let ps = 0.5 * (tr(&povm.t_m, &em) + tr(&povm.t_n, &en));
    let pe = 0.5 * (tr(&povm.t_m, &en) + tr(&povm.t_n, &em));
    let pi = 0.5 * tr(&povm.t_i, &(em + en));
    Ok(StrategyPoint { p_success: ps, p_error: pe, p_inconclusive: pi })
}

/// Covariant projection `H_{k,0} → ½(H_{k,0} + σ_Y H_{k,1} σ_Y†)`,
/// `H_{k,1} → ½(H_{k,1} + σ_Y H_{k,0} σ_Y†)`.
pub fn symmetrize(tester: &Tester) -> Tester {
    let s = sigma_y();
    let sym = |c: &TesterComponent| TesterComponent {
        h0: 0.5 * (c.h0 + conjugate(&s, &c.h1)),
        h1: 0.5 * (c.h1 + conjugate(&s, &c.h0)),
    };
    Tester { m: sym(&tester.m), n: sym(&tester.n), i: sym(&tester.i) }
}

/// Covariant real tester with `ρ = 𝕀/2`, given by its outcome-0 blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PovmTriple {
    pub h_m: Matrix2<f64>,
    pub h_n: Matrix2<f64>,
    pub h_i: Matrix2<f64>,
}

impl PovmTriple {
    /// Checks `H_k ≥ 0` and `H_M + H_N + H_I = 𝕀/2`.
    pub fn validate(&self) -> Result<()> {
        let residual = (self.h_m + self.h_n + self.h_i - 0.5 * Matrix2::<f64>::identity()).amax();
        if residual > TRIPLE_TOL {
            return Err(Error::Validation { what: "H_M + H_N + H_I != I/2".into(), residual });
        }
        let ev = self.min_eigenvalue();
        if ev < -TRIPLE_TOL {
            return Err(Error::Validation { what: "block is not positive semidefinite".into(), residual: -ev });
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        [self.h_m, self.h_n, self.h_i].iter().map(min_eigenvalue2).fold(f64::INFINITY, f64::min)
    }

    /// Expands to the full covariant tester `H_{k,1} = σ_Y H_{k,0} σ_Y†`.
    pub fn to_tester(&self) -> Tester {
        let s = sigma_y();
        let comp = |h: &Matrix2<f64>| TesterComponent { h0: *h, h1: conjugate(&s, h) };
        Tester { m: comp(&self.h_m), n: comp(&self.h_n), i: comp(&self.h_i) }
    }

    pub(crate) fn probabilities_unchecked(&self, pair: &MeasurementPair) -> (f64, f64, f64) {
        let ps = self.h_m.dot(&pair.m0) + self.h_n.dot(&pair.n0);
        let pe = self.h_n.dot(&pair.m0) + self.h_m.dot(&pair.n0);
        let pi = self.h_i.dot(&(pair.m0 + pair.n0));
        (ps, pe, pi)
    }
}

/// `P_S = Tr[H_M M_0] + Tr[H_N N_0]`, `P_E = Tr[H_N M_0] + Tr[H_M N_0]`,
/// `P_I = Tr[H_I (M_0 + N_0)]`.
pub fn reduced_probabilities(triple: &PovmTriple, pair: &MeasurementPair) -> Result<StrategyPoint> {
    triple.validate()?;
    let (ps, pe, pi) = triple.probabilities_unchecked(pair);
    Ok(StrategyPoint { p_success: ps, p_error: pe, p_inconclusive: pi })
}

/// Tester of the feed-forward protocol: singlet probe, `σ_Y` on the partner
/// after outcome 0, filter `diag(f, 1)`, then `|+⟩ → M`, `|−⟩ → N`, filter
/// loss `→ I`. Blocks are `H_{k,i} = Tr_B[(𝕀 ⊗ Π_k^{(i)}) |Ψ⁻⟩⟨Ψ⁻|]`.
pub fn protocol_tester(filter: &FilterOperator) -> Tester {
    // |Ψ⁻⟩ = (|01⟩ − |10⟩)/√2, index 2a + b
    let singlet = Vector4::new(0.0, 1.0, -1.0, 0.0) / 2f64.sqrt();
    let psi = singlet * singlet.transpose();
    let f = filter.matrix();
    let plus = PureQubitState::plus().projector();
    let minus = PureQubitState::minus().projector();
    let fail = Matrix2::identity() - f.transpose() * f;
    let s = sigma_y();

    let reduce = |pi_b: &Matrix2<f64>| -> Matrix2<f64> {
        let op = Matrix2::identity().kronecker(pi_b) * psi;
        Matrix2::from_fn(|a, c| op[(2 * a, 2 * c)] + op[(2 * a + 1, 2 * c + 1)])
    };
    // conditional unitary before the filter
    let effect = |u: &Matrix2<f64>, p: &Matrix2<f64>| u.transpose() * f.transpose() * p * f * u;
    let branch =
        |u: &Matrix2<f64>| [reduce(&effect(u, &plus)), reduce(&effect(u, &minus)), reduce(&(u.transpose() * fail * u))];
    let b0 = branch(&s);
    let b1 = branch(&Matrix2::identity());
    Tester {
        m: TesterComponent { h0: b0[0], h1: b1[0] },
        n: TesterComponent { h0: b0[1], h1: b1[1] },
        i: TesterComponent { h0: b0[2], h1: b1[2] },
    }
}

/// A valid, generally non-covariant tester drawn from stream `index` of `seed`.
///
/// Each block is `ρ^{1/2} S_i^{-1/2} G_{k,i} S_i^{-1/2} ρ^{1/2}` with random
/// Gram matrices `G_{k,i}` and a random real density `ρ`.
pub fn random_tester(seed: u64, index: u64) -> Tester {
    let mut rng = rng::stream(seed, index);
    let mut gram = || {
        let a = Matrix2::from_fn(|_, _| rng.random_range(-1.0..1.0));
        a * a.transpose() + 1e-3 * Matrix2::identity()
    };
    let g: [[Matrix2<f64>; 2]; 3] = [[gram(), gram()], [gram(), gram()], [gram(), gram()]];
    let b = gram();
    let rho = b / b.trace();
    let r = sqrt_spd(&rho);
    let block = |k: usize, i: usize| {
        let s = g[0][i] + g[1][i] + g[2][i];
        let w = r * inv_sqrt_spd(&s);
        w * g[k][i] * w.transpose()
    };
    let comp = |k| TesterComponent { h0: block(k, 0), h1: block(k, 1) };
    Tester { m: comp(0), n: comp(1), i: comp(2) }
}

/// Principal square root of a symmetric positive-definite 2×2 matrix.
pub(crate) fn sqrt_spd(m: &Matrix2<f64>) -> Matrix2<f64> {
    let s = m.determinant().max(0.0).sqrt();
    let t = (m.trace() + 2.0 * s).sqrt();
    (m + s * Matrix2::identity()) / t
}

pub(crate) fn inv_sqrt_spd(m: &Matrix2<f64>) -> Matrix2<f64> {
    let r = sqrt_spd(m);
    let det = r.determinant();
    Matrix2::new(r[(1, 1)], -r[(0, 1)], -r[(1, 0)], r[(0, 0)]) / det
}
