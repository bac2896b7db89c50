//! Independent numerical route to the optima.
//!
//! A measurement-discrimination experiment is described by a process POVM
//! `{T_M, T_N, T_I}` on probe ⊗ outcome register with `ΣT_k = ρ ⊗ 𝕀`. For the
//! two measurements at hand the testers can be taken block diagonal, real and
//! covariant under `σ_Y`, which collapses the problem to a three-outcome POVM
//! `{2H_M, 2H_N, 2H_I}` discriminating the states `M_0` and `N_0`. This module
//! builds those objects, checks the reduction numerically and maximizes the
//! success probability at a fixed inconclusive rate without using any of the
//! closed forms.

mod optimize;
mod tester;

pub use optimize::{brute_force_single, optimize_povm, Method, OptimizeOptions, OptimizeResult, RestartSummary};
pub use tester::{
    measurement_operators, protocol_tester, random_tester, reduced_probabilities, symmetrize, tester_probabilities,
    MeasurementOperatorPair, PovmTriple, ProcessPovm, Tester, TesterComponent,
};
