//! Lattice toolkit for the volume-penalized p-Dirichlet problem
//!
//! ```text
//! minimize  ∫_Ω |∇u|^p dx + F_ε(|{u > 0}|)   over u = φ₀ on ∂Ω,
//! F_ε(s) = ε (s − α)   if s < α,
//!          (s − α) / ε  if s ≥ α,
//! ```
//!
//! on rectangles, strips, annuli and half-disks in one or two dimensions.
//! The crate is `no_std` (it only needs `alloc`) and contains the numerical
//! core: the lattice and its boundary data ([`grid`]), the discrete
//! functional ([`energy`]), the relaxation/toggling minimizer ([`solver`]),
//! the free-boundary diagnostics ([`freeboundary`]) and closed-form or
//! brute-force reference solutions ([`oracles`]). File formats, the
//! experiment driver and the command line live in the `fbvol` crate.
#![no_std]
// once std is linked (test harness, or num-traits/std through feature
// unification) its inherent float methods shadow `Float`
#![allow(unused_imports)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

extern crate alloc;

pub mod energy;
mod error;
pub mod freeboundary;
pub mod grid;
mod num;
pub mod oracles;
pub mod solver;
mod stencil;

pub use energy::{
    dirichlet_p_energy, p_laplacian_residual, penalty, replacement_gap, total_energy, EnergyBreakdown,
    PenaltyParams, Residual,
};
pub use error::{Error, Result};
pub use grid::{
    positivity_measure, BoundaryData, Contact, GridDomain, NodeKind, ScalarField, SegmentTag,
};
pub use num::PowerLaw;
pub use solver::{
    harmonic_replacement, lattice_ball, p_harmonic_relax, solve_penalized, solve_penalized_from,
    toggle_sweep, truncate_negative,
    Solution, SolverConfig, TraceRow,
};
